//! Noisy single-gate evolution: the superoperator `V(t)` built from the
//! transition tensor and the kernel, and its population-transfer block.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelValue;
use crate::linalg::{hermitian_eigenvalues4, Matrix};
use crate::multiplet::{basis_change, transition_tensor, MultipletBasis, MultipletState, TransitionTensor};
use crate::scalar::Real;

/// Which operator basis a density matrix is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Multiplet,
    Computational,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<T> {
    rho: Matrix<Complex<T>, 4>,
    representation: Representation,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates hermiticity and unit trace. Positivity is not required.
    pub fn new(rho: Matrix<Complex<T>, 4>, representation: Representation) -> Result<Self> {
        let tol = T::validation_tol();
        if rho.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("density matrix", "entries must be finite"));
        }
        for i in 0..4 {
            for j in 0..4 {
                if (rho[i][j] - rho[j][i].conj()).norm() > tol {
                    return Err(Error::invalid(
                        "density matrix",
                        format!("not Hermitian at ({}, {})", i + 1, j + 1),
                    ));
                }
            }
        }
        let trace = (0..4).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + rho[i][i]);
        if (trace - Complex::new(T::one(), T::zero())).norm() > tol {
            return Err(Error::invalid(
                "density matrix",
                format!("trace {} differs from 1", trace),
            ));
        }
        Ok(Self { rho, representation })
    }

    /// `|m⟩⟨m|` in the multiplet representation.
    pub fn pure_multiplet(state: MultipletState) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let mut rho = [[zero; 4]; 4];
        let i = state.index();
        rho[i][i] = Complex::new(T::one(), T::zero());
        Self {
            rho,
            representation: Representation::Multiplet,
        }
    }

    pub fn rho(&self) -> &Matrix<Complex<T>, 4> {
        &self.rho
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn diagonal(&self) -> [T; 4] {
        [0, 1, 2, 3].map(|i| self.rho[i][i].re)
    }

    pub fn min_eigenvalue(&self) -> T {
        hermitian_eigenvalues4(&self.rho)[0]
    }

    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.rho[i][j] - self.rho[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Re-expresses a multiplet-basis density matrix in the computational basis.
    pub fn to_computational(&self, basis: &MultipletBasis<T>) -> Result<Self> {
        if self.representation != Representation::Multiplet {
            return Err(Error::invalid("density matrix", "already in the computational basis"));
        }
        Ok(Self {
            rho: basis_change(basis).to_computational(&self.rho),
            representation: Representation::Computational,
        })
    }
}

/// Dense `V_{(ab),(cd)}`, row `4a+b`, column `4c+d`, acting on multiplet
/// components.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSuperoperator<T> {
    v: Matrix<Complex<T>, 16>,
    alpha: T,
}

impl<T: Real> EvolutionSuperoperator<T> {
    pub fn matrix(&self) -> &Matrix<Complex<T>, 16> {
        &self.v
    }

    /// The `Re k` the operator was built with.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> Complex<T> {
        self.v[4 * a + b][4 * c + d]
    }

    /// `ρ_ab(t) = Σ_cd V_{ab,cd} ρ_cd(0)`. The result is not re-validated:
    /// the first-order map need not preserve positivity.
    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        if rho.representation != Representation::Multiplet {
            return Err(Error::invalid(
                "density matrix",
                "the superoperator acts on multiplet-basis components",
            ));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = [[zero; 4]; 4];
        for (row, vr) in self.v.iter().enumerate() {
            out[row / 4][row % 4] = vr
                .iter()
                .enumerate()
                .fold(zero, |acc, (col, &v)| acc + v * rho.rho[col / 4][col % 4]);
        }
        Ok(DensityMatrix {
            rho: out,
            representation: Representation::Multiplet,
        })
    }
}

/// Builds
///
/// ```text
/// V_{ab,cd} = e^{−it(E_a−E_b)} { δ_ac δ_bd
///            − k  [δ_bd Σ_{a'} M_{a a' a' c} − M_{acdb}]
///            − k* [δ_ac Σ_{a'} M_{d a' a' b} − M_{acdb}] }
/// ```
///
/// The `k*` bracket contracts `M_{d a' a' b}`, which is the ordering that
/// preserves trace and hermiticity.
pub fn build_superoperator<T: Real>(
    m: &TransitionTensor<T>,
    energies: [T; 4],
    k: KernelValue<T>,
    t: T,
) -> Result<EvolutionSuperoperator<T>> {
    if energies.iter().any(|e| !e.is_finite()) || !t.is_finite() || !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::invalid(
            "superoperator input",
            "energies, time and kernel must be finite",
        ));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let kk = Complex::new(k.re, k.im);
    let kc = kk.conj();
    let delta = |i: usize, j: usize| if i == j { one } else { zero };
    let mut v = [[zero; 16]; 16];
    for a in 0..4 {
        for b in 0..4 {
            let phase = Complex::from_polar(T::one(), -t * (energies[a] - energies[b]));
            for c in 0..4 {
                for d in 0..4 {
                    let exchange = m.get(a, c, d, b);
                    let left = delta(b, d) * m.contracted(a, c) - exchange;
                    let right = delta(a, c) * m.contracted(d, b) - exchange;
                    v[4 * a + b][4 * c + d] = phase * (delta(a, c) * delta(b, d) - kk * left - kc * right);
                }
            }
        }
    }
    Ok(EvolutionSuperoperator { v, alpha: k.re })
}

/// Population-transfer block `P_ac = V_{(aa),(cc)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationMatrix<T> {
    pub p: Matrix<T, 4>,
    pub alpha: T,
}

impl<T: Real> PopulationMatrix<T> {
    pub fn apply(&self, populations: [T; 4]) -> [T; 4] {
        let mut out = [T::zero(); 4];
        for (a, o) in out.iter_mut().enumerate() {
            *o = (0..4).fold(T::zero(), |acc, c| acc + self.p[a][c] * populations[c]);
        }
        out
    }

    pub fn column_sums(&self) -> [T; 4] {
        [0, 1, 2, 3].map(|c| (0..4).fold(T::zero(), |acc, a| acc + self.p[a][c]))
    }
}

pub fn population_matrix<T: Real>(v: &EvolutionSuperoperator<T>) -> Result<PopulationMatrix<T>> {
    let mut p = [[T::zero(); 4]; 4];
    for (a, row) in p.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            let z = v.entry(a, a, c, c);
            if z.im.abs() > T::validation_tol() {
                return Err(Error::Consistency(format!(
                    "population entry ({}, {}) has imaginary part {}",
                    a + 1,
                    c + 1,
                    z.im
                )));
            }
            *x = z.re;
        }
    }
    Ok(PopulationMatrix { p, alpha: v.alpha })
}

/// Population matrix of a basis for a purely dissipative kernel `k = α`.
pub fn population_matrix_for<T: Real>(basis: &MultipletBasis<T>, alpha: T) -> Result<PopulationMatrix<T>> {
    let v = build_superoperator(
        &transition_tensor(basis),
        basis.energies(),
        KernelValue {
            re: alpha,
            im: T::zero(),
        },
        T::zero(),
    )?;
    population_matrix(&v)
}

/// The CNOT population matrix in the form usually quoted for the model:
/// `1 − 2α` / `α` on the upper block, `1 − 3α/2` / `α/2` on the lower one,
/// `α/2` between the blocks.
pub fn cnot_population_closed_form<T: Real>(alpha: T) -> Result<PopulationMatrix<T>> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::domain(
            "cnot_population_closed_form",
            alpha.as_f64(),
            "alpha >= 0",
        ));
    }
    let one = T::one();
    let half = alpha / T::lit(2.0);
    let upper = one - T::lit(2.0) * alpha;
    let lower = one - T::lit(1.5) * alpha;
    Ok(PopulationMatrix {
        p: [
            [upper, alpha, half, half],
            [alpha, upper, half, half],
            [half, half, lower, half],
            [half, half, half, lower],
        ],
        alpha,
    })
}

fn check_alpha<T: Real>(what: &'static str, alpha: T) -> Result<()> {
    if alpha >= T::zero() && alpha <= T::lit(0.5) {
        Ok(())
    } else {
        Err(Error::domain(what, alpha.as_f64(), "0 <= alpha <= 1/2"))
    }
}

/// Computational-outcome probabilities after the gate, starting from one
/// multiplet state: the population matrix moves weight between multiplet
/// states, which are then expanded in the computational basis.
pub fn evolve_populations<T: Real>(initial: MultipletState, alpha: T, basis: &MultipletBasis<T>) -> Result<[T; 4]> {
    check_alpha("evolve_populations", alpha)?;
    let p = population_matrix_for(basis, alpha)?;
    populations_through(&p, initial, basis)
}

/// Same as [`evolve_populations`] with an explicit population matrix.
pub fn populations_through<T: Real>(
    p: &PopulationMatrix<T>,
    initial: MultipletState,
    basis: &MultipletBasis<T>,
) -> Result<[T; 4]> {
    let mut start = [T::zero(); 4];
    start[initial.index()] = T::one();
    let pops = p.apply(start);
    let zero = Complex::new(T::zero(), T::zero());
    let mut rho = [[zero; 4]; 4];
    for (i, &x) in pops.iter().enumerate() {
        rho[i][i] = Complex::new(x, T::zero());
    }
    let comp = basis_change(basis).to_computational(&rho);
    Ok([0, 1, 2, 3].map(|i| comp[i][i].re))
}

/// Full evolution of `|m⟩⟨m|`, keeping the coherences the superoperator
/// generates, read out in the computational basis.
pub fn evolve_state<T: Real>(
    initial: MultipletState,
    k: KernelValue<T>,
    t: T,
    basis: &MultipletBasis<T>,
) -> Result<DensityMatrix<T>> {
    let v = build_superoperator(&transition_tensor(basis), basis.energies(), k, t)?;
    v.apply(&DensityMatrix::pure_multiplet(initial))?
        .to_computational(basis)
}
