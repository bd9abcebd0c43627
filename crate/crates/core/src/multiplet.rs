//! Two-qubit state algebra: multiplet bases, the spin transition tensor and
//! the change of operator basis to the computational basis.
//!
//! Computational order is fixed as `|00⟩, |01⟩, |10⟩, |11⟩`, i.e. index
//! `2·q₁ + q₂`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// A normalised two-qubit pure state in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState<T> {
    amplitudes: [Complex<T>; 4],
}

impl<T: Real> TwoQubitState<T> {
    pub fn new(amplitudes: [Complex<T>; 4]) -> Result<Self> {
        let norm = amplitudes.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if !((norm - T::one()).abs() <= T::validation_tol()) {
            return Err(Error::invalid(
                "two-qubit state",
                format!("squared norm {} differs from 1", norm),
            ));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: [T; 4]) -> Result<Self> {
        Self::new(amplitudes.map(|a| Complex::new(a, T::zero())))
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 4] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }
}

/// Four orthonormal states with their (phase) energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipletBasis<T> {
    states: [TwoQubitState<T>; 4],
    energies: [T; 4],
}

impl<T: Real> MultipletBasis<T> {
    pub fn new(states: [TwoQubitState<T>; 4], energies: [T; 4]) -> Result<Self> {
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let expected = if i == j { T::one() } else { T::zero() };
                let overlap = a.inner(b);
                if (overlap - Complex::new(expected, T::zero())).norm() > T::validation_tol() {
                    return Err(Error::invalid(
                        "multiplet basis",
                        format!(
                            "states {} and {} are not orthonormal (overlap {})",
                            i + 1,
                            j + 1,
                            overlap
                        ),
                    ));
                }
            }
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("multiplet basis", "energies must be finite"));
        }
        Ok(Self { states, energies })
    }

    pub fn with_energies(self, energies: [T; 4]) -> Result<Self> {
        Self::new(self.states, energies)
    }

    pub fn states(&self) -> &[TwoQubitState<T>; 4] {
        &self.states
    }

    pub fn energies(&self) -> [T; 4] {
        self.energies
    }
}

fn real_basis<T: Real>(rows: [[f64; 4]; 4]) -> MultipletBasis<T> {
    let states = rows.map(|r| TwoQubitState::from_real(r.map(T::lit)).expect("fixed basis states are normalised"));
    MultipletBasis::new(states, [T::zero(); 4]).expect("fixed basis is orthonormal")
}

/// `|00⟩, (|01⟩+|10⟩)/√2, |11⟩, (|01⟩−|10⟩)/√2`: triplet plus singlet.
pub fn identity_basis<T: Real>() -> MultipletBasis<T> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    real_basis([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, h, h, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, h, -h, 0.0],
    ])
}

/// `|00⟩, |01⟩, (|10⟩+|11⟩)/√2, (|10⟩−|11⟩)/√2`: the target qubit is in
/// the X eigenbasis when the control is set.
pub fn cnot_basis<T: Real>() -> MultipletBasis<T> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    real_basis([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, h, h],
        [0.0, 0.0, h, -h],
    ])
}

/// The gates with a built-in multiplet basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Identity,
    Cnot,
}

impl Gate {
    pub fn basis<T: Real>(self) -> MultipletBasis<T> {
        match self {
            Gate::Identity => identity_basis(),
            Gate::Cnot => cnot_basis(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::Identity => "identity",
            Gate::Cnot => "cnot",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Gate::Identity),
            "cnot" => Ok(Gate::Cnot),
            other => Err(Error::invalid(
                "gate",
                format!("unknown gate {other:?} (expected identity or cnot)"),
            )),
        }
    }
}

/// One of the four multiplet states, `m1`..`m4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultipletState {
    M1,
    M2,
    M3,
    M4,
}

impl MultipletState {
    pub const ALL: [MultipletState; 4] = [
        MultipletState::M1,
        MultipletState::M2,
        MultipletState::M3,
        MultipletState::M4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["m1", "m2", "m3", "m4"][self.index()]
    }
}

impl fmt::Display for MultipletState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MultipletState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MultipletState::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid("initial state", format!("unknown state {s:?} (expected m1..m4)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A single spin operator `σ^axis/2` acting on one qubit (0 or 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinCoupling {
    pub qubit: usize,
    pub axis: Axis,
}

impl SpinCoupling {
    /// Both qubits, all three axes: the isotropic coupling of the model.
    pub const ALL: [SpinCoupling; 6] = [
        SpinCoupling {
            qubit: 0,
            axis: Axis::X,
        },
        SpinCoupling {
            qubit: 0,
            axis: Axis::Y,
        },
        SpinCoupling {
            qubit: 0,
            axis: Axis::Z,
        },
        SpinCoupling {
            qubit: 1,
            axis: Axis::X,
        },
        SpinCoupling {
            qubit: 1,
            axis: Axis::Y,
        },
        SpinCoupling {
            qubit: 1,
            axis: Axis::Z,
        },
    ];

    /// Computational-basis matrix of the operator.
    pub fn matrix<T: Real>(self) -> Matrix<Complex<T>, 4> {
        let zero = Complex::new(T::zero(), T::zero());
        let half = T::lit(0.5);
        let mask = if self.qubit == 0 { 2 } else { 1 };
        let mut m = [[zero; 4]; 4];
        for col in 0..4 {
            let up = col & mask == 0;
            match self.axis {
                Axis::X => m[col ^ mask][col] = Complex::new(half, T::zero()),
                // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
                Axis::Y => m[col ^ mask][col] = Complex::new(T::zero(), if up { half } else { -half }),
                Axis::Z => m[col][col] = Complex::new(if up { half } else { -half }, T::zero()),
            }
        }
        m
    }

    fn element<T: Real>(self, bra: &TwoQubitState<T>, ket: &TwoQubitState<T>) -> Complex<T> {
        let m = self.matrix::<T>();
        let (a, b) = (bra.amplitudes(), ket.amplitudes());
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..4 {
            for j in 0..4 {
                acc = acc + a[i].conj() * m[i][j] * b[j];
            }
        }
        acc
    }
}

/// `M_abcd = Σ ⟨a|S|b⟩⟨c|S|d⟩` over a set of spin operators `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTensor<T> {
    m: [[[[Complex<T>; 4]; 4]; 4]; 4],
}

impl<T: Real> TransitionTensor<T> {
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> Complex<T> {
        self.m[a][b][c][d]
    }

    /// Real part of `M_abcd`; the tensors of the built-in bases are real.
    pub fn re(&self, a: usize, b: usize, c: usize, d: usize) -> T {
        self.m[a][b][c][d].re
    }

    /// `Σ_{a'} M_{a a' a' c}`.
    pub fn contracted(&self, a: usize, c: usize) -> Complex<T> {
        (0..4).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + self.m[a][k][k][c])
    }
}

/// Transition tensor of the isotropic two-qubit spin coupling.
pub fn transition_tensor<T: Real>(basis: &MultipletBasis<T>) -> TransitionTensor<T> {
    transition_tensor_for(basis, &SpinCoupling::ALL)
}

/// Transition tensor restricted to the given couplings.
pub fn transition_tensor_for<T: Real>(basis: &MultipletBasis<T>, couplings: &[SpinCoupling]) -> TransitionTensor<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let states = basis.states();
    let mut m = [[[[zero; 4]; 4]; 4]; 4];
    for s in couplings {
        let mut el = [[zero; 4]; 4];
        for (a, row) in el.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = s.element(&states[a], &states[b]);
            }
        }
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        m[a][b][c][d] = m[a][b][c][d] + el[a][b] * el[c][d];
                    }
                }
            }
        }
    }
    TransitionTensor { m }
}

/// Overlaps `C_{αβ|ab} = tr[(|α⟩⟨β|)† |a⟩⟨b|]` between the computational and
/// the multiplet operator bases, row `4α+β`, column `4a+b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange<T> {
    c: Matrix<Complex<T>, 16>,
}

impl<T: Real> BasisChange<T> {
    pub fn matrix(&self) -> &Matrix<Complex<T>, 16> {
        &self.c
    }

    /// Multiplet-basis components to computational-basis components.
    pub fn to_computational(&self, rho: &Matrix<Complex<T>, 4>) -> Matrix<Complex<T>, 4> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = [[zero; 4]; 4];
        for (row, cr) in self.c.iter().enumerate() {
            let mut acc = zero;
            for (col, &v) in cr.iter().enumerate() {
                acc = acc + v * rho[col / 4][col % 4];
            }
            out[row / 4][row % 4] = acc;
        }
        out
    }

    /// Inverse map (the adjoint, since the overlap matrix is unitary).
    pub fn to_multiplet(&self, rho: &Matrix<Complex<T>, 4>) -> Matrix<Complex<T>, 4> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = [[zero; 4]; 4];
        for col in 0..16 {
            let mut acc = zero;
            for row in 0..16 {
                acc = acc + self.c[row][col].conj() * rho[row / 4][row % 4];
            }
            out[col / 4][col % 4] = acc;
        }
        out
    }
}

pub fn basis_change<T: Real>(basis: &MultipletBasis<T>) -> BasisChange<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut c = [[zero; 16]; 16];
    let states = basis.states();
    for alpha in 0..4 {
        for beta in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    // ⟨α|a⟩⟨b|β⟩
                    c[4 * alpha + beta][4 * a + b] =
                        states[a].amplitudes()[alpha] * states[b].amplitudes()[beta].conj();
                }
            }
        }
    }
    BasisChange { c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn kron2(a: &[[C; 2]; 2], b: &[[C; 2]; 2]) -> [[C; 4]; 4] {
        let mut out = [[c(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = a[i / 2][j / 2] * b[i % 2][j % 2];
            }
        }
        out
    }

    /// Spin operators built as Kronecker products of Pauli matrices.
    fn kronecker_spins() -> Vec<[[C; 4]; 4]> {
        let id = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let paulis = [
            [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
        ];
        let half = |m: [[C; 2]; 2]| m.map(|r| r.map(|z| z * 0.5));
        let mut out = Vec::new();
        for p in paulis {
            out.push(kron2(&half(p), &id));
        }
        for p in paulis {
            out.push(kron2(&id, &half(p)));
        }
        out
    }

    fn brute_force_tensor(basis: &MultipletBasis<f64>) -> [[[[C; 4]; 4]; 4]; 4] {
        let s = basis.states();
        let el = |op: &[[C; 4]; 4], a: usize, b: usize| {
            let (x, y) = (s[a].amplitudes(), s[b].amplitudes());
            let mut acc = c(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    acc += x[i].conj() * op[i][j] * y[j];
                }
            }
            acc
        };
        let mut m = [[[[c(0.0, 0.0); 4]; 4]; 4]; 4];
        for op in kronecker_spins() {
            for a in 0..4 {
                for b in 0..4 {
                    for cc in 0..4 {
                        for d in 0..4 {
                            m[a][b][cc][d] += el(&op, a, b) * el(&op, cc, d);
                        }
                    }
                }
            }
        }
        m
    }

    #[test]
    fn spin_operators_match_kronecker_products() {
        for (s, k) in SpinCoupling::ALL.iter().zip(kronecker_spins()) {
            assert_eq!(s.matrix::<f64>(), k, "{s:?}");
        }
    }

    #[test]
    fn basis_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let id = identity_basis::<f64>();
        assert_eq!(id.states()[0].amplitudes().map(|z| z.re), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(id.states()[1].amplitudes().map(|z| z.re), [0.0, h, h, 0.0]);
        let cn = cnot_basis::<f64>();
        assert_eq!(cn.states()[2].amplitudes().map(|z| z.re), [0.0, 0.0, h, h]);
        assert_eq!(cn.states()[3].amplitudes().map(|z| z.re), [0.0, 0.0, h, -h]);
        assert_eq!(id.energies(), [0.0; 4]);
    }

    #[test]
    fn rejects_bad_states_and_bases() {
        assert!(TwoQubitState::from_real([1.0, 1.0, 0.0, 0.0]).is_err());
        let a = TwoQubitState::from_real([1.0, 0.0, 0.0, 0.0]).unwrap();
        let b = TwoQubitState::from_real([0.0, 1.0, 0.0, 0.0]).unwrap();
        let d = TwoQubitState::from_real([0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(MultipletBasis::new([a, b, a, d], [0.0; 4]).is_err());
        assert!(identity_basis::<f64>()
            .with_energies([0.0, f64::NAN, 0.0, 0.0])
            .is_err());
    }

    #[test]
    fn tensor_entries_from_gate_tables() {
        let id = transition_tensor(&identity_basis::<f64>());
        assert!((id.re(1, 0, 0, 1) - 0.5).abs() < 1e-15);
        assert!(id.re(2, 0, 0, 2).abs() < 1e-15);
        let cn = transition_tensor(&cnot_basis::<f64>());
        assert!((cn.re(2, 0, 0, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn tensor_matches_brute_force_and_symmetries() {
        for basis in [identity_basis::<f64>(), cnot_basis()] {
            let t = transition_tensor(&basis);
            let brute = brute_force_tensor(&basis);
            for a in 0..4 {
                for b in 0..4 {
                    for cc in 0..4 {
                        for d in 0..4 {
                            let v = t.get(a, b, cc, d);
                            assert!((v - brute[a][b][cc][d]).norm() < 1e-15);
                            assert_eq!(v, t.get(cc, d, a, b));
                            assert!(v.im.abs() < 1e-15 && v.re.abs() <= 1.5 + 1e-15);
                        }
                    }
                }
                let sum = t.contracted(a, a);
                assert!((sum - c(1.5, 0.0)).norm() < 1e-14);
                for cc in (0..4).filter(|&cc| cc != a) {
                    assert!(t.contracted(a, cc).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn basis_change_examples() {
        let zero = [[c(0.0, 0.0); 4]; 4];
        let mut rho = zero;
        rho[1][1] = c(1.0, 0.0);
        let out = basis_change(&identity_basis::<f64>()).to_computational(&rho);
        let diag: Vec<f64> = (0..4).map(|i| out[i][i].re).collect();
        for (x, y) in diag.iter().zip([0.0, 0.5, 0.5, 0.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        let mut rho = zero;
        rho[0][0] = c(1.0, 0.0);
        let out = basis_change(&cnot_basis::<f64>()).to_computational(&rho);
        assert_eq!(out[0][0], c(1.0, 0.0));
        assert!((1..4).all(|i| out[i][i].norm() == 0.0));
    }

    #[test]
    fn basis_change_is_unitary() {
        for basis in [identity_basis::<f64>(), cnot_basis()] {
            let m = basis_change(&basis);
            let cm = m.matrix();
            for i in 0..16 {
                for j in 0..16 {
                    let dot = (0..16).fold(c(0.0, 0.0), |acc, k| acc + cm[i][k] * cm[j][k].conj());
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - c(expected, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("cnot".parse::<Gate>().unwrap(), Gate::Cnot);
        assert_eq!("m3".parse::<MultipletState>().unwrap(), MultipletState::M3);
        assert!("m5".parse::<MultipletState>().is_err());
        assert!("swap".parse::<Gate>().is_err());
        assert_eq!(serde_json::to_string(&Gate::Identity).unwrap(), "\"identity\"");
        assert_eq!(serde_json::to_string(&MultipletState::M2).unwrap(), "\"m2\"");
    }

    proptest! {
        #[test]
        fn basis_change_round_trip(entries in proptest::collection::vec(-1.0..1.0_f64, 32), cnot in any::<bool>()) {
            let basis = if cnot { cnot_basis::<f64>() } else { identity_basis() };
            let change = basis_change(&basis);
            let mut rho = [[c(0.0, 0.0); 4]; 4];
            for i in 0..16 {
                rho[i / 4][i % 4] = c(entries[2 * i], entries[2 * i + 1]);
            }
            let back = change.to_multiplet(&change.to_computational(&rho));
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((back[i][j] - rho[i][j]).norm() < 1e-12);
                }
            }
        }
    }
}
