//! Quasiprobability error mitigation: the recovery operator that undoes the
//! population transfer, its expansion in Pauli products, and the sampling
//! cost `c = Σ|μ_i|`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{population_matrix_for, PopulationMatrix};
use crate::linalg::{identity, inverse, mat_mul, singular_values, Matrix};
use crate::multiplet::cnot_basis;
use crate::scalar::Real;

/// Inversion is refused above this condition number.
pub const MAX_CONDITION: f64 = 1e8;

/// Operator labels in expansion order, `σ_i⊗σ_j` at index `4i + j`.
pub const PAULI_LABELS: [&str; 16] = [
    "I⊗I",
    "I⊗σ1",
    "I⊗σ2",
    "I⊗σ3",
    "σ1⊗I",
    "σ1⊗σ1",
    "σ1⊗σ2",
    "σ1⊗σ3",
    "σ2⊗I",
    "σ2⊗σ1",
    "σ2⊗σ2",
    "σ2⊗σ3",
    "σ3⊗I",
    "σ3⊗σ1",
    "σ3⊗σ2",
    "σ3⊗σ3",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoverySource {
    NumericInverse,
    ClosedForm,
}

/// Recovery map on multiplet populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOperator<T> {
    pub r: Matrix<T, 4>,
    pub alpha: T,
    pub source: RecoverySource,
}

/// `ideal · p⁻¹`, refusing ill-conditioned population matrices.
pub fn recovery_numeric<T: Real>(p: &PopulationMatrix<T>, ideal: &Matrix<T, 4>) -> Result<RecoveryOperator<T>> {
    let sv = singular_values(&p.p);
    let (largest, smallest) = (sv[0], sv[3]);
    let condition = if smallest > T::zero() {
        (largest / smallest).as_f64()
    } else {
        f64::INFINITY
    };
    if !(condition < MAX_CONDITION) {
        return Err(Error::Singular {
            smallest_singular_value: smallest.as_f64(),
            condition,
        });
    }
    let inv = inverse(&p.p)?;
    Ok(RecoveryOperator {
        r: mat_mul(ideal, &inv),
        alpha: p.alpha,
        source: RecoverySource::NumericInverse,
    })
}

/// Recovery operator of the CNOT gate from the first-principles population
/// matrix, with the identity as the ideal map.
pub fn cnot_recovery<T: Real>(alpha: T) -> Result<RecoveryOperator<T>> {
    let p = population_matrix_for(&cnot_basis(), alpha)?;
    recovery_numeric(&p, &identity())
}

/// Coefficients of the block-structured closed-form recovery operator
/// `[[C, D, B, B], [D, C, B, B], [B, B, E, F], [B, B, F, E]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCoefficients<T> {
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
}

fn poly<T: Real>(coeffs: &[f64], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// `1 − 5.5α + 8.3125α² − 1.5α³ − 2.8125α⁴`; vanishes at `α = 1/3`.
pub fn closed_form_denominator<T: Real>(alpha: T) -> T {
    poly(&[1.0, -5.5, 8.3125, -1.5, -2.8125], alpha)
}

pub fn closed_form_coefficients<T: Real>(alpha: T) -> Result<ClosedFormCoefficients<T>> {
    if !alpha.is_finite() {
        return Err(Error::domain(
            "closed_form_coefficients",
            alpha.as_f64(),
            "finite alpha",
        ));
    }
    let den = closed_form_denominator(alpha);
    if den.abs() <= T::epsilon() * T::lit(64.0) {
        return Err(Error::domain(
            "closed_form_coefficients",
            alpha.as_f64(),
            "alpha away from the root of the denominator",
        ));
    }
    Ok(ClosedFormCoefficients {
        b: poly(&[0.0, -0.5, 2.125, -1.875], alpha) / den,
        c: poly(&[1.0, -3.5, 2.8125], alpha) / den,
        d: poly(&[0.0, -1.0, 2.0, -0.9375], alpha) / den,
        e: poly(&[1.0, -4.75, 5.5, -0.75], alpha) / den,
        f: poly(&[0.0, -0.5, 2.5, -3.0], alpha) / den,
    })
}

pub fn recovery_closed_form<T: Real>(alpha: T) -> Result<RecoveryOperator<T>> {
    let ClosedFormCoefficients { b, c, d, e, f } = closed_form_coefficients(alpha)?;
    Ok(RecoveryOperator {
        r: [[c, d, b, b], [d, c, b, b], [b, b, e, f], [b, b, f, e]],
        alpha,
        source: RecoverySource::ClosedForm,
    })
}

/// `|C+E|/2 + |C−E|/2 + 2|B| + |D| + |F−D|` from the closed-form coefficients.
pub fn cost_closed_form<T: Real>(alpha: T) -> Result<T> {
    let ClosedFormCoefficients { b, c, d, e, f } = closed_form_coefficients(alpha)?;
    let two = T::lit(2.0);
    Ok((c + e).abs() / two + (c - e).abs() / two + two * b.abs() + d.abs() + (f - d).abs())
}

/// `σ_i⊗σ_j`; the first factor acts on the block (high) index.
pub fn pauli_product<T: Real>(i: usize, j: usize) -> Matrix<Complex<T>, 4> {
    let z = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let im = Complex::new(T::zero(), T::one());
    let sigma = |k: usize| match k {
        0 => [[one, z], [z, one]],
        1 => [[z, one], [one, z]],
        2 => [[z, -im], [im, z]],
        _ => [[one, z], [z, -one]],
    };
    let (a, b) = (sigma(i), sigma(j));
    let mut out = [[z; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r / 2][c / 2] * b[r % 2][c % 2];
        }
    }
    out
}

/// Real coefficients `μ_ij` of an operator in the Pauli-product basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracExpansion<T> {
    pub mu: [[T; 4]; 4],
}

impl<T: Real> DiracExpansion<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.mu[i][j]
    }

    /// Coefficients in label order (`4i + j`).
    pub fn flat(&self) -> [T; 16] {
        let mut out = [T::zero(); 16];
        for (k, v) in out.iter_mut().enumerate() {
            *v = self.mu[k / 4][k % 4];
        }
        out
    }

    /// `Σ μ_ij σ_i⊗σ_j`.
    pub fn reconstruct(&self) -> Matrix<Complex<T>, 4> {
        let z = Complex::new(T::zero(), T::zero());
        let mut out = [[z; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let e = pauli_product::<T>(i, j);
                for r in 0..4 {
                    for c in 0..4 {
                        out[r][c] = out[r][c] + e[r][c] * self.mu[i][j];
                    }
                }
            }
        }
        out
    }
}

/// Projects `r` onto the Pauli products, `μ_ij = tr[(σ_i⊗σ_j)† r]/4`.
///
/// Coefficients are real exactly when `r` is symmetric; an asymmetric input
/// produces imaginary weights on the `σ2` terms and is rejected. Numerical
/// dust below a few ulps of the largest entry is cleared to zero.
pub fn dirac_expand<T: Real>(r: &Matrix<T, 4>) -> Result<DiracExpansion<T>> {
    if r.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("recovery operator", "entries must be finite"));
    }
    let scale = r.iter().flatten().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let dust = scale * T::epsilon() * T::lit(8.0);
    let quarter = T::lit(0.25);
    let mut mu = [[T::zero(); 4]; 4];
    for (i, row) in mu.iter_mut().enumerate() {
        for (j, m) in row.iter_mut().enumerate() {
            let e = pauli_product::<T>(i, j);
            let mut acc = Complex::new(T::zero(), T::zero());
            for a in 0..4 {
                for b in 0..4 {
                    acc = acc + e[a][b].conj() * r[a][b];
                }
            }
            let acc = acc * quarter;
            if acc.im.abs() > dust.max(T::validation_tol() * scale) {
                return Err(Error::invalid(
                    "recovery operator",
                    format!(
                        "complex weight on {} (operator is not symmetric)",
                        PAULI_LABELS[4 * i + j]
                    ),
                ));
            }
            *m = if acc.re.abs() <= dust { T::zero() } else { acc.re };
        }
    }
    Ok(DiracExpansion { mu })
}

/// Sampling overhead of a quasiprobability decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostResult<T> {
    pub cost: T,
    pub quasiprobabilities: [T; 16],
    pub signs: [i8; 16],
}

pub fn cost_from_expansion<T: Real>(e: &DiracExpansion<T>) -> Result<CostResult<T>> {
    let mu = e.flat();
    let cost = mu.iter().fold(T::zero(), |acc, m| acc + m.abs());
    if !(cost > T::zero()) {
        return Err(Error::domain(
            "cost_from_expansion",
            0.0,
            "at least one nonzero coefficient",
        ));
    }
    let mut quasiprobabilities = [T::zero(); 16];
    let mut signs = [0i8; 16];
    for k in 0..16 {
        quasiprobabilities[k] = mu[k].abs() / cost;
        signs[k] = if mu[k] > T::zero() {
            1
        } else if mu[k] < T::zero() {
            -1
        } else {
            0
        };
    }
    Ok(CostResult {
        cost,
        quasiprobabilities,
        signs,
    })
}

/// Cost of mitigating the CNOT gate at `Re k = alpha`, from the numeric
/// inverse of the first-principles population matrix.
pub fn cost_numeric<T: Real>(alpha: T) -> Result<CostResult<T>> {
    cost_from_expansion(&dirac_expand(&cnot_recovery(alpha)?.r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::cnot_population_closed_form;
    use crate::linalg::{frobenius_norm, max_abs_diff};
    use proptest::prelude::*;

    fn bisect_root(mut lo: f64, mut hi: f64) -> f64 {
        let f = closed_form_denominator::<f64>;
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn noiseless_recovery_is_identity() {
        let r = cnot_recovery(0.0).unwrap();
        assert_eq!(r.r, identity::<f64, 4>());
        let closed = recovery_closed_form(0.0).unwrap();
        assert_eq!(closed.r, identity::<f64, 4>());
        assert_eq!(cost_closed_form(0.0).unwrap(), 1.0);
        assert_eq!(cost_numeric(0.0).unwrap().cost, 1.0);
    }

    #[test]
    fn numeric_inverse_residual() {
        let p = population_matrix_for(&cnot_basis::<f64>(), 0.01).unwrap();
        let r = recovery_numeric(&p, &identity()).unwrap();
        let residual = max_abs_diff(&mat_mul(&r.r, &p.p), &identity());
        assert!(residual < 1e-12);
        assert_eq!(r.source, RecoverySource::NumericInverse);
    }

    #[test]
    fn denominator_root_is_one_third() {
        let root = bisect_root(0.2, 0.4);
        assert!((root - 1.0 / 3.0).abs() < 1e-12);
        let p = population_matrix_for(&cnot_basis::<f64>(), root).unwrap();
        assert!(matches!(recovery_numeric(&p, &identity()), Err(Error::Singular { .. })));
        let quoted = cnot_population_closed_form(root).unwrap();
        assert!(matches!(
            recovery_numeric(&quoted, &identity()),
            Err(Error::Singular { .. })
        ));
        assert!(recovery_closed_form(1.0 / 3.0).is_err());
    }

    #[test]
    fn closed_form_structure() {
        let r = recovery_closed_form(0.01).unwrap().r;
        assert_eq!(r[0][1], r[1][0]);
        assert_eq!(r[2][3], r[3][2]);
        let k = closed_form_coefficients(0.01_f64).unwrap();
        assert_eq!(r[0][2], k.b);
        assert_eq!(r[3][3], k.e);
    }

    #[test]
    fn closed_form_inverts_its_own_matrix_only_partly() {
        // The closed-form operator matches the inverse of the quoted
        // population matrix in its upper-left block up to O(α³), but its
        // lower diagonal is off already at first order.
        let alpha = 0.01;
        let r = recovery_closed_form::<f64>(alpha).unwrap().r;
        let quoted = cnot_population_closed_form(alpha).unwrap();
        let exact = inverse(&quoted.p).unwrap();
        assert!((r[0][0] - exact[0][0]).abs() < 1e-6);
        assert!((r[0][1] - exact[0][1]).abs() < 1e-6);
        assert!((r[2][2] - exact[2][2]).abs() > 5e-3);
    }

    #[test]
    fn expansion_examples() {
        let id = dirac_expand(&identity::<f64, 4>()).unwrap();
        assert_eq!(id.get(0, 0), 1.0);
        assert_eq!(id.flat().iter().filter(|&&m| m != 0.0).count(), 1);
        let c = cost_from_expansion(&id).unwrap();
        assert_eq!(c.cost, 1.0);
        assert_eq!(c.quasiprobabilities[0], 1.0);
        assert_eq!(c.signs[0], 1);

        let k = closed_form_coefficients(0.01_f64).unwrap();
        let e = dirac_expand(&recovery_closed_form(0.01).unwrap().r).unwrap();
        assert!((e.get(0, 0) - (k.c + k.e) / 2.0).abs() < 1e-15);
        assert!((e.get(3, 0) - (k.c - k.e) / 2.0).abs() < 1e-15);
        assert!((e.get(1, 0) - k.b).abs() < 1e-15);
        assert!((e.get(1, 1) - k.b).abs() < 1e-15);
        // projection gives the block averages, not D alone
        assert!((e.get(0, 1) - (k.d + k.f) / 2.0).abs() < 1e-15);
        assert!((e.get(3, 1) + (k.f - k.d) / 2.0).abs() < 1e-15);
        let nonzero = e.flat().iter().filter(|&&m| m != 0.0).count();
        assert_eq!(nonzero, 6);
    }

    #[test]
    fn asymmetric_operator_is_rejected() {
        let mut r = identity::<f64, 4>();
        r[0][1] = 0.5;
        assert!(dirac_expand(&r).is_err());
        let zero = DiracExpansion { mu: [[0.0; 4]; 4] };
        assert!(cost_from_expansion(&zero).is_err());
    }

    #[test]
    fn costs_are_monotone_on_grid() {
        let mut prev_numeric = 1.0;
        let mut prev_closed = 1.0;
        for i in 0..=100 {
            let alpha = i as f64 * 1e-3;
            let n = cost_numeric(alpha).unwrap().cost;
            let c = cost_closed_form(alpha).unwrap();
            assert!(n >= prev_numeric - 1e-12, "numeric at {alpha}");
            assert!(c >= prev_closed - 1e-12, "closed form at {alpha}");
            prev_numeric = n;
            prev_closed = c;
        }
    }

    #[test]
    fn numeric_cost_value() {
        // the first-principles matrix and the quoted one give the same cost
        let via_quoted = {
            let p = cnot_population_closed_form(0.1).unwrap();
            let r = recovery_numeric(&p, &identity()).unwrap();
            cost_from_expansion(&dirac_expand(&r.r).unwrap()).unwrap().cost
        };
        let numeric = cost_numeric(0.1_f64).unwrap().cost;
        assert!((numeric - via_quoted).abs() < 1e-12);
        assert!((numeric - 1.5536).abs() < 1e-4, "{numeric}");
    }

    proptest! {
        #[test]
        fn expansion_is_isometric(entries in proptest::collection::vec(-2.0..2.0_f64, 10)) {
            let mut r = [[0.0; 4]; 4];
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    r[i][j] = entries[k];
                    r[j][i] = entries[k];
                    k += 1;
                }
            }
            let e = dirac_expand(&r).unwrap();
            let sum_sq: f64 = e.flat().iter().map(|m| m * m).sum();
            prop_assert!((4.0 * sum_sq - frobenius_norm(&r).powi(2)).abs() < 1e-12);
            let back = e.reconstruct();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((back[i][j].re - r[i][j]).abs() < 1e-12);
                    prop_assert!(back[i][j].im.abs() < 1e-12);
                }
            }
        }

        #[test]
        fn recovery_and_cost_invariants(alpha in 0.0..0.3_f64) {
            let p = population_matrix_for(&cnot_basis::<f64>(), alpha).unwrap();
            let r = recovery_numeric(&p, &identity()).unwrap();
            prop_assert!(max_abs_diff(&mat_mul(&r.r, &p.p), &identity()) < 1e-10);
            let c = cost_from_expansion(&dirac_expand(&r.r).unwrap()).unwrap();
            prop_assert!(c.cost >= 1.0 - 1e-15);
            if alpha > 1e-6 {
                prop_assert!(c.cost > 1.0);
            }
            let total: f64 = c.quasiprobabilities.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-15);
            prop_assert!(c.quasiprobabilities.iter().all(|&q| q >= 0.0));
        }
    }
}
