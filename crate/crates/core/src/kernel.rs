//! The non-Markovian decoherence kernel `k(t)` of an ohmic bath with a hard
//! frequency cutoff, and the bath correlation it is built from.
//!
//! All functions take the dimensionless time `x = t/τ_s`; absolute times are
//! converted once with [`NoiseParams::time_to_x`].
//!
//! The kernel is the double time integral of the bath correlation. With
//! `y = ω'x` and `ω' = ω_c τ_s` it reduces to
//!
//! ```text
//! inner(x) = ∫₀ˣ sin(ω'u)/u du         = Si(y)
//! outer(x) = ∫₀ˣ inner(s) ds           = x·Si(y) + (cos y − 1)/ω'
//! Re k(x)  = (2/π) Γ₀ outer(x)
//! Im k(x)  = Δ₀ (x − inner(x)/ω')
//! ```
//!
//! using the standard (unshifted) sine integral throughout. The variants that
//! carry an extra `(π/2)ω'x` term are kept in [`KernelForm`] for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::{integrate_adaptive, si_shifted, si_standard, x_minus_si, QuadratureConfig};

/// Below this `ω'x` the correlation functions switch to their Taylor series.
const SMALL_PHASE: f64 = 1e-4;

/// Dimensionless bath and coupling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams<T> {
    /// Decoherence scale `Γ₀ = λ²η k_B T τ_s`.
    pub gamma0: T,
    /// Shift scale `Δ₀ = λ²η ω_c τ_s / π`.
    pub delta0: T,
    /// Cutoff `ω'_c = ω_c τ_s`.
    pub omega_c_tau_s: T,
    /// Switching time in seconds; only used to convert absolute times.
    pub tau_s: T,
}

impl<T: Real> NoiseParams<T> {
    pub fn new(gamma0: T, delta0: T, omega_c_tau_s: T, tau_s: T) -> Result<Self> {
        let p = Self {
            gamma0,
            delta0,
            omega_c_tau_s,
            tau_s,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters from the coupling product `Γ₀ω'_c` and the cutoff, with
    /// `Δ₀ = 0` and `τ_s = 1`.
    pub fn from_coupling(coupling: T, omega_c_tau_s: T) -> Result<Self> {
        if !(omega_c_tau_s > T::zero()) || !omega_c_tau_s.is_finite() {
            return Err(Error::invalid("noise parameters", "omega_c_tau_s must be positive"));
        }
        Self::new(coupling / omega_c_tau_s, T::zero(), omega_c_tau_s, T::one())
    }

    pub fn with_delta0(mut self, delta0: T) -> Result<Self> {
        self.delta0 = delta0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tau_s(mut self, tau_s: T) -> Result<Self> {
        self.tau_s = tau_s;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::invalid("noise parameters", reason))
            }
        };
        check(
            self.gamma0 >= T::zero() && self.gamma0.is_finite(),
            "gamma0 must be >= 0",
        )?;
        check(
            self.delta0 >= T::zero() && self.delta0.is_finite(),
            "delta0 must be >= 0",
        )?;
        check(
            self.omega_c_tau_s > T::zero() && self.omega_c_tau_s.is_finite(),
            "omega_c_tau_s must be > 0",
        )?;
        check(self.tau_s > T::zero() && self.tau_s.is_finite(), "tau_s must be > 0")
    }

    /// The coupling product `Γ₀ω'_c` that sets the scale of `Re k`.
    pub fn coupling(&self) -> T {
        self.gamma0 * self.omega_c_tau_s
    }

    pub fn time_to_x(&self, t_seconds: T) -> T {
        t_seconds / self.tau_s
    }
}

/// `k(x)` split into the decoherence (`re`) and coherent shift (`im`) parts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelValue<T> {
    pub re: T,
    pub im: T,
}

/// Bath correlation `Γ(t) + iΔ(t)` in units of `1/τ_s²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathCorrelation<T> {
    pub gamma: T,
    pub delta: T,
}

/// Which closed form of `k(x)` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// The double integral of the bath correlation (the reference form).
    Exact,
    /// Extra `(π/2)ω'x` term with the shifted sine integral inside the time
    /// integral, as the closed form is usually printed.
    ShiftedWithCutoffTerm,
    /// Extra `(π/2)ω'x` term with the standard sine integral.
    StandardWithCutoffTerm,
}

impl KernelForm {
    pub const ALL: [KernelForm; 3] = [
        KernelForm::Exact,
        KernelForm::ShiftedWithCutoffTerm,
        KernelForm::StandardWithCutoffTerm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelForm::Exact => "exact",
            KernelForm::ShiftedWithCutoffTerm => "shifted_with_cutoff_term",
            KernelForm::StandardWithCutoffTerm => "standard_with_cutoff_term",
        }
    }
}

fn check_time<T: Real>(what: &'static str, x: T) -> Result<()> {
    if x.is_finite() && x >= T::zero() {
        Ok(())
    } else {
        Err(Error::domain(what, x.as_f64(), "finite t/tau_s >= 0"))
    }
}

/// `∫₀ˣ sin(ωu)/u du = Si(ωx)`.
pub fn inner_integral<T: Real>(x: T, omega: T) -> Result<T> {
    si_standard(omega * x)
}

/// `∫₀ˣ Si(ωu) du = x·Si(ωx) + (cos ωx − 1)/ω`.
pub fn outer_integral<T: Real>(x: T, omega: T) -> Result<T> {
    let y = omega * x;
    let half = (y / T::lit(2.0)).sin();
    Ok(x * si_standard(y)? - T::lit(2.0) * half * half / omega)
}

/// `(π/2)Γ₀ω' sinc(ω'x)` and `−Δ₀ω' j₁(ω'x)`, the scaled correlation pair.
fn correlation_unchecked<T: Real>(x: T, p: &NoiseParams<T>) -> BathCorrelation<T> {
    let w = p.omega_c_tau_s;
    let y = w * x;
    let (sinc, j1) = if y.abs() < T::lit(SMALL_PHASE) {
        let y2 = y * y;
        (
            T::one() - y2 / T::lit(6.0) + y2 * y2 / T::lit(120.0),
            y * (T::one() / T::lit(3.0) - y2 / T::lit(30.0) + y2 * y2 / T::lit(840.0)),
        )
    } else {
        (y.sin() / y, y.sin() / (y * y) - y.cos() / y)
    };
    BathCorrelation {
        gamma: T::FRAC_PI_2() * p.gamma0 * w * sinc,
        delta: -p.delta0 * w * j1,
    }
}

/// Bath correlation at `x = t/τ_s > 0`:
/// `Γ = (πΓ₀/2) sin(ω'x)/x`, `Δ = −Δ₀ [sin(ω'x)/(ω'x²) − cos(ω'x)/x]`.
pub fn bath_correlation<T: Real>(x: T, p: &NoiseParams<T>) -> Result<BathCorrelation<T>> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain("bath_correlation", x.as_f64(), "finite t/tau_s > 0"));
    }
    Ok(correlation_unchecked(x, p))
}

/// The `x → 0⁺` limit of [`bath_correlation`].
pub fn bath_correlation_limit<T: Real>(p: &NoiseParams<T>) -> BathCorrelation<T> {
    correlation_unchecked(T::zero(), p)
}

/// The decoherence kernel at `x = t/τ_s`.
pub fn kernel_k<T: Real>(x: T, p: &NoiseParams<T>) -> Result<KernelValue<T>> {
    kernel_k_form(x, p, KernelForm::Exact)
}

/// The decoherence kernel at an absolute time in seconds.
pub fn kernel_k_at_time<T: Real>(t_seconds: T, p: &NoiseParams<T>) -> Result<KernelValue<T>> {
    kernel_k(p.time_to_x(t_seconds), p)
}

pub fn kernel_k_form<T: Real>(x: T, p: &NoiseParams<T>, form: KernelForm) -> Result<KernelValue<T>> {
    check_time("kernel_k", x)?;
    let w = p.omega_c_tau_s;
    let y = w * x;
    let two_over_pi = T::FRAC_2_PI();
    let half_pi = T::FRAC_PI_2();
    let exact_outer = outer_integral(x, w)?;
    let value = match form {
        KernelForm::Exact => KernelValue {
            re: two_over_pi * p.gamma0 * exact_outer,
            im: p.delta0 * x_minus_si(y) / w,
        },
        KernelForm::ShiftedWithCutoffTerm => KernelValue {
            // ∫₀ˣ (Si(ω'u) − π/2) du = outer − (π/2)x
            re: two_over_pi * p.gamma0 * (half_pi * y + exact_outer - half_pi * x),
            im: p.delta0 * (x - half_pi - si_shifted(y)? / w),
        },
        KernelForm::StandardWithCutoffTerm => KernelValue {
            re: two_over_pi * p.gamma0 * (half_pi * y + exact_outer),
            im: p.delta0 * (x - half_pi - si_standard(y)? / w),
        },
    };
    Ok(value)
}

/// `∫₀ˣ ds ∫₀ˢ du` of the bath correlation by nested adaptive quadrature,
/// split at the zeros of `sin(ω'u)`. Independent of the closed forms above.
pub fn double_integral_of_correlation<T: Real>(
    x: T,
    p: &NoiseParams<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<BathCorrelation<T>> {
    check_time("double_integral_of_correlation", x)?;
    let piece = T::PI() / p.omega_c_tau_s;
    let piecewise = |f: &dyn Fn(T) -> Result<T>, upper: T| -> Result<T> {
        let mut lo = T::zero();
        let mut sum = T::zero();
        while lo < upper {
            let hi = (lo + piece).min(upper);
            let mut failure = None;
            let part = integrate_adaptive(
                |u| match f(u) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        T::zero()
                    }
                },
                lo,
                hi,
                cfg,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            sum = sum + part;
            lo = hi;
        }
        Ok(sum)
    };
    let at = |u: T| correlation_unchecked(u, p);
    let inner_gamma = |s: T| piecewise(&|u| Ok(at(u).gamma), s);
    let inner_delta = |s: T| piecewise(&|u| Ok(at(u).delta), s);
    Ok(BathCorrelation {
        gamma: piecewise(&inner_gamma, x)?,
        delta: piecewise(&inner_delta, x)?,
    })
}

/// Short-time quadratic approximation `(2/π)Γ₀ω'(x + x²/2)`.
pub fn kernel_k_quadratic<T: Real>(x: T, p: &NoiseParams<T>) -> Result<T> {
    check_time("kernel_k_quadratic", x)?;
    Ok(T::FRAC_2_PI() * p.coupling() * (x + x * x / T::lit(2.0)))
}

/// Gaussian form of the ground-state population,
/// `exp[c]·exp[−c(x+1)²]` with `c = (2/π)Γ₀ω'`.
pub fn gaussian_rho11<T: Real>(x: T, p: &NoiseParams<T>) -> Result<T> {
    check_time("gaussian_rho11", x)?;
    let c = T::FRAC_2_PI() * p.coupling();
    // c − c(x+1)² = −c·x·(x+2), exact 1 at x = 0
    Ok((-c * x * (x + T::lit(2.0))).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(coupling: f64, omega: f64) -> NoiseParams<f64> {
        NoiseParams::from_coupling(coupling, omega).unwrap()
    }

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::new(1e-14, 1e-12, 200_000).unwrap()
    }

    /// ∫ f over [0, x], split into pieces no longer than `piece`.
    fn piecewise(f: impl Fn(f64) -> f64 + Copy, x: f64, piece: f64) -> f64 {
        let mut lo = 0.0;
        let mut sum = 0.0;
        while lo < x {
            let hi = (lo + piece).min(x);
            sum += integrate_adaptive(f, lo, hi, &cfg()).unwrap();
            lo = hi;
        }
        sum
    }

    #[test]
    fn kernel_vanishes_at_zero() {
        let p = params(7e-3, 100.0).with_delta0(0.3).unwrap();
        for form in KernelForm::ALL {
            let k = kernel_k_form(0.0, &p, form).unwrap();
            assert_eq!(k.re, 0.0, "{form:?}");
        }
        assert_eq!(kernel_k(0.0, &p).unwrap(), KernelValue { re: 0.0, im: 0.0 });
    }

    #[test]
    fn outer_integral_matches_quadrature() {
        for &w in &[1.0, 10.0, 100.0] {
            for &x in &[0.1, 1.0, 5.0] {
                let oracle = piecewise(|u| si_standard(w * u).unwrap(), x, PI / w);
                let closed = outer_integral(x, w).unwrap();
                assert!((closed - oracle).abs() < 1e-9, "x {x} w {w}: {closed} vs {oracle}");
            }
        }
    }

    #[test]
    fn double_integral_of_correlation_oracle() {
        let p = NoiseParams::new(1e-3, 2e-3, 10.0, 1.0).unwrap();
        let x = 1.0;
        let g = |u: f64| {
            if u == 0.0 {
                bath_correlation_limit(&p).gamma
            } else {
                bath_correlation(u, &p).unwrap().gamma
            }
        };
        let d = |u: f64| {
            if u == 0.0 {
                0.0
            } else {
                bath_correlation(u, &p).unwrap().delta
            }
        };
        let gg = piecewise(|s| piecewise(g, s, 0.25), x, 0.25);
        let dd = piecewise(|s| piecewise(d, s, 0.25), x, 0.25);
        let k = kernel_k(x, &p).unwrap();
        // The correlation prefactor πΓ₀/2 and the kernel prefactor 2Γ₀/π differ
        // by π²/4; the time dependence is identical.
        assert!((k.re * PI * PI / 4.0 - gg).abs() < 1e-6, "{} vs {gg}", k.re);
        assert!((k.im + dd).abs() < 1e-6, "{} vs {dd}", k.im);
        let nested = double_integral_of_correlation(x, &p, &QuadratureConfig::default()).unwrap();
        assert!((nested.gamma - gg).abs() < 1e-9);
        assert!((nested.delta - dd).abs() < 1e-9);
    }

    #[test]
    fn correlation_limits_and_zeros() {
        let p = params(3e-3, 10.0);
        let lim = bath_correlation_limit(&p);
        assert!((lim.gamma - PI / 2.0 * p.gamma0 * 10.0).abs() < 1e-18);
        assert_eq!(lim.delta, 0.0);
        let at_zero = bath_correlation(PI / 10.0, &p).unwrap();
        assert!(at_zero.gamma.abs() < 1e-17);
        let tiny = bath_correlation(1e-9, &p).unwrap();
        assert!((tiny.gamma - lim.gamma).abs() < 1e-16);
        assert!(matches!(bath_correlation(0.0, &p), Err(Error::Domain { .. })));
        assert!(matches!(bath_correlation(-1.0, &p), Err(Error::Domain { .. })));
    }

    #[test]
    fn correlation_matches_frequency_integral() {
        // Ohmic J(ω) = ηω up to the cutoff, high-temperature limit:
        // Γ from ∫₀^{ω'} cos(νx) dν, Δ from ∫₀^{ω'} ν sin(νx) dν.
        let p = NoiseParams::new(2e-4, 5e-4, 10.0, 1.0).unwrap();
        let x = 0.5;
        let w = p.omega_c_tau_s;
        let cos_int = integrate_adaptive(|v: f64| (v * x).cos(), 0.0, w, &cfg()).unwrap();
        let sin_int = integrate_adaptive(|v: f64| v * (v * x).sin(), 0.0, w, &cfg()).unwrap();
        let c = bath_correlation(x, &p).unwrap();
        assert!((c.gamma - PI / 2.0 * p.gamma0 * cos_int).abs() < 1e-6);
        assert!((c.delta + p.delta0 / w * sin_int).abs() < 1e-6);
    }

    #[test]
    fn quadratic_approximation_value() {
        let p = params(2.548e-3, 100.0);
        assert_eq!(kernel_k_quadratic(0.0, &p).unwrap(), 0.0);
        let v = kernel_k_quadratic(1.0, &p).unwrap();
        assert!((v - 2.433e-3).abs() < 5e-7, "{v}");
        let doubled = kernel_k_quadratic(1.0, &params(2.0 * 2.548e-3, 100.0)).unwrap();
        assert!((doubled - 2.0 * v).abs() < 1e-18);
    }

    #[test]
    fn gaussian_population() {
        let p = params(7e-4, 100.0);
        assert_eq!(gaussian_rho11(0.0, &p).unwrap(), 1.0);
        let c = 2.0 / PI * p.coupling();
        let mut prev = 1.0;
        for i in 1..=300 {
            let x = i as f64 * 0.01;
            let g = gaussian_rho11(x, &p).unwrap();
            assert!(g < prev);
            prev = g;
            // e^{−u} − (1 − u) ∈ [0, u²/2] for u = c·x(x+2) ≥ 0
            let linear = 1.0 - 2.0 * kernel_k_quadratic(x, &p).unwrap();
            let u = c * x * (x + 2.0);
            let diff = g - linear;
            assert!(diff >= 0.0 && diff <= u * u / 2.0 + 1e-16, "x {x}");
            if x <= 1.4 {
                assert!(diff.abs() < 5.0 * p.coupling() * p.coupling());
            }
        }
    }

    #[test]
    fn forms_disagree_away_from_zero() {
        let p = params(7e-3, 100.0);
        let exact = kernel_k_form(1.0, &p, KernelForm::Exact).unwrap();
        let shifted = kernel_k_form(1.0, &p, KernelForm::ShiftedWithCutoffTerm).unwrap();
        let standard = kernel_k_form(1.0, &p, KernelForm::StandardWithCutoffTerm).unwrap();
        // the cutoff term adds (2/π)Γ₀(π/2)ω'x = Γ₀ω'x
        assert!((standard.re - exact.re - p.coupling()).abs() < 1e-15);
        assert!((standard.re - shifted.re - p.gamma0).abs() < 1e-15);
    }

    #[test]
    fn absolute_time_conversion() {
        let p = params(1e-3, 50.0).with_tau_s(2e-7).unwrap();
        let a = kernel_k_at_time(3e-7, &p).unwrap();
        let b = kernel_k(1.5, &p).unwrap();
        assert!((a.re - b.re).abs() < 1e-18);
        assert!(kernel_k(-0.1, &p).is_err());
        assert!(NoiseParams::new(-1.0, 0.0, 1.0, 1.0).is_err());
        assert!(NoiseParams::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(NoiseParams::new(1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn single_precision_kernel() {
        let p32 = NoiseParams::<f32>::from_coupling(7e-3, 100.0).unwrap();
        let p64 = params(7e-3, 100.0);
        let a = kernel_k(2.0_f32, &p32).unwrap().re as f64;
        let b = kernel_k(2.0, &p64).unwrap().re;
        assert!((a - b).abs() < 1e-6 * b.abs().max(1e-6));
    }

    proptest! {
        #[test]
        fn re_k_non_decreasing(
            x in 0.0..10.0_f64, dx in 1e-6..0.5_f64,
            coupling in 1e-5..1e-1_f64, w in 0.1..1000.0_f64,
        ) {
            let p = params(coupling, w);
            let a = kernel_k(x, &p).unwrap().re;
            let b = kernel_k(x + dx, &p).unwrap().re;
            prop_assert!(b >= a);
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn linear_in_scales(
            x in 0.0..10.0_f64, g in 1e-6..1e-2_f64, d in 1e-6..1e-2_f64,
            w in 0.1..1000.0_f64, s in 0.1..10.0_f64,
        ) {
            let p = NoiseParams::new(g, d, w, 1.0).unwrap();
            let q = NoiseParams::new(s * g, s * d, w, 1.0).unwrap();
            let (a, b) = (kernel_k(x, &p).unwrap(), kernel_k(x, &q).unwrap());
            prop_assert!((b.re - s * a.re).abs() <= 1e-12 * b.re.abs().max(1e-300));
            prop_assert!((b.im - s * a.im).abs() <= 1e-12 * b.im.abs().max(1e-300));
        }
    }
}
