//! Sine and cosine integrals, plus the adaptive quadrature used to check
//! every closed form in the kernel.
//!
//! Two sine-integral conventions are exposed side by side:
//!
//! * [`si_standard`]: `Si(x) = ∫₀ˣ sin t / t dt`, odd, `Si(∞) = π/2`.
//! * [`si_shifted`]: `Si(x) − π/2`, which vanishes at `+∞`. The decoherence
//!   kernel literature writes this one with the same symbol, so every caller
//!   in this crate names the convention it consumes.
//!
//! For `|x| ≤ 4` both `Si` and `Ci` use their Taylor series. Beyond that the
//! auxiliary functions are obtained from the continued fraction of `E₁(ix)`
//! (modified Lentz), which gives full precision from `x ≈ 2` upwards.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 4.0;
const MAX_SERIES_TERMS: usize = 200;
const MAX_FRACTION_TERMS: usize = 10_000;
const INITIAL_PANELS: usize = 8;

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-10),
            max_subdivisions: 10_000,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) || !self.abs_tol.is_finite() {
            return Err(Error::invalid("quadrature config", "abs_tol must be positive"));
        }
        if !(self.rel_tol > T::zero()) || !self.rel_tol.is_finite() {
            return Err(Error::invalid("quadrature config", "rel_tol must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid(
                "quadrature config",
                "max_subdivisions must be at least 1",
            ));
        }
        Ok(())
    }
}

/// `∫₀ˣ sin t / t dt`.
pub fn si_standard<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::domain("si_standard", x.as_f64(), "finite x"));
    }
    if x < T::zero() {
        return si_standard(-x).map(|v| -v);
    }
    if x <= T::lit(SERIES_LIMIT) {
        Ok(si_series(x))
    } else {
        Ok(auxiliary(x).1)
    }
}

/// `∫₀ˣ sin t / t dt − π/2`.
pub fn si_shifted<T: Real>(x: T) -> Result<T> {
    si_standard(x).map(|v| v - T::FRAC_PI_2())
}

/// `Ci(x) = −∫ₓ^∞ cos t / t dt` for `x > 0`.
pub fn ci<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() || !(x > T::zero()) {
        return Err(Error::domain("ci", x.as_f64(), "finite x > 0"));
    }
    if x <= T::lit(SERIES_LIMIT) {
        Ok(ci_series(x))
    } else {
        Ok(auxiliary(x).0)
    }
}

/// `x − Si(x)`, accurate for small `x` where the subtraction cancels.
pub(crate) fn x_minus_si<T: Real>(x: T) -> T {
    if x.abs() >= T::one() {
        return x - si_standard(x).unwrap_or_else(|_| T::nan());
    }
    // Σ_{n≥1} (−1)^{n+1} x^{2n+1} / ((2n+1)(2n+1)!)
    let x2 = x * x;
    let mut term = x;
    let mut sum = T::zero();
    for n in 1..MAX_SERIES_TERMS {
        let (a, b) = (T::lit((2 * n) as f64), T::lit((2 * n + 1) as f64));
        term = -term * x2 / (a * b);
        let add = -term / b;
        sum = sum + add;
        if add.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

fn si_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_SERIES_TERMS {
        let (a, b) = (T::lit((2 * n) as f64), T::lit((2 * n + 1) as f64));
        term = -term * x2 / (a * b);
        let add = term / b;
        sum = sum + add;
        if add.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

fn ci_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = T::one();
    let mut series = T::zero();
    for n in 1..MAX_SERIES_TERMS {
        let (a, b) = (T::lit((2 * n - 1) as f64), T::lit((2 * n) as f64));
        term = -term * x2 / (a * b);
        let add = term / b;
        series = series + add;
        if add.abs() <= T::epsilon() * series.abs() {
            break;
        }
    }
    T::lit(EULER_GAMMA) + x.ln() + series
}

/// Returns `(Ci(x), Si(x))` for `x > 0` from `−E₁(ix) = Ci(x) + i(Si(x) − π/2)`.
fn auxiliary<T: Real>(x: T) -> (T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let tiny = T::min_positive_value() * T::lit(1e10);

    let mut b = Complex::new(one, x);
    let mut c = Complex::new(one / tiny, T::zero());
    let mut d = Complex::new(one, T::zero()) / b;
    let mut h = d;
    for i in 2..MAX_FRACTION_TERMS {
        let k = T::lit((i - 1) as f64);
        let a = -(k * k);
        b = b + Complex::new(two, T::zero());
        d = Complex::new(one, T::zero()) / (d * a + b);
        c = b + Complex::new(a, T::zero()) / c;
        let del = c * d;
        h = h * del;
        if (del.re - one).abs() + del.im.abs() < T::epsilon() {
            break;
        }
    }
    let h = h * Complex::new(x.cos(), -x.sin());
    (-h.re, T::FRAC_PI_2() + h.im)
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    fl: T,
    fr: T,
    left: T,
    right: T,
    value: T,
    error: T,
}

struct Ranked<T>(T, usize);

impl<T: PartialOrd> PartialEq for Ranked<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: PartialOrd> Eq for Ranked<T> {}
impl<T: PartialOrd> PartialOrd for Ranked<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: PartialOrd> Ord for Ranked<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .partial_cmp(&other.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

fn eval<T: Real, F: FnMut(T) -> T>(f: &mut F, x: T) -> Result<T> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::domain("integrand", x.as_f64(), "finite integrand value"))
    }
}

fn panel<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T, fa: T, fm: T, fb: T, whole: T) -> Result<Panel<T>> {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let fl = eval(f, (a + m) / two)?;
    let fr = eval(f, (m + b) / two)?;
    let h12 = (b - a) / T::lit(12.0);
    let four = T::lit(4.0);
    let left = h12 * (fa + four * fl + fm);
    let right = h12 * (fm + four * fr + fb);
    let diff = left + right - whole;
    let fifteen = T::lit(15.0);
    Ok(Panel {
        a,
        b,
        fa,
        fm,
        fb,
        fl,
        fr,
        left,
        right,
        value: left + right + diff / fifteen,
        error: diff.abs() / fifteen,
    })
}

/// Globally adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Each panel carries the Richardson-corrected two-half Simpson estimate and
/// its error; the panel with the largest error is bisected until the summed
/// error is below `max(abs_tol, rel_tol·|I|)`. Evaluation order depends only
/// on `f`, the interval and the config, so results are reproducible.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, cfg: &QuadratureConfig<T>) -> Result<T> {
    cfg.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("integrate_adaptive", a.as_f64(), "finite limits"));
    }
    if a > b {
        return Err(Error::domain("integrate_adaptive", b.as_f64(), "b >= a"));
    }
    if a == b {
        return Ok(T::zero());
    }

    let two = T::lit(2.0);
    let width = (b - a) / T::lit(INITIAL_PANELS as f64);
    let mut panels: Vec<Panel<T>> = Vec::with_capacity(INITIAL_PANELS + 2 * cfg.max_subdivisions);
    let mut heap = BinaryHeap::new();
    let mut fa = eval(&mut f, a)?;
    for i in 0..INITIAL_PANELS {
        let lo = a + width * T::lit(i as f64);
        let hi = if i + 1 == INITIAL_PANELS {
            b
        } else {
            a + width * T::lit((i + 1) as f64)
        };
        let fm = eval(&mut f, (lo + hi) / two)?;
        let fb = eval(&mut f, hi)?;
        let whole = (hi - lo) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
        let p = panel(&mut f, lo, hi, fa, fm, fb, whole)?;
        heap.push(Ranked(p.error, panels.len()));
        panels.push(p);
        fa = fb;
    }

    let sums = |heap: &BinaryHeap<Ranked<T>>, panels: &[Panel<T>]| {
        heap.iter().fold((T::zero(), T::zero()), |(v, e), r| {
            (v + panels[r.1].value, e + panels[r.1].error)
        })
    };
    let (mut total, mut error) = sums(&heap, &panels);
    let mut subdivisions = 0;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if error <= tol {
            let (t, e) = sums(&heap, &panels);
            total = t;
            error = e;
            if error <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
                return Ok(total);
            }
        }
        if subdivisions >= cfg.max_subdivisions {
            break;
        }
        let Some(Ranked(_, idx)) = heap.pop() else {
            break;
        };
        let p = panels[idx];
        let m = (p.a + p.b) / two;
        if !(m > p.a && m < p.b) {
            // interval exhausted at machine resolution
            heap.push(Ranked(p.error, idx));
            break;
        }
        let l = panel(&mut f, p.a, m, p.fa, p.fl, p.fm, p.left)?;
        let r = panel(&mut f, m, p.b, p.fm, p.fr, p.fb, p.right)?;
        total = total - p.value + l.value + r.value;
        error = error - p.error + l.error + r.error;
        heap.push(Ranked(l.error, panels.len()));
        panels.push(l);
        heap.push(Ranked(r.error, panels.len()));
        panels.push(r);
        subdivisions += 1;
    }
    let (total, error) = sums(&heap, &panels);
    Err(Error::Convergence {
        estimate: total.as_f64(),
        error_bound: error.as_f64(),
        subdivisions,
    })
}
