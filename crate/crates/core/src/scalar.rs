//! Scalar abstraction shared by the numerical core.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, NumCast};

/// Floating-point scalar the model is generic over (`f32` or `f64`).
pub trait Real: Float + FloatConst + Debug + Display + Default + Send + Sync + 'static {
    /// Tolerance used when validating structural invariants
    /// (normalisation, orthonormality, hermiticity).
    fn validation_tol() -> Self;

    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        NumCast::from(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn validation_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn validation_tol() -> Self {
        1e-5
    }
}
