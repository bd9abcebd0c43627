//! Time-convolutionless model of non-Markovian noise on two-qubit gates.
//!
//! The crate builds the decoherence kernel of an ohmic bath, the first-order
//! evolution superoperator of a gate in its multiplet basis, the recovery
//! operator used for quasiprobability error mitigation and its sampling
//! cost, and estimates the noise strength from measured outcome counts.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`. Calibration and reporting are
//! `f64` only.
//!
//! ```
//! use tclqem::{cost_numeric, kernel_k, NoiseParams};
//!
//! let p = NoiseParams::from_coupling(7e-3, 100.0).unwrap();
//! let alpha = kernel_k(1.0, &p).unwrap().re;
//! let cost = cost_numeric(alpha).unwrap().cost;
//! assert!(cost > 1.0);
//! ```

// index loops mirror the tensor notation; `!(x > 0)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod evolution;
pub mod kernel;
pub mod linalg;
pub mod multiplet;
pub mod qem;
pub mod report;
pub mod scalar;
pub mod specfun;

pub use calibration::{
    coupling_from_alpha, estimate_alpha, estimate_alpha_with, load_counts, model_probabilities, parse_counts,
    CalibrationResult, ConversionRule, CountsRecord, Couplings, Estimator,
};
pub use error::{Error, Result};
pub use evolution::{
    build_superoperator, cnot_population_closed_form, evolve_populations, population_matrix, population_matrix_for,
};
pub use kernel::{bath_correlation, gaussian_rho11, kernel_k, kernel_k_form, kernel_k_quadratic, KernelForm};
pub use multiplet::{basis_change, cnot_basis, identity_basis, transition_tensor, Gate, MultipletState};
pub use qem::{
    cost_closed_form, cost_from_expansion, cost_numeric, dirac_expand, recovery_closed_form, recovery_numeric,
};
pub use report::{discrepancy_report, DiscrepancyReport, ReportEntry, Status};
pub use scalar::Real;
pub use specfun::{ci, integrate_adaptive, si_shifted, si_standard};

pub type NoiseParams = kernel::NoiseParams<f64>;
pub type KernelValue = kernel::KernelValue<f64>;
pub type BathCorrelation = kernel::BathCorrelation<f64>;
pub type QuadratureConfig = specfun::QuadratureConfig<f64>;
pub type TwoQubitState = multiplet::TwoQubitState<f64>;
pub type MultipletBasis = multiplet::MultipletBasis<f64>;
pub type TransitionTensor = multiplet::TransitionTensor<f64>;
pub type BasisChange = multiplet::BasisChange<f64>;
pub type DensityMatrix = evolution::DensityMatrix<f64>;
pub type EvolutionSuperoperator = evolution::EvolutionSuperoperator<f64>;
pub type PopulationMatrix = evolution::PopulationMatrix<f64>;
pub type RecoveryOperator = qem::RecoveryOperator<f64>;
pub type DiracExpansion = qem::DiracExpansion<f64>;
pub type CostResult = qem::CostResult<f64>;
