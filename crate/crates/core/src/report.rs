//! Cross-checks of the closed forms usually quoted for the model against
//! independent numerical oracles. Disagreements are data, not errors.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calibration::{
    coupling_from_alpha, estimate_alpha_with, parse_counts, reference_value, ConversionRule, Estimator, BUNDLED_COUNTS,
    REFERENCE_VALUES,
};
use crate::error::Result;
use crate::evolution::{
    build_superoperator, cnot_population_closed_form, evolve_state, population_matrix, population_matrix_for,
};
use crate::kernel::{
    double_integral_of_correlation, kernel_k, kernel_k_form, kernel_k_quadratic, KernelForm, KernelValue, NoiseParams,
};
use crate::linalg::{identity, inverse, max_abs_diff, Matrix};
use crate::multiplet::{cnot_basis, identity_basis, transition_tensor_for, Axis, MultipletState, SpinCoupling};
use crate::qem::{
    closed_form_coefficients, cost_closed_form, cost_from_expansion, cost_numeric, dirac_expand, recovery_closed_form,
    recovery_numeric,
};
use crate::specfun::QuadratureConfig;

/// Population matrices should agree to this.
pub const MATRIX_TOLERANCE: f64 = 1e-12;
/// Quadrature-backed comparisons.
pub const ORACLE_TOLERANCE: f64 = 1e-6;
/// Quoted couplings carry three to four significant figures.
pub const QUOTED_RELATIVE_TOLERANCE: f64 = 5e-3;
/// Calibration estimates against one-significant-figure quotes.
pub const ALPHA_TOLERANCE: f64 = 1.5e-3;
/// Eigenvalues below this raise a positivity warning.
pub const POSITIVITY_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Match,
    Mismatch,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    pub description: String,
    pub status: Status,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub details: Value,
}

impl ReportEntry {
    fn compare(id: &str, description: &str, max_deviation: f64, tolerance: f64, details: Value) -> Self {
        Self {
            id: id.to_string(),
            description: description.to_string(),
            status: if max_deviation <= tolerance {
                Status::Match
            } else {
                Status::Mismatch
            },
            max_deviation,
            tolerance,
            details,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub matches: usize,
    pub mismatches: usize,
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub entries: Vec<ReportEntry>,
    pub summary: Summary,
}

impl DiscrepancyReport {
    pub fn entry(&self, id: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

const KERNEL_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
const ALPHA_GRID: [f64; 5] = [0.0, 0.005, 0.01, 0.05, 0.1];

fn oracle_params() -> Result<NoiseParams<f64>> {
    NoiseParams::new(1e-3, 2e-3, 10.0, 1.0)
}

fn kernel_oracle(x: f64, p: &NoiseParams<f64>) -> Result<KernelValue<f64>> {
    let d = double_integral_of_correlation(x, p, &QuadratureConfig::default())?;
    let scale = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
    Ok(KernelValue {
        re: scale * d.gamma,
        im: -d.delta,
    })
}

fn kernel_variants() -> Result<Vec<ReportEntry>> {
    let p = oracle_params()?;
    let oracle: Vec<KernelValue<f64>> = KERNEL_GRID
        .iter()
        .map(|&x| kernel_oracle(x, &p))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for form in KernelForm::ALL {
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for (&x, o) in KERNEL_GRID.iter().zip(&oracle) {
            let k = kernel_k_form(x, &p, form)?;
            let dev = (k.re - o.re).abs().max((k.im - o.im).abs());
            worst = worst.max(dev);
            rows.push(json!({"x": x, "re_k": k.re, "im_k": k.im, "oracle_re_k": o.re, "oracle_im_k": o.im}));
        }
        out.push(ReportEntry::compare(
            &format!("kernel_{}", form.name()),
            "closed-form kernel against the nested quadrature of the bath correlation",
            worst,
            ORACLE_TOLERANCE,
            json!({"gamma0": p.gamma0, "delta0": p.delta0, "omega_c_tau_s": p.omega_c_tau_s, "points": rows}),
        ));
    }
    Ok(out)
}

fn correlation_prefactor() -> Result<ReportEntry> {
    let p = oracle_params()?;
    let x = 1.0;
    let d = double_integral_of_correlation(x, &p, &QuadratureConfig::default())?;
    let k = kernel_k(x, &p)?;
    let ratio = d.gamma / k.re;
    Ok(ReportEntry::compare(
        "bath_correlation_prefactor",
        "double time integral of the correlation divided by Re k (expected 1)",
        (ratio - 1.0).abs(),
        ORACLE_TOLERANCE,
        json!({"x": x, "ratio": ratio, "pi_squared_over_4": std::f64::consts::PI.powi(2) / 4.0}),
    ))
}

fn quadratic_kernel() -> Result<ReportEntry> {
    let p = NoiseParams::from_coupling(7e-4, 100.0)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for x in [0.1_f64, 0.5, 1.0, 2.0, 3.0] {
        let exact = kernel_k(x, &p)?.re;
        let quad = kernel_k_quadratic(x, &p)?;
        let rel = (quad - exact).abs() / exact;
        worst = worst.max(rel);
        rows.push(json!({"x": x, "exact": exact, "quadratic": quad, "relative_deviation": rel}));
    }
    Ok(ReportEntry::compare(
        "quadratic_kernel",
        "short-time quadratic Re k against the exact kernel (relative)",
        worst,
        ORACLE_TOLERANCE,
        json!({"coupling": p.coupling(), "omega_c_tau_s": p.omega_c_tau_s, "points": rows}),
    ))
}

fn cnot_population() -> Result<ReportEntry> {
    let basis = cnot_basis::<f64>();
    let without_target_z: Vec<SpinCoupling> = SpinCoupling::ALL
        .into_iter()
        .filter(|s| !(s.qubit == 1 && s.axis == Axis::Z))
        .collect();
    let reduced = transition_tensor_for(&basis, &without_target_z);
    let mut worst: f64 = 0.0;
    let mut worst_reduced: f64 = 0.0;
    let mut rows = Vec::new();
    for alpha in ALPHA_GRID {
        let derived = population_matrix_for(&basis, alpha)?;
        let quoted = cnot_population_closed_form(alpha)?;
        let dev = max_abs_diff(&derived.p, &quoted.p);
        let v = build_superoperator(&reduced, [0.0; 4], KernelValue { re: alpha, im: 0.0 }, 0.0)?;
        let dev_reduced = max_abs_diff(&population_matrix(&v)?.p, &quoted.p);
        worst = worst.max(dev);
        worst_reduced = worst_reduced.max(dev_reduced);
        rows.push(json!({"alpha": alpha, "derived": derived.p, "closed_form": quoted.p, "deviation": dev}));
    }
    Ok(ReportEntry::compare(
        "cnot_population_matrix",
        "closed-form CNOT population matrix against the transition-tensor construction",
        worst,
        MATRIX_TOLERANCE,
        json!({
            "points": rows,
            "deviation_without_target_sigma_z": worst_reduced,
        }),
    ))
}

fn recovery() -> Result<ReportEntry> {
    let alpha: f64 = 0.01;
    let closed = recovery_closed_form(alpha)?.r;
    let derived_p = population_matrix_for(&cnot_basis::<f64>(), alpha)?;
    let quoted_p = cnot_population_closed_form(alpha)?;
    let from_derived = recovery_numeric(&derived_p, &identity())?.r;
    let from_quoted = inverse(&quoted_p.p)?;
    let dev_derived = max_abs_diff(&closed, &from_derived);
    let dev_quoted = max_abs_diff(&closed, &from_quoted);
    let diff = |a: &Matrix<f64, 4>, b: &Matrix<f64, 4>| {
        let mut d = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                d[i][j] = a[i][j] - b[i][j];
            }
        }
        d
    };
    Ok(ReportEntry::compare(
        "recovery_closed_form",
        "closed-form recovery operator against the numeric inverse",
        dev_derived.max(dev_quoted),
        MATRIX_TOLERANCE,
        json!({
            "alpha": alpha,
            "closed_form": closed,
            "deviation_from_derived_inverse": dev_derived,
            "deviation_from_closed_form_population_inverse": dev_quoted,
            "entrywise_difference_derived": diff(&closed, &from_derived),
        }),
    ))
}

fn cost() -> Result<Vec<ReportEntry>> {
    let alpha: f64 = 0.01;
    let closed = cost_closed_form(alpha)?;
    let projected = cost_from_expansion(&dirac_expand(&recovery_closed_form(alpha)?.r)?)?.cost;
    let numeric = cost_numeric(alpha)?.cost;
    let k = closed_form_coefficients(alpha)?;
    let e = dirac_expand(&recovery_closed_form(alpha)?.r)?;
    let coeff_rows = json!([
        {"operator": "I⊗I", "quoted": (k.c + k.e) / 2.0, "projected": e.get(0, 0)},
        {"operator": "I⊗σ1", "quoted": k.d, "projected": e.get(0, 1)},
        {"operator": "σ3⊗I", "quoted": (k.c - k.e) / 2.0, "projected": e.get(3, 0)},
        {"operator": "σ3⊗σ1", "quoted": -(k.f - k.d) / 2.0, "projected": e.get(3, 1)},
        {"operator": "σ1⊗I", "quoted": (k.f + 2.0 * k.b - k.d) / 2.0, "projected": e.get(1, 0)},
        {"operator": "σ1⊗σ1", "quoted": k.b, "projected": e.get(1, 1)},
    ]);
    let coeff_dev = [
        ((k.c + k.e) / 2.0 - e.get(0, 0)).abs(),
        (k.d - e.get(0, 1)).abs(),
        ((k.c - k.e) / 2.0 - e.get(3, 0)).abs(),
        (-(k.f - k.d) / 2.0 - e.get(3, 1)).abs(),
        ((k.f + 2.0 * k.b - k.d) / 2.0 - e.get(1, 0)).abs(),
        (k.b - e.get(1, 1)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(vec![
        ReportEntry::compare(
            "cost_closed_form",
            "closed-form cost against the projection of the same recovery operator",
            (closed - projected).abs(),
            MATRIX_TOLERANCE,
            json!({"alpha": alpha, "closed_form": closed, "projected": projected, "numeric_inverse": numeric,
                   "deviation_from_numeric_inverse": (closed - numeric).abs()}),
        ),
        ReportEntry::compare(
            "expansion_coefficients",
            "quoted Pauli-product coefficients against projection of the closed-form recovery operator",
            coeff_dev,
            MATRIX_TOLERANCE,
            json!({"alpha": alpha, "coefficients": coeff_rows}),
        ),
    ])
}

fn conversions() -> Result<Vec<ReportEntry>> {
    let mut out = Vec::new();
    for rule in ConversionRule::ALL {
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        let mut reproduced = 0;
        for r in REFERENCE_VALUES.iter() {
            let coupling = coupling_from_alpha(r.alpha, rule)?;
            let rel = (coupling - r.coupling).abs() / r.coupling;
            worst = worst.max(rel);
            if rel <= QUOTED_RELATIVE_TOLERANCE {
                reproduced += 1;
            }
            rows.push(json!({
                "device": r.device, "gate": r.gate, "initial_state": r.initial_state,
                "alpha": r.alpha, "quoted_coupling": r.coupling, "coupling": coupling, "relative_deviation": rel,
            }));
        }
        out.push(ReportEntry::compare(
            &format!("conversion_{}", rule.name()),
            "coupling from the quoted Re k against the quoted coupling (relative)",
            worst,
            QUOTED_RELATIVE_TOLERANCE,
            json!({"alpha_per_coupling": rule.alpha_per_coupling(), "records_reproduced": reproduced, "records": rows}),
        ));
    }
    Ok(out)
}

fn calibration_fixture() -> Result<ReportEntry> {
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut worst_ls: f64 = 0.0;
    for rec in parse_counts(BUNDLED_COUNTS)? {
        let Some(reference) = reference_value(&rec.device, rec.gate, rec.initial_state) else {
            continue;
        };
        let cell = estimate_alpha_with(&rec, Estimator::DesignatedOutcome, ConversionRule::default())?;
        let ls = estimate_alpha_with(&rec, Estimator::LeastSquares, ConversionRule::default())?;
        worst = worst.max((cell.alpha_hat - reference.alpha).abs());
        worst_ls = worst_ls.max((ls.alpha_hat - reference.alpha).abs());
        rows.push(json!({
            "device": rec.device, "gate": rec.gate, "initial_state": rec.initial_state,
            "quoted": reference.alpha, "designated_outcome": cell.alpha_hat, "least_squares": ls.alpha_hat,
        }));
    }
    let mut entry = ReportEntry::compare(
        "calibration_fixture",
        "Re k estimated from the bundled counts against the quoted values",
        worst,
        ALPHA_TOLERANCE,
        json!({"least_squares_max_deviation": worst_ls, "records": rows}),
    );
    if entry.status == Status::Match && worst_ls > ALPHA_TOLERANCE {
        entry.status = Status::Warning;
    }
    Ok(entry)
}

fn positivity() -> Result<ReportEntry> {
    let mut lowest = f64::INFINITY;
    let mut rows = Vec::new();
    for (name, basis) in [("identity", identity_basis::<f64>()), ("cnot", cnot_basis())] {
        for state in MultipletState::ALL {
            let mut state_low = f64::INFINITY;
            for i in 0..=30 {
                let alpha = i as f64 * 0.01;
                let rho = evolve_state(state, KernelValue { re: alpha, im: 0.0 }, 0.0, &basis)?;
                state_low = state_low.min(rho.min_eigenvalue());
            }
            lowest = lowest.min(state_low);
            rows.push(json!({"gate": name, "initial_state": state, "min_eigenvalue": state_low}));
        }
    }
    Ok(ReportEntry {
        id: "positivity".into(),
        description: "smallest eigenvalue of evolved states over alpha in [0, 0.3]".into(),
        status: if lowest < POSITIVITY_FLOOR {
            Status::Warning
        } else {
            Status::Match
        },
        max_deviation: (-lowest).max(0.0),
        tolerance: -POSITIVITY_FLOOR,
        details: json!({"states": rows}),
    })
}

fn alpha_zero() -> Result<ReportEntry> {
    let id4 = identity::<f64, 4>();
    let devs = [
        max_abs_diff(&population_matrix_for(&cnot_basis::<f64>(), 0.0)?.p, &id4),
        max_abs_diff(&cnot_population_closed_form(0.0)?.p, &id4),
        max_abs_diff(&recovery_closed_form(0.0)?.r, &id4),
        (cost_closed_form(0.0_f64)? - 1.0).abs(),
        (cost_numeric(0.0_f64)?.cost - 1.0).abs(),
    ];
    let worst = devs.into_iter().fold(0.0, f64::max);
    Ok(ReportEntry::compare(
        "alpha_zero",
        "every closed form against its oracle at alpha = 0",
        worst,
        0.0,
        json!({"deviations": devs}),
    ))
}

/// Runs every comparison.
pub fn discrepancy_report() -> Result<DiscrepancyReport> {
    let mut entries = kernel_variants()?;
    entries.push(correlation_prefactor()?);
    entries.push(quadratic_kernel()?);
    entries.push(cnot_population()?);
    entries.push(recovery()?);
    entries.extend(cost()?);
    entries.extend(conversions()?);
    entries.push(calibration_fixture()?);
    entries.push(positivity()?);
    entries.push(alpha_zero()?);
    let count = |s: Status| entries.iter().filter(|e| e.status == s).count();
    let summary = Summary {
        matches: count(Status::Match),
        mismatches: count(Status::Mismatch),
        warnings: count(Status::Warning),
    };
    Ok(DiscrepancyReport { entries, summary })
}
