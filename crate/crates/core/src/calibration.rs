//! Estimating `Re k(τ_s)` and the coupling `Γ₀ω'_c` from measured outcome
//! counts of a single gate.
//!
//! Every outcome probability of the model is affine in `α = Re k(τ_s)`, so
//! both estimators are closed-form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::evolve_populations;
use crate::multiplet::{Gate, MultipletState};

/// Residuals above this magnitude mark a fit as not accepted.
pub const RESIDUAL_LIMIT: f64 = 0.05;

const ALPHA_MAX: f64 = 0.5;

/// One row of measured outcome counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsRecord {
    pub device: String,
    pub gate: Gate,
    pub initial_state: MultipletState,
    /// Counts for `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub counts: [u64; 4],
    pub shots: u64,
}

impl CountsRecord {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::invalid("counts record", "field `shots` must be positive"));
        }
        let total: u64 = self.counts.iter().sum();
        if total > self.shots {
            return Err(Error::invalid(
                "counts record",
                format!("field `counts` sums to {total}, more than shots = {}", self.shots),
            ));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> [f64; 4] {
        self.counts.map(|c| c as f64 / self.shots as f64)
    }
}

/// How `α` is extracted from the four observed frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Reads `α` off the single outcome whose model probability grows with
    /// `α`; for the tabulated gate/state pairs this is the annotated cell.
    #[default]
    DesignatedOutcome,
    /// Least squares over all four outcomes.
    LeastSquares,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::DesignatedOutcome => "designated_outcome",
            Estimator::LeastSquares => "least_squares",
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "designated_outcome" | "designated-outcome" => Ok(Estimator::DesignatedOutcome),
            "least_squares" | "least-squares" => Ok(Estimator::LeastSquares),
            other => Err(Error::invalid("estimator", format!("unknown estimator {other:?}"))),
        }
    }
}

/// Constant relating `α = Re k(τ_s)` to the coupling `Γ₀ω'_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ConversionRule {
    /// Quadratic short-time kernel at `t = τ_s`: `α = (2/π)(3/2)·Γ₀ω'_c`.
    #[default]
    #[serde(rename = "eq32_prefactor")]
    QuadraticKernel,
    /// `α = (3π/4)·Γ₀ω'_c`, the ratio implied by the identity-gate table.
    #[serde(rename = "table1_implied")]
    IdentityTable,
    /// `α = (16/7)·Γ₀ω'_c`, the ratio implied by the CNOT tables.
    #[serde(rename = "si_tables_implied")]
    CnotTables,
}

impl ConversionRule {
    pub const ALL: [ConversionRule; 3] = [
        ConversionRule::QuadraticKernel,
        ConversionRule::IdentityTable,
        ConversionRule::CnotTables,
    ];

    /// Wire name used in reports and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            ConversionRule::QuadraticKernel => "eq32_prefactor",
            ConversionRule::IdentityTable => "table1_implied",
            ConversionRule::CnotTables => "si_tables_implied",
        }
    }

    /// `α / Γ₀ω'_c`.
    pub fn alpha_per_coupling(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            ConversionRule::QuadraticKernel => 3.0 / PI,
            ConversionRule::IdentityTable => 3.0 * PI / 4.0,
            ConversionRule::CnotTables => 16.0 / 7.0,
        }
    }
}

impl fmt::Display for ConversionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConversionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConversionRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::invalid("conversion rule", format!("unknown rule {s:?}")))
    }
}

pub fn coupling_from_alpha(alpha: f64, rule: ConversionRule) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain("coupling_from_alpha", alpha, "alpha >= 0"));
    }
    Ok(alpha / rule.alpha_per_coupling())
}

/// The coupling under every rule, keyed by wire name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub eq32_prefactor: f64,
    pub table1_implied: f64,
    pub si_tables_implied: f64,
}

impl Couplings {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        Ok(Self {
            eq32_prefactor: coupling_from_alpha(alpha, ConversionRule::QuadraticKernel)?,
            table1_implied: coupling_from_alpha(alpha, ConversionRule::IdentityTable)?,
            si_tables_implied: coupling_from_alpha(alpha, ConversionRule::CnotTables)?,
        })
    }

    pub fn get(&self, rule: ConversionRule) -> f64 {
        match rule {
            ConversionRule::QuadraticKernel => self.eq32_prefactor,
            ConversionRule::IdentityTable => self.table1_implied,
            ConversionRule::CnotTables => self.si_tables_implied,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub device: String,
    pub gate: Gate,
    pub initial_state: MultipletState,
    pub estimator: Estimator,
    /// Estimate of `Re k(τ_s)`, clamped to `[0, 1/2]`.
    pub alpha_hat: f64,
    pub alpha_unclamped: f64,
    pub clamped: bool,
    /// Observed minus model probabilities at `alpha_hat`.
    pub residuals: [f64; 4],
    /// All residuals below [`RESIDUAL_LIMIT`].
    pub accepted: bool,
    pub conversion_rule: ConversionRule,
    pub coupling_hat: f64,
    pub couplings: Couplings,
}

/// Outcome probabilities predicted for a gate and initial multiplet state.
pub fn model_probabilities(gate: Gate, initial: MultipletState, alpha: f64) -> Result<[f64; 4]> {
    evolve_populations(initial, alpha, &gate.basis())
}

/// `(intercept, slope)` of each outcome probability as a function of `α`.
pub fn model_affine(gate: Gate, initial: MultipletState) -> Result<([f64; 4], [f64; 4])> {
    let p0 = model_probabilities(gate, initial, 0.0)?;
    let p1 = model_probabilities(gate, initial, ALPHA_MAX)?;
    let mut slope = [0.0; 4];
    for i in 0..4 {
        slope[i] = (p1[i] - p0[i]) / ALPHA_MAX;
    }
    Ok((p0, slope))
}

/// The outcome an estimate is read from. For the tabulated cases this is
/// the annotated cell; otherwise the first outcome with the steepest
/// positive slope.
pub fn designated_outcome(gate: Gate, initial: MultipletState) -> Result<usize> {
    use MultipletState::*;
    let tabulated = match (gate, initial) {
        (Gate::Identity, M1) => Some(1),
        (Gate::Cnot, M1) => Some(1),
        (Gate::Cnot, M2) => Some(0),
        (Gate::Cnot, M3) => Some(0),
        (Gate::Cnot, M4) => Some(1),
        _ => None,
    };
    if let Some(k) = tabulated {
        return Ok(k);
    }
    let (_, slope) = model_affine(gate, initial)?;
    let mut best = 0;
    for k in 1..4 {
        if slope[k] > slope[best] {
            best = k;
        }
    }
    if slope[best] <= 0.0 {
        return Err(Error::Consistency(format!(
            "no outcome of {gate}/{initial} grows with alpha"
        )));
    }
    Ok(best)
}

/// Closed-form least-squares `α` for observed frequencies `q`.
pub fn least_squares_alpha(gate: Gate, initial: MultipletState, q: [f64; 4]) -> Result<f64> {
    let (p0, slope) = model_affine(gate, initial)?;
    let num: f64 = (0..4).map(|i| slope[i] * (q[i] - p0[i])).sum();
    let den: f64 = slope.iter().map(|d| d * d).sum();
    Ok(num / den)
}

fn designated_alpha(gate: Gate, initial: MultipletState, q: [f64; 4]) -> Result<f64> {
    let (p0, slope) = model_affine(gate, initial)?;
    let k = designated_outcome(gate, initial)?;
    Ok((q[k] - p0[k]) / slope[k])
}

pub fn estimate_alpha(rec: &CountsRecord) -> Result<CalibrationResult> {
    estimate_alpha_with(rec, Estimator::default(), ConversionRule::default())
}

pub fn estimate_alpha_with(
    rec: &CountsRecord,
    estimator: Estimator,
    rule: ConversionRule,
) -> Result<CalibrationResult> {
    rec.validate()?;
    if rec.counts.iter().all(|&c| c == 0) {
        return Err(Error::invalid("counts record", "all counts are zero"));
    }
    let q = rec.frequencies();
    let raw = match estimator {
        Estimator::DesignatedOutcome => designated_alpha(rec.gate, rec.initial_state, q)?,
        Estimator::LeastSquares => least_squares_alpha(rec.gate, rec.initial_state, q)?,
    };
    let alpha_hat = raw.clamp(0.0, ALPHA_MAX);
    let model = model_probabilities(rec.gate, rec.initial_state, alpha_hat)?;
    let mut residuals = [0.0; 4];
    for i in 0..4 {
        residuals[i] = q[i] - model[i];
    }
    let couplings = Couplings::from_alpha(alpha_hat)?;
    Ok(CalibrationResult {
        device: rec.device.clone(),
        gate: rec.gate,
        initial_state: rec.initial_state,
        estimator,
        alpha_hat,
        alpha_unclamped: raw,
        clamped: alpha_hat != raw,
        residuals,
        accepted: residuals.iter().all(|r| r.abs() < RESIDUAL_LIMIT),
        conversion_rule: rule,
        coupling_hat: couplings.get(rule),
        couplings,
    })
}

/// Parses a JSON array of counts records. Blank input is an empty list.
pub fn parse_counts(text: &str) -> Result<Vec<CountsRecord>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let records: Vec<CountsRecord> = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: format!("counts at line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    for (i, r) in records.iter().enumerate() {
        r.validate().map_err(|e| Error::Parse {
            context: format!("counts record {} ({})", i + 1, r.device),
            message: e.to_string(),
        })?;
    }
    Ok(records)
}

pub fn load_counts(path: impl AsRef<Path>) -> Result<Vec<CountsRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_counts(&text).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {}", path.display(), context),
            message,
        },
        other => other,
    })
}

/// A value of `Re k(τ_s)` and `Γ₀ω'_c` quoted alongside a counts table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceValue {
    pub device: &'static str,
    pub gate: Gate,
    pub initial_state: MultipletState,
    pub alpha: f64,
    pub coupling: f64,
}

const fn reference(
    device: &'static str,
    gate: Gate,
    initial_state: MultipletState,
    alpha: f64,
    coupling: f64,
) -> ReferenceValue {
    ReferenceValue {
        device,
        gate,
        initial_state,
        alpha,
        coupling,
    }
}

/// Quoted estimates for the bundled counts. The `|01⟩` CNOT row for the
/// trapped-ion device uses the value stated in the text (1.7e-2); the table
/// cell itself reads 7.43e-2.
pub const REFERENCE_VALUES: [ReferenceValue; 10] = {
    use Gate::{Cnot, Identity};
    use MultipletState::*;
    [
        reference("ibm_guadalupe", Identity, M1, 6e-3, 2.548e-3),
        reference("ionq", Identity, M1, 1e-3, 4.26e-4),
        reference("ibm_guadalupe", Cnot, M1, 8e-3, 3.5e-3),
        reference("ionq", Cnot, M1, 8e-3, 3.5e-3),
        reference("ibm_guadalupe", Cnot, M2, 4e-2, 1.75e-2),
        reference("ionq", Cnot, M2, 1.7e-2, 7.44e-3),
        reference("ibm_guadalupe", Cnot, M3, 2.4e-2, 1.05e-2),
        reference("ionq", Cnot, M3, 1.2e-2, 5.25e-3),
        reference("ibm_guadalupe", Cnot, M4, 1.4e-2, 6.125e-3),
        reference("ionq", Cnot, M4, 8e-3, 3.5e-3),
    ]
};

pub fn reference_value(device: &str, gate: Gate, initial: MultipletState) -> Option<&'static ReferenceValue> {
    REFERENCE_VALUES
        .iter()
        .find(|r| r.device.eq_ignore_ascii_case(device) && r.gate == gate && r.initial_state == initial)
}

/// The bundled counts fixture.
pub const BUNDLED_COUNTS: &str = include_str!("../data/paper_tables.json");

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(gate: Gate, state: MultipletState, counts: [u64; 4]) -> CountsRecord {
        CountsRecord {
            device: "test".into(),
            gate,
            initial_state: state,
            counts,
            shots: counts.iter().sum(),
        }
    }

    #[test]
    fn model_examples() {
        let a = 0.01;
        let id = model_probabilities(Gate::Identity, MultipletState::M1, a).unwrap();
        for (x, y) in id.iter().zip([1.0 - 2.0 * a, a, a, 0.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        let m4 = model_probabilities(Gate::Cnot, MultipletState::M4, a).unwrap();
        for (x, y) in m4.iter().zip([a / 2.0, a / 2.0, (1.0 - a) / 2.0, (1.0 - a) / 2.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(model_probabilities(Gate::Cnot, MultipletState::M1, 0.7).is_err());
    }

    #[test]
    fn least_squares_examples() {
        let ibm = record(Gate::Identity, MultipletState::M1, [987, 6, 7, 0]);
        let r = estimate_alpha_with(&ibm, Estimator::LeastSquares, ConversionRule::default()).unwrap();
        assert!((r.alpha_hat - 6.5e-3).abs() < 1e-12);
        let ionq = record(Gate::Identity, MultipletState::M1, [998, 1, 1, 0]);
        let r = estimate_alpha_with(&ionq, Estimator::LeastSquares, ConversionRule::default()).unwrap();
        assert!((r.alpha_hat - 1e-3).abs() < 1e-12);
        let clean = record(Gate::Identity, MultipletState::M1, [1000, 0, 0, 0]);
        assert_eq!(estimate_alpha(&clean).unwrap().alpha_hat, 0.0);
        let r = estimate_alpha_with(&clean, Estimator::LeastSquares, ConversionRule::default()).unwrap();
        assert_eq!(r.alpha_hat, 0.0);
    }

    #[test]
    fn designated_outcome_reads_one_cell() {
        let ibm = record(Gate::Identity, MultipletState::M1, [987, 6, 7, 0]);
        let r = estimate_alpha(&ibm).unwrap();
        assert!((r.alpha_hat - 6e-3).abs() < 1e-15);
        assert!(r.accepted && !r.clamped);
        assert_eq!(designated_outcome(Gate::Identity, MultipletState::M2).unwrap(), 0);
        let m4 = record(Gate::Cnot, MultipletState::M4, [19, 7, 532, 442]);
        assert!((estimate_alpha(&m4).unwrap().alpha_hat - 1.4e-2).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_is_clamped() {
        // far more |00⟩ than any alpha explains for the |01⟩ start
        let rec = record(Gate::Cnot, MultipletState::M2, [900, 100, 0, 0]);
        let r = estimate_alpha(&rec).unwrap();
        assert!(r.clamped);
        assert_eq!(r.alpha_hat, 0.5);
        assert!(!r.accepted);
        let below = record(Gate::Identity, MultipletState::M1, [1000, 0, 0, 0]);
        let r = estimate_alpha_with(&below, Estimator::DesignatedOutcome, ConversionRule::CnotTables).unwrap();
        assert!(!r.clamped);
        assert_eq!(r.coupling_hat, 0.0);
    }

    #[test]
    fn invalid_records() {
        let mut rec = record(Gate::Identity, MultipletState::M1, [0, 0, 0, 0]);
        rec.shots = 10;
        assert!(estimate_alpha(&rec).is_err());
        rec.shots = 0;
        assert!(estimate_alpha(&rec).is_err());
        let over = CountsRecord {
            shots: 5,
            ..record(Gate::Identity, MultipletState::M1, [3, 3, 0, 0])
        };
        assert!(estimate_alpha(&over).is_err());
    }

    #[test]
    fn conversion_examples() {
        let t1 = coupling_from_alpha(6e-3, ConversionRule::IdentityTable).unwrap();
        assert_eq!(format!("{t1:.3e}"), "2.546e-3");
        assert_eq!(format!("{t1:.2e}"), format!("{:.2e}", 2.548e-3));
        let si = coupling_from_alpha(8e-3, ConversionRule::CnotTables).unwrap();
        assert!((si - 3.5e-3).abs() < 1e-15);
        let q = coupling_from_alpha(3e-3, ConversionRule::QuadraticKernel).unwrap();
        assert!((q - std::f64::consts::PI * 1e-3).abs() < 1e-15);
        for rule in ConversionRule::ALL {
            assert_eq!(coupling_from_alpha(0.0, rule).unwrap(), 0.0);
            assert_eq!(rule.name().parse::<ConversionRule>().unwrap(), rule);
            let json = serde_json::to_string(&rule).unwrap();
            assert_eq!(json, format!("\"{}\"", rule.name()));
        }
        assert!(coupling_from_alpha(-1.0, ConversionRule::CnotTables).is_err());
    }

    #[test]
    fn parsing() {
        assert!(parse_counts("").unwrap().is_empty());
        assert!(parse_counts("  \n").unwrap().is_empty());
        let bundled = parse_counts(BUNDLED_COUNTS).unwrap();
        assert_eq!(bundled.len(), 10);
        let unknown = r#"[{"device":"a","gate":"cnot","initial_state":"m1","counts":[1,2,3,4],"shots":10,"extra":1}]"#;
        let err = parse_counts(unknown).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
        let over = r#"[{"device":"a","gate":"cnot","initial_state":"m1","counts":[5,5,5,5],"shots":10}]"#;
        let err = parse_counts(over).unwrap_err().to_string();
        assert!(err.contains("counts") && err.contains("record 1"), "{err}");
        let negative = r#"[{"device":"a","gate":"cnot","initial_state":"m1","counts":[-1,5,0,0],"shots":10}]"#;
        assert!(matches!(parse_counts(negative), Err(Error::Parse { .. })));
        let bad_gate = r#"[{"device":"a","gate":"swap","initial_state":"m1","counts":[1,5,0,0],"shots":10}]"#;
        assert!(parse_counts(bad_gate).unwrap_err().to_string().contains("line 1"));
    }

    #[test]
    fn reference_lookup() {
        let r = reference_value("IonQ", Gate::Cnot, MultipletState::M2).unwrap();
        assert_eq!(r.alpha, 1.7e-2);
        assert!(reference_value("ionq", Gate::Identity, MultipletState::M3).is_none());
    }

    proptest! {
        #[test]
        fn exact_counts_recover_alpha(alpha in 0.0..0.5_f64, which in 0usize..4, cnot in any::<bool>()) {
            let gate = if cnot { Gate::Cnot } else { Gate::Identity };
            let state = MultipletState::ALL[which];
            let q = model_probabilities(gate, state, alpha).unwrap();
            prop_assert!((least_squares_alpha(gate, state, q).unwrap() - alpha).abs() < 1e-12);
            prop_assert!((designated_alpha(gate, state, q).unwrap() - alpha).abs() < 1e-12);
        }

        #[test]
        fn least_squares_is_permutation_equivariant(
            alpha in 0.0..0.3_f64, noise in proptest::array::uniform4(-0.01..0.01_f64),
            which in 0usize..4, perm_seed in 0usize..24,
        ) {
            let state = MultipletState::ALL[which];
            let (p0, slope) = model_affine(Gate::Cnot, state).unwrap();
            let mut q = model_probabilities(Gate::Cnot, state, alpha).unwrap();
            for i in 0..4 {
                q[i] += noise[i];
            }
            let mut perm = [0usize, 1, 2, 3];
            let mut s = perm_seed;
            for i in (1..4).rev() {
                perm.swap(i, s % (i + 1));
                s /= i + 1;
            }
            let fit = |q: &[f64; 4], p0: &[f64; 4], d: &[f64; 4]| {
                let num: f64 = (0..4).map(|i| d[i] * (q[i] - p0[i])).sum();
                num / d.iter().map(|x| x * x).sum::<f64>()
            };
            let permuted = |v: &[f64; 4]| perm.map(|i| v[i]);
            let direct = least_squares_alpha(Gate::Cnot, state, q).unwrap();
            let shuffled = fit(&permuted(&q), &permuted(&p0), &permuted(&slope));
            prop_assert!((direct - shuffled).abs() < 1e-12);
        }

        #[test]
        fn conversion_is_linear(a in 0.0..1.0_f64, b in 0.0..1.0_f64) {
            for rule in ConversionRule::ALL {
                let sum = coupling_from_alpha(a + b, rule).unwrap();
                let parts = coupling_from_alpha(a, rule).unwrap() + coupling_from_alpha(b, rule).unwrap();
                prop_assert!((sum - parts).abs() < 1e-15);
            }
        }
    }
}
