//! The identity suite behind `turnstile verify`: every closed-form value the
//! toolkit is expected to reproduce, as named checks.

use serde::Serialize;

use crate::bell::{bell_projector, BellIndex, QubitLabel, Register};
use crate::entropy::{transfer_entropy, Conditioning};
use crate::error::Result;
use crate::netsim::{blackhole_identity_residual, blackhole_mitigate, quantum_detector_dm};
use crate::petz::{composition_residual, predetect, recovered_state, Scenario};
use crate::turnstile::{
    correct_with, decomposition_residual, prepare, project_bc, Correction, CorrectionTable, OutcomeSelector,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    /// `NaN` when the computation itself failed.
    pub got: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, expected: f64, got: Result<f64>, tolerance: f64) -> Self {
        let (got, error) = match got {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        Self { name: name.into(), expected, got, tolerance, error }
    }

    pub fn passed(&self) -> bool {
        (self.got - self.expected).abs() <= self.tolerance
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Swap the `σ₁` and `σ₃` entries of the correction table. Negative control.
    pub corrupt_correction_table: bool,
}

fn table(opts: VerifyOptions) -> CorrectionTable {
    if opts.corrupt_correction_table {
        CorrectionTable::new([
            Correction::Identity,
            Correction::Sigma3,
            Correction::Sigma1,
            Correction::Sigma3Sigma1,
        ])
    } else {
        CorrectionTable::standard()
    }
}

/// Worst deviation of the corrected `AD` state from the input over all four outcomes.
fn correction_residual(input: BellIndex, table: &CorrectionTable) -> Result<f64> {
    let reg = prepare(input, 0);
    let mut worst: f64 = 0.0;
    for outcome in BellIndex::all() {
        let rec = correct_with(&project_bc(&reg, OutcomeSelector::Forced(outcome))?, input, table)?;
        worst = worst.max(rec.final_ad().state().max_abs_diff(&bell_projector(input)));
    }
    Ok(worst)
}

fn transfer_scenarios() -> Result<(Register, Register)> {
    let l = |s: &str| QubitLabel::new(s, 0);
    let pair = |a, b, idx| Register::bell_pair(l(a), l(b), idx);
    let failed = pair("A", "B", BellIndex::B00)?
        .merge(&pair("C", "D", BellIndex::B00)?)?
        .reduced(&["A", "B", "D"])?;
    let succeeded = pair("A", "D", BellIndex::B00)?
        .merge(&pair("B", "C", BellIndex::B00)?)?
        .reduced(&["A", "B", "D"])?;
    Ok((failed, succeeded))
}

pub fn run(opts: VerifyOptions) -> Vec<Check> {
    const EXACT: f64 = 1e-12;
    const TOL: f64 = 1e-9;
    let mut checks = Vec::new();

    for idx in BellIndex::all() {
        checks.push(Check::new(format!("swap decomposition, input β{idx}"), 0.0, Ok(decomposition_residual(idx)), EXACT));
    }
    let t = table(opts);
    for idx in BellIndex::all() {
        checks.push(Check::new(format!("correction table restores β{idx} on AD"), 0.0, correction_residual(idx, &t), TOL));
    }

    let rec = project_bc(&prepare(BellIndex::B00, 0), OutcomeSelector::Forced(BellIndex::B01))
        .and_then(|o| correct_with(&o, BellIndex::B00, &t));
    let ledger = |f: fn(&crate::turnstile::EntropyLedger) -> f64| rec.as_ref().map(|r| f(&r.ledger)).map_err(Clone::clone);
    checks.push(Check::new("S(C|D) before inversion", -1.0, ledger(|l| l.cond_cd_before), TOL));
    checks.push(Check::new("S(A|D) before inversion", 1.0, ledger(|l| l.cond_ad_before), TOL));
    checks.push(Check::new("S(A|D) after inversion", -1.0, ledger(|l| l.cond_ad_after), TOL));
    checks.push(Check::new("S(C|D) after inversion", 1.0, ledger(|l| l.cond_cd_after), TOL));
    checks.push(Check::new("S(AD) after inversion", 0.0, ledger(|l| l.joint_ad_after), TOL));
    checks.push(Check::new("Shannon entropy of outcomes", 2.0, ledger(|l| l.outcome_shannon), TOL));
    checks.push(Check::new("fidelity with input after inversion", 1.0, rec.as_ref().map(|r| r.fidelity()).map_err(Clone::clone), TOL));

    match transfer_scenarios() {
        Ok((failed, succeeded)) => {
            checks.push(Check::new("transfer entropy on future, projection failed", 2.0, transfer_entropy(&failed, Conditioning::OnFuture), TOL));
            checks.push(Check::new("transfer entropy on future, projection succeeded", 0.0, transfer_entropy(&succeeded, Conditioning::OnFuture), TOL));
            checks.push(Check::new("transfer entropy on past, projection failed", 0.0, transfer_entropy(&failed, Conditioning::OnPast), TOL));
            checks.push(Check::new("transfer entropy on past, projection succeeded", 0.0, transfer_entropy(&succeeded, Conditioning::OnPast), TOL));
        }
        Err(e) => checks.push(Check::new("transfer entropy scenarios", 0.0, Err(e), TOL)),
    }

    let scenarios = std::iter::once(Scenario::FutureAttack).chain(BellIndex::all().into_iter().map(Scenario::FutureNormal));
    for s in scenarios {
        let expected = if s == Scenario::FutureAttack { -1.0 } else { 1.0 };
        checks.push(Check::new(format!("petz S(A|B), {s}"), expected, predetect(s).map(|v| v.conditional_entropy), TOL));
        checks.push(Check::new(format!("petz output trace, {s}"), 1.0, recovered_state(s).map(|o| o.trace().re), TOL));
    }
    for s in [
        Scenario::FutureAttack,
        Scenario::FutureNormal(BellIndex::B00),
        Scenario::FutureNormal(BellIndex::B11),
    ] {
        checks.push(Check::new(format!("petz three-map composition, {s}"), 0.0, composition_residual(s), TOL));
    }

    checks.push(Check::new("black-hole decomposition", 0.0, Ok(blackhole_identity_residual()), EXACT));
    let l = |s: &str, t| QubitLabel::new(s, t);
    let delta = Register::bell_pair(l("A1", 0), l("B1", 1), BellIndex::B00).and_then(|p1| {
        let p2 = Register::bell_pair(l("A2", 0), l("B2", 1), BellIndex::B00)?;
        blackhole_mitigate(&p1, &p2, OutcomeSelector::Forced(BellIndex::B11)).map(|m| m.pool_delta as f64)
    });
    checks.push(Check::new("black-hole pool delta", 0.0, delta, 0.0));

    for (n, r) in [(1u64, 1u64), (2, 1), (1, 2)] {
        checks.push(Check::new(
            format!("detector density-matrix oracle N={n} R={r}"),
            r as f64 - n as f64,
            quantum_detector_dm(n, r),
            TOL,
        ));
    }
    checks
}
