//! The Turnstile: entanglement swapping that moves an input Bell index onto
//! a pair of qubits that never coexist.
//!
//! The device holds `|β₀₀⟩` on `A@(n−1)`, `B@n` (B went through a one-tick
//! delay line) and receives the input `|β_xy⟩` on `C@n`, `D@n`; `D` is then
//! delayed to `n+1`. A Bell projection on `BC` leaves `AD` in one of four
//! Bell states, and a Pauli correction on `D` restores `|β_xy⟩` on `AD`:
//!
//! | outcome on BC | AD before correction | correction on D |
//! |---------------|----------------------|-----------------|
//! | `β₀₀`         | `β_xy`               | `I`             |
//! | `β₀₁`         | `β_xȳ`               | `σ₁`            |
//! | `β₁₀`         | `β_x̄y`               | `σ₃`            |
//! | `β₁₁`         | `β_x̄ȳ`               | `σ₃σ₁`          |
//!
//! Signs `(−1)^x` on the kets are global phases and vanish at the level of
//! density operators, which is what every comparison here uses.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bell::{bell_ket, bell_projector, pauli, BellIndex, QubitLabel, Register};
use crate::entropy::{conditional, joint, shannon};
use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, EQ_TOLERANCE};

/// How a Bell projection picks its outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeSelector {
    /// Born-rule sampling with a `ChaCha8Rng` seeded from this value.
    Seeded(u64),
    /// Take this outcome (it must have non-zero probability).
    Forced(BellIndex),
}

impl OutcomeSelector {
    pub fn seed(self) -> Option<u64> {
        match self {
            OutcomeSelector::Seeded(s) => Some(s),
            OutcomeSelector::Forced(_) => None,
        }
    }
}

/// Result of projecting a qubit pair onto the Bell basis.
#[derive(Clone, Debug)]
pub struct ProjectionOutcome {
    pub index: BellIndex,
    pub probability: f64,
    /// Born probabilities of all four outcomes, ordered 00, 01, 10, 11.
    pub distribution: [f64; 4],
    pub seed: Option<u64>,
    /// Collapsed, renormalized register; the measured qubits are kept.
    pub post_state: Register,
    /// The register as it was before the projection.
    pub prior: Register,
}

/// Projects qubits `first`, `second` of `reg` onto the Bell basis.
pub fn bell_measure(reg: &Register, first: &str, second: &str, selector: OutcomeSelector) -> Result<ProjectionOutcome> {
    let mut distribution = [0.0; 4];
    let mut posts: Vec<Option<Register>> = Vec::with_capacity(4);
    for idx in BellIndex::all() {
        let (p, post) = reg.project_pair(first, second, &bell_ket(idx))?;
        distribution[idx.ordinal()] = p;
        posts.push(post);
    }
    let index = match selector {
        OutcomeSelector::Forced(idx) => idx,
        OutcomeSelector::Seeded(seed) => sample(&distribution, seed),
    };
    let post_state = posts[index.ordinal()].take().ok_or_else(|| {
        Error::Protocol(format!("outcome β{index} on {first}{second} has zero probability"))
    })?;
    log::debug!("bell measurement on {first}{second}: outcome {index}, p = {:.6}", distribution[index.ordinal()]);
    Ok(ProjectionOutcome {
        index,
        probability: distribution[index.ordinal()],
        distribution,
        seed: selector.seed(),
        post_state,
        prior: reg.clone(),
    })
}

fn sample(distribution: &[f64; 4], seed: u64) -> BellIndex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_possible = BellIndex::B00;
    for idx in BellIndex::all() {
        let p = distribution[idx.ordinal()];
        if p > 0.0 {
            last_possible = idx;
        }
        acc += p;
        if u < acc {
            return idx;
        }
    }
    // u landed in the rounding slack above the cumulative sum
    last_possible
}

/// Builds `|β₀₀⟩_{A,B} ⊗ |β_xy⟩_{C,D}` with ticks `A@n−1, B@n, C@n, D@n+1`.
pub fn prepare(input: BellIndex, n: i64) -> Register {
    let ab = Register::bell_pair(QubitLabel::new("A", n - 1), QubitLabel::new("B", n - 1), BellIndex::B00)
        .and_then(|r| r.delay("B", 1));
    let cd = Register::bell_pair(QubitLabel::new("C", n), QubitLabel::new("D", n), input);
    ab.and_then(|ab| cd.and_then(|cd| ab.merge(&cd)))
        .and_then(|r| r.delay("D", 1))
        .expect("fixed four-qubit construction is always valid")
}

/// Bell projection on `BC`.
pub fn project_bc(reg: &Register, selector: OutcomeSelector) -> Result<ProjectionOutcome> {
    bell_measure(reg, "B", "C", selector)
}

/// Bell index left on `AD` by outcome `outcome` for input `input`, before correction.
pub fn swapped_index(input: BellIndex, outcome: BellIndex) -> BellIndex {
    match (outcome.x(), outcome.y()) {
        (0, 0) => input,
        (0, _) => input.flip_y(),
        (_, 0) => input.flip_x(),
        _ => input.flip_x().flip_y(),
    }
}

/// Pauli correction applied to `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Correction {
    Identity,
    Sigma1,
    Sigma3,
    /// `σ₃σ₁`: `σ₁` first, then `σ₃`.
    Sigma3Sigma1,
}

impl Correction {
    pub fn matrix(self) -> ComplexMatrix {
        let p = |k| pauli(k).expect("valid Pauli selector");
        match self {
            Correction::Identity => ComplexMatrix::identity(2),
            Correction::Sigma1 => p(1),
            Correction::Sigma3 => p(3),
            Correction::Sigma3Sigma1 => &p(3) * &p(1),
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correction::Identity => "identity",
            Correction::Sigma1 => "σ₁ on D",
            Correction::Sigma3 => "σ₃ on D",
            Correction::Sigma3Sigma1 => "σ₃σ₁ on D",
        })
    }
}

/// Maps each projection outcome to the correction applied on `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorrectionTable([Correction; 4]);

impl CorrectionTable {
    /// Entries for outcomes 00, 01, 10, 11.
    pub fn new(entries: [Correction; 4]) -> Self {
        Self(entries)
    }

    pub fn standard() -> Self {
        Self([
            Correction::Identity,
            Correction::Sigma1,
            Correction::Sigma3,
            Correction::Sigma3Sigma1,
        ])
    }

    pub fn for_outcome(&self, outcome: BellIndex) -> Correction {
        self.0[outcome.ordinal()]
    }
}

impl Default for CorrectionTable {
    fn default() -> Self {
        Self::standard()
    }
}

/// Conditional and joint entropies around one inversion, in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyLedger {
    /// `S(C|D)` before projection (the input pair is entangled: −1).
    pub cond_cd_before: f64,
    /// `S(A|D)` before projection (A and D uncorrelated: +1).
    pub cond_ad_before: f64,
    /// `S(CD)` before projection.
    pub joint_cd_before: f64,
    /// `S(A|D)` after correction (−1).
    pub cond_ad_after: f64,
    /// `S(AD)` after correction (0).
    pub joint_ad_after: f64,
    /// `S(C|D)` after correction (+1).
    pub cond_cd_after: f64,
    /// `S(CD)` after correction (2).
    pub joint_cd_after: f64,
    /// Shannon entropy of the projection outcome distribution (2).
    pub outcome_shannon: f64,
}

/// A complete one-tick inversion.
#[derive(Clone, Debug)]
pub struct InversionRecord {
    pub input_index: BellIndex,
    pub outcome: BellIndex,
    pub probability: f64,
    pub seed: Option<u64>,
    pub correction: Correction,
    /// All four qubits after projection and correction.
    pub final_state: Register,
    pub ledger: EntropyLedger,
}

impl InversionRecord {
    pub fn final_ad(&self) -> Register {
        self.final_state
            .reduced(&["A", "D"])
            .expect("Turnstile registers always hold A and D")
    }

    /// `⟨β_in|ρ_AD|β_in⟩`.
    pub fn fidelity(&self) -> f64 {
        let ket = bell_ket(self.input_index);
        let rho = self.final_ad();
        let v = rho.state() * &ket;
        let f: Complex64 = ket.inner_product(&v);
        f.re
    }
}

/// Applies the standard correction for the measured outcome.
pub fn correct(outcome: &ProjectionOutcome, input: BellIndex) -> Result<InversionRecord> {
    correct_with(outcome, input, &CorrectionTable::standard())
}

/// Applies the correction prescribed by `table` and checks the result.
pub fn correct_with(outcome: &ProjectionOutcome, input: BellIndex, table: &CorrectionTable) -> Result<InversionRecord> {
    let swapped = outcome.post_state.reduced(&["A", "D"])?;
    let expected = swapped_index(input, outcome.index);
    if !swapped.state().approx_eq(&bell_projector(expected), EQ_TOLERANCE) {
        return Err(Error::Protocol(format!(
            "outcome β{} is not a projection of input β{input}",
            outcome.index
        )));
    }
    let correction = table.for_outcome(outcome.index);
    let final_state = outcome.post_state.apply_on("D", &correction.matrix())?;
    let ad = final_state.reduced(&["A", "D"])?;
    if !ad.state().approx_eq(&bell_projector(input), EQ_TOLERANCE) {
        return Err(Error::Protocol(format!(
            "correction {correction} after outcome β{} does not restore β{input} on AD",
            outcome.index
        )));
    }
    let prior = &outcome.prior;
    let ledger = EntropyLedger {
        cond_cd_before: conditional(prior, &["C"], &["D"])?,
        cond_ad_before: conditional(prior, &["A"], &["D"])?,
        joint_cd_before: joint(prior, &["C", "D"])?,
        cond_ad_after: conditional(&final_state, &["A"], &["D"])?,
        joint_ad_after: joint(&final_state, &["A", "D"])?,
        cond_cd_after: conditional(&final_state, &["C"], &["D"])?,
        joint_cd_after: joint(&final_state, &["C", "D"])?,
        outcome_shannon: shannon(&outcome.distribution)?,
    };
    Ok(InversionRecord {
        input_index: input,
        outcome: outcome.index,
        probability: outcome.probability,
        seed: outcome.seed,
        correction,
        final_state,
        ledger,
    })
}

/// Prepare, project and correct in one go.
pub fn invert(input: BellIndex, n: i64, selector: OutcomeSelector) -> Result<InversionRecord> {
    let outcome = project_bc(&prepare(input, n), selector)?;
    correct(&outcome, input)
}

/// Largest elementwise gap between `|β₀₀⟩_{AB}|β_xy⟩_{CD}` and the
/// four-term Bell-basis expansion over `AD ⊗ BC`, both written out as
/// 16-component vectors in the `|a b c d⟩` basis.
pub fn decomposition_residual(input: BellIndex) -> f64 {
    let amp = |idx: BellIndex, hi: usize, lo: usize| bell_ket(idx).get(2 * hi + lo, 0).re;
    let sign_x = if input.x() == 0 { 1.0 } else { -1.0 };
    let terms = [
        (1.0, input, BellIndex::B00),
        (1.0, input.flip_x(), BellIndex::B10),
        (sign_x, input.flip_y(), BellIndex::B01),
        (sign_x, input.flip_x().flip_y(), BellIndex::B11),
    ];
    let mut worst: f64 = 0.0;
    for i in 0..16usize {
        let (a, b, cq, d) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        let lhs = amp(BellIndex::B00, a, b) * amp(input, cq, d);
        let rhs: f64 = 0.5
            * terms
                .iter()
                .map(|&(s, ad, bc)| s * amp(ad, a, d) * amp(bc, b, cq))
                .sum::<f64>();
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

pub fn verify_decomposition(input: BellIndex) -> bool {
    decomposition_residual(input) < 1e-12
}
