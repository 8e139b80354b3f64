//! Discrete-tick network simulation: classical flows watched by a Shannon
//! entropy detector, a quantum repeater watched by the conditional-entropy
//! detector, and black-hole mitigation of attack qubits.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bell::{bell_ket, bell_projector, BellIndex, Register};
use crate::config::ScenarioConfig;
use crate::entropy::{shannon, von_neumann};
use crate::error::{Error, Result};
use crate::qmath::{reduced_from_ket, tensor_all, EQ_TOLERANCE, MAX_QUBITS};
use crate::turnstile::{bell_measure, OutcomeSelector, ProjectionOutcome};

/// Packets seen for one flow during one tick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowRecord {
    pub upstream: String,
    pub destination: String,
    pub tick: u64,
    pub packets: u64,
}

impl FlowRecord {
    pub fn new(upstream: impl Into<String>, destination: impl Into<String>, tick: u64, packets: u64) -> Self {
        Self {
            upstream: upstream.into(),
            destination: destination.into(),
            tick,
            packets,
        }
    }
}

/// Share of each `(upstream, destination)` flow in the window. Records with
/// the same key are summed.
pub fn flow_probabilities(records: &[FlowRecord]) -> Result<BTreeMap<(String, String), f64>> {
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for r in records {
        *counts.entry((r.upstream.clone(), r.destination.clone())).or_default() += r.packets;
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptyWindow);
    }
    Ok(counts
        .into_iter()
        .map(|(k, n)| (k, n as f64 / total as f64))
        .collect())
}

/// Shannon entropy of the flow distribution, in bits.
pub fn router_entropy(records: &[FlowRecord]) -> Result<f64> {
    let p: Vec<f64> = flow_probabilities(records)?.into_values().collect();
    shannon(&p)
}

/// Indices `t + 1` where `H(t) − H(t+1) ≥ drop_threshold`.
pub fn classical_detect(history: &[f64], drop_threshold: f64) -> Result<Vec<usize>> {
    if drop_threshold.is_nan() || drop_threshold <= 0.0 {
        return Err(Error::Argument(format!("drop threshold {drop_threshold} must be > 0")));
    }
    Ok(history
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] - w[1] >= drop_threshold)
        .map(|(t, _)| t + 1)
        .collect())
}

/// Latched form of [`classical_detect`] for a running series: once raised,
/// the alarm stays up until the entropy climbs back within the threshold of
/// the last quiet reading.
#[derive(Clone, Debug)]
pub struct ClassicalDetector {
    threshold: f64,
    reference: Option<f64>,
}

impl ClassicalDetector {
    pub fn new(threshold: f64) -> Self {
        Self { threshold, reference: None }
    }

    pub fn observe(&mut self, h: f64) -> bool {
        match self.reference {
            Some(r) if r - h >= self.threshold => true,
            _ => {
                self.reference = Some(h);
                false
            }
        }
    }
}

/// Repeater capacity bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepeaterState {
    pub capacity: u64,
    pub pool: u64,
    pub pending_requests: u64,
}

impl RepeaterState {
    pub fn new(capacity: u64) -> Self {
        Self { capacity, pool: capacity, pending_requests: 0 }
    }

    /// Unused pairs are destroyed and the pool is refilled.
    pub fn regenerate(&mut self) {
        self.pool = self.capacity;
        self.pending_requests = 0;
    }
}

/// Result of serving one tick's requests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumTick {
    /// `S(BC|D)` summed over all sessions, in bits: `R − N`.
    pub detector: f64,
    pub fulfilled: u64,
    pub dropped: u64,
    pub pool_after: u64,
}

/// Serves `requests` from the pool under the count model.
pub fn quantum_tick(state: &mut RepeaterState, requests: u64) -> QuantumTick {
    state.pending_requests = requests;
    let fulfilled = requests.min(state.pool);
    state.pool -= fulfilled;
    QuantumTick {
        detector: requests as f64 - state.capacity as f64,
        fulfilled,
        dropped: requests - fulfilled,
        pool_after: state.pool,
    }
}

/// `S(all B, C | all D)` from the explicit multi-session state.
///
/// Matched sessions are `|β₀₀⟩_AB ⊗ |β₀₀⟩_CD`, excess requests are
/// `|β₀₀⟩_AB` with no partner and unused capacity is an intact
/// `|β₀₀⟩_CD`. The requesters' `A` qubits are traced out.
pub fn quantum_detector_dm(capacity: u64, requests: u64) -> Result<f64> {
    let matched = capacity.min(requests) as usize;
    let excess = requests.saturating_sub(capacity) as usize;
    let unused = capacity.saturating_sub(requests) as usize;
    let qubits = 4 * matched + 2 * (excess + unused);
    if qubits > MAX_QUBITS {
        return Err(Error::Size { qubits, max: MAX_QUBITS });
    }
    if qubits == 0 {
        return Ok(0.0);
    }

    // qubit positions are laid out pair by pair: (A, B) or (C, D)
    let pairs = 2 * matched + excess + unused;
    let mut bc = Vec::new();
    let mut d = Vec::new();
    let mut pos = 0;
    for _ in 0..matched {
        bc.extend([pos + 1, pos + 2]);
        d.push(pos + 3);
        pos += 4;
    }
    for _ in 0..excess {
        bc.push(pos + 1);
        pos += 2;
    }
    for _ in 0..unused {
        bc.push(pos);
        d.push(pos + 1);
        pos += 2;
    }
    let ket = tensor_all(std::iter::repeat_n(&bell_ket(BellIndex::B00), pairs).collect::<Vec<_>>());
    let dims = vec![2; qubits];
    let mut bcd: Vec<usize> = bc.iter().chain(d.iter()).copied().collect();
    bcd.sort_unstable();
    let s_bcd = von_neumann(&reduced_from_ket(&ket, &dims, &bcd)?)?;
    let s_d = if d.is_empty() { 0.0 } else { von_neumann(&reduced_from_ket(&ket, &dims, &d)?)? };
    Ok(s_bcd - s_d)
}

/// Outcome of black-holing two attack pairs against each other.
#[derive(Clone, Debug)]
pub struct Mitigation {
    pub projection: ProjectionOutcome,
    /// The two requester-side qubits, left in the Bell state matching the outcome.
    pub requester_pair: Register,
    /// Change in the repeater's pool: always zero.
    pub pool_delta: i64,
}

/// Projects the repeater-side halves of two `|β₀₀⟩` attack pairs onto the
/// Bell basis. Each register holds `(requester, repeater)` qubits in that order.
pub fn blackhole_mitigate(first: &Register, second: &Register, selector: OutcomeSelector) -> Result<Mitigation> {
    for (which, r) in [("first", first), ("second", second)] {
        if r.n_qubits() != 2 || !r.state().approx_eq(&bell_projector(BellIndex::B00), EQ_TOLERANCE) {
            return Err(Error::Protocol(format!("{which} attack register is not a |β00⟩ pair")));
        }
    }
    let names = |r: &Register| (r.labels()[0].subsystem.clone(), r.labels()[1].subsystem.clone());
    let (a1, b1) = names(first);
    let (a2, b2) = names(second);
    let merged = first
        .merge(second)
        .map_err(|e| Error::Protocol(format!("attack registers cannot be combined: {e}")))?;
    let projection = bell_measure(&merged, &b1, &b2, selector)?;
    let requester_pair = projection.post_state.reduced(&[&a1, &a2])?;
    if !requester_pair
        .state()
        .approx_eq(&bell_projector(projection.index), EQ_TOLERANCE)
    {
        return Err(Error::Protocol(format!(
            "requester pair is not left in β{} after black-holing",
            projection.index
        )));
    }
    Ok(Mitigation { projection, requester_pair, pool_delta: 0 })
}

/// Largest elementwise gap in
/// `|β₀₀⟩_{A1B1}|β₀₀⟩_{A2B2} = ½ Σ_k |β_k⟩_{A1A2}|β_k⟩_{B1B2}`,
/// written out in the `|a1 b1 a2 b2⟩` basis.
pub fn blackhole_identity_residual() -> f64 {
    let amp = |idx: BellIndex, hi: usize, lo: usize| bell_ket(idx).get(2 * hi + lo, 0).re;
    let mut worst: f64 = 0.0;
    for i in 0..16usize {
        let (a1, b1, a2, b2) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        let lhs = amp(BellIndex::B00, a1, b1) * amp(BellIndex::B00, a2, b2);
        let rhs: f64 = 0.5
            * BellIndex::all()
                .into_iter()
                .map(|k| amp(k, a1, a2) * amp(k, b1, b2))
                .sum::<f64>();
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// One tick of generated input.
#[derive(Clone, Debug, PartialEq)]
pub struct TrafficTick {
    pub tick: u64,
    pub flows: Vec<FlowRecord>,
    /// Session requests reaching the repeater.
    pub requests: u64,
    /// The legitimate part of `requests`.
    pub legit_requests: u64,
    pub under_attack: bool,
}

/// Deterministic traffic for `cfg` with its own seed.
pub fn generate_traffic(cfg: &ScenarioConfig) -> Result<Vec<TrafficTick>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let a = &cfg.attack;
    let mut out = Vec::with_capacity(cfg.ticks as usize);
    for tick in 0..cfg.ticks {
        let under_attack = (a.start_tick..=a.end_tick).contains(&tick);
        let flows = cfg
            .baseline_flows
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let wobble = if cfg.jitter > 0.0 { rng.random_range(-cfg.jitter..=cfg.jitter) } else { 0.0 };
                let mut packets = (f.mean_packets as f64 * (1.0 + wobble)).round();
                if under_attack && i == a.target_flow {
                    packets = (packets * a.factor).round();
                }
                FlowRecord::new(&f.upstream, &f.destination, tick, packets as u64)
            })
            .collect();
        let (requests, legit_requests) = if under_attack {
            (a.attack_requests, cfg.baseline_requests.min(a.attack_requests))
        } else {
            (cfg.baseline_requests, cfg.baseline_requests)
        };
        out.push(TrafficTick { tick, flows, requests, legit_requests, under_attack });
    }
    Ok(out)
}

/// Detector readings and session accounting for one tick.
#[derive(Clone, Debug, PartialEq)]
pub struct TickReport {
    pub tick: u64,
    pub classical_entropy: f64,
    pub quantum_detector: f64,
    pub classical_alarm: bool,
    pub quantum_alarm: bool,
    pub mitigated: bool,
    pub fulfilled_sessions: u64,
    pub dropped: u64,
    pub requests: u64,
    pub legit_requests: u64,
    /// Attack qubit left without a partner for black-holing.
    pub unpaired_attack: u64,
    pub pool_delta: i64,
}

impl TickReport {
    pub const CSV_HEADER: &'static str =
        "tick,classical_entropy_bits,quantum_detector_bits,classical_alarm,quantum_alarm,mitigated,fulfilled,dropped";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{},{},{},{},{}",
            self.tick,
            self.classical_entropy,
            self.quantum_detector,
            self.classical_alarm,
            self.quantum_alarm,
            self.mitigated,
            self.fulfilled_sessions,
            self.dropped
        )
    }
}

/// Header plus one `\n`-terminated row per tick.
pub fn to_csv(reports: &[TickReport]) -> String {
    let mut s = String::from(TickReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Runs the scenario tick by tick.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Vec<TickReport>> {
    let traffic = generate_traffic(cfg)?;
    let mut classical = ClassicalDetector::new(cfg.thresholds.classical_drop_bits);
    let mut repeater = RepeaterState::new(cfg.capacity);
    // independent stream for black-hole projection outcomes
    let mut outcomes = ChaCha8Rng::seed_from_u64(cfg.seed.rotate_left(32) ^ 0x5eed);
    let mut reports = Vec::with_capacity(traffic.len());

    for t in &traffic {
        repeater.regenerate();
        let h = router_entropy(&t.flows)?;
        let classical_alarm = classical.observe(h);
        let detector = t.requests as f64 - cfg.capacity as f64;
        let quantum_alarm = detector > cfg.thresholds.quantum;

        let attack_qubits = t.requests - t.legit_requests;
        let mitigate = cfg.mitigation && quantum_alarm && attack_qubits > 0;
        let (served, mitigated, unpaired, pool_delta) = if mitigate {
            let pool_before = repeater.pool as i64;
            let mut delta = 0;
            for _ in 0..attack_qubits / 2 {
                let first = attack_pair(1)?;
                let second = attack_pair(2)?;
                delta += blackhole_mitigate(&first, &second, OutcomeSelector::Seeded(outcomes.random()))?.pool_delta;
            }
            debug_assert_eq!(repeater.pool as i64, pool_before + delta);
            (quantum_tick(&mut repeater, t.legit_requests), true, attack_qubits % 2, delta)
        } else {
            (quantum_tick(&mut repeater, t.requests), false, 0, 0)
        };

        if classical_alarm || quantum_alarm {
            log::info!(
                "tick {}: H = {h:.3} bits, detector = {detector:+}, classical alarm {classical_alarm}, quantum alarm {quantum_alarm}",
                t.tick
            );
        }
        reports.push(TickReport {
            tick: t.tick,
            classical_entropy: h,
            quantum_detector: detector,
            classical_alarm,
            quantum_alarm,
            mitigated,
            fulfilled_sessions: served.fulfilled,
            dropped: t.requests - served.fulfilled,
            requests: t.requests,
            legit_requests: t.legit_requests,
            unpaired_attack: unpaired,
            pool_delta,
        });
    }
    Ok(reports)
}

fn attack_pair(k: usize) -> Result<Register> {
    use crate::bell::QubitLabel;
    Register::bell_pair(QubitLabel::new(format!("A{k}"), 0), QubitLabel::new(format!("B{k}"), 1), BellIndex::B00)
}
