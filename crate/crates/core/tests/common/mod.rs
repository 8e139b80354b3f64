#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use turnstile_core::bell::{bell_ket, BellIndex, QubitLabel, Register};
use turnstile_core::entropy::{cmi, conditional, joint, shannon, von_neumann};
use turnstile_core::qmath::{partial_trace, reduced_from_ket, tensor, validate_density, ComplexMatrix};
use turnstile_core::turnstile::{bell_measure, OutcomeSelector};

pub const TOL: f64 = 1e-9;

pub fn complex_entries(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

pub fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_entries(rows * cols).prop_map(move |e| ComplexMatrix::from_row_major(rows, cols, e).unwrap())
}

fn normalize_density(g: &ComplexMatrix) -> ComplexMatrix {
    let rho = g * &g.adjoint();
    let tr = rho.trace().re;
    if tr < 1e-9 {
        ComplexMatrix::identity(g.rows()).scale_real(1.0 / g.rows() as f64)
    } else {
        // exact Hermitian symmetrization after scaling
        let rho = rho.scale_real(1.0 / tr);
        (&rho + &rho.adjoint()).scale_real(0.5)
    }
}

/// `G G† / Tr(G G†)` with `G` of the given dimension and rank.
pub fn density(dim: usize, rank: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_matrix(dim, rank).prop_map(|g| normalize_density(&g))
}

/// Full- or reduced-rank density operator of dimension `dim`.
pub fn any_density(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=dim).prop_flat_map(move |rank| density(dim, rank))
}

pub fn unitary(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_matrix(dim, dim).prop_map(|m| {
        let q = m.into_inner().qr().q();
        ComplexMatrix::from_inner(q)
    })
}

pub fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_matrix(dim, dim).prop_map(|m| (&m + &m.adjoint()).scale_real(0.5))
}

pub fn pure_ket(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_entries(dim).prop_map(|v| {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-9 {
            ComplexMatrix::basis_ket(v.len(), 0)
        } else {
            ComplexMatrix::ket(&v.iter().map(|z| z / norm).collect::<Vec<_>>())
        }
    })
}

pub fn bell_index() -> impl Strategy<Value = BellIndex> {
    (0u8..2, 0u8..2).prop_map(|(x, y)| BellIndex::new(x, y).unwrap())
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn ok<T>(r: turnstile_core::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

fn density_ok(rho: &ComplexMatrix) -> Result<(), TestCaseError> {
    ok(validate_density(rho))
}

/// A short random history of register operations.
#[derive(Clone, Debug)]
pub struct RegisterScript {
    pub first: BellIndex,
    pub second: Option<BellIndex>,
    pub u: ComplexMatrix,
    pub target: usize,
    pub delay: u32,
    pub outcome_seed: u64,
    pub keep_mask: u8,
}

pub fn register_script() -> impl Strategy<Value = RegisterScript> {
    (
        bell_index(),
        prop::option::of(bell_index()),
        unitary(2),
        0usize..4,
        1u32..4,
        any::<u64>(),
        1u8..16,
    )
        .prop_map(|(first, second, u, target, delay, outcome_seed, keep_mask)| RegisterScript {
            first,
            second,
            u,
            target,
            delay,
            outcome_seed,
            keep_mask,
        })
}

/// Every register produced along the script is a valid density operator,
/// and delays leave the state untouched bit for bit.
pub fn prop_register_density(s: &RegisterScript) -> Result<(), TestCaseError> {
    let l = |name: &str| QubitLabel::new(name, 0);
    let mut reg = ok(Register::bell_pair(l("A"), l("B"), s.first))?;
    density_ok(reg.state())?;
    if let Some(idx) = s.second {
        reg = ok(reg.merge(&ok(Register::bell_pair(l("C"), l("D"), idx))?))?;
        density_ok(reg.state())?;
    }
    let names: Vec<String> = reg.subsystems().iter().map(|s| s.to_string()).collect();
    let target = &names[s.target % names.len()];
    reg = ok(reg.apply_on(target, &s.u))?;
    density_ok(reg.state())?;

    let delayed = ok(reg.delay(target, s.delay))?;
    check(delayed.state() == reg.state(), || "delay changed the state".into())?;

    if names.len() == 4 {
        let post = ok(bell_measure(&reg, "B", "C", OutcomeSelector::Seeded(s.outcome_seed)))?;
        density_ok(post.post_state.state())?;
        reg = post.post_state;
    }
    let keep: Vec<&str> = names
        .iter()
        .enumerate()
        .filter(|(i, _)| s.keep_mask & (1 << i) != 0)
        .map(|(_, n)| n.as_str())
        .collect();
    if !keep.is_empty() {
        density_ok(ok(reg.reduced(&keep))?.state())?;
    }
    Ok(())
}

pub fn prop_unitary_invariance(rho: &ComplexMatrix, u: &ComplexMatrix) -> Result<(), TestCaseError> {
    let rotated = &(u * rho) * &u.adjoint();
    let rotated = (&rotated + &rotated.adjoint()).scale_real(0.5);
    let a = ok(von_neumann(rho))?;
    let b = ok(von_neumann(&rotated))?;
    check((a - b).abs() < TOL, || format!("S(ρ) = {a}, S(UρU†) = {b}"))
}

/// `S(A) = S(B)` for a pure state on `dims[0] ⊗ dims[1]`.
pub fn prop_schmidt_symmetry(psi: &ComplexMatrix, dims: [usize; 2]) -> Result<(), TestCaseError> {
    let a = ok(von_neumann(&ok(reduced_from_ket(psi, &dims, &[0]))?))?;
    let b = ok(von_neumann(&ok(reduced_from_ket(psi, &dims, &[1]))?))?;
    check((a - b).abs() < TOL, || format!("S(A) = {a}, S(B) = {b}"))
}

/// Strong subadditivity on a random three-qubit state, in every role assignment.
pub fn prop_cmi_nonnegative(rho: &ComplexMatrix) -> Result<(), TestCaseError> {
    let labels = vec![QubitLabel::new("X", 0), QubitLabel::new("Y", 0), QubitLabel::new("Z", 0)];
    let reg = ok(Register::new(labels, rho.clone()))?;
    for (a, b, c) in [("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")] {
        let v = ok(cmi(&reg, &[a], &[b], &[c]))?;
        check(v >= -TOL, || format!("I({a};{b}|{c}) = {v}"))?;
    }
    Ok(())
}

/// Either a locally rotated Bell state or a product of random kets.
#[derive(Clone, Debug)]
pub enum TwoQubitPure {
    Bell(BellIndex, ComplexMatrix, ComplexMatrix),
    Product(ComplexMatrix, ComplexMatrix),
}

pub fn two_qubit_pure() -> impl Strategy<Value = TwoQubitPure> {
    prop_oneof![
        (bell_index(), unitary(2), unitary(2)).prop_map(|(i, u, v)| TwoQubitPure::Bell(i, u, v)),
        (pure_ket(2), pure_ket(2)).prop_map(|(a, b)| TwoQubitPure::Product(a, b)),
    ]
}

/// `S(A|B) = −1` for every (locally rotated) Bell state and `≥ 0` for products.
pub fn prop_bell_conditional(s: &TwoQubitPure) -> Result<(), TestCaseError> {
    let (ket, entangled) = match s {
        TwoQubitPure::Bell(idx, u, v) => (&tensor(u, v) * &bell_ket(*idx), true),
        TwoQubitPure::Product(a, b) => (tensor(a, b), false),
    };
    let labels = vec![QubitLabel::new("A", 0), QubitLabel::new("B", 0)];
    let reg = ok(Register::from_ket(labels, &ket))?;
    let h = ok(conditional(&reg, &["A"], &["B"]))?;
    if entangled {
        check((h + 1.0).abs() < TOL, || format!("Bell state with S(A|B) = {h}"))
    } else {
        check(h > -TOL, || format!("product state with S(A|B) = {h}"))?;
        check(ok(joint(&reg, &["A", "B"]))? < TOL, || "product ket is not pure".into())
    }
}

pub fn prop_shannon_bounds(weights: &[f64]) -> Result<(), TestCaseError> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Ok(());
    }
    let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let h = ok(shannon(&p))?;
    let max = (p.len() as f64).log2();
    check(h >= 0.0 && h <= max + TOL, || format!("H = {h} outside [0, {max}]"))
}

pub fn prop_partial_trace_preserves_trace(rho: &ComplexMatrix, n_qubits: usize, keep_mask: u8) -> Result<(), TestCaseError> {
    let dims = vec![2; n_qubits];
    let keep: Vec<usize> = (0..n_qubits).filter(|i| keep_mask & (1 << i) != 0).collect();
    let reduced = ok(partial_trace(rho, &dims, &keep))?;
    let d = (reduced.trace() - rho.trace()).norm();
    check(d < TOL, || format!("trace changed by {d}"))
}
