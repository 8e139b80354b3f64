//! Labeled qubit registers with time tags, Bell states and Pauli operators.
//!
//! A [`Register`] pairs an ordered list of [`QubitLabel`]s with a density
//! operator whose tensor factors follow that order. Time is a pure label:
//! [`Register::delay`] models a lossless delay line by bumping a tick and
//! leaving the state untouched.

use std::fmt;
use std::str::FromStr;

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::qmath::{
    c, embed_operator, partial_trace, permute_factors, re, tensor, validate_density, ComplexMatrix,
    EQ_TOLERANCE, MAX_QUBITS,
};

/// One tensor factor: a subsystem name plus the tick (in units of τ) at
/// which it lives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitLabel {
    pub subsystem: String,
    pub tick: i64,
}

impl QubitLabel {
    pub fn new(subsystem: impl Into<String>, tick: i64) -> Self {
        Self {
            subsystem: subsystem.into(),
            tick,
        }
    }
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.subsystem, self.tick)
    }
}

/// Selects `|β_xy⟩ = (|0 y⟩ + (−1)^x |1 ȳ⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellIndex {
    x: u8,
    y: u8,
}

impl BellIndex {
    pub const B00: BellIndex = BellIndex { x: 0, y: 0 };
    pub const B01: BellIndex = BellIndex { x: 0, y: 1 };
    pub const B10: BellIndex = BellIndex { x: 1, y: 0 };
    pub const B11: BellIndex = BellIndex { x: 1, y: 1 };

    pub fn new(x: u8, y: u8) -> Result<Self> {
        if x > 1 || y > 1 {
            return Err(Error::Argument(format!("Bell index bits must be 0 or 1, got ({x}, {y})")));
        }
        Ok(Self { x, y })
    }

    /// The four indices in the order 00, 01, 10, 11.
    pub fn all() -> [BellIndex; 4] {
        [Self::B00, Self::B01, Self::B10, Self::B11]
    }

    pub fn x(self) -> u8 {
        self.x
    }

    pub fn y(self) -> u8 {
        self.y
    }

    /// `(x̄, y)`
    pub fn flip_x(self) -> Self {
        Self { x: 1 - self.x, y: self.y }
    }

    /// `(x, ȳ)`
    pub fn flip_y(self) -> Self {
        Self { x: self.x, y: 1 - self.y }
    }

    /// Position `2x + y` in [`BellIndex::all`].
    pub fn ordinal(self) -> usize {
        usize::from(2 * self.x + self.y)
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.x, self.y)
    }
}

impl FromStr for BellIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Argument(format!("invalid bit {other:?} in Bell index {s:?}"))),
            })
            .collect::<Result<_>>()?;
        match bits.as_slice() {
            [x, y] => BellIndex::new(*x, *y),
            _ => Err(Error::Argument(format!("Bell index needs two bits, got {s:?}"))),
        }
    }
}

/// `|β_xy⟩` as a 4-component ket in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn bell_ket(idx: BellIndex) -> ComplexMatrix {
    let y = f64::from(idx.y);
    let y_bar = 1.0 - y;
    let sign = if idx.x == 0 { 1.0 } else { -1.0 };
    ComplexMatrix::real_ket(&[
        y_bar * FRAC_1_SQRT_2,
        y * FRAC_1_SQRT_2,
        sign * y * FRAC_1_SQRT_2,
        sign * y_bar * FRAC_1_SQRT_2,
    ])
}

/// `|β_xy⟩⟨β_xy|`
pub fn bell_projector(idx: BellIndex) -> ComplexMatrix {
    ComplexMatrix::projector(&bell_ket(idx))
}

/// Pauli matrices `σ₁`, `σ₂`, `σ₃`.
pub fn pauli(which: u8) -> Result<ComplexMatrix> {
    let zero = re(0.0);
    let entries = match which {
        1 => vec![zero, re(1.0), re(1.0), zero],
        2 => vec![zero, c(0.0, -1.0), c(0.0, 1.0), zero],
        3 => vec![re(1.0), zero, zero, re(-1.0)],
        other => return Err(Error::Argument(format!("no Pauli operator σ{other}"))),
    };
    ComplexMatrix::from_row_major(2, 2, entries)
}

/// A labeled multi-qubit density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Register {
    labels: Vec<QubitLabel>,
    state: ComplexMatrix,
}

impl Register {
    /// The zero-qubit register (state `[1]`).
    pub fn empty() -> Self {
        Self {
            labels: Vec::new(),
            state: ComplexMatrix::identity(1),
        }
    }

    /// Validates labels and density-operator invariants.
    pub fn new(labels: Vec<QubitLabel>, state: ComplexMatrix) -> Result<Self> {
        check_labels(&labels)?;
        if labels.len() > MAX_QUBITS {
            return Err(Error::Size {
                qubits: labels.len(),
                max: MAX_QUBITS,
            });
        }
        let dim = 1usize << labels.len();
        if state.rows() != dim || state.cols() != dim {
            return Err(Error::Dimension(format!(
                "{} labels need a {dim}x{dim} state, got {}x{}",
                labels.len(),
                state.rows(),
                state.cols()
            )));
        }
        validate_density(&state)?;
        Ok(Self { labels, state })
    }

    /// Pure state `|ψ⟩⟨ψ|`; `ψ` must be normalized.
    pub fn from_ket(labels: Vec<QubitLabel>, ket: &ComplexMatrix) -> Result<Self> {
        Self::new(labels, ComplexMatrix::projector(ket))
    }

    /// `|β_idx⟩` on two fresh qubits.
    pub fn bell_pair(first: QubitLabel, second: QubitLabel, idx: BellIndex) -> Result<Self> {
        Self::from_ket(vec![first, second], &bell_ket(idx))
    }

    /// Skips validation; callers guarantee the invariants hold.
    pub(crate) fn from_parts(labels: Vec<QubitLabel>, state: ComplexMatrix) -> Self {
        debug_assert_eq!(state.rows(), 1 << labels.len());
        Self { labels, state }
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn state(&self) -> &ComplexMatrix {
        &self.state
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn subsystems(&self) -> Vec<&str> {
        self.labels.iter().map(|l| l.subsystem.as_str()).collect()
    }

    /// Tensor position of the named subsystem.
    pub fn position(&self, subsystem: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l.subsystem == subsystem)
            .ok_or_else(|| Error::Label(format!("no qubit {subsystem:?} in register {}", self.describe())))
    }

    pub fn label(&self, subsystem: &str) -> Result<&QubitLabel> {
        Ok(&self.labels[self.position(subsystem)?])
    }

    /// `A@-1,B@0,...`
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self.labels.iter().map(ToString::to_string).collect();
        format!("[{}]", parts.join(","))
    }

    /// Applies a single-qubit unitary to the named qubit.
    pub fn apply_on(&self, target: &str, u: &ComplexMatrix) -> Result<Register> {
        let pos = self.position(target)?;
        if u.rows() != 2 || !u.is_square() {
            return Err(Error::Dimension(format!("expected a 2x2 unitary, got {}x{}", u.rows(), u.cols())));
        }
        let defect = u.unitarity_defect();
        if defect > EQ_TOLERANCE {
            return Err(Error::Unitarity(defect));
        }
        let full = embed_operator(u, &[pos], self.n_qubits())?;
        let state = &(&full * &self.state) * &full.adjoint();
        Ok(Self::from_parts(self.labels.clone(), state))
    }

    /// Moves the named qubit `ticks` steps later through a lossless delay line.
    pub fn delay(&self, target: &str, ticks: u32) -> Result<Register> {
        if ticks == 0 {
            return Err(Error::Argument("delay must be at least one tick".into()));
        }
        let pos = self.position(target)?;
        let mut labels = self.labels.clone();
        labels[pos].tick += i64::from(ticks);
        Ok(Self::from_parts(labels, self.state.clone()))
    }

    /// `self ⊗ other`; labels are `self`'s followed by `other`'s.
    pub fn merge(&self, other: &Register) -> Result<Register> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        check_labels(&labels)?;
        if labels.len() > MAX_QUBITS {
            return Err(Error::Size {
                qubits: labels.len(),
                max: MAX_QUBITS,
            });
        }
        Ok(Self::from_parts(labels, tensor(&self.state, &other.state)))
    }

    /// Same state with tensor factors listed in `order` (subsystem names,
    /// all of them exactly once).
    pub fn reorder(&self, order: &[&str]) -> Result<Register> {
        if order.len() != self.n_qubits() {
            return Err(Error::Label(format!(
                "reorder needs all {} subsystems, got {order:?}",
                self.n_qubits()
            )));
        }
        let positions = self.positions(order)?;
        let dims = vec![2; self.n_qubits()];
        let state = permute_factors(&self.state, &dims, &positions)?;
        let labels = positions.iter().map(|&p| self.labels[p].clone()).collect();
        Ok(Self::from_parts(labels, state))
    }

    /// Reduced state on the named subsystems, factors in the order given.
    pub fn reduced(&self, subsystems: &[&str]) -> Result<Register> {
        let positions = self.positions(subsystems)?;
        let dims = vec![2; self.n_qubits()];
        let traced = partial_trace(&self.state, &dims, &positions)?;
        // partial_trace keeps original relative order; restore the requested one
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        let order: Vec<usize> = positions
            .iter()
            .map(|p| sorted.iter().position(|s| s == p).expect("position present"))
            .collect();
        let state = permute_factors(&traced, &vec![2; positions.len()], &order)?;
        let labels = positions.iter().map(|&p| self.labels[p].clone()).collect();
        Ok(Self::from_parts(labels, state))
    }

    /// Projects the ordered qubit pair onto `ket` (4-dimensional). Returns
    /// the Born probability and, when it is non-zero, the renormalized
    /// post-measurement register. Measured qubits stay in the register.
    pub fn project_pair(&self, first: &str, second: &str, ket: &ComplexMatrix) -> Result<(f64, Option<Register>)> {
        let targets = [self.position(first)?, self.position(second)?];
        if targets[0] == targets[1] {
            return Err(Error::Label(format!("cannot project {first:?} against itself")));
        }
        let projector = embed_operator(&ComplexMatrix::projector(ket), &targets, self.n_qubits())?;
        let unnormalized = &(&projector * &self.state) * &projector;
        let p = unnormalized.trace().re;
        if p <= crate::qmath::SUPPORT_CUTOFF {
            return Ok((p.max(0.0), None));
        }
        let state = unnormalized.scale_real(1.0 / p);
        Ok((p, Some(Self::from_parts(self.labels.clone(), state))))
    }

    fn positions(&self, subsystems: &[&str]) -> Result<Vec<usize>> {
        let positions = subsystems
            .iter()
            .map(|s| self.position(s))
            .collect::<Result<Vec<_>>>()?;
        let mut uniq = positions.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != positions.len() {
            return Err(Error::Label(format!("repeated subsystem in {subsystems:?}")));
        }
        Ok(positions)
    }
}

fn check_labels(labels: &[QubitLabel]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].iter().any(|m| m.subsystem == l.subsystem) {
            return Err(Error::Label(format!("subsystem {:?} appears twice", l.subsystem)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = FRAC_1_SQRT_2;

    fn amps(idx: BellIndex) -> Vec<f64> {
        bell_ket(idx).row_major().iter().map(|z| z.re).collect()
    }

    #[test]
    fn bell_amplitudes() {
        assert_eq!(amps(BellIndex::B00), vec![S, 0.0, 0.0, S]);
        assert_eq!(amps(BellIndex::B11), vec![0.0, S, -S, 0.0]);
        assert_eq!(amps(BellIndex::B01), vec![0.0, S, S, 0.0]);
        assert_eq!(amps(BellIndex::B10), vec![S, 0.0, 0.0, -S]);
    }

    #[test]
    fn bell_basis_orthonormal() {
        for a in BellIndex::all() {
            for b in BellIndex::all() {
                let ip = bell_ket(a).inner_product(&bell_ket(b));
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - re(want)).norm() < 1e-15, "{a} {b}");
            }
        }
    }

    #[test]
    fn bell_index_parsing() {
        assert_eq!("10".parse::<BellIndex>().unwrap(), BellIndex::B10);
        assert!("2".parse::<BellIndex>().is_err());
        assert!("012".parse::<BellIndex>().is_err());
        assert!(BellIndex::new(2, 0).is_err());
        assert_eq!(BellIndex::B01.flip_x(), BellIndex::B11);
        assert_eq!(BellIndex::B01.flip_y(), BellIndex::B00);
    }

    #[test]
    fn pauli_definitions() {
        let s1 = pauli(1).unwrap();
        assert!(s1.approx_eq(&ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), 0.0));
        let s3 = pauli(3).unwrap();
        assert!(s3.approx_eq(&ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]), 0.0));
        for k in 1..=3 {
            let s = pauli(k).unwrap();
            assert!(s.is_unitary(1e-15) && s.is_hermitian(0.0));
            assert!((&s * &s).approx_eq(&ComplexMatrix::identity(2), 0.0));
        }
        assert!(matches!(pauli(0), Err(Error::Argument(_))));
        assert!(matches!(pauli(4), Err(Error::Argument(_))));
    }

    fn pair(idx: BellIndex) -> Register {
        Register::bell_pair(QubitLabel::new("A", 0), QubitLabel::new("D", 0), idx).unwrap()
    }

    #[test]
    fn sigma1_on_d_maps_b00_to_b01() {
        let out = pair(BellIndex::B00).apply_on("D", &pauli(1).unwrap()).unwrap();
        assert!(out.state().approx_eq(&bell_projector(BellIndex::B01), 1e-15));
    }

    #[test]
    fn apply_identity_and_involution() {
        let r = pair(BellIndex::B10);
        assert_eq!(r.apply_on("A", &ComplexMatrix::identity(2)).unwrap(), r);
        let s3 = pauli(3).unwrap();
        let twice = r.apply_on("D", &s3).unwrap().apply_on("D", &s3).unwrap();
        assert!(twice.state().approx_eq(r.state(), 1e-15));
    }

    #[test]
    fn apply_errors() {
        let r = pair(BellIndex::B00);
        assert!(matches!(r.apply_on("Z", &pauli(1).unwrap()), Err(Error::Label(_))));
        let not_unitary = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(r.apply_on("A", &not_unitary), Err(Error::Unitarity(_))));
    }

    #[test]
    fn delay_relabels_only() {
        let ab = Register::bell_pair(QubitLabel::new("A", -1), QubitLabel::new("B", -1), BellIndex::B00).unwrap();
        let delayed = ab.delay("B", 1).unwrap();
        assert_eq!(delayed.label("A").unwrap().tick, -1);
        assert_eq!(delayed.label("B").unwrap().tick, 0);
        assert_eq!(delayed.state(), ab.state());
        assert!(matches!(ab.delay("B", 0), Err(Error::Argument(_))));
        assert!(matches!(ab.delay("Q", 1), Err(Error::Label(_))));
        assert_eq!(ab.delay("B", 1).unwrap().delay("B", 1).unwrap(), ab.delay("B", 2).unwrap());
    }

    #[test]
    fn merge_product_and_collisions() {
        let ab = Register::bell_pair(QubitLabel::new("A", 0), QubitLabel::new("B", 0), BellIndex::B00).unwrap();
        let cd = Register::bell_pair(QubitLabel::new("C", 0), QubitLabel::new("D", 0), BellIndex::B11).unwrap();
        let m = ab.merge(&cd).unwrap();
        assert_eq!(m.subsystems(), vec!["A", "B", "C", "D"]);
        assert!((m.state().trace() - re(1.0)).norm() < 1e-12);
        assert_eq!(ab.merge(&Register::empty()).unwrap(), ab);
        assert_eq!(Register::empty().merge(&ab).unwrap(), ab);
        assert!(matches!(ab.merge(&ab), Err(Error::Label(_))));
    }

    #[test]
    fn merge_order_is_a_factor_permutation() {
        let ab = Register::bell_pair(QubitLabel::new("A", 0), QubitLabel::new("B", 0), BellIndex::B01).unwrap();
        let c = Register::from_ket(vec![QubitLabel::new("C", 0)], &ComplexMatrix::real_ket(&[0.6, 0.8])).unwrap();
        let abc = ab.merge(&c).unwrap();
        let cab = c.merge(&ab).unwrap();
        // oracle: explicit index permutation (a,b,c) -> (c,a,b)
        for r in 0..8usize {
            for col in 0..8usize {
                let to_cab = |i: usize| ((i & 1) << 2) | (i >> 1);
                assert_eq!(abc.state().get(r, col), cab.state().get(to_cab(r), to_cab(col)));
            }
        }
        assert_eq!(cab.reorder(&["A", "B", "C"]).unwrap(), abc);
    }

    #[test]
    fn reduced_respects_requested_order() {
        let ab = Register::bell_pair(QubitLabel::new("A", 0), QubitLabel::new("B", 0), BellIndex::B00).unwrap();
        let c = Register::from_ket(vec![QubitLabel::new("C", 0)], &ComplexMatrix::real_ket(&[0.6, 0.8])).unwrap();
        let abc = ab.merge(&c).unwrap();
        let ca = abc.reduced(&["C", "A"]).unwrap();
        let expected = tensor(
            &ComplexMatrix::projector(&ComplexMatrix::real_ket(&[0.6, 0.8])),
            &ComplexMatrix::identity(2).scale_real(0.5),
        );
        assert!(ca.state().approx_eq(&expected, 1e-14));
        assert_eq!(ca.subsystems(), vec!["C", "A"]);
        assert!(abc.reduced(&["A", "A"]).is_err());
    }

    #[test]
    fn register_validation() {
        let labels = vec![QubitLabel::new("A", 0)];
        assert!(Register::new(labels.clone(), ComplexMatrix::identity(2)).is_err());
        assert!(Register::new(labels.clone(), ComplexMatrix::identity(4).scale_real(0.25)).is_err());
        let not_psd = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(matches!(Register::new(labels, not_psd), Err(Error::NotDensity(_))));
        let dup = vec![QubitLabel::new("A", 0), QubitLabel::new("A", 1)];
        assert!(matches!(
            Register::new(dup, ComplexMatrix::identity(4).scale_real(0.25)),
            Err(Error::Label(_))
        ));
    }

    #[test]
    fn projection_onto_bell_pair() {
        let ab = Register::bell_pair(QubitLabel::new("A", 0), QubitLabel::new("B", 0), BellIndex::B10).unwrap();
        let (p, post) = ab.project_pair("A", "B", &bell_ket(BellIndex::B10)).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(post.unwrap().state().approx_eq(ab.state(), 1e-12));
        let (p, post) = ab.project_pair("A", "B", &bell_ket(BellIndex::B00)).unwrap();
        assert!(p.abs() < 1e-12 && post.is_none());
    }
}
