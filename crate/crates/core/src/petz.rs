//! Temporal Petz recovery channel and the DDoS pre-detection built on it.
//!
//! Given a reference state `ρ_AD` the channel is
//!
//! ```text
//! T(X) = ρ_AD^{1/2} (ρ_A^{-1/2} X ρ_A^{-1/2} ⊗ I_D) ρ_AD^{1/2},   ρ_A = Tr_D ρ_AD
//! ```
//!
//! and is applied as `I_B ⊗ T` to a state on `BA`, producing a state on `BAD`.
//! If the future Turnstile projection fails the reference is `I/4` and the
//! output keeps the `BA` entanglement (`S(A|B) = −1`); if it succeeds the
//! reference is a Bell projector and the output on `BA` is maximally mixed
//! (`S(A|B) = +1`).

use crate::bell::{bell_projector, BellIndex, QubitLabel, Register};
use crate::entropy::von_neumann;
use crate::error::{Error, Result};
use crate::qmath::{
    matrix_inv_sqrt, matrix_sqrt, partial_trace, tensor, validate_density, ComplexMatrix, EQ_TOLERANCE,
};

/// Half-width of the acceptance band around the two verdict values.
pub const VERDICT_BAND: f64 = 1e-6;

/// What happens at the future Turnstile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// The BC projection never happens: the service is flooded.
    FutureAttack,
    /// The projection succeeds and leaves `AD` in the given Bell state.
    FutureNormal(BellIndex),
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::FutureAttack => f.write_str("attack"),
            Scenario::FutureNormal(idx) => write!(f, "normal {idx}"),
        }
    }
}

/// The `AD` state the channel is built from.
pub fn reference_state(s: Scenario) -> ComplexMatrix {
    match s {
        Scenario::FutureAttack => {
            let l = |name: &str| QubitLabel::new(name, 0);
            let ab = Register::bell_pair(l("A"), l("B"), BellIndex::B00);
            let cd = Register::bell_pair(l("C"), l("D"), BellIndex::B00);
            ab.and_then(|ab| cd.and_then(|cd| ab.merge(&cd)))
                .and_then(|r| r.reduced(&["A", "D"]))
                .expect("fixed four-qubit construction is always valid")
                .state()
                .clone()
        }
        Scenario::FutureNormal(idx) => bell_projector(idx),
    }
}

/// A Petz channel with its matrix functions precomputed.
#[derive(Clone, Debug)]
pub struct RecoveryChannel {
    reference: ComplexMatrix,
    sqrt_ref: ComplexMatrix,
    inv_sqrt_marginal: ComplexMatrix,
}

impl RecoveryChannel {
    pub fn build(reference: &ComplexMatrix) -> Result<Self> {
        if reference.rows() != 4 || reference.cols() != 4 {
            return Err(Error::Dimension(format!(
                "reference must be 4x4, got {}x{}",
                reference.rows(),
                reference.cols()
            )));
        }
        validate_density(reference)?;
        let marginal = partial_trace(reference, &[2, 2], &[0])?;
        Ok(Self {
            reference: reference.clone(),
            sqrt_ref: matrix_sqrt(reference)?,
            inv_sqrt_marginal: matrix_inv_sqrt(&marginal)?,
        })
    }

    pub fn for_scenario(s: Scenario) -> Result<Self> {
        Self::build(&reference_state(s))
    }

    pub fn reference(&self) -> &ComplexMatrix {
        &self.reference
    }

    pub fn sqrt_ref(&self) -> &ComplexMatrix {
        &self.sqrt_ref
    }

    pub fn inv_sqrt_marginal(&self) -> &ComplexMatrix {
        &self.inv_sqrt_marginal
    }

    /// `T(X)` for a single-qubit operator `X` on `A`; the result acts on `AD`.
    pub fn map_a(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != 2 || x.cols() != 2 {
            return Err(Error::Dimension(format!("A operator must be 2x2, got {}x{}", x.rows(), x.cols())));
        }
        let inner = &(&self.inv_sqrt_marginal * x) * &self.inv_sqrt_marginal;
        let lifted = tensor(&inner, &ComplexMatrix::identity(2));
        Ok(&(&self.sqrt_ref * &lifted) * &self.sqrt_ref)
    }

    /// `(I_B ⊗ T)(ρ_BA)`, an 8×8 operator on `B, A, D`.
    ///
    /// `ρ_BA = Σ_ij |i⟩⟨j|_B ⊗ X_ij` is split into its `B` blocks and each
    /// block is sent through [`map_a`](Self::map_a).
    pub fn apply(&self, rho_ba: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho_ba.rows() != 4 || rho_ba.cols() != 4 {
            return Err(Error::Dimension(format!(
                "BA operator must be 4x4, got {}x{}",
                rho_ba.rows(),
                rho_ba.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(8, 8);
        for i in 0..2 {
            for j in 0..2 {
                let mapped = self.map_a(&rho_ba.block(2 * i, 2 * j, 2, 2))?;
                for r in 0..4 {
                    for c in 0..4 {
                        out.set(4 * i + r, 4 * j + c, mapped.get(r, c));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Outcome of a pre-detection run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionVerdict {
    /// `S(A|B)` of the channel output, in bits.
    pub conditional_entropy: f64,
    pub attack_in_future: bool,
}

/// Output of the channel on `|β₀₀⟩⟨β₀₀|_BA`, over `B, A, D`.
pub fn recovered_state(s: Scenario) -> Result<ComplexMatrix> {
    RecoveryChannel::for_scenario(s)?.apply(&bell_projector(BellIndex::B00))
}

/// Runs the channel for `s` and reads the verdict off `S(A|B)`.
pub fn predetect(s: Scenario) -> Result<DetectionVerdict> {
    let out = recovered_state(s)?;
    let ba = partial_trace(&out, &[2, 2, 2], &[0, 1])?;
    let b = partial_trace(&ba, &[2, 2], &[0])?;
    let h = von_neumann(&ba)? - von_neumann(&b)?;
    log::debug!("petz {s}: S(A|B) = {h:.9}");
    verdict(h)
}

/// Classifies a conditional entropy as attack (−1) or normal (+1).
pub fn verdict(conditional_entropy: f64) -> Result<DetectionVerdict> {
    let attack_in_future = if (conditional_entropy + 1.0).abs() <= VERDICT_BAND {
        true
    } else if (conditional_entropy - 1.0).abs() <= VERDICT_BAND {
        false
    } else {
        return Err(Error::Indeterminate(conditional_entropy));
    };
    Ok(DetectionVerdict { conditional_entropy, attack_in_future })
}

fn a_basis() -> Vec<ComplexMatrix> {
    (0..4).map(|k| ComplexMatrix::ketbra(2, k / 2, k % 2)).collect()
}

/// Largest deviation between the channel and its three-map composition
/// `X ↦ ρ_AD^{1/2} N†(N(ρ_AD)^{-1/2} X N(ρ_AD)^{-1/2}) ρ_AD^{1/2}` with
/// `N = Tr_D`, taken over every basis operator `|k⟩⟨l|_B ⊗ |i⟩⟨j|_A`.
/// Also folds in the defect of `N†` as the adjoint of `N`.
pub fn composition_residual(s: Scenario) -> Result<f64> {
    let rho = reference_state(s);
    let ch = RecoveryChannel::build(&rho)?;

    // every map below is built from scratch, not from the channel's fields
    let n = |z: &ComplexMatrix| partial_trace(z, &[2, 2], &[0]);
    let n_dag = |y: &ComplexMatrix| tensor(y, &ComplexMatrix::identity(2));
    let marginal_inv_sqrt = matrix_inv_sqrt(&n(&rho)?)?;
    let rho_sqrt = matrix_sqrt(&rho)?;
    let first = |x: &ComplexMatrix| &(&marginal_inv_sqrt * x) * &marginal_inv_sqrt;
    let third = |z: &ComplexMatrix| &(&rho_sqrt * z) * &rho_sqrt;
    let composite = |x: &ComplexMatrix| third(&n_dag(&first(x)));

    let mut worst: f64 = 0.0;
    for b in a_basis() {
        for x in a_basis() {
            let direct = ch.apply(&tensor(&b, &x))?;
            let composed = tensor(&b, &composite(&x));
            worst = worst.max(direct.max_abs_diff(&composed));
        }
    }

    // ⟨N(Z), Y⟩ = ⟨Z, N†(Y)⟩ under the Hilbert-Schmidt inner product
    for z in (0..16).map(|k| ComplexMatrix::ketbra(4, k / 4, k % 4)) {
        for y in a_basis() {
            let lhs = (&n(&z)?.adjoint() * &y).trace();
            let rhs = (&z.adjoint() * &n_dag(&y)).trace();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

pub fn channel_composition_check(s: Scenario) -> bool {
    matches!(composition_residual(s), Ok(r) if r <= EQ_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{c, re};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    fn normal_all() -> impl Iterator<Item = Scenario> {
        BellIndex::all().into_iter().map(Scenario::FutureNormal)
    }

    #[test]
    fn attack_reference_is_maximally_mixed() {
        let rho = reference_state(Scenario::FutureAttack);
        assert!(rho.approx_eq(&ComplexMatrix::identity(4).scale_real(0.25), 1e-12));
    }

    #[test]
    fn marginals_are_half_identity() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        for s in std::iter::once(Scenario::FutureAttack).chain(normal_all()) {
            let m = partial_trace(&reference_state(s), &[2, 2], &[0]).unwrap();
            assert!(m.approx_eq(&half, 1e-12));
            let ch = RecoveryChannel::for_scenario(s).unwrap();
            let expected = ComplexMatrix::identity(2).scale_real(2f64.sqrt());
            assert!(ch.inv_sqrt_marginal().approx_eq(&expected, 1e-9));
            assert!((ch.sqrt_ref() * ch.sqrt_ref()).approx_eq(ch.reference(), 1e-9));
        }
    }

    #[test]
    fn recovers_its_own_reference() {
        for s in std::iter::once(Scenario::FutureAttack).chain(normal_all()) {
            let ch = RecoveryChannel::for_scenario(s).unwrap();
            let rho_a = partial_trace(ch.reference(), &[2, 2], &[0]).unwrap();
            assert!(ch.map_a(&rho_a).unwrap().approx_eq(ch.reference(), 1e-9), "{s}");
        }
    }

    #[test]
    fn attack_output_golden_expansion() {
        let out = recovered_state(Scenario::FutureAttack).unwrap();
        let expected = tensor(&bell_projector(BellIndex::B00), &ComplexMatrix::identity(2).scale_real(0.5));
        assert!(out.approx_eq(&expected, 1e-9));
        let nonzero = out.row_major().iter().filter(|z| z.norm() > 1e-12).count();
        assert_eq!(nonzero, 8);
        for (r, col) in [(0, 0), (1, 1), (0, 6), (1, 7), (6, 0), (7, 1), (6, 6), (7, 7)] {
            assert!((out.get(r, col) - re(0.25)).norm() < 1e-9);
        }
    }

    #[test]
    fn normal_cross_blocks_vanish() {
        for s in normal_all() {
            let ch = RecoveryChannel::for_scenario(s).unwrap();
            let off = ch.map_a(&ComplexMatrix::ketbra(2, 0, 1)).unwrap();
            assert!(off.approx_eq(&ComplexMatrix::zeros(4, 4), 1e-9));
        }
    }

    #[test]
    fn normal_output_on_ab_is_maximally_mixed() {
        for s in normal_all() {
            let out = recovered_state(s).unwrap();
            assert!(close(out.trace().re, 1.0));
            let ba = partial_trace(&out, &[2, 2, 2], &[0, 1]).unwrap();
            assert!(ba.approx_eq(&ComplexMatrix::identity(4).scale_real(0.25), 1e-9));
        }
    }

    #[test]
    fn verdicts() {
        let v = predetect(Scenario::FutureAttack).unwrap();
        assert!(close(v.conditional_entropy, -1.0));
        assert!(v.attack_in_future);
        for s in normal_all() {
            let v = predetect(s).unwrap();
            assert!(close(v.conditional_entropy, 1.0));
            assert!(!v.attack_in_future);
        }
    }

    #[test]
    fn verdict_band() {
        assert!(verdict(-1.0 + 5e-7).unwrap().attack_in_future);
        assert!(!verdict(1.0 - 5e-7).unwrap().attack_in_future);
        assert!(matches!(verdict(0.0), Err(Error::Indeterminate(_))));
        assert!(matches!(verdict(-0.999), Err(Error::Indeterminate(_))));
    }

    #[test]
    fn composition_matches() {
        assert!(channel_composition_check(Scenario::FutureAttack));
        assert!(channel_composition_check(Scenario::FutureNormal(BellIndex::B00)));
        assert!(channel_composition_check(Scenario::FutureNormal(BellIndex::B11)));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            RecoveryChannel::build(&ComplexMatrix::identity(2).scale_real(0.5)),
            Err(Error::Dimension(_))
        ));
        let ch = RecoveryChannel::for_scenario(Scenario::FutureAttack).unwrap();
        assert!(matches!(ch.apply(&ComplexMatrix::identity(2)), Err(Error::Dimension(_))));
        assert!(matches!(ch.map_a(&ComplexMatrix::identity(4)), Err(Error::Dimension(_))));
        let bad = ComplexMatrix::identity(4);
        assert!(matches!(RecoveryChannel::build(&bad), Err(Error::NotDensity(_))));
    }

    #[test]
    fn output_is_hermitian_for_complex_input() {
        let ch = RecoveryChannel::for_scenario(Scenario::FutureNormal(BellIndex::B01)).unwrap();
        let mut x = ComplexMatrix::identity(4).scale_real(0.25);
        x.set(0, 3, c(0.0, 0.1));
        x.set(3, 0, c(0.0, -0.1));
        assert!(ch.apply(&x).unwrap().is_hermitian(1e-12));
    }
}
