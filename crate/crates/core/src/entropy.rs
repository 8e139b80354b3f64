//! Entropy functionals in bits: Shannon, von Neumann, conditional,
//! conditional mutual information and the temporal transfer entropy.

use crate::bell::Register;
use crate::error::{Error, Result};
use crate::qmath::{eig_hermitian, re, ComplexMatrix, EQ_TOLERANCE, PSD_TOLERANCE, SUPPORT_CUTOFF};

/// `−Σ p log₂ p` with `0 log 0 = 0`.
pub fn shannon(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Distribution("empty distribution".into()));
    }
    if let Some(bad) = p.iter().find(|&&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Distribution(format!("invalid probability {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > EQ_TOLERANCE {
        return Err(Error::Distribution(format!("probabilities sum to {total}")));
    }
    Ok(entropy_of_weights(p.iter().copied()))
}

fn entropy_of_weights(weights: impl Iterator<Item = f64>) -> f64 {
    let h: f64 = weights
        .filter(|&w| w > SUPPORT_CUTOFF)
        .map(|w| -w * w.log2())
        .sum();
    // a pure state sums to -0.0
    h.max(0.0)
}

/// `−Tr ρ log₂ ρ`. Eigenvalues within the PSD noise band are clamped to zero.
pub fn von_neumann(rho: &ComplexMatrix) -> Result<f64> {
    if !rho.is_square() || rho.rows() == 0 {
        return Err(Error::NotDensity(format!("shape {}x{}", rho.rows(), rho.cols())));
    }
    let tr = rho.trace();
    if (tr - re(1.0)).norm() > EQ_TOLERANCE {
        return Err(Error::NotDensity(format!("trace {tr}")));
    }
    let eig = eig_hermitian(rho).map_err(|e| Error::NotDensity(e.to_string()))?;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -PSD_TOLERANCE {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
    }
    Ok(entropy_of_weights(eig.eigenvalues.into_iter()))
}

/// Ordered groups of subsystems of one register, pairwise disjoint. The
/// subsystems not named in any group form the implicit traced-out remainder,
/// so together they always cover the register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    groups: Vec<Vec<String>>,
    remainder: Vec<String>,
}

impl Partition {
    pub fn new(reg: &Register, groups: &[&[&str]]) -> Result<Self> {
        let mut seen: Vec<&str> = Vec::new();
        for group in groups {
            for &name in group.iter() {
                reg.position(name)?;
                if seen.contains(&name) {
                    return Err(Error::Partition(format!("subsystem {name:?} appears in two groups")));
                }
                seen.push(name);
            }
        }
        let remainder = reg
            .subsystems()
            .into_iter()
            .filter(|s| !seen.contains(s))
            .map(String::from)
            .collect();
        Ok(Self {
            groups: groups
                .iter()
                .map(|g| g.iter().map(|s| s.to_string()).collect())
                .collect(),
            remainder,
        })
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn remainder(&self) -> &[String] {
        &self.remainder
    }

    /// Union of the listed groups, in group order.
    fn union(&self, which: &[usize]) -> Vec<&str> {
        which
            .iter()
            .flat_map(|&i| self.groups[i].iter().map(String::as_str))
            .collect()
    }
}

/// `S(ρ_X)` for the named subsystems (the empty set has entropy 0).
pub fn joint(reg: &Register, subsystems: &[&str]) -> Result<f64> {
    if subsystems.is_empty() {
        return Ok(0.0);
    }
    von_neumann(reg.reduced(subsystems)?.state())
}

/// `S(a|b) = S(ab) − S(b)`, tracing out everything else first.
pub fn conditional(reg: &Register, a: &[&str], b: &[&str]) -> Result<f64> {
    let part = Partition::new(reg, &[a, b])?;
    Ok(joint(reg, &part.union(&[0, 1]))? - joint(reg, &part.union(&[1]))?)
}

/// `I(a;b|c) = S(ca) + S(cb) − S(cab) − S(c)`.
pub fn cmi(reg: &Register, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    let part = Partition::new(reg, &[a, b, c])?;
    Ok(joint(reg, &part.union(&[2, 0]))? + joint(reg, &part.union(&[2, 1]))?
        - joint(reg, &part.union(&[2, 0, 1]))?
        - joint(reg, &part.union(&[2]))?)
}

/// Which endpoint the transfer entropy conditions on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditioning {
    /// `I(A; B | D)`: condition on the later qubit `D`.
    OnFuture,
    /// `I(D; B | A)`: condition on the earlier qubit `A`.
    OnPast,
}

/// Transfer entropy of a register holding qubits `A`, `B` and `D`.
pub fn transfer_entropy(reg: &Register, conditioning: Conditioning) -> Result<f64> {
    for name in ["A", "B", "D"] {
        reg.position(name)?;
    }
    match conditioning {
        Conditioning::OnFuture => cmi(reg, &["A"], &["B"], &["D"]),
        Conditioning::OnPast => cmi(reg, &["D"], &["B"], &["A"]),
    }
}
