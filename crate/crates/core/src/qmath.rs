//! Dense complex linear algebra over small Hilbert spaces.
//!
//! Everything here works on [`ComplexMatrix`], a thin wrapper around a
//! `nalgebra` dense matrix; Hermitian eigendecompositions go through
//! `faer`. Composite spaces are described by a list of
//! factor dimensions; the leftmost factor occupies the most significant
//! digits of the flat index, so `|a b⟩` sits at `a * dim_b + b`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default elementwise tolerance for matrix comparisons.
pub const EQ_TOLERANCE: f64 = 1e-9;

/// Eigenvalues at or below this are treated as exactly zero
/// (pseudo-inverses and `0 log 0`).
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Most negative eigenvalue accepted as numerical noise in a PSD operator.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Largest register the dense representation supports.
pub const MAX_QUBITS: usize = 12;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Row/column-indexed complex matrix. Kets are `n × 1` matrices.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from entries in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Square or rectangular matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        Self(DMatrix::from_fn(r, cols, |i, j| re(rows[i][j])))
    }

    /// Column vector from complex amplitudes.
    pub fn ket(amplitudes: &[Complex64]) -> Self {
        Self(DMatrix::from_column_slice(amplitudes.len(), 1, amplitudes))
    }

    /// Column vector from real amplitudes.
    pub fn real_ket(amplitudes: &[f64]) -> Self {
        Self(DMatrix::from_fn(amplitudes.len(), 1, |i, _| re(amplitudes[i])))
    }

    /// Computational basis ket `|index⟩` in a `dim`-dimensional space.
    pub fn basis_ket(dim: usize, index: usize) -> Self {
        let mut m = DMatrix::zeros(dim, 1);
        m[(index, 0)] = re(1.0);
        Self(m)
    }

    /// The operator `|i⟩⟨j|` in a `dim`-dimensional space.
    pub fn ketbra(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = re(1.0);
        Self(m)
    }

    /// `|v⟩⟨v|` for a column vector `v`.
    pub fn projector(ket: &ComplexMatrix) -> Self {
        Self(&ket.0 * ket.0.adjoint())
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Complex64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(re(factor))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Sub-block with top-left corner `(row, col)`.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((row, col), (rows, cols)).into_owned())
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Elementwise comparison; shapes must agree.
    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Largest `|m_ij − conj(m_ji)|`, or infinity for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.rows()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// `⟨u|v⟩` for two column vectors.
    pub fn inner_product(&self, other: &ComplexMatrix) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Kronecker product `a ⊗ b`; `a` takes the most significant index digits.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Left fold of [`tensor`]; the empty product is the 1×1 identity.
pub fn tensor_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| tensor(&acc, f))
}

/// Mixed-radix digits of `index` for the given factor dimensions.
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn compose(digits: impl IntoIterator<Item = (usize, usize)>) -> usize {
    digits.into_iter().fold(0, |acc, (digit, dim)| acc * dim + digit)
}

fn validate_factors(dim: usize, dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    let total: usize = dims.iter().product();
    if total != dim {
        return Err(Error::Dimension(format!(
            "factor dimensions {dims:?} multiply to {total}, operator has dimension {dim}"
        )));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::Dimension(format!("repeated factor index in {keep:?}")));
    }
    if let Some(&bad) = sorted.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Dimension(format!(
            "factor index {bad} out of range for {} factors",
            dims.len()
        )));
    }
    Ok(sorted)
}

/// For each flat index, its flat position in the kept and traced subspaces.
fn split_indices(dims: &[usize], keep: &[usize]) -> Vec<(usize, usize)> {
    let total: usize = dims.iter().product();
    (0..total)
        .map(|idx| {
            let d = digits(idx, dims);
            let kept = compose(keep.iter().map(|&k| (d[k], dims[k])));
            let traced = compose(
                (0..dims.len())
                    .filter(|f| !keep.contains(f))
                    .map(|f| (d[f], dims[f])),
            );
            (kept, traced)
        })
        .collect()
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their
/// original relative order regardless of the order given in `keep`.
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !rho.is_square() {
        return Err(Error::Dimension(format!(
            "partial trace needs a square operator, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let keep = validate_factors(rho.rows(), dims, keep)?;
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim = rho.rows() / kept_dim;

    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for (full, (kept, traced)) in split_indices(dims, &keep).into_iter().enumerate() {
        groups[traced].push((kept, full));
    }
    let mut out = DMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &(ki, fi) in group {
            for &(kj, fj) in group {
                out[(ki, kj)] += rho.0[(fi, fj)];
            }
        }
    }
    Ok(ComplexMatrix(out))
}

/// Reduced density operator of the pure state `psi` on the kept factors,
/// computed as `M M†` with `M` the (kept × traced) reshaping of `psi`.
pub fn reduced_from_ket(psi: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if psi.cols() != 1 {
        return Err(Error::Dimension(format!("expected a ket, got {} columns", psi.cols())));
    }
    let keep = validate_factors(psi.rows(), dims, keep)?;
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim = psi.rows() / kept_dim;
    let mut m = DMatrix::zeros(kept_dim, traced_dim);
    for (full, (kept, traced)) in split_indices(dims, &keep).into_iter().enumerate() {
        m[(kept, traced)] = psi.0[(full, 0)];
    }
    Ok(ComplexMatrix(&m * m.adjoint()))
}

/// Reorders tensor factors: factor `i` of the result is factor `order[i]`
/// of the input. Applies to rows, and to columns as well when the matrix is
/// square (operators); kets keep their single column.
pub fn permute_factors(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if m.rows() != total || !(m.cols() == total || m.cols() == 1) {
        return Err(Error::Dimension(format!(
            "{}x{} matrix does not match factor dimensions {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::Dimension(format!("{order:?} is not a permutation of the factors")));
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    // new flat index for every old flat index
    let map: Vec<usize> = (0..total)
        .map(|old| {
            let d = digits(old, dims);
            compose(order.iter().zip(&new_dims).map(|(&o, &nd)| (d[o], nd)))
        })
        .collect();
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    if m.cols() == 1 && total != 1 {
        for old in 0..total {
            out[(map[old], 0)] = m.0[(old, 0)];
        }
    } else {
        for r in 0..total {
            for col in 0..total {
                out[(map[r], map[col])] = m.0[(r, col)];
            }
        }
    }
    Ok(ComplexMatrix(out))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Real eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors.0;
        let n = self.eigenvalues.len();
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| l)
    }
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let defect = m.hermiticity_defect();
    if defect > EQ_TOLERANCE {
        return Err(Error::Hermiticity(defect));
    }
    // Symmetrize away the sub-tolerance asymmetry before the solver sees it.
    let n = m.rows();
    let sym = faer::Mat::<Complex64>::from_fn(n, n, |i, j| (m.0[(i, j)] + m.0[(j, i)].conj()) * 0.5);
    let eig = sym
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let (values, vectors) = (eig.S(), eig.U());
    if let Some(bad) = (0..n).map(|i| values[i].re).find(|l| !l.is_finite()) {
        return Err(Error::Eigen(format!("non-finite eigenvalue {bad}")));
    }
    // faer returns ascending order
    let eigenvalues = (0..n).rev().map(|i| values[i].re).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| vectors[(i, n - 1 - j)]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix(eigenvectors),
    })
}

fn psd_spectrum(rho: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let eig = eig_hermitian(rho)?;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPsd(min));
        }
    }
    Ok(eig)
}

/// Positive square root of a PSD operator.
pub fn matrix_sqrt(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = psd_spectrum(rho)?;
    Ok(eig.map_spectrum(|l| if l > SUPPORT_CUTOFF { l.sqrt() } else { 0.0 }))
}

/// Inverse square root restricted to the support of `rho`.
pub fn matrix_inv_sqrt(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = psd_spectrum(rho)?;
    Ok(eig.map_spectrum(|l| if l > SUPPORT_CUTOFF { l.sqrt().recip() } else { 0.0 }))
}

/// Projector onto the eigenvectors with eigenvalue above the support cutoff.
pub fn support_projector(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = psd_spectrum(rho)?;
    Ok(eig.map_spectrum(|l| if l > SUPPORT_CUTOFF { 1.0 } else { 0.0 }))
}

/// Lifts a `k`-qubit operator acting on qubit positions `targets` (in that
/// order) to the full `n_qubits` register, identity elsewhere.
pub fn embed_operator(op: &ComplexMatrix, targets: &[usize], n_qubits: usize) -> Result<ComplexMatrix> {
    let k = targets.len();
    if op.rows() != 1 << k || !op.is_square() {
        return Err(Error::Dimension(format!(
            "{}x{} operator cannot act on {k} qubits",
            op.rows(),
            op.cols()
        )));
    }
    if targets.iter().any(|&t| t >= n_qubits) {
        return Err(Error::Dimension(format!("target {targets:?} outside {n_qubits} qubits")));
    }
    let dim = 1usize << n_qubits;
    let shift = |t: usize| n_qubits - 1 - t;
    let local = |idx: usize| {
        targets
            .iter()
            .fold(0, |acc, &t| (acc << 1) | ((idx >> shift(t)) & 1))
    };
    let mask: usize = targets.iter().map(|&t| 1 << shift(t)).sum();
    let with_local = |base: usize, loc: usize| {
        targets.iter().enumerate().fold(base & !mask, |acc, (i, &t)| {
            acc | (((loc >> (k - 1 - i)) & 1) << shift(t))
        })
    };
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let lc = local(col);
        for lr in 0..(1 << k) {
            let v = op.0[(lr, lc)];
            if v != Complex64::new(0.0, 0.0) {
                out[(with_local(col, lr), col)] += v;
            }
        }
    }
    Ok(ComplexMatrix(out))
}

/// Checks the density-operator invariants: square, unit trace, Hermitian,
/// and no eigenvalue below `-PSD_TOLERANCE`.
pub fn validate_density(rho: &ComplexMatrix) -> Result<()> {
    if !rho.is_square() || rho.rows() == 0 {
        return Err(Error::NotDensity(format!("shape {}x{}", rho.rows(), rho.cols())));
    }
    let tr = rho.trace();
    if (tr - re(1.0)).norm() > EQ_TOLERANCE {
        return Err(Error::NotDensity(format!("trace {tr}")));
    }
    let defect = rho.hermiticity_defect();
    if defect > EQ_TOLERANCE {
        return Err(Error::NotDensity(format!("Hermiticity defect {defect:.3e}")));
    }
    let eig = eig_hermitian(rho)?;
    match eig.eigenvalues.last() {
        Some(&min) if min < -PSD_TOLERANCE => {
            Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")))
        }
        _ => Ok(()),
    }
}
