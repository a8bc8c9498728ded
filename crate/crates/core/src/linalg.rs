//! Dense numeric helpers shared by every module: Hermitian eigensolvers,
//! rank decisions against a single relative tolerance, spans and kernels.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// The numerical context inherited by all rank and support decisions.
///
/// `tol` is relative: a singular value or eigenvalue counts as zero when it
/// is at most `tol` times the largest one in the same decision. Values in
/// `[tol, 10 tol]` make a decision inconclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { tol: 1e-9 }
    }
}

impl Tolerance {
    pub const DEFAULT: f64 = 1e-9;

    pub fn new(tol: f64) -> Self {
        assert!(tol > 0.0 && tol < 1.0, "tolerance must lie in (0, 1)");
        Self { tol }
    }

    /// Upper edge of the inconclusive band.
    pub fn band(&self) -> f64 {
        10.0 * self.tol
    }

    /// Classifies a descending list of nonnegative singular values.
    pub fn rank_of(&self, singular: &[f64]) -> RankDecision {
        let top = singular.iter().cloned().fold(0.0_f64, f64::max);
        if top == 0.0 {
            return RankDecision {
                rank: 0,
                inconclusive: false,
                margin: 1.0,
                null_residual: 0.0,
            };
        }
        let rel: Vec<f64> = singular.iter().map(|s| s / top).collect();
        let strong = rel.iter().filter(|&&s| s > self.band()).count();
        let weak = rel.iter().filter(|&&s| s >= self.tol).count();
        let margin = rel
            .iter()
            .filter(|&&s| s > self.band())
            .cloned()
            .fold(1.0_f64, f64::min);
        let null_residual = rel
            .iter()
            .filter(|&&s| s < self.tol)
            .cloned()
            .fold(0.0_f64, f64::max);
        RankDecision {
            rank: weak,
            inconclusive: weak != strong,
            margin,
            null_residual,
        }
    }
}

/// Outcome of a numerical rank decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    pub inconclusive: bool,
    /// Smallest retained relative singular value (1 when nothing is retained).
    pub margin: f64,
    /// Largest relative singular value classified as zero.
    pub null_residual: f64,
}

/// Hermitian part `(a + a*) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
/// Columns of the returned matrix are the matching orthonormal eigenvectors.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Sorted singular values of any matrix.
pub fn singular_values<T>(m: &DMatrix<T>) -> Vec<f64>
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Kernel of a linear system `m x = 0`.
#[derive(Clone, Debug)]
pub struct Kernel<T: nalgebra::Scalar> {
    pub decision: RankDecision,
    pub unknowns: usize,
    /// True when `unknowns > equations`, so the kernel is nontrivial by counting.
    pub structural: bool,
    /// Orthonormal basis of the numerical kernel, as columns.
    pub basis: DMatrix<T>,
}

impl<T: nalgebra::Scalar> Kernel<T> {
    pub fn nullity(&self) -> usize {
        self.basis.ncols()
    }
}

/// Computes the kernel of `m` with rank decided at `tol`.
///
/// When there are more unknowns than equations the kernel is nonzero for
/// dimensional reasons. In that case only a square leading subsystem is
/// factored to extract one kernel vector.
pub fn kernel<T>(m: &DMatrix<T>, tol: &Tolerance) -> Kernel<T>
where
    T: ComplexField<RealField = f64>,
{
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Kernel {
            decision: tol.rank_of(&[]),
            unknowns: 0,
            structural: false,
            basis: DMatrix::zeros(0, 0),
        };
    }
    if rows < cols {
        let sub_cols = rows + 1;
        let sub = m.columns(0, sub_cols).into_owned();
        let inner = kernel_square(&sub, tol);
        let mut basis = DMatrix::zeros(cols, inner.basis.ncols().max(1));
        if inner.basis.ncols() == 0 {
            // rows + 1 unknowns in rows equations always leave a kernel
            basis[(cols - 1, 0)] = T::one();
        } else {
            basis
                .view_mut((0, 0), (sub_cols, inner.basis.ncols()))
                .copy_from(&inner.basis);
        }
        let mut decision = inner.decision;
        decision.inconclusive = false;
        decision.margin = 1.0;
        return Kernel {
            decision,
            unknowns: cols,
            structural: true,
            basis,
        };
    }
    kernel_square(m, tol)
}

/// Full numerical kernel, without the counting shortcut of [`kernel`].
pub fn null_space<T>(m: &DMatrix<T>, tol: &Tolerance) -> Kernel<T>
where
    T: ComplexField<RealField = f64>,
{
    if m.ncols() == 0 {
        return kernel(m, tol);
    }
    kernel_square(m, tol)
}

fn kernel_square<T>(m: &DMatrix<T>, tol: &Tolerance) -> Kernel<T>
where
    T: ComplexField<RealField = f64>,
{
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let decision = tol.rank_of(&sorted);
    let nullity = cols - decision.rank.min(cols);
    let mut basis = DMatrix::zeros(cols, nullity);
    for (dst, &src) in order[decision.rank..].iter().enumerate() {
        let row = v_t.row(src);
        for c in 0..cols {
            basis[(c, dst)] = row[c].clone().conjugate();
        }
    }
    Kernel {
        decision,
        unknowns: cols,
        structural: false,
        basis,
    }
}

/// Orthonormal basis (as columns) for the span of the given columns.
pub fn orthonormal_span(columns: &CMat, tol: &Tolerance) -> CMat {
    let (n, k) = columns.shape();
    if k == 0 || n == 0 {
        return CMat::zeros(n, 0);
    }
    let svd = columns.clone().svd(true, false);
    let u = svd.u.expect("requested left singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = tol.rank_of(&sorted).rank;
    let mut out = CMat::zeros(n, rank);
    for (dst, &src) in order[..rank].iter().enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `q` inside `C^n`.
pub fn orthogonal_complement(q: &CMat) -> CMat {
    let n = q.nrows();
    let k = q.ncols();
    if k == 0 {
        return CMat::identity(n, n);
    }
    if k >= n {
        return CMat::zeros(n, 0);
    }
    let proj = CMat::identity(n, n) - q * q.adjoint();
    let (values, vectors) = hermitian_eigen(&proj);
    let keep = values.iter().filter(|&&v| v > 0.5).count();
    vectors.columns(0, keep).into_owned()
}
