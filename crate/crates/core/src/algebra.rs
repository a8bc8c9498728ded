//! Finite-dimensional C*-algebras modelled as block-diagonal subalgebras of a
//! full matrix algebra, and their elements.
//!
//! An [`Algebra`] is either a *leaf* `M_{n_1} ⊕ … ⊕ M_{n_l}` whose blocks sit
//! contiguously on the diagonal, or a tensor product of leaves. In a product
//! the ambient basis is the Kronecker basis (first factor most significant),
//! so a block `(j_1, …, j_r)` occupies a generally non-contiguous index set.
//! Blocks of a product are ordered lexicographically in the factor blocks.
//!
//! Every [`Operator`] stores its full ambient matrix, which is zero outside
//! the blocks of its algebra.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat, CVec, Tolerance, C64, ONE, ZERO};

#[derive(Debug)]
struct AlgebraData {
    ambient: usize,
    blocks: Vec<Vec<usize>>,
    /// Leaf factors of a product; empty for a leaf.
    factors: Vec<Algebra>,
    /// Ambient (row, col) positions of the matrix units, block by block.
    entries: Vec<(usize, usize)>,
    label: String,
}

/// A finite-dimensional C*-algebra with a fixed block-diagonal embedding.
#[derive(Clone)]
pub struct Algebra(Arc<AlgebraData>);

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algebra({})", self.0.label)
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.label)
    }
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.ambient == other.0.ambient
                && self.0.blocks == other.0.blocks
                && self.factor_dims() == other.factor_dims())
    }
}

impl Eq for Algebra {}

fn leaf_label(dims: &[usize]) -> String {
    dims.iter()
        .map(|n| format!("M{n}"))
        .collect::<Vec<_>>()
        .join("+")
}

fn entries_of(blocks: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut entries = Vec::new();
    for block in blocks {
        for &r in block {
            for &c in block {
                entries.push((r, c));
            }
        }
    }
    entries
}

impl Algebra {
    /// `M_{n_1} ⊕ … ⊕ M_{n_l}` with blocks placed contiguously.
    pub fn new(block_dims: &[usize]) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        if let Some(bad) = block_dims.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidAlgebra(format!("block of size {bad}")));
        }
        let mut blocks = Vec::with_capacity(block_dims.len());
        let mut offset = 0;
        for &n in block_dims {
            blocks.push((offset..offset + n).collect());
            offset += n;
        }
        let entries = entries_of(&blocks);
        Ok(Self(Arc::new(AlgebraData {
            ambient: offset,
            blocks,
            factors: Vec::new(),
            entries,
            label: leaf_label(block_dims),
        })))
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    /// The abelian algebra `C^n`.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(&vec![1; n])
    }

    /// Replaces the display label.
    pub fn with_label(&self, label: impl Into<String>) -> Self {
        Self(Arc::new(AlgebraData {
            ambient: self.0.ambient,
            blocks: self.0.blocks.clone(),
            factors: self.0.factors.clone(),
            entries: self.0.entries.clone(),
            label: label.into(),
        }))
    }

    /// Tensor product of several algebras. Nested products are flattened.
    pub fn tensor_all(parts: &[&Algebra]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidAlgebra("empty tensor product".into()));
        }
        let leaves: Vec<Algebra> = parts.iter().flat_map(|a| a.factors()).collect();
        if leaves.len() == 1 {
            return Ok(leaves[0].clone());
        }
        let dims: Vec<usize> = leaves.iter().map(|l| l.total_dim()).collect();
        let ambient = dims.iter().product();
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new()];
        let mut stride_dims = Vec::new();
        for (leaf, &d) in leaves.iter().zip(&dims) {
            let mut next = Vec::new();
            for prefix in &blocks {
                for leaf_block in &leaf.0.blocks {
                    let mut merged = Vec::new();
                    if prefix.is_empty() && stride_dims.is_empty() {
                        merged.extend(leaf_block.iter().cloned());
                    } else {
                        for &p in prefix {
                            for &q in leaf_block {
                                merged.push(p * d + q);
                            }
                        }
                    }
                    next.push(merged);
                }
            }
            blocks = next;
            stride_dims.push(d);
        }
        let entries = entries_of(&blocks);
        let label = leaves
            .iter()
            .map(|l| format!("({})", l.0.label))
            .collect::<Vec<_>>()
            .join("x");
        Ok(Self(Arc::new(AlgebraData {
            ambient,
            blocks,
            factors: leaves,
            entries,
            label,
        })))
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Algebra) -> Self {
        Self::tensor_all(&[self, other]).expect("two factors")
    }

    /// Leaf factors; a leaf returns itself.
    pub fn factors(&self) -> Vec<Algebra> {
        if self.0.factors.is_empty() {
            vec![self.clone()]
        } else {
            self.0.factors.clone()
        }
    }

    pub fn num_factors(&self) -> usize {
        self.0.factors.len().max(1)
    }

    fn factor_dims(&self) -> Vec<usize> {
        self.factors().iter().map(|f| f.total_dim()).collect()
    }

    pub fn is_leaf(&self) -> bool {
        self.0.factors.is_empty()
    }

    /// Block sizes `n_j`.
    pub fn block_dims(&self) -> Vec<usize> {
        self.0.blocks.iter().map(Vec::len).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.0.blocks.len()
    }

    /// Ambient indices occupied by block `j`.
    pub fn block_indices(&self, j: usize) -> &[usize] {
        &self.0.blocks[j]
    }

    /// `N = Σ n_j`, the size of the ambient matrices.
    pub fn total_dim(&self) -> usize {
        self.0.ambient
    }

    /// Complex dimension `Σ n_j²`.
    pub fn dim(&self) -> usize {
        self.0.entries.len()
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    /// Matrix-unit coordinate positions, in the order used by [`Operator::coords`].
    pub fn entries(&self) -> &[(usize, usize)] {
        &self.0.entries
    }

    /// Block containing ambient index `i`.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        self.0.blocks.iter().position(|b| b.contains(&i))
    }

    /// True when `(r, c)` lies inside a block.
    pub fn contains_entry(&self, r: usize, c: usize) -> bool {
        match self.block_of(r) {
            Some(b) => self.0.blocks[b].contains(&c),
            None => false,
        }
    }

    /// Mask of in-block entries.
    fn mask(&self) -> Vec<bool> {
        let n = self.0.ambient;
        let mut mask = vec![false; n * n];
        for &(r, c) in &self.0.entries {
            mask[r * n + c] = true;
        }
        mask
    }

    pub fn identity(&self) -> Operator {
        Operator {
            algebra: self.clone(),
            matrix: CMat::identity(self.0.ambient, self.0.ambient),
        }
    }

    pub fn zero(&self) -> Operator {
        Operator {
            algebra: self.clone(),
            matrix: CMat::zeros(self.0.ambient, self.0.ambient),
        }
    }

    /// The matrix unit `|r><c|`; errors when it falls outside every block.
    pub fn unit(&self, r: usize, c: usize) -> Result<Operator> {
        let n = self.0.ambient;
        if r >= n || c >= n || !self.contains_entry(r, c) {
            return Err(Error::Shape(format!(
                "e_({r},{c}) is not an element of {}",
                self.0.label
            )));
        }
        let mut m = CMat::zeros(n, n);
        m[(r, c)] = ONE;
        Ok(Operator {
            algebra: self.clone(),
            matrix: m,
        })
    }

    /// Orthonormal basis of self-adjoint elements, block by block: diagonal
    /// units first, then `(e_kl + e_lk)/√2` and `i(e_lk − e_kl)/√2` for `k < l`.
    pub fn hermitian_basis(&self) -> Vec<Operator> {
        let n = self.0.ambient;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(self.dim());
        for block in &self.0.blocks {
            for &k in block {
                let mut m = CMat::zeros(n, n);
                m[(k, k)] = ONE;
                out.push(Operator::raw(self.clone(), m));
            }
            for (a, &k) in block.iter().enumerate() {
                for &l in &block[a + 1..] {
                    let mut sym = CMat::zeros(n, n);
                    sym[(k, l)] = C64::new(s, 0.0);
                    sym[(l, k)] = C64::new(s, 0.0);
                    out.push(Operator::raw(self.clone(), sym));
                    let mut asym = CMat::zeros(n, n);
                    asym[(k, l)] = C64::new(0.0, -s);
                    asym[(l, k)] = C64::new(0.0, s);
                    out.push(Operator::raw(self.clone(), asym));
                }
            }
        }
        out
    }
}

/// An element of an [`Algebra`].
#[derive(Clone, Debug)]
pub struct Operator {
    algebra: Algebra,
    matrix: CMat,
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.matrix == other.matrix
    }
}

impl Operator {
    pub(crate) fn raw(algebra: Algebra, matrix: CMat) -> Self {
        debug_assert_eq!(matrix.shape(), (algebra.total_dim(), algebra.total_dim()));
        Self { algebra, matrix }
    }

    /// Wraps an ambient matrix; it must vanish outside the blocks.
    pub fn new(algebra: &Algebra, matrix: CMat) -> Result<Self> {
        let n = algebra.total_dim();
        if matrix.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "expected {n}x{n} matrix for {}, got {:?}",
                algebra,
                matrix.shape()
            )));
        }
        let mask = algebra.mask();
        let mut off = 0.0;
        for r in 0..n {
            for c in 0..n {
                if !mask[r * n + c] {
                    off += matrix[(r, c)].norm_sqr();
                }
            }
        }
        let scale = matrix.norm().max(1.0);
        if off.sqrt() > 1e-10 * scale {
            return Err(Error::Shape(format!(
                "matrix has off-block weight {:.3e} for {}",
                off.sqrt(),
                algebra
            )));
        }
        Ok(cond_expectation(&matrix, algebra).expect("shape checked"))
    }

    /// Builds an operator from its diagonal blocks.
    pub fn from_blocks(algebra: &Algebra, blocks: &[CMat]) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::Shape(format!(
                "{} blocks given for {}",
                blocks.len(),
                algebra
            )));
        }
        let n = algebra.total_dim();
        let mut m = CMat::zeros(n, n);
        for (j, block) in blocks.iter().enumerate() {
            let idx = algebra.block_indices(j);
            if block.shape() != (idx.len(), idx.len()) {
                return Err(Error::Shape(format!(
                    "block {j} should be {0}x{0}, got {1:?}",
                    idx.len(),
                    block.shape()
                )));
            }
            for (a, &r) in idx.iter().enumerate() {
                for (b, &c) in idx.iter().enumerate() {
                    m[(r, c)] = block[(a, b)];
                }
            }
        }
        Ok(Self::raw(algebra.clone(), m))
    }

    /// Rebuilds an operator from matrix-unit coordinates.
    pub fn from_coords(algebra: &Algebra, coords: &CVec) -> Result<Self> {
        if coords.len() != algebra.dim() {
            return Err(Error::Shape(format!(
                "{} coordinates given for an algebra of dimension {}",
                coords.len(),
                algebra.dim()
            )));
        }
        let n = algebra.total_dim();
        let mut m = CMat::zeros(n, n);
        for (v, &(r, c)) in coords.iter().zip(algebra.entries()) {
            m[(r, c)] = *v;
        }
        Ok(Self::raw(algebra.clone(), m))
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    /// The full ambient matrix.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Diagonal block `j` as an `n_j × n_j` matrix.
    pub fn block(&self, j: usize) -> CMat {
        let idx = self.algebra.block_indices(j);
        CMat::from_fn(idx.len(), idx.len(), |a, b| self.matrix[(idx[a], idx[b])])
    }

    pub fn blocks(&self) -> Vec<CMat> {
        (0..self.algebra.num_blocks()).map(|j| self.block(j)).collect()
    }

    /// Coordinates with respect to the matrix units (an HS-orthonormal basis).
    pub fn coords(&self) -> CVec {
        CVec::from_iterator(
            self.algebra.dim(),
            self.algebra.entries().iter().map(|&(r, c)| self.matrix[(r, c)]),
        )
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Hilbert-Schmidt norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn adjoint(&self) -> Self {
        Self::raw(self.algebra.clone(), self.matrix.adjoint())
    }

    /// Transpose in the fixed basis.
    pub fn transpose(&self) -> Self {
        Self::raw(self.algebra.clone(), self.matrix.transpose())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::raw(self.algebra.clone(), self.matrix.map(|x| x * s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    fn check_same(&self, other: &Operator, what: &str) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::Shape(format!(
                "{what}: {} vs {}",
                self.algebra, other.algebra
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Operator) -> Result<Self> {
        self.check_same(other, "add")?;
        Ok(Self::raw(self.algebra.clone(), &self.matrix + &other.matrix))
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Self> {
        self.check_same(other, "sub")?;
        Ok(Self::raw(self.algebra.clone(), &self.matrix - &other.matrix))
    }

    /// Algebra product `self · other`.
    pub fn try_mul(&self, other: &Operator) -> Result<Self> {
        self.check_same(other, "mul")?;
        Ok(Self::raw(self.algebra.clone(), &self.matrix * &other.matrix))
    }

    /// `a ⊗ b` on the tensor product algebra.
    pub fn kron(&self, other: &Operator) -> Self {
        Self::raw(
            self.algebra.tensor(&other.algebra),
            self.matrix.kronecker(&other.matrix),
        )
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.check_same(other, "commutator")?;
        Ok(Self::raw(
            self.algebra.clone(),
            &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        ))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).norm() <= tol * self.norm().max(1.0)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum().last().cloned().unwrap_or(0.0)
    }

    /// Eigenvalues of the Hermitian part, descending, over all blocks.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .blocks()
            .iter()
            .flat_map(|b| hermitian_eigen(b).0)
            .collect();
        all.sort_by(|a, b| b.total_cmp(a));
        all
    }

    /// Positive semidefinite within `tol` relative to the largest eigenvalue.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let spec = self.spectrum();
        let top = spec.first().cloned().unwrap_or(0.0).abs().max(
            spec.last().cloned().unwrap_or(0.0).abs(),
        );
        spec.last().is_none_or(|&m| m >= -tol * top.max(f64::MIN_POSITIVE))
    }

    /// Applies `f` to the eigenvalues of each block of the Hermitian part.
    /// Eigenvalues at most `cutoff` are sent to `zero_value`.
    pub(crate) fn spectral_map(
        &self,
        cutoff: f64,
        f: impl Fn(f64) -> f64,
        zero_value: f64,
    ) -> Self {
        let mut blocks = Vec::with_capacity(self.algebra.num_blocks());
        for b in self.blocks() {
            let (vals, vecs) = hermitian_eigen(&b);
            let mut out = CMat::zeros(b.nrows(), b.ncols());
            for (k, &v) in vals.iter().enumerate() {
                let fv = if v > cutoff { f(v) } else { zero_value };
                if fv != 0.0 {
                    let col = vecs.column(k);
                    out += (col * col.adjoint()).scale(fv);
                }
            }
            blocks.push(out);
        }
        Self::from_blocks(&self.algebra, &blocks).expect("same block shapes")
    }

    /// Orthonormal eigenvectors of the support, block by block.
    /// Each entry is `(block, eigenvalue, ambient vector)`.
    pub(crate) fn support_vectors(&self, tol: &Tolerance) -> Vec<(usize, f64, CVec)> {
        let top = self.spectrum().first().cloned().unwrap_or(0.0);
        let n = self.algebra.total_dim();
        let mut out = Vec::new();
        if top <= 0.0 {
            return out;
        }
        for j in 0..self.algebra.num_blocks() {
            let idx = self.algebra.block_indices(j);
            let (vals, vecs) = hermitian_eigen(&self.block(j));
            for (k, &v) in vals.iter().enumerate() {
                if v > tol.tol * top {
                    let mut amb = CVec::zeros(n);
                    for (a, &r) in idx.iter().enumerate() {
                        amb[r] = vecs[(a, k)];
                    }
                    out.push((j, v, amb));
                }
            }
        }
        out
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operators from different algebras")
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operators from different algebras")
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operators from different algebras")
    }
}

/// `Σ_j s_j x s_j`: compression of an ambient matrix onto the blocks.
pub fn cond_expectation(x: &CMat, target: &Algebra) -> Result<Operator> {
    let n = target.total_dim();
    if x.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "expected {n}x{n} matrix, got {:?}",
            x.shape()
        )));
    }
    let mut m = CMat::zeros(n, n);
    for &(r, c) in target.entries() {
        m[(r, c)] = x[(r, c)];
    }
    Ok(Operator::raw(target.clone(), m))
}

/// `Tr(a* b)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    a.check_same(b, "hs_inner")?;
    Ok(a
        .matrix
        .iter()
        .zip(b.matrix.iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Traces out leaf factor `index` of a product algebra.
pub fn partial_trace(x: &Operator, index: usize) -> Result<Operator> {
    let leaves = x.algebra.factors();
    if leaves.len() < 2 || index >= leaves.len() {
        return Err(Error::Index {
            index,
            factors: leaves.len(),
        });
    }
    let dims: Vec<usize> = leaves.iter().map(|l| l.total_dim()).collect();
    let inner: usize = dims[index + 1..].iter().product();
    let d = dims[index];
    let outer: usize = dims[..index].iter().product();
    let rest: Vec<&Algebra> = leaves
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != index)
        .map(|(_, l)| l)
        .collect();
    let target = Algebra::tensor_all(&rest)?;
    let m = outer * inner;
    let mut out = CMat::zeros(m, m);
    let src = &x.matrix;
    for o1 in 0..outer {
        for i1 in 0..inner {
            let r = o1 * inner + i1;
            for o2 in 0..outer {
                for i2 in 0..inner {
                    let c = o2 * inner + i2;
                    let mut acc = ZERO;
                    for t in 0..d {
                        acc += src[((o1 * d + t) * inner + i1, (o2 * d + t) * inner + i2)];
                    }
                    out[(r, c)] = acc;
                }
            }
        }
    }
    cond_expectation(&out, &target)
}

/// Traces out the first `count` leaf factors.
pub fn trace_leading(x: &Operator, count: usize) -> Result<Operator> {
    let mut cur = x.clone();
    for _ in 0..count {
        cur = partial_trace(&cur, 0)?;
    }
    Ok(cur)
}

/// Traces out the last `count` leaf factors.
pub fn trace_trailing(x: &Operator, count: usize) -> Result<Operator> {
    let mut cur = x.clone();
    for _ in 0..count {
        let last = cur.algebra.num_factors() - 1;
        cur = partial_trace(&cur, last)?;
    }
    Ok(cur)
}

/// Blockwise transpose in the fixed basis.
pub fn transpose(a: &Operator) -> Operator {
    a.transpose()
}

/// Projection onto the range of a positive semidefinite `a`.
pub fn support_projection(a: &Operator, tol: &Tolerance) -> Result<Operator> {
    ensure_psd(a, tol)?;
    let top = a.spectrum().first().cloned().unwrap_or(0.0).max(0.0);
    Ok(a.spectral_map(tol.tol * top, |_| 1.0, 0.0))
}

/// Positive square root and its pseudo-inverse, the inverse taken on the support.
pub fn psd_sqrt_pinv(a: &Operator, tol: &Tolerance) -> Result<(Operator, Operator)> {
    ensure_psd(a, tol)?;
    let top = a.spectrum().first().cloned().unwrap_or(0.0).max(0.0);
    let cutoff = tol.tol * top;
    let sqrt = a.spectral_map(cutoff, f64::sqrt, 0.0);
    let pinv = a.spectral_map(cutoff, |v| 1.0 / v.sqrt(), 0.0);
    Ok((sqrt, pinv))
}

pub(crate) fn ensure_psd(a: &Operator, tol: &Tolerance) -> Result<()> {
    if a.is_psd(tol.tol) {
        Ok(())
    } else {
        Err(Error::NotPositive {
            min_eigenvalue: a.min_eigenvalue(),
        })
    }
}

/// Rank of the support, counted per block.
pub(crate) fn support_block_ranks(a: &Operator, tol: &Tolerance) -> Vec<usize> {
    let mut ranks = vec![0; a.algebra.num_blocks()];
    for (j, _, _) in a.support_vectors(tol) {
        ranks[j] += 1;
    }
    ranks
}
