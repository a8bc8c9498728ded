//! Completely positive maps between block algebras, stored by their Choi
//! matrices `X_Φ = Σ_{ij} Φ(|i><j|) ⊗ |i><j| ∈ B ⊗ A` (output factor first).

use std::sync::OnceLock;

use crate::algebra::{
    cond_expectation, ensure_psd, psd_sqrt_pinv, support_projection, trace_leading, Algebra,
    Operator,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat, CVec, Tolerance, C64, ZERO};

/// One Kraus operator, stored as an ambient `K × H` matrix that is
/// nonzero only on rows of output block `out_block` and columns of input
/// block `in_block`.
#[derive(Clone, Debug)]
pub struct KrausOperator {
    pub matrix: CMat,
    pub out_block: usize,
    pub in_block: usize,
}

/// A block-tagged family of Kraus operators.
#[derive(Clone, Debug)]
pub struct KrausSet {
    input: Algebra,
    output: Algebra,
    ops: Vec<KrausOperator>,
    minimal: bool,
}

impl KrausSet {
    /// Splits arbitrary ambient operators into their block components
    /// `s_i V s_j`. The resulting set represents `E_B ∘ (Σ V·V*) ∘ E_A`.
    pub fn from_matrices(input: &Algebra, output: &Algebra, ops: &[CMat]) -> Result<Self> {
        let (m, n) = (output.total_dim(), input.total_dim());
        let mut out = Vec::new();
        for v in ops {
            if v.shape() != (m, n) {
                return Err(Error::Shape(format!(
                    "Kraus operator {:?} does not map {} into {}",
                    v.shape(),
                    input,
                    output
                )));
            }
            for i in 0..output.num_blocks() {
                for j in 0..input.num_blocks() {
                    let mut part = CMat::zeros(m, n);
                    let mut weight = 0.0;
                    for &r in output.block_indices(i) {
                        for &c in input.block_indices(j) {
                            part[(r, c)] = v[(r, c)];
                            weight += v[(r, c)].norm_sqr();
                        }
                    }
                    if weight > 0.0 {
                        out.push(KrausOperator {
                            matrix: part,
                            out_block: i,
                            in_block: j,
                        });
                    }
                }
            }
        }
        Ok(Self {
            input: input.clone(),
            output: output.clone(),
            ops: out,
            minimal: false,
        })
    }

    pub fn input(&self) -> &Algebra {
        &self.input
    }

    pub fn output(&self) -> &Algebra {
        &self.output
    }

    pub fn operators(&self) -> &[KrausOperator] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Whether the vectorizations are known to be linearly independent.
    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    /// Block pairs `(i, j)` carrying at least one operator, lexicographic.
    pub fn block_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> =
            self.ops.iter().map(|k| (k.out_block, k.in_block)).collect();
        pairs.sort();
        pairs.dedup();
        pairs
    }

    /// Indices `I(i, j)`.
    pub fn index_set(&self, out_block: usize, in_block: usize) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, k)| k.out_block == out_block && k.in_block == in_block)
            .map(|(idx, _)| idx)
            .collect()
    }

    /// The map `H_j → K_i` of operator `k` as a rectangular matrix.
    pub fn compressed(&self, k: usize) -> CMat {
        let op = &self.ops[k];
        let rows = self.output.block_indices(op.out_block);
        let cols = self.input.block_indices(op.in_block);
        CMat::from_fn(rows.len(), cols.len(), |a, b| op.matrix[(rows[a], cols[b])])
    }

    /// `|v_k>` in `K ⊗ H`, via `|x>⊗|y> ↦ |x><y|`.
    pub fn vectorization(&self, k: usize) -> CVec {
        vectorize(&self.ops[k].matrix)
    }

    pub(crate) fn push_ordered(&mut self, op: KrausOperator) {
        self.ops.push(op);
    }
}

/// Row-major vectorization `V ↦ Σ V_{rm} |r>⊗|m>`.
pub fn vectorize(v: &CMat) -> CVec {
    let (m, n) = v.shape();
    CVec::from_fn(m * n, |idx, _| v[(idx / n, idx % n)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |r, c| v[r * cols + c])
}

/// A completely positive map `A → B`.
#[derive(Debug)]
pub struct CpMap {
    input: Algebra,
    output: Algebra,
    choi: Operator,
    tol: Tolerance,
    kraus: OnceLock<KrausSet>,
}

impl Clone for CpMap {
    fn clone(&self) -> Self {
        let kraus = OnceLock::new();
        if let Some(k) = self.kraus.get() {
            let _ = kraus.set(k.clone());
        }
        Self {
            input: self.input.clone(),
            output: self.output.clone(),
            choi: self.choi.clone(),
            tol: self.tol,
            kraus,
        }
    }
}

impl CpMap {
    /// Wraps a Choi matrix on `output ⊗ input`; it must be PSD within tol.
    pub fn from_choi(
        choi: &Operator,
        input: &Algebra,
        output: &Algebra,
        tol: &Tolerance,
    ) -> Result<Self> {
        let expected = output.tensor(input);
        if choi.algebra() != &expected {
            return Err(Error::Shape(format!(
                "Choi matrix lives on {}, expected {}",
                choi.algebra(),
                expected
            )));
        }
        ensure_psd(choi, tol)?;
        let herm = Operator::new(&expected, crate::linalg::hermitian_part(choi.matrix()))?;
        Ok(Self {
            input: input.clone(),
            output: output.clone(),
            choi: herm,
            tol: *tol,
            kraus: OnceLock::new(),
        })
    }

    fn from_choi_unchecked(choi: Operator, input: &Algebra, output: &Algebra, tol: &Tolerance) -> Self {
        Self {
            input: input.clone(),
            output: output.clone(),
            choi,
            tol: *tol,
            kraus: OnceLock::new(),
        }
    }

    /// The map `a ↦ Σ V a V*` built from ambient Kraus matrices.
    pub fn from_kraus_matrices(
        input: &Algebra,
        output: &Algebra,
        ops: &[CMat],
        tol: &Tolerance,
    ) -> Result<Self> {
        let set = KrausSet::from_matrices(input, output, ops)?;
        let choi = choi_from_kraus(&set);
        Ok(Self::from_choi_unchecked(choi, input, output, tol))
    }

    pub fn from_kraus(set: &KrausSet, tol: &Tolerance) -> Self {
        Self::from_choi_unchecked(choi_from_kraus(set), set.input(), set.output(), tol)
    }

    /// The identity channel on `alg`.
    pub fn identity(alg: &Algebra, tol: &Tolerance) -> Self {
        let n = alg.total_dim();
        Self::from_kraus_matrices(alg, alg, &[CMat::identity(n, n)], tol).expect("square")
    }

    /// The partial trace over the leading `count` factors of `alg`.
    pub fn partial_trace_map(alg: &Algebra, count: usize, tol: &Tolerance) -> Result<Self> {
        let leaves = alg.factors();
        if count == 0 || count >= leaves.len() {
            return Err(Error::Index {
                index: count,
                factors: leaves.len(),
            });
        }
        let traced: Vec<&Algebra> = leaves[..count].iter().collect();
        let kept: Vec<&Algebra> = leaves[count..].iter().collect();
        let traced = Algebra::tensor_all(&traced)?;
        let kept = Algebra::tensor_all(&kept)?;
        let (dt, dk) = (traced.total_dim(), kept.total_dim());
        let ops: Vec<CMat> = (0..dt)
            .map(|t| {
                let mut v = CMat::zeros(dk, dt * dk);
                for r in 0..dk {
                    v[(r, t * dk + r)] = C64::new(1.0, 0.0);
                }
                v
            })
            .collect();
        Self::from_kraus_matrices(alg, &kept, &ops, tol)
    }

    /// The trace functional `A → C`.
    pub fn trace_map(alg: &Algebra, tol: &Tolerance) -> Self {
        let c = Algebra::full(1).expect("C");
        let n = alg.total_dim();
        let ops: Vec<CMat> = (0..n)
            .map(|i| {
                let mut v = CMat::zeros(1, n);
                v[(0, i)] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::from_kraus_matrices(alg, &c, &ops, tol).expect("row vectors")
    }

    pub fn input(&self) -> &Algebra {
        &self.input
    }

    pub fn output(&self) -> &Algebra {
        &self.output
    }

    pub fn choi(&self) -> &Operator {
        &self.choi
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// `Φ(a) = Tr_A[(I_B ⊗ a^T) X_Φ]`.
    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if a.algebra() != &self.input {
            return Err(Error::Shape(format!(
                "argument in {}, map defined on {}",
                a.algebra(),
                self.input
            )));
        }
        Ok(apply_choi(self.choi.matrix(), &self.input, &self.output, a.matrix()))
    }

    /// `Tr_B X_Φ = (Φ*(I_B))^T`.
    pub fn output_marginal(&self) -> Operator {
        trace_leading(&self.choi, self.output.num_factors()).expect("product algebra")
    }

    /// Whether `Tr Φ(a) = Tr a` for all `a`.
    pub fn trace_residual(&self) -> f64 {
        (self.output_marginal().matrix() - CMat::identity(self.input.total_dim(), self.input.total_dim()))
            .norm()
    }

    pub fn is_channel(&self) -> bool {
        self.trace_residual() <= self.tol.band().max(1e-8)
    }

    /// Minimal Kraus representation extracted from the Choi blocks.
    ///
    /// Operators are ordered by block pair `(i, j)`, then by descending
    /// eigenvalue; the largest-magnitude entry of each is made real positive.
    pub fn minimal_kraus(&self) -> &KrausSet {
        self.kraus.get_or_init(|| minimal_kraus_of(&self.choi, &self.input, &self.output, &self.tol))
    }

    /// Kraus rank.
    pub fn kraus_rank(&self) -> usize {
        self.minimal_kraus().len()
    }

    /// The HS adjoint `Φ*: B → A`.
    pub fn adjoint_map(&self) -> CpMap {
        let (m, n) = (self.output.total_dim(), self.input.total_dim());
        let x = self.choi.matrix();
        // X_{Φ*}[(n,r),(m,s)] = conj X_Φ[(r,n),(s,m)]
        let y = CMat::from_fn(m * n, m * n, |row, col| {
            let (ia, rb) = (row / m, row % m);
            let (ja, sb) = (col / m, col % m);
            x[(rb * n + ia, sb * n + ja)].conj()
        });
        let alg = self.input.tensor(&self.output);
        let choi = cond_expectation(&y, &alg).expect("shape");
        Self::from_choi_unchecked(choi, &self.output, &self.input, &self.tol)
    }

    /// Conjugate map `Φ^C: A → D = ⊕_{ij} M_{n_ij}` built from the minimal Kraus set.
    pub fn conjugate_map(&self) -> Result<ConjugateMap> {
        let kraus = self.minimal_kraus();
        let pairs = kraus.block_pairs();
        if pairs.is_empty() {
            return Err(Error::Shape("the zero map has no conjugate map".into()));
        }
        let sizes: Vec<usize> = pairs.iter().map(|&(i, j)| kraus.index_set(i, j).len()).collect();
        let target = Algebra::new(&sizes)?.with_label(format!("D[{}]", sizes.iter().map(|s| format!("M{s}")).collect::<Vec<_>>().join("+")));
        let n = self.input.total_dim();
        let dd = target.total_dim();
        let mut ops = Vec::new();
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let offset = target.block_indices(p)[0];
            let idx = kraus.index_set(i, j);
            for &r in self.output.block_indices(i) {
                let mut w = CMat::zeros(dd, n);
                for (local, &k) in idx.iter().enumerate() {
                    let v = &kraus.operators()[k].matrix;
                    for c in 0..n {
                        w[(offset + local, c)] = v[(r, c)];
                    }
                }
                ops.push(w);
            }
        }
        let map = CpMap::from_kraus_matrices(&self.input, &target, &ops, &self.tol)?;
        Ok(ConjugateMap { map, pairs })
    }
}

/// Conjugate map together with the block pair behind each block of `D`.
#[derive(Clone, Debug)]
pub struct ConjugateMap {
    pub map: CpMap,
    pub pairs: Vec<(usize, usize)>,
}

pub(crate) fn apply_choi(x: &CMat, input: &Algebra, output: &Algebra, a: &CMat) -> Operator {
    let (m, n) = (output.total_dim(), input.total_dim());
    let mut out = CMat::zeros(m, m);
    for &(p, q) in input.entries() {
        let coeff = a[(p, q)];
        if coeff == ZERO {
            continue;
        }
        for &(r, s) in output.entries() {
            out[(r, s)] += coeff * x[(r * n + p, s * n + q)];
        }
    }
    Operator::new(output, out).expect("entries restricted to blocks")
}

/// `X = Σ_k |v_k><v_k|`.
pub fn choi_from_kraus(set: &KrausSet) -> Operator {
    let alg = set.output().tensor(set.input());
    let dim = alg.total_dim();
    let mut x = CMat::zeros(dim, dim);
    for k in 0..set.len() {
        let v = set.vectorization(k);
        x += &v * v.adjoint();
    }
    cond_expectation(&x, &alg).expect("shape")
}

fn minimal_kraus_of(choi: &Operator, input: &Algebra, output: &Algebra, tol: &Tolerance) -> KrausSet {
    let alg = choi.algebra();
    let (m, n) = (output.total_dim(), input.total_dim());
    let nb_in = input.num_blocks();
    let top = choi.spectrum().first().cloned().unwrap_or(0.0);
    let mut set = KrausSet {
        input: input.clone(),
        output: output.clone(),
        ops: Vec::new(),
        minimal: true,
    };
    if top <= 0.0 {
        return set;
    }
    for b in 0..alg.num_blocks() {
        let (i, j) = (b / nb_in, b % nb_in);
        let idx = alg.block_indices(b);
        let (vals, vecs) = hermitian_eigen(&choi.block(b));
        for (k, &lambda) in vals.iter().enumerate() {
            if lambda <= tol.tol * top {
                continue;
            }
            let mut v = CMat::zeros(m, n);
            let s = lambda.sqrt();
            for (a, &pos) in idx.iter().enumerate() {
                v[(pos / n, pos % n)] = vecs[(a, k)] * s;
            }
            fix_phase(&mut v);
            set.push_ordered(KrausOperator {
                matrix: v,
                out_block: i,
                in_block: j,
            });
        }
    }
    set
}

fn fix_phase(v: &mut CMat) {
    let mut best = ZERO;
    for z in v.iter() {
        if z.norm() > best.norm() + 1e-12 {
            best = *z;
        }
    }
    if best != ZERO {
        let phase = best.conj() / best.norm();
        *v = v.map(|z| z * phase);
    }
}

/// `χ_c(a) = c a c*` on the algebra of `c`.
pub fn simple_conjugation(c: &Operator, tol: &Tolerance) -> CpMap {
    let alg = c.algebra();
    CpMap::from_kraus_matrices(alg, alg, &[c.matrix().clone()], tol).expect("square")
}

/// `Ψ ∘ Φ`, computed as `(Ψ ⊗ id)(X_Φ)`.
pub fn compose(psi: &CpMap, phi: &CpMap) -> Result<CpMap> {
    if psi.input() != phi.output() {
        return Err(Error::Shape(format!(
            "cannot compose {} -> {} after {} -> {}",
            psi.input(),
            psi.output(),
            phi.input(),
            phi.output()
        )));
    }
    let (a, b, c) = (phi.input(), phi.output(), psi.output());
    let (n, m, l) = (a.total_dim(), b.total_dim(), c.total_dim());
    let x = phi.choi().matrix();
    let mut out = CMat::zeros(l * n, l * n);
    for &(p, q) in a.entries() {
        let image = CMat::from_fn(m, m, |r, s| x[(r * n + p, s * n + q)]);
        if image.norm() == 0.0 {
            continue;
        }
        let res = apply_choi(psi.choi().matrix(), b, c, &image);
        for &(r, s) in c.entries() {
            out[(r * n + p, s * n + q)] = res.matrix()[(r, s)];
        }
    }
    let alg = c.tensor(a);
    let choi = cond_expectation(&out, &alg)?;
    Ok(CpMap::from_choi_unchecked(choi, a, c, &phi.tol))
}

/// `Φ = Λ_q ∘ χ_c` with `c = (Φ*(I_B))^{1/2}`.
///
/// The corner `A_q = q A q` is realised as a block algebra through an
/// isometry `W` with `W W* = q`; `reduced` is `Λ_q ∘ Ad_W` on that algebra.
#[derive(Clone, Debug)]
pub struct MinimalDecomposition {
    pub c: Operator,
    pub c_pinv: Operator,
    pub q: Operator,
    /// Ambient `N × r` isometry onto the support of `c`.
    pub isometry: CMat,
    pub reduced_algebra: Algebra,
    /// `Λ_q` transported to `reduced_algebra`.
    pub reduced: CpMap,
    /// `Φ ∘ χ_{c⁺}` as a map on `A`; a channel on `A_q`.
    pub lambda_on_support: CpMap,
}

impl MinimalDecomposition {
    /// `G = W* c⁺`, so that `Λ'_u = G M_u G*`-style transports are `Ad_G`.
    pub fn pullback(&self) -> CMat {
        self.isometry.adjoint() * self.c_pinv.matrix()
    }

    /// `W* c`, the Kraus operator of `Ad_W* ∘ χ_c: A → A_q`.
    pub fn compression(&self) -> CMat {
        self.isometry.adjoint() * self.c.matrix()
    }

    /// `χ_c` viewed as a map into the reduced algebra.
    pub fn compression_map(&self, tol: &Tolerance) -> CpMap {
        CpMap::from_kraus_matrices(
            self.c.algebra(),
            &self.reduced_algebra,
            &[self.compression()],
            tol,
        )
        .expect("shapes")
    }
}

/// Isometry onto the range of a projection `q`, block by block, together
/// with the block algebra it identifies `q A q` with.
pub fn corner_isometry(q: &Operator) -> Result<(CMat, Algebra)> {
    let alg = q.algebra();
    let mut cols: Vec<CVec> = Vec::new();
    let mut dims = Vec::new();
    let n = alg.total_dim();
    for j in 0..alg.num_blocks() {
        let idx = alg.block_indices(j);
        let (vals, vecs) = hermitian_eigen(&q.block(j));
        let mut r = 0;
        for (k, &v) in vals.iter().enumerate() {
            if v > 0.5 {
                let mut amb = CVec::zeros(n);
                for (a, &p) in idx.iter().enumerate() {
                    amb[p] = vecs[(a, k)];
                }
                cols.push(amb);
                r += 1;
            }
        }
        if r > 0 {
            dims.push(r);
        }
    }
    if dims.is_empty() {
        return Err(Error::Shape("support projection is zero".into()));
    }
    let w = CMat::from_columns(&cols);
    let reduced = Algebra::new(&dims)?;
    Ok((w, reduced))
}

pub fn minimal_decomposition(phi: &CpMap) -> Result<MinimalDecomposition> {
    let tol = *phi.tolerance();
    let ccstar = phi.output_marginal().transpose();
    let (c, c_pinv) = psd_sqrt_pinv(&ccstar, &tol)?;
    let q = support_projection(&c, &tol)?;
    let (w, reduced_algebra) = corner_isometry(&q)?;
    decomposition_with_isometry(phi, c, c_pinv, q, w, reduced_algebra)
}

/// Same as [`minimal_decomposition`] with a caller-chosen identification of
/// the corner `q A q` (used to keep tensor structure in tester reductions).
pub fn decomposition_with_isometry(
    phi: &CpMap,
    c: Operator,
    c_pinv: Operator,
    q: Operator,
    isometry: CMat,
    reduced_algebra: Algebra,
) -> Result<MinimalDecomposition> {
    let tol = *phi.tolerance();
    let kraus = phi.minimal_kraus();
    let on_reduced: Vec<CMat> = kraus
        .operators()
        .iter()
        .map(|k| &k.matrix * c_pinv.matrix() * &isometry)
        .collect();
    let on_a: Vec<CMat> = kraus
        .operators()
        .iter()
        .map(|k| &k.matrix * c_pinv.matrix())
        .collect();
    let reduced = CpMap::from_kraus_matrices(&reduced_algebra, phi.output(), &on_reduced, &tol)?;
    let lambda_on_support = CpMap::from_kraus_matrices(phi.input(), phi.output(), &on_a, &tol)?;
    Ok(MinimalDecomposition {
        c,
        c_pinv,
        q,
        isometry,
        reduced_algebra,
        reduced,
        lambda_on_support,
    })
}

/// Maximum distance between two maps, measured on their Choi matrices.
pub fn choi_distance(a: &CpMap, b: &CpMap) -> f64 {
    (a.choi().matrix() - b.choi().matrix()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::hs_inner;
    use crate::linalg::ONE;

    fn re(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn t() -> Tolerance {
        Tolerance::default()
    }

    fn m2() -> Algebra {
        Algebra::full(2).unwrap()
    }

    fn psi_projector() -> CMat {
        let mut psi = CVec::zeros(4);
        psi[0] = ONE;
        psi[3] = ONE;
        &psi * psi.adjoint()
    }

    fn dephasing() -> CpMap {
        let a = m2();
        let e11 = a.unit(0, 0).unwrap().into_matrix();
        let e22 = a.unit(1, 1).unwrap().into_matrix();
        CpMap::from_kraus_matrices(&a, &a, &[e11, e22], &t()).unwrap()
    }

    fn sample_ops(a: &Algebra) -> Vec<Operator> {
        let sx = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        vec![
            a.identity(),
            a.unit(0, 0).unwrap(),
            Operator::new(a, sx).unwrap(),
            Operator::new(
                a,
                CMat::from_row_slice(2, 2, &[re(0.3), C64::new(0.1, 2.0), re(-1.0), re(0.7)]),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn identity_from_maximally_entangled_choi() {
        let a = m2();
        let p = a.tensor(&a);
        let x = Operator::new(&p, psi_projector()).unwrap();
        let id = CpMap::from_choi(&x, &a, &a, &t()).unwrap();
        for op in sample_ops(&a) {
            assert!((id.apply(&op).unwrap().matrix() - op.matrix()).norm() < 1e-12);
        }
        assert_eq!(id.kraus_rank(), 1);
        let k = &id.minimal_kraus().operators()[0].matrix;
        assert!((k - CMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn trace_and_replacement_maps() {
        let a = m2();
        let c = Algebra::full(1).unwrap();
        let tr = CpMap::from_choi(&c.tensor(&a).identity(), &a, &c, &t()).unwrap();
        for op in sample_ops(&a) {
            assert!((tr.apply(&op).unwrap().matrix()[(0, 0)] - op.trace()).norm() < 1e-12);
        }
        let rho = Operator::new(
            &a,
            CMat::from_row_slice(2, 2, &[re(0.75), C64::new(0.1, 0.2), C64::new(0.1, -0.2), re(0.25)]),
        )
        .unwrap();
        let x = rho.kron(&a.identity());
        let replace = CpMap::from_choi(&x, &a, &a, &t()).unwrap();
        for op in sample_ops(&a) {
            let want = rho.matrix() * op.trace();
            assert!((replace.apply(&op).unwrap().matrix() - want).norm() < 1e-12);
        }
        assert!(matches!(
            CpMap::from_choi(&x.scale_real(-1.0), &a, &a, &t()),
            Err(Error::NotPositive { .. })
        ));
        assert!(replace.apply(&c.identity()).is_err());
    }

    #[test]
    fn choi_from_kraus_examples() {
        let a = m2();
        let id = KrausSet::from_matrices(&a, &a, &[CMat::identity(2, 2)]).unwrap();
        assert!((choi_from_kraus(&id).matrix() - psi_projector()).norm() < 1e-14);
        let x = dephasing().choi().clone();
        let want = CMat::from_diagonal(&CVec::from_vec(vec![re(1.0), re(0.0), re(0.0), re(1.0)]));
        assert!((x.matrix() - want).norm() < 1e-14);
        let empty = KrausSet::from_matrices(&a, &a, &[]).unwrap();
        assert_eq!(choi_from_kraus(&empty).norm(), 0.0);
    }

    #[test]
    fn minimal_kraus_examples() {
        let a = m2();
        let depol = CpMap::from_choi(&a.identity().scale_real(0.5).kron(&a.identity()), &a, &a, &t()).unwrap();
        assert_eq!(depol.kraus_rank(), 4);
        let deph = dephasing();
        let k = deph.minimal_kraus();
        assert_eq!(k.len(), 2);
        let mut found = [false; 2];
        for op in k.operators() {
            let e11 = (&op.matrix - a.unit(0, 0).unwrap().matrix()).norm() < 1e-12;
            let e22 = (&op.matrix - a.unit(1, 1).unwrap().matrix()).norm() < 1e-12;
            found[0] |= e11;
            found[1] |= e22;
        }
        assert_eq!(found, [true, true]);
        assert!(k.is_minimal());
    }

    #[test]
    fn adjoint_examples() {
        let a = m2();
        let id = CpMap::identity(&a, &t());
        assert!(choi_distance(&id.adjoint_map(), &id) < 1e-14);
        let rho = Operator::new(
            &a,
            CMat::from_row_slice(2, 2, &[re(0.6), C64::new(0.2, 0.1), C64::new(0.2, -0.1), re(0.4)]),
        )
        .unwrap();
        let replace = CpMap::from_choi(&rho.kron(&a.identity()), &a, &a, &t()).unwrap();
        let adj = replace.adjoint_map();
        for b in sample_ops(&a) {
            let want = CMat::identity(2, 2) * (rho.matrix() * b.matrix()).trace();
            assert!((adj.apply(&b).unwrap().matrix() - want).norm() < 1e-12);
        }
        // adjoint of a channel is unital
        let deph = dephasing();
        let unit = deph.adjoint_map().apply(&a.identity()).unwrap();
        assert!((unit.matrix() - CMat::identity(2, 2)).norm() < 1e-12);
        // HS duality
        for x in sample_ops(&a) {
            for y in sample_ops(&a) {
                let lhs = hs_inner(&adj.apply(&y).unwrap(), &x).unwrap();
                let rhs = hs_inner(&y, &replace.apply(&x).unwrap()).unwrap();
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn simple_conjugation_examples() {
        let a = m2();
        let id = simple_conjugation(&a.identity(), &t());
        assert!(choi_distance(&id, &CpMap::identity(&a, &t())) < 1e-14);
        let p = a.unit(0, 0).unwrap();
        let comp = simple_conjugation(&p, &t());
        let x = sample_ops(&a)[3].clone();
        let img = comp.apply(&x).unwrap();
        assert_eq!(img.matrix()[(0, 0)], x.matrix()[(0, 0)]);
        assert!(img.matrix()[(1, 1)].norm() < 1e-15);
        // d from the diagonal example: lambda = (1/2,1/2), mu = (1/3,2/3)
        let d = Operator::new(
            &a,
            CMat::from_diagonal(&CVec::from_vec(vec![re(2.0 / 3.0), re(4.0 / 3.0)])),
        )
        .unwrap();
        let (sqrt_d, _) = psd_sqrt_pinv(&d, &t()).unwrap();
        let chi = simple_conjugation(&sqrt_d, &t());
        let rho = Operator::new(
            &a,
            CMat::from_row_slice(2, 2, &[re(0.5), C64::new(0.3, 0.1), C64::new(0.3, -0.1), re(0.5)]),
        )
        .unwrap();
        let out = chi.apply(&rho).unwrap();
        assert!((out.matrix()[(0, 0)] - re(1.0 / 3.0)).norm() < 1e-12);
        assert!((out.matrix()[(1, 1)] - re(2.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn conjugate_map_examples() {
        let a = m2();
        let id = CpMap::identity(&a, &t());
        let conj = id.conjugate_map().unwrap();
        assert_eq!(conj.map.output().block_dims(), vec![1]);
        for x in sample_ops(&a) {
            assert!((conj.map.apply(&x).unwrap().matrix()[(0, 0)] - x.trace()).norm() < 1e-12);
        }
        let deph = dephasing().conjugate_map().unwrap();
        assert_eq!(deph.map.output().block_dims(), vec![2]);
        let x = sample_ops(&a)[3].clone();
        let img = deph.map.apply(&x).unwrap();
        let m = img.matrix();
        let diag = [m[(0, 0)], m[(1, 1)]];
        let mut want = [x.matrix()[(0, 0)], x.matrix()[(1, 1)]];
        if (diag[0] - want[0]).norm() > 1e-9 {
            want.swap(0, 1);
        }
        assert!((diag[0] - want[0]).norm() < 1e-12 && (diag[1] - want[1]).norm() < 1e-12);
        assert!(m[(0, 1)].norm() < 1e-12 && m[(1, 0)].norm() < 1e-12);
        // unitary conjugation
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = Operator::new(&a, CMat::from_row_slice(2, 2, &[re(s), re(s), re(s), re(-s)])).unwrap();
        let conj = simple_conjugation(&h, &t()).conjugate_map().unwrap();
        assert_eq!(conj.map.output().block_dims(), vec![1]);
    }

    #[test]
    fn compose_examples() {
        let a = m2();
        let deph = dephasing();
        let id = CpMap::identity(&a, &t());
        assert!(choi_distance(&compose(&id, &deph).unwrap(), &deph) < 1e-14);
        let c = sample_ops(&a)[3].clone();
        let d = sample_ops(&a)[2].clone();
        let lhs = compose(&simple_conjugation(&c, &t()), &simple_conjugation(&d, &t())).unwrap();
        let rhs = simple_conjugation(&(&c * &d), &t());
        assert!(choi_distance(&lhs, &rhs) < 1e-12);
        let tr = CpMap::trace_map(&a, &t());
        assert!(choi_distance(&compose(&tr, &deph).unwrap(), &tr) < 1e-14);
        assert!(compose(&deph, &tr).is_err());
    }

    #[test]
    fn minimal_decomposition_of_channel_and_simple_map() {
        let a = m2();
        let deph = dephasing();
        let dec = minimal_decomposition(&deph).unwrap();
        assert!((dec.c.matrix() - CMat::identity(2, 2)).norm() < 1e-12);
        assert!(choi_distance(&dec.lambda_on_support, &deph) < 1e-12);

        let d = Operator::new(
            &a,
            CMat::from_diagonal(&CVec::from_vec(vec![re(2.0 / 3.0), re(4.0 / 3.0)])),
        )
        .unwrap();
        let (sqrt_d, _) = psd_sqrt_pinv(&d, &t()).unwrap();
        let chi = simple_conjugation(&sqrt_d, &t());
        let dec = minimal_decomposition(&chi).unwrap();
        assert!((dec.c.matrix() - sqrt_d.matrix()).norm() < 1e-12);
        assert!(choi_distance(&dec.lambda_on_support, &CpMap::identity(&a, &t())) < 1e-12);
        let rebuilt = compose(&dec.reduced, &dec.compression_map(&t())).unwrap();
        assert!(choi_distance(&rebuilt, &chi) < 1e-12);
    }

    #[test]
    fn partial_trace_map_matches_partial_trace() {
        let a = m2();
        let p = a.tensor(&Algebra::full(3).unwrap());
        let tr = CpMap::partial_trace_map(&p, 1, &t()).unwrap();
        assert!(tr.is_channel());
        let x = Operator::new(
            &p,
            CMat::from_fn(6, 6, |r, c| C64::new((r * 7 + c) as f64, (r as f64) - (c as f64))),
        )
        .unwrap();
        let want = crate::algebra::partial_trace(&x, 0).unwrap();
        assert!((tr.apply(&x).unwrap().matrix() - want.matrix()).norm() < 1e-10);
    }
}
