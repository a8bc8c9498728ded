//! Complex linear subspaces of a block algebra, kept as HS-orthonormal
//! coordinate columns in the matrix-unit basis.

use crate::algebra::{Algebra, Operator};
use crate::cp_map::CpMap;
use crate::error::{Error, Result};
use crate::linalg::{null_space, orthogonal_complement, orthonormal_span, CMat, CVec, Tolerance, C64, ONE};

#[derive(Clone, Debug)]
pub struct Subspace {
    algebra: Algebra,
    /// `dim(A) × k`, orthonormal columns.
    coords: CMat,
}

/// Three-valued answer of [`Subspace::check_positively_generated`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PositivityVerdict {
    CertifiedYes,
    CertifiedNo,
    Undetermined,
}

impl Subspace {
    /// Wraps coordinate columns already known to be orthonormal.
    pub(crate) fn from_orthonormal(algebra: &Algebra, coords: CMat) -> Self {
        debug_assert_eq!(coords.nrows(), algebra.dim());
        Self {
            algebra: algebra.clone(),
            coords,
        }
    }

    pub fn zero(algebra: &Algebra) -> Self {
        Self::from_orthonormal(algebra, CMat::zeros(algebra.dim(), 0))
    }

    pub fn whole(algebra: &Algebra) -> Self {
        let d = algebra.dim();
        Self::from_orthonormal(algebra, CMat::identity(d, d))
    }

    /// HS-orthonormal basis of the complex span of `gens`.
    pub fn span_closure(algebra: &Algebra, gens: &[Operator], tol: &Tolerance) -> Result<Self> {
        let mut cols = Vec::with_capacity(gens.len());
        for g in gens {
            if g.algebra() != algebra {
                return Err(Error::Shape(format!(
                    "generator in {}, expected {}",
                    g.algebra(),
                    algebra
                )));
            }
            cols.push(g.coords());
        }
        Ok(Self::from_coord_columns(algebra, &cols, tol))
    }

    fn from_coord_columns(algebra: &Algebra, cols: &[CVec], tol: &Tolerance) -> Self {
        if cols.is_empty() {
            return Self::zero(algebra);
        }
        let m = CMat::from_columns(cols);
        Self::from_orthonormal(algebra, orthonormal_span(&m, tol))
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Coordinates of the basis, one column per element.
    pub fn coords(&self) -> &CMat {
        &self.coords
    }

    pub fn basis_element(&self, k: usize) -> Operator {
        Operator::from_coords(&self.algebra, &self.coords.column(k).into_owned())
            .expect("coordinates sized to the algebra")
    }

    pub fn basis(&self) -> Vec<Operator> {
        (0..self.dim()).map(|k| self.basis_element(k)).collect()
    }

    fn check_same(&self, other: &Subspace) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::Shape(format!(
                "subspaces of {} and {}",
                self.algebra, other.algebra
            )));
        }
        Ok(())
    }

    pub fn orth_complement(&self) -> Self {
        Self::from_orthonormal(&self.algebra, orthogonal_complement(&self.coords))
    }

    /// `S1 + S2`.
    pub fn sum(&self, other: &Subspace, tol: &Tolerance) -> Result<Self> {
        self.check_same(other)?;
        let cols: Vec<CVec> = self
            .coords
            .column_iter()
            .chain(other.coords.column_iter())
            .map(|c| c.into_owned())
            .collect();
        Ok(Self::from_coord_columns(&self.algebra, &cols, tol))
    }

    /// `S1 ∩ S2 = (S1^⊥ + S2^⊥)^⊥`.
    pub fn intersect(&self, other: &Subspace, tol: &Tolerance) -> Result<Self> {
        self.check_same(other)?;
        Ok(self
            .orth_complement()
            .sum(&other.orth_complement(), tol)?
            .orth_complement())
    }

    /// HS projection.
    pub fn project(&self, a: &Operator) -> Result<Operator> {
        if a.algebra() != &self.algebra {
            return Err(Error::Shape(format!(
                "operator in {}, subspace of {}",
                a.algebra(),
                self.algebra
            )));
        }
        let c = a.coords();
        let p = &self.coords * (self.coords.adjoint() * c);
        Operator::from_coords(&self.algebra, &p)
    }

    /// Distance from `a` to the subspace, relative to `max(1, ‖a‖)`.
    pub fn residual(&self, a: &Operator) -> Result<f64> {
        let p = self.project(a)?;
        Ok((a.matrix() - p.matrix()).norm() / a.norm().max(1.0))
    }

    pub fn contains(&self, a: &Operator, tol: &Tolerance) -> bool {
        self.residual(a).is_ok_and(|r| r <= tol.band())
    }

    /// Whether every basis element of `other` lies in `self`.
    pub fn includes(&self, other: &Subspace, tol: &Tolerance) -> bool {
        if self.algebra != other.algebra {
            return false;
        }
        let leak = &other.coords - &self.coords * (self.coords.adjoint() * &other.coords);
        leak.column_iter().all(|c| c.norm() <= tol.band().max(1e-8))
    }

    pub fn equal_span(&self, other: &Subspace, tol: &Tolerance) -> bool {
        self.dim() == other.dim() && self.includes(other, tol) && other.includes(self, tol)
    }

    /// `{a^T : a ∈ S}`.
    pub fn transpose(&self, tol: &Tolerance) -> Self {
        let cols: Vec<CVec> = self.basis().iter().map(|b| b.transpose().coords()).collect();
        Self::from_coord_columns(&self.algebra, &cols, tol)
    }

    /// `{a* : a ∈ S}`.
    pub fn adjoint(&self, tol: &Tolerance) -> Self {
        let cols: Vec<CVec> = self.basis().iter().map(|b| b.adjoint().coords()).collect();
        Self::from_coord_columns(&self.algebra, &cols, tol)
    }

    pub fn is_self_adjoint(&self, tol: &Tolerance) -> bool {
        self.equal_span(&self.adjoint(tol), tol)
    }

    /// `{a ∈ A : S(a) ∈ J0}` for a channel `S: A → A0`.
    pub fn preimage_under_channel(s: &CpMap, j0: &Subspace, tol: &Tolerance) -> Result<Self> {
        check_channel(s, j0)?;
        let perp = j0.orth_complement();
        if perp.is_zero() {
            return Ok(Self::whole(s.input()));
        }
        let rows = adjoint_images(s, &perp).adjoint();
        let k = null_space(&rows, tol);
        Ok(Self::from_orthonormal(s.input(), k.basis))
    }

    /// `span S*(K0)`.
    pub fn pushforward_adjoint(s: &CpMap, k0: &Subspace, tol: &Tolerance) -> Result<Self> {
        check_channel(s, k0)?;
        let m = adjoint_images(s, k0);
        let cols: Vec<CVec> = m.column_iter().map(|c| c.into_owned()).collect();
        Ok(Self::from_coord_columns(s.input(), &cols, tol))
    }

    /// `{b : Tr b = 0}` with its fixed Hermitian basis.
    pub fn traceless(alg: &Algebra) -> Self {
        let cols: Vec<CVec> = traceless_basis(alg).iter().map(|b| b.coords()).collect();
        if cols.is_empty() {
            return Self::zero(alg);
        }
        Self::from_orthonormal(alg, CMat::from_columns(&cols))
    }

    /// Sufficient test for being spanned by positive elements.
    ///
    /// A self-adjoint `S` containing an element `e` that is positive definite
    /// on a projection `p` with `S ⊆ pAp` is positively generated, because
    /// every self-adjoint `h ∈ S` equals `(h + t e) − t e` for large `t`.
    /// The candidate is the projection of the identity onto `S`. A nonzero
    /// subspace of traceless elements holds no nonzero positive element.
    pub fn check_positively_generated(&self, tol: &Tolerance) -> PositivityVerdict {
        if self.is_zero() {
            return PositivityVerdict::CertifiedYes;
        }
        if !self.is_self_adjoint(tol) {
            return PositivityVerdict::CertifiedNo;
        }
        let e = self.project(&self.algebra.identity()).expect("same algebra");
        if e.norm() <= tol.band() {
            return PositivityVerdict::CertifiedNo;
        }
        if !e.is_hermitian(tol.band()) || !e.is_psd(tol.tol) {
            return PositivityVerdict::Undetermined;
        }
        let p = match crate::algebra::support_projection(&e, tol) {
            Ok(p) => p,
            Err(_) => return PositivityVerdict::Undetermined,
        };
        let inside = self.basis().iter().all(|b| {
            let pbp = &(&p * b) * &p;
            (pbp.matrix() - b.matrix()).norm() <= tol.band().max(1e-8)
        });
        if inside {
            PositivityVerdict::CertifiedYes
        } else {
            PositivityVerdict::Undetermined
        }
    }

    /// The same subspace seen through `I_B ⊗ ·` inside `B ⊗ A`.
    pub fn lift_identity(&self, b: &Algebra) -> Self {
        let scale = 1.0 / (b.total_dim() as f64).sqrt();
        let ib = b.identity().scale_real(scale);
        let target = b.tensor(&self.algebra);
        let cols: Vec<CVec> = self.basis().iter().map(|y| ib.kron(y).coords()).collect();
        if cols.is_empty() {
            return Self::zero(&target);
        }
        Self::from_orthonormal(&target, CMat::from_columns(&cols))
    }
}

fn check_channel(s: &CpMap, sub: &Subspace) -> Result<()> {
    if sub.algebra() != s.output() {
        return Err(Error::Shape(format!(
            "subspace of {}, map into {}",
            sub.algebra(),
            s.output()
        )));
    }
    let residual = s.trace_residual();
    if !s.is_channel() {
        return Err(Error::NotChannel { residual });
    }
    Ok(())
}

/// Coordinates of `S*(z)` for each basis element `z`, as columns.
fn adjoint_images(s: &CpMap, k: &Subspace) -> CMat {
    let (a, b) = (s.input(), s.output());
    let n = a.total_dim();
    let x = s.choi().matrix();
    let mut out = CMat::zeros(a.dim(), k.dim());
    for (col, z) in k.basis().iter().enumerate() {
        let zm = z.matrix();
        for (idx, &(p, q)) in a.entries().iter().enumerate() {
            // <e_pq, S*(z)> = conj <z, S(e_pq)>
            let mut acc = C64::new(0.0, 0.0);
            for &(r, t) in b.entries() {
                acc += zm[(r, t)].conj() * x[(r * n + p, t * n + q)];
            }
            out[(idx, col)] = acc.conj();
        }
    }
    out
}

/// Fixed HS-orthonormal Hermitian basis of the traceless elements: the
/// off-diagonal symmetric and antisymmetric units of each block, then the
/// generalized Gell-Mann diagonals across the whole diagonal.
pub fn traceless_basis(alg: &Algebra) -> Vec<Operator> {
    let n = alg.total_dim();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for j in 0..alg.num_blocks() {
        let idx = alg.block_indices(j);
        for (a, &k) in idx.iter().enumerate() {
            for &l in &idx[a + 1..] {
                let mut sym = CMat::zeros(n, n);
                sym[(k, l)] = C64::new(s, 0.0);
                sym[(l, k)] = C64::new(s, 0.0);
                out.push(Operator::new(alg, sym).expect("in block"));
                let mut asym = CMat::zeros(n, n);
                asym[(k, l)] = C64::new(0.0, -s);
                asym[(l, k)] = C64::new(0.0, s);
                out.push(Operator::new(alg, asym).expect("in block"));
            }
        }
    }
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut d = CMat::zeros(n, n);
        for i in 0..k {
            d[(i, i)] = C64::new(1.0 / norm, 0.0);
        }
        d[(k, k)] = C64::new(-(k as f64) / norm, 0.0);
        out.push(Operator::new(alg, d).expect("diagonal"));
    }
    out
}

/// `A_m = B_m ⊗ … ⊗ B_0`.
pub fn comb_algebra(algebras: &[Algebra], m: usize) -> Result<Algebra> {
    if algebras.is_empty() || m >= algebras.len() {
        return Err(Error::InvalidAlgebra(format!(
            "comb level {m} needs {} algebras, got {}",
            m + 1,
            algebras.len()
        )));
    }
    let parts: Vec<&Algebra> = algebras[..=m].iter().rev().collect();
    Algebra::tensor_all(&parts)
}

/// `Π_{l=0}^{⌊(n−1)/2⌋} Tr I_{B_{n−1−2l}}`, the trace of comb members at level `n`.
pub fn comb_normalization(algebras: &[Algebra], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut c = 1.0;
    let mut l = 0;
    while 2 * l < n {
        c *= algebras[n - 1 - 2 * l].total_dim() as f64;
        l += 1;
    }
    c
}

/// Fixed HS-orthonormal basis of `J_n^⊥` for `algebras = [B_0, …, B_n]`.
pub fn comb_perp_basis(algebras: &[Algebra]) -> Result<Subspace> {
    if algebras.len() < 2 {
        return Err(Error::InvalidAlgebra(
            "a comb subspace needs at least B_0 and B_1".into(),
        ));
    }
    let n = algebras.len() - 1;
    let target = comb_algebra(algebras, n)?;
    let unit_identity = |b: &Algebra| b.identity().scale_real(1.0 / (b.total_dim() as f64).sqrt());
    let mut cols: Vec<CVec> = Vec::new();
    let mut j = 0;
    while 2 * j < n {
        let top = n - 2 * j - 1;
        // I_n ⊗ I_{n-1} ⊗ … ⊗ I_{n-2j}
        let mut prefix = unit_identity(&algebras[n]);
        for l in 1..=2 * j {
            prefix = prefix.kron(&unit_identity(&algebras[n - l]));
        }
        let tail: Vec<Operator> = if top == 0 {
            vec![Operator::new(&Algebra::full(1)?, CMat::from_element(1, 1, ONE))?]
        } else {
            let a = comb_algebra(algebras, top - 1)?;
            a.entries()
                .iter()
                .map(|&(r, c)| a.unit(r, c).expect("entry"))
                .collect()
        };
        for t in traceless_basis(&algebras[top]) {
            let head = prefix.kron(&t);
            for a in &tail {
                let el = if top == 0 { head.clone() } else { head.kron(a) };
                let el = Operator::new(&target, el.into_matrix())?;
                cols.push(el.coords());
            }
        }
        j += 1;
    }
    if cols.is_empty() {
        return Ok(Subspace::zero(&target));
    }
    Ok(Subspace::from_orthonormal(&target, CMat::from_columns(&cols)))
}

/// `J_n` by iterating `J_n = Tr_{B_n}^{-1}(I_{B_{n−1}} ⊗ J_{n−2})` from
/// `J_{−1} = ℂ` and `J_0 = B_0`.
pub fn comb_subspace(algebras: &[Algebra], tol: &Tolerance) -> Result<Subspace> {
    if algebras.is_empty() {
        return Err(Error::InvalidAlgebra("empty comb".into()));
    }
    let n = algebras.len() - 1;
    let mut prev2: Option<Subspace> = None; // J_{m-2}; None encodes J_{-1} = ℂ
    let mut prev1 = Subspace::whole(&algebras[0]); // J_0
    for m in 1..=n {
        let lower = comb_algebra(algebras, m - 1)?;
        let lifted = match &prev2 {
            None => Subspace::span_closure(&lower, &[lower.identity()], tol)?,
            Some(j) => {
                let l = j.lift_identity(&algebras[m - 1]);
                Subspace::from_orthonormal(&lower, l.coords().clone())
            }
        };
        let upper = comb_algebra(algebras, m)?;
        let s = CpMap::partial_trace_map(&upper, algebras[m].num_factors(), tol)?;
        let s = retarget_output(s, &lower, tol)?;
        let jm = Subspace::preimage_under_channel(&s, &lifted, tol)?;
        prev2 = Some(prev1);
        prev1 = jm;
    }
    Ok(prev1)
}

/// Relabels the output algebra of a map to an equal algebra value.
fn retarget_output(s: CpMap, out: &Algebra, tol: &Tolerance) -> Result<CpMap> {
    if s.output() == out {
        return Ok(s);
    }
    let alg = out.tensor(s.input());
    let choi = Operator::new(&alg, s.choi().matrix().clone())?;
    CpMap::from_choi(&choi, s.input(), out, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::partial_trace;
    use crate::linalg::I;

    fn t() -> Tolerance {
        Tolerance::default()
    }

    fn m(n: usize) -> Algebra {
        Algebra::full(n).unwrap()
    }

    fn pauli(a: &Algebra) -> [Operator; 4] {
        let r = |v: f64| C64::new(v, 0.0);
        let z = r(0.0);
        [
            a.identity(),
            Operator::new(a, CMat::from_row_slice(2, 2, &[z, r(1.0), r(1.0), z])).unwrap(),
            Operator::new(a, CMat::from_row_slice(2, 2, &[z, -I, I, z])).unwrap(),
            Operator::new(a, CMat::from_row_slice(2, 2, &[r(1.0), z, z, r(-1.0)])).unwrap(),
        ]
    }

    #[test]
    fn span_closure_examples() {
        let a = m(2);
        let i = a.identity();
        assert_eq!(Subspace::span_closure(&a, &[i.clone(), i.scale_real(2.0)], &t()).unwrap().dim(), 1);
        let units = [a.unit(0, 0).unwrap(), a.unit(1, 1).unwrap()];
        assert_eq!(Subspace::span_closure(&a, &units, &t()).unwrap().dim(), 2);
        assert_eq!(Subspace::span_closure(&a, &[], &t()).unwrap().dim(), 0);
        let other = m(3).identity();
        assert!(Subspace::span_closure(&a, &[i, other], &t()).is_err());
    }

    #[test]
    fn complement_examples() {
        let a = m(2);
        let s = Subspace::span_closure(&a, &[a.identity()], &t()).unwrap();
        let perp = s.orth_complement();
        assert_eq!(perp.dim(), 3);
        assert!(perp.basis().iter().all(|b| b.trace().norm() < 1e-12));
        assert!(perp.orth_complement().equal_span(&s, &t()));
        assert_eq!(Subspace::zero(&a).orth_complement().dim(), 4);
        let gram = perp.coords().adjoint() * perp.coords();
        assert!((gram - CMat::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn intersect_examples() {
        let a = m(2);
        let [i, x, _, z] = pauli(&a);
        let s1 = Subspace::span_closure(&a, &[i.clone(), x], &t()).unwrap();
        let s2 = Subspace::span_closure(&a, &[i.clone(), z], &t()).unwrap();
        let cut = s1.intersect(&s2, &t()).unwrap();
        assert_eq!(cut.dim(), 1);
        assert!(cut.contains(&i, &t()));
        assert!(s1.intersect(&s1, &t()).unwrap().equal_span(&s1, &t()));
        let e1 = Subspace::span_closure(&a, &[a.unit(0, 0).unwrap()], &t()).unwrap();
        let e2 = Subspace::span_closure(&a, &[a.unit(1, 1).unwrap()], &t()).unwrap();
        assert_eq!(e1.intersect(&e2, &t()).unwrap().dim(), 0);
        assert!(e1.intersect(&Subspace::whole(&m(3)), &t()).is_err());
    }

    #[test]
    fn traceless_examples() {
        assert_eq!(Subspace::traceless(&m(2)).dim(), 3);
        assert_eq!(Subspace::traceless(&m(1)).dim(), 0);
        let c2 = Algebra::diagonal(2).unwrap();
        let tl = Subspace::traceless(&c2);
        assert_eq!(tl.dim(), 1);
        let b = tl.basis_element(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.matrix()[(0, 0)].re - s).abs() < 1e-15);
        assert!((b.matrix()[(1, 1)].re + s).abs() < 1e-15);
        let mixed = Algebra::new(&[2, 1]).unwrap();
        let tl = Subspace::traceless(&mixed);
        assert_eq!(tl.dim(), mixed.dim() - 1);
        let gram = tl.coords().adjoint() * tl.coords();
        assert!((gram - CMat::identity(4, 4)).norm() < 1e-12);
    }

    /// Brute-force membership test for the channel-on-channel subspace:
    /// `Tr_{H1} X ∈ ℂ I`.
    fn in_c_span(x: &Operator) -> bool {
        let r = partial_trace(x, 0).unwrap();
        let d = r.algebra().total_dim() as f64;
        let scalar = r.trace() / d;
        (r.matrix() - CMat::identity(r.matrix().nrows(), r.matrix().nrows()) * scalar).norm() < 1e-9
    }

    #[test]
    fn preimage_of_partial_trace() {
        for (d1, d0) in [(2, 2), (3, 2), (2, 3)] {
            let a = m(d1).tensor(&m(d0));
            let s = CpMap::partial_trace_map(&a, 1, &t()).unwrap();
            let a0 = s.output().clone();
            let j0 = Subspace::span_closure(&a0, &[a0.identity()], &t()).unwrap();
            let j = Subspace::preimage_under_channel(&s, &j0, &t()).unwrap();
            assert_eq!(j.dim(), d1 * d1 * d0 * d0 - d0 * d0 + 1);
            assert!(j.basis().iter().all(in_c_span));
            let whole = Subspace::preimage_under_channel(&s, &Subspace::whole(&a0), &t()).unwrap();
            assert_eq!(whole.dim(), a.dim());
            // complement duality
            let push = Subspace::pushforward_adjoint(&s, &j0.orth_complement(), &t()).unwrap();
            assert!(push.equal_span(&j.orth_complement(), &t()));
        }
    }

    #[test]
    fn perp_basis_decomposition() {
        // Tr_B^{-1}(J) = (I_B ⊗ J) ⊕ (T(B) ⊗ A)
        let b = m(2);
        let a = Algebra::new(&[2, 1]).unwrap();
        let j = Subspace::span_closure(
            &a,
            &[a.identity(), Operator::new(&a, {
                let mut mm = CMat::zeros(3, 3);
                mm[(0, 1)] = ONE;
                mm
            }).unwrap()],
            &t(),
        )
        .unwrap();
        let ba = b.tensor(&a);
        let s = CpMap::partial_trace_map(&ba, 1, &t()).unwrap();
        let s = retarget_output(s, &a, &t()).unwrap();
        let pre = Subspace::preimage_under_channel(&s, &j, &t()).unwrap();
        let mut gens: Vec<Operator> = j.basis().iter().map(|y| b.identity().kron(y)).collect();
        for tb in traceless_basis(&b) {
            for &(r, c) in a.entries() {
                gens.push(tb.kron(&a.unit(r, c).unwrap()));
            }
        }
        let gens: Vec<Operator> = gens
            .into_iter()
            .map(|g| Operator::new(&ba, g.into_matrix()).unwrap())
            .collect();
        let direct = Subspace::span_closure(&ba, &gens, &t()).unwrap();
        assert!(pre.equal_span(&direct, &t()));
    }

    #[test]
    fn pushforward_examples() {
        let a = m(2).tensor(&m(2));
        let s = CpMap::partial_trace_map(&a, 1, &t()).unwrap();
        let a0 = s.output().clone();
        let push = Subspace::pushforward_adjoint(&s, &Subspace::traceless(&a0), &t()).unwrap();
        let direct = m(2).identity();
        let gens: Vec<Operator> = traceless_basis(&a0)
            .iter()
            .map(|tt| Operator::new(&a, direct.kron(tt).into_matrix()).unwrap())
            .collect();
        assert!(push.equal_span(&Subspace::span_closure(&a, &gens, &t()).unwrap(), &t()));
        assert_eq!(Subspace::pushforward_adjoint(&s, &Subspace::zero(&a0), &t()).unwrap().dim(), 0);
        let id = CpMap::identity(&m(2), &t());
        let k0 = Subspace::span_closure(&m(2), &[pauli(&m(2))[1].clone()], &t()).unwrap();
        assert!(Subspace::pushforward_adjoint(&id, &k0, &t()).unwrap().equal_span(&k0, &t()));
        let not_channel = crate::cp_map::simple_conjugation(&m(2).identity().scale_real(2.0), &t());
        assert!(matches!(
            Subspace::pushforward_adjoint(&not_channel, &k0, &t()),
            Err(Error::NotChannel { .. })
        ));
    }

    #[test]
    fn comb_perp_examples() {
        let two = vec![m(2), m(2)];
        let p = comb_perp_basis(&two).unwrap();
        assert_eq!(p.dim(), 3);
        let a = comb_algebra(&two, 1).unwrap();
        let s = CpMap::partial_trace_map(&a, 1, &t()).unwrap();
        let push = Subspace::pushforward_adjoint(&s, &Subspace::traceless(s.output()), &t()).unwrap();
        assert!(p.equal_span(&push, &t()));
        assert_eq!(comb_perp_basis(&[m(2), m(2), m(2)]).unwrap().dim(), 12);
        assert_eq!(comb_perp_basis(&[m(1), m(2)]).unwrap().dim(), 0);
        assert!(comb_perp_basis(&[m(2)]).is_err());
        assert!(comb_perp_basis(&[]).is_err());
    }

    #[test]
    fn comb_subspace_agrees_with_perp_formula() {
        let cases = vec![
            vec![m(2), m(2)],
            vec![m(2), m(2), m(2)],
            vec![Algebra::diagonal(2).unwrap(), m(2), m(1)],
            vec![m(2), m(1), m(2), Algebra::diagonal(2).unwrap()],
            vec![m(2), m(2), m(2), m(2)],
        ];
        for algs in cases {
            let j = comb_subspace(&algs, &t()).unwrap();
            let perp = comb_perp_basis(&algs).unwrap();
            assert!(j.equal_span(&perp.orth_complement(), &t()), "{algs:?}");
        }
        assert_eq!(comb_perp_basis(&[m(2), m(2), m(2), m(2)]).unwrap().dim(), 51);
    }

    #[test]
    fn positivity_examples() {
        let a = m(2);
        let e12 = Subspace::span_closure(&a, &[a.unit(0, 1).unwrap()], &t()).unwrap();
        assert_eq!(e12.check_positively_generated(&t()), PositivityVerdict::CertifiedNo);
        let z = Subspace::span_closure(&a, &[pauli(&a)[3].clone()], &t()).unwrap();
        assert_ne!(z.check_positively_generated(&t()), PositivityVerdict::CertifiedYes);
        let prod = m(2).tensor(&m(2));
        let s = CpMap::partial_trace_map(&prod, 1, &t()).unwrap();
        let j0 = Subspace::span_closure(s.output(), &[s.output().identity()], &t()).unwrap();
        let j = Subspace::preimage_under_channel(&s, &j0, &t()).unwrap();
        assert_eq!(j.check_positively_generated(&t()), PositivityVerdict::CertifiedYes);
        let corner = Subspace::span_closure(&a, &[a.unit(0, 0).unwrap()], &t()).unwrap();
        assert_eq!(corner.check_positively_generated(&t()), PositivityVerdict::CertifiedYes);
    }

    #[test]
    fn transpose_and_adjoint() {
        let a = m(2);
        let s = Subspace::span_closure(&a, &[a.unit(0, 1).unwrap()], &t()).unwrap();
        let st = s.transpose(&t());
        assert!(st.contains(&a.unit(1, 0).unwrap(), &t()));
        assert!(s.adjoint(&t()).equal_span(&st, &t()));
        assert!(!s.is_self_adjoint(&t()));
        assert!(Subspace::traceless(&a).is_self_adjoint(&t()));
    }
}
