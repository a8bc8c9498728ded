//! Extremality of generalized channels: the face condition on the Choi
//! matrix, its Kraus and conjugate-map reformulations, and the reduction
//! through the minimal decomposition.

use super::{
    inner_products, normalize_witness, ExtremalityReport, HermitianFamily, Method,
    RankData, Verdict,
};
use crate::algebra::Operator;
use crate::cp_map::{minimal_decomposition, unvectorize, KrausSet};
use crate::error::{Error, Result};
use crate::gchannel::GchanInstance;
use crate::linalg::{kernel, CMat, CVec, Tolerance, C64, ZERO};
use crate::subspace::Subspace;

/// Eigenvectors of the support of `X`, grouped by block of `B ⊗ A`.
fn support_groups(x: &Operator, tol: &Tolerance) -> Vec<Vec<CVec>> {
    let mut groups: Vec<Vec<CVec>> = vec![Vec::new(); x.algebra().num_blocks()];
    for (b, _, v) in x.support_vectors(tol) {
        groups[b].push(v);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Coordinates of an ambient matrix on the matrix units of `alg`.
fn coords_on(alg: &crate::algebra::Algebra, m: &CMat) -> CVec {
    CVec::from_iterator(alg.dim(), alg.entries().iter().map(|&(r, c)| m[(r, c)]))
}

/// Face test: `(B ⊗ A)_P ∩ Lin(L) = {0}`, solved over the real
/// space of self-adjoint elements of the face.
pub fn extremal_direct(gi: &GchanInstance) -> Result<ExtremalityReport> {
    gi.require_member()?;
    let map = gi.map();
    let tol = map.tolerance();
    let (input, output) = (map.input(), map.output());
    let (m, n) = (output.total_dim(), input.total_dim());
    let x = map.choi();
    let fam = HermitianFamily::new(support_groups(x, tol));
    let mats: Vec<CMat> = fam.vectors.iter().map(|v| unvectorize(v, m, n)).collect();
    let ys = gi.subspace().transpose(tol);
    let ys = ys.coords();
    // <y^T, Tr_B |u_k><u_l|> with Tr_B |u_k><u_l| = (U_l* U_k)^T
    let jt = ys.ncols();
    let sys = fam.constraint_matrix(jt, |k, l| {
        let tr = (mats[l].adjoint() * &mats[k]).transpose();
        inner_products(ys, &coords_on(input, &tr))
    });
    let ker = kernel(&sys, tol);
    let mut rep = ExtremalityReport::from_kernel(Method::Direct, &ker, sys.nrows());
    if rep.verdict == Verdict::NotExtremal {
        let h: Vec<f64> = ker.basis.column(0).iter().cloned().collect();
        let d = Operator::new(x.algebra(), fam.element(&h, m * n))?;
        rep.witness = normalize_witness(&d);
    }
    Ok(rep)
}

/// Builds `D = Σ d_kl |v_l><v_k|`, whose partial trace is `(Σ d_kl V_k* V_l)^T`.
fn face_element(gi: &GchanInstance, kraus: &KrausSet, coeffs: &[(usize, usize, C64)]) -> Result<Operator> {
    let alg = gi.map().choi().algebra().clone();
    let dim = alg.total_dim();
    let mut d = CMat::zeros(dim, dim);
    for &(k, l, c) in coeffs {
        if c == ZERO {
            continue;
        }
        let vk = kraus.vectorization(k);
        let vl = kraus.vectorization(l);
        d += (vl * vk.adjoint()).map(|z| z * c);
    }
    Operator::new(&alg, d)
}

/// Block-compatible index pairs `(k, l)`, in the order used by the Kraus test.
fn kraus_pairs(kraus: &KrausSet) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, j) in kraus.block_pairs() {
        let idx = kraus.index_set(i, j);
        for &k in &idx {
            for &l in &idx {
                pairs.push((k, l));
            }
        }
    }
    pairs
}

/// Linear independence of `{V_k* V_l} ∪ {basis of J^⊥}`.
pub fn extremal_kraus(gi: &GchanInstance) -> Result<ExtremalityReport> {
    gi.require_member()?;
    let map = gi.map();
    let tol = map.tolerance();
    let input = map.input();
    let kraus = map.minimal_kraus();
    let pairs = kraus_pairs(kraus);
    let products: Vec<CVec> = pairs
        .iter()
        .map(|&(k, l)| {
            let z = kraus.operators()[k].matrix.adjoint() * &kraus.operators()[l].matrix;
            coords_on(input, &z)
        })
        .collect();
    let perp = gi.subspace().orth_complement();
    let top = products.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if let Some(pos) = products.iter().position(|p| p.norm() <= tol.tol * top) {
        // A vanishing product is a dependence on its own.
        let (k, l) = pairs[pos];
        let d = face_element(gi, kraus, &[(k, l, C64::new(1.0, 0.0))])?;
        let data = RankData {
            unknowns: products.len() + perp.dim(),
            equations: input.dim(),
            rank: 0,
            nullity: 1,
            structural: false,
            null_residual: products[pos].norm() / top.max(f64::MIN_POSITIVE),
        };
        let mut rep = ExtremalityReport::new(Verdict::NotExtremal, Method::Kraus, data, 1.0)
            .with_note(format!("V_{k}* V_{l} vanishes"));
        rep.witness = normalize_witness(&d);
        return Ok(rep);
    }
    let norms: Vec<f64> = products.iter().map(|p| p.norm()).collect();
    let mut cols: Vec<CVec> = products.iter().zip(&norms).map(|(p, &s)| p.unscale(s)).collect();
    cols.extend(perp.coords().column_iter().map(|c| c.into_owned()));
    let fmat = CMat::from_columns(&cols);
    let ker = kernel(&fmat, tol);
    let mut rep = ExtremalityReport::from_kernel(Method::Kraus, &ker, fmat.nrows());
    if rep.verdict == Verdict::NotExtremal {
        let z = ker.basis.column(0);
        let coeffs: Vec<(usize, usize, C64)> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(k, l))| (k, l, z[i] / norms[i]))
            .collect();
        rep.witness = normalize_witness(&face_element(gi, kraus, &coeffs)?);
    }
    Ok(rep)
}

/// Linear independence of the outer products `{V_k V_l*}` inside `B`.
///
/// This is the classical condition for ordinary channels and is defined
/// only for `J = A`. It is kept as a comparison route: it does not agree
/// with the face condition in general.
pub fn extremal_kraus_outer(gi: &GchanInstance) -> Result<ExtremalityReport> {
    gi.require_member()?;
    let map = gi.map();
    let tol = map.tolerance();
    if gi.subspace().dim() != map.input().dim() {
        return Err(Error::Shape("the outer-product test applies only to J = A".into()));
    }
    let output = map.output();
    let kraus = map.minimal_kraus();
    let pairs = kraus_pairs(kraus);
    let products: Vec<CVec> = pairs
        .iter()
        .map(|&(k, l)| {
            let z = &kraus.operators()[k].matrix * kraus.operators()[l].matrix.adjoint();
            coords_on(output, &z)
        })
        .collect();
    let top = products.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if products.iter().any(|p| p.norm() <= tol.tol * top) {
        let data = RankData {
            unknowns: products.len(),
            equations: output.dim(),
            nullity: 1,
            ..RankData::default()
        };
        return Ok(ExtremalityReport::new(Verdict::NotExtremal, Method::KrausOuter, data, 1.0)
            .with_note("an outer product vanishes"));
    }
    let cols: Vec<CVec> = products.iter().map(|p| p.unscale(p.norm())).collect();
    let fmat = CMat::from_columns(&cols);
    let ker = kernel(&fmat, tol);
    Ok(ExtremalityReport::from_kernel(Method::KrausOuter, &ker, fmat.nrows()))
}

/// Surjectivity of the conjugate map on `J`: `Φ^C(J) = D`.
pub fn extremal_conjugate(gi: &GchanInstance) -> Result<ExtremalityReport> {
    gi.require_member()?;
    let map = gi.map();
    let tol = map.tolerance();
    let conj = map.conjugate_map()?;
    let target = conj.map.output().clone();
    let images: Vec<CVec> = gi
        .subspace()
        .basis()
        .iter()
        .map(|y| conj.map.apply(y).map(|img| img.coords()))
        .collect::<Result<_>>()?;
    let r = if images.is_empty() {
        CMat::zeros(target.dim(), 0)
    } else {
        CMat::from_columns(&images)
    };
    // D ⊖ Φ^C(J) is the kernel of R*.
    let rstar = r.adjoint();
    let ker = kernel(&rstar, tol);
    let mut rep = ExtremalityReport::from_kernel(Method::Conjugate, &ker, rstar.nrows());
    if rep.verdict == Verdict::NotExtremal {
        let nvec = ker.basis.column(0).into_owned();
        let nop = Operator::from_coords(&target, &nvec)?;
        let kraus = map.minimal_kraus();
        let mut coeffs = Vec::new();
        for (p, &(i, j)) in conj.pairs.iter().enumerate() {
            let idx = kraus.index_set(i, j);
            let blk = nop.block(p);
            for (a, &ka) in idx.iter().enumerate() {
                for (b, &kb) in idx.iter().enumerate() {
                    // d_{kb,ka} = conj(n_ab)
                    coeffs.push((kb, ka, blk[(a, b)].conj()));
                }
            }
        }
        rep.witness = normalize_witness(&face_element(gi, kraus, &coeffs)?);
    }
    Ok(rep)
}

/// Extremality of `Λ_q` in `C_{cJc*}(A_q, B)`, decided by the face
/// condition on the reduced channel; witnesses are carried back to `X`.
pub fn extremal_reduced(gi: &GchanInstance) -> Result<ExtremalityReport> {
    gi.require_member()?;
    let map = gi.map();
    let tol = map.tolerance();
    let dec = minimal_decomposition(map)?;
    let g0 = dec.compression();
    let red = &dec.reduced_algebra;
    let gens: Vec<Operator> = gi
        .subspace()
        .basis()
        .iter()
        .map(|y| Operator::new(red, &g0 * y.matrix() * g0.adjoint()))
        .collect::<Result<_>>()?;
    let jprime = Subspace::span_closure(red, &gens, tol)?;
    let inner = GchanInstance::new(dec.reduced.clone(), jprime)?;
    let sub = extremal_direct(&inner)?;
    let mut rep = ExtremalityReport::new(sub.verdict, Method::Reduced, sub.rank_data, sub.margin);
    if let Some(dp) = &sub.witness {
        // D = (I ⊗ G^T) D' (I ⊗ conj G), G = W* c
        let m = map.output().total_dim();
        let lift = CMat::identity(m, m).kronecker(&g0.transpose());
        let d = &lift * dp.matrix() * lift.adjoint();
        rep.witness = normalize_witness(&Operator::new(map.choi().algebra(), d)?);
    }
    rep.note = Some(format!(
        "reduced to {} with dim cJc* = {}",
        red,
        inner.subspace().dim()
    ));
    Ok(rep)
}

/// Necessary condition `dim (B⊗A)_P ≤ dim(pJp)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimBound {
    pub holds: bool,
    pub face_dim: usize,
    pub bound: usize,
}

pub fn dim_bound(gi: &GchanInstance) -> Result<DimBound> {
    gi.require_member()?;
    let tol = gi.map().tolerance();
    let face_dim = HermitianFamily::new(support_groups(gi.map().choi(), tol)).real_dim();
    let p = gi.input_support();
    let gens: Vec<Operator> = gi.subspace().basis().iter().map(|y| &(p * y) * p).collect();
    let bound = Subspace::span_closure(p.algebra(), &gens, tol)?.dim();
    Ok(DimBound {
        holds: face_dim <= bound,
        face_dim,
        bound,
    })
}

/// Runs the direct, Kraus, conjugate and reduced routes and compares them.
///
/// The direct verdict is reported unless it is inconclusive and the others
/// agree. Conflicting definite verdicts set `disagreement` and yield
/// `inconclusive`.
pub fn extremal_auto(gi: &GchanInstance) -> Result<ExtremalityReport> {
    let direct = extremal_direct(gi)?;
    let others = vec![extremal_kraus(gi)?, extremal_conjugate(gi)?, extremal_reduced(gi)?];
    let mut rep = super::combine(direct, others);
    rep.method = Method::Auto;
    let bound = dim_bound(gi)?;
    if !bound.holds && rep.verdict == Verdict::Extremal {
        rep.disagreement = true;
        rep.verdict = Verdict::Inconclusive;
    }
    rep.cross_checks.push((
        Method::DimBound,
        if bound.holds { Verdict::Inconclusive } else { Verdict::NotExtremal },
    ));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::cp_map::{simple_conjugation, CpMap};
    use crate::extremality::validate_witness;
    use crate::linalg::ONE;

    fn t() -> Tolerance {
        Tolerance::default()
    }

    fn m2() -> Algebra {
        Algebra::full(2).unwrap()
    }

    fn inst(map: CpMap) -> GchanInstance {
        let j = Subspace::whole(map.input());
        GchanInstance::new(map, j).unwrap()
    }

    fn sigma_x() -> CMat {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = ONE;
        m[(1, 0)] = ONE;
        m
    }

    fn all_methods(gi: &GchanInstance) -> Vec<ExtremalityReport> {
        vec![
            extremal_direct(gi).unwrap(),
            extremal_kraus(gi).unwrap(),
            extremal_conjugate(gi).unwrap(),
            extremal_reduced(gi).unwrap(),
        ]
    }

    #[test]
    fn identity_channel_is_extremal() {
        let gi = inst(CpMap::identity(&m2(), &t()));
        for r in all_methods(&gi) {
            assert_eq!(r.verdict, Verdict::Extremal, "{}", r.method);
            assert!(r.margin > 10.0 * t().tol);
        }
        assert!(dim_bound(&gi).unwrap().holds);
    }

    #[test]
    fn mixed_unitary_is_not_extremal() {
        let a = m2();
        let id = CpMap::identity(&a, &t());
        let x = CpMap::from_kraus_matrices(&a, &a, &[sigma_x()], &t()).unwrap();
        let mix = Operator::new(id.choi().algebra(), (id.choi().matrix() + x.choi().matrix()).scale(0.5)).unwrap();
        let gi = inst(CpMap::from_choi(&mix, &a, &a, &t()).unwrap());
        for r in all_methods(&gi) {
            assert_eq!(r.verdict, Verdict::NotExtremal, "{}", r.method);
            let w = r.witness.expect("witness");
            assert!(w.is_hermitian(1e-12));
            assert!((w.norm() - 1.0).abs() < 1e-12);
            assert!(validate_witness(&gi, &w, &Tolerance::new(1e-8)).unwrap() >= 1e-6);
        }
    }

    #[test]
    fn trace_map_is_extremal() {
        let gi = inst(CpMap::trace_map(&m2(), &t()));
        for r in all_methods(&gi) {
            assert_eq!(r.verdict, Verdict::Extremal, "{}", r.method);
        }
    }

    #[test]
    fn dephasing_conventions() {
        let a = m2();
        let ops = [a.unit(0, 0).unwrap().into_matrix(), a.unit(1, 1).unwrap().into_matrix()];
        let gi = inst(CpMap::from_kraus_matrices(&a, &a, &ops, &t()).unwrap());
        for r in all_methods(&gi) {
            assert_eq!(r.verdict, Verdict::NotExtremal, "{}", r.method);
        }
        assert_eq!(extremal_kraus_outer(&gi).unwrap().verdict, Verdict::NotExtremal);
        // the trace map separates the two product conventions
        let tr = inst(CpMap::trace_map(&a, &t()));
        assert_eq!(extremal_kraus(&tr).unwrap().verdict, Verdict::Extremal);
        assert_eq!(extremal_kraus_outer(&tr).unwrap().verdict, Verdict::NotExtremal);
    }

    #[test]
    fn dim_bound_rejects_full_rank() {
        let a = m2();
        let aa = a.tensor(&a);
        let x = aa.identity().scale_real(0.5);
        let gi = inst(CpMap::from_choi(&x, &a, &a, &t()).unwrap());
        let b = dim_bound(&gi).unwrap();
        assert_eq!((b.face_dim, b.bound, b.holds), (16, 4, false));
        assert_eq!(extremal_direct(&gi).unwrap().verdict, Verdict::NotExtremal);
    }

    #[test]
    fn unitary_conjugation_is_extremal() {
        let a = m2();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = Operator::new(&a, CMat::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)])).unwrap();
        let gi = inst(simple_conjugation(&h, &t()));
        assert_eq!(extremal_kraus(&gi).unwrap().verdict, Verdict::Extremal);
        assert_eq!(extremal_auto(&gi).unwrap().verdict, Verdict::Extremal);
    }

    #[test]
    fn non_member_is_rejected() {
        let a = m2();
        let gi = inst(simple_conjugation(&a.identity().scale_real(2.0), &t()));
        assert!(matches!(extremal_direct(&gi), Err(Error::NotMember(_))));
    }
}
