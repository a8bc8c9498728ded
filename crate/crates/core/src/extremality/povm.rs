//! Extremality of generalized POVMs, PVMs and 1-testers.

use super::{
    combine, effects_to_choi, kernel_verdict, normalize_witness, rank_data, DimBound,
    ExtremalityReport, HermitianFamily, Method, RankData, Verdict,
};
use crate::algebra::{psd_sqrt_pinv, support_block_ranks, support_projection, Algebra, Operator};
use crate::cp_map::{corner_isometry, CpMap};
use crate::error::{Error, Result};
use crate::gchannel::{verify_gpovm, verify_tester, GchanInstance, Povm, Tester};
use crate::linalg::{kernel, null_space, CMat, CVec, Tolerance, C64, I};
use crate::subspace::Subspace;

fn require_gpovm(p: &Povm, tol: &Tolerance) -> Result<()> {
    let m = verify_gpovm(p, tol);
    if m.member {
        Ok(())
    } else {
        Err(Error::NotMember(m.describe()))
    }
}

/// Sets both witness forms from effect directions `D_u`: the Choi-level
/// operator is normalized and the effect directions rescaled to match.
fn attach_effect_witness(rep: &mut ExtremalityReport, ds: &[Operator]) {
    let Some(w) = normalize_witness(&effects_to_choi(ds)) else {
        return;
    };
    let n = ds[0].algebra().total_dim();
    let effects = ds
        .iter()
        .enumerate()
        .map(|(u, d)| {
            let blk = w.matrix().view((u * n, u * n), (n, n)).transpose();
            Operator::new(d.algebra(), blk).expect("block of a block-diagonal operator")
        })
        .collect();
    rep.witness = Some(w);
    rep.effect_witness = Some(effects);
}

/// Constraint values `<y_j, |a><b|> = b* y_j* a` for each basis element of `J`.
fn rank_one_constraints(ys: &[CMat], a: &CVec, b: &CVec) -> Vec<C64> {
    ys.iter().map(|y| (b.adjoint() * y.adjoint() * a)[(0, 0)]).collect()
}

/// Face test: no nonzero `{D_u}` with `D_u` self-adjoint in `A_{supp M_u}`
/// and `Σ D_u ∈ J^⊥`.
pub fn povm_extremal(p: &Povm, tol: &Tolerance) -> Result<ExtremalityReport> {
    require_gpovm(p, tol)?;
    let alg = p.algebra();
    let n = alg.total_dim();
    let mut groups: Vec<Vec<CVec>> = Vec::new();
    let mut owner = Vec::new();
    for (u, e) in p.effects().iter().enumerate() {
        let mut per_block: Vec<Vec<CVec>> = vec![Vec::new(); alg.num_blocks()];
        for (b, _, v) in e.support_vectors(tol) {
            per_block[b].push(v);
        }
        for g in per_block.into_iter().filter(|g| !g.is_empty()) {
            groups.push(g);
            owner.push(u);
        }
    }
    let fam = HermitianFamily::new(groups);
    let ys: Vec<CMat> = p.subspace().basis().into_iter().map(|b| b.into_matrix()).collect();
    let sys = fam.constraint_matrix(ys.len(), |k, l| {
        rank_one_constraints(&ys, &fam.vectors[k], &fam.vectors[l])
    });
    let ker = kernel(&sys, tol);
    let mut rep = ExtremalityReport::from_kernel(Method::Povm, &ker, sys.nrows());
    let bound = povm_dim_bound(p, tol)?;
    rep.note = Some(format!(
        "dimension bound {} <= {}: {}",
        bound.face_dim,
        bound.bound,
        if bound.holds { "holds" } else { "fails" }
    ));
    if rep.verdict == Verdict::NotExtremal {
        let h: Vec<f64> = ker.basis.column(0).iter().cloned().collect();
        let ds: Vec<Operator> = (0..p.outcomes())
            .map(|u| Operator::new(alg, fam.element_in(&h, n, |g| owner[g] == u)))
            .collect::<Result<_>>()?;
        attach_effect_witness(&mut rep, &ds);
    }
    Ok(rep)
}

/// Necessary condition `Σ_u dim A_{p_u} ≤ dim(pJp)` with `p = supp Σ M_u`.
pub fn povm_dim_bound(p: &Povm, tol: &Tolerance) -> Result<DimBound> {
    let face_dim: usize = p
        .effects()
        .iter()
        .map(|e| support_block_ranks(e, tol).iter().map(|r| r * r).sum::<usize>())
        .sum();
    let supp = support_projection(&p.total(), tol)?;
    let gens: Vec<Operator> = p.subspace().basis().iter().map(|y| &(&supp * y) * &supp).collect();
    let bound = Subspace::span_closure(p.algebra(), &gens, tol)?.dim();
    Ok(DimBound {
        holds: face_dim <= bound,
        face_dim,
        bound,
    })
}

/// `NotPvm` unless the effects are pairwise orthogonal projections; in
/// strict mode they must also sum to the identity.
fn require_pvm(p: &Povm, strict: bool, tol: &Tolerance) -> Result<()> {
    if let Some(why) = p.pvm_defect(tol) {
        return Err(Error::NotPvm(why));
    }
    let eps = tol.band().max(1e-8);
    if strict {
        let id = p.algebra().identity();
        let res = (&p.total() - &id).norm();
        if res > eps {
            return Err(Error::NotPvm(format!("effects sum to I only up to {res:.3e}")));
        }
    }
    Ok(())
}

/// Coordinates of `{b ∈ A : [b, M_u] = 0 for all u, b = pbp}`, `p = Σ M_u`.
fn commutant(p: &Povm, tol: &Tolerance) -> crate::linalg::Kernel<C64> {
    let alg = p.algebra();
    let comp = &alg.identity() - &p.total();
    let comp_nonzero = comp.norm() > tol.band().max(1e-8);
    let cols: Vec<CVec> = alg
        .entries()
        .iter()
        .map(|&(r, c)| {
            let e = alg.unit(r, c).expect("entry of the algebra");
            let mut parts: Vec<C64> = Vec::new();
            for m in p.effects() {
                parts.extend(e.commutator(m).expect("same algebra").coords().iter());
            }
            if comp_nonzero {
                // the component on I − p must vanish
                parts.extend((&e * &comp).coords().iter());
                parts.extend((&comp * &e).coords().iter());
            }
            CVec::from_vec(parts)
        })
        .collect();
    null_space(&CMat::from_columns(&cols), tol)
}

/// `{M}' ∩ J^⊥ = {0}`, with the commutant taken inside the corner of
/// `Σ M_u`. Effects must be orthogonal projections; `strict` also requires
/// them to sum to the identity.
pub fn pvm_extremal(p: &Povm, strict: bool, tol: &Tolerance) -> Result<ExtremalityReport> {
    require_gpovm(p, tol)?;
    require_pvm(p, strict, tol)?;
    let alg = p.algebra();
    let comm = commutant(p, tol);
    let q = &comm.basis;
    let ys = p.subspace().coords();
    let sys = ys.adjoint() * q;
    let ker = kernel(&sys, tol);
    let mut verdict = kernel_verdict(&ker);
    if verdict == Verdict::Extremal && comm.decision.inconclusive {
        verdict = Verdict::Inconclusive;
    }
    let mut rep = ExtremalityReport::new(
        verdict,
        Method::Pvm,
        rank_data(&ker, sys.nrows()),
        ker.decision.margin.min(comm.decision.margin),
    )
    .with_note(format!("dim {{M}}' = {}", q.ncols()));
    if verdict == Verdict::NotExtremal && q.ncols() > 0 {
        let x = Operator::from_coords(alg, &(q * ker.basis.column(0)))?;
        if let Some(h) = normalize_witness(&x) {
            let ds: Vec<Operator> = p.effects().iter().map(|m| &h * m).collect();
            attach_effect_witness(&mut rep, &ds);
        }
    }
    Ok(rep)
}

/// PVM extremality when `J = S^{-1}(ℂρ_0)` with `S*` an injective
/// homomorphism: extremal iff `{M}' ∩ S*(A_0)` is `ℂ I`.
pub fn hom_pvm_extremal(
    p: &Povm,
    s: &CpMap,
    rho0: &Operator,
    tol: &Tolerance,
) -> Result<ExtremalityReport> {
    require_gpovm(p, tol)?;
    require_pvm(p, true, tol)?;
    let spec = rho0.spectrum();
    let top = spec.first().cloned().unwrap_or(0.0);
    let low = spec.last().cloned().unwrap_or(0.0);
    if top <= 0.0 || low <= tol.band() * top {
        return Err(Error::NotInvertible { min_eigenvalue: low });
    }
    let j0 = Subspace::span_closure(s.output(), std::slice::from_ref(rho0), tol)?;
    let j = Subspace::preimage_under_channel(s, &j0, tol)?;
    if !j.equal_span(p.subspace(), tol) {
        return Err(Error::Shape("the constraint subspace is not S^{-1}(C rho0)".into()));
    }
    let a0 = s.output();
    let adj = s.adjoint_map();
    let images: Vec<Operator> = a0
        .entries()
        .iter()
        .map(|&(r, c)| adj.apply(&a0.unit(r, c).expect("entry")))
        .collect::<Result<_>>()?;
    let cols: Vec<CVec> = images
        .iter()
        .map(|x| {
            let parts: Vec<C64> = p
                .effects()
                .iter()
                .flat_map(|m| x.commutator(m).expect("same algebra").coords().iter().cloned().collect::<Vec<_>>())
                .collect();
            CVec::from_vec(parts)
        })
        .collect();
    let ker = null_space(&CMat::from_columns(&cols), tol);
    let dim_c = ker.nullity();
    let verdict = if ker.decision.inconclusive || dim_c == 0 {
        Verdict::Inconclusive
    } else if dim_c == 1 {
        Verdict::Extremal
    } else {
        Verdict::NotExtremal
    };
    let data = RankData {
        unknowns: a0.dim(),
        equations: cols.first().map_or(0, |c| c.len()),
        rank: ker.decision.rank,
        nullity: dim_c,
        structural: false,
        null_residual: ker.decision.null_residual,
    };
    let mut rep = ExtremalityReport::new(verdict, Method::HomPvm, data, ker.decision.margin)
        .with_note(format!("dim {{M}}' ∩ S*(A0) = {dim_c}"));
    if verdict == Verdict::NotExtremal {
        if let Some(ds) = hom_witness(p, &adj, a0, &ker.basis, rho0)? {
            attach_effect_witness(&mut rep, &ds);
        }
    }
    Ok(rep)
}

/// Builds `y = p_0 − t/(1−t)(I − p_0)` from a nontrivial spectral
/// projection `p_0` of an element of the algebra `{a_0 : S*(a_0) ∈ {M}'}`.
fn hom_witness(
    p: &Povm,
    adj: &CpMap,
    a0: &Algebra,
    basis: &CMat,
    rho0: &Operator,
) -> Result<Option<Vec<Operator>>> {
    let id = a0.identity();
    let id_norm2 = id.norm().powi(2);
    let mut best: Option<(f64, Operator)> = None;
    for k in 0..basis.ncols() {
        let a = Operator::from_coords(a0, &basis.column(k).into_owned())?;
        let sum = &a + &a.adjoint();
        let h = if sum.norm() > 1e-8 * a.norm() {
            sum
        } else {
            (&a - &a.adjoint()).scale(I)
        };
        let along = crate::algebra::hs_inner(&id, &h)? / id_norm2;
        let rest = &h - &id.scale(along);
        let size = rest.norm() / h.norm().max(f64::MIN_POSITIVE);
        if best.as_ref().is_none_or(|(s, _)| size > *s) {
            best = Some((size, rest));
        }
    }
    let Some((_, h0)) = best else { return Ok(None) };
    let spec = h0.spectrum();
    let (hi, lo) = (spec[0], spec[spec.len() - 1]);
    if hi - lo <= 1e-8 * h0.norm() {
        return Ok(None);
    }
    let p0 = h0.spectral_map(0.5 * (hi + lo), |_| 1.0, 0.0);
    let t = (rho0 * &p0).trace().re / rho0.trace().re;
    let y = &p0 - &(&id - &p0).scale_real(t / (1.0 - t));
    let x = adj.apply(&y)?;
    Ok(Some(p.effects().iter().map(|m| &x * m).collect()))
}

/// Minimal-decomposition data of a generalized POVM: `Λ'_u = G M_u G*`
/// with `G = W* c⁺`, and `G_0 = W* c` carrying `J` to `cJc*`.
struct PovmReduction {
    lambda: Povm,
    g0: CMat,
}

fn reduce_povm(p: &Povm, c: &Operator, c_pinv: &Operator, w: &CMat, red: &Algebra, tol: &Tolerance) -> Result<PovmReduction> {
    let g = w.adjoint() * c_pinv.matrix();
    let g0 = w.adjoint() * c.matrix();
    let effects: Vec<Operator> = p
        .effects()
        .iter()
        .map(|m| Operator::new(red, &g * m.matrix() * g.adjoint()))
        .collect::<Result<_>>()?;
    let gens: Vec<Operator> = p
        .subspace()
        .basis()
        .iter()
        .map(|y| Operator::new(red, &g0 * y.matrix() * g0.adjoint()))
        .collect::<Result<_>>()?;
    let j = Subspace::span_closure(red, &gens, tol)?;
    Ok(PovmReduction {
        lambda: Povm::new(effects, j)?,
        g0,
    })
}

/// `D_u = G_0* D'_u G_0`.
fn transport_effects(p: &Povm, g0: &CMat, ds: &[Operator]) -> Result<Vec<Operator>> {
    ds.iter()
        .map(|d| Operator::new(p.algebra(), g0.adjoint() * d.matrix() * g0))
        .collect()
}

fn transported(mut rep: ExtremalityReport, method: Method, p: &Povm, g0: &CMat) -> Result<ExtremalityReport> {
    rep.method = method;
    rep.witness = None;
    if let Some(ds) = rep.effect_witness.take() {
        let back = transport_effects(p, g0, &ds)?;
        attach_effect_witness(&mut rep, &back);
    }
    Ok(rep)
}

/// Two outcomes: extremal iff `Λ_q` is a PVM and `{Λ_q}' ∩ (cJc*)^⊥ = {0}`.
pub fn two_outcome_extremal(p: &Povm, tol: &Tolerance) -> Result<ExtremalityReport> {
    if p.outcomes() != 2 {
        return Err(Error::Shape(format!("expected 2 outcomes, got {}", p.outcomes())));
    }
    require_gpovm(p, tol)?;
    let (c, c_pinv) = psd_sqrt_pinv(&p.total(), tol)?;
    let q = support_projection(&c, tol)?;
    let (w, red) = corner_isometry(&q)?;
    let r = reduce_povm(p, &c, &c_pinv, &w, &red, tol)?;
    two_outcome_reduced(p, &r, tol)
}

fn two_outcome_reduced(p: &Povm, r: &PovmReduction, tol: &Tolerance) -> Result<ExtremalityReport> {
    if require_pvm(&r.lambda, true, tol).is_ok() {
        let inner = pvm_extremal(&r.lambda, true, tol)?;
        return transported(inner, Method::TwoOutcome, p, &r.g0);
    }
    // Λ_q is not a PVM, so M is not extremal; the face test supplies a witness.
    let inner = povm_extremal(&r.lambda, tol)?;
    let verdict = inner.verdict;
    let mut rep = transported(inner, Method::TwoOutcome, p, &r.g0)?;
    match verdict {
        Verdict::NotExtremal => rep.note = Some("reduced POVM is not a PVM".into()),
        Verdict::Extremal => {
            rep.verdict = Verdict::Inconclusive;
            rep.disagreement = true;
            rep.note = Some("reduced POVM is not a PVM yet passes the face test".into());
        }
        Verdict::Inconclusive => {}
    }
    Ok(rep)
}

/// 1-testers: the face test on `dim(H_0)·M` as a generalized POVM for
/// `J_1`, cross-checked by the PVM route through `Tr_{H_1}` when the
/// reduced POVM is projective and by the two-outcome criterion.
///
/// Witness directions are reported for `dim(H_0)·M`; they are also
/// directions for `M` itself.
pub fn tester_extremal(t: &Tester, tol: &Tolerance) -> Result<ExtremalityReport> {
    let report = verify_tester(t, tol);
    if !report.member {
        return Err(Error::NotTester(format!(
            "factorization residual {:.3e}, min eigenvalue {:.3e}",
            report.factorization_residual, report.min_eigenvalue
        )));
    }
    let gp = t.as_gpovm(tol)?;
    let mut primary = povm_extremal(&gp, tol)?;
    primary.method = Method::Tester;

    let (h1, h0) = (t.h1(), t.h0());
    let d0 = h0.total_dim() as f64;
    let (s0, s0_pinv) = psd_sqrt_pinv(&report.omega.scale_real(d0), tol)?;
    let q0 = support_projection(&s0, tol)?;
    let (w0, r0) = corner_isometry(&q0)?;
    let id1 = h1.identity();
    let c = id1.kron(&s0);
    let c_pinv = id1.kron(&s0_pinv);
    let w = id1.matrix().kronecker(&w0);
    let red = h1.tensor(&r0);
    let r = reduce_povm(&gp, &c, &c_pinv, &w, &red, tol)?;

    let mut others = Vec::new();
    if require_pvm(&r.lambda, true, tol).is_ok() {
        let rt = Tester::new(h1, &r0, r.lambda.effects().to_vec())?;
        let j1 = rt.channel_subspace(tol)?;
        let lam = r.lambda.with_subspace(j1)?;
        let s = CpMap::partial_trace_map(&red, h1.num_factors(), tol)?;
        let rho0 = r0.identity().scale_real(1.0 / r0.total_dim() as f64);
        let inner = hom_pvm_extremal(&lam, &s, &rho0, tol)?;
        others.push(transported(inner, Method::HomPvm, &gp, &r.g0)?);
    }
    if gp.outcomes() == 2 {
        others.push(two_outcome_reduced(&gp, &r, tol)?);
    }
    Ok(combine(primary, others))
}

/// Face test for a generalized POVM, cross-checked against the face test
/// on its Choi matrix and, where they apply, the PVM and two-outcome routes.
pub fn povm_extremal_auto(p: &Povm, tol: &Tolerance) -> Result<ExtremalityReport> {
    let primary = povm_extremal(p, tol)?;
    let mut others = Vec::new();
    let gi = GchanInstance::new(p.to_map(tol)?, p.subspace().clone())?;
    others.push(super::extremal_direct(&gi)?);
    if require_pvm(p, false, tol).is_ok() {
        others.push(pvm_extremal(p, false, tol)?);
    }
    if p.outcomes() == 2 {
        others.push(two_outcome_extremal(p, tol)?);
    }
    let mut rep = combine(primary, others);
    rep.method = Method::Auto;
    Ok(rep)
}
