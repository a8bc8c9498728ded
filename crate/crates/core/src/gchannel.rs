//! Membership in the convex sets of generalized channels, generalized
//! POVMs, combs and 1-testers, plus simple channels for homomorphic
//! constraint maps.

use crate::algebra::{ensure_psd, psd_sqrt_pinv, support_projection, trace_leading, Algebra, Operator};
use crate::cp_map::CpMap;
use crate::error::{Error, Result};
use crate::linalg::{CMat, Tolerance, C64};
use crate::subspace::{comb_algebra, comb_normalization, comb_subspace, Subspace};

/// Residuals behind a membership decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// Smallest eigenvalue of the Choi matrix (or of the effects).
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue of `Tr_B X` (or of `Σ M_u`).
    pub marginal_min_eigenvalue: f64,
    /// Norm of the component of `Tr_B X − I` along `J^T`.
    pub constraint_residual: f64,
}

impl Membership {
    pub(crate) fn describe(&self) -> String {
        format!(
            "min eigenvalue {:.3e}, marginal min eigenvalue {:.3e}, constraint residual {:.3e}",
            self.min_eigenvalue, self.marginal_min_eigenvalue, self.constraint_residual
        )
    }
}

/// Whether `x ∈ C_J(A, B)`, where `x` is a Choi matrix on `output ⊗ input`.
///
/// Positivity is judged relative to the largest eigenvalue. The constraint
/// residual must be at most `tol · max(1, ‖Tr_B X‖)`.
pub fn verify_gchannel(
    x: &Operator,
    input: &Algebra,
    output: &Algebra,
    j: &Subspace,
    tol: &Tolerance,
) -> Result<Membership> {
    let expected = output.tensor(input);
    if x.algebra() != &expected {
        return Err(Error::Shape(format!(
            "Choi matrix lives on {}, expected {}",
            x.algebra(),
            expected
        )));
    }
    if j.algebra() != input {
        return Err(Error::Shape(format!(
            "constraint subspace of {}, input algebra {}",
            j.algebra(),
            input
        )));
    }
    let marginal = trace_leading(x, output.num_factors())?;
    let marginal = Operator::new(input, marginal.into_matrix())?;
    Ok(constraint_check(
        x.is_psd(tol.tol) && x.is_hermitian(tol.band() * x.norm().max(1.0)),
        x.min_eigenvalue(),
        &marginal.transpose(),
        j,
        tol,
    ))
}

/// `Σ M_u ∈ (I + J^⊥) ∩ A^+` bookkeeping shared by channels and POVMs.
/// `total` is `Φ*(I)`, i.e. `(Tr_B X)^T`.
fn constraint_check(psd: bool, min_eig: f64, total: &Operator, j: &Subspace, tol: &Tolerance) -> Membership {
    let alg = total.algebra();
    let diff = total - &alg.identity();
    let residual = j.project(&diff).expect("same algebra").norm();
    let marginal_ok = total.is_psd(tol.tol);
    let bound = tol.tol * total.norm().max(1.0);
    Membership {
        member: psd && marginal_ok && residual <= bound,
        min_eigenvalue: min_eig,
        marginal_min_eigenvalue: total.min_eigenvalue(),
        constraint_residual: residual,
    }
}

/// A CP map together with the subspace it should preserve trace on.
#[derive(Clone, Debug)]
pub struct GchanInstance {
    map: CpMap,
    subspace: Subspace,
    marginal: Operator,
    support: Operator,
}

impl GchanInstance {
    pub fn new(map: CpMap, subspace: Subspace) -> Result<Self> {
        if subspace.algebra() != map.input() {
            return Err(Error::Shape(format!(
                "constraint subspace of {}, map defined on {}",
                subspace.algebra(),
                map.input()
            )));
        }
        let marginal = Operator::new(map.input(), map.output_marginal().into_matrix())?;
        let support = support_projection(&marginal.transpose(), map.tolerance())?;
        Ok(Self {
            map,
            subspace,
            marginal,
            support,
        })
    }

    pub fn map(&self) -> &CpMap {
        &self.map
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// `Tr_B X`.
    pub fn marginal(&self) -> &Operator {
        &self.marginal
    }

    /// `p = supp(Tr_B X)^T`.
    pub fn input_support(&self) -> &Operator {
        &self.support
    }

    pub fn verify(&self) -> Membership {
        let tol = self.map.tolerance();
        let x = self.map.choi();
        constraint_check(
            x.is_psd(tol.tol),
            x.min_eigenvalue(),
            &self.marginal.transpose(),
            &self.subspace,
            tol,
        )
    }

    /// Fails with `NotMember` unless the instance is a generalized channel.
    pub fn require_member(&self) -> Result<Membership> {
        let m = self.verify();
        if m.member {
            Ok(m)
        } else {
            Err(Error::NotMember(m.describe()))
        }
    }
}

/// Effects `M_u` on `A` together with the constraint subspace `J`.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<Operator>,
    subspace: Subspace,
}

impl Povm {
    pub fn new(effects: Vec<Operator>, subspace: Subspace) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::Shape("a POVM needs at least one effect".into()));
        }
        for e in &effects {
            if e.algebra() != subspace.algebra() {
                return Err(Error::Shape(format!(
                    "effect in {}, constraint subspace of {}",
                    e.algebra(),
                    subspace.algebra()
                )));
            }
        }
        Ok(Self { effects, subspace })
    }

    /// Ordinary POVM constraint `J = A`.
    pub fn unconstrained(effects: Vec<Operator>) -> Result<Self> {
        let alg = effects
            .first()
            .ok_or_else(|| Error::Shape("a POVM needs at least one effect".into()))?
            .algebra()
            .clone();
        Self::new(effects, Subspace::whole(&alg))
    }

    pub fn algebra(&self) -> &Algebra {
        self.subspace.algebra()
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn total(&self) -> Operator {
        let alg = self.algebra();
        self.effects.iter().fold(alg.zero(), |acc, e| &acc + e)
    }

    pub fn with_subspace(&self, subspace: Subspace) -> Result<Self> {
        Self::new(self.effects.clone(), subspace)
    }

    /// Outcome algebra `ℂ^m`.
    pub fn outcome_algebra(&self) -> Algebra {
        Algebra::diagonal(self.outcomes()).expect("nonempty").with_label(format!("C^{}", self.outcomes()))
    }

    /// `X = Σ_u |u><u| ⊗ M_u^T` on `ℂ^m ⊗ A`.
    pub fn to_choi(&self) -> Operator {
        let out = self.outcome_algebra();
        let alg = out.tensor(self.algebra());
        let m = self.outcomes();
        let mut acc = CMat::zeros(alg.total_dim(), alg.total_dim());
        for (u, e) in self.effects.iter().enumerate() {
            let mut proj = CMat::zeros(m, m);
            proj[(u, u)] = C64::new(1.0, 0.0);
            acc += proj.kronecker(&e.matrix().transpose());
        }
        Operator::new(&alg, acc).expect("block diagonal")
    }

    /// The map `a ↦ Σ_u Tr(M_u a) |u><u|`.
    pub fn to_map(&self, tol: &Tolerance) -> Result<CpMap> {
        CpMap::from_choi(&self.to_choi(), self.algebra(), &self.outcome_algebra(), tol)
    }

    /// Effects `M_u = Φ*(|u><u|)` of a map into `ℂ^m`.
    pub fn from_map(map: &CpMap, subspace: Subspace) -> Result<Self> {
        let out = map.output();
        if out.block_dims().iter().any(|&d| d != 1) {
            return Err(Error::Shape(format!("{out} is not commutative")));
        }
        let adj = map.adjoint_map();
        let effects = (0..out.total_dim())
            .map(|u| adj.apply(&out.unit(u, u).expect("diagonal")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(effects, subspace)
    }

    /// Whether the effects are orthogonal projections summing to `total`.
    pub fn is_pvm(&self, tol: &Tolerance) -> bool {
        self.pvm_defect(tol).is_none()
    }

    /// First reason the effects fail to be a PVM (projections, pairwise
    /// orthogonal), if any.
    pub fn pvm_defect(&self, tol: &Tolerance) -> Option<String> {
        let eps = tol.band().max(1e-8);
        for (u, e) in self.effects.iter().enumerate() {
            let sq = e * e;
            if (sq.matrix() - e.matrix()).norm() > eps || !e.is_hermitian(eps) {
                return Some(format!("effect {u} is not a projection"));
            }
        }
        for (u, a) in self.effects.iter().enumerate() {
            for (w, b) in self.effects.iter().enumerate().skip(u + 1) {
                if (a * b).norm() > eps {
                    return Some(format!("effects {u} and {w} are not orthogonal"));
                }
            }
        }
        None
    }
}

/// Whether `M ∈ M_J(A, U)`.
pub fn verify_gpovm(m: &Povm, tol: &Tolerance) -> Membership {
    let mut psd = true;
    let mut min_eig = f64::INFINITY;
    for e in m.effects() {
        psd &= e.is_psd(tol.tol) && e.is_hermitian(tol.band() * e.norm().max(1.0));
        min_eig = min_eig.min(e.min_eigenvalue());
    }
    constraint_check(psd, min_eig, &m.total(), m.subspace(), tol)
}

/// A candidate element of `C(B_0, …, B_n)`.
#[derive(Clone, Debug)]
pub struct CombInstance {
    algebras: Vec<Algebra>,
    x: Operator,
}

/// The partial-trace ladder `Y^(0) = X, Y^(1), …, Y^(k)`.
#[derive(Clone, Debug)]
pub struct CombReport {
    pub member: bool,
    pub ladder: Vec<Operator>,
    /// `‖Tr_{B_{n−2m}} Y^(m) − I ⊗ Y^(m+1)‖` for each rung.
    pub residuals: Vec<f64>,
    /// Residual of the final condition on `Y^(k)`.
    pub terminal_residual: f64,
    pub min_eigenvalue: f64,
}

impl CombInstance {
    pub fn new(algebras: Vec<Algebra>, x: Operator) -> Result<Self> {
        if algebras.len() < 2 {
            return Err(Error::InvalidAlgebra("a comb needs at least B_0 and B_1".into()));
        }
        let an = comb_algebra(&algebras, algebras.len() - 1)?;
        if x.algebra() != &an {
            return Err(Error::Shape(format!("comb element in {}, expected {}", x.algebra(), an)));
        }
        let x = Operator::new(&an, x.into_matrix())?;
        Ok(Self { algebras, x })
    }

    pub fn algebras(&self) -> &[Algebra] {
        &self.algebras
    }

    pub fn level(&self) -> usize {
        self.algebras.len() - 1
    }

    pub fn operator(&self) -> &Operator {
        &self.x
    }

    /// `c_{n−1}`: members of `C(B_0..B_n)` are `1/c_{n−1}` times generalized channels.
    pub fn scale(&self) -> f64 {
        comb_normalization(&self.algebras, self.level() - 1)
    }

    /// `c_{n−1} X` as a map `A_{n−1} → B_n`.
    pub fn as_gchannel(&self) -> Result<(Operator, Algebra, Algebra)> {
        let n = self.level();
        let input = comb_algebra(&self.algebras, n - 1)?;
        let output = self.algebras[n].clone();
        let alg = output.tensor(&input);
        let x = Operator::new(&alg, self.x.matrix().clone())?.scale_real(self.scale());
        Ok((x, input, output))
    }

    /// Membership through the generalized-channel description with `J_{n−1}`.
    pub fn verify_as_gchannel(&self, tol: &Tolerance) -> Result<Membership> {
        let (x, input, output) = self.as_gchannel()?;
        let j = comb_subspace(&self.algebras[..self.level()], tol)?;
        let j = Subspace::span_closure(&input, &j.basis().iter().map(|b| Operator::new(&input, b.matrix().clone())).collect::<Result<Vec<_>>>()?, tol)?;
        verify_gchannel(&x, &input, &output, &j, tol)
    }
}

/// Factorization test `Y = I_B ⊗ ω` over the leading `count` leaves.
/// Returns `ω` and the residual.
pub fn factor_identity(y: &Operator, count: usize) -> Result<(Operator, f64)> {
    let leaves = y.algebra().factors();
    let lead: usize = leaves[..count].iter().map(|l| l.total_dim()).product();
    let head = Algebra::tensor_all(&leaves[..count].iter().collect::<Vec<_>>())?;
    let omega = trace_leading(y, count)?.scale_real(1.0 / lead as f64);
    let rebuilt = head.identity().kron(&omega);
    let residual = (y.matrix() - rebuilt.matrix()).norm();
    Ok((omega, residual))
}

/// Checks the hierarchy `Tr_{B_{n−2m}} Y^(m) = I_{B_{n−2m−1}} ⊗ Y^(m+1)`.
pub fn verify_comb(c: &CombInstance, tol: &Tolerance) -> CombReport {
    let n = c.level();
    let k = n / 2;
    let algs = &c.algebras;
    let x = &c.x;
    let psd = x.is_psd(tol.tol) && x.is_hermitian(tol.band() * x.norm().max(1.0));
    let mut ladder = vec![x.clone()];
    let mut residuals = Vec::new();
    let scale = x.norm().max(1.0);
    let mut ok = psd;
    for m in 0..k {
        let top = n - 2 * m;
        let cur = ladder.last().expect("nonempty");
        let traced = trace_leading(cur, algs[top].num_factors()).expect("comb factors");
        let (next, res) = factor_identity(&traced, algs[top - 1].num_factors()).expect("comb factors");
        let next = Operator::new(&comb_algebra(algs, top - 2).expect("level"), next.into_matrix())
            .expect("same algebra");
        ok &= res <= tol.tol * scale;
        residuals.push(res);
        ladder.push(next);
    }
    let last = ladder.last().expect("nonempty");
    let terminal_residual = if n % 2 == 1 {
        // Y^(k) ∈ C(B_0, B_1): Tr_{B_1} Y = I_{B_0}
        let r = trace_leading(last, algs[1].num_factors()).expect("comb factors");
        (r.matrix() - CMat::identity(r.matrix().nrows(), r.matrix().nrows())).norm()
    } else {
        (last.trace() - C64::new(1.0, 0.0)).norm()
    };
    ok &= terminal_residual <= tol.tol * scale;
    ok &= last.is_psd(tol.tol);
    CombReport {
        member: ok,
        ladder,
        residuals,
        terminal_residual,
        min_eigenvalue: x.min_eigenvalue(),
    }
}

/// Effects of a 1-tester on `B_1 ⊗ B_0` (`H_1` first).
#[derive(Clone, Debug)]
pub struct Tester {
    h1: Algebra,
    h0: Algebra,
    effects: Vec<Operator>,
}

#[derive(Clone, Debug)]
pub struct TesterReport {
    pub member: bool,
    pub omega: Operator,
    pub factorization_residual: f64,
    pub min_eigenvalue: f64,
}

impl Tester {
    pub fn new(h1: &Algebra, h0: &Algebra, effects: Vec<Operator>) -> Result<Self> {
        let alg = h1.tensor(h0);
        if effects.is_empty() {
            return Err(Error::NotTester("no effects".into()));
        }
        let effects = effects
            .into_iter()
            .map(|e| {
                if e.algebra() != &alg {
                    Err(Error::Shape(format!("effect in {}, expected {}", e.algebra(), alg)))
                } else {
                    Operator::new(&alg, e.into_matrix())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            h1: h1.clone(),
            h0: h0.clone(),
            effects,
        })
    }

    pub fn h1(&self) -> &Algebra {
        &self.h1
    }

    pub fn h0(&self) -> &Algebra {
        &self.h0
    }

    pub fn algebra(&self) -> Algebra {
        self.h1.tensor(&self.h0)
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    /// `J_1 = Tr_{H_1}^{-1}(ℂ I)`, the span of the channels `B_0 → B_1`.
    pub fn channel_subspace(&self, tol: &Tolerance) -> Result<Subspace> {
        let j = comb_subspace(&[self.h0.clone(), self.h1.clone()], tol)?;
        Subspace::span_closure(&self.algebra(), &j.basis().iter().map(|b| Operator::new(&self.algebra(), b.matrix().clone())).collect::<Result<Vec<_>>>()?, tol)
    }

    /// `dim(H_0) · M` as an element of `M_{J_1}(A, U)`.
    pub fn as_gpovm(&self, tol: &Tolerance) -> Result<Povm> {
        let d0 = self.h0.total_dim() as f64;
        Povm::new(
            self.effects.iter().map(|e| e.scale_real(d0)).collect(),
            self.channel_subspace(tol)?,
        )
    }
}

/// Whether `Σ M_u = I_{H_1} ⊗ ω` with `ω` a state.
pub fn verify_tester(t: &Tester, tol: &Tolerance) -> TesterReport {
    let alg = t.algebra();
    let total = t.effects.iter().fold(alg.zero(), |acc, e| &acc + e);
    let (omega, residual) = factor_identity(&total, t.h1.num_factors()).expect("two factors");
    let omega = Operator::new(&t.h0, omega.into_matrix()).expect("same algebra");
    let mut min_eig = f64::INFINITY;
    let mut psd = true;
    for e in &t.effects {
        psd &= e.is_psd(tol.tol) && e.is_hermitian(tol.band() * e.norm().max(1.0));
        min_eig = min_eig.min(e.min_eigenvalue());
    }
    let scale = total.norm().max(1.0);
    let trace_ok = (omega.trace() - C64::new(1.0, 0.0)).norm() <= tol.tol * scale;
    TesterReport {
        member: psd && residual <= tol.tol * scale && trace_ok && omega.is_psd(tol.tol),
        omega,
        factorization_residual: residual,
        min_eigenvalue: min_eig,
    }
}

/// Outcome of [`simple_from_target_state`].
#[derive(Clone, Debug)]
pub struct SimpleChannel {
    /// `d = S*(b_0²)`, so that `χ_{d^{1/2}}` is a simple generalized channel.
    pub d: Operator,
    /// The positive solution of `b_0 ρ_0 b_0 = σ_0`.
    pub b0: Operator,
    /// Largest `‖S(χ_{d^{1/2}}(σ)) − σ_0‖` over the sampled `σ ∈ K_{S,ρ_0}`.
    pub inclusion_residual: f64,
    /// Largest `‖S*(ab) − S*(a)S*(b)‖` over pairs of matrix units of `A_0`.
    pub homomorphism_residual: f64,
    pub samples: usize,
}

/// `b_0 = σ^{1/2}(σ^{1/2} ρ σ^{1/2})^{−1/2} σ^{1/2}`, pseudo-inverse on the support.
pub fn positive_solution(rho0: &Operator, sigma0: &Operator, tol: &Tolerance) -> Result<Operator> {
    let (s_half, _) = psd_sqrt_pinv(sigma0, tol)?;
    let mid = &(&s_half * rho0) * &s_half;
    let (_, mid_pinv_sqrt) = psd_sqrt_pinv(&mid, tol)?;
    Ok(&(&s_half * &mid_pinv_sqrt) * &s_half)
}

/// The simple generalized channel for `J = S^{-1}(ℂ ρ_0)` sending the
/// section at `ρ_0` into the section at `σ_0`.
///
/// `S*` is expected to be an injective homomorphism; this is spot-checked
/// and reported, not enforced.
pub fn simple_from_target_state(
    s: &CpMap,
    rho0: &Operator,
    sigma0: &Operator,
    tol: &Tolerance,
) -> Result<SimpleChannel> {
    let a0 = s.output();
    if rho0.algebra() != a0 || sigma0.algebra() != a0 {
        return Err(Error::Shape(format!("states must live in {a0}")));
    }
    if !s.is_channel() {
        return Err(Error::NotChannel {
            residual: s.trace_residual(),
        });
    }
    ensure_psd(rho0, tol)?;
    ensure_psd(sigma0, tol)?;
    let spec = rho0.spectrum();
    let top = spec.first().cloned().unwrap_or(0.0);
    let min = spec.last().cloned().unwrap_or(0.0);
    if min <= tol.band() * top.max(f64::MIN_POSITIVE) {
        return Err(Error::NotInvertible { min_eigenvalue: min });
    }
    let b0 = positive_solution(rho0, sigma0, tol)?;
    let adj = s.adjoint_map();
    let d = adj.apply(&(&b0 * &b0))?;
    let homomorphism_residual = homomorphism_defect(&adj)?;

    // Points of K_{S,ρ0}: a base point plus kernel directions of S.
    let base = section_point(s, &adj, rho0, tol)?;
    let (sqrt_d, _) = psd_sqrt_pinv(&hermitian(&d), tol)?;
    let chi = crate::cp_map::simple_conjugation(&sqrt_d, tol);
    let ker = kernel_directions(s, tol)?;
    let lam_min = base.min_eigenvalue().max(0.0);
    let mut inclusion_residual = 0.0_f64;
    let mut samples = 0;
    let mut check = |sigma: &Operator| -> Result<()> {
        let image = s.apply(&chi.apply(sigma)?)?;
        inclusion_residual = inclusion_residual.max((image.matrix() - sigma0.matrix()).norm());
        samples += 1;
        Ok(())
    };
    check(&base)?;
    for h in &ker {
        let spread = h.spectrum().iter().map(|v| v.abs()).fold(0.0, f64::max);
        if spread == 0.0 {
            continue;
        }
        let t = 0.9 * lam_min / spread;
        check(&(&base + &h.scale_real(t)))?;
        check(&(&base - &h.scale_real(t)))?;
    }
    Ok(SimpleChannel {
        d,
        b0,
        inclusion_residual,
        homomorphism_residual,
        samples,
    })
}

fn hermitian(a: &Operator) -> Operator {
    Operator::new(a.algebra(), crate::linalg::hermitian_part(a.matrix())).expect("same algebra")
}

/// `max ‖S*(e f) − S*(e) S*(f)‖` over matrix units `e, f` of `A_0`.
pub fn homomorphism_defect(adj: &CpMap) -> Result<f64> {
    let a0 = adj.input();
    let units: Vec<Operator> = a0
        .entries()
        .iter()
        .map(|&(r, c)| a0.unit(r, c))
        .collect::<Result<_>>()?;
    let images: Vec<Operator> = units.iter().map(|u| adj.apply(u)).collect::<Result<_>>()?;
    let mut worst = 0.0_f64;
    for (i, e) in units.iter().enumerate() {
        for (j, f) in units.iter().enumerate() {
            let lhs = adj.apply(&(e * f))?;
            let rhs = &images[i] * &images[j];
            worst = worst.max((lhs.matrix() - rhs.matrix()).norm());
        }
    }
    Ok(worst)
}

/// A state `σ` with `S(σ) = ρ_0`, taken of the form `S*(x)`.
pub fn section_point(s: &CpMap, adj: &CpMap, rho0: &Operator, tol: &Tolerance) -> Result<Operator> {
    let a0 = s.output();
    let units: Vec<Operator> = a0
        .entries()
        .iter()
        .map(|&(r, c)| a0.unit(r, c))
        .collect::<Result<_>>()?;
    let cols: Vec<_> = units
        .iter()
        .map(|u| Ok(s.apply(&adj.apply(u)?)?.coords()))
        .collect::<Result<Vec<_>>>()?;
    let gram = CMat::from_columns(&cols);
    let svd = gram.svd(true, true);
    let x = svd
        .solve(&rho0.coords(), tol.tol)
        .map_err(|e| Error::Shape(e.to_string()))?;
    let x = Operator::from_coords(a0, &x)?;
    let sigma = hermitian(&adj.apply(&x)?);
    if !sigma.is_psd(tol.tol) {
        return Err(Error::NotPositive {
            min_eigenvalue: sigma.min_eigenvalue(),
        });
    }
    Ok(sigma)
}

/// HS-orthonormal self-adjoint basis of `ker S`.
fn kernel_directions(s: &CpMap, tol: &Tolerance) -> Result<Vec<Operator>> {
    let zero = Subspace::zero(s.output());
    let ker = Subspace::preimage_under_channel(s, &zero, tol)?;
    let herm: Vec<Operator> = ker
        .basis()
        .iter()
        .flat_map(|b| {
            let h1 = hermitian(b);
            let h2 = hermitian(&b.scale(C64::new(0.0, -1.0)));
            [h1, h2]
        })
        .filter(|h| h.norm() > tol.band())
        .collect();
    // Gram-Schmidt over the reals keeps the directions self-adjoint.
    let mut out: Vec<Operator> = Vec::new();
    for h in herm {
        let mut v = h;
        for o in &out {
            let c = crate::algebra::hs_inner(o, &v)?.re;
            v = &v - &o.scale_real(c);
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            out.push(v.scale_real(1.0 / nrm));
        }
    }
    Ok(out)
}

/// `S: M_n → ℂ^n`, `a ↦ (a_11, …, a_nn)`.
pub fn diagonal_map(n: usize, tol: &Tolerance) -> Result<CpMap> {
    let a = Algebra::full(n)?;
    let d = Algebra::diagonal(n)?;
    let ops: Vec<CMat> = (0..n)
        .map(|i| {
            let mut v = CMat::zeros(n, n);
            v[(i, i)] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    CpMap::from_kraus_matrices(&a, &d, &ops, tol)
}

/// `J_λ = S^{-1}(ℂ λ)` for the diagonal map.
pub fn diag_subspace(lambda: &[f64], tol: &Tolerance) -> Result<(Subspace, CpMap, Operator)> {
    let n = lambda.len();
    let s = diagonal_map(n, tol)?;
    let rho0 = Operator::new(
        s.output(),
        CMat::from_diagonal(&crate::linalg::CVec::from_iterator(n, lambda.iter().map(|&l| C64::new(l, 0.0)))),
    )?;
    let j0 = Subspace::span_closure(s.output(), std::slice::from_ref(&rho0), tol)?;
    let j = Subspace::preimage_under_channel(&s, &j0, tol)?;
    Ok((j, s, rho0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVec;

    fn t() -> Tolerance {
        Tolerance::default()
    }

    fn re(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn m(n: usize) -> Algebra {
        Algebra::full(n).unwrap()
    }

    fn diag(a: &Algebra, v: &[f64]) -> Operator {
        Operator::new(a, CMat::from_diagonal(&CVec::from_iterator(v.len(), v.iter().map(|&x| re(x))))).unwrap()
    }

    fn qubit_state() -> Operator {
        Operator::new(
            &m(2),
            CMat::from_row_slice(2, 2, &[re(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), re(0.3)]),
        )
        .unwrap()
    }

    #[test]
    fn gchannel_examples() {
        let a = m(2);
        let id = CpMap::identity(&a, &t());
        let full = Subspace::whole(&a);
        assert!(verify_gchannel(id.choi(), &a, &a, &full, &t()).unwrap().member);
        // replacement map on the channel subspace of a two-qubit input
        let aa = m(2).tensor(&m(2));
        let rho = qubit_state();
        let x = rho.kron(&aa.identity());
        let tester = Tester::new(&m(2), &m(2), vec![aa.identity()]).unwrap();
        let j = tester.channel_subspace(&t()).unwrap();
        assert!(verify_gchannel(&x, &aa, &a, &j, &t()).unwrap().member);
        let twice = id.choi().scale_real(2.0);
        let res = verify_gchannel(&twice, &a, &a, &full, &t()).unwrap();
        assert!(!res.member);
        assert!((res.constraint_residual - 2f64.sqrt()).abs() < 1e-12);
        assert!(verify_gchannel(&twice, &aa, &a, &full, &t()).is_err());
    }

    #[test]
    fn gpovm_examples() {
        let a = m(2);
        let e = [a.unit(0, 0).unwrap(), a.unit(1, 1).unwrap()];
        let j = Subspace::span_closure(&a, &[a.unit(0, 1).unwrap()], &t()).unwrap();
        assert!(verify_gpovm(&Povm::new(e.to_vec(), j).unwrap(), &t()).member);
        let bad = Povm::unconstrained(vec![a.identity().scale_real(2.0), a.zero()]).unwrap();
        assert!(!verify_gpovm(&bad, &t()).member);
        // tester effects scaled into the generalized POVM set
        let h = m(2);
        let omega = qubit_state();
        let effects = vec![
            h.unit(0, 0).unwrap().kron(&omega),
            h.unit(1, 1).unwrap().kron(&omega),
        ];
        let tester = Tester::new(&h, &h, effects).unwrap();
        assert!(verify_gpovm(&tester.as_gpovm(&t()).unwrap(), &t()).member);
    }

    #[test]
    fn gpovm_matches_choi_membership() {
        let a = m(2);
        let [i, x] = [a.identity(), Operator::new(&a, CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])).unwrap()];
        let (j, _, _) = diag_subspace(&[0.5, 0.5], &t()).unwrap();
        for (w, member) in [(0.3, true), (0.5, true), (0.6, false)] {
            let e1 = &i.scale_real(0.5) + &x.scale_real(w);
            let e2 = &i.scale_real(0.5) - &x.scale_real(w);
            let p = Povm::new(vec![e1, e2], j.clone()).unwrap();
            let direct = verify_gpovm(&p, &t()).member;
            let via = verify_gchannel(&p.to_choi(), &a, &p.outcome_algebra(), &j, &t()).unwrap().member;
            assert_eq!(direct, member);
            assert_eq!(direct, via);
        }
    }

    #[test]
    fn comb_examples() {
        let a = m(2);
        let algs1 = vec![a.clone(), a.clone()];
        let id = CpMap::identity(&a, &t());
        let c = CombInstance::new(algs1, id.choi().clone()).unwrap();
        let r = verify_comb(&c, &t());
        assert!(r.member);
        assert_eq!(r.ladder.len(), 1);

        let algs2 = vec![a.clone(), a.clone(), a.clone()];
        let omega = qubit_state();
        let rho = diag(&a, &[0.25, 0.75]);
        let x = rho.kron(&a.identity().kron(&omega));
        let x = Operator::new(&comb_algebra(&algs2, 2).unwrap(), x.into_matrix()).unwrap();
        let c = CombInstance::new(algs2.clone(), x).unwrap();
        let r = verify_comb(&c, &t());
        assert!(r.member);
        assert!((r.ladder[1].matrix() - omega.matrix()).norm() < 1e-12);
        assert!(c.verify_as_gchannel(&t()).unwrap().member);

        let bad = rho.kron(&diag(&a, &[1.0, 2.0]).kron(&omega)).scale_real(1.0 / 1.5);
        let bad = Operator::new(&comb_algebra(&algs2, 2).unwrap(), bad.into_matrix()).unwrap();
        let c = CombInstance::new(algs2, bad).unwrap();
        let r = verify_comb(&c, &t());
        assert!(!r.member);
        assert!(r.residuals[0] > 0.1);
        assert!(!c.verify_as_gchannel(&t()).unwrap().member);
    }

    #[test]
    fn tester_examples() {
        let h = m(2);
        let phi = diag(&h, &[1.0, 0.0]);
        let effects = vec![h.unit(0, 0).unwrap().kron(&phi), h.unit(1, 1).unwrap().kron(&phi)];
        let r = verify_tester(&Tester::new(&h, &h, effects).unwrap(), &t());
        assert!(r.member);
        assert_eq!(r.omega.spectrum().iter().filter(|&&v| v > 1e-9).count(), 1);

        let hh = h.tensor(&h);
        let plain = vec![hh.unit(0, 0).unwrap(), &hh.identity() - &hh.unit(0, 0).unwrap()];
        let r = verify_tester(&Tester::new(&h, &h, plain).unwrap(), &t());
        assert!(!r.member);
        assert!((r.omega.matrix() - CMat::identity(2, 2)).norm() < 1e-12);
        let scaled = vec![hh.unit(0, 0).unwrap().scale_real(0.5), (&hh.identity() - &hh.unit(0, 0).unwrap()).scale_real(0.5)];
        assert!(verify_tester(&Tester::new(&h, &h, scaled).unwrap(), &t()).member);

        let sx = Operator::new(&h, CMat::from_row_slice(2, 2, &[re(1.0), re(1.0), re(1.0), re(1.0)])).unwrap();
        let r = verify_tester(&Tester::new(&h, &h, vec![sx.kron(&qubit_state())]).unwrap(), &t());
        assert!(!r.member);
    }

    #[test]
    fn diag_subspace_dimension() {
        let (j, s, _) = diag_subspace(&[0.5, 0.5], &t()).unwrap();
        assert_eq!(j.dim(), 3);
        assert!(s.is_channel());
        // members of Diag_λ lie in J_λ
        let rho = Operator::new(&m(2), CMat::from_row_slice(2, 2, &[re(0.5), C64::new(0.2, 0.3), C64::new(0.2, -0.3), re(0.5)])).unwrap();
        assert!(j.contains(&rho, &t()));
        assert!(!j.contains(&diag(&m(2), &[0.3, 0.7]), &t()));
    }

    #[test]
    fn simple_channel_examples() {
        let (_, s, rho0) = diag_subspace(&[0.5, 0.5], &t()).unwrap();
        let mu = diag(s.output(), &[1.0 / 3.0, 2.0 / 3.0]);
        let sc = simple_from_target_state(&s, &rho0, &mu, &t()).unwrap();
        assert!((sc.d.matrix() - diag(&m(2), &[2.0 / 3.0, 4.0 / 3.0]).matrix()).norm() < 1e-12);
        assert!(sc.inclusion_residual < 1e-10);
        assert!(sc.homomorphism_residual < 1e-12);
        assert!(sc.samples > 1);

        // σ0 = ρ0 is the fixed point
        let sc = simple_from_target_state(&s, &rho0, &rho0, &t()).unwrap();
        assert!((sc.d.matrix() - CMat::identity(2, 2)).norm() < 1e-12);

        // ρ0 = I/n gives b0 = (n σ0)^{1/2} on the partial trace
        let aa = m(2).tensor(&m(2));
        let tr = CpMap::partial_trace_map(&aa, 1, &t()).unwrap();
        let half = tr.output().identity().scale_real(0.5);
        let sigma = Operator::new(tr.output(), qubit_state().into_matrix()).unwrap();
        let sc = simple_from_target_state(&tr, &half, &sigma, &t()).unwrap();
        let (want, _) = psd_sqrt_pinv(&sigma.scale_real(2.0), &t()).unwrap();
        assert!((sc.b0.matrix() - want.matrix()).norm() < 1e-10);
        assert!(sc.inclusion_residual < 1e-10);
        let sing = diag(s.output(), &[1.0, 0.0]);
        assert!(matches!(
            simple_from_target_state(&s, &sing, &mu, &t()),
            Err(Error::NotInvertible { .. })
        ));
    }
}
