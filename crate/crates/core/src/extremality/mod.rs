//! Extremality certificates for generalized channels and generalized POVMs.
//!
//! Every decision reduces to the kernel of a linear system, decided at the
//! tolerance of the input. A nontrivial kernel vector becomes a witness: a
//! self-adjoint direction `D` such that `X ± tD` stays in the convex set.

mod channel;
mod povm;

pub use channel::{
    dim_bound, extremal_auto, extremal_conjugate, extremal_direct, extremal_kraus,
    extremal_kraus_outer, extremal_reduced, DimBound,
};
pub use povm::{
    hom_pvm_extremal, povm_dim_bound, povm_extremal, povm_extremal_auto, pvm_extremal,
    tester_extremal, two_outcome_extremal,
};

use std::fmt;

use nalgebra::DMatrix;

use crate::algebra::{Algebra, Operator};
use crate::gchannel::{verify_gchannel, verify_gpovm, GchanInstance, Povm};
use crate::linalg::{CMat, CVec, Kernel, Tolerance, C64, I, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Extremal,
    NotExtremal,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Extremal => "extremal",
            Verdict::NotExtremal => "not_extremal",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Direct,
    Kraus,
    /// `{V_k V_l*}` independence, the classical form for ordinary channels.
    KrausOuter,
    Conjugate,
    Reduced,
    DimBound,
    Povm,
    Pvm,
    TwoOutcome,
    HomPvm,
    Tester,
    Auto,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Kraus => "kraus",
            Method::KrausOuter => "kraus_outer",
            Method::Conjugate => "conjugate",
            Method::Reduced => "reduced",
            Method::DimBound => "dim_bound",
            Method::Povm => "povm",
            Method::Pvm => "pvm",
            Method::TwoOutcome => "two_outcome",
            Method::HomPvm => "hom_pvm",
            Method::Tester => "tester",
            Method::Auto => "auto",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sizes of the linear system behind a verdict.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RankData {
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub nullity: usize,
    /// More unknowns than equations: dependent by counting alone.
    pub structural: bool,
    /// Largest relative singular value treated as zero.
    pub null_residual: f64,
}

#[derive(Clone, Debug)]
pub struct ExtremalityReport {
    pub verdict: Verdict,
    pub method: Method,
    /// Self-adjoint direction on `B ⊗ A` (the Choi level).
    pub witness: Option<Operator>,
    /// For POVMs: the directions `D_u` on the effects.
    pub effect_witness: Option<Vec<Operator>>,
    pub rank_data: RankData,
    /// Smallest retained relative singular value of the deciding system.
    pub margin: f64,
    /// Verdicts of the other routes consulted.
    pub cross_checks: Vec<(Method, Verdict)>,
    /// Set when consulted routes gave conflicting definite verdicts.
    pub disagreement: bool,
    pub note: Option<String>,
}

impl ExtremalityReport {
    pub(crate) fn new(verdict: Verdict, method: Method, rank_data: RankData, margin: f64) -> Self {
        Self {
            verdict,
            method,
            witness: None,
            effect_witness: None,
            rank_data,
            margin,
            cross_checks: Vec::new(),
            disagreement: false,
            note: None,
        }
    }

    pub(crate) fn from_kernel<T: nalgebra::Scalar>(method: Method, k: &Kernel<T>, equations: usize) -> Self {
        let verdict = kernel_verdict(k);
        Self::new(verdict, method, rank_data(k, equations), k.decision.margin)
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

pub(crate) fn kernel_verdict<T: nalgebra::Scalar>(k: &Kernel<T>) -> Verdict {
    if k.structural || k.nullity() > 0 {
        Verdict::NotExtremal
    } else if k.decision.inconclusive {
        Verdict::Inconclusive
    } else {
        Verdict::Extremal
    }
}

/// Merges a primary report with cross-checks from other routes.
///
/// Definite verdicts that conflict yield `inconclusive` with
/// `disagreement` set. An inconclusive primary adopts the verdict (and
/// witness) of the other routes when they agree.
pub(crate) fn combine(primary: ExtremalityReport, others: Vec<ExtremalityReport>) -> ExtremalityReport {
    let mut rep = primary;
    let first = rep.verdict;
    let definite: Vec<Verdict> = std::iter::once(rep.verdict)
        .chain(others.iter().map(|o| o.verdict))
        .filter(|v| *v != Verdict::Inconclusive)
        .collect();
    let conflict = definite.windows(2).any(|w| w[0] != w[1]);
    rep.cross_checks
        .extend(others.iter().map(|o| (o.method, o.verdict)));
    if conflict {
        rep.disagreement = true;
        rep.verdict = Verdict::Inconclusive;
        rep.note = Some(format!(
            "routes disagree: {}",
            std::iter::once((rep.method, first))
                .chain(others.iter().map(|o| (o.method, o.verdict)))
                .map(|(m, v)| format!("{m}={v}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    } else if rep.verdict == Verdict::Inconclusive {
        if let Some(o) = others.iter().find(|o| o.verdict != Verdict::Inconclusive) {
            rep.verdict = o.verdict;
            if rep.witness.is_none() {
                rep.witness = o.witness.clone();
            }
            if rep.effect_witness.is_none() {
                rep.effect_witness = o.effect_witness.clone();
            }
            rep.note = Some(format!("decided by {}", o.method));
        }
    }
    if rep.witness.is_none() && rep.verdict == Verdict::NotExtremal {
        rep.witness = others.iter().find_map(|o| o.witness.clone());
    }
    rep
}

pub(crate) fn rank_data<T: nalgebra::Scalar>(k: &Kernel<T>, equations: usize) -> RankData {
    RankData {
        unknowns: k.unknowns,
        equations,
        rank: k.decision.rank,
        nullity: k.nullity(),
        structural: k.structural,
        null_residual: k.decision.null_residual,
    }
}

/// Makes a witness self-adjoint with unit HS norm; the diagonal entry of
/// largest magnitude is made nonnegative. `None` when `d` vanishes.
pub fn normalize_witness(d: &Operator) -> Option<Operator> {
    let scale = d.norm();
    if scale == 0.0 {
        return None;
    }
    let sum = d + &d.adjoint();
    let herm = if sum.norm() > 1e-8 * scale {
        sum
    } else {
        (d - &d.adjoint()).scale(I)
    };
    let n = herm.norm();
    if n <= 1e-12 * scale {
        return None;
    }
    let mut out = herm.scale_real(1.0 / n);
    let m = out.matrix();
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for i in 0..m.nrows() {
        let v = m[(i, i)].re;
        if v.abs() > best + 1e-12 {
            best = v.abs();
            sign = v.signum();
        }
    }
    if sign < 0.0 {
        out = out.scale_real(-1.0);
    }
    Some(out)
}

/// Largest `t ∈ {1, 1/2, 1/4, …}`, not below `tol`, with `X ± tD` both
/// generalized channels.
pub fn validate_witness(gi: &GchanInstance, d: &Operator, tol: &Tolerance) -> Option<f64> {
    let x = gi.map().choi();
    let (input, output) = (gi.map().input(), gi.map().output());
    let mut t = 1.0;
    while t >= tol.tol {
        let plus = x + &d.scale_real(t);
        let minus = x - &d.scale_real(t);
        let ok = |y: &Operator| {
            verify_gchannel(y, input, output, gi.subspace(), tol)
                .map(|m| m.member)
                .unwrap_or(false)
        };
        if ok(&plus) && ok(&minus) {
            return Some(t);
        }
        t *= 0.5;
    }
    None
}

/// Same as [`validate_witness`] for effect perturbations `M_u ± t D_u`.
pub fn validate_povm_witness(m: &Povm, d: &[Operator], tol: &Tolerance) -> Option<f64> {
    if d.len() != m.outcomes() {
        return None;
    }
    let mut t = 1.0;
    while t >= tol.tol {
        let shift = |s: f64| {
            let eff: Vec<Operator> = m
                .effects()
                .iter()
                .zip(d)
                .map(|(e, w)| e + &w.scale_real(s * t))
                .collect();
            Povm::new(eff, m.subspace().clone())
                .map(|p| verify_gpovm(&p, tol).member)
                .unwrap_or(false)
        };
        if shift(1.0) && shift(-1.0) {
            return Some(t);
        }
        t *= 0.5;
    }
    None
}

/// `Σ_u |u><u| ⊗ D_u^T`, the Choi-level form of effect directions.
pub fn effects_to_choi(effects: &[Operator]) -> Operator {
    let alg = effects[0].algebra();
    let m = effects.len();
    let out = Algebra::diagonal(m).expect("nonempty");
    let target = out.tensor(alg);
    let mut acc = CMat::zeros(target.total_dim(), target.total_dim());
    for (u, e) in effects.iter().enumerate() {
        let mut proj = CMat::zeros(m, m);
        proj[(u, u)] = C64::new(1.0, 0.0);
        acc += proj.kronecker(&e.matrix().transpose());
    }
    Operator::new(&target, acc).expect("block diagonal")
}

/// Self-adjoint operators `Σ h_kl |u_k><u_l|` over groups of orthonormal
/// vectors, parametrized by real coordinates so that the map to operators
/// is an isometry: diagonals `|u_k><u_k|`, then for `k < l` the symmetric
/// `(|u_k><u_l| + |u_l><u_k|)/√2` and antisymmetric `i(|u_k><u_l| − |u_l><u_k|)/√2`.
pub(crate) struct HermitianFamily {
    pub vectors: Vec<CVec>,
    /// Each generator: `(k, l, kind, group)`, kind 0 diagonal, 1 symmetric, 2 antisymmetric.
    gens: Vec<(usize, usize, u8, usize)>,
    group_sizes: Vec<usize>,
}

impl HermitianFamily {
    pub fn new(groups: Vec<Vec<CVec>>) -> Self {
        let mut vectors = Vec::new();
        let mut gens = Vec::new();
        let mut group_sizes = Vec::new();
        for (gid, g) in groups.into_iter().enumerate() {
            let base = vectors.len();
            let r = g.len();
            group_sizes.push(r);
            vectors.extend(g);
            for k in 0..r {
                gens.push((base + k, base + k, 0, gid));
            }
            for k in 0..r {
                for l in k + 1..r {
                    gens.push((base + k, base + l, 1, gid));
                    gens.push((base + k, base + l, 2, gid));
                }
            }
        }
        Self {
            vectors,
            gens,
            group_sizes,
        }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    /// `Σ r_g²`.
    pub fn real_dim(&self) -> usize {
        self.group_sizes.iter().map(|r| r * r).sum()
    }

    /// Real constraint matrix. `g(k, l)` returns the complex constraint
    /// values of the rank-one operator `|u_k><u_l|`; rows hold the real
    /// parts of every constraint, then the imaginary parts.
    pub fn constraint_matrix(&self, constraints: usize, mut g: impl FnMut(usize, usize) -> Vec<C64>) -> DMatrix<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = DMatrix::zeros(2 * constraints, self.len());
        for (col, &(k, l, kind, _)) in self.gens.iter().enumerate() {
            let vals: Vec<C64> = match kind {
                0 => g(k, k),
                _ => {
                    let a = g(k, l);
                    let b = g(l, k);
                    a.iter()
                        .zip(&b)
                        .map(|(x, y)| {
                            if kind == 1 {
                                (x + y) * s
                            } else {
                                (x - y) * C64::new(0.0, s)
                            }
                        })
                        .collect()
                }
            };
            for (row, v) in vals.iter().enumerate() {
                m[(row, col)] = v.re;
                m[(constraints + row, col)] = v.im;
            }
        }
        m
    }

    /// The ambient matrix of the element with real coordinates `h`.
    pub fn element(&self, h: &[f64], dim: usize) -> CMat {
        self.element_in(h, dim, |_| true)
    }

    /// Like [`element`](Self::element), keeping only the chosen groups.
    pub fn element_in(&self, h: &[f64], dim: usize, keep: impl Fn(usize) -> bool) -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = CMat::zeros(dim, dim);
        for (&(k, l, kind, group), &c) in self.gens.iter().zip(h) {
            if c == 0.0 || !keep(group) {
                continue;
            }
            let (u, w) = (&self.vectors[k], &self.vectors[l]);
            match kind {
                0 => out += (u * u.adjoint()).scale(c),
                1 => out += (u * w.adjoint() + w * u.adjoint()).scale(c * s),
                _ => {
                    out += (u * w.adjoint() - w * u.adjoint()).map(|z| z * C64::new(0.0, c * s))
                }
            }
        }
        out
    }
}

/// Coordinates `<y, a>` of `a` against each column of `ys`.
pub(crate) fn inner_products(ys: &CMat, a_coords: &CVec) -> Vec<C64> {
    (0..ys.ncols())
        .map(|j| {
            ys.column(j)
                .iter()
                .zip(a_coords.iter())
                .fold(ZERO, |acc, (y, a)| acc + y.conj() * a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn witness_normalization_is_deterministic() {
        let a = Algebra::full(2).unwrap();
        let d = a.unit(1, 1).unwrap().scale_real(-3.0);
        let w = normalize_witness(&d).unwrap();
        assert!((w.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
        let skew = Operator::new(&a, {
            let mut m = CMat::zeros(2, 2);
            m[(0, 1)] = ONE;
            m[(1, 0)] = -ONE;
            m
        })
        .unwrap();
        let w = normalize_witness(&skew).unwrap();
        assert!(w.is_hermitian(1e-12));
        assert!((w.norm() - 1.0).abs() < 1e-12);
        assert!(normalize_witness(&a.zero()).is_none());
    }

    #[test]
    fn hermitian_family_is_isometric() {
        let mut u = CVec::zeros(3);
        u[0] = ONE;
        let mut v = CVec::zeros(3);
        v[2] = ONE;
        let fam = HermitianFamily::new(vec![vec![u, v]]);
        assert_eq!(fam.len(), 4);
        assert_eq!(fam.real_dim(), 4);
        let h = [0.1, -0.2, 0.3, 0.4];
        let e = fam.element(&h, 3);
        assert!((e.norm() - h.iter().map(|x| x * x).sum::<f64>().sqrt()).abs() < 1e-12);
        assert!((&e - e.adjoint()).norm() < 1e-14);
    }
}
