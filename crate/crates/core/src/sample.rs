//! Seeded generators for channels, generalized channels, POVMs, PVMs,
//! testers and combs.
//!
//! These are member generators, not uniform samplers. Every generator is a
//! deterministic function of the RNG state, so a seed pins an instance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{psd_sqrt_pinv, Algebra, Operator};
use crate::cp_map::CpMap;
use crate::error::{Error, Result};
use crate::gchannel::{CombInstance, Povm, Tester};
use crate::linalg::{hermitian_part, CMat, CVec, Tolerance, C64};
use crate::subspace::{comb_algebra, comb_subspace, Subspace};

/// Name and version of the generator algorithm, written into file headers.
pub const GENERATOR: &str = "gchan-chacha8-v1";

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random vector supported on one block of `alg`.
fn block_vector<R: Rng + ?Sized>(alg: &Algebra, block: usize, rng: &mut R) -> CVec {
    let mut v = CVec::zeros(alg.total_dim());
    for &i in alg.block_indices(block) {
        v[i] = gaussian(rng);
    }
    v
}

/// Sum of `rank` random rank-one terms, each on a block chosen with
/// probability proportional to its dimension; `None` gives full rank.
pub fn random_psd<R: Rng + ?Sized>(alg: &Algebra, rank: Option<usize>, rng: &mut R) -> Operator {
    let n = alg.total_dim();
    let Some(rank) = rank else {
        let blocks: Vec<CMat> = alg
            .block_dims()
            .iter()
            .map(|&d| {
                let g = ginibre(d, d, rng);
                &g * g.adjoint()
            })
            .collect();
        return Operator::from_blocks(alg, &blocks).expect("block shapes");
    };
    let mut m = CMat::zeros(n, n);
    for _ in 0..rank {
        let b = weighted_block(alg, rng);
        let v = block_vector(alg, b, rng);
        m += &v * v.adjoint();
    }
    Operator::new(alg, m).expect("block supported")
}

fn weighted_block<R: Rng + ?Sized>(alg: &Algebra, rng: &mut R) -> usize {
    let dims = alg.block_dims();
    let mut pick = rng.random_range(0..alg.total_dim());
    for (j, d) in dims.iter().enumerate() {
        if pick < *d {
            return j;
        }
        pick -= d;
    }
    dims.len() - 1
}

/// Random density matrix of the given rank (full rank for `None`).
pub fn random_state<R: Rng + ?Sized>(alg: &Algebra, rank: Option<usize>, rng: &mut R) -> Operator {
    let p = random_psd(alg, rank, rng);
    let t = p.trace().re;
    p.scale_real(1.0 / t)
}

/// `(I ⊗ g^T) X (I ⊗ ḡ)`: the Choi matrix of `a ↦ Φ(g a g*)`.
pub fn precompose_conjugation(x: &Operator, output: &Algebra, g: &CMat) -> Result<Operator> {
    let m = output.total_dim();
    let lift = CMat::identity(m, m).kronecker(&g.transpose());
    Operator::new(x.algebra(), &lift * x.matrix() * lift.adjoint())
}

/// Normalizes a CP map with invertible `Φ*(I)` into a channel by
/// precomposing with `χ_{Φ*(I)^{-1/2}}`.
fn normalize_to_channel(x: &Operator, input: &Algebra, output: &Algebra, tol: &Tolerance) -> Result<CpMap> {
    let marginal = crate::algebra::trace_leading(x, output.num_factors())?;
    let marginal = Operator::new(input, marginal.transpose().into_matrix())?;
    let spec = marginal.spectrum();
    let (top, low) = (spec[0], spec[spec.len() - 1]);
    if low <= 1e-6 * top {
        return Err(Error::NotInvertible { min_eigenvalue: low });
    }
    let (_, g) = psd_sqrt_pinv(&marginal, tol)?;
    let y = precompose_conjugation(x, output, g.matrix())?;
    CpMap::from_choi(&y, input, output, tol)
}

/// Random channel `A → B` with Choi rank `kraus`, redrawing until the
/// marginal of the Choi matrix is well conditioned.
pub fn random_channel<R: Rng + ?Sized>(
    input: &Algebra,
    output: &Algebra,
    kraus: usize,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<CpMap> {
    let alg = output.tensor(input);
    let mut rank = kraus.max(1);
    for _ in 0..64 {
        let x = random_psd(&alg, Some(rank), rng);
        match normalize_to_channel(&x, input, output, tol) {
            Ok(c) => return Ok(c),
            Err(Error::NotInvertible { .. }) => rank += 1,
            Err(e) => return Err(e),
        }
    }
    normalize_to_channel(&random_psd(&alg, None, rng), input, output, tol)
}

/// Random `d ∈ (I + J^⊥) ∩ A^+`. With `boundary` the perturbation is
/// stretched until `d` is singular, so that the minimal decomposition has
/// a proper corner.
pub fn random_constraint_point<R: Rng + ?Sized>(j: &Subspace, boundary: bool, rng: &mut R) -> Result<Operator> {
    let alg = j.algebra();
    let id = alg.identity();
    let perp = j.orth_complement();
    if perp.is_zero() {
        return Ok(id);
    }
    let g = ginibre(alg.total_dim(), alg.total_dim(), rng);
    let h = crate::algebra::cond_expectation(&hermitian_part(&g), alg)?;
    let h = perp.project(&h)?;
    let h = Operator::new(alg, hermitian_part(h.matrix()))?;
    let low = h.min_eigenvalue();
    if low >= -1e-12 {
        return Ok(id);
    }
    // scale so that the smallest eigenvalue of I + s h lands at 0 (boundary) or in (0, 1)
    let s = if boundary { 1.0 / -low } else { rng.random_range(0.2..0.9) / -low };
    Ok(&id + &h.scale_real(s))
}

/// A generalized channel `Λ ∘ χ_{d^{1/2}}` with `Λ` a random channel and
/// `d` a random point of `(I + J^⊥) ∩ A^+`.
pub fn random_gchannel<R: Rng + ?Sized>(
    output: &Algebra,
    j: &Subspace,
    kraus: usize,
    boundary: bool,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<CpMap> {
    let input = j.algebra();
    let lambda = random_channel(input, output, kraus, tol, rng)?;
    let d = random_constraint_point(j, boundary, rng)?;
    let (c, _) = psd_sqrt_pinv(&d, tol)?;
    let x = precompose_conjugation(lambda.choi(), output, c.matrix())?;
    CpMap::from_choi(&x, input, output, tol)
}

/// Projection sampler: a random PSD `X` is moved along `I_B ⊗ a / dim B`
/// onto the affine constraint, then mixed toward `I / dim B` until it is
/// positive again.
pub fn projected_gchannel<R: Rng + ?Sized>(
    output: &Algebra,
    j: &Subspace,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<CpMap> {
    let input = j.algebra();
    let alg = output.tensor(input);
    let db = output.total_dim() as f64;
    let x = random_psd(&alg, None, rng);
    let x = x.scale_real(input.total_dim() as f64 / x.trace().re);
    let marginal = crate::algebra::trace_leading(&x, output.num_factors())?;
    let marginal = Operator::new(input, marginal.into_matrix())?;
    let jt = j.transpose(tol);
    let excess = jt.project(&(&marginal - &input.identity()))?;
    let shift = output.identity().kron(&excess).scale_real(1.0 / db);
    let y = Operator::new(&alg, (x.matrix() - shift.matrix()).clone())?;
    let low = y.min_eigenvalue();
    let floor = 1.0 / db;
    let y = if low < 0.0 {
        let s = (-low / (floor - low)) * 1.01;
        let known = alg.identity().scale_real(floor);
        &y.scale_real(1.0 - s) + &known.scale_real(s)
    } else {
        y
    };
    CpMap::from_choi(&y, input, output, tol)
}

/// Random PVM with `outcomes` effects: a blockwise unitary basis split
/// into nonempty groups where possible.
pub fn random_pvm<R: Rng + ?Sized>(alg: &Algebra, outcomes: usize, rng: &mut R) -> Vec<Operator> {
    let n = alg.total_dim();
    let mut basis: Vec<CVec> = Vec::new();
    for j in 0..alg.num_blocks() {
        let idx = alg.block_indices(j);
        let u = random_unitary(idx.len(), rng);
        for k in 0..idx.len() {
            let mut v = CVec::zeros(n);
            for (a, &r) in idx.iter().enumerate() {
                v[r] = u[(a, k)];
            }
            basis.push(v);
        }
    }
    basis.shuffle(rng);
    let mut owner: Vec<usize> = (0..n).map(|i| if i < outcomes { i } else { rng.random_range(0..outcomes) }).collect();
    owner.shuffle(rng);
    (0..outcomes)
        .map(|u| {
            let mut p = CMat::zeros(n, n);
            for (v, _) in basis.iter().zip(&owner).filter(|(_, &o)| o == u) {
                p += v * v.adjoint();
            }
            Operator::new(alg, p).expect("block supported")
        })
        .collect()
}

/// Random POVM `M_u = S^{-1/2} G_u S^{-1/2}` from PSD `G_u` of the given rank.
pub fn random_povm<R: Rng + ?Sized>(
    alg: &Algebra,
    outcomes: usize,
    rank: Option<usize>,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<Vec<Operator>> {
    for _ in 0..64 {
        let gs: Vec<Operator> = (0..outcomes).map(|_| random_psd(alg, rank, rng)).collect();
        let total = gs.iter().fold(alg.zero(), |acc, g| &acc + g);
        let spec = total.spectrum();
        if spec[spec.len() - 1] <= 1e-6 * spec[0] {
            continue;
        }
        let (_, s) = psd_sqrt_pinv(&total, tol)?;
        return Ok(gs.iter().map(|g| &(&s * g) * &s).collect());
    }
    Err(Error::NotInvertible { min_eigenvalue: 0.0 })
}

/// Generalized POVM `M_u = c Λ_u c` with `c² ∈ (I + J^⊥) ∩ A^+`.
pub fn random_gpovm<R: Rng + ?Sized>(
    j: &Subspace,
    lambda: &[Operator],
    boundary: bool,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<Povm> {
    let d = random_constraint_point(j, boundary, rng)?;
    let (c, _) = psd_sqrt_pinv(&d, tol)?;
    Povm::new(lambda.iter().map(|l| &(&c * l) * &c).collect(), j.clone())
}

/// 1-tester `M_u = (I ⊗ ω^{1/2}) Λ_u (I ⊗ ω^{1/2})` from a POVM `Λ` on
/// `H_1 ⊗ H_0` and a random state `ω` of the given rank.
pub fn random_tester<R: Rng + ?Sized>(
    h1: &Algebra,
    h0: &Algebra,
    lambda: &[Operator],
    omega_rank: Option<usize>,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<Tester> {
    let omega = random_state(h0, omega_rank, rng);
    let (s, _) = psd_sqrt_pinv(&omega, tol)?;
    let c = h1.identity().kron(&s);
    let alg = h1.tensor(h0);
    let effects = lambda
        .iter()
        .map(|l| Operator::new(&alg, c.matrix() * l.matrix() * c.matrix()))
        .collect::<Result<Vec<_>>>()?;
    Tester::new(h1, h0, effects)
}

/// `J_{n−1}` on `A_{n−1}`, recast onto the tensor-product algebra.
pub fn comb_constraint(algebras: &[Algebra], tol: &Tolerance) -> Result<(Algebra, Subspace)> {
    let n = algebras.len() - 1;
    let input = comb_algebra(algebras, n - 1)?;
    let j = comb_subspace(&algebras[..n], tol)?;
    let gens = j
        .basis()
        .iter()
        .map(|b| Operator::new(&input, b.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok((input.clone(), Subspace::span_closure(&input, &gens, tol)?))
}

/// A comb in `C(B_0, …, B_n)`: `1/c_{n−1}` times a generalized channel
/// for `J_{n−1}`. Non-members are produced by one of three defects:
/// wrong normalization, a broken hierarchy, or a negative direction.
pub fn random_comb<R: Rng + ?Sized>(
    algebras: &[Algebra],
    member: bool,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<CombInstance> {
    let n = algebras.len() - 1;
    let (_, j) = comb_constraint(algebras, tol)?;
    let kraus = rng.random_range(1..=4);
    let phi = random_gchannel(&algebras[n], &j, kraus, false, tol, rng)?;
    let scale = crate::subspace::comb_normalization(algebras, n - 1);
    let an = comb_algebra(algebras, n)?;
    let mut x = Operator::new(&an, phi.choi().matrix().clone())?.scale_real(1.0 / scale);
    if !member {
        match rng.random_range(0..3) {
            0 => x = x.scale_real(rng.random_range(1.05..1.5)),
            1 => {
                // add a self-adjoint direction whose partial trace leaves J_{n−1}
                let h = hermitian_part(&ginibre(an.total_dim(), an.total_dim(), rng));
                let h = crate::algebra::cond_expectation(&h, &an)?;
                let eps = 0.05 * x.norm() / h.norm();
                let pert = &x + &h.scale_real(eps);
                let low = pert.min_eigenvalue();
                x = if low < 0.0 {
                    &pert + &an.identity().scale_real(-low)
                } else {
                    pert
                };
            }
            _ => {
                let v = block_vector(&an, weighted_block(&an, rng), rng);
                let v = v.unscale(v.norm());
                let dip = x.norm() + 1.0;
                x = Operator::new(&an, x.matrix() - (&v * v.adjoint()).scale(dip))?;
            }
        }
    }
    CombInstance::new(algebras.to_vec(), x)
}

/// Random probability vector with entries bounded away from zero.
pub fn random_probability<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|r| r / s).collect()
}

/// Constraint families used by the instance generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Full,
    /// `J_1` for channels `B_0 → B_1`, on `B_1 ⊗ B_0`.
    Comb,
    /// `J_λ` for the diagonal map on `M_n`.
    Diag,
}

impl ConstraintKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConstraintKind::Full => "full",
            ConstraintKind::Comb => "comb",
            ConstraintKind::Diag => "diag",
        }
    }
}

const SMALL_ALGEBRAS: &[&[usize]] = &[
    &[1],
    &[2],
    &[3],
    &[1, 1],
    &[2, 1],
    &[1, 1, 1],
    &[2, 2],
    &[3, 1],
    &[2, 1, 1],
    &[3, 2],
    &[2, 2, 2],
    &[3, 3],
];

/// Random algebra with blocks of size at most 3 and total dimension at most `max_total`.
pub fn random_small_algebra<R: Rng + ?Sized>(max_total: usize, rng: &mut R) -> Algebra {
    let fits: Vec<&&[usize]> = SMALL_ALGEBRAS
        .iter()
        .filter(|d| d.iter().sum::<usize>() <= max_total)
        .collect();
    let dims = fits[rng.random_range(0..fits.len())];
    Algebra::new(dims).expect("valid dims")
}

/// A random generalized channel for one of the constraint families.
///
/// Blocks are at most 3 and total dimensions at most 6; the Choi rank is
/// between 1 and 4 and one instance in four sits on the boundary of the
/// constraint set.
pub fn random_instance<R: Rng + ?Sized>(
    kind: ConstraintKind,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<crate::gchannel::GchanInstance> {
    let j = match kind {
        ConstraintKind::Full => Subspace::whole(&random_small_algebra(6, rng)),
        ConstraintKind::Comb => {
            const PAIRS: &[(&[usize], &[usize])] = &[
                (&[1, 1], &[2]),
                (&[1, 1], &[3]),
                (&[1, 1, 1], &[2]),
                (&[2], &[1, 1]),
                (&[3], &[1, 1]),
                (&[2], &[1, 1, 1]),
                (&[2, 1], &[1, 1]),
            ];
            let (b0, b1) = PAIRS[rng.random_range(0..PAIRS.len())];
            let algs = [Algebra::new(b0)?, Algebra::new(b1)?];
            let input = algs[1].tensor(&algs[0]);
            let jc = comb_subspace(&algs, tol)?;
            let gens = jc
                .basis()
                .iter()
                .map(|b| Operator::new(&input, b.matrix().clone()))
                .collect::<Result<Vec<_>>>()?;
            Subspace::span_closure(&input, &gens, tol)?
        }
        ConstraintKind::Diag => {
            let n = rng.random_range(2..=3);
            crate::gchannel::diag_subspace(&random_probability(n, rng), tol)?.0
        }
    };
    let output = random_small_algebra(6, rng);
    let kraus = rng.random_range(1..=4);
    let boundary = rng.random_range(0..4) == 0;
    let phi = random_gchannel(&output, &j, kraus, boundary, tol, rng)?;
    crate::gchannel::GchanInstance::new(phi, j)
}
