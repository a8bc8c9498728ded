//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::time::{Duration, Instant};

use gchan::algebra::{Algebra, Operator};
use gchan::cp_map::{choi_distance, choi_from_kraus, compose, minimal_decomposition, simple_conjugation, CpMap};
use gchan::extremality::{
    dim_bound, extremal_conjugate, extremal_direct, extremal_kraus, extremal_kraus_outer, extremal_reduced,
    povm_extremal_auto, tester_extremal, validate_witness, Verdict,
};
use gchan::gchannel::{diag_subspace, simple_from_target_state, verify_comb, GchanInstance, Povm, Tester};
use gchan::linalg::{CMat, CVec, Tolerance, C64};
use gchan::sample::{random_comb, random_instance, random_pvm, random_small_algebra, rng_from_seed, ConstraintKind};
use gchan::subspace::{comb_perp_basis, Subspace};
use rand::Rng;

const INSTANCES: u64 = 500;
const MAX_INCONCLUSIVE_RATE: f64 = 0.02;
const MAX_RUNTIME: Duration = Duration::from_secs(60);
const WITNESS_TOL: f64 = 1e-8;
const MIN_WITNESS_STEP: f64 = 1e-6;
const ROUND_TRIP_TOL: f64 = 1e-9;
const MARGINAL_TOL: f64 = 1e-10;
const DIAG_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn proj(v: &[C64]) -> CMat {
    let k = CVec::from_column_slice(v);
    &k * k.adjoint()
}

/// Everything the sweep-based criteria need from one instance.
struct SweepRecord {
    verdicts: [Verdict; 4],
    witness_steps: Vec<Option<f64>>,
    bound_holds: bool,
    kraus_round_trip: f64,
    decomposition_error: f64,
    marginal_error: f64,
}

struct Sweep {
    records: Vec<SweepRecord>,
    errors: Vec<String>,
    elapsed: Duration,
}

fn sweep() -> Sweep {
    let tol = Tolerance::default();
    let wtol = Tolerance::new(WITNESS_TOL);
    let kinds = [ConstraintKind::Full, ConstraintKind::Comb, ConstraintKind::Diag];
    let start = Instant::now();
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for seed in 0..INSTANCES {
        let mut rng = rng_from_seed(seed);
        let kind = kinds[(seed % 3) as usize];
        let mut run = || -> gchan::error::Result<SweepRecord> {
            let gi = random_instance(kind, &tol, &mut rng)?;
            let reports = [
                extremal_direct(&gi)?,
                extremal_kraus(&gi)?,
                extremal_conjugate(&gi)?,
                extremal_reduced(&gi)?,
            ];
            let witness_steps = reports
                .iter()
                .filter(|r| r.verdict == Verdict::NotExtremal)
                .map(|r| r.witness.as_ref().and_then(|d| validate_witness(&gi, d, &wtol)))
                .collect();
            let phi = gi.map();
            let kraus_round_trip = (choi_from_kraus(phi.minimal_kraus()).matrix() - phi.choi().matrix()).norm();
            let dec = minimal_decomposition(phi)?;
            let rebuilt = compose(&dec.lambda_on_support, &simple_conjugation(&dec.c, &tol))?;
            let via_corner = compose(&dec.reduced, &dec.compression_map(&tol))?;
            let decomposition_error = choi_distance(&rebuilt, phi).max(choi_distance(&via_corner, phi));
            let ccs = dec.c.matrix().adjoint() * dec.c.matrix();
            let marginal_error = (ccs - gi.marginal().matrix().transpose()).norm();
            Ok(SweepRecord {
                verdicts: [reports[0].verdict, reports[1].verdict, reports[2].verdict, reports[3].verdict],
                witness_steps,
                bound_holds: dim_bound(&gi)?.holds,
                kraus_round_trip,
                decomposition_error,
                marginal_error,
            })
        };
        match run() {
            Ok(r) => records.push(r),
            Err(e) => errors.push(format!("seed {seed}: {e}")),
        }
    }
    Sweep { records, errors, elapsed: start.elapsed() }
}

fn criterion_1(s: &Sweep) -> Outcome {
    let definite = |v: &Verdict| *v != Verdict::Inconclusive;
    let inconclusive = s.records.iter().filter(|r| r.verdicts.iter().any(|v| !definite(v))).count();
    let disagreements = s
        .records
        .iter()
        .filter(|r| {
            let d: Vec<_> = r.verdicts.iter().filter(|v| definite(v)).collect();
            d.windows(2).any(|w| w[0] != w[1])
        })
        .count();
    let extremal = s.records.iter().filter(|r| r.verdicts[0] == Verdict::Extremal).count();
    let rate = inconclusive as f64 / INSTANCES as f64;
    let pass = s.errors.is_empty()
        && s.records.len() as u64 == INSTANCES
        && rate <= MAX_INCONCLUSIVE_RATE
        && disagreements == 0
        && s.elapsed <= MAX_RUNTIME;
    outcome(
        pass,
        format!(
            "{} instances ({} extremal), inconclusive {:.1}%, disagreements {}, errors {}, {:.2?}",
            s.records.len(),
            extremal,
            100.0 * rate,
            disagreements,
            s.errors.len(),
            s.elapsed
        ),
    )
}

fn criterion_2(s: &Sweep) -> Outcome {
    let steps: Vec<Option<f64>> = s.records.iter().flat_map(|r| r.witness_steps.iter().cloned()).collect();
    let bad = steps.iter().filter(|t| t.is_none_or(|t| t < MIN_WITNESS_STEP)).count();
    let smallest = steps.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        bad == 0 && !steps.is_empty(),
        format!("{} witnesses, {} invalid, smallest accepted step {:.3e}", steps.len(), bad, smallest),
    )
}

fn qubit_tester(effects: Vec<CMat>) -> Tester {
    let q = Algebra::full(2).unwrap();
    let alg = q.tensor(&q);
    let ops = effects.into_iter().map(|m| Operator::new(&alg, m).unwrap()).collect();
    Tester::new(&q, &q, ops).unwrap()
}

fn criterion_3() -> Outcome {
    let tol = Tolerance::default();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let id = CMat::identity(2, 2);
    let sx = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
    let e0 = proj(&[re(1.0), re(0.0)]);
    let e1 = proj(&[re(0.0), re(1.0)]);
    let phi = e0.clone();
    let n1 = id.scale(0.3) + sx.scale(0.2);
    let n2 = &id - &n1;
    let forbidden = e0.kronecker(&e0) + id.kronecker(&e1);
    let bell = proj(&[re(r), re(0.0), re(0.0), re(r)]);
    let cases = [
        ("a", qubit_tester(vec![e0.kronecker(&phi), e1.kronecker(&phi)]), Verdict::Extremal),
        ("b", qubit_tester(vec![n1.kronecker(&phi), n2.kronecker(&phi)]), Verdict::NotExtremal),
        (
            "c",
            qubit_tester(vec![forbidden.scale(0.5), (CMat::identity(4, 4) - &forbidden).scale(0.5)]),
            Verdict::NotExtremal,
        ),
        (
            "d",
            qubit_tester(vec![bell.scale(0.5), (CMat::identity(4, 4) - &bell).scale(0.5)]),
            Verdict::Extremal,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, t, expected) in cases {
        match tester_extremal(&t, &tol) {
            Ok(rep) => {
                let ok = rep.verdict == expected && !rep.disagreement && rep.margin > 10.0 * tol.tol;
                pass &= ok;
                parts.push(format!("({name}) {} margin {:.2e}", rep.verdict, rep.margin));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("({name}) error {e}"));
            }
        }
    }
    outcome(pass, parts.join(", "))
}

fn criterion_4() -> Outcome {
    let tol = Tolerance::default();
    let mut rng = rng_from_seed(4);
    let (mut pvm_ok, mut mix_ok) = (0, 0);
    let (mut pvms, mut mixes) = (0, 0);
    while pvms < 100 {
        let alg = random_small_algebra(6, &mut rng);
        let m = rng.random_range(1..=4);
        let p = random_pvm(&alg, m, &mut rng);
        pvms += 1;
        let povm = Povm::unconstrained(p.clone()).unwrap();
        if povm_extremal_auto(&povm, &tol).is_ok_and(|r| r.verdict == Verdict::Extremal && !r.disagreement) {
            pvm_ok += 1;
        }
        if m < 2 {
            continue;
        }
        let q = random_pvm(&alg, m, &mut rng);
        let distinct = p.iter().zip(&q).any(|(a, b)| (a.matrix() - b.matrix()).norm() > 1e-6);
        if !distinct {
            continue;
        }
        let w = rng.random_range(0.1..0.9);
        let mixed: Vec<Operator> = p.iter().zip(&q).map(|(a, b)| &a.scale_real(w) + &b.scale_real(1.0 - w)).collect();
        mixes += 1;
        let povm = Povm::unconstrained(mixed).unwrap();
        if povm_extremal_auto(&povm, &tol).is_ok_and(|r| r.verdict == Verdict::NotExtremal && !r.disagreement) {
            mix_ok += 1;
        }
    }
    outcome(
        pvm_ok == pvms && mix_ok == mixes && mixes > 0,
        format!("PVMs extremal {pvm_ok}/{pvms}, mixtures not extremal {mix_ok}/{mixes}"),
    )
}

fn criterion_5(s: &Sweep) -> Outcome {
    let violations = s
        .records
        .iter()
        .filter(|r| r.verdicts[0] == Verdict::Extremal && !r.bound_holds)
        .count();
    let failing = s.records.iter().filter(|r| !r.bound_holds).count();
    outcome(
        violations == 0,
        format!("{failing} instances fail the bound, {violations} of them certified extremal"),
    )
}

fn criterion_6() -> Outcome {
    let tol = Tolerance::default();
    let q = Algebra::full(2).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2usize, 3] {
        let algs = vec![q.clone(); n + 1];
        let mut agree = 0;
        let mut correct = 0;
        for i in 0..200u64 {
            let member = i < 100;
            let mut rng = rng_from_seed(1000 * n as u64 + i);
            let Ok(c) = random_comb(&algs, member, &tol, &mut rng) else { continue };
            let a = verify_comb(&c, &tol).member;
            let b = c.verify_as_gchannel(&tol).map(|m| m.member).unwrap_or(false);
            agree += usize::from(a == b);
            correct += usize::from(a == member);
        }
        pass &= agree == 200 && correct == 200;
        parts.push(format!("n={n}: agree {agree}/200, labels {correct}/200"));
    }
    let d1 = comb_perp_basis(&[q.clone(), q.clone()]).map(|s| s.dim()).unwrap_or(usize::MAX);
    let d2 = comb_perp_basis(&[q.clone(), q.clone(), q.clone()]).map(|s| s.dim()).unwrap_or(usize::MAX);
    pass &= d1 == 3 && d2 == 12;
    parts.push(format!("perp dims {d1}, {d2}"));
    outcome(pass, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let tol = Tolerance::default();
    let run = || -> gchan::error::Result<(f64, f64)> {
        let (_, s, rho0) = diag_subspace(&[0.5, 0.5], &tol)?;
        let sigma0 = Operator::new(s.output(), CMat::from_diagonal(&CVec::from_column_slice(&[re(1.0 / 3.0), re(2.0 / 3.0)])))?;
        let simple = simple_from_target_state(&s, &rho0, &sigma0, &tol)?;
        let target = CMat::from_diagonal(&CVec::from_column_slice(&[re(2.0 / 3.0), re(4.0 / 3.0)]));
        let d_err = (simple.d.matrix() - &target).norm();
        let d = Operator::new(&Algebra::full(2)?, simple.d.matrix().clone())?;
        let (sqrt_d, _) = gchan::algebra::psd_sqrt_pinv(&d, &tol)?;
        let chi = simple_conjugation(&sqrt_d, &tol);
        let mut rng = rng_from_seed(7);
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            // States with diagonal (1/2, 1/2): |z| ≤ 1/2 off the diagonal.
            let radius = 0.5 * rng.random::<f64>().sqrt();
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let z = C64::from_polar(radius, angle);
            let rho = Operator::new(&d.algebra().clone(), CMat::from_row_slice(2, 2, &[re(0.5), z, z.conj(), re(0.5)]))?;
            let image = chi.apply(&rho)?;
            let m = image.matrix();
            worst = worst.max((m[(0, 0)] - re(1.0 / 3.0)).norm()).max((m[(1, 1)] - re(2.0 / 3.0)).norm());
        }
        Ok((d_err, worst))
    };
    match run() {
        Ok((d_err, worst)) => outcome(
            d_err <= DIAG_TOL && worst <= DIAG_TOL,
            format!("‖d − diag(2/3, 4/3)‖ = {d_err:.2e}, worst diagonal residual over 50 states {worst:.2e}"),
        ),
        Err(e) => outcome(false, format!("error {e}")),
    }
}

fn criterion_8(s: &Sweep) -> Outcome {
    let max = |f: fn(&SweepRecord) -> f64| s.records.iter().map(f).fold(0.0, f64::max);
    let (k, d, c) = (max(|r| r.kraus_round_trip), max(|r| r.decomposition_error), max(|r| r.marginal_error));
    outcome(
        k <= ROUND_TRIP_TOL && d <= ROUND_TRIP_TOL && c <= MARGINAL_TOL && !s.records.is_empty(),
        format!("Kraus round trip {k:.2e}, decomposition {d:.2e}, c*c marginal {c:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let tol = Tolerance::default();
    let q = Algebra::full(2).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMat::from_diagonal(&CVec::from_column_slice(&[re(1.0), re(-1.0)]));
    let dephasing = CpMap::from_kraus_matrices(&q, &q, &[CMat::identity(2, 2).scale(r), z.scale(r)], &tol).unwrap();
    let gi = GchanInstance::new(dephasing, Subspace::whole(&q)).unwrap();
    let direct = extremal_direct(&gi).unwrap().verdict;
    let inner = extremal_kraus(&gi).unwrap().verdict;
    let outer = extremal_kraus_outer(&gi).unwrap().verdict;
    // The trace map separates the two conventions.
    let trace = CpMap::trace_map(&q, &tol);
    let gt = GchanInstance::new(trace, Subspace::whole(&q)).unwrap();
    let t_direct = extremal_direct(&gt).unwrap().verdict;
    let t_inner = extremal_kraus(&gt).unwrap().verdict;
    let t_outer = extremal_kraus_outer(&gt).unwrap().verdict;
    let pass = inner == direct && t_inner == t_direct && t_outer != t_direct && direct == Verdict::NotExtremal;
    outcome(
        pass,
        format!(
            "dephasing: direct {direct}, V*V {inner}, VV* {outer}; trace map: direct {t_direct}, V*V {t_inner}, VV* {t_outer}; locked V*V"
        ),
    )
}

fn main() {
    let s = sweep();
    let results = [
        ("1 tri-method agreement", criterion_1(&s)),
        ("2 witness validity", criterion_2(&s)),
        ("3 qubit testers", criterion_3()),
        ("4 PVMs and mixtures", criterion_4()),
        ("5 dimension bound necessity", criterion_5(&s)),
        ("6 comb hierarchy", criterion_6()),
        ("7 diagonal simple channel", criterion_7()),
        ("8 round trips", criterion_8(&s)),
        ("9 Kraus convention", criterion_9()),
    ];
    for e in s.errors.iter().take(10) {
        println!("  sweep error: {e}");
    }
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {} failed", results.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
