use gchan::algebra::Operator;
use gchan::cp_map::{choi_from_kraus, compose, CpMap};
use gchan::extremality::{extremal_auto, extremal_direct, validate_witness, Verdict};
use gchan::gchannel::GchanInstance;
use gchan::io::{from_json, to_json, OperatorFile, Problem, ProblemFile, SubspaceSpec};
use gchan::linalg::Tolerance;
use gchan::sample::{random_instance, random_small_algebra, random_unitary, rng_from_seed, ConstraintKind};
use proptest::prelude::*;

fn kind(k: u8) -> ConstraintKind {
    [ConstraintKind::Full, ConstraintKind::Comb, ConstraintKind::Diag][k as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_instances_are_members(seed in any::<u64>(), k in 0u8..3) {
        let tol = Tolerance::default();
        let gi = random_instance(kind(k), &tol, &mut rng_from_seed(seed)).unwrap();
        prop_assert!(gi.verify().member);
    }

    #[test]
    fn kraus_round_trip(seed in any::<u64>(), k in 0u8..3) {
        let tol = Tolerance::default();
        let gi = random_instance(kind(k), &tol, &mut rng_from_seed(seed)).unwrap();
        let x = gi.map().choi();
        let back = choi_from_kraus(gi.map().minimal_kraus());
        prop_assert!((back.matrix() - x.matrix()).norm() <= 1e-9 * x.norm().max(1.0));
    }

    #[test]
    fn not_extremal_verdicts_carry_valid_witnesses(seed in any::<u64>(), k in 0u8..3) {
        let tol = Tolerance::default();
        let gi = random_instance(kind(k), &tol, &mut rng_from_seed(seed)).unwrap();
        let rep = extremal_auto(&gi).unwrap();
        prop_assert!(!rep.disagreement);
        if rep.verdict == Verdict::NotExtremal {
            let t = validate_witness(&gi, rep.witness.as_ref().unwrap(), &Tolerance::new(1e-8));
            prop_assert!(t.is_some_and(|t| t >= 1e-6));
        }
    }

    #[test]
    fn verdict_is_invariant_under_output_unitaries(seed in any::<u64>(), k in 0u8..3) {
        let tol = Tolerance::default();
        let mut rng = rng_from_seed(seed);
        let gi = random_instance(kind(k), &tol, &mut rng).unwrap();
        let output = gi.map().output().clone();
        if output.num_blocks() != 1 {
            return Ok(());
        }
        let u = random_unitary(output.total_dim(), &mut rng);
        let ad = CpMap::from_kraus_matrices(&output, &output, &[u], &tol).unwrap();
        let rotated = GchanInstance::new(compose(&ad, gi.map()).unwrap(), gi.subspace().clone()).unwrap();
        prop_assert_eq!(extremal_direct(&gi).unwrap().verdict, extremal_direct(&rotated).unwrap().verdict);
    }

    #[test]
    fn operator_files_round_trip(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let alg = random_small_algebra(6, &mut rng);
        let op = gchan::sample::random_psd(&alg, None, &mut rng);
        let text = to_json(&OperatorFile::from_operator(&op, None));
        let back: OperatorFile = from_json(&text).unwrap();
        let again: Operator = back.to_operator().unwrap();
        prop_assert_eq!(again.matrix(), op.matrix());
    }

    #[test]
    fn problem_files_round_trip(seed in any::<u64>()) {
        let tol = Tolerance::default();
        let gi = random_instance(ConstraintKind::Full, &tol, &mut rng_from_seed(seed)).unwrap();
        let file = ProblemFile::gchannel(&gi, SubspaceSpec::Full).with_generator(seed, "gchannel");
        let back: ProblemFile = from_json(&to_json(&file)).unwrap();
        prop_assert_eq!(&back, &file);
        let Problem::Gchannel(g2) = back.resolve(&tol).unwrap() else { panic!("kind") };
        prop_assert!((g2.map().choi().matrix() - gi.map().choi().matrix()).norm() <= 1e-9);
    }
}
