//! Writes the problem files used by the CLI tests.
//!
//! ```text
//! cargo run --example fixtures -- crates/core/fixtures
//! ```

use std::path::PathBuf;

use gchan::algebra::{Algebra, Operator};
use gchan::cp_map::CpMap;
use gchan::gchannel::{GchanInstance, Povm, Tester};
use gchan::io::{write_json, ProblemFile, SubspaceSpec};
use gchan::linalg::{CMat, CVec, Tolerance, C64};
use gchan::sample::{random_comb, rng_from_seed};
use gchan::subspace::Subspace;

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn proj(v: &[C64]) -> CMat {
    let k = CVec::from_column_slice(v);
    &k * k.adjoint()
}

fn tester(effects: Vec<CMat>) -> Tester {
    let q = Algebra::full(2).unwrap();
    let alg = q.tensor(&q);
    let ops = effects.into_iter().map(|m| Operator::new(&alg, m).unwrap()).collect();
    Tester::new(&q, &q, ops).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let tol = Tolerance::default();
    let q = Algebra::full(2)?;
    let id = CMat::identity(2, 2);
    let x = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
    let r = std::f64::consts::FRAC_1_SQRT_2;

    let save = |name: &str, file: ProblemFile| -> Result<(), Box<dyn std::error::Error>> {
        let path = dir.join(format!("{name}.json"));
        write_json(&path, &file)?;
        println!("wrote {}", path.display());
        Ok(())
    };

    let identity = GchanInstance::new(CpMap::identity(&q, &tol), Subspace::whole(&q))?;
    save("identity_channel", ProblemFile::gchannel(&identity, SubspaceSpec::Full))?;

    let flip = CpMap::from_kraus_matrices(&q, &q, &[id.scale(r), x.scale(r)], &tol)?;
    let mixed = GchanInstance::new(flip, Subspace::whole(&q))?;
    save("mixed_unitary", ProblemFile::gchannel(&mixed, SubspaceSpec::Full))?;

    let lambda = vec![0.25, 0.75];
    let spec = SubspaceSpec::Diag { lambda: lambda.clone() };
    let j = spec.resolve(&q, &tol)?;
    let z = Povm::new(vec![q.unit(0, 0)?, q.unit(1, 1)?], j.clone())?;
    save("pvm_z_diag", ProblemFile::gpovm(&z, spec.clone()))?;
    let plus = proj(&[re(r), re(r)]);
    let minus = proj(&[re(r), re(-r)]);
    let pm = Povm::new(vec![Operator::new(&q, plus)?, Operator::new(&q, minus)?], j)?;
    save("pvm_plus_diag", ProblemFile::gpovm(&pm, spec))?;

    // (a) ω = |0><0| with the Z measurement on the output.
    let phi = proj(&[re(1.0), re(0.0)]);
    let e0 = proj(&[re(1.0), re(0.0)]);
    let e1 = proj(&[re(0.0), re(1.0)]);
    save("qubit_tester_a", ProblemFile::tester(&tester(vec![e0.kronecker(&phi), e1.kronecker(&phi)])))?;

    // (b) the same ω with an unsharp two-outcome measurement.
    let n1 = id.scale(0.3) + x.scale(0.2);
    let n2 = &id - &n1;
    save("qubit_tester_b", ProblemFile::tester(&tester(vec![n1.kronecker(&phi), n2.kronecker(&phi)])))?;

    // (c) ω = I/2 with Λ_1 = e ⊗ |0><0| + f ⊗ |1><1|.
    let l1 = e0.kronecker(&e0) + id.kronecker(&e1);
    let l2 = CMat::identity(4, 4) - &l1;
    save("qubit_tester_c", ProblemFile::tester(&tester(vec![l1.scale(0.5), l2.scale(0.5)])))?;

    // (d) ω = I/2 with Λ_1 the projection onto an entangled vector.
    let bell = proj(&[re(r), re(0.0), re(0.0), re(r)]);
    let rest = CMat::identity(4, 4) - &bell;
    save("qubit_tester_d", ProblemFile::tester(&tester(vec![bell.scale(0.5), rest.scale(0.5)])))?;

    let algs = vec![q.clone(), q.clone(), q.clone()];
    let comb = random_comb(&algs, true, &tol, &mut rng_from_seed(0))?;
    save("comb_member", ProblemFile::comb(&comb).with_generator(0, "comb"))?;
    let bad = random_comb(&algs, false, &tol, &mut rng_from_seed(1))?;
    save("comb_non_member", ProblemFile::comb(&bad).with_generator(1, "comb"))?;
    Ok(())
}
