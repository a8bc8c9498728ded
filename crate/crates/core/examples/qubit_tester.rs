//! Extremality of qubit 1-testers with pure and mixed input states.
//!
//! ```text
//! cargo run --example qubit_tester
//! ```

use gchan::algebra::{Algebra, Operator};
use gchan::extremality::tester_extremal;
use gchan::gchannel::{verify_tester, Tester};
use gchan::linalg::{CMat, CVec, Tolerance, C64};

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn proj(v: &[C64]) -> CMat {
    let k = CVec::from_column_slice(v);
    &k * k.adjoint()
}

fn tester(effects: Vec<CMat>) -> gchan::error::Result<Tester> {
    let q = Algebra::full(2)?;
    let alg = q.tensor(&q);
    let ops = effects.into_iter().map(|m| Operator::new(&alg, m)).collect::<Result<_, _>>()?;
    Tester::new(&q, &q, ops)
}

fn main() -> gchan::error::Result<()> {
    let tol = Tolerance::default();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let id = CMat::identity(2, 2);
    let sx = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
    let e0 = proj(&[re(1.0), re(0.0)]);
    let e1 = proj(&[re(0.0), re(1.0)]);
    let n1 = id.scale(0.3) + sx.scale(0.2);
    let forbidden = e0.kronecker(&e0) + id.kronecker(&e1);
    let bell = proj(&[re(r), re(0.0), re(0.0), re(r)]);
    let one = CMat::identity(4, 4);
    let cases = [
        ("pure ω, sharp readout", vec![e0.kronecker(&e0), e1.kronecker(&e0)]),
        ("pure ω, unsharp readout", vec![n1.kronecker(&e0), (&id - &n1).kronecker(&e0)]),
        ("mixed ω, e ⊗ |0><0| + f ⊗ |1><1|", vec![forbidden.scale(0.5), (&one - &forbidden).scale(0.5)]),
        ("mixed ω, entangled readout", vec![bell.scale(0.5), (&one - &bell).scale(0.5)]),
    ];
    for (name, effects) in cases {
        let t = tester(effects)?;
        let check = verify_tester(&t, &tol);
        let rep = tester_extremal(&t, &tol)?;
        println!(
            "{name}: tester {}, ω spectrum {:?}, verdict {} via {}",
            check.member,
            check.omega.spectrum(),
            rep.verdict,
            rep.method
        );
    }
    Ok(())
}
