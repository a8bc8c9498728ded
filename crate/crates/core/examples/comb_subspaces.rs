//! The subspaces `J_n` behind quantum combs, and the equivalence of the
//! partial-trace hierarchy with the generalized-channel description.
//!
//! ```text
//! cargo run --example comb_subspaces
//! ```

use gchan::algebra::Algebra;
use gchan::gchannel::verify_comb;
use gchan::linalg::Tolerance;
use gchan::sample::{random_comb, rng_from_seed};
use gchan::subspace::{comb_algebra, comb_perp_basis};

fn main() -> gchan::error::Result<()> {
    let tol = Tolerance::default();
    let q = Algebra::full(2)?;
    for n in 1..=3 {
        let algs = vec![q.clone(); n + 1];
        let perp = comb_perp_basis(&algs)?;
        let a = comb_algebra(&algs, n)?;
        println!("n = {n}: dim A_n = {}, dim J_n^⊥ = {}", a.dim(), perp.dim());
    }

    let algs = vec![q.clone(), q.clone(), q.clone()];
    let mut rng = rng_from_seed(11);
    for member in [true, false] {
        let c = random_comb(&algs, member, &tol, &mut rng)?;
        let ladder = verify_comb(&c, &tol);
        let as_gchannel = c.verify_as_gchannel(&tol)?;
        println!(
            "sampled {}: hierarchy says {}, generalized channel says {} (rung residuals {:?})",
            if member { "member" } else { "non-member" },
            ladder.member,
            as_gchannel.member,
            ladder.residuals
        );
    }
    Ok(())
}
