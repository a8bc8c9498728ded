//! Extremality of generalized channels by every available route, with a
//! witness check for the non-extremal case.
//!
//! ```text
//! cargo run --example channel_extremality
//! ```

use gchan::algebra::Algebra;
use gchan::cp_map::CpMap;
use gchan::extremality::{
    dim_bound, extremal_auto, extremal_conjugate, extremal_direct, extremal_kraus, extremal_reduced,
    validate_witness,
};
use gchan::gchannel::{diag_subspace, GchanInstance};
use gchan::linalg::{CMat, CVec, Tolerance, C64};
use gchan::subspace::Subspace;

fn report(name: &str, gi: &GchanInstance) -> gchan::error::Result<()> {
    let routes = [
        ("direct", extremal_direct(gi)?),
        ("kraus", extremal_kraus(gi)?),
        ("conjugate", extremal_conjugate(gi)?),
        ("reduced", extremal_reduced(gi)?),
    ];
    let bound = dim_bound(gi)?;
    println!("{name}:");
    for (route, rep) in &routes {
        println!("  {route:<9} {} (margin {:.2e})", rep.verdict, rep.margin);
    }
    println!("  dimension bound {} <= {}: {}", bound.face_dim, bound.bound, bound.holds);
    let auto = extremal_auto(gi)?;
    if let Some(d) = &auto.witness {
        let t = validate_witness(gi, d, &Tolerance::new(1e-8));
        println!("  witness keeps X ± tD feasible up to t = {t:?}");
    }
    Ok(())
}

fn main() -> gchan::error::Result<()> {
    let tol = Tolerance::default();
    let q = Algebra::full(2)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMat::from_diagonal(&CVec::from_column_slice(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));

    report("identity", &GchanInstance::new(CpMap::identity(&q, &tol), Subspace::whole(&q))?)?;

    let dephasing = CpMap::from_kraus_matrices(&q, &q, &[CMat::identity(2, 2).scale(r), z.scale(r)], &tol)?;
    report("dephasing", &GchanInstance::new(dephasing, Subspace::whole(&q))?)?;

    report("trace", &GchanInstance::new(CpMap::trace_map(&q, &tol), Subspace::whole(&q))?)?;

    // Shrinking J to J_λ enlarges the set, and the identity stays extremal.
    let (j, _, _) = diag_subspace(&[0.25, 0.75], &tol)?;
    report("identity with J_λ", &GchanInstance::new(CpMap::identity(&q, &tol), j)?)?;
    Ok(())
}
