//! Generalized POVMs: extremality of PVMs, mixtures, and PVMs on the
//! section of states with a fixed diagonal.
//!
//! ```text
//! cargo run --example povm_pvm
//! ```

use gchan::algebra::{Algebra, Operator};
use gchan::extremality::{hom_pvm_extremal, povm_extremal_auto, pvm_extremal, validate_povm_witness};
use gchan::gchannel::{diag_subspace, Povm};
use gchan::linalg::{CMat, Tolerance, C64};

fn main() -> gchan::error::Result<()> {
    let tol = Tolerance::default();
    let q = Algebra::full(2)?;
    let z = vec![q.unit(0, 0)?, q.unit(1, 1)?];
    let plus = CMat::from_element(2, 2, C64::new(0.5, 0.0));
    let minus = CMat::from_row_slice(2, 2, &[C64::new(0.5, 0.0), C64::new(-0.5, 0.0), C64::new(-0.5, 0.0), C64::new(0.5, 0.0)]);
    let x = vec![Operator::new(&q, plus)?, Operator::new(&q, minus)?];

    let p = Povm::unconstrained(z.clone())?;
    println!("Z measurement: {}", povm_extremal_auto(&p, &tol)?.verdict);

    let mix: Vec<Operator> = z.iter().zip(&x).map(|(a, b)| &a.scale_real(0.5) + &b.scale_real(0.5)).collect();
    let m = Povm::unconstrained(mix)?;
    let rep = povm_extremal_auto(&m, &tol)?;
    println!("half Z, half X: {}", rep.verdict);
    if let Some(ds) = &rep.effect_witness {
        println!("  witness step {:?}", validate_povm_witness(&m, ds, &Tolerance::new(1e-8)));
    }

    // With J_λ only states of diagonal λ are measured, so Z reads out a
    // fixed distribution and stops being extremal; X still is.
    let (j, s, rho0) = diag_subspace(&[0.25, 0.75], &tol)?;
    for (name, effects) in [("Z", z), ("X", x)] {
        let p = Povm::new(effects, j.clone())?;
        let commutant = pvm_extremal(&p, true, &tol)?;
        let hom = hom_pvm_extremal(&p, &s, &rho0, &tol)?;
        println!("{name} with J_λ: commutant route {}, homomorphism route {}", commutant.verdict, hom.verdict);
    }
    Ok(())
}
