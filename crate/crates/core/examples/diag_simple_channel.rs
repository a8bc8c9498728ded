//! A simple generalized channel moving the section of states with
//! diagonal λ onto the section with diagonal μ.
//!
//! ```text
//! cargo run --example diag_simple_channel
//! ```

use gchan::algebra::{psd_sqrt_pinv, Operator};
use gchan::cp_map::simple_conjugation;
use gchan::gchannel::{diag_subspace, simple_from_target_state};
use gchan::linalg::{CMat, CVec, Tolerance, C64};

fn main() -> gchan::error::Result<()> {
    let tol = Tolerance::default();
    let (_, s, rho0) = diag_subspace(&[0.5, 0.5], &tol)?;
    let mu = CVec::from_column_slice(&[C64::new(1.0 / 3.0, 0.0), C64::new(2.0 / 3.0, 0.0)]);
    let sigma0 = Operator::new(s.output(), CMat::from_diagonal(&mu))?;
    let simple = simple_from_target_state(&s, &rho0, &sigma0, &tol)?;
    println!("d =\n{}", simple.d.matrix());
    println!(
        "inclusion residual {:.1e} over {} states, homomorphism residual {:.1e}",
        simple.inclusion_residual, simple.samples, simple.homomorphism_residual
    );

    let (sqrt_d, _) = psd_sqrt_pinv(&simple.d, &tol)?;
    let chi = simple_conjugation(&sqrt_d, &tol);
    let z = C64::from_polar(0.4, 1.0);
    let rho = Operator::new(sqrt_d.algebra(), CMat::from_row_slice(2, 2, &[C64::new(0.5, 0.0), z, z.conj(), C64::new(0.5, 0.0)]))?;
    let image = chi.apply(&rho)?;
    println!("a state with diagonal (1/2, 1/2) maps to\n{}", image.matrix());
    Ok(())
}
