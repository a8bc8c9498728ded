//! Choi matrices, minimal Kraus sets, minimal decompositions and the
//! conjugate map of a qubit amplitude-damping channel.
//!
//! ```text
//! cargo run --example choi_kraus
//! ```

use gchan::algebra::Algebra;
use gchan::cp_map::{choi_distance, choi_from_kraus, compose, minimal_decomposition, simple_conjugation, CpMap};
use gchan::linalg::{CMat, Tolerance, C64};

fn main() -> gchan::error::Result<()> {
    let tol = Tolerance::default();
    let q = Algebra::full(2)?;
    let g: f64 = 0.3;
    let k0 = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new((1.0 - g).sqrt(), 0.0)]);
    let k1 = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(g.sqrt(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    let phi = CpMap::from_kraus_matrices(&q, &q, &[k0, k1], &tol)?;
    println!("trace preserving: {} (residual {:.1e})", phi.is_channel(), phi.trace_residual());
    println!("Choi spectrum: {:?}", phi.choi().spectrum());
    println!("Kraus rank {}", phi.kraus_rank());
    let back = choi_from_kraus(phi.minimal_kraus());
    println!("Choi to Kraus to Choi error {:.1e}", (back.matrix() - phi.choi().matrix()).norm());

    // A trace-decreasing rescaling has c = (Φ*(I))^{1/2} ≠ I.
    let half = CpMap::from_choi(&phi.choi().scale_real(0.5), &q, &q, &tol)?;
    let dec = minimal_decomposition(&half)?;
    println!("c =\n{}", dec.c.matrix());
    let rebuilt = compose(&dec.lambda_on_support, &simple_conjugation(&dec.c, &tol))?;
    println!("‖Λ_q∘χ_c − Φ‖ = {:.1e}", choi_distance(&rebuilt, &half));

    let conj = phi.conjugate_map()?;
    println!("conjugate map lands in {} with block pairs {:?}", conj.map.output(), conj.pairs);
    Ok(())
}
