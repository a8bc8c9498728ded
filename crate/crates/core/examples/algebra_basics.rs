//! Block algebras, tensor products and partial traces.
//!
//! ```text
//! cargo run --example algebra_basics
//! ```

use gchan::algebra::{cond_expectation, partial_trace, trace_leading, Algebra, Operator};
use gchan::linalg::{CMat, C64};

fn main() -> gchan::error::Result<()> {
    // M_2 ⊕ ℂ sits inside M_3 as block-diagonal matrices.
    let a = Algebra::new(&[2, 1])?;
    println!("{a}: ambient size {}, dimension {}", a.total_dim(), a.dim());

    // Anything off the blocks is projected away by the conditional expectation.
    let full = CMat::from_fn(3, 3, |r, c| C64::new((r * 3 + c) as f64, 0.0));
    let e = cond_expectation(&full, &a)?;
    println!("E(x) =\n{}", e.matrix());

    // Tensor products keep their factors, so partial traces know what to trace.
    let q = Algebra::full(2)?;
    let qa = q.tensor(&a);
    println!("{qa}: {} factors, blocks {:?}", qa.num_factors(), qa.block_dims());
    let x = q.unit(0, 0)?.kron(&a.identity());
    let reduced = partial_trace(&x, 0)?;
    println!("Tr_0(|0><0| ⊗ I) has trace {:.1}", reduced.trace().re);
    let lead = trace_leading(&x, 1)?;
    println!("trace over the leading factor lands on {}", lead.algebra());

    // Operators reject matrices that leave their algebra.
    let bad = CMat::from_fn(3, 3, |_, _| C64::new(1.0, 0.0));
    match Operator::new(&a, bad) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
