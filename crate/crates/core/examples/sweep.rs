//! Seeded sweep over random generalized channels, tallying verdicts per
//! constraint family and checking that the routes agree.
//!
//! ```text
//! cargo run --release --example sweep -- 500
//! ```

use std::collections::BTreeMap;
use std::time::Instant;

use gchan::extremality::{extremal_conjugate, extremal_direct, extremal_kraus, extremal_reduced};
use gchan::linalg::Tolerance;
use gchan::sample::{random_instance, rng_from_seed, ConstraintKind};

fn main() -> gchan::error::Result<()> {
    let count: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let tol = Tolerance::default();
    let kinds = [ConstraintKind::Full, ConstraintKind::Comb, ConstraintKind::Diag];
    let start = Instant::now();
    let mut tally: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut disagreements = 0;
    for seed in 0..count {
        let kind = kinds[(seed % 3) as usize];
        let gi = random_instance(kind, &tol, &mut rng_from_seed(seed))?;
        let verdicts = [
            extremal_direct(&gi)?.verdict,
            extremal_kraus(&gi)?.verdict,
            extremal_conjugate(&gi)?.verdict,
            extremal_reduced(&gi)?.verdict,
        ];
        if verdicts.iter().any(|v| *v != verdicts[0]) {
            disagreements += 1;
            println!("seed {seed} ({}): {verdicts:?}", kind.as_str());
        }
        *tally.entry((kind.as_str(), verdicts[0].as_str())).or_default() += 1;
    }
    for ((kind, verdict), n) in &tally {
        println!("{kind:<5} {verdict:<13} {n}");
    }
    println!("{count} instances, {disagreements} disagreements, {:.2?}", start.elapsed());
    Ok(())
}
