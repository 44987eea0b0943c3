//! Fraction of random Hermitian pairs that generate M_n.

use genrank::stratification::mc_generation_rate;

fn main() -> genrank::Result<()> {
    for n in 1..=5 {
        let r = mc_generation_rate(n, 2, 500, 42)?;
        println!(
            "n = {n}: rate {:.4} ({} generating, {} not, {} ambiguous)",
            r.rate, r.generating, r.non_generating, r.ambiguous
        );
    }
    Ok(())
}
