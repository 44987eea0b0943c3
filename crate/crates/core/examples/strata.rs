//! Orbit-type strata of pairs in M_3 and the dimension of the
//! non-generating set.

use genrank::stratification::{all_strata, complement_dimension, density_threshold, format_strata};

fn main() -> genrank::Result<()> {
    let (n, k) = (3, 2);
    println!("{}", format_strata(&all_strata(n, k)?));
    println!(
        "\nnon-generating pairs: dimension {} of {}; threshold {}",
        complement_dimension(n, k)?,
        k * n * n,
        density_threshold(n, k)?
    );
    Ok(())
}
