//! Generators of M_2 + M_3 from generators of the summands. Stacking the
//! same pair twice only generates a diagonal copy.

use genrank::constructions::{canonical_pair, combine_direct_sum_generators};
use genrank::generation::generated_algebra;
use genrank::matrix_core::direct_sum_tuples;

fn main() -> genrank::Result<()> {
    let a = canonical_pair(2)?;
    let b = canonical_pair(3)?;
    let combined = combine_direct_sum_generators(&a, &b, 0.01)?;
    println!("combined pair: dim {}", generated_algebra(&combined)?.dimension());
    let doubled = direct_sum_tuples(&a, &a)?;
    println!("(t, t) for M_2 + M_2: dim {}", generated_algebra(&doubled)?.dimension());
    let separated = combine_direct_sum_generators(&a, &a, 0.01)?;
    println!("(t, t) after separating spectra: dim {}", generated_algebra(&separated)?.dimension());
    Ok(())
}
