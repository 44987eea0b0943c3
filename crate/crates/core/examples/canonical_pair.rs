//! The diagonal/tridiagonal generating pair of M_n, and perturbing a
//! degenerate pair into a generating one.

use genrank::constructions::{canonical_pair, perturb_to_generating_tuple, BlockAlgebra};
use genrank::generation::is_generating;
use genrank::matrix_core::HermitianTuple;

fn main() -> genrank::Result<()> {
    for n in 2..=6 {
        let pair = canonical_pair(n)?;
        println!("canonical pair of M_{n} generates: {}", is_generating(&pair)?);
    }
    let eps = 0.01;
    let zero = HermitianTuple::zero(5, 2);
    let out = perturb_to_generating_tuple(&BlockAlgebra::full(5)?, &zero, eps)?;
    println!(
        "zero pair in M_5 moved by {:.2e} (< {eps}) to a generating pair: {}",
        out.distance(&zero)?,
        is_generating(&out)?
    );
    Ok(())
}
