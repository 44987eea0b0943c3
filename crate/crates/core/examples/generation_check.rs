//! Decide whether a tuple generates M_n, and read off the orbit type when
//! it does not.

use genrank::generation::{classify_subalgebra, generated_algebra, stabilizer_lie_dimension, StabilizerKind};
use genrank::matrix_core::{diag, random_hermitian_tuple, HermitianTuple};

fn main() -> genrank::Result<()> {
    let random = random_hermitian_tuple(4, 2, 7)?;
    let commuting = HermitianTuple::new(vec![diag(&[1.0, 1.0, 2.0, 3.0]), diag(&[0.0, 0.0, 5.0, 1.0])])?;
    for (name, t) in [("random pair", random), ("commuting pair", commuting)] {
        let span = generated_algebra(&t)?;
        println!(
            "{name}: dim C*(t) = {} of {}, orbit type {}, stabilizer dimension {}",
            span.dimension(),
            t.n() * t.n(),
            classify_subalgebra(&span)?,
            stabilizer_lie_dimension(&span, StabilizerKind::Pointwise)
        );
    }
    Ok(())
}
