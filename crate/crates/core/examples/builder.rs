//! Iterative construction of a generator approximating a sequence of
//! targets, starting from a commuting pair in M_3.

use genrank::constructions::{generating_approximator, BlockAlgebra};
use genrank::generation::iterate_builder;
use genrank::matrix_core::{diag, random_hermitian, HermitianTuple};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> genrank::Result<()> {
    let start = HermitianTuple::new(vec![diag(&[0.0, 1.0, 1.0]), diag(&[1.0, 0.0, 2.0])])?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let targets: Vec<_> = (0..10).map(|_| random_hermitian(3, &mut rng)).collect();
    let mut approx = generating_approximator(BlockAlgebra::full(3)?);
    let out = iterate_builder(&start, &mut approx, &targets, 10, 0.05)?;
    for s in &out.steps {
        println!(
            "step {:>2}: moved {:.2e} of budget {:.2e}, fit error {:.2e}",
            s.index, s.moved, s.budget, s.fit_error
        );
    }
    println!("total drift {:.3e}", out.total_drift);
    Ok(())
}
