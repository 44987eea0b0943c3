//! Compress a tuple in (M_2 + C) (x) M_2 to a nearby generating pair.

use genrank::constructions::{tensor_compress, BlockAlgebra};
use genrank::generation::generated_algebra;
use genrank::matrix_core::{CMatrix, HermitianTuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random Hermitian element of A (x) M_n; entry (p N + i, q N + j) is
/// (a_pq)_ij.
fn random_element(algebra: &BlockAlgebra, n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let size = algebra.size();
    let mut m = CMatrix::zeros(size * n, size * n);
    for p in 0..n {
        for q in 0..n {
            let mut a = algebra.random_hermitian(rng);
            if p != q {
                a *= num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            m.view_mut((p * size, q * size), (size, size)).copy_from(&a);
        }
    }
    (&m + m.adjoint()).unscale(2.0)
}

fn main() -> genrank::Result<()> {
    let algebra = BlockAlgebra::new(vec![2, 1])?;
    let n = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let random = HermitianTuple::new((0..2).map(|_| random_element(&algebra, n, &mut rng)).collect())?;
    let zero = HermitianTuple::zero(algebra.size() * n, 2);
    for (name, t) in [("random input", random), ("zero input", zero)] {
        let out = tensor_compress(&algebra, n, &t, 0.05)?;
        println!(
            "{name}: moved by {:.3e}, dim C*(out) = {} of {}",
            out.distance(&t)?,
            generated_algebra(&out)?.dimension(),
            n * n * algebra.dimension()
        );
    }
    Ok(())
}
