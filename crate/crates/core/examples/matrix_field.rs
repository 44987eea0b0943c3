//! A field of pairs over three points generates C(X, M_2) iff every fiber
//! generates and no two fibers are unitarily equivalent.

use genrank::constructions::canonical_pair;
use genrank::cx_homogeneous::{is_generating_field, shifted, MatrixField};
use genrank::matrix_core::random_unitary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> genrank::Result<()> {
    let p = canonical_pair(2)?;
    let u = random_unitary(2, &mut ChaCha8Rng::seed_from_u64(3));
    let good = MatrixField::new(vec![
        ("x".into(), p.clone()),
        ("y".into(), shifted(&p, 1.0)?),
        ("z".into(), shifted(&p, -1.0)?),
    ])?;
    let bad = MatrixField::new(vec![("x".into(), p.clone()), ("y".into(), p.conjugate_by(&u))])?;
    for (name, f) in [("shifted copies", good), ("conjugate copies", bad)] {
        let v = is_generating_field(&f)?;
        println!("{name}: generating {} {:?}", v.generating, v.diagnostic);
    }
    Ok(())
}
