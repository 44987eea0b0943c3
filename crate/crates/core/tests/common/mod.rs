//! Oracles that share no code with the library's closure and classification
//! routines: commutants are null spaces computed with a plain SVD of the
//! stacked commutator equations.
#![allow(dead_code)]

use genrank::matrix_core::{CMatrix, HermitianTuple};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Orthonormal basis (as vectors, column-major) of `{X : X m = m X for all m}`.
pub fn commutant_basis(mats: &[CMatrix]) -> Vec<nalgebra::DVector<Complex64>> {
    let n = mats[0].nrows();
    let nn = n * n;
    let mut stacked = DMatrix::<Complex64>::zeros(mats.len() * nn, nn);
    for (idx, m) in mats.iter().enumerate() {
        // Column (p, q) of the operator X -> X m - m X applied to e_{pq}.
        for q in 0..n {
            for p in 0..n {
                let mut e = CMatrix::zeros(n, n);
                e[(p, q)] = Complex64::new(1.0, 0.0);
                let img = &e * m - m * &e;
                for col in 0..n {
                    for row in 0..n {
                        stacked[(idx * nn + col * n + row, q * n + p)] = img[(row, col)];
                    }
                }
            }
        }
    }
    // Pad to at least square so the SVD returns a full right factor.
    if stacked.nrows() < nn {
        stacked = stacked.resize_vertically(nn, Complex64::new(0.0, 0.0));
    }
    let scale = mats.iter().map(|m| m.norm()).fold(0.0, f64::max).max(1e-300);
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.unwrap();
    (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] <= 1e-8 * scale)
        .map(|j| v_t.row(j).adjoint())
        .collect()
}

pub fn unvec(v: &nalgebra::DVector<Complex64>, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}

/// Dimension of the double commutant of the entries. For a tuple whose
/// generated algebra contains the identity this is the dimension of that
/// algebra; otherwise it is one larger.
pub fn double_commutant_dim(t: &HermitianTuple) -> usize {
    let n = t.n();
    let first: Vec<CMatrix> = commutant_basis(t.entries()).iter().map(|v| unvec(v, n)).collect();
    commutant_basis(&first).len()
}

/// `C*(t) = M_n` iff the commutant is the scalars.
pub fn generates_full(t: &HermitianTuple) -> bool {
    commutant_basis(t.entries()).len() == 1
}

/// Largest modulus of an entry of `m` outside the diagonal `size`-blocks.
pub fn off_block_norm(m: &CMatrix, blocks: &[usize]) -> f64 {
    let mut label = Vec::new();
    for (j, d) in blocks.iter().enumerate() {
        label.extend(std::iter::repeat_n(j, *d));
    }
    let mut worst: f64 = 0.0;
    for x in 0..m.nrows() {
        for y in 0..m.ncols() {
            if label[x] != label[y] {
                worst = worst.max(m[(x, y)].norm());
            }
        }
    }
    worst
}

/// Dimension of the (possibly non-unital) algebra generated by `mats`, by
/// repeated Gram-Schmidt on products of the current basis with the
/// generators. Generators are rescaled to unit Frobenius norm first.
pub fn algebra_dim(mats: &[CMatrix]) -> usize {
    let gens: Vec<CMatrix> = mats
        .iter()
        .filter(|m| m.norm() > 1e-12)
        .map(|m| m.unscale(m.norm()))
        .collect();
    let mut basis: Vec<CMatrix> = Vec::new();
    let push = |basis: &mut Vec<CMatrix>, m: CMatrix| -> bool {
        let mut r = m.clone();
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for b in basis.iter() {
                let coef = b.dotc(&r);
                r -= b * coef;
            }
        }
        let nr = r.norm();
        if nr > 1e-7 * m.norm().max(1e-300) {
            basis.push(r.unscale(nr));
            true
        } else {
            false
        }
    };
    let mut frontier = Vec::new();
    for g in &gens {
        if push(&mut basis, g.clone()) {
            frontier.push(basis.last().unwrap().clone());
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in &gens {
                if push(&mut basis, f * g) {
                    next.push(basis.last().unwrap().clone());
                }
            }
        }
        frontier = next;
    }
    basis.len()
}

/// Orthonormal basis of the algebra generated by `mats`, for distance checks.
pub fn algebra_basis(mats: &[CMatrix]) -> Vec<CMatrix> {
    let gens: Vec<CMatrix> = mats.iter().filter(|m| m.norm() > 1e-12).cloned().collect();
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut queue: Vec<CMatrix> = gens.clone();
    while let Some(m) = queue.pop() {
        let mut r = m.clone();
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&r);
                r -= b * coef;
            }
        }
        let nr = r.norm();
        if nr > 1e-7 * m.norm().max(1e-300) {
            let q = r.unscale(nr);
            for g in &gens {
                queue.push(&q * g);
            }
            basis.push(q);
        }
    }
    basis
}

/// Frobenius distance from `m` to the span of an orthonormal basis.
pub fn span_distance(basis: &[CMatrix], m: &CMatrix) -> f64 {
    let mut r = m.clone();
    for _ in 0..2 {
        for b in basis {
            let coef = b.dotc(&r);
            r -= b * coef;
        }
    }
    r.norm()
}

/// Random Hermitian element of `A (x) M_n`, `A` given by its block sizes,
/// in the layout where entry `(p N + i, q N + j)` is `(a_pq)_ij`.
pub fn random_tensor_hermitian(blocks: &[usize], n: usize, rng: &mut impl rand::Rng) -> CMatrix {
    let size: usize = blocks.iter().sum();
    let big = size * n;
    let mut m = CMatrix::zeros(big, big);
    let mut offset = 0;
    for &d in blocks {
        for p in 0..n {
            for q in 0..n {
                for i in 0..d {
                    for j in 0..d {
                        let z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                        m[(p * size + offset + i, q * size + offset + j)] += z;
                    }
                }
            }
        }
        offset += d;
    }
    (&m + m.adjoint()).unscale(2.0)
}
