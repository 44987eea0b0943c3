//! Dense complex matrix primitives.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Matrices are
//! small (a few hundred rows at most), so clarity wins over blocking or
//! in-place tricks.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut m = zeros(n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = c(*v, 0.0);
    }
    m
}

/// Matrix unit `e_{ij}` in `M_n` (zero-based indices).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n);
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Smallest singular value.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    op_norm(&(m - m.adjoint()))
}

/// Hermiticity check with tolerance `1e-10 * max(1, ||h||)`.
pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let tolerance = HERMITIAN_TOL * op_norm(m).max(1.0);
    let deviation = hermitian_deviation(m);
    if deviation > tolerance {
        return Err(Error::NonHermitianInput {
            deviation,
            tolerance,
        });
    }
    Ok(())
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Block-diagonal matrix with the given square blocks.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let size: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(size);
    let mut offset = 0;
    for b in blocks {
        let d = b.nrows();
        out.view_mut((offset, offset), (d, d)).copy_from(*b);
        offset += d;
    }
    out
}

/// Column-major vectorisation; the Hilbert-Schmidt inner product becomes the
/// Euclidean one.
pub fn vectorize(m: &CMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &[Complex64], n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v)
}

/// A k-tuple of self-adjoint `n x n` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianTuple {
    n: usize,
    entries: Vec<CMatrix>,
}

impl HermitianTuple {
    /// Validates sizes and Hermiticity; entries are symmetrised to remove
    /// rounding-level anti-Hermitian parts.
    pub fn new(entries: Vec<CMatrix>) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyTuple)?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::EmptyTuple);
        }
        for e in &entries {
            if e.nrows() != n || e.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    rows: e.nrows(),
                    cols: e.ncols(),
                });
            }
            check_hermitian(e)?;
        }
        Ok(Self {
            n,
            entries: entries.iter().map(hermitian_part).collect(),
        })
    }

    pub fn zero(n: usize, k: usize) -> Self {
        Self {
            n,
            entries: vec![zeros(n); k],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[CMatrix] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &CMatrix {
        &self.entries[i]
    }

    pub fn into_entries(self) -> Vec<CMatrix> {
        self.entries
    }

    /// Maximum operator norm over the entries.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(op_norm).fold(0.0, f64::max)
    }

    /// Tuple-norm distance `max_i ||a_i - b_i||`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| op_norm(&(a - b)))
            .fold(0.0, f64::max))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.k() != other.k() {
            return Err(Error::LengthMismatch {
                left: self.k(),
                right: other.k(),
            });
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                rows: other.n,
                cols: other.n,
            });
        }
        Ok(())
    }

    /// `u t u*` entrywise.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        let ua = u.adjoint();
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|a| hermitian_part(&(u * a * &ua)))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|a| a.scale(s)).collect(),
        }
    }

    /// Replaces entry `i`; the new entry must be Hermitian of the same size.
    pub fn with_entry(&self, i: usize, m: CMatrix) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries[i] = m;
        Self::new(entries)
    }
}

/// Eigenvalues (ascending) and the unitary whose columns are eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub unitary: CMatrix,
}

impl SpectralData {
    pub fn reconstruct(&self) -> CMatrix {
        let d = diag(&self.eigenvalues);
        &self.unitary * d * self.unitary.adjoint()
    }
}

fn lexicographic(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Hermitian eigendecomposition with a deterministic output: eigenvalues
/// ascending, each eigenvector phase-normalised so its first non-negligible
/// component is real positive, exact ties ordered lexicographically by
/// eigenvector.
pub fn spectral_decomposition(h: &CMatrix) -> Result<SpectralData> {
    check_hermitian(h)?;
    let n = h.nrows();
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|j| {
            let mut v: Vec<Complex64> = eig.eigenvectors.column(j).iter().cloned().collect();
            if let Some(p) = v.iter().find(|z| z.norm() > 1e-8) {
                let phase = p.conj() / p.norm();
                for z in v.iter_mut() {
                    *z *= phase;
                }
            }
            (eig.eigenvalues[j], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lexicographic(&a.1, &b.1)));
    let mut unitary = zeros(n);
    for (j, (_, v)) in pairs.iter().enumerate() {
        for (i, z) in v.iter().enumerate() {
            unitary[(i, j)] = *z;
        }
    }
    Ok(SpectralData {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        unitary,
    })
}

/// Continuous piecewise-linear function on the real line, constant beyond its
/// first and last breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFn {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: vec![0.0],
            values: vec![value],
        }
    }

    /// Bump that is 1 within `plateau` of each centre and 0 beyond `support`.
    /// Centres must be more than `2 * support` apart.
    pub fn bump(centers: &[f64], plateau: f64, support: f64) -> Result<Self> {
        if !(0.0 < plateau && plateau < support) {
            return Err(Error::InvalidArgument(
                "bump needs 0 < plateau < support".into(),
            ));
        }
        let mut cs = centers.to_vec();
        cs.sort_by(f64::total_cmp);
        if cs.is_empty() {
            return Ok(Self::constant(0.0));
        }
        let mut breakpoints = Vec::with_capacity(4 * cs.len());
        let mut values = Vec::with_capacity(4 * cs.len());
        for x in cs {
            breakpoints.extend([x - support, x - plateau, x + plateau, x + support]);
            values.extend([0.0, 1.0, 1.0, 0.0]);
        }
        Self::new(breakpoints, values)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        let last = bp.len() - 1;
        if x <= bp[0] {
            return self.values[0];
        }
        if x >= bp[last] {
            return self.values[last];
        }
        let i = bp.partition_point(|b| *b <= x);
        let (x0, x1) = (bp[i - 1], bp[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `U diag(f(lambda)) U*` for an arbitrary real function.
pub fn apply_real_fn(h: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let sd = spectral_decomposition(h)?;
    let values: Vec<f64> = sd.eigenvalues.iter().map(|x| f(*x)).collect();
    Ok(hermitian_part(
        &(&sd.unitary * diag(&values) * sd.unitary.adjoint()),
    ))
}

pub fn apply_function(h: &CMatrix, f: &PiecewiseLinearFn) -> Result<CMatrix> {
    apply_real_fn(h, |x| f.eval(x))
}

/// Blockwise direct sum `(a_1 + b_1, ..., a_k + b_k)`.
pub fn direct_sum_tuples(t1: &HermitianTuple, t2: &HermitianTuple) -> Result<HermitianTuple> {
    if t1.k() != t2.k() {
        return Err(Error::LengthMismatch {
            left: t1.k(),
            right: t2.k(),
        });
    }
    Ok(HermitianTuple {
        n: t1.n + t2.n,
        entries: t1
            .entries
            .iter()
            .zip(&t2.entries)
            .map(|(a, b)| block_diag(&[a, b]))
            .collect(),
    })
}

/// `(a_1 + i a_{m+1}, ..., a_m + i a_{2m})`.
pub fn complexify_tuple(t: &HermitianTuple) -> Result<Vec<CMatrix>> {
    let k = t.k();
    if !k.is_multiple_of(2) {
        return Err(Error::OddLength(k));
    }
    let m = k / 2;
    let i = c(0.0, 1.0);
    Ok((0..m)
        .map(|j| &t.entries[j] + t.entries[m + j].map(|z| z * i))
        .collect())
}

pub(crate) fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re * s, im * s)
}

/// One GUE-normalised sample `(G + G*) / 2`.
pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    hermitian_part(&g)
}

/// Haar-ish unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                u[(i, j)] *= phase;
            }
        }
    }
    u
}

/// Deterministic per seed. Entries are drawn one after another from the same
/// stream, so the k-tuple for a seed is a prefix of the (k+1)-tuple.
pub fn random_hermitian_tuple(n: usize, k: usize, seed: u64) -> Result<HermitianTuple> {
    if n == 0 || k == 0 {
        return Err(Error::EmptyTuple);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(HermitianTuple {
        n,
        entries: (0..k).map(|_| random_hermitian(n, &mut rng)).collect(),
    })
}

/// JSON form `{"n", "k", "entries"}` with each entry a row-major list of
/// rows of `[re, im]` pairs.
pub fn tuple_to_json(t: &HermitianTuple) -> serde_json::Value {
    let entries: Vec<Vec<Vec<[f64; 2]>>> = t
        .entries
        .iter()
        .map(|m| {
            (0..t.n)
                .map(|i| (0..t.n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect()
        })
        .collect();
    serde_json::json!({ "n": t.n, "k": t.k(), "entries": entries })
}

#[derive(serde::Deserialize)]
struct TupleJson {
    n: usize,
    k: usize,
    entries: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn tuple_from_json(value: &serde_json::Value) -> Result<HermitianTuple> {
    let raw: TupleJson =
        serde_json::from_value(value.clone()).map_err(|e| Error::InvalidJson(e.to_string()))?;
    if raw.entries.len() != raw.k {
        return Err(Error::InvalidJson(format!(
            "declared k = {} but {} entries given",
            raw.k,
            raw.entries.len()
        )));
    }
    let mut entries = Vec::with_capacity(raw.k);
    for (idx, rows) in raw.entries.iter().enumerate() {
        if rows.len() != raw.n || rows.iter().any(|r| r.len() != raw.n) {
            return Err(Error::InvalidJson(format!(
                "entry {idx} is not {n}x{n}",
                n = raw.n
            )));
        }
        entries.push(CMatrix::from_fn(raw.n, raw.n, |i, j| {
            c(rows[i][j][0], rows[i][j][1])
        }));
    }
    HermitianTuple::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    #[test]
    fn diagonal_spectrum_is_trivial() {
        let sd = spectral_decomposition(&diag(&[1.0, 2.0])).unwrap();
        assert_eq!(sd.eigenvalues, vec![1.0, 2.0]);
        assert!((&sd.unitary - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn pauli_spectrum() {
        let sd = spectral_decomposition(&pauli_x()).unwrap();
        assert!((sd.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((sd.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = matrix_unit(2, 0, 1);
        assert!(matches!(
            spectral_decomposition(&m),
            Err(Error::NonHermitianInput { .. })
        ));
        assert!(HermitianTuple::new(vec![m]).is_err());
    }

    #[test]
    fn spectral_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=16 {
            let h = random_hermitian(n, &mut rng);
            let sd = spectral_decomposition(&h).unwrap();
            let tol = RECONSTRUCTION_TOL * n as f64 * op_norm(&h).max(1.0);
            assert!(op_norm(&(sd.reconstruct() - &h)) <= tol);
            let gram = sd.unitary.adjoint() * &sd.unitary;
            assert!(op_norm(&(gram - identity(n))) <= tol);
            assert!(sd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn decomposition_is_deterministic() {
        let h = random_hermitian_tuple(5, 1, 11).unwrap();
        let a = spectral_decomposition(h.entry(0)).unwrap();
        let b = spectral_decomposition(h.entry(0)).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.unitary, b.unitary);
    }

    #[test]
    fn functional_calculus_examples() {
        let h = diag(&[1.0, 2.0]);
        let id = PiecewiseLinearFn::new(vec![0.0, 3.0], vec![0.0, 3.0]).unwrap();
        assert!((apply_function(&h, &id).unwrap() - &h).norm() < 1e-12);
        let bump = PiecewiseLinearFn::bump(&[1.0], 0.25, 0.5).unwrap();
        let e11 = apply_function(&h, &bump).unwrap();
        assert!((e11 - matrix_unit(2, 0, 0)).norm() < 1e-12);
        let zero = PiecewiseLinearFn::constant(0.0);
        assert!(apply_function(&h, &zero).unwrap().norm() < 1e-12);
    }

    #[test]
    fn piecewise_linear_extends_constantly() {
        let f = PiecewiseLinearFn::new(vec![0.0, 1.0], vec![2.0, 4.0]).unwrap();
        assert_eq!(f.eval(-5.0), 2.0);
        assert_eq!(f.eval(0.5), 3.0);
        assert_eq!(f.eval(9.0), 4.0);
        assert!(PiecewiseLinearFn::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn function_of_h_commutes_with_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(6, &mut rng);
        let f = PiecewiseLinearFn::new(vec![-1.0, 0.0, 2.0], vec![0.3, 1.0, -0.5]).unwrap();
        let fh = apply_function(&h, &f).unwrap();
        assert!(op_norm(&commutator(&h, &fh)) < 1e-8 * 6.0 * op_norm(&h).max(1.0));
    }

    #[test]
    fn direct_sum_examples() {
        let z = direct_sum_tuples(&HermitianTuple::zero(2, 2), &HermitianTuple::zero(3, 2)).unwrap();
        assert_eq!(z.n(), 5);
        assert_eq!(z.norm(), 0.0);

        let t1 = HermitianTuple::new(vec![diag(&[1.0, -0.5])]).unwrap();
        let t2 = HermitianTuple::new(vec![diag(&[2.0])]).unwrap();
        let s = direct_sum_tuples(&t1, &t2).unwrap();
        assert!((s.norm() - 2.0).abs() < 1e-12);

        let err = direct_sum_tuples(&t1, &HermitianTuple::zero(2, 2)).unwrap_err();
        assert_eq!(err, Error::LengthMismatch { left: 1, right: 2 });
    }

    #[test]
    fn complexify_examples() {
        let h = diag(&[1.0, 3.0]);
        let z = zeros(2);
        let t = HermitianTuple::new(vec![h.clone(), z.clone()]).unwrap();
        assert_eq!(complexify_tuple(&t).unwrap()[0], h);
        let t = HermitianTuple::new(vec![z, h.clone()]).unwrap();
        assert_eq!(complexify_tuple(&t).unwrap()[0], h.map(|x| x * c(0.0, 1.0)));
        let odd = HermitianTuple::zero(2, 3);
        assert_eq!(complexify_tuple(&odd).unwrap_err(), Error::OddLength(3));
    }

    #[test]
    fn random_tuples_are_reproducible() {
        let a = random_hermitian_tuple(2, 2, 7).unwrap();
        let b = random_hermitian_tuple(2, 2, 7).unwrap();
        assert_eq!(a, b);
        let s = random_hermitian_tuple(1, 1, 9).unwrap();
        assert_eq!(s.entry(0)[(0, 0)].im, 0.0);
        let longer = random_hermitian_tuple(3, 3, 4).unwrap();
        let shorter = random_hermitian_tuple(3, 2, 4).unwrap();
        assert_eq!(&longer.entries()[..2], shorter.entries());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(5, &mut rng);
        assert!(op_norm(&(u.adjoint() * &u - identity(5))) < 1e-12);
    }

    #[test]
    fn tuple_json_round_trip_and_errors() {
        let t = random_hermitian_tuple(3, 2, 11).unwrap();
        let v = tuple_to_json(&t);
        assert_eq!(v["k"], 2);
        assert_eq!(tuple_from_json(&v).unwrap(), t);
        let bad = serde_json::json!({"n": 2, "k": 1, "entries": [[[[0.0, 0.0]]]]});
        assert!(matches!(tuple_from_json(&bad), Err(Error::InvalidJson(_))));
        let skew = serde_json::json!({"n": 1, "k": 1, "entries": [[[[0.0, 1.0]]]]});
        assert!(matches!(tuple_from_json(&skew), Err(Error::NonHermitianInput { .. })));
    }
}
