//! Generated subalgebras of `M_n` and their invariants.
//!
//! `C*(a)` is computed as the span of all words in the entries. The span is
//! grown level by level: only the directions that were new at the previous
//! level are multiplied by the generators, and the novel part of the products
//! is extracted with an SVD of their residual against the current basis.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_core::{
    c, hermitian_deviation, identity, op_norm, unvectorize, vectorize, zeros,
    CMatrix, HermitianTuple,
};

/// Relative rank cut; the effective cut is `rank_cut * n`.
pub const DEFAULT_RANK_CUT: f64 = 1e-9;
/// Residual tolerance used when checking closure of a span.
pub const SPAN_TOL: f64 = 1e-6;
/// Left-generation threshold on `lambda_min / lambda_max` of `sum a_i* a_i`.
pub const LEFT_GENERATION_TOL: f64 = 1e-10;
/// Distances to a span below `MEMBERSHIP_FLOOR * (1 + ||z||)` count as membership.
pub const MEMBERSHIP_FLOOR: f64 = 1e-12;

type CVector = DVector<Complex64>;

fn columns_to_matrix(rows: usize, cols: &[CVector]) -> DMatrix<Complex64> {
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(cols)
    }
}

fn project_out(q: &DMatrix<Complex64>, v: &CVector) -> CVector {
    if q.ncols() == 0 {
        return v.clone();
    }
    let once = v - q * (q.adjoint() * v);
    &once - q * (q.adjoint() * &once)
}

/// Adds the novel directions of `candidates` to the orthonormal list `basis`
/// and returns them. Singular values of the residual block above `cut` count
/// as new directions; any singular value within a decade of the cut is
/// reported as ambiguous.
fn extend_orthonormal(
    basis: &mut Vec<CVector>,
    candidates: &[CVector],
    cut: f64,
    max_dim: usize,
) -> Result<Vec<CVector>> {
    if candidates.is_empty() || basis.len() >= max_dim {
        return Ok(Vec::new());
    }
    let rows = candidates[0].len();
    let q = columns_to_matrix(rows, basis);
    let residuals: Vec<CVector> = candidates.iter().map(|v| project_out(&q, v)).collect();
    let r = columns_to_matrix(rows, &residuals);
    let svd = r.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let mut fresh = Vec::new();
    for j in order {
        let s = svd.singular_values[j];
        if s > 0.1 * cut && s < 10.0 * cut {
            return Err(Error::ToleranceAmbiguity {
                singular_value: s,
                cut,
            });
        }
        if s <= cut || basis.len() >= max_dim {
            continue;
        }
        let q = columns_to_matrix(rows, basis);
        let mut v = project_out(&q, &u.column(j).into_owned());
        let norm = v.norm();
        if norm < 0.5 {
            continue;
        }
        v /= c(norm, 0.0);
        basis.push(v.clone());
        fresh.push(v);
    }
    Ok(fresh)
}

/// Orthonormal (Hilbert-Schmidt) basis of a subspace of `M_n`; produced by
/// the closure routines, so in practice a *-subalgebra.
#[derive(Debug, Clone)]
pub struct SubalgebraSpan {
    n: usize,
    vectors: Vec<CVector>,
}

impl SubalgebraSpan {
    /// Orthonormalises a spanning set without closing it.
    pub fn from_spanning_set(n: usize, mats: &[CMatrix], rank_cut: f64) -> Result<Self> {
        let mut vectors = Vec::new();
        let candidates: Vec<CVector> = mats.iter().map(vectorize).collect();
        extend_orthonormal(&mut vectors, &candidates, rank_cut * n as f64, n * n)?;
        Ok(Self { n, vectors })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            vectors: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        let vectors = (0..n * n)
            .map(|i| {
                let mut v = CVector::zeros(n * n);
                v[i] = c(1.0, 0.0);
                v
            })
            .collect();
        Self { n, vectors }
    }

    pub fn scalars(n: usize) -> Self {
        let v = vectorize(&identity(n)) / c((n as f64).sqrt(), 0.0);
        Self {
            n,
            vectors: vec![v],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_full(&self) -> bool {
        self.dimension() == self.n * self.n
    }

    pub fn basis(&self) -> Vec<CMatrix> {
        self.vectors
            .iter()
            .map(|v| unvectorize(v.as_slice(), self.n))
            .collect()
    }

    fn q(&self) -> DMatrix<Complex64> {
        columns_to_matrix(self.n * self.n, &self.vectors)
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, m: &CMatrix) -> CMatrix {
        let q = self.q();
        let v = vectorize(m);
        if q.ncols() == 0 {
            return zeros(self.n);
        }
        let p = &q * (q.adjoint() * v);
        unvectorize(p.as_slice(), self.n)
    }

    pub fn residual(&self, m: &CMatrix) -> CMatrix {
        m - self.project(m)
    }

    /// Operator-norm distance from `m` to its projection.
    pub fn distance(&self, m: &CMatrix) -> f64 {
        op_norm(&self.residual(m))
    }

    pub fn contains(&self, m: &CMatrix, tol: f64) -> bool {
        self.residual(m).norm() <= tol * m.norm().max(1.0)
    }

    /// Checks closure under adjoint and product within `tol`.
    pub fn verify_closure(&self, tol: f64) -> Result<()> {
        let basis = self.basis();
        let q = self.q();
        let resid = |m: &CMatrix| -> f64 {
            let v = vectorize(m);
            if q.ncols() == 0 {
                return v.norm();
            }
            (&v - &q * (q.adjoint() * &v)).norm()
        };
        for (i, b) in basis.iter().enumerate() {
            let r = resid(&b.adjoint());
            if r > tol {
                return Err(Error::NotAnAlgebra(format!(
                    "adjoint of basis element {i} leaves the span (residual {r:.3e})"
                )));
            }
            for (j, d) in basis.iter().enumerate() {
                let r = resid(&(b * d));
                if r > tol {
                    return Err(Error::NotAnAlgebra(format!(
                        "product of basis elements {i} and {j} leaves the span (residual {r:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Singular values within a decade of `cut` make the rank unreliable.
fn check_gap(values: impl IntoIterator<Item = f64>, cut: f64) -> Result<()> {
    for s in values {
        if s > 0.1 * cut && s < 10.0 * cut {
            return Err(Error::ToleranceAmbiguity {
                singular_value: s,
                cut,
            });
        }
    }
    Ok(())
}

/// Orthonormal basis of `{X : [X, m] = 0 for all m}`, from the SVD of the
/// stacked commutator operators (reduced to a square factor by QR).
fn commutant_of(n: usize, mats: &[CMatrix], cut: f64) -> Result<Vec<CVector>> {
    let nn = n * n;
    let mut stacked = DMatrix::<Complex64>::zeros(mats.len() * nn, nn);
    for (i, m) in mats.iter().enumerate() {
        stacked
            .view_mut((i * nn, 0), (nn, nn))
            .copy_from(&commutator_operator(m));
    }
    let square = if stacked.nrows() > nn {
        stacked.qr().r()
    } else {
        stacked.resize_vertically(nn, c(0.0, 0.0))
    };
    let svd = square.svd(false, true);
    check_gap(svd.singular_values.iter().copied(), cut)?;
    let v_t = svd.v_t.expect("right singular vectors requested");
    Ok((0..nn)
        .filter(|&j| svd.singular_values[j] <= cut)
        .map(|j| v_t.row(j).adjoint())
        .collect())
}

/// Smallest *-closed, product-closed subspace containing `gens`. No unit is
/// added. Non-Hermitian generators contribute their adjoints as well.
///
/// Computed as `P S'' P`, where `S` is the generators with their adjoints
/// and `P` projects onto the joint range: `S''` is the unital algebra
/// generated by `S` and `P` is the unit of the non-unital one. Each rank
/// decision is an SVD whose small singular values are spectral gaps of the
/// (normalised) generators rather than products of them.
pub fn matrix_closure(n: usize, gens: &[CMatrix], rank_cut: f64) -> Result<SubalgebraSpan> {
    for g in gens {
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                rows: g.nrows(),
                cols: g.ncols(),
            });
        }
    }
    let scale = gens.iter().map(op_norm).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(SubalgebraSpan::empty(n));
    }
    let mut normalized: Vec<CMatrix> = Vec::new();
    for g in gens {
        let g = g.unscale(scale);
        if hermitian_deviation(&g) > 1e-12 {
            normalized.push(g.adjoint());
        }
        normalized.push(g);
    }
    let cut = rank_cut * n as f64;

    let mut wide = DMatrix::<Complex64>::zeros(n, n * normalized.len());
    for (i, g) in normalized.iter().enumerate() {
        wide.view_mut((0, i * n), (n, n)).copy_from(g);
    }
    let svd = wide.svd(true, false);
    check_gap(svd.singular_values.iter().copied(), cut)?;
    let u = svd.u.expect("left singular vectors requested");
    let mut support = zeros(n);
    for j in 0..svd.singular_values.len() {
        if svd.singular_values[j] > cut {
            let col = u.column(j);
            support += col * col.adjoint();
        }
    }

    let first = commutant_of(n, &normalized, cut)?;
    let double = if first.len() == 1 {
        SubalgebraSpan::full(n).vectors
    } else {
        let mats: Vec<CMatrix> = first.iter().map(|v| unvectorize(v.as_slice(), n)).collect();
        commutant_of(n, &mats, cut)?
    };
    let compressed: Vec<CVector> = double
        .iter()
        .map(|v| vectorize(&(&support * unvectorize(v.as_slice(), n) * &support)))
        .collect();
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, &compressed, cut, n * n)?;
    Ok(SubalgebraSpan { n, vectors: basis })
}

/// `C*(t)` with the default rank cut.
pub fn generated_algebra(t: &HermitianTuple) -> Result<SubalgebraSpan> {
    generated_algebra_with_cut(t, DEFAULT_RANK_CUT)
}

pub fn generated_algebra_with_cut(t: &HermitianTuple, rank_cut: f64) -> Result<SubalgebraSpan> {
    matrix_closure(t.n(), t.entries(), rank_cut)
}

pub fn is_generating(t: &HermitianTuple) -> Result<bool> {
    Ok(generated_algebra(t)?.is_full())
}

/// True iff `sum a_i* a_i` is invertible.
pub fn is_left_generating(t: &HermitianTuple) -> bool {
    let n = t.n();
    let mut s = zeros(n);
    for a in t.entries() {
        s += a.adjoint() * a;
    }
    let eig = SymmetricEigen::new(s).eigenvalues;
    let max = eig.iter().cloned().fold(0.0, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    max > 0.0 && min > LEFT_GENERATION_TOL * max
}

/// Orbit type `((d_1, m_1), ..., (d_s, m_s))` of a subalgebra
/// `M_{d_1} + ... + M_{d_s}` embedded with multiplicities `m_i`; pairs sorted
/// descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitType(Vec<(usize, usize)>);

impl OrbitType {
    pub fn new(mut summands: Vec<(usize, usize)>) -> Self {
        summands.sort_by(|a, b| b.cmp(a));
        Self(summands)
    }

    /// `M_n` itself.
    pub fn full(n: usize) -> Self {
        Self(vec![(n, 1)])
    }

    pub fn summands(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum d_i^2`, the dimension of the abstract algebra.
    pub fn intrinsic_dimension(&self) -> usize {
        self.0.iter().map(|(d, _)| d * d).sum()
    }

    /// `sum m_i d_i`, the rank of the unit of the embedded algebra.
    pub fn occupied_size(&self) -> usize {
        self.0.iter().map(|(d, m)| d * m).sum()
    }

    /// Dimension of the commutant inside `M_n`.
    pub fn commutant_dimension(&self, n: usize) -> usize {
        let free = n.saturating_sub(self.occupied_size());
        self.0.iter().map(|(_, m)| m * m).sum::<usize>() + free * free
    }

    pub fn is_valid_for(&self, n: usize) -> bool {
        self.0.iter().all(|(d, m)| *d >= 1 && *m >= 1) && self.occupied_size() <= n
    }
}

impl fmt::Display for OrbitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (d, m)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({d},{m})")?;
        }
        write!(f, ")")
    }
}

/// Eigenvectors of a PSD Gram matrix with eigenvalue below
/// `rel_tol * reference`, where `reference` bounds its norm.
fn null_space_of_gram(gram: DMatrix<Complex64>, rel_tol: f64, reference: f64) -> Vec<CVector> {
    let eig = SymmetricEigen::new(gram);
    let cut = rel_tol * reference;
    (0..eig.eigenvalues.len())
        .filter(|&j| eig.eigenvalues[j] <= cut)
        .map(|j| eig.eigenvectors.column(j).into_owned())
        .collect()
}

/// `vec(X b - b X) = L_b vec(X)`.
fn commutator_operator(b: &CMatrix) -> DMatrix<Complex64> {
    let n = b.nrows();
    let id = identity(n);
    b.transpose().kronecker(&id) - id.kronecker(b)
}

/// All `X` commuting with every element of `s`.
pub fn commutant(s: &SubalgebraSpan) -> SubalgebraSpan {
    let n = s.n();
    if s.dimension() == 0 {
        return SubalgebraSpan::full(n);
    }
    let mut gram = DMatrix::<Complex64>::zeros(n * n, n * n);
    for b in s.basis() {
        let l = commutator_operator(&b);
        gram += l.adjoint() * &l;
    }
    SubalgebraSpan {
        n,
        vectors: null_space_of_gram(gram, 1e-10, 4.0 * s.dimension() as f64),
    }
}

fn intersection(a: &SubalgebraSpan, b: &SubalgebraSpan) -> Vec<CVector> {
    if a.dimension() == 0 || b.dimension() == 0 {
        return Vec::new();
    }
    let qa = a.q();
    let qb = b.q();
    let m = qa.adjoint() * &qb;
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] > 1.0 - 1e-6)
        .map(|j| {
            let coeffs = v_t.row(j).adjoint();
            &qb * coeffs
        })
        .collect()
}

/// Which stabilizer of a subalgebra `B` to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizerKind {
    /// Unitaries fixing every element of `B`; this is the stabilizer of any
    /// tuple generating `B`. Lie algebra: skew-Hermitian part of `B'`.
    Pointwise,
    /// Unitaries mapping `B` onto itself, `K(B)`. Lie algebra:
    /// `{X skew : [X, b] in B for all b in B}`.
    Setwise,
}

/// Real dimension of the stabilizer Lie algebra inside `PU_n`, i.e. after
/// quotienting the central direction `iI`.
pub fn stabilizer_lie_dimension(s: &SubalgebraSpan, kind: StabilizerKind) -> usize {
    let n = s.n();
    let dim = match kind {
        StabilizerKind::Pointwise => commutant(s).dimension(),
        StabilizerKind::Setwise => {
            if s.dimension() == 0 {
                n * n
            } else {
                let q = s.q();
                let mut gram = DMatrix::<Complex64>::zeros(n * n, n * n);
                for b in s.basis() {
                    let l = commutator_operator(&b);
                    let inside = q.adjoint() * &l;
                    gram += l.adjoint() * &l - inside.adjoint() * inside;
                }
                null_space_of_gram(gram, 1e-10, 4.0 * s.dimension() as f64).len()
            }
        }
    };
    dim.saturating_sub(1)
}

fn rank(vectors: &[CVector], cut: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = columns_to_matrix(vectors[0].len(), vectors);
    m.singular_values().iter().filter(|s| **s > cut).count()
}

/// Reads the orbit type of `s` from its minimal central projections.
pub fn classify_subalgebra(s: &SubalgebraSpan) -> Result<OrbitType> {
    s.verify_closure(SPAN_TOL)?;
    let n = s.n();
    if s.dimension() == 0 {
        return Ok(OrbitType::new(Vec::new()));
    }
    let center = intersection(s, &commutant(s));
    if center.is_empty() {
        return Err(Error::NotAnAlgebra("trivial center".into()));
    }
    let mut hermitian_center = Vec::new();
    for z in &center {
        let m = unvectorize(z.as_slice(), n);
        hermitian_center.push((&m + m.adjoint()).scale(0.5));
        hermitian_center.push((&m - m.adjoint()).map(|x| x * c(0.0, -0.5)));
    }
    let basis = s.basis();
    for attempt in 0..16u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ attempt);
        let mut h = zeros(n);
        for z in &hermitian_center {
            let w: f64 = rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            h += z.scale(w);
        }
        let eig = SymmetricEigen::new(h.clone());
        let scale = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut ambiguous = false;
        for (pos, &j) in order.iter().enumerate() {
            if pos == 0 {
                clusters.push(vec![j]);
                continue;
            }
            let gap = (eig.eigenvalues[j] - eig.eigenvalues[order[pos - 1]]) / scale;
            if gap > 1e-9 && gap < 1e-6 {
                ambiguous = true;
                break;
            }
            if gap <= 1e-9 {
                clusters.last_mut().unwrap().push(j);
            } else {
                clusters.push(vec![j]);
            }
        }
        if ambiguous {
            continue;
        }
        let mut summands = Vec::new();
        let mut total = 0usize;
        for cl in &clusters {
            let mut p = zeros(n);
            for &j in cl {
                let v = eig.eigenvectors.column(j);
                p += v * v.adjoint();
            }
            let block: Vec<CVector> = basis.iter().map(|b| vectorize(&(b * &p))).collect();
            let block_dim = rank(&block, 1e-6);
            if block_dim == 0 {
                continue;
            }
            let d = (block_dim as f64).sqrt().round() as usize;
            if d * d != block_dim || cl.len() % d != 0 {
                return Err(Error::NotAnAlgebra(format!(
                    "central block of rank {} carries a {}-dimensional algebra",
                    cl.len(),
                    block_dim
                )));
            }
            total += block_dim;
            summands.push((d, cl.len() / d));
        }
        if total != s.dimension() {
            // A block value landed on the zero cluster; retry with new weights.
            continue;
        }
        return Ok(OrbitType::new(summands));
    }
    Err(Error::ToleranceAmbiguity {
        singular_value: 0.0,
        cut: 1e-6,
    })
}

/// A self-adjoint approximation step: given `x`, an accuracy `eps` and a
/// target `z`, return `x'` with `||x' - x|| < eps` and `z` within `eps` of
/// `C*(x')`.
pub trait Approximator {
    fn approximate(&mut self, x: &HermitianTuple, eps: f64, target: &CMatrix)
        -> Result<HermitianTuple>;
}

impl<F> Approximator for F
where
    F: FnMut(&HermitianTuple, f64, &CMatrix) -> Result<HermitianTuple>,
{
    fn approximate(
        &mut self,
        x: &HermitianTuple,
        eps: f64,
        target: &CMatrix,
    ) -> Result<HermitianTuple> {
        self(x, eps, target)
    }
}

/// A noncommutative polynomial without constant term, stored as words in the
/// tuple entries with complex coefficients.
#[derive(Debug, Clone)]
pub struct WordPolynomial {
    pub words: Vec<Vec<usize>>,
    pub coefficients: Vec<Complex64>,
}

fn evaluate_word(t: &HermitianTuple, word: &[usize]) -> CMatrix {
    let mut m = t.entry(word[0]).clone();
    for &i in &word[1..] {
        m *= t.entry(i);
    }
    m
}

impl WordPolynomial {
    pub fn zero() -> Self {
        Self {
            words: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    pub fn evaluate(&self, t: &HermitianTuple) -> CMatrix {
        let mut out = zeros(t.n());
        for (w, a) in self.words.iter().zip(&self.coefficients) {
            out += evaluate_word(t, w).map(|x| x * a);
        }
        out
    }

    /// Upper bound on `||p(y') - p(y)||` for `||y|| <= radius`,
    /// `||y' - y|| <= delta`.
    pub fn lipschitz_bound(&self, radius: f64, delta: f64) -> f64 {
        self.words
            .iter()
            .zip(&self.coefficients)
            .map(|(w, a)| {
                let l = w.len() as i32;
                a.norm() * ((radius + delta).powi(l) - radius.powi(l))
            })
            .sum()
    }

    /// Least-squares fit of `target` by a basis of words, chosen breadth
    /// first until the word span stabilises.
    pub fn fit(t: &HermitianTuple, target: &CMatrix) -> Result<Self> {
        let n = t.n();
        let mut accepted: Vec<(Vec<usize>, CMatrix)> = Vec::new();
        let mut ortho: Vec<CVector> = Vec::new();
        let mut frontier: Vec<Vec<usize>> = (0..t.k()).map(|i| vec![i]).collect();
        while !frontier.is_empty() && accepted.len() < n * n {
            let mut next = Vec::new();
            for w in frontier {
                let m = evaluate_word(t, &w);
                let norm = m.norm();
                if norm == 0.0 {
                    continue;
                }
                let v = vectorize(&m) / c(norm, 0.0);
                let q = columns_to_matrix(n * n, &ortho);
                let r = project_out(&q, &v);
                let rn = r.norm();
                if rn > 1e-8 {
                    ortho.push(r / c(rn, 0.0));
                    for i in 0..t.k() {
                        let mut ext = w.clone();
                        ext.push(i);
                        next.push(ext);
                    }
                    accepted.push((w, m));
                    if accepted.len() >= n * n {
                        break;
                    }
                }
            }
            frontier = next;
        }
        if accepted.is_empty() {
            return Ok(Self::zero());
        }
        let norms: Vec<f64> = accepted.iter().map(|(_, m)| m.norm()).collect();
        let cols: Vec<CVector> = accepted
            .iter()
            .zip(&norms)
            .map(|((_, m), s)| vectorize(m) / c(*s, 0.0))
            .collect();
        let w = columns_to_matrix(n * n, &cols);
        let rhs = vectorize(target);
        let svd = w.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
        Ok(Self {
            words: accepted.iter().map(|(w, _)| w.clone()).collect(),
            coefficients: sol.iter().zip(&norms).map(|(x, s)| x / *s).collect(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BuilderStep {
    pub index: usize,
    pub target_index: Option<usize>,
    /// Allowed movement `min_i delta_i / 2^(index - i)`.
    pub budget: f64,
    pub moved: f64,
    /// Stability radius of this step's target approximation.
    pub delta: f64,
    /// `||z - p(y_index)||` for the fitted polynomial `p`.
    pub fit_error: f64,
}

#[derive(Debug, Clone)]
pub struct BuilderOutcome {
    pub tuple: HermitianTuple,
    pub steps: Vec<BuilderStep>,
    pub total_drift: f64,
    /// `||z_j - p_j(y)||` for each step's polynomial evaluated at the final
    /// tuple; every value is at most `1 / steps`.
    pub final_target_errors: Vec<f64>,
}

/// Finite-stage version of the iterative generator construction: `steps`
/// rounds, round `j` approximating target `j` (cyclically) while moving less
/// than `min_i delta_i / 2^(j-i)` with `delta_0 = eps`.
pub fn iterate_builder<A: Approximator + ?Sized>(
    start: &HermitianTuple,
    approximator: &mut A,
    targets: &[CMatrix],
    steps: usize,
    eps: f64,
) -> Result<BuilderOutcome> {
    if steps == 0 || !(eps > 0.0) {
        return Err(Error::InvalidArgument(
            "builder needs at least one step and eps > 0".into(),
        ));
    }
    let n = start.n();
    let accuracy = 1.0 / steps as f64;
    let mut deltas = vec![eps];
    let mut y = start.clone();
    let mut records = Vec::with_capacity(steps);
    let mut polys: Vec<(usize, WordPolynomial)> = Vec::new();
    for j in 1..=steps {
        let budget = deltas
            .iter()
            .enumerate()
            .map(|(i, d)| d / 2f64.powi((j - i) as i32))
            .fold(f64::INFINITY, f64::min);
        let target_index = (!targets.is_empty()).then(|| (j - 1) % targets.len());
        let target = target_index.map_or_else(|| zeros(n), |i| targets[i].clone());
        let request = budget.min(0.5 * accuracy);
        let next = approximator.approximate(&y, request, &target)?;
        let moved = next.distance(&y)?;
        if moved >= budget || moved >= request {
            return Err(Error::ApproximatorContractViolation {
                step: j,
                detail: format!("moved {moved:.3e}, allowed {request:.3e}"),
            });
        }
        let algebra = generated_algebra(&next)?;
        let dist = algebra.distance(&target);
        // Below the floor the distance is rounding error of the projection.
        let floor = MEMBERSHIP_FLOOR * (1.0 + op_norm(&target));
        if dist >= request && dist > floor {
            return Err(Error::ApproximatorContractViolation {
                step: j,
                detail: format!("target left at distance {dist:.3e}, allowed {request:.3e}"),
            });
        }
        let poly = WordPolynomial::fit(&next, &target)?;
        let fit_error = op_norm(&(&target - poly.evaluate(&next)));
        if fit_error >= accuracy {
            return Err(Error::ApproximatorContractViolation {
                step: j,
                detail: format!("word fit error {fit_error:.3e} exceeds {accuracy:.3e}"),
            });
        }
        let radius = next.norm();
        let slack = |d: f64| fit_error + poly.lipschitz_bound(radius, d);
        let delta = if slack(eps) <= accuracy {
            eps
        } else {
            let (mut lo, mut hi) = (0.0, eps);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if slack(mid) <= accuracy {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if !(delta > 0.0) {
            return Err(Error::ApproximatorContractViolation {
                step: j,
                detail: "no positive stability radius".into(),
            });
        }
        deltas.push(delta);
        records.push(BuilderStep {
            index: j,
            target_index,
            budget,
            moved,
            delta,
            fit_error,
        });
        if let Some(i) = target_index {
            polys.push((i, poly));
        }
        y = next;
    }
    let total_drift = y.distance(start)?;
    let final_target_errors = polys
        .iter()
        .map(|(i, p)| op_norm(&(&targets[*i] - p.evaluate(&y))))
        .collect();
    Ok(BuilderOutcome {
        tuple: y,
        steps: records,
        total_drift,
        final_target_errors,
    })
}
