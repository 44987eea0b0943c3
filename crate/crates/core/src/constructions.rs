//! Explicit generator constructions for finite-dimensional C*-algebras.
//!
//! Elements of a matrix algebra over `A` (an `n x n` matrix with entries in
//! `A = M_{d_1} + ... + M_{d_s}`) are stored as `nN x nN` complex matrices
//! whose `(p, q)` block of size `N = sum d_j` is the `(p, q)` entry.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generation::{generated_algebra, SubalgebraSpan, DEFAULT_RANK_CUT};
use crate::matrix_core::{
    apply_function, apply_real_fn, block_diag, c, diag, direct_sum_tuples, identity, matrix_unit,
    op_norm, random_hermitian, spectral_decomposition, zeros, CMatrix, HermitianTuple,
    PiecewiseLinearFn,
};

/// Residual tolerance for matrix-unit relations and recovered units.
pub const UNIT_TOL: f64 = 1e-6;

const MEMBERSHIP_TOL: f64 = 1e-9;

/// `M_{d_1} + ... + M_{d_s}`, embedded block-diagonally in `M_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAlgebra {
    blocks: Vec<usize>,
}

impl BlockAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::InvalidSize(format!(
                "block sizes must be positive and non-empty, got {blocks:?}"
            )));
        }
        Ok(Self { blocks })
    }

    /// `M_n` as a single block.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Ambient size `N = sum d_j`.
    pub fn size(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|d| d * d).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&d| d == 1)
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect()
    }

    /// Index classes of `A (x) M_n`: the indices touched by block `j` in each
    /// of the `n` matrix positions. With `n = 1` these are the block ranges.
    pub fn tensor_classes(&self, n: usize) -> Vec<Vec<usize>> {
        let size = self.size();
        self.offsets()
            .iter()
            .zip(&self.blocks)
            .map(|(&o, &d)| {
                (0..n)
                    .flat_map(|p| (0..d).map(move |s| p * size + o + s))
                    .collect()
            })
            .collect()
    }

    pub fn contains(&self, m: &CMatrix) -> bool {
        in_classes(&self.tensor_classes(1), self.size(), m)
    }

    pub fn tensor_contains(&self, n: usize, m: &CMatrix) -> bool {
        in_classes(&self.tensor_classes(n), n * self.size(), m)
    }

    /// `A` as a subspace of `M_N`.
    pub fn span(&self) -> Result<SubalgebraSpan> {
        self.tensor_span(1)
    }

    /// `A (x) M_n` as a subspace of `M_{nN}`.
    pub fn tensor_span(&self, n: usize) -> Result<SubalgebraSpan> {
        let total = n * self.size();
        let units: Vec<CMatrix> = self
            .tensor_classes(n)
            .iter()
            .flat_map(|cl| {
                cl.iter()
                    .flat_map(move |&x| cl.iter().map(move |&y| matrix_unit(total, x, y)))
            })
            .collect();
        SubalgebraSpan::from_spanning_set(total, &units, DEFAULT_RANK_CUT)
    }

    /// Random Hermitian element, independent GUE samples per block.
    pub fn random_hermitian(&self, rng: &mut ChaCha8Rng) -> CMatrix {
        let parts: Vec<CMatrix> = self.blocks.iter().map(|&d| random_hermitian(d, rng)).collect();
        block_diag(&parts.iter().collect::<Vec<_>>())
    }

    pub fn random_tuple(&self, k: usize, seed: u64) -> Result<HermitianTuple> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        HermitianTuple::new((0..k).map(|_| self.random_hermitian(&mut rng)).collect())
    }

    /// Applies `f` to every diagonal block of an element of `A`.
    fn map_blocks(
        &self,
        m: &CMatrix,
        mut f: impl FnMut(usize, &CMatrix) -> Result<CMatrix>,
    ) -> Result<CMatrix> {
        let mut out = zeros(self.size());
        for (j, (&o, &d)) in self.offsets().iter().zip(&self.blocks).enumerate() {
            let block = m.view((o, o), (d, d)).into_owned();
            out.view_mut((o, o), (d, d)).copy_from(&f(j, &block)?);
        }
        Ok(out)
    }
}

fn in_classes(classes: &[Vec<usize>], size: usize, m: &CMatrix) -> bool {
    if m.nrows() != size || m.ncols() != size {
        return false;
    }
    let mut label = vec![usize::MAX; size];
    for (j, cl) in classes.iter().enumerate() {
        for &x in cl {
            label[x] = j;
        }
    }
    let tol = MEMBERSHIP_TOL * op_norm(m).max(1.0);
    (0..size).all(|x| (0..size).all(|y| label[x] == label[y] || m[(x, y)].norm() <= tol))
}

/// `(diag(1/n, ..., n/n), tridiagonal 0/1 matrix)`.
pub fn canonical_pair(n: usize) -> Result<HermitianTuple> {
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "canonical pair needs n >= 2, got {n}"
        )));
    }
    let a = diag(&(1..=n).map(|s| s as f64 / n as f64).collect::<Vec<_>>());
    let mut b = zeros(n);
    for s in 0..n - 1 {
        b[(s, s + 1)] = c(1.0, 0.0);
        b[(s + 1, s)] = c(1.0, 0.0);
    }
    HermitianTuple::new(vec![a, b])
}

/// Moves `values` so that all of them, together with the fixed anchor 0, are
/// at least `gap` apart. Each value moves by at most `gap * values.len()`;
/// values already separated do not move.
pub fn separate_values(values: &[f64], gap: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    let mut out = values.to_vec();
    let mut prev = 0.0;
    for &i in order.iter().filter(|&&i| values[i] >= 0.0) {
        out[i] = values[i].max(prev + gap);
        prev = out[i];
    }
    prev = 0.0;
    for &i in order.iter().rev().filter(|&&i| values[i] < 0.0) {
        out[i] = values[i].min(prev - gap);
        prev = out[i];
    }
    out
}

fn check_members(algebra: &BlockAlgebra, t: &HermitianTuple) -> Result<()> {
    if t.n() != algebra.size() {
        return Err(Error::DimensionMismatch {
            expected: algebra.size(),
            rows: t.n(),
            cols: t.n(),
        });
    }
    if let Some(i) = t.entries().iter().position(|m| !algebra.contains(m)) {
        return Err(Error::NotInAlgebra(format!(
            "entry {i} is not block-diagonal for blocks {:?}",
            algebra.blocks()
        )));
    }
    Ok(())
}

fn verify_generates(t: &HermitianTuple, dimension: usize, what: &str) -> Result<()> {
    let got = generated_algebra(t)?.dimension();
    if got != dimension {
        return Err(Error::ConstructionFailed(format!(
            "{what}: generated dimension {got}, expected {dimension}"
        )));
    }
    Ok(())
}

/// Perturbs the first two entries of `t` (inside `A`) to a generating pair of
/// `A`. The first entry gets distinct eigenvalues at least `eps / (4N)` apart
/// and from 0; in its eigenbasis every superdiagonal entry of the second
/// entry gets modulus at least `eps / 4`. Inputs already meeting both
/// conditions are returned unchanged.
pub fn perturb_to_generating_tuple(
    algebra: &BlockAlgebra,
    t: &HermitianTuple,
    eps: f64,
) -> Result<HermitianTuple> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    check_members(algebra, t)?;
    if t.k() < 2 && !algebra.is_commutative() {
        return Err(Error::NeedTwoEntries);
    }
    let size = algebra.size();
    let gap = eps / (4.0 * size as f64);
    let floor = eps / 4.0;

    let a = t.entry(0);
    let offsets = algebra.offsets();
    let spectra: Vec<_> = offsets
        .iter()
        .zip(algebra.blocks())
        .map(|(&o, &d)| spectral_decomposition(&a.view((o, o), (d, d)).into_owned()))
        .collect::<Result<_>>()?;
    let pooled: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues.clone()).collect();
    let moved = separate_values(&pooled, gap);

    let mut new_a = a.clone();
    let mut new_b = (t.k() >= 2).then(|| t.entry(1).clone());
    let mut changed = false;
    let mut cursor = 0;
    for ((sd, &o), &d) in spectra.iter().zip(&offsets).zip(algebra.blocks()) {
        let values = &moved[cursor..cursor + d];
        cursor += d;
        let u = &sd.unitary;
        if values != sd.eigenvalues.as_slice() {
            let block = u * diag(values) * u.adjoint();
            new_a.view_mut((o, o), (d, d)).copy_from(&block);
            changed = true;
        }
        if let Some(b) = new_b.as_mut() {
            let mut bt = u.adjoint() * b.view((o, o), (d, d)) * u;
            let mut touched = false;
            for s in 0..d.saturating_sub(1) {
                let z = bt[(s, s + 1)];
                if z.norm() < floor {
                    let w = if z.norm() > 0.0 {
                        z.unscale(z.norm()).scale(floor)
                    } else {
                        c(floor, 0.0)
                    };
                    bt[(s, s + 1)] = w;
                    bt[(s + 1, s)] = w.conj();
                    touched = true;
                }
            }
            if touched {
                b.view_mut((o, o), (d, d)).copy_from(&(u * bt * u.adjoint()));
                changed = true;
            }
        }
    }
    if !changed {
        return Ok(t.clone());
    }
    let out = t.with_entry(0, new_a)?;
    let out = match new_b {
        Some(b) => out.with_entry(1, b)?,
        None => out,
    };
    verify_generates(&out, algebra.dimension(), "perturbed tuple")?;
    Ok(out)
}

/// Approximator for the iterative builder on a block algebra: each step
/// perturbs to a generating tuple of the whole algebra, so any target inside
/// the algebra is reached exactly.
pub fn generating_approximator(
    algebra: BlockAlgebra,
) -> impl FnMut(&HermitianTuple, f64, &CMatrix) -> Result<HermitianTuple> {
    move |x, eps, _target| perturb_to_generating_tuple(&algebra, x, 0.9 * eps)
}

struct ClusteredSpectrum {
    values: Vec<f64>,
    /// Cluster index of each eigenvalue, in eigenvalue order.
    membership: Vec<usize>,
    unitary: CMatrix,
}

fn clustered_spectrum(h: &CMatrix) -> Result<ClusteredSpectrum> {
    let sd = spectral_decomposition(h)?;
    let tol = 1e-9 * op_norm(h).max(1.0);
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut membership = Vec::with_capacity(sd.eigenvalues.len());
    for &x in &sd.eigenvalues {
        match values.last() {
            Some(&v) if x - v <= tol => {
                let k = values.len() - 1;
                let m = counts[k] as f64;
                values[k] = (v * m + x) / (m + 1.0);
                counts[k] += 1;
            }
            _ => {
                values.push(x);
                counts.push(1);
            }
        }
        membership.push(values.len() - 1);
    }
    Ok(ClusteredSpectrum {
        values,
        membership,
        unitary: sd.unitary,
    })
}

impl ClusteredSpectrum {
    fn rebuild(&self, new_values: &[f64]) -> CMatrix {
        let per_eigen: Vec<f64> = self.membership.iter().map(|&k| new_values[k]).collect();
        &self.unitary * diag(&per_eigen) * self.unitary.adjoint()
    }
}

/// Direct sum of generating tuples of `A` and `B`, after moving the distinct
/// eigenvalues of both first entries apart from each other and from 0. The
/// move is a functional calculus injective on each spectrum, so each summand
/// still generates its algebra.
pub fn combine_direct_sum_generators(
    ta: &HermitianTuple,
    tb: &HermitianTuple,
    eps: f64,
) -> Result<HermitianTuple> {
    if ta.k() != tb.k() {
        return Err(Error::LengthMismatch {
            left: ta.k(),
            right: tb.k(),
        });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let gap = eps / (4.0 * (ta.n() + tb.n()) as f64);
    let sa = clustered_spectrum(ta.entry(0))?;
    let sb = clustered_spectrum(tb.entry(0))?;
    let pooled: Vec<f64> = sa.values.iter().chain(&sb.values).copied().collect();
    let moved = separate_values(&pooled, gap);
    let (ma, mb) = moved.split_at(sa.values.len());
    let ta2 = ta.with_entry(0, sa.rebuild(ma))?;
    let tb2 = tb.with_entry(0, sb.rebuild(mb))?;
    let out = direct_sum_tuples(&ta2, &tb2)?;
    let expected = generated_algebra(ta)?.dimension() + generated_algebra(tb)?.dimension();
    verify_generates(&out, expected, "direct sum")?;
    Ok(out)
}

/// Raises every singular value below `delta / 2` to `delta / 2`.
pub fn make_invertible(m: &CMatrix, delta: f64) -> CMatrix {
    let floor = delta / 2.0;
    let mut svd = m.clone().svd(true, true);
    if svd.singular_values.iter().all(|s| *s >= floor) {
        return m.clone();
    }
    for s in svd.singular_values.iter_mut() {
        *s = s.max(floor);
    }
    svd.recompose().expect("both singular factors computed")
}

/// `(b* b)^{-1/2} b*` for invertible `b`; it maps `b` to `|b|`.
pub fn polar_unitary(b: &CMatrix) -> Result<CMatrix> {
    let bb = b.adjoint() * b;
    let cut = 1e-24 * op_norm(&bb).max(1e-300);
    let inv_sqrt = apply_real_fn(&bb, |x| if x > cut { 1.0 / x.sqrt() } else { f64::NAN })?;
    if inv_sqrt.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("polar unitary of a singular matrix".into()));
    }
    Ok(inv_sqrt * b.adjoint())
}

fn entry_of(m: &CMatrix, size: usize, p: usize, q: usize) -> CMatrix {
    m.view((p * size, q * size), (size, size)).into_owned()
}

fn set_entry(m: &mut CMatrix, size: usize, p: usize, q: usize, value: &CMatrix) {
    m.view_mut((p * size, q * size), (size, size)).copy_from(value);
}

/// Recovers the units `1_A (x) e_{pq}` (row-major, `n^2` of them) from a
/// diagonal-over-`A` element `a` whose diagonal entries have disjoint spectra
/// avoiding 0, and an element `b` whose last-column entries `b_{p,n}` are
/// positive invertible. Only functional calculus, products and inverse
/// square roots are used, so the units lie in `C*(a, b)`.
pub fn recover_matrix_units(
    algebra_size: usize,
    n: usize,
    a: &CMatrix,
    b: &CMatrix,
) -> Result<Vec<CMatrix>> {
    let total = algebra_size * n;
    for m in [a, b] {
        if m.nrows() != total || m.ncols() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
    }
    if n == 0 || algebra_size == 0 {
        return Err(Error::InvalidSize("empty matrix algebra".into()));
    }
    let scale = op_norm(a).max(1.0);
    let tol = 1e-9 * scale;
    let spectra: Vec<Vec<f64>> = (0..n)
        .map(|p| clustered_spectrum(&entry_of(a, algebra_size, p, p)).map(|s| s.values))
        .collect::<Result<_>>()?;
    let mut points: Vec<(f64, Option<usize>)> = vec![(0.0, None)];
    for (p, vals) in spectra.iter().enumerate() {
        points.extend(vals.iter().map(|&x| (x, Some(p))));
    }
    points.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut min_gap = f64::INFINITY;
    for w in points.windows(2) {
        let gap = w[1].0 - w[0].0;
        if gap <= tol {
            return Err(Error::SpectraNotSeparated(match (w[0].1, w[1].1) {
                (None, Some(p)) | (Some(p), None) => {
                    format!("diagonal entry {p} has 0 in its spectrum")
                }
                (Some(p), Some(q)) => {
                    format!("diagonal entries {p} and {q} share the eigenvalue {:.6e}", w[0].0)
                }
                (None, None) => unreachable!(),
            }));
        }
        min_gap = min_gap.min(gap);
    }
    let delta0 = min_gap / 2.0;

    let mut diagonal_units = Vec::with_capacity(n);
    for vals in &spectra {
        let f = PiecewiseLinearFn::bump(vals, delta0 / 4.0, delta0 / 2.0)?;
        diagonal_units.push(apply_function(a, &f)?);
    }
    let last = n - 1;
    let e_last = &diagonal_units[last];
    let mut to_last = Vec::with_capacity(n);
    for (p, e_p) in diagonal_units.iter().enumerate().take(last) {
        let g = e_p * b * e_last;
        let corner = entry_of(&g, algebra_size, p, last);
        let skew = op_norm(&(&corner - corner.adjoint()));
        let eig = spectral_decomposition(&((&corner + corner.adjoint()).scale(0.5)))
            .map_err(|e| Error::NotPositiveInvertible {
                index: p,
                detail: e.to_string(),
            })?;
        let lowest = eig.eigenvalues[0];
        let corner_norm = op_norm(&corner).max(1e-300);
        if skew > 1e-8 * corner_norm || !(lowest > 1e-10 * corner_norm) {
            return Err(Error::NotPositiveInvertible {
                index: p,
                detail: format!("lowest eigenvalue {lowest:.3e}, skew part {skew:.3e}"),
            });
        }
        let cut = 0.5 * lowest * lowest;
        let h = apply_real_fn(&(g.adjoint() * &g), |x| if x > cut { 1.0 / x.sqrt() } else { 0.0 })?;
        to_last.push(g * h);
    }
    to_last.push(e_last.clone());
    let mut units = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            let m = if p == q {
                diagonal_units[p].clone()
            } else if q == last {
                to_last[p].clone()
            } else if p == last {
                to_last[q].adjoint()
            } else {
                &to_last[p] * to_last[q].adjoint()
            };
            units.push(m);
        }
    }
    Ok(units)
}

/// Largest violation of `e_{ij} e_{kl} = [j = k] e_{il}` and `sum e_{ii} = 1`.
pub fn matrix_unit_defect(units: &[CMatrix], n: usize) -> f64 {
    let size = units[0].nrows();
    let mut worst: f64 = 0.0;
    let mut sum = zeros(size);
    for i in 0..n {
        sum += &units[i * n + i];
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let prod = &units[i * n + j] * &units[k * n + l];
                    let expected = if j == k { units[i * n + l].clone() } else { zeros(size) };
                    worst = worst.max(op_norm(&(prod - expected)));
                }
            }
        }
    }
    worst.max(op_norm(&(sum - identity(size))))
}

/// A unitary in `A (x) M_n` whose conjugation makes `h` diagonal.
fn diagonalizing_unitary(algebra: &BlockAlgebra, n: usize, h: &CMatrix) -> Result<CMatrix> {
    let total = n * algebra.size();
    let mut w = zeros(total);
    for cl in algebra.tensor_classes(n) {
        let m = cl.len();
        let sub = CMatrix::from_fn(m, m, |x, y| h[(cl[x], cl[y])]);
        let sd = spectral_decomposition(&sub)?;
        for x in 0..m {
            for y in 0..m {
                w[(cl[x], cl[y])] = sd.unitary[(x, y)];
            }
        }
    }
    Ok(w)
}

/// Perturbs the first two entries of a tuple in `A (x) M_n` (`n >= 2`) to a
/// pair generating `A (x) M_n`, moving less than `eps`.
///
/// After a unitary change of coordinates inside `A (x) M_n` the first entry is
/// diagonal and the last-column entries of the second entry are made
/// invertible and then positive. The diagonal entries of the first entry get
/// disjoint spectra avoiding 0, which puts the diagonal units in the
/// generated algebra; the positive corners then give all matrix units.
/// Finally the first two diagonal entries are perturbed to a generating pair
/// of `A`, small enough to keep the spectral separation.
pub fn tensor_compress(
    algebra: &BlockAlgebra,
    n: usize,
    t: &HermitianTuple,
    eps: f64,
) -> Result<HermitianTuple> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("tensor compression needs n >= 2, got {n}")));
    }
    if t.k() < 2 {
        return Err(Error::NeedTwoEntries);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let size = algebra.size();
    let total = n * size;
    if t.n() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            rows: t.n(),
            cols: t.n(),
        });
    }
    if let Some(i) = t.entries().iter().position(|m| !algebra.tensor_contains(n, m)) {
        return Err(Error::NotInAlgebra(format!(
            "entry {i} does not lie in A (x) M_{n} for blocks {:?}",
            algebra.blocks()
        )));
    }

    let w1 = diagonalizing_unitary(algebra, n, t.entry(0))?;
    let conj = |u: &CMatrix, m: &CMatrix| u.adjoint() * m * u;
    let mut original = [conj(&w1, t.entry(0)), conj(&w1, t.entry(1))];
    let mut a = CMatrix::from_diagonal(&original[0].diagonal().map(|z| c(z.re, 0.0)));
    let mut b = original[1].clone();

    // Invertible, then positive, last-column entries of b.
    let last = n - 1;
    let floor = eps / (2.0 * (n as f64).sqrt());
    let mut polar = Vec::with_capacity(n);
    for p in 0..last {
        let corner = algebra.map_blocks(&entry_of(&b, size, p, last), |_, blk| {
            Ok(make_invertible(blk, floor))
        })?;
        set_entry(&mut b, size, p, last, &corner);
        set_entry(&mut b, size, last, p, &corner.adjoint());
        polar.push(algebra.map_blocks(&corner, |_, blk| polar_unitary(blk))?);
    }
    polar.push(identity(size));
    let u2 = block_diag(&polar.iter().collect::<Vec<_>>());
    let recoordinate = |m: &CMatrix| &u2 * m * u2.adjoint();
    a = recoordinate(&a);
    b = recoordinate(&b);
    original = [recoordinate(&original[0]), recoordinate(&original[1])];
    let w = &w1 * u2.adjoint();

    // Disjoint spectra, away from 0, for the diagonal entries of a.
    let gap = eps / (4.0 * total as f64);
    let mut spectra = Vec::new();
    for p in 0..n {
        let ap = entry_of(&a, size, p, p);
        for (&o, &d) in algebra.offsets().iter().zip(algebra.blocks()) {
            spectra.push(spectral_decomposition(&ap.view((o, o), (d, d)).into_owned())?);
        }
    }
    let pooled: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues.clone()).collect();
    let moved = separate_values(&pooled, gap);
    let mut cursor = 0;
    let mut spec_iter = spectra.iter();
    let mut diagonal_entries = Vec::with_capacity(n);
    for _ in 0..n {
        let entry = algebra.map_blocks(&zeros(size), |j, _| {
            let sd = spec_iter.next().expect("one decomposition per block");
            let d = algebra.blocks()[j];
            let vals = &moved[cursor..cursor + d];
            cursor += d;
            Ok(&sd.unitary * diag(vals) * sd.unitary.adjoint())
        })?;
        diagonal_entries.push(entry);
    }

    // Generating pair of A in the first two diagonal entries.
    let mut points: Vec<f64> = moved.clone();
    points.push(0.0);
    points.sort_by(f64::total_cmp);
    let delta0 = points
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        / 2.0;
    let eps4 = (eps / 4.0).min(delta0 / 8.0);
    let pair = HermitianTuple::new(vec![diagonal_entries[0].clone(), diagonal_entries[1].clone()])?;
    let pair = perturb_to_generating_tuple(algebra, &pair, eps4)?;
    diagonal_entries[0] = pair.entry(0).clone();
    diagonal_entries[1] = pair.entry(1).clone();
    a = block_diag(&diagonal_entries.iter().collect::<Vec<_>>());

    let units = recover_matrix_units(size, n, &a, &b)?;
    let defect = matrix_unit_defect(&units, n);
    if defect > UNIT_TOL {
        return Err(Error::ConstructionFailed(format!(
            "recovered matrix units violate the relations by {defect:.3e}"
        )));
    }
    let working = HermitianTuple::new(vec![a.clone(), b.clone()])?;
    verify_generates(&working, n * n * algebra.dimension(), "compressed pair")?;
    let moved_by = op_norm(&(&a - &original[0])).max(op_norm(&(&b - &original[1])));
    if moved_by >= eps {
        return Err(Error::ConstructionFailed(format!(
            "compression moved the tuple by {moved_by:.3e}, budget {eps:.3e}"
        )));
    }
    let back = |m: &CMatrix| &w * m * w.adjoint();
    let mut entries = vec![back(&a), back(&b)];
    entries.extend(t.entries()[2..].iter().cloned());
    HermitianTuple::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::is_generating;
    use crate::matrix_core::random_hermitian_tuple;

    #[test]
    fn canonical_pair_examples() {
        let t = canonical_pair(2).unwrap();
        assert_eq!(t.entry(0), &diag(&[0.5, 1.0]));
        assert_eq!(t.entry(1)[(0, 1)], c(1.0, 0.0));
        assert_eq!(t.entry(1)[(0, 0)], c(0.0, 0.0));
        let t = canonical_pair(3).unwrap();
        assert_eq!(t.entry(0), &diag(&[1.0 / 3.0, 2.0 / 3.0, 1.0]));
        let b = t.entry(1);
        assert_eq!(b[(1, 2)], c(1.0, 0.0));
        assert_eq!(b[(0, 2)], c(0.0, 0.0));
        assert!(is_generating(&canonical_pair(5).unwrap()).unwrap());
        assert!(matches!(canonical_pair(1), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn separation_moves_little() {
        let v = separate_values(&[0.0, 0.0, 0.0, -0.0001, 1.0], 0.01);
        assert_eq!(v[4], 1.0);
        assert!(v[3] <= -0.01);
        let mut sorted = v.clone();
        sorted.push(0.0);
        sorted.sort_by(f64::total_cmp);
        assert!(sorted.windows(2).all(|w| w[1] - w[0] >= 0.01 - 1e-15));
        assert_eq!(separate_values(&[-1.0, 1.0], 0.5), vec![-1.0, 1.0]);
    }

    #[test]
    fn perturb_zero_pair_in_full_algebra() {
        let a3 = BlockAlgebra::full(3).unwrap();
        let out = perturb_to_generating_tuple(&a3, &HermitianTuple::zero(3, 2), 0.01).unwrap();
        assert!(is_generating(&out).unwrap());
        assert!(out.norm() < 0.01);
    }

    #[test]
    fn perturb_zero_pair_in_block_algebra() {
        let alg = BlockAlgebra::new(vec![2, 3]).unwrap();
        let out = perturb_to_generating_tuple(&alg, &HermitianTuple::zero(5, 2), 0.05).unwrap();
        assert_eq!(generated_algebra(&out).unwrap().dimension(), 13);
        assert!(out.norm() < 0.05);
        let s2 = spectral_decomposition(&out.entry(0).view((0, 0), (2, 2)).into_owned()).unwrap();
        let s3 = spectral_decomposition(&out.entry(0).view((2, 2), (3, 3)).into_owned()).unwrap();
        for x in &s2.eigenvalues {
            for y in &s3.eigenvalues {
                assert!((x - y).abs() >= 0.05 / 20.0 - 1e-12);
            }
        }
    }

    #[test]
    fn perturb_keeps_good_inputs() {
        let a2 = BlockAlgebra::full(2).unwrap();
        let t = canonical_pair(2).unwrap();
        assert_eq!(perturb_to_generating_tuple(&a2, &t, 0.01).unwrap(), t);
    }

    #[test]
    fn perturb_needs_two_entries() {
        let a2 = BlockAlgebra::full(2).unwrap();
        let err = perturb_to_generating_tuple(&a2, &HermitianTuple::zero(2, 1), 0.1).unwrap_err();
        assert_eq!(err, Error::NeedTwoEntries);
        let comm = BlockAlgebra::new(vec![1, 1, 1]).unwrap();
        let out = perturb_to_generating_tuple(&comm, &HermitianTuple::zero(3, 1), 0.1).unwrap();
        assert_eq!(generated_algebra(&out).unwrap().dimension(), 3);
    }

    #[test]
    fn direct_sum_examples() {
        let out =
            combine_direct_sum_generators(&canonical_pair(2).unwrap(), &canonical_pair(3).unwrap(), 0.01)
                .unwrap();
        assert_eq!(generated_algebra(&out).unwrap().dimension(), 13);

        let t = canonical_pair(2).unwrap();
        let naive = direct_sum_tuples(&t, &t).unwrap();
        assert_eq!(generated_algebra(&naive).unwrap().dimension(), 4);
        let fixed = combine_direct_sum_generators(&t, &t, 0.01).unwrap();
        assert_eq!(generated_algebra(&fixed).unwrap().dimension(), 8);
        assert!(fixed.distance(&naive).unwrap() < 0.01);
    }

    #[test]
    fn make_invertible_examples() {
        let m = canonical_pair(2).unwrap().entry(1).clone();
        assert_eq!(make_invertible(&m, 0.1), m);
        let out = make_invertible(&zeros(2), 0.1);
        let sv = out.singular_values();
        assert!(sv.iter().all(|s| (s - 0.05).abs() < 1e-14));
        let r1 = matrix_unit(3, 0, 1);
        let out = make_invertible(&r1, 0.1);
        assert!(crate::matrix_core::min_singular_value(&out) >= 0.05 - 1e-14);
        assert!(op_norm(&(out - r1)) <= 0.1);
    }

    #[test]
    fn recover_units_scalar_case() {
        let a = diag(&[1.0, 2.0]);
        let b = canonical_pair(2).unwrap().entry(1).clone();
        let units = recover_matrix_units(1, 2, &a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(op_norm(&(&units[i * 2 + j] - matrix_unit(2, i, j))) < 1e-10);
            }
        }
        let t = canonical_pair(3).unwrap();
        let mut b = t.entry(1).clone();
        b[(0, 2)] = c(1.0, 0.0);
        b[(2, 0)] = c(1.0, 0.0);
        let units = recover_matrix_units(1, 3, t.entry(0), &b).unwrap();
        assert!(matrix_unit_defect(&units, 3) < 1e-10);
        assert!(op_norm(&(&units[1] - matrix_unit(3, 0, 1))) < 1e-10);
    }

    #[test]
    fn recover_units_rejects_bad_inputs() {
        let b = canonical_pair(2).unwrap().entry(1).clone();
        assert!(matches!(
            recover_matrix_units(1, 2, &diag(&[1.0, 1.0]), &b),
            Err(Error::SpectraNotSeparated(_))
        ));
        assert!(matches!(
            recover_matrix_units(1, 2, &diag(&[0.0, 1.0]), &b),
            Err(Error::SpectraNotSeparated(_))
        ));
        assert!(matches!(
            recover_matrix_units(1, 2, &diag(&[1.0, 2.0]), &b.scale(-1.0)),
            Err(Error::NotPositiveInvertible { index: 0, .. })
        ));
    }

    #[test]
    fn polar_unitary_gives_absolute_value() {
        let t = random_hermitian_tuple(3, 2, 4).unwrap();
        let b = t.entry(0) * t.entry(1);
        let u = polar_unitary(&b).unwrap();
        let abs = apply_real_fn(&(b.adjoint() * &b), f64::sqrt).unwrap();
        assert!(op_norm(&(&u * &b - abs)) < 1e-8);
    }

    #[test]
    fn tensor_compress_examples() {
        let scalar = BlockAlgebra::full(1).unwrap();
        let out = tensor_compress(&scalar, 2, &HermitianTuple::zero(2, 2), 0.01).unwrap();
        assert!(is_generating(&out).unwrap());
        assert!(out.norm() < 0.01);

        let m2 = BlockAlgebra::full(2).unwrap();
        let t = random_hermitian_tuple(4, 2, 9).unwrap();
        let out = tensor_compress(&m2, 2, &t, 0.05).unwrap();
        assert!(is_generating(&out).unwrap());
        assert!(out.distance(&t).unwrap() < 0.05);

        let alg = BlockAlgebra::new(vec![2, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let entries: Vec<CMatrix> = (0..2)
            .map(|_| {
                let mut m = zeros(6);
                for p in 0..2 {
                    for q in p..2 {
                        let e = alg.random_hermitian(&mut rng);
                        set_entry(&mut m, 3, p, q, &e);
                        set_entry(&mut m, 3, q, p, &e.adjoint());
                    }
                }
                m
            })
            .collect();
        let t = HermitianTuple::new(entries).unwrap();
        let out = tensor_compress(&alg, 2, &t, 0.05).unwrap();
        let span = generated_algebra(&out).unwrap();
        assert_eq!(span.dimension(), 20);
        assert!(span.basis().iter().all(|m| alg.tensor_contains(2, m)));
        assert!(out.distance(&t).unwrap() < 0.05);
    }
}
