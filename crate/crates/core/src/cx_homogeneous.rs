//! Tuples of matrix-valued functions on a finite set of points, i.e. elements
//! of `C(X, M_n) = M_n + ... + M_n` for finite `X`.
//!
//! A tuple generates iff it generates `M_n` at every point and no two points
//! carry unitarily equivalent tuples. Equivalence is decided by comparing
//! traces of words.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generation::is_generating;
use crate::matrix_core::{
    c, direct_sum_tuples, identity, op_norm, tuple_from_json, tuple_to_json, vectorize,
    CMatrix, HermitianTuple,
};

/// Relative tolerance for trace comparisons, per unit of `n`.
pub const ORBIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    labels: Vec<String>,
    n: usize,
    k: usize,
    values: Vec<HermitianTuple>,
}

impl MatrixField {
    pub fn new(points: Vec<(String, HermitianTuple)>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("a field needs at least one point".into()))?;
        let (n, k) = (first.1.n(), first.1.k());
        let mut labels = Vec::with_capacity(points.len());
        let mut values = Vec::with_capacity(points.len());
        for (label, t) in points {
            if t.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    rows: t.n(),
                    cols: t.n(),
                });
            }
            if t.k() != k {
                return Err(Error::LengthMismatch {
                    left: k,
                    right: t.k(),
                });
            }
            if labels.contains(&label) {
                return Err(Error::InvalidArgument(format!("duplicate point label `{label}`")));
            }
            labels.push(label);
            values.push(t);
        }
        Ok(Self { labels, n, k, values })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[HermitianTuple] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The field as one block-diagonal tuple in `M_{|X| n}`.
    pub fn direct_sum(&self) -> Result<HermitianTuple> {
        let mut acc = self.values[0].clone();
        for t in &self.values[1..] {
            acc = direct_sum_tuples(&acc, t)?;
        }
        Ok(acc)
    }

    /// `{"points": [...], "n", "k", "values": {label: tuple}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let values: serde_json::Map<String, serde_json::Value> = self
            .labels
            .iter()
            .zip(&self.values)
            .map(|(l, t)| (l.clone(), tuple_to_json(t)))
            .collect();
        serde_json::json!({
            "points": self.labels,
            "n": self.n,
            "k": self.k,
            "values": values,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let labels: Vec<String> = serde_json::from_value(value["points"].clone())
            .map_err(|e| Error::InvalidJson(format!("points: {e}")))?;
        let values = value["values"]
            .as_object()
            .ok_or_else(|| Error::InvalidJson("`values` must be an object".into()))?;
        let mut points = Vec::with_capacity(labels.len());
        for label in labels {
            let t = values
                .get(&label)
                .ok_or_else(|| Error::InvalidJson(format!("no value for point `{label}`")))?;
            points.push((label, tuple_from_json(t)?));
        }
        let field = Self::new(points)?;
        for (key, want) in [("n", field.n), ("k", field.k)] {
            if let Some(v) = value.get(key) {
                if v.as_u64() != Some(want as u64) {
                    return Err(Error::InvalidJson(format!("declared {key} = {v} but fibers have {want}")));
                }
            }
        }
        Ok(field)
    }
}

/// Traces of all words of length `1..=max_len` in shortlex order.
pub fn word_trace_invariant(t: &HermitianTuple, max_len: usize) -> Vec<Complex64> {
    let mut out = Vec::new();
    let mut level = vec![identity(t.n())];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * t.k());
        for m in &level {
            for g in t.entries() {
                let w = m * g;
                out.push(w.trace());
                next.push(w);
            }
        }
        level = next;
    }
    out
}

/// Sufficient word length for deciding unitary equivalence of `n x n` tuples.
pub fn orbit_word_length(n: usize) -> usize {
    2 * n * n
}

/// Whether `t2 = u t1 u*` for some unitary `u`, judged by traces of words of
/// length at most `max_len`.
///
/// Instead of enumerating all `k^L` words, words are grown breadth first in
/// `t1 + t2` and only those independent of the earlier ones are kept; the
/// traces agree on every word iff they agree on this basis. Inputs are
/// scaled jointly to unit norm and each kept word is normalised before its
/// traces are compared.
pub fn same_unitary_orbit(t1: &HermitianTuple, t2: &HermitianTuple, max_len: usize) -> Result<bool> {
    if t1.n() != t2.n() {
        return Ok(false);
    }
    let s = direct_sum_tuples(t1, t2)?;
    let n = t1.n();
    let scale = s.norm();
    if scale == 0.0 {
        return Ok(true);
    }
    let s = s.scale(1.0 / scale);
    let tol = ORBIT_TOL * n as f64;
    let big = 2 * n;
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    let mut frontier: Vec<CMatrix> = vec![identity(big)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for m in &frontier {
            for g in s.entries() {
                let w = m * g;
                let norm = w.norm();
                if norm < 1e-12 {
                    continue;
                }
                let w = w.unscale(norm);
                let mut v = vectorize(&w);
                for _ in 0..2 {
                    for b in &basis {
                        let proj = b.dotc(&v);
                        v -= b * proj;
                    }
                }
                let residual = v.norm();
                if residual <= 1e-8 {
                    continue;
                }
                let top = w.view((0, 0), (n, n)).trace();
                let bottom = w.view((n, n), (n, n)).trace();
                if (top - bottom).norm() > tol {
                    return Ok(false);
                }
                basis.push(v.unscale(residual));
                next.push(w);
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(true)
}

/// A unitary `u` with `u t1 u* = t2`, from the null space of the intertwiner
/// equations `X a_i = b_i X`. Meaningful for generating `t1`, where the null
/// space is one-dimensional.
pub fn conjugating_unitary(t1: &HermitianTuple, t2: &HermitianTuple) -> Result<Option<CMatrix>> {
    t1.check_compatible(t2)?;
    let n = t1.n();
    let id = identity(n);
    let mut gram = DMatrix::<Complex64>::zeros(n * n, n * n);
    for (a, b) in t1.entries().iter().zip(t2.entries()) {
        let l = a.transpose().kronecker(&id) - id.kronecker(b);
        gram += l.adjoint() * &l;
    }
    let reference = t1.norm().max(t2.norm()).max(1e-300).powi(2);
    let eig = SymmetricEigen::new(gram);
    let (idx, lowest) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty spectrum");
    if *lowest > 1e-10 * reference {
        return Ok(None);
    }
    let v = eig.eigenvectors.column(idx).into_owned();
    let x = CMatrix::from_column_slice(n, n, v.as_slice());
    let svd = x.svd(true, true);
    let u = svd.u.expect("left factor") * svd.v_t.expect("right factor");
    let err = t1
        .entries()
        .iter()
        .zip(t2.entries())
        .map(|(a, b)| op_norm(&(&u * a * u.adjoint() - b)))
        .fold(0.0, f64::max);
    Ok((err <= 1e-6 * reference.sqrt().max(1.0)).then_some(u))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldDiagnostic {
    /// The tuple at `point` does not generate `M_n`.
    PointwiseFailure { point: String },
    /// The tuples at two points are unitarily equivalent (equal for `n = 1`).
    NotSeparated { first: String, second: String },
    /// `n = 1`: the tuple vanishes at `point`.
    ZeroFiber { point: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldVerdict {
    pub generating: bool,
    pub diagnostic: Option<FieldDiagnostic>,
    /// Word length used for the orbit comparisons.
    pub word_length: usize,
}

/// Generation test for a field over a finite point set.
pub fn is_generating_field(f: &MatrixField) -> Result<FieldVerdict> {
    let n = f.n();
    let word_length = orbit_word_length(n);
    let verdict = |diagnostic: Option<FieldDiagnostic>| FieldVerdict {
        generating: diagnostic.is_none(),
        diagnostic,
        word_length,
    };
    if n == 1 {
        let vectors: Vec<Vec<f64>> = f
            .values()
            .iter()
            .map(|t| t.entries().iter().map(|m| m[(0, 0)].re).collect())
            .collect();
        let scale = vectors
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
            .max(1e-300);
        let tol = ORBIT_TOL * scale;
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        for (i, v) in vectors.iter().enumerate() {
            if v.iter().all(|x| x.abs() <= tol) {
                return Ok(verdict(Some(FieldDiagnostic::ZeroFiber {
                    point: f.labels()[i].clone(),
                })));
            }
        }
        for i in 0..vectors.len() {
            for j in i + 1..vectors.len() {
                if dist(&vectors[i], &vectors[j]) <= tol {
                    return Ok(verdict(Some(FieldDiagnostic::NotSeparated {
                        first: f.labels()[i].clone(),
                        second: f.labels()[j].clone(),
                    })));
                }
            }
        }
        return Ok(verdict(None));
    }
    for (label, t) in f.labels().iter().zip(f.values()) {
        if !is_generating(t)? {
            return Ok(verdict(Some(FieldDiagnostic::PointwiseFailure {
                point: label.clone(),
            })));
        }
    }
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            if same_unitary_orbit(&f.values()[i], &f.values()[j], word_length)? {
                return Ok(verdict(Some(FieldDiagnostic::NotSeparated {
                    first: f.labels()[i].clone(),
                    second: f.labels()[j].clone(),
                })));
            }
        }
    }
    Ok(verdict(None))
}

/// Shifts every entry of `t` by `shift * I`.
pub fn shifted(t: &HermitianTuple, shift: f64) -> Result<HermitianTuple> {
    let n = t.n();
    HermitianTuple::new(
        t.entries()
            .iter()
            .map(|m| m + identity(n).map(|z| z * c(shift, 0.0)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::canonical_pair;
    use crate::matrix_core::{diag, random_hermitian_tuple, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field(points: Vec<HermitianTuple>) -> MatrixField {
        MatrixField::new(
            points
                .into_iter()
                .enumerate()
                .map(|(i, t)| (format!("x{i}"), t))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn traces_are_conjugation_invariant() {
        let t = random_hermitian_tuple(3, 2, 2).unwrap();
        let u = random_unitary(3, &mut ChaCha8Rng::seed_from_u64(8));
        let a = word_trace_invariant(&t, 4);
        let b = word_trace_invariant(&t.conjugate_by(&u), 4);
        assert_eq!(a.len(), 2 + 4 + 8 + 16);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-10));
    }

    #[test]
    fn power_sums_of_diagonal() {
        let t = HermitianTuple::new(vec![diag(&[1.0, 2.0])]).unwrap();
        let v = word_trace_invariant(&t, 3);
        assert_eq!(v, vec![c(3.0, 0.0), c(5.0, 0.0), c(9.0, 0.0)]);
    }

    #[test]
    fn sign_flip_of_tridiagonal_entry_is_a_conjugation() {
        let t = canonical_pair(2).unwrap();
        let flipped = t.with_entry(1, -t.entry(1)).unwrap();
        assert!(same_unitary_orbit(&t, &flipped, orbit_word_length(2)).unwrap());
        let u = conjugating_unitary(&t, &flipped).unwrap().unwrap();
        assert!(op_norm(&(&u * t.entry(1) * u.adjoint() + t.entry(1))) < 1e-8);
    }

    #[test]
    fn orbit_examples() {
        let t = random_hermitian_tuple(3, 2, 1).unwrap();
        let u = random_unitary(3, &mut ChaCha8Rng::seed_from_u64(4));
        assert!(same_unitary_orbit(&t, &t.conjugate_by(&u), 18).unwrap());
        let c2 = canonical_pair(2).unwrap();
        assert!(!same_unitary_orbit(&c2, &HermitianTuple::zero(2, 2), 8).unwrap());
        for seed in 0..10 {
            let a = random_hermitian_tuple(3, 2, 100 + seed).unwrap();
            let b = random_hermitian_tuple(3, 2, 200 + seed).unwrap();
            assert!(!same_unitary_orbit(&a, &b, 18).unwrap());
        }
    }

    #[test]
    fn recovers_conjugating_unitary() {
        let t = random_hermitian_tuple(3, 2, 6).unwrap();
        let u = random_unitary(3, &mut ChaCha8Rng::seed_from_u64(5));
        let t2 = t.conjugate_by(&u);
        let w = conjugating_unitary(&t, &t2).unwrap().unwrap();
        assert!(t.conjugate_by(&w).distance(&t2).unwrap() < 1e-8);
        let other = random_hermitian_tuple(3, 2, 7).unwrap();
        assert!(conjugating_unitary(&t, &other).unwrap().is_none());
    }

    #[test]
    fn field_examples() {
        let c2 = canonical_pair(2).unwrap();
        let same = is_generating_field(&field(vec![c2.clone(), c2.clone()])).unwrap();
        assert!(!same.generating);
        assert!(matches!(same.diagnostic, Some(FieldDiagnostic::NotSeparated { .. })));

        let bad = is_generating_field(&field(vec![HermitianTuple::zero(2, 2)])).unwrap();
        assert!(matches!(bad.diagnostic, Some(FieldDiagnostic::PointwiseFailure { ref point }) if point == "x0"));

        let good = is_generating_field(&field(vec![c2.clone(), shifted(&c2, 1.0).unwrap()])).unwrap();
        assert!(good.generating);
        assert_eq!(good.word_length, 8);
    }

    #[test]
    fn scalar_fields_use_point_separation() {
        let s = |v: f64| HermitianTuple::new(vec![diag(&[v])]).unwrap();
        assert!(is_generating_field(&field(vec![s(1.0), s(2.0)])).unwrap().generating);
        let z = is_generating_field(&field(vec![s(0.0), s(2.0)])).unwrap();
        assert!(matches!(z.diagnostic, Some(FieldDiagnostic::ZeroFiber { .. })));
        let d = is_generating_field(&field(vec![s(2.0), s(2.0)])).unwrap();
        assert!(matches!(d.diagnostic, Some(FieldDiagnostic::NotSeparated { .. })));
    }

    #[test]
    fn field_json_round_trip() {
        let f = field(vec![canonical_pair(2).unwrap(), random_hermitian_tuple(2, 2, 3).unwrap()]);
        let v = f.to_json();
        assert_eq!(v["points"][1], "x1");
        assert_eq!(MatrixField::from_json(&v).unwrap(), f);
        let mut broken = v.clone();
        broken["points"] = serde_json::json!(["x0", "nowhere"]);
        assert!(matches!(MatrixField::from_json(&broken), Err(Error::InvalidJson(_))));
    }
}
