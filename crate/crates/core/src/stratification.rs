//! Orbit-type strata of `k`-tuples in `M_n`: enumeration, dimension bounds,
//! the codimension of the non-generating set, and Monte Carlo density checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generation::{generated_algebra, OrbitType, SubalgebraSpan, DEFAULT_RANK_CUT};
use crate::matrix_core::{
    block_diag, matrix_unit, random_hermitian, random_unitary, zeros, CMatrix, HermitianTuple,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumReport {
    pub omega: OrbitType,
    /// `n^2 + (k - 1) sum d_i^2`.
    pub preimage_dim_bound: usize,
    /// `n^2 - sum d_i^2`.
    pub orbit_dim_bound: usize,
    pub is_full: bool,
}

/// Every orbit type of a nonzero subalgebra of `M_n`: multisets of pairs
/// `(d, m)` with `sum m d <= n`, each sorted descending.
pub fn enumerate_orbit_types(n: usize) -> Vec<OrbitType> {
    // Pairs in descending order; a multiset is a non-increasing sequence.
    let mut pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|d| (1..=n / d).map(move |m| (d, m)))
        .collect();
    pairs.sort_by(|a, b| b.cmp(a));
    let mut out = Vec::new();
    let mut current = Vec::new();
    extend_types(&pairs, 0, n, &mut current, &mut out);
    out.sort();
    out
}

fn extend_types(
    pairs: &[(usize, usize)],
    start: usize,
    room: usize,
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<OrbitType>,
) {
    for (idx, &(d, m)) in pairs.iter().enumerate().skip(start) {
        if d * m > room {
            continue;
        }
        current.push((d, m));
        out.push(OrbitType::new(current.clone()));
        extend_types(pairs, idx, room - d * m, current, out);
        current.pop();
    }
}

fn check_omega(n: usize, omega: &OrbitType) -> Result<()> {
    if omega.is_empty() || !omega.is_valid_for(n) {
        return Err(Error::InvalidOmega {
            omega: omega.to_string(),
            n,
        });
    }
    Ok(())
}

pub fn stratum_dimensions(n: usize, k: usize, omega: &OrbitType) -> Result<StratumReport> {
    check_omega(n, omega)?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("strata need k >= 2, got {k}")));
    }
    let sum_sq = omega.intrinsic_dimension();
    Ok(StratumReport {
        omega: omega.clone(),
        preimage_dim_bound: n * n + (k - 1) * sum_sq,
        orbit_dim_bound: n * n - sum_sq,
        is_full: *omega == OrbitType::full(n),
    })
}

/// Reports for every orbit type, ordered by decreasing preimage bound.
pub fn all_strata(n: usize, k: usize) -> Result<Vec<StratumReport>> {
    let mut reports = enumerate_orbit_types(n)
        .iter()
        .map(|w| stratum_dimensions(n, k, w))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| {
        b.preimage_dim_bound
            .cmp(&a.preimage_dim_bound)
            .then_with(|| b.omega.cmp(&a.omega))
    });
    Ok(reports)
}

fn check_sizes(n: usize, k: usize) -> Result<()> {
    if n < 2 || k < 2 {
        return Err(Error::InvalidSize(format!("need n >= 2 and k >= 2, got n={n}, k={k}")));
    }
    Ok(())
}

/// Real dimension `k n^2 - (k - 1)(2n - 2)` of the non-generating tuples,
/// cross-checked against the largest preimage bound of a proper stratum.
pub fn complement_dimension(n: usize, k: usize) -> Result<usize> {
    check_sizes(n, k)?;
    let formula = k * n * n - (k - 1) * (2 * n - 2);
    let enumerated = enumerate_orbit_types(n)
        .iter()
        .filter(|w| **w != OrbitType::full(n))
        .map(|w| stratum_dimensions(n, k, w).map(|r| r.preimage_dim_bound))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    if enumerated != formula {
        return Err(Error::FormulaMismatch {
            n,
            k,
            formula,
            enumerated,
        });
    }
    Ok(formula)
}

/// `(k - 1)(2n - 2)`: parameter spaces of smaller dimension admit densely
/// many pointwise generating families of `k`-tuples.
pub fn density_threshold(n: usize, k: usize) -> Result<usize> {
    check_sizes(n, k)?;
    Ok((k - 1) * (2 * n - 2))
}

/// Block-diagonal representative of `omega`: each `d_i` block repeated
/// `m_i` times, zero corner padding the rest.
pub fn canonical_subalgebra(n: usize, omega: &OrbitType) -> Result<SubalgebraSpan> {
    check_omega(n, omega)?;
    let mut spanning = Vec::new();
    let mut offset = 0;
    for &(d, m) in omega.summands() {
        for s in 0..d {
            for t in 0..d {
                let mut e = zeros(n);
                for copy in 0..m {
                    let o = offset + copy * d;
                    e += matrix_unit(n, o + s, o + t);
                }
                spanning.push(e);
            }
        }
        offset += d * m;
    }
    SubalgebraSpan::from_spanning_set(n, &spanning, DEFAULT_RANK_CUT)
}

/// A random `k`-tuple generating a conjugate of the canonical subalgebra of
/// type `omega`: independent random tuples per summand, repeated along the
/// diagonal, then a random unitary conjugation.
pub fn sample_stratum_tuple(n: usize, k: usize, omega: &OrbitType, seed: u64) -> Result<HermitianTuple> {
    check_omega(n, omega)?;
    if k == 0 {
        return Err(Error::EmptyTuple);
    }
    if k < 2 && omega.summands().iter().any(|&(d, _)| d > 1) {
        return Err(Error::NeedTwoEntries);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries: Vec<Vec<CMatrix>> = vec![Vec::new(); k];
    for &(d, m) in omega.summands() {
        for entry in entries.iter_mut() {
            let x = random_hermitian(d, &mut rng);
            entry.extend(std::iter::repeat_n(x, m));
        }
    }
    let pad = n - omega.occupied_size();
    let u = random_unitary(n, &mut rng);
    let entries = entries
        .into_iter()
        .map(|mut blocks| {
            if pad > 0 {
                blocks.push(zeros(pad));
            }
            let m = block_diag(&blocks.iter().collect::<Vec<_>>());
            &u * m * u.adjoint()
        })
        .collect();
    HermitianTuple::new(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    pub generating: usize,
    pub non_generating: usize,
    /// Draws where the closure hit a near-cut singular value; excluded from
    /// the rate.
    pub ambiguous: usize,
    /// `generating / (samples - ambiguous)`.
    pub rate: f64,
}

/// Seed of the `index`-th draw; a splitmix64 step keeps neighbouring seeds
/// unrelated.
pub fn sample_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

enum Draw {
    Generating,
    NonGenerating,
    Ambiguous,
}

/// Fraction of random Hermitian `k`-tuples that generate `M_n`. Draw `i`
/// uses `random_hermitian_tuple(n, k, sample_seed(seed, i))`, so runs with
/// larger `k` extend the same tuples.
pub fn mc_generation_rate(n: usize, k: usize, samples: usize, seed: u64) -> Result<MonteCarloReport> {
    if n == 0 || k == 0 || samples == 0 {
        return Err(Error::InvalidSize(format!(
            "need n, k, samples >= 1, got n={n}, k={k}, samples={samples}"
        )));
    }
    let draws: Vec<Draw> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let t = crate::matrix_core::random_hermitian_tuple(n, k, sample_seed(seed, i))?;
            Ok(match generated_algebra(&t) {
                Ok(s) if s.is_full() => Draw::Generating,
                Ok(_) => Draw::NonGenerating,
                Err(Error::ToleranceAmbiguity { .. }) => Draw::Ambiguous,
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<_>>()?;
    let count = |f: fn(&Draw) -> bool| draws.iter().filter(|d| f(d)).count();
    let generating = count(|d| matches!(d, Draw::Generating));
    let non_generating = count(|d| matches!(d, Draw::NonGenerating));
    let ambiguous = count(|d| matches!(d, Draw::Ambiguous));
    let decided = generating + non_generating;
    Ok(MonteCarloReport {
        n,
        k,
        samples,
        seed,
        generating,
        non_generating,
        ambiguous,
        rate: if decided == 0 {
            0.0
        } else {
            generating as f64 / decided as f64
        },
    })
}

/// Aligned text table of strata.
pub fn format_strata(reports: &[StratumReport]) -> String {
    let rows: Vec<[String; 4]> = reports
        .iter()
        .map(|r| {
            [
                r.omega.to_string(),
                r.preimage_dim_bound.to_string(),
                r.orbit_dim_bound.to_string(),
                if r.is_full { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    let header = ["omega", "preimage_dim", "orbit_dim", "full"].map(String::from);
    let widths: Vec<usize> = (0..4)
        .map(|i| rows.iter().chain([&header]).map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    let line = |r: &[String; 4]| {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        cells.join("  ")
    };
    let mut out = line(&header);
    for r in &rows {
        out.push('\n');
        out.push_str(&line(r));
    }
    out
}
