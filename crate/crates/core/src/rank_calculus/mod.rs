//! Rule engine for generator-rank and real-rank bounds of C*-algebras given
//! by structural descriptions.
//!
//! Every node evaluates to an interval in `N u {inf}` and appends one trace
//! step naming the rule that produced it. Children are evaluated first, so
//! the trace reads bottom-up.

mod dsl;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use dsl::parse;

/// A natural number or infinity. Infinity absorbs under `+`, `max` and
/// ceiling division.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);
    pub const ONE: ExtNat = ExtNat::Fin(1);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Fin(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtNat::Fin(v) => Some(v),
            ExtNat::Inf => None,
        }
    }

    pub fn add(self, other: ExtNat) -> ExtNat {
        match (self, other) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => ExtNat::Fin(a + b),
            _ => ExtNat::Inf,
        }
    }

    /// `self - v`, saturating at zero.
    pub fn saturating_sub(self, v: u64) -> ExtNat {
        match self {
            ExtNat::Fin(a) => ExtNat::Fin(a.saturating_sub(v)),
            ExtNat::Inf => ExtNat::Inf,
        }
    }

    pub fn times(self, v: u64) -> ExtNat {
        match self {
            ExtNat::Fin(a) => ExtNat::Fin(a * v),
            ExtNat::Inf if v == 0 => ExtNat::ZERO,
            ExtNat::Inf => ExtNat::Inf,
        }
    }

    /// `ceil(self / d)` for `d > 0`.
    pub fn ceil_div(self, d: u64) -> ExtNat {
        match self {
            ExtNat::Fin(a) => ExtNat::Fin(a.div_ceil(d)),
            ExtNat::Inf => ExtNat::Inf,
        }
    }
}

impl From<u64> for ExtNat {
    fn from(v: u64) -> Self {
        ExtNat::Fin(v)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(v) => write!(f, "{v}"),
            ExtNat::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtNat::Fin(v) => s.serialize_u64(*v),
            ExtNat::Inf => s.serialize_str("inf"),
        }
    }
}

/// Dimension type of a compact space `X`: `dim(X x X)` is `2 dim X` (basic)
/// or `2 dim X - 1` (exceptional).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceType {
    Basic,
    Exceptional,
    Unknown,
}

impl fmt::Display for SpaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceType::Basic => "basic",
            SpaceType::Exceptional => "exceptional",
            SpaceType::Unknown => "unknown",
        })
    }
}

/// Structural description of a C*-algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgDesc {
    /// `C(X)` or `C_0(X)` with `dim X = dim`.
    Commutative { dim: ExtNat, space: SpaceType },
    Matrix(usize),
    FiniteDim(Vec<usize>),
    /// `n`-homogeneous with `dim Prim = dim`.
    Homogeneous { n: usize, dim: ExtNat },
    DirectSum(Vec<AlgDesc>),
    Extension {
        ideal: Box<AlgDesc>,
        quotient: Box<AlgDesc>,
    },
    TensorMn {
        child: Box<AlgDesc>,
        n: usize,
        rr0: bool,
        sr1: bool,
        unital: bool,
    },
    /// Inductive limit of the listed algebras. Without `repeats` the last
    /// entry stands for the eventual tail; with it the list repeats forever.
    InductiveLimit { children: Vec<AlgDesc>, repeats: bool },
    Af,
    UhfAbsorbingRr0(Box<AlgDesc>),
    AhSimpleSlowGrowth,
    Ideal(Box<AlgDesc>),
    Quotient(Box<AlgDesc>),
}

impl AlgDesc {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedDescription(m));
        match self {
            AlgDesc::Matrix(0) => bad("matrix size must be positive".into()),
            AlgDesc::FiniteDim(ds) if ds.is_empty() || ds.contains(&0) => {
                bad(format!("finite-dimensional block sizes must be positive, got {ds:?}"))
            }
            AlgDesc::Homogeneous { n, .. } if *n < 2 => {
                bad(format!("homogeneous algebras need n >= 2, got {n}"))
            }
            AlgDesc::TensorMn { n: 0, .. } => bad("tensor factor size must be positive".into()),
            AlgDesc::DirectSum(cs) | AlgDesc::InductiveLimit { children: cs, .. }
                if cs.is_empty() =>
            {
                bad("empty child list".into())
            }
            AlgDesc::DirectSum(cs) | AlgDesc::InductiveLimit { children: cs, .. } => {
                cs.iter().try_for_each(AlgDesc::validate)
            }
            AlgDesc::Extension { ideal, quotient } => {
                ideal.validate()?;
                quotient.validate()
            }
            AlgDesc::TensorMn { child, .. }
            | AlgDesc::UhfAbsorbingRr0(child)
            | AlgDesc::Ideal(child)
            | AlgDesc::Quotient(child) => child.validate(),
            _ => Ok(()),
        }
    }

    /// Summands of nested direct sums, flattened.
    fn flattened_summands(&self) -> Vec<&AlgDesc> {
        match self {
            AlgDesc::DirectSum(cs) => cs.iter().flat_map(|c| c.flattened_summands()).collect(),
            other => vec![other],
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self {
            AlgDesc::Commutative { .. } | AlgDesc::Matrix(_) | AlgDesc::Homogeneous { .. } => true,
            AlgDesc::FiniteDim(ds) => ds.iter().all(|d| *d == ds[0]),
            _ => false,
        }
    }

    pub fn is_real_rank_zero(&self) -> bool {
        match self {
            AlgDesc::Matrix(_)
            | AlgDesc::FiniteDim(_)
            | AlgDesc::Af
            | AlgDesc::UhfAbsorbingRr0(_) => true,
            AlgDesc::Commutative { dim, .. } | AlgDesc::Homogeneous { dim, .. } => {
                *dim == ExtNat::ZERO
            }
            AlgDesc::TensorMn { rr0, .. } => *rr0,
            _ => false,
        }
    }

    pub fn is_commutative(&self) -> bool {
        match self {
            AlgDesc::Commutative { .. } | AlgDesc::Matrix(1) => true,
            AlgDesc::FiniteDim(ds) => ds.iter().all(|d| *d == 1),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: String,
    /// The result the rule rests on, stated in words.
    pub anchor: String,
    pub interval: (ExtNat, ExtNat),
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankBounds {
    pub lo: ExtNat,
    pub hi: ExtNat,
    pub trace: Vec<TraceStep>,
}

impl RankBounds {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("bounds serialise")
    }
}

pub const CONJECTURAL: &str = "CONJECTURAL";

const ANCHOR_COMMUTATIVE: &str = "gr(C(X)) = dim(X x X); gr = 0 iff the spectrum is zero-dimensional";
const ANCHOR_MATRIX: &str = "gr(M_n) = 1 for n >= 2; finite-dimensional algebras have gr <= 1";
const ANCHOR_HOMOGENEOUS: &str = "gr(A) = ceil((dim X + 1)/(2n - 2)) for n-homogeneous A with spectrum X";
const ANCHOR_SUM_MAX: &str = "gr of a direct sum is the maximum for homogeneous, real rank zero or commutative summands";
const ANCHOR_SUM_LOWER: &str = "gr(A/J) <= gr(A): every summand is a quotient";
const ANCHOR_EXTENSION: &str = "extension theorem: gr(A) <= gr(J) + gr(A/J) + 1, and gr(J), gr(A/J) <= gr(A)";
const ANCHOR_TENSOR: &str = "gr(A (x) M_n) <= ceil(gr(A)/n^2) for unital A with real rank zero and stable rank one; ceil((gr(A)+1)/n^2) - 1 <= gr(A (x) M_n)";
const ANCHOR_LIMIT: &str = "gr(lim A_k) <= liminf gr(A_k)";
const ANCHOR_AF: &str = "AF-algebras have gr <= 1";
const ANCHOR_UHF: &str = "real rank zero algebras absorbing a UHF-algebra have gr <= 1";
const ANCHOR_AH: &str = "simple AH-algebras with slow dimension growth have gr <= 1";
const ANCHOR_IDEAL: &str = "gr(J) <= gr(A) for ideals, gr(A/J) <= gr(A) for quotients";

struct Tracer {
    steps: Vec<TraceStep>,
}

impl Tracer {
    fn push(&mut self, rule: &str, anchor: &str, lo: ExtNat, hi: ExtNat, note: impl Into<String>) -> (ExtNat, ExtNat) {
        self.steps.push(TraceStep {
            rule: rule.to_string(),
            anchor: anchor.to_string(),
            interval: (lo, hi),
            note: note.into(),
        });
        (lo, hi)
    }
}

/// Interval for `gr(a)` with the derivation trace.
pub fn generator_rank_bounds(a: &AlgDesc) -> Result<RankBounds> {
    a.validate()?;
    let mut tracer = Tracer { steps: Vec::new() };
    let (lo, hi) = gr_node(a, &mut tracer);
    Ok(RankBounds {
        lo,
        hi,
        trace: tracer.steps,
    })
}

fn commutative_gr(dim: ExtNat, space: SpaceType, t: &mut Tracer) -> (ExtNat, ExtNat) {
    match dim {
        ExtNat::Inf => t.push("R1", ANCHOR_COMMUTATIVE, ExtNat::Inf, ExtNat::Inf, ""),
        ExtNat::Fin(0) => t.push("R1", ANCHOR_COMMUTATIVE, ExtNat::ZERO, ExtNat::ZERO, "zero-dimensional spectrum"),
        ExtNat::Fin(d) if d <= 1 || space == SpaceType::Basic => {
            let note = if space == SpaceType::Exceptional {
                "dim X <= 1 forces basic type"
            } else {
                ""
            };
            let v = ExtNat::Fin(2 * d);
            t.push("R1", ANCHOR_COMMUTATIVE, v, v, note)
        }
        ExtNat::Fin(d) if space == SpaceType::Exceptional => {
            let v = ExtNat::Fin(2 * d - 1);
            t.push("R1", ANCHOR_COMMUTATIVE, v, v, "exceptional type")
        }
        ExtNat::Fin(d) => t.push(
            "R1",
            ANCHOR_COMMUTATIVE,
            ExtNat::Fin(2 * d - 1),
            ExtNat::Fin(2 * d),
            "type of X unknown",
        ),
    }
}

fn gr_node(a: &AlgDesc, t: &mut Tracer) -> (ExtNat, ExtNat) {
    match a {
        AlgDesc::Commutative { dim, space } => commutative_gr(*dim, *space, t),
        AlgDesc::Matrix(1) => t.push("R2", ANCHOR_MATRIX, ExtNat::ZERO, ExtNat::ZERO, "M_1 is commutative with a one-point spectrum"),
        AlgDesc::Matrix(_) => t.push("R2", ANCHOR_MATRIX, ExtNat::ONE, ExtNat::ONE, ""),
        AlgDesc::FiniteDim(ds) if ds.iter().all(|d| *d == 1) => {
            t.push("R2", ANCHOR_MATRIX, ExtNat::ZERO, ExtNat::ZERO, "commutative with finite spectrum")
        }
        AlgDesc::FiniteDim(_) => {
            t.push("R2", ANCHOR_MATRIX, ExtNat::ONE, ExtNat::ONE, "a matrix block quotient forces gr >= 1")
        }
        AlgDesc::Homogeneous { n, dim } => {
            let v = dim.add(ExtNat::ONE).ceil_div(2 * *n as u64 - 2);
            t.push("R3", ANCHOR_HOMOGENEOUS, v, v, "")
        }
        AlgDesc::DirectSum(_) => {
            let summands = a.flattened_summands();
            let bounds: Vec<(ExtNat, ExtNat)> = summands.iter().map(|c| gr_node(c, t)).collect();
            let lo = bounds.iter().map(|b| b.0).max().unwrap_or(ExtNat::ZERO);
            let max_hi = bounds.iter().map(|b| b.1).max().unwrap_or(ExtNat::ZERO);
            if summands.len() == 1 {
                return (lo, max_hi);
            }
            let flag = if summands.iter().all(|c| c.is_homogeneous()) {
                Some("all summands homogeneous")
            } else if summands.iter().all(|c| c.is_real_rank_zero()) {
                Some("all summands have real rank zero")
            } else if summands.iter().all(|c| c.is_commutative()) {
                Some("all summands commutative")
            } else {
                None
            };
            match flag {
                Some(why) => t.push("R4", ANCHOR_SUM_MAX, lo, max_hi, why),
                None => {
                    let hi = bounds
                        .iter()
                        .fold(ExtNat::ZERO, |acc, b| acc.add(b.1))
                        .add(ExtNat::Fin(summands.len() as u64 - 1));
                    t.push(
                        "R4",
                        ANCHOR_SUM_LOWER,
                        lo,
                        hi,
                        format!(
                            "{CONJECTURAL}: upper bound from iterated extensions; equality with the maximum of the summands is conjectured but unproven"
                        ),
                    )
                }
            }
        }
        AlgDesc::Extension { ideal, quotient } => {
            let j = gr_node(ideal, t);
            let q = gr_node(quotient, t);
            t.push("R5", ANCHOR_EXTENSION, j.0.max(q.0), j.1.add(q.1).add(ExtNat::ONE), "")
        }
        AlgDesc::TensorMn {
            child,
            n,
            rr0,
            sr1,
            unital,
        } => {
            let (clo, chi) = gr_node(child, t);
            let n = *n as u64;
            if n == 1 {
                return t.push("R6", ANCHOR_TENSOR, clo, chi, "tensoring with M_1 changes nothing");
            }
            let sq = n * n;
            let lo = clo.add(ExtNat::ONE).ceil_div(sq).saturating_sub(1).max(ExtNat::ONE);
            if *rr0 && *sr1 && *unital {
                let hi = chi.ceil_div(sq).max(ExtNat::ONE);
                t.push("R6", ANCHOR_TENSOR, lo, hi, "lower bound floored at 1: A (x) M_n has a matrix quotient")
            } else {
                t.push(
                    "R6",
                    ANCHOR_TENSOR,
                    lo,
                    ExtNat::Inf,
                    "no upper bound without real rank zero, stable rank one and a unit",
                )
            }
        }
        AlgDesc::InductiveLimit { children, repeats } => {
            let his: Vec<ExtNat> = children.iter().map(|c| gr_node(c, t).1).collect();
            let (hi, note) = if *repeats {
                (*his.iter().min().expect("validated non-empty"), "pattern repeats: liminf is the minimum")
            } else {
                (*his.last().expect("validated non-empty"), "last entry stands for the tail")
            };
            t.push("R7", ANCHOR_LIMIT, ExtNat::ZERO, hi, note)
        }
        AlgDesc::Af => t.push("R8", ANCHOR_AF, ExtNat::ZERO, ExtNat::ONE, ""),
        AlgDesc::UhfAbsorbingRr0(child) => {
            let (clo, chi) = gr_node(child, t);
            t.push("R8", ANCHOR_UHF, clo.min(ExtNat::ONE), chi.min(ExtNat::ONE), "")
        }
        AlgDesc::AhSimpleSlowGrowth => t.push("R8", ANCHOR_AH, ExtNat::ZERO, ExtNat::ONE, ""),
        AlgDesc::Ideal(parent) | AlgDesc::Quotient(parent) => {
            let (_, hi) = gr_node(parent, t);
            t.push("R9", ANCHOR_IDEAL, ExtNat::ZERO, hi, "")
        }
    }
}

const ANCHOR_RR_COMMUTATIVE: &str = "rr(C(X)) = dim X";
const ANCHOR_RR_HOMOGENEOUS: &str = "rr(C([0,1]^d, M_n)) = ceil(d/(2n - 1))";
const ANCHOR_RR_ZERO: &str = "finite-dimensional, AF and flagged algebras have real rank zero";
const ANCHOR_RR_GR: &str = "rr(A) <= gr(A)";

/// Interval for the real rank. Outside the anchored formulas only the bound
/// `rr <= gr` is used.
pub fn real_rank_bounds(a: &AlgDesc) -> Result<RankBounds> {
    let gr = generator_rank_bounds(a)?;
    let mut t = Tracer { steps: Vec::new() };
    let (lo, hi) = match a {
        AlgDesc::Commutative { dim, .. } => t.push("rr-commutative", ANCHOR_RR_COMMUTATIVE, *dim, *dim, ""),
        AlgDesc::Homogeneous { n, dim } => {
            let v = dim.ceil_div(2 * *n as u64 - 1);
            t.push(
                "rr-homogeneous",
                ANCHOR_RR_HOMOGENEOUS,
                v,
                v,
                "formula taken as exact for n-homogeneous algebras over a d-dimensional spectrum",
            )
        }
        other if other.is_real_rank_zero() => {
            t.push("rr-zero", ANCHOR_RR_ZERO, ExtNat::ZERO, ExtNat::ZERO, "")
        }
        _ => (ExtNat::ZERO, ExtNat::Inf),
    };
    let capped = hi.min(gr.hi);
    let (lo, hi) = t.push("rr-gr", ANCHOR_RR_GR, lo.min(capped), capped, "");
    Ok(RankBounds {
        lo,
        hi,
        trace: t.steps,
    })
}

/// Rank for non-self-adjoint generators, `ceil((gr + 1)/2)`.
pub fn gr_prime(gr: ExtNat) -> ExtNat {
    gr.add(ExtNat::ONE).ceil_div(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SquareDim {
    pub square_dim: u64,
    pub space: SpaceType,
}

fn square_dim(d: u64, space: SpaceType) -> u64 {
    if d >= 2 && space == SpaceType::Exceptional {
        2 * d - 1
    } else {
        2 * d
    }
}

/// `dim((X u Y) x (X u Y))` and the type of the disjoint union. Types other
/// than exceptional count as basic; spaces of dimension at most 1 are basic.
pub fn disjoint_union_square_dim(dx: u64, tx: SpaceType, dy: u64, ty: SpaceType) -> SquareDim {
    let sq = square_dim(dx, tx).max(square_dim(dy, ty));
    let d = dx.max(dy);
    SquareDim {
        square_dim: sq,
        space: if d >= 1 && sq == 2 * d - 1 {
            SpaceType::Exceptional
        } else {
            SpaceType::Basic
        },
    }
}

/// Minimal number of self-adjoint generators of `C([0,1]^d, M_n)`,
/// `ceil((d - 1)/n^2 + 1)`.
pub fn gen_count_formula(d: u64, n: u64) -> Result<u64> {
    if d < 1 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "generator count formula needs d >= 1 and n >= 2, got d={d}, n={n}"
        )));
    }
    Ok(1 + (d - 1).div_ceil(n * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FormulaRow {
    pub d: u64,
    pub n: u64,
    pub gen: u64,
    pub rr: u64,
    pub gr: u64,
}

/// `gen`, `rr` and `gr` of `C([0,1]^d, M_n)` over the given ranges.
pub fn formula_table(
    ds: impl IntoIterator<Item = u64> + Clone,
    ns: impl IntoIterator<Item = u64>,
) -> Result<Vec<FormulaRow>> {
    let mut rows = Vec::new();
    for n in ns {
        for d in ds.clone() {
            rows.push(FormulaRow {
                d,
                n,
                gen: gen_count_formula(d, n)?,
                rr: d.div_ceil(2 * n - 1),
                gr: (d + 1).div_ceil(2 * n - 2),
            });
        }
    }
    Ok(rows)
}

pub fn format_formula_table(rows: &[FormulaRow]) -> String {
    let mut out = format!("{:>3} {:>3} {:>4} {:>4} {:>4}", "d", "n", "gen", "rr", "gr");
    for r in rows {
        out.push_str(&format!("\n{:>3} {:>3} {:>4} {:>4} {:>4}", r.d, r.n, r.gen, r.rr, r.gr));
    }
    out
}
