//! The `genrank` command line.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::constructions::{
    combine_direct_sum_generators, perturb_to_generating_tuple, tensor_compress, BlockAlgebra,
};
use crate::cx_homogeneous::{is_generating_field, MatrixField};
use crate::error::{Error, Result};
use crate::generation::{
    classify_subalgebra, generated_algebra_with_cut, is_left_generating, stabilizer_lie_dimension,
    StabilizerKind, DEFAULT_RANK_CUT,
};
use crate::matrix_core::{tuple_from_json, tuple_to_json, HermitianTuple};
use crate::rank_calculus::{
    format_formula_table, formula_table, generator_rank_bounds, parse, real_rank_bounds,
    RankBounds,
};
use crate::stratification::{
    all_strata, complement_dimension, density_threshold, format_strata, mc_generation_rate,
};

pub use report::{
    exit_code, inputs_digest, RunReport, AMBIGUITY_HINT, EXIT_AMBIGUOUS, EXIT_FAILURE, EXIT_OK,
    EXIT_PARSE,
};

#[derive(Debug, Parser)]
#[command(name = "genrank", version, about = "Generators of matrix algebras and generator-rank calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print a JSON run report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Perturbation budget.
    #[arg(long, global = true, default_value_t = 0.01)]
    eps: f64,
    /// Relative rank cut for the closure computation.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generation verdict and orbit type of a tuple.
    Check { file: PathBuf },
    /// Perturb a tuple to a generating tuple of a block algebra.
    Perturb {
        file: PathBuf,
        /// Block sizes, e.g. `2,3`; defaults to the full matrix algebra.
        #[arg(long)]
        blocks: Option<String>,
    },
    /// Generating tuple of a direct sum from generating tuples of the summands.
    Combine { first: PathBuf, second: PathBuf },
    /// Generating pair of A (x) M_n near a given tuple.
    Compress {
        #[arg(long)]
        blocks: String,
        #[arg(long)]
        n: usize,
        file: PathBuf,
    },
    /// Orbit-type strata of k-tuples in M_n.
    Strata { n: usize, k: usize },
    /// Monte Carlo generation rate of random k-tuples in M_n.
    Mc { n: usize, k: usize },
    /// Generator-rank and real-rank bounds of a described algebra.
    Rank { expr: String },
    /// Generation test for a matrix field on finitely many points.
    Field { file: PathBuf },
    /// gen / rr / gr of C([0,1]^d, M_n).
    Table {
        #[arg(long, default_value = "1..12")]
        d: String,
        #[arg(long, default_value = "2..6")]
        n: String,
    },
}

struct Output {
    results: Value,
    text: String,
}

struct Inputs {
    files: Vec<Vec<u8>>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<Value> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let value = serde_json::from_slice(&bytes).map_err(|e| {
            Error::InvalidJson(format!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        self.files.push(bytes);
        Ok(value)
    }

    fn tuple(&mut self, path: &Path) -> Result<HermitianTuple> {
        tuple_from_json(&self.read(path)?)
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::MalformedDescription(format!("`{p}` is not a size in `{s}`")))
        })
        .collect()
}

/// `a..b` (inclusive), `a` or `a,b,c`.
fn parse_range(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::MalformedDescription(format!("`{s}` is not a range like 1..12"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        Ok(parse_list(s)?.into_iter().map(|v| v as u64).collect())
    }
}

fn tuple_output(t: &HermitianTuple, mut extra: Value, text: String) -> Output {
    extra["tuple"] = tuple_to_json(t);
    Output { results: extra, text }
}

fn bounds_text(name: &str, b: &RankBounds) -> String {
    let mut out = format!("{name} in [{}, {}]", b.lo, b.hi);
    for step in &b.trace {
        out.push_str(&format!(
            "\n  {:<16} [{}, {}]  {}",
            step.rule, step.interval.0, step.interval.1, step.anchor
        ));
        if !step.note.is_empty() {
            out.push_str(&format!(" ({})", step.note));
        }
    }
    out
}

fn execute(cli: &Cli, inputs: &mut Inputs) -> Result<Output> {
    let cut = cli.tol.unwrap_or(DEFAULT_RANK_CUT);
    match &cli.command {
        Command::Check { file } => {
            let t = inputs.tuple(file)?;
            let span = generated_algebra_with_cut(&t, cut)?;
            let omega = classify_subalgebra(&span)?;
            let generating = span.is_full();
            let omega_text = if omega.is_empty() {
                "empty span".to_string()
            } else {
                omega.to_string()
            };
            let results = json!({
                "n": t.n(),
                "k": t.k(),
                "generating": generating,
                "dimension": span.dimension(),
                "omega": omega.to_string(),
                "left_generating": is_left_generating(&t),
                "stabilizer_dimension": stabilizer_lie_dimension(&span, StabilizerKind::Pointwise),
            });
            let text = format!(
                "generating: {generating}\ndimension: {} of {}\norbit type: {omega_text}",
                span.dimension(),
                t.n() * t.n()
            );
            Ok(Output { results, text })
        }
        Command::Perturb { file, blocks } => {
            let t = inputs.tuple(file)?;
            let algebra = match blocks {
                Some(b) => BlockAlgebra::new(parse_list(b)?)?,
                None => BlockAlgebra::full(t.n())?,
            };
            let out = perturb_to_generating_tuple(&algebra, &t, cli.eps)?;
            let distance = out.distance(&t)?;
            Ok(tuple_output(
                &out,
                json!({ "distance": distance, "dimension": algebra.dimension() }),
                format!("distance: {distance:.6e}\ngenerates an algebra of dimension {}", algebra.dimension()),
            ))
        }
        Command::Combine { first, second } => {
            let a = inputs.tuple(first)?;
            let b = inputs.tuple(second)?;
            let out = combine_direct_sum_generators(&a, &b, cli.eps)?;
            let dim = generated_algebra_with_cut(&out, cut)?.dimension();
            Ok(tuple_output(
                &out,
                json!({ "dimension": dim }),
                format!("direct sum of size {} generates an algebra of dimension {dim}", out.n()),
            ))
        }
        Command::Compress { blocks, n, file } => {
            let algebra = BlockAlgebra::new(parse_list(blocks)?)?;
            let t = inputs.tuple(file)?;
            let out = tensor_compress(&algebra, *n, &t, cli.eps)?;
            let distance = out.distance(&t)?;
            let dim = n * n * algebra.dimension();
            Ok(tuple_output(
                &out,
                json!({ "distance": distance, "dimension": dim }),
                format!("distance: {distance:.6e}\ngenerates A (x) M_{n} of dimension {dim}"),
            ))
        }
        Command::Strata { n, k } => {
            let reports = all_strata(*n, *k)?;
            let complement = complement_dimension(*n, *k)?;
            let threshold = density_threshold(*n, *k)?;
            let results = json!({
                "strata": reports,
                "complement_dimension": complement,
                "ambient_dimension": k * n * n,
                "density_threshold": threshold,
            });
            let text = format!(
                "{}\n\nnon-generating dimension: {complement} of {}\ndensity threshold: {threshold}",
                format_strata(&reports),
                k * n * n
            );
            Ok(Output { results, text })
        }
        Command::Mc { n, k } => {
            let r = mc_generation_rate(*n, *k, cli.samples, cli.seed)?;
            let text = format!(
                "rate: {:.6}\ngenerating: {}\nnon-generating: {}\nambiguous: {}",
                r.rate, r.generating, r.non_generating, r.ambiguous
            );
            Ok(Output {
                results: serde_json::to_value(&r).expect("report serialises"),
                text,
            })
        }
        Command::Rank { expr } => {
            let desc = parse(expr)?;
            let gr = generator_rank_bounds(&desc)?;
            let rr = real_rank_bounds(&desc)?;
            let mut results = gr.to_json();
            results["real_rank"] = rr.to_json();
            let text = format!("{}\n{}", bounds_text("gr", &gr), bounds_text("rr", &rr));
            Ok(Output { results, text })
        }
        Command::Field { file } => {
            let field = MatrixField::from_json(&inputs.read(file)?)?;
            let verdict = is_generating_field(&field)?;
            let text = match &verdict.diagnostic {
                None => "generating: true".to_string(),
                Some(d) => format!(
                    "generating: false\nreason: {}",
                    serde_json::to_string(d).expect("diagnostic serialises")
                ),
            };
            Ok(Output {
                results: serde_json::to_value(&verdict).expect("verdict serialises"),
                text,
            })
        }
        Command::Table { d, n } => {
            let rows = formula_table(parse_range(d)?, parse_range(n)?)?;
            Ok(Output {
                results: json!({ "rows": rows }),
                text: format_formula_table(&rows),
            })
        }
    }
}

/// Runs the command line with explicit output streams; returns the exit code.
pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{e}");
            return code;
        }
    };
    let start = Instant::now();
    let mut inputs = Inputs { files: Vec::new() };
    match execute(&cli, &mut inputs) {
        Ok(output) => {
            let written = if cli.json {
                let report = RunReport {
                    command: args.iter().skip(1).cloned().collect(),
                    inputs_digest: inputs_digest(&args[1..], &inputs.files),
                    results: output.results,
                    seed: cli.seed,
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    wall_time_ms: start.elapsed().as_millis(),
                };
                writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serialises"))
            } else {
                writeln!(out, "{}", output.text)
            };
            if written.is_err() {
                return EXIT_FAILURE;
            }
            EXIT_OK
        }
        Err(e) => {
            let code = exit_code(&e);
            let _ = if code == EXIT_AMBIGUOUS {
                writeln!(err, "error: {e}\nhint: {AMBIGUITY_HINT}")
            } else {
                writeln!(err, "error: {e}")
            };
            code
        }
    }
}

/// Runs against the process's stdout and stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["genrank"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn rank_json() {
        let (code, out, _) = run_capture(&["rank", "hom(3,dim=2)", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["results"]["lo"], 1);
        assert_eq!(v["results"]["hi"], 1);
        assert_eq!(v["seed"], 0);
    }

    #[test]
    fn rank_parse_error_exits_2() {
        let (code, _, err) = run_capture(&["rank", "hom(3,"]);
        assert_eq!(code, 2);
        assert!(err.contains("line 1, column 7"), "{err}");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_range("2..=4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_range("5,7").unwrap(), vec![5, 7]);
        assert!(parse_range("4..2").is_err());
    }

    #[test]
    fn unknown_subcommand_is_a_parse_error() {
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }
}
