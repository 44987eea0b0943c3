//! Interval bounds on the generator rank from structural descriptions,
//! with the rules that produced them.

use genrank::rank_calculus::{generator_rank_bounds, parse, real_rank_bounds};

fn main() -> genrank::Result<()> {
    for src in [
        "hom(3, dim=2)",
        "commutative(dim=2, basic)",
        "ext(matrix(2), commutative(dim=1, basic))",
        "sum(af, commutative(dim=1))",
        "tensor_mn(commutative(dim=5, basic), 2, rr0, sr1, unital)",
        "limit(matrix(2), matrix(4), matrix(8))",
    ] {
        let desc = parse(src)?;
        let gr = generator_rank_bounds(&desc)?;
        let rr = real_rank_bounds(&desc)?;
        println!("{desc}\n  gr in [{}, {}], rr in [{}, {}]", gr.lo, gr.hi, rr.lo, rr.hi);
        for step in &gr.trace {
            println!("    {} [{}, {}] {}", step.rule, step.interval.0, step.interval.1, step.note);
        }
    }
    Ok(())
}
