//! gen, rr and gr of C([0,1]^d, M_n).

use genrank::rank_calculus::{format_formula_table, formula_table};

fn main() -> genrank::Result<()> {
    println!("{}", format_formula_table(&formula_table(1..=12, 2..=4)?));
    Ok(())
}
