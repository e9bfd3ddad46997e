//! Exact discrete optimal transport on a small 1-D problem with |i - j| cost.

use cot_lab::infokit::{ot_min_cost, DiscreteDistribution, Matrix};

fn main() -> cot_lab::Result<()> {
    let row = DiscreteDistribution::from_probs(vec![0.4, 0.3, 0.2, 0.1])?;
    let col = DiscreteDistribution::from_probs(vec![0.1, 0.2, 0.3, 0.4])?;
    let cost = Matrix::from_fn(4, 4, |i, j| (i as f64 - j as f64).abs());
    let (d, plan) = ot_min_cost(&row, &col, &cost)?;
    println!("d* = {d}");
    for i in 0..4 {
        println!("{:?}", plan.table.row(i));
    }
    Ok(())
}
