//! No linear scheme beats the uncoded Gaussian bound.

use cot_lab::sim::{verify_linear_bound, SimConfig};

fn main() -> cot_lab::Result<()> {
    let r = verify_linear_bound(&[1.5, 0.5], 10_000, &SimConfig::new(1, 200_000, 4)?)?;
    println!("{} trials: {} violations, max excess {:e}", r.trials, r.violations, r.max_excess);
    println!("equality residual at the uncoded decoder: {:e}", r.equality_residual);
    for m in &r.mc_checks {
        println!(
            "trial {}: closed form {:.5}, simulated {:.5} ± {:.5}, bound {:.5}",
            m.trial, m.closed_form, m.estimate.mean, m.estimate.std_error, m.bound
        );
    }
    Ok(())
}
