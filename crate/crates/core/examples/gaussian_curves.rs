//! Gaussian source with covariance diag(3/2, 1/2): distortion curves over a
//! log-spaced power grid and the power split of the hybrid scheme.

use cot_lab::gaussian::{gamma_star, gaussian_rows, GaussianConfig};

fn main() -> cot_lab::Result<()> {
    let lambdas = vec![1.5, 0.5];
    let cfg = GaussianConfig::log_grid(lambdas.clone(), 0.01, 100.0, 256)?;
    println!("{:>9} {:>8} {:>8} {:>8} {:>8} {:>7}", "gamma", "D_lower", "D_S", "D_U", "D_H", "alpha");
    for r in gaussian_rows(&cfg)?.iter().step_by(16) {
        println!(
            "{:9.4} {:8.5} {:8.5} {:8.5} {:8.5} {:7.4}",
            r.gamma, r.d_lower, r.d_sep, r.d_uncoded, r.d_hybrid, r.alpha_opt
        );
    }
    println!("gamma* = {:.6}", gamma_star(&lambdas)?);
    Ok(())
}
