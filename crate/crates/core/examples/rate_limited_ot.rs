//! Transport between two Bernoulli marginals under Hamming cost when the
//! coupling may carry at most R bits, against the closed form.

use cot_lab::binary::d_hat;
use cot_lab::infokit::{ot_min_cost, rate_limited_ot, DiscreteDistribution, Matrix};
use cot_lab::numkit::Tolerance;

fn main() -> cot_lab::Result<()> {
    let rho = 0.25;
    let p = DiscreteDistribution::bernoulli(rho)?;
    let cost = Matrix::hamming(2);
    let (d_star, _) = ot_min_cost(&p, &p, &cost)?;
    println!("unconstrained optimum: {d_star}");
    for rate in [0.0, 0.1, 0.2, 0.4, 0.6, 0.8] {
        let pt = rate_limited_ot(&p, &p, &cost, rate, &Tolerance::tight())?;
        println!("R = {rate:.1}: sweep {:.8}  closed form {:.8}", pt.distortion, d_hat(rho, rate)?);
    }
    Ok(())
}
