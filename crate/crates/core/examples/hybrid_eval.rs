//! Feed the binary separation, uncoded and hybrid schemes to the generic
//! achievability evaluator, and compare with the closed forms.

use cot_lab::binary::{d_hybrid, d_sep, d_uncoded, hybrid_spec, separation_spec, uncoded_spec};
use cot_lab::hybrid::evaluate;

fn main() -> cot_lab::Result<()> {
    let (rho, theta) = (0.25, 0.2);
    let (_, delta1) = d_hybrid(rho, theta)?;
    let cases = [
        ("separation", separation_spec(rho, theta)?, d_sep(rho, theta)?),
        ("uncoded", uncoded_spec(rho, theta)?, d_uncoded(rho, theta)?.0),
        ("hybrid", hybrid_spec(rho, theta, delta1)?, d_hybrid(rho, theta)?.0),
    ];
    for (name, spec, closed) in cases {
        let r = evaluate(&spec)?;
        println!(
            "{name:>10}: E[d] = {:.8} (closed form {closed:.8})  I(X;Z) = {:.4}  I(Y;Z) = {:.4}  I(Z;V) = {:.4}  feasible = {}",
            r.e_dist, r.i_xz, r.i_yz, r.i_zv, r.feasible
        );
    }
    Ok(())
}
