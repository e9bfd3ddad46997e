//! Binary source at rho = 1/4: distortion curves, the optimal `delta_1`, and
//! the crossover probability where the hybrid scheme changes mode.

use cot_lab::binary::{binary_rows, thresholds, BinaryConfig};

fn main() -> cot_lab::Result<()> {
    let cfg = BinaryConfig::uniform(0.25, 0.0, 0.5, 512)?;
    let rows = binary_rows(&cfg)?;

    println!("{:>7} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "theta", "D_lower", "D_S", "D_U", "D_H", "D'_H", "delta1");
    for r in rows.iter().step_by(32).chain(rows.last()) {
        println!(
            "{:7.4} {:8.5} {:8.5} {:8.5} {:8.5} {:8.5} {:8.5}",
            r.theta, r.d_lower, r.d_sep, r.d_uncoded, r.d_hybrid, r.d_hybrid_simple, r.delta1_opt
        );
    }
    for s in thresholds(&cfg)? {
        println!("{} -> {} at theta = {:.4}", s.from, s.to, s.theta);
    }
    Ok(())
}
