//! At rho = 7/20 the optimized hybrid scheme passes through three modes as
//! the channel gets noisier.

use cot_lab::binary::{classify, d_hybrid, thresholds, BinaryConfig};

fn main() -> cot_lab::Result<()> {
    let rho = 0.35;
    let cfg = BinaryConfig::uniform(rho, 0.0, 0.5, 512)?;
    for s in thresholds(&cfg)? {
        println!("{} -> {} at theta = {:.4}", s.from, s.to, s.theta);
    }
    for theta in [0.02, 0.1, 0.3] {
        let (d, delta1) = d_hybrid(rho, theta)?;
        println!("theta = {theta}: mode {}, D_H = {d:.5}, delta1 = {delta1:.4}", classify(rho, theta)?);
    }
    Ok(())
}
