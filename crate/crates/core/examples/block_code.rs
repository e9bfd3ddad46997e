//! Random-coding hybrid scheme at n = 4, 8, 12 on the binary example.

use cot_lab::binary::hybrid_spec;
use cot_lab::hybrid::evaluate;
use cot_lab::sim::{sim_block_hybrid, BlockCodeConfig, SimConfig};

fn main() -> cot_lab::Result<()> {
    let (rho, theta, delta1, rate) = (0.1, 0.01, 0.05, 0.4);
    let spec = hybrid_spec(rho, theta, delta1)?;
    let r = evaluate(&spec)?;
    println!("I(X;Z) = {:.4}  I(Y;Z) = {:.4}  I(Z;V) = {:.4}  R = {rate}", r.i_xz, r.i_yz, r.i_zv);
    println!("single-letter distortion {:.5}", r.e_dist);
    for n in [4, 8, 12] {
        let mut cfg = BlockCodeConfig::from_spec(&spec, n, rate)?;
        cfg.codebooks = 512;
        let rep = sim_block_hybrid(&cfg, &SimConfig::new(1, 256, 8)?)?;
        let b = rep.block.as_ref().expect("block stats");
        println!(
            "n = {n:2}  |C| = {:3}  median error = {:.4}  median TV = {:.4}  distortion = {:.4} ± {:.4}",
            b.codebook_size, b.median_msg_error_rate, b.median_tv_pre_coupling, rep.mean_distortion, rep.std_error
        );
    }
    Ok(())
}
