//! Blahut-Arimoto capacity of a binary symmetric channel, with and without a
//! budget on the fraction of ones sent.

use cot_lab::infokit::{blahut_arimoto, DiscreteChannel};
use cot_lab::numkit::{binary_entropy, Tolerance};

fn main() -> cot_lab::Result<()> {
    // duality gap of 1e-12 bits
    let tol = Tolerance::new(1e-12, 1e-12, 1_000_000)?;
    let theta = 0.11;
    let ch = DiscreteChannel::bsc(theta)?;
    let free = blahut_arimoto(&ch, None, &tol)?;
    println!("BSC({theta}): C = {:.6}, 1 - H_b = {:.6}", free.capacity, 1.0 - binary_entropy(theta)?);

    let costly = ch.with_cost(vec![0.0, 1.0])?;
    for gamma in [0.05, 0.1, 0.2, 0.3, 0.5] {
        let r = blahut_arimoto(&costly, Some(gamma), &tol)?;
        println!("P(U=1) <= {gamma:4}: C = {:.6}  p = {:?}", r.capacity, r.input.probs());
    }
    Ok(())
}
