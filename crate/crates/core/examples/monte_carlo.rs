//! Monte Carlo checks of the one-shot schemes against their closed forms.

use cot_lab::binary::{self, UncodedDecoder};
use cot_lab::gaussian;
use cot_lab::sim::{sim_genie_hybrid_binary, sim_uncoded_binary, sim_uncoded_gaussian, SimConfig};

fn main() -> cot_lab::Result<()> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let sim = SimConfig::new(7, 1_000_000, workers)?;

    let r = sim_uncoded_binary(0.5, 0.1, UncodedDecoder { a: 0.0, b: 0.0 }, &sim)?;
    println!("uncoded binary:   {:.5} ± {:.5}  (exact 0.1)", r.mean_distortion, r.std_error);

    let lambdas = [1.5, 0.5];
    let r = sim_uncoded_gaussian(&lambdas, 1.0, &sim)?;
    println!("uncoded Gaussian: {:.5} ± {:.5}  (exact {:.5})", r.mean_distortion, r.std_error, gaussian::d_uncoded(&lambdas, 1.0)?);

    let (rho, theta, delta1) = (0.25, 0.2, 0.1);
    let r = sim_genie_hybrid_binary(rho, theta, delta1, &sim)?;
    println!(
        "genie hybrid:     {:.5} ± {:.5}  (exact {:.5})",
        r.mean_distortion,
        r.std_error,
        binary::d_hybrid_at(rho, theta, delta1)?
    );
    Ok(())
}
