//! Writes the CSV data and gnuplot scripts for all six figures into a
//! directory (default `figures/`); run `gnuplot fig1.gp` etc. inside it.

use std::path::PathBuf;

use cot_lab::binary::{binary_curves, BinaryConfig};
use cot_lab::gaussian::{gaussian_curves, GaussianConfig};
use cot_lab::plot::{emit_plot_script, Figure};

fn main() -> cot_lab::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    let quarter = binary_curves(&BinaryConfig::uniform(0.25, 0.0, 0.5, 512)?)?;
    let seven = binary_curves(&BinaryConfig::uniform(0.35, 0.0, 0.5, 512)?)?;
    let gauss = gaussian_curves(&GaussianConfig::log_grid(vec![1.5, 0.5], 0.01, 100.0, 256)?)?;
    let jobs = [
        (Figure::Fig1, &quarter, "binary_quarter.csv"),
        (Figure::Fig2, &quarter, "binary_quarter.csv"),
        (Figure::Fig3, &seven, "binary_seven_twentieths.csv"),
        (Figure::Fig4, &seven, "binary_seven_twentieths.csv"),
        (Figure::Fig5, &gauss, "gaussian.csv"),
        (Figure::Fig6, &gauss, "gaussian.csv"),
    ];
    for (fig, table, csv) in jobs {
        table.save(&dir.join(csv))?;
        std::fs::write(dir.join(format!("{fig}.gp")), emit_plot_script(table, csv, fig)?)?;
        println!("{}/{fig}.gp <- {csv}", dir.display());
    }
    Ok(())
}
