//! Gnuplot scripts for the six standard figures.
//!
//! Each figure reads one curve CSV (binary or Gaussian layout) and plots a
//! subset of its columns. The script renders to a PNG next to itself.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::binary;
use crate::curves::CurveTable;
use crate::error::{Error, Result};
use crate::gaussian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Binary distortion curves at `rho = 1/4`.
    Fig1,
    /// Optimal and simplified `delta_1` at `rho = 1/4`.
    Fig2,
    /// Binary distortion curves at `rho = 7/20`.
    Fig3,
    /// Optimal and simplified `delta_1` at `rho = 7/20`.
    Fig4,
    /// Gaussian distortion curves.
    Fig5,
    /// Optimal power split `alpha`.
    Fig6,
}

struct Layout {
    schema: &'static [&'static str],
    xlabel: &'static str,
    ylabel: &'static str,
    series: &'static [(&'static str, &'static str)],
}

const BINARY_CURVES: &[(&str, &str)] = &[
    ("d_lower", "D̲"),
    ("d_sep", "D̄_S"),
    ("d_uncoded", "D̄_U"),
    ("d_hybrid", "D̄_H"),
    ("d_hybrid_simple", "D̄′_H"),
];
const BINARY_DELTAS: &[(&str, &str)] = &[("delta1_opt", "δ_1(θ)"), ("delta1_prime", "δ′_1(θ)")];
const GAUSSIAN_CURVES: &[(&str, &str)] =
    &[("d_lower", "D̲(Γ)"), ("d_sep", "D̄_S(Γ)"), ("d_uncoded", "D̄_U(Γ)"), ("d_hybrid", "D̄_H(Γ)")];
const GAUSSIAN_ALPHA: &[(&str, &str)] = &[("alpha_opt", "α(Γ)")];

impl Figure {
    pub const ALL: [Figure; 6] = [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }

    /// Column names the figure's CSV must carry, in order.
    pub fn schema(self) -> &'static [&'static str] {
        self.layout().schema
    }

    /// Number of plotted series.
    pub fn series_count(self) -> usize {
        self.layout().series.len()
    }

    fn layout(self) -> Layout {
        match self {
            Figure::Fig1 | Figure::Fig3 => Layout {
                schema: &binary::CURVE_COLUMNS,
                xlabel: "θ",
                ylabel: "distortion",
                series: BINARY_CURVES,
            },
            Figure::Fig2 | Figure::Fig4 => Layout {
                schema: &binary::CURVE_COLUMNS,
                xlabel: "θ",
                ylabel: "δ_1",
                series: BINARY_DELTAS,
            },
            Figure::Fig5 => Layout {
                schema: &gaussian::CURVE_COLUMNS,
                xlabel: "Γ",
                ylabel: "distortion",
                series: GAUSSIAN_CURVES,
            },
            Figure::Fig6 => Layout {
                schema: &gaussian::CURVE_COLUMNS,
                xlabel: "Γ",
                ylabel: "α(Γ)",
                series: GAUSSIAN_ALPHA,
            },
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown figure '{s}' (expected fig1..fig6)")))
    }
}

impl std::fmt::Display for Figure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Gnuplot script plotting `figure` from `table`, which is read at runtime
/// from `csv_path` (interpreted relative to the script's directory).
///
/// Fails if the table is empty or its columns differ from the figure's schema.
pub fn emit_plot_script(table: &CurveTable, csv_path: &str, figure: Figure) -> Result<String> {
    let layout = figure.layout();
    if table.columns() != layout.schema {
        return Err(Error::Schema(format!(
            "{figure} expects columns [{}], found [{}]",
            layout.schema.join(","),
            table.columns().join(",")
        )));
    }
    if table.is_empty() {
        return Err(Error::Schema(format!("{figure}: CSV has no data rows")));
    }
    let log_x = figure == Figure::Fig5 || figure == Figure::Fig6;
    let log_x = log_x && {
        let x = table.column(layout.schema[0]).expect("schema checked");
        x.iter().all(|&v| v > 0.0) && x.last().unwrap() / x[0] > 100.0
    };

    let mut s = String::new();
    let _ = writeln!(s, "# {figure}: generated by cot-lab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "set terminal pngcairo size 900,600 enhanced font ',11'");
    let _ = writeln!(s, "set output {}", quote(&format!("{}.png", figure.id())));
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set xlabel {}", quote(layout.xlabel));
    let _ = writeln!(s, "set ylabel {}", quote(layout.ylabel));
    if log_x {
        let _ = writeln!(s, "set logscale x");
    }
    let _ = writeln!(s, "set key top left");
    let _ = writeln!(s, "set grid");
    let data = quote(csv_path);
    let plots: Vec<String> = layout
        .series
        .iter()
        .enumerate()
        .map(|(k, (col, title))| {
            let c = layout.schema.iter().position(|h| h == col).expect("series column in schema") + 1;
            let src = if k == 0 { data.clone() } else { "''".into() };
            format!("{src} skip 1 using 1:{c} with lines lw 2 title {}", quote(title))
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    Ok(s)
}
