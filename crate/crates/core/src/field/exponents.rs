use std::io::{self, Write};

use crate::analysis::{estimate_exponent, ExponentEstimate, ScaleLadder};
use crate::composite::MapConfig;
use crate::par::{self, Execution};
use crate::sampling;
use crate::vector;

use super::format_f64;

/// Base point of an exponent estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// Center `lambda_n`, 1-based.
    Center(usize),
    Point(Vec<f64>),
}

impl Target {
    pub fn label(&self) -> String {
        match self {
            Target::Center(n) => format!("lambda_{n}"),
            Target::Point(p) => p
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionMode {
    /// `e1` only.
    Fixed,
    /// `e1` plus this many seeded random unit directions.
    Sweep(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRow {
    pub target: Target,
    /// 0 is `e1`; sweep directions follow.
    pub direction_index: usize,
    pub direction: Vec<f64>,
    pub outcome: Result<ExponentEstimate, String>,
}

pub fn sweep_exponent(
    cfg: &MapConfig,
    targets: &[Target],
    ladder: &ScaleLadder,
    mode: DirectionMode,
    seed: u64,
    exec: Execution,
) -> Vec<ExponentRow> {
    let d = cfg.dim();
    let mut directions = vec![vector::basis(d, 0)];
    if let DirectionMode::Sweep(n) = mode {
        let mut rng = sampling::rng(seed);
        directions.extend((0..n).map(|_| sampling::unit_vector(&mut rng, d)));
    }
    let jobs: Vec<(usize, usize)> = (0..targets.len())
        .flat_map(|t| (0..directions.len()).map(move |k| (t, k)))
        .collect();
    par::map_slice(exec, &jobs, |&(t, k)| {
        let target = &targets[t];
        let base = match target {
            Target::Center(n) => cfg.lambdas().center(*n).map(<[f64]>::to_vec),
            Target::Point(p) => Ok(p.clone()),
        };
        let outcome = base
            .and_then(|b| estimate_exponent(cfg, &b, &directions[k], ladder))
            .map_err(|e| e.to_string());
        ExponentRow {
            target: target.clone(),
            direction_index: k,
            direction: directions[k].clone(),
            outcome,
        }
    })
}

pub fn write_exponent_csv<W: Write>(
    rows: &[ExponentRow],
    dim: usize,
    mut out: W,
) -> io::Result<()> {
    let mut header = vec!["target".to_string(), "direction_index".to_string()];
    header.extend((1..=dim).map(|i| format!("u{i}")));
    header.extend(
        [
            "fitted_slope",
            "deepest_secant",
            "residual",
            "excluded_rungs",
            "error",
        ]
        .map(String::from),
    );
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let mut cols = vec![row.target.label(), row.direction_index.to_string()];
        cols.extend(row.direction.iter().map(|v| format_f64(*v)));
        match &row.outcome {
            Ok(e) => {
                cols.push(format_f64(e.fitted_slope));
                cols.push(e.deepest_secant().map(format_f64).unwrap_or_default());
                cols.push(format_f64(e.residual));
                cols.push(e.excluded.len().to_string());
                cols.push(String::new());
            }
            Err(msg) => {
                cols.extend(std::iter::repeat_n(String::new(), 4));
                cols.push(format!("\"{}\"", msg.replace('"', "'")));
            }
        }
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}
