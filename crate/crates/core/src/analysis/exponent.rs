use serde::Serialize;

use crate::composite::{map_increment, MapConfig};
use crate::error::{Error, Result};
use crate::stretch::ON_CENTER_GUARD;
use crate::vector;

const UNIT_TOLERANCE: f64 = 1e-13;

/// Geometric scales `r_k = r0 q^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleLadder {
    r0: f64,
    q: f64,
    count: usize,
}

impl ScaleLadder {
    pub fn new(r0: f64, q: f64, count: usize) -> Result<Self> {
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::InvalidLadder("r0 must be positive and finite"));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidLadder("ratio q must lie in (0, 1)"));
        }
        if count < 4 {
            return Err(Error::InvalidLadder("need at least 4 rungs"));
        }
        let ladder = Self { r0, q, count };
        if ladder.scale(count - 1) < ON_CENTER_GUARD {
            return Err(Error::InvalidLadder(
                "smallest scale falls below the on-center guard",
            ));
        }
        Ok(ladder)
    }

    /// Dyadic ladder `2^-from .. 2^-to`.
    pub fn dyadic(from: i32, to: i32) -> Result<Self> {
        if to <= from {
            return Err(Error::InvalidLadder("dyadic ladder must descend"));
        }
        Self::new(2f64.powi(-from), 0.5, (to - from + 1) as usize)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn scale(&self, k: usize) -> f64 {
        self.r0 * self.q.powi(k as i32)
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.scale(k)).collect()
    }
}

impl Default for ScaleLadder {
    /// `2^-10` down to `2^-40` in halving steps.
    fn default() -> Self {
        Self {
            r0: 2f64.powi(-10),
            q: 0.5,
            count: 31,
        }
    }
}

/// Multiscale estimate of the stretching exponent in one direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub ladder: ScaleLadder,
    /// `|F(base + r_k u) - F(base)|` per rung.
    pub displacements: Vec<f64>,
    /// Rungs dropped because the displacement was zero or not finite.
    pub excluded: Vec<usize>,
    /// Slopes between consecutive retained rungs `(k, k+1)`, in ladder order.
    pub secant_slopes: Vec<f64>,
    pub fitted_slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of `log displacement` from the fitted line.
    pub residual: f64,
}

impl ExponentEstimate {
    /// Secant slope at the two smallest retained scales.
    pub fn deepest_secant(&self) -> Option<f64> {
        self.secant_slopes.last().copied()
    }
}

pub fn estimate_exponent(
    cfg: &MapConfig,
    base: &[f64],
    u: &[f64],
    ladder: &ScaleLadder,
) -> Result<ExponentEstimate> {
    if base.len() != cfg.dim() || u.len() != cfg.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim(),
            got: if base.len() != cfg.dim() {
                base.len()
            } else {
                u.len()
            },
        });
    }
    if !vector::all_finite(base) {
        return Err(Error::NonFinite("exponent base point"));
    }
    let un = vector::norm(u);
    if (un - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NotUnit(un));
    }

    let scales = ladder.scales();
    let displacements: Vec<f64> = scales
        .iter()
        .map(|&r| vector::norm(&map_increment(cfg, base, &vector::scale(u, r))))
        .collect();
    let keep: Vec<usize> = (0..scales.len())
        .filter(|&k| displacements[k].is_finite() && displacements[k] > 0.0)
        .collect();
    let excluded: Vec<usize> = (0..scales.len()).filter(|k| !keep.contains(k)).collect();
    if keep.len() < 2 {
        return Err(Error::AllRungsDegenerate);
    }

    let xs: Vec<f64> = keep.iter().map(|&k| scales[k].ln()).collect();
    let ys: Vec<f64> = keep.iter().map(|&k| displacements[k].ln()).collect();
    let secant_slopes = keep
        .windows(2)
        .zip(xs.windows(2).zip(ys.windows(2)))
        .filter(|(k, _)| k[1] == k[0] + 1)
        .map(|(_, (x, y))| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();

    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let fitted_slope = sxy / sxx;
    let intercept = my - fitted_slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + fitted_slope * x)).abs())
        .fold(0.0, f64::max);

    Ok(ExponentEstimate {
        base: base.to_vec(),
        direction: u.to_vec(),
        ladder: *ladder,
        displacements,
        excluded,
        secant_slopes,
        fitted_slope,
        intercept,
        residual,
    })
}
