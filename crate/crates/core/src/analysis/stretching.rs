use serde::Serialize;

use crate::composite::{map_increment, term_increment, weight, MapConfig};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::sampling;
use crate::stretch::{exponents_for, radial_factor};
use crate::vector;

/// Factor applied to the swept supremum to obtain the working constant `C`.
pub const CALIBRATION_MARGIN: f64 = 1.05;

/// Measured single-stretch increment against `C min{r^(1/K), r |c|^(1/K - 1)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StretchBoundReport {
    pub center: Vec<f64>,
    pub r: f64,
    pub direction: Vec<f64>,
    /// `r / |center|`.
    pub t: f64,
    /// `|S_c(r u) - S_c(0)|`.
    pub measured: f64,
    /// `min{r^(1/K), r |c|^(1/K - 1)}`.
    pub reference: f64,
    pub bound: f64,
    pub slack: f64,
}

pub fn check_stretch_bound(
    center: &[f64],
    k: f64,
    r: f64,
    u: &[f64],
    c: f64,
) -> Result<StretchBoundReport> {
    let (exponent, _) = exponents_for(k)?;
    let dist = vector::norm(center);
    if dist == 0.0 {
        return Err(Error::InvalidArgument(
            "stretch center must differ from the origin".into(),
        ));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale r = {r} must be positive"
        )));
    }
    if center.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            got: u.len(),
        });
    }
    // The origin seen from the center is -center.
    let rel = vector::scale(center, -1.0);
    let moved = vector::axpy(&rel, r, u);
    let before = vector::scale(&rel, radial_factor(dist, exponent));
    let mn = vector::norm(&moved);
    let after = if mn == 0.0 {
        vec![0.0; moved.len()]
    } else {
        vector::scale(&moved, radial_factor(mn, exponent))
    };
    let measured = vector::distance(&after, &before);
    let reference = (exponent * r.ln())
        .exp()
        .min(r * radial_factor(dist, exponent));
    let bound = c * reference;
    Ok(StretchBoundReport {
        center: center.to_vec(),
        r,
        direction: u.to_vec(),
        t: r / dist,
        measured,
        reference,
        bound,
        slack: bound - measured,
    })
}

/// Swept supremum `C*` of `measured / reference` and the working constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StretchCalibration {
    pub k: f64,
    pub c_star: f64,
    /// `CALIBRATION_MARGIN * c_star`.
    pub c: f64,
    pub worst_t: f64,
    pub worst_direction: Vec<f64>,
    pub samples: usize,
}

/// Sweeps `t = r/|center|` log-uniformly over `[t_min, t_max]` (`scales`
/// points) and `directions` seeded random unit vectors plus `+-center/|center|`.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_stretch_constant(
    center: &[f64],
    k: f64,
    t_range: (f64, f64),
    scales: usize,
    directions: usize,
    seed: u64,
    exec: Execution,
) -> Result<StretchCalibration> {
    exponents_for(k)?;
    let (t_min, t_max) = t_range;
    if !(t_min > 0.0 && t_max > t_min && scales >= 2) {
        return Err(Error::InvalidArgument(
            "calibration t range must be positive and increasing".into(),
        ));
    }
    let dist = vector::norm(center);
    if dist == 0.0 {
        return Err(Error::InvalidArgument(
            "stretch center must differ from the origin".into(),
        ));
    }
    let d = center.len();
    let radial = vector::scale(center, 1.0 / dist);
    let mut dirs = vec![radial.clone(), vector::scale(&radial, -1.0)];
    let mut rng = sampling::rng(seed);
    dirs.extend((0..directions).map(|_| sampling::unit_vector(&mut rng, d)));

    let log_lo = t_min.ln();
    let step = (t_max.ln() - log_lo) / (scales - 1) as f64;
    let ts: Vec<f64> = (0..scales)
        .map(|i| (log_lo + step * i as f64).exp())
        .collect();

    let per_dir = par::map_slice(exec, &dirs, |u| {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &t in &ts {
            if let Ok(rep) = check_stretch_bound(center, k, t * dist, u, 1.0) {
                let q = rep.measured / rep.reference;
                if q > best.0 {
                    best = (q, t);
                }
            }
        }
        best
    });
    let (idx, &(c_star, worst_t)) = per_dir
        .iter()
        .enumerate()
        .fold(
            None,
            |acc: Option<(usize, &(f64, f64))>, (i, v)| match acc {
                Some((_, b)) if b.0 >= v.0 => acc,
                _ => Some((i, v)),
            },
        )
        .expect("at least two directions");
    Ok(StretchCalibration {
        k,
        c_star,
        c: CALIBRATION_MARGIN * c_star,
        worst_t,
        worst_direction: dirs[idx].clone(),
        samples: dirs.len() * ts.len(),
    })
}

/// Cutoff and radius selection for a target center `lambda_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RStarPlan {
    pub n: usize,
    pub epsilon: f64,
    pub c: f64,
    /// Smallest `A >= 1` with `C / 2^(N + A - 1) < epsilon`.
    pub a: usize,
    /// `N + A` before clamping.
    pub cutoff: usize,
    /// Effective cutoff `min(N + A, M + 1)`; indices `>= n_star` form the
    /// near tail.
    pub n_star: usize,
    /// Smallest distance from `lambda_N` to another center of index `<= n_star`.
    pub rho: Option<f64>,
    /// `rho (epsilon / C)^(K / (K - 1))`, infinite when unconstrained.
    pub r_star: f64,
    pub unconstrained: bool,
}

pub fn predict_r_star(cfg: &MapConfig, n: usize, epsilon: f64, c: f64) -> Result<RStarPlan> {
    let m = cfg.lambdas().len();
    let target = cfg.lambdas().center(n)?.to_vec();
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "constant C = {c} must be positive"
        )));
    }
    let mut a = 1usize;
    while c * weight(n + a - 1) >= epsilon {
        a += 1;
    }
    let cutoff = n + a;
    let n_star = cutoff.min(m + 1);
    let rho = cfg
        .lambdas()
        .centers()
        .iter()
        .enumerate()
        .filter(|(i, _)| i + 1 != n && *i < n_star)
        .map(|(_, p)| vector::distance(p, &target))
        .reduce(f64::min);
    let (r_star, unconstrained) = match rho {
        Some(rho) => (rho * (epsilon / c).powf(cfg.k() / (cfg.k() - 1.0)), false),
        None => (f64::INFINITY, true),
    };
    Ok(RStarPlan {
        n,
        epsilon,
        c,
        a,
        cutoff,
        n_star,
        rho,
        r_star,
        unconstrained,
    })
}

/// Weighted increments of the competing terms at `lambda_N + r e1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSums {
    /// Indices `n >= N*`.
    pub near: f64,
    /// Indices `n < N*`, `n != N`.
    pub far: f64,
}

pub fn split_tail_check(cfg: &MapConfig, n: usize, plan: &RStarPlan, r: f64) -> Result<TailSums> {
    let base = cfg.lambdas().center(n)?.to_vec();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale r = {r} must be positive"
        )));
    }
    let h = vector::scale(&vector::basis(cfg.dim(), 0), r);
    let mut near = vector::CompensatedSum::new();
    let mut far = vector::CompensatedSum::new();
    for j in 1..=cfg.lambdas().len() {
        if j == n {
            continue;
        }
        let inc = term_increment(cfg, j, &base, &h)?;
        if j >= plan.n_star {
            near.add(inc);
        } else {
            far.add(inc);
        }
    }
    Ok(TailSums {
        near: near.value(),
        far: far.value(),
    })
}

/// `|F(lambda_N + r e1) - F(lambda_N)|` against `(2^-N - 2 epsilon) r^(1/K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundCheck {
    pub r: f64,
    pub displacement: f64,
    pub bound: f64,
}

impl LowerBoundCheck {
    pub fn holds(&self) -> bool {
        self.displacement >= self.bound
    }
}

pub fn stretching_lower_bound(
    cfg: &MapConfig,
    n: usize,
    epsilon: f64,
    r: f64,
) -> Result<LowerBoundCheck> {
    let base = cfg.lambdas().center(n)?.to_vec();
    let h = vector::scale(&vector::basis(cfg.dim(), 0), r);
    let displacement = vector::norm(&map_increment(cfg, &base, &h));
    let bound = (weight(n) - 2.0 * epsilon) * (cfg.exponent() * r.ln()).exp();
    Ok(LowerBoundCheck {
        r,
        displacement,
        bound,
    })
}
