//! The weighted series of radial stretches
//! `F(x) = sum_n 2^-n S_{lambda_n}(x)` over a finite ordered center set,
//! its Jacobian, and the decomposition `DF(x) = W(x) (I - alpha B(x))`.

use crate::error::{Error, Result};
use crate::stretch::{exponents_for, radial_factor, ON_CENTER_GUARD};
use crate::symmat::SymMatrix;
use crate::vector::{self, CompensatedSum, CompensatedVec};

/// Minimum separation between distinct centers.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Weight `2^-n` of the `n`-th center (1-based).
pub fn weight(n: usize) -> f64 {
    2f64.powi(-(n.min(i32::MAX as usize) as i32))
}

/// Ordered, pairwise distinct centers `lambda_1..lambda_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSet {
    dim: usize,
    centers: Vec<Vec<f64>>,
    bound: f64,
}

impl LambdaSet {
    pub fn new(dim: usize, centers: Vec<Vec<f64>>) -> Result<Self> {
        let set = Self::new_unchecked(dim, centers)?;
        if let Some((i, j, _)) = set.closest_pair() {
            if set.distance_between(i, j) <= MIN_SEPARATION {
                return Err(Error::DuplicateCenters {
                    first: i + 1,
                    second: j + 1,
                    min_separation: MIN_SEPARATION,
                });
            }
        }
        Ok(set)
    }

    /// Validates everything except pairwise distinctness. Used by negative
    /// controls that need a corrupted set.
    #[doc(hidden)]
    pub fn new_unchecked(dim: usize, centers: Vec<Vec<f64>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if centers.is_empty() {
            return Err(Error::EmptyLambdaSet);
        }
        for c in &centers {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            if !vector::all_finite(c) {
                return Err(Error::NonFinite("center coordinates"));
            }
        }
        let bound = centers.iter().map(|c| vector::norm(c)).fold(0.0, f64::max);
        if !bound.is_finite() {
            return Err(Error::NonFinite("center bound"));
        }
        Ok(Self {
            dim,
            centers,
            bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// Center `lambda_n` for 1-based `n`.
    pub fn center(&self, n: usize) -> Result<&[f64]> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.len(),
            });
        }
        Ok(&self.centers[n - 1])
    }

    /// `max |lambda_n|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    fn distance_between(&self, i: usize, j: usize) -> f64 {
        vector::distance(&self.centers[i], &self.centers[j])
    }

    /// 0-based indices and distance of the closest pair, if `M >= 2`.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = self.distance_between(i, j);
                if best.is_none_or(|(_, _, b)| d < b) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }

    pub fn min_pairwise_distance(&self) -> Option<f64> {
        self.closest_pair().map(|(_, _, d)| d)
    }

    /// Distance from `x` to the nearest center, with that center's 1-based index.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        self.centers
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1, vector::distance(x, c)))
            .fold(
                (0, f64::INFINITY),
                |acc, v| if v.1 < acc.1 { v } else { acc },
            )
    }

    /// Applies `f` to each center, keeping enumeration order.
    pub fn map_centers(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.centers.iter().map(|c| f(c)).collect())
    }
}

/// A center set together with the distortion constant `K > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    lambdas: LambdaSet,
    k: f64,
    exponent: f64,
    alpha: f64,
}

impl MapConfig {
    pub fn new(lambdas: LambdaSet, k: f64) -> Result<Self> {
        let (exponent, alpha) = exponents_for(k)?;
        Ok(Self {
            lambdas,
            k,
            exponent,
            alpha,
        })
    }

    pub fn lambdas(&self) -> &LambdaSet {
        &self.lambdas
    }

    pub fn dim(&self) -> usize {
        self.lambdas.dim
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `1/K`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `1 - 1/K`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_lambdas(&self, lambdas: LambdaSet) -> Self {
        Self {
            lambdas,
            ..self.clone()
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// `S_c(x)` without building a `StretchParams`.
fn stretch_term(center: &[f64], x: &[f64], exponent: f64) -> Vec<f64> {
    let diff = vector::sub(x, center);
    let r = vector::norm(&diff);
    if r < ON_CENTER_GUARD {
        return vec![0.0; diff.len()];
    }
    vector::scale(&diff, radial_factor(r, exponent))
}

/// Evaluates `F(x)`. Centers are allowed: every summand is continuous.
pub fn eval_map(cfg: &MapConfig, x: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedVec::zeros(x.len());
    for (i, c) in cfg.lambdas.centers.iter().enumerate() {
        acc.add_scaled(weight(i + 1), &stretch_term(c, x, cfg.exponent));
    }
    acc.value()
}

/// `S_c(base + h) - S_c(base)` with both arguments formed relative to the
/// center first, so the center's own term sees the step `h` exactly.
fn stretch_increment(center: &[f64], base: &[f64], h: &[f64], exponent: f64) -> Vec<f64> {
    let rel = vector::sub(base, center);
    let zero = vec![0.0; rel.len()];
    let moved = vector::add(&rel, h);
    vector::sub(
        &stretch_term(&zero, &moved, exponent),
        &stretch_term(&zero, &rel, exponent),
    )
}

/// `F(base + h) - F(base)` accumulated term by term, which avoids the
/// cancellation of subtracting two full sums at small `|h|`.
pub fn map_increment(cfg: &MapConfig, base: &[f64], h: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedVec::zeros(base.len());
    for (i, c) in cfg.lambdas.centers.iter().enumerate() {
        acc.add_scaled(weight(i + 1), &stretch_increment(c, base, h, cfg.exponent));
    }
    acc.value()
}

/// The `n`-th weighted summand increment `2^-n |S_n(base + h) - S_n(base)|`.
pub fn term_increment(cfg: &MapConfig, n: usize, base: &[f64], h: &[f64]) -> Result<f64> {
    let c = cfg.lambdas.center(n)?;
    Ok(weight(n) * vector::norm(&stretch_increment(c, base, h, cfg.exponent)))
}

/// `sum_n 2^-n |S_n(x)|`, the natural magnitude scale for relative errors of `F(x)`.
pub fn map_scale(cfg: &MapConfig, x: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (i, c) in cfg.lambdas.centers.iter().enumerate() {
        acc.add(weight(i + 1) * vector::norm(&stretch_term(c, x, cfg.exponent)));
    }
    acc.value()
}

/// `W(x)`, `eta_n(x)`, `w_n(x)` and `B(x)` at a point off the center set.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDecomposition {
    x: Vec<f64>,
    w_total: f64,
    eta: Vec<f64>,
    directions: Vec<Vec<f64>>,
    b: SymMatrix,
}

impl WeightDecomposition {
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `W(x) = sum_n 2^-n |x - lambda_n|^(1/K - 1)`.
    pub fn w(&self) -> f64 {
        self.w_total
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Unit vectors `w_n = (x - lambda_n)/|x - lambda_n|`.
    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    /// `B(x) = sum_n eta_n w_n w_n^T`.
    pub fn b(&self) -> &SymMatrix {
        &self.b
    }

    /// `I - alpha B(x)`.
    pub fn normalized_jacobian(&self, alpha: f64) -> SymMatrix {
        let d = self.b.dim();
        SymMatrix::from_fn(d, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - alpha * self.b.get(i, j)
        })
        .expect("finite decomposition")
    }

    /// Overrides `B(x)`; lets negative controls feed corrupted matrices to
    /// the checks.
    #[doc(hidden)]
    pub fn with_b(mut self, b: SymMatrix) -> Self {
        self.b = b;
        self
    }
}

pub fn weight_decomposition(cfg: &MapConfig, x: &[f64]) -> Result<WeightDecomposition> {
    cfg.check_dim(x)?;
    let d = cfg.dim();
    let m = cfg.lambdas.len();
    let mut diffs = Vec::with_capacity(m);
    let mut terms = Vec::with_capacity(m);
    let mut total = CompensatedSum::new();
    for (i, c) in cfg.lambdas.centers.iter().enumerate() {
        let diff = vector::sub(x, c);
        let r = vector::norm(&diff);
        if r < ON_CENTER_GUARD {
            return Err(Error::OnLambda(i + 1));
        }
        let t = weight(i + 1) * radial_factor(r, cfg.exponent);
        total.add(t);
        terms.push(t);
        diffs.push(vector::scale(&diff, 1.0 / r));
    }
    let w_total = total.value();
    let eta: Vec<f64> = terms.iter().map(|t| t / w_total).collect();

    let mut acc = vec![CompensatedSum::new(); d * d];
    for (e, w) in eta.iter().zip(&diffs) {
        for a in 0..d {
            for b in a..d {
                acc[a * d + b].add(e * w[a] * w[b]);
            }
        }
    }
    let b = SymMatrix::from_fn(d, |i, j| acc[i * d + j].value())?;
    Ok(WeightDecomposition {
        x: x.to_vec(),
        w_total,
        eta,
        directions: diffs,
        b,
    })
}

/// `DF(x) = W(x) (I - alpha B(x))`.
pub fn jac_map(cfg: &MapConfig, x: &[f64]) -> Result<SymMatrix> {
    let wd = weight_decomposition(cfg, x)?;
    Ok(wd.normalized_jacobian(cfg.alpha).scaled(wd.w_total))
}

/// `DF(x)` as the direct sum `sum_n 2^-n DS_{lambda_n}(x)`.
pub fn jac_map_series(cfg: &MapConfig, x: &[f64]) -> Result<SymMatrix> {
    cfg.check_dim(x)?;
    let d = cfg.dim();
    let mut acc = vec![CompensatedSum::new(); d * d];
    for (i, c) in cfg.lambdas.centers.iter().enumerate() {
        let diff = vector::sub(x, c);
        let r = vector::norm(&diff);
        if r < ON_CENTER_GUARD {
            return Err(Error::OnLambda(i + 1));
        }
        let s = weight(i + 1) * radial_factor(r, cfg.exponent);
        let w = vector::scale(&diff, 1.0 / r);
        for a in 0..d {
            for b in a..d {
                let delta = if a == b { 1.0 } else { 0.0 };
                acc[a * d + b].add(s * (delta - cfg.alpha * w[a] * w[b]));
            }
        }
    }
    SymMatrix::from_fn(d, |i, j| acc[i * d + j].value())
}
