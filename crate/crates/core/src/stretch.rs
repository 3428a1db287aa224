//! The radial stretch `S_c(x) = (x - c) |x - c|^(1/K - 1)` and its Jacobian.

use crate::error::{Error, Result};
use crate::symmat::SymMatrix;
use crate::vector;

/// Distances below this are treated as coincident with the center.
pub const ON_CENTER_GUARD: f64 = 1e-300;

/// `r^(1/K - 1)` evaluated as `exp((1/K - 1) ln r)`.
pub fn radial_factor(r: f64, exponent: f64) -> f64 {
    ((exponent - 1.0) * r.ln()).exp()
}

/// Checks `K > 1` and returns `(1/K, 1 - 1/K)`.
pub fn exponents_for(k: f64) -> Result<(f64, f64)> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::InvalidK(k));
    }
    let exponent = 1.0 / k;
    Ok((exponent, 1.0 - exponent))
}

/// A radial stretch centered at `center` with distortion `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchParams {
    center: Vec<f64>,
    k: f64,
    exponent: f64,
    alpha: f64,
}

/// Eigenstructure of `DS` at a point: the radial direction `w` carries
/// `s / K`, every orthogonal direction carries `s = |x - c|^(1/K - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchEigen {
    pub radial: f64,
    pub tangential: f64,
    pub direction: Vec<f64>,
}

impl StretchParams {
    pub fn new(center: Vec<f64>, k: f64) -> Result<Self> {
        if center.len() < 2 {
            return Err(Error::DimensionTooSmall(center.len()));
        }
        if !vector::all_finite(&center) {
            return Err(Error::NonFinite("stretch center"));
        }
        let (exponent, alpha) = exponents_for(k)?;
        Ok(Self {
            center,
            k,
            exponent,
            alpha,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
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

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        eval_stretch(self, x)
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<SymMatrix> {
        jac_stretch(self, x)
    }
}

/// Evaluates the stretch; the center maps to the origin.
pub fn eval_stretch(p: &StretchParams, x: &[f64]) -> Vec<f64> {
    let diff = vector::sub(x, &p.center);
    let r = vector::norm(&diff);
    if r < ON_CENTER_GUARD {
        return vec![0.0; diff.len()];
    }
    let s = radial_factor(r, p.exponent);
    vector::scale(&diff, s)
}

/// `|x - c|^(1/K - 1) (I - alpha w w^T)` with `w = (x - c)/|x - c|`.
pub fn jac_stretch(p: &StretchParams, x: &[f64]) -> Result<SymMatrix> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x.len(),
        });
    }
    let diff = vector::sub(x, &p.center);
    let r = vector::norm(&diff);
    if r < ON_CENTER_GUARD {
        return Err(Error::DegeneratePoint);
    }
    let s = radial_factor(r, p.exponent);
    let w = vector::scale(&diff, 1.0 / r);
    SymMatrix::from_fn(p.dim(), |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        s * (delta - p.alpha * w[i] * w[j])
    })
}

pub fn stretch_eigenstructure(p: &StretchParams, x: &[f64]) -> Result<StretchEigen> {
    let diff = vector::sub(x, &p.center);
    let r = vector::norm(&diff);
    if r < ON_CENTER_GUARD {
        return Err(Error::DegeneratePoint);
    }
    let s = radial_factor(r, p.exponent);
    Ok(StretchEigen {
        radial: s * p.exponent,
        tangential: s,
        direction: vector::scale(&diff, 1.0 / r),
    })
}
