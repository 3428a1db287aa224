use crate::composite::{jac_map, weight_decomposition, MapConfig, WeightDecomposition};
use crate::error::{Error, Result};
use crate::symmat::{eigen_sym, spectral_norm, ElemSymPolys, Spectrum};

/// Allowed excursion of a `B(x)` eigenvalue outside `[0, 1]`.
pub const SPECTRUM_SLACK: f64 = 1e-11;
const TRACE_SLACK: f64 = 1e-9;
const EXPANSION_AGREEMENT: f64 = 1e-10;

/// Both sides of `||DF||^d <= K det DF` at a point, plus the normalized
/// determinant gap.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub x: Vec<f64>,
    /// `W(x)`.
    pub w: f64,
    /// `||DF(x)||`.
    pub op_norm: f64,
    /// `det DF(x)`; may overflow to infinity for huge `W` and large `d`,
    /// `ratio` is computed in the log domain and does not.
    pub det: f64,
    /// `||DF||^d / det DF`.
    pub ratio: f64,
    /// `K - ratio`.
    pub margin: f64,
    pub spectrum_b: Spectrum,
    /// `det(I - alpha B) - 1/K`.
    pub det_lower_gap: f64,
}

pub fn distortion_report(cfg: &MapConfig, x: &[f64]) -> Result<DistortionReport> {
    let wd = weight_decomposition(cfg, x)?;
    let jac = jac_map(cfg, x)?;
    let spec = eigen_sym(&jac)?;
    let d = cfg.dim() as f64;
    let eig = spec.eigenvalues();
    let op_norm = spectral_norm(eig);
    let det: f64 = eig.iter().product();
    let ratio = if spec.min() > 0.0 {
        let log_det: f64 = eig.iter().map(|v| v.ln()).sum();
        (d * op_norm.ln() - log_det).exp()
    } else {
        f64::INFINITY
    };
    let spectrum_b = eigen_sym(wd.b())?;
    let normalized_det: f64 = spectrum_b
        .eigenvalues()
        .iter()
        .map(|s| 1.0 - cfg.alpha() * s)
        .product();
    Ok(DistortionReport {
        x: x.to_vec(),
        w: wd.w(),
        op_norm,
        det,
        ratio,
        margin: cfg.k() - ratio,
        spectrum_b,
        det_lower_gap: normalized_det - 1.0 / cfg.k(),
    })
}

/// `1 - ||I - alpha B(x)||`, nonnegative when the operator-norm bound holds.
pub fn check_operator_norm_bound(wd: &WeightDecomposition, alpha: f64) -> Result<f64> {
    let spec = eigen_sym(&wd.normalized_jacobian(alpha))?;
    Ok(1.0 - spectral_norm(spec.eigenvalues()))
}

/// Eigenvalues must lie in `[0, 1]` and sum to one, up to roundoff.
fn check_simplex_spectrum(s: &Spectrum) -> Result<()> {
    let sum = s.sum();
    if (sum - 1.0).abs() > TRACE_SLACK {
        return Err(Error::SpectrumOutOfRange(format!(
            "eigenvalues sum to {sum}, expected 1"
        )));
    }
    if s.min() < -SPECTRUM_SLACK || s.max() > 1.0 + SPECTRUM_SLACK {
        return Err(Error::SpectrumOutOfRange(format!(
            "eigenvalues span [{}, {}], expected within [0, 1]",
            s.min(),
            s.max()
        )));
    }
    Ok(())
}

/// `prod_k (1 - alpha sigma_k)` expanded as `sum_k (-alpha)^k P_k`.
pub fn determinant_expansion(p: &ElemSymPolys, alpha: f64) -> f64 {
    let mut acc = 0.0;
    let mut coef = 1.0;
    for &pk in p.values() {
        acc += coef * pk;
        coef *= -alpha;
    }
    acc
}

/// `sum_{k >= 2} (-alpha)^k P_k`.
pub fn alternating_tail(s: &Spectrum, alpha: f64) -> Result<f64> {
    let p = ElemSymPolys::from_values(s.eigenvalues())?;
    let mut acc = 0.0;
    let mut coef = alpha * alpha;
    for k in 2..=p.degree() {
        acc += coef * p.get(k);
        coef *= -alpha;
    }
    Ok(acc)
}

/// Gap `det(I - alpha B) - 1/K` from the eigenvalues of `B`, cross-checked
/// against the elementary-symmetric expansion.
pub fn check_determinant_bound(s: &Spectrum, alpha: f64, k: f64) -> Result<f64> {
    check_simplex_spectrum(s)?;
    let product: f64 = s.eigenvalues().iter().map(|v| 1.0 - alpha * v).product();
    let p = ElemSymPolys::from_values(s.eigenvalues())?;
    let expansion = determinant_expansion(&p, alpha);
    if (product - expansion).abs() > EXPANSION_AGREEMENT {
        return Err(Error::InconsistentExpansion { product, expansion });
    }
    Ok(product - 1.0 / k)
}

/// `P_k - (k+1) P_{k+1}` for `k = 1..d-1`.
pub fn check_pk_chain(s: &Spectrum) -> Result<Vec<f64>> {
    check_simplex_spectrum(s)?;
    let p = ElemSymPolys::from_values(s.eigenvalues())?;
    Ok((1..p.degree())
        .map(|k| p.get(k) - (k as f64 + 1.0) * p.get(k + 1))
        .collect())
}
