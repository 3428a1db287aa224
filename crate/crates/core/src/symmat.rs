//! Dense symmetric matrices of small order and their spectra.
//!
//! Everything downstream (the stretch Jacobian, the weight matrix `B(x)`,
//! `I - alpha B(x)`) is symmetric, so the spectral quantities used by the
//! distortion checks are computed in a single frame: a cyclic Jacobi
//! eigendecomposition. Determinant and operator norm are read off the
//! eigenvalues.

use crate::error::{Error, Result};

/// Relative off-diagonal mass at which Jacobi iteration stops.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
/// Hard cap on cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Largest tolerated asymmetry, relative to the Frobenius norm.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-12;

/// A dense symmetric `d x d` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
    asymmetry: f64,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, symmetrizing by averaging.
    ///
    /// The Frobenius norm of the antisymmetric part is kept as
    /// [`SymMatrix::asymmetry`]; it must not exceed
    /// `ASYMMETRY_TOLERANCE * ||M||_F`.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        let mut sym = vec![0.0; dim * dim];
        let mut asym_sq = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                sym[i * dim + j] = 0.5 * (a + b);
                let h = 0.5 * (a - b);
                asym_sq += h * h;
            }
        }
        let m = Self {
            dim,
            entries: sym,
            asymmetry: asym_sq.sqrt(),
        };
        let limit = ASYMMETRY_TOLERANCE * m.frobenius_norm();
        if m.asymmetry > limit {
            return Err(Error::Asymmetric {
                residual: m.asymmetry,
                limit,
            });
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut flat = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::from_row_major(dim, &flat)
    }

    /// Builds a matrix from the upper triangle `f(i, j)` with `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite("matrix entries"));
                }
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Ok(Self {
            dim,
            entries,
            asymmetry: 0.0,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |_, _| 0.0)
    }

    /// Rank-one matrix `u u^T`.
    pub fn outer(u: &[f64]) -> Result<Self> {
        Self::from_fn(u.len(), |i, j| u[i] * u[j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::vector::norm(&self.entries)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| crate::vector::dot(&self.entries[i * self.dim..(i + 1) * self.dim], v))
            .collect()
    }

    /// `y^T M y`.
    pub fn quadratic_form(&self, y: &[f64]) -> f64 {
        crate::vector::dot(y, &self.mul_vec(y))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * c).collect(),
            asymmetry: self.asymmetry * c.abs(),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &SymMatrix, b: f64) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            asymmetry: 0.0,
        })
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &SymMatrix) -> f64 {
        let diff: Vec<f64> = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| x - y)
            .collect();
        crate::vector::norm(&diff)
    }

    pub fn eigen(&self) -> Result<Spectrum> {
        eigen_sym(self)
    }

    pub fn operator_norm(&self) -> Result<f64> {
        operator_norm(self)
    }

    pub fn determinant(&self) -> Result<f64> {
        determinant(self)
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    dim: usize,
    eigenvalues: Vec<f64>,
    /// Row-major; column `j` is the eigenvector for `eigenvalues[j]`.
    eigenvectors: Vec<f64>,
}

impl Spectrum {
    /// Spectrum of the diagonal matrix with the given entries.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("spectrum"));
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut eigenvectors = vec![0.0; dim * dim];
        for (col, &src) in order.iter().enumerate() {
            eigenvectors[src * dim + col] = 1.0;
        }
        Ok(Self {
            dim,
            eigenvalues: order.iter().map(|&i| values[i]).collect(),
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[self.dim - 1]
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.eigenvectors[i * self.dim + j])
            .collect()
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `V diag(sigma) V^T`.
    pub fn reconstruct(&self) -> SymMatrix {
        let d = self.dim;
        let v = &self.eigenvectors;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let s: f64 = (0..d)
                    .map(|k| v[i * d + k] * self.eigenvalues[k] * v[j * d + k])
                    .sum();
                out[i * d + j] = s;
                out[j * d + i] = s;
            }
        }
        SymMatrix {
            dim: d,
            entries: out,
            asymmetry: 0.0,
        }
    }

    /// Spectrum of `a I + b M` given the spectrum of `M`, sharing eigenvectors.
    pub fn affine(&self, a: f64, b: f64) -> Spectrum {
        let values: Vec<f64> = self.eigenvalues.iter().map(|s| a + b * s).collect();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
        let mut eigenvectors = vec![0.0; self.dim * self.dim];
        for (col, &src) in order.iter().enumerate() {
            for i in 0..self.dim {
                eigenvectors[i * self.dim + col] = self.eigenvectors[i * self.dim + src];
            }
        }
        Spectrum {
            dim: self.dim,
            eigenvalues: order.iter().map(|&i| values[i]).collect(),
            eigenvectors,
        }
    }
}

/// Elementary symmetric polynomials `P_0..P_d` of a list of eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct ElemSymPolys {
    values: Vec<f64>,
}

impl ElemSymPolys {
    /// Multiplies out `prod (1 + sigma_i t)` left to right.
    pub fn from_values(sigma: &[f64]) -> Result<Self> {
        if !sigma.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("spectrum"));
        }
        let d = sigma.len();
        let mut p = vec![0.0; d + 1];
        p[0] = 1.0;
        for (i, &s) in sigma.iter().enumerate() {
            for k in (1..=i + 1).rev() {
                p[k] += s * p[k - 1];
            }
        }
        Ok(Self { values: p })
    }

    /// `P_k`; zero beyond the degree.
    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn eigen_sym(m: &SymMatrix) -> Result<Spectrum> {
    let d = m.dim;
    if !m.entries.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    let mut a = m.entries.clone();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let target = JACOBI_TOLERANCE * m.frobenius_norm();

    let off_diagonal = |a: &[f64]| {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    acc += a[i * d + j] * a[i * d + j];
                }
            }
        }
        acc.sqrt()
    };

    let mut sweeps = 0;
    while off_diagonal(&a) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..d - 1 {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = if tau.abs() > 1e150 {
                    0.5 / tau
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let diag: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| diag[y].total_cmp(&diag[x]));
    let mut eigenvectors = vec![0.0; d * d];
    for (col, &src) in order.iter().enumerate() {
        for i in 0..d {
            eigenvectors[i * d + col] = v[i * d + src];
        }
    }
    Ok(Spectrum {
        dim: d,
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        eigenvectors,
    })
}

/// Largest absolute eigenvalue, the Euclidean operator norm of a symmetric matrix.
pub fn operator_norm(m: &SymMatrix) -> Result<f64> {
    let s = eigen_sym(m)?;
    Ok(spectral_norm(s.eigenvalues()))
}

pub fn spectral_norm(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Product of eigenvalues.
pub fn determinant(m: &SymMatrix) -> Result<f64> {
    let s = eigen_sym(m)?;
    Ok(s.eigenvalues().iter().product())
}

pub fn elem_sym_polys(s: &Spectrum) -> Result<ElemSymPolys> {
    ElemSymPolys::from_values(s.eigenvalues())
}
