use std::io::{self, Write};

use crate::analysis::distortion_report;
use crate::composite::MapConfig;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::sampling;
use crate::stretch::ON_CENTER_GUARD;

use super::format_f64;

/// Largest dimension swept on a full Cartesian grid; above it the box is
/// sampled at random with the same total row count.
pub const MAX_CARTESIAN_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "axis bounds {lo},{hi} must be finite with lo < hi"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis resolution {n} must be at least 2"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.lo + ((self.hi - self.lo) * i as f64) / (self.n - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
    /// Drives the random sampling used above `MAX_CARTESIAN_DIM`.
    pub seed: u64,
}

impl GridSpec {
    pub fn row_count(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Sample point for row `idx`; the first axis varies slowest.
    fn point(&self, idx: usize) -> Vec<f64> {
        if self.axes.len() > MAX_CARTESIAN_DIM {
            let mut rng = sampling::rng_stream(self.seed, idx as u64);
            let lo: Vec<f64> = self.axes.iter().map(|a| a.lo).collect();
            let hi: Vec<f64> = self.axes.iter().map(|a| a.hi).collect();
            return sampling::point_in_box(&mut rng, &lo, &hi);
        }
        let mut rem = idx;
        let mut coords = vec![0.0; self.axes.len()];
        for (c, axis) in coords.iter_mut().zip(&self.axes).rev() {
            *c = axis.coordinate(rem % axis.n);
            rem /= axis.n;
        }
        coords
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMetrics {
    pub w: f64,
    pub op_norm: f64,
    pub det: f64,
    pub ratio: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    pub coords: Vec<f64>,
    /// `None` for samples on (within the guard of) a center.
    pub metrics: Option<FieldMetrics>,
    pub min_dist: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub dim: usize,
    pub spec: GridSpec,
    pub records: Vec<FieldRecord>,
}

impl FieldGrid {
    pub fn degenerate_rows(&self) -> usize {
        self.records.iter().filter(|r| r.metrics.is_none()).count()
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.metrics.map(|m| m.ratio))
            .reduce(f64::max)
    }
}

pub fn sweep_distortion(cfg: &MapConfig, spec: &GridSpec, exec: Execution) -> Result<FieldGrid> {
    if spec.axes.len() != cfg.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim(),
            got: spec.axes.len(),
        });
    }
    let records = par::map_indexed(exec, spec.row_count(), |idx| {
        let coords = spec.point(idx);
        let (_, min_dist) = cfg.lambdas().nearest(&coords);
        let metrics = if min_dist < ON_CENTER_GUARD {
            None
        } else {
            distortion_report(cfg, &coords).ok().map(|r| FieldMetrics {
                w: r.w,
                op_norm: r.op_norm,
                det: r.det,
                ratio: r.ratio,
                margin: r.margin,
            })
        };
        FieldRecord {
            coords,
            metrics,
            min_dist,
        }
    });
    Ok(FieldGrid {
        dim: cfg.dim(),
        spec: spec.clone(),
        records,
    })
}

pub fn write_field_csv<W: Write>(grid: &FieldGrid, mut out: W) -> io::Result<()> {
    let mut header: Vec<String> = (1..=grid.dim).map(|i| format!("x{i}")).collect();
    header.extend(["W", "op_norm", "det", "ratio", "margin", "min_dist"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for rec in &grid.records {
        let mut cols: Vec<String> = rec.coords.iter().map(|v| format_f64(*v)).collect();
        match rec.metrics {
            Some(m) => cols.extend([m.w, m.op_norm, m.det, m.ratio, m.margin].map(format_f64)),
            None => cols.extend(std::iter::repeat_n(String::new(), 5)),
        }
        cols.push(format_f64(rec.min_dist));
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}
