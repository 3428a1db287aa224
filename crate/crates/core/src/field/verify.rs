use serde::Serialize;

use crate::analysis::{
    alternating_tail, calibrate_stretch_constant, check_determinant_bound,
    check_operator_norm_bound, check_pk_chain, check_stretch_bound, distortion_report,
    estimate_exponent, predict_r_star, split_tail_check, stretching_lower_bound, ScaleLadder,
};
use crate::composite::{
    eval_map, jac_map, jac_map_series, map_increment, weight, weight_decomposition, LambdaSet,
    MapConfig, MIN_SEPARATION,
};
use crate::error::Result;
use crate::par::{self, Execution};
use crate::sampling;
use crate::symmat::eigen_sym;
use crate::vector;

use super::config::config_digest;

/// Sample counts and seed for [`run_verification_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    /// Random points for the pointwise spectral checks.
    pub samples: usize,
    /// Random pairs for the monotonicity check.
    pub pair_samples: usize,
    /// Points (at distance >= 0.05 from the centers) checked by finite differences.
    pub fd_samples: usize,
    /// Random directions in the stretch-constant calibration.
    pub calibration_directions: usize,
    /// Random radii below `r*` per center in the tail checks.
    pub tail_radii: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl SuiteOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            pair_samples: samples,
            fd_samples: samples.min(1000),
            calibration_directions: 256,
            tail_radii: 20,
            seed,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureWitness {
    pub sample: usize,
    pub coordinates: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    /// Smallest margin seen; negative (or zero for strict checks) means a violation.
    pub worst_margin: Option<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureWitness>,
}

/// Fitted stretching exponent at a center, reported for information only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterExponent {
    pub index: usize,
    pub fitted_slope: Option<f64>,
    pub deepest_secant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config_digest: String,
    pub seed: u64,
    pub dim: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub centers: usize,
    pub calibrated_c_star: f64,
    pub calibrated_c: f64,
    pub checks: Vec<CheckOutcome>,
    pub center_exponents: Vec<CenterExponent>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "config {} (d = {}, K = {}, M = {}), seed {}\ncalibrated C* = {:.6}, C = {:.6}\n",
            &self.config_digest[..12.min(self.config_digest.len())],
            self.dim,
            self.k,
            self.centers,
            self.seed,
            self.calibrated_c_star,
            self.calibrated_c
        );
        for c in &self.checks {
            let margin = c
                .worst_margin
                .map(|m| format!("{m:.3e}"))
                .unwrap_or_else(|| "n/a".into());
            out += &format!(
                "{} {:<28} worst_margin={:<11} samples={}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                margin,
                c.samples
            );
            if let Some(f) = &c.failure {
                out += &format!(
                    "     first failure at sample {}: {:?} ({})\n",
                    f.sample, f.coordinates, f.detail
                );
            }
        }
        for e in &self.center_exponents {
            if let Some(s) = e.fitted_slope {
                out += &format!(
                    "info lambda_{:<4} fitted slope {:.4}, deepest secant {:.4}\n",
                    e.index,
                    s,
                    e.deepest_secant.unwrap_or(f64::NAN)
                );
            }
        }
        out += if self.passed {
            "all checks passed\n"
        } else {
            "verification FAILED\n"
        };
        out
    }
}

/// Worst-margin accumulator; samples must be fed in index order so the
/// first recorded failure is the lowest failing index.
struct Tracker {
    name: &'static str,
    strict: bool,
    worst: Option<f64>,
    samples: usize,
    failure: Option<FailureWitness>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            strict: false,
            worst: None,
            samples: 0,
            failure: None,
        }
    }

    /// A margin of exactly zero counts as a violation.
    fn strict(name: &'static str) -> Self {
        Self {
            strict: true,
            ..Self::new(name)
        }
    }

    fn record(
        &mut self,
        sample: usize,
        coords: &[f64],
        margin: f64,
        detail: impl FnOnce() -> String,
    ) {
        self.samples += 1;
        let bad = margin.is_nan() || margin < 0.0 || (self.strict && margin == 0.0);
        if !margin.is_nan() {
            self.worst = Some(self.worst.map_or(margin, |w| w.min(margin)));
        }
        if bad && self.failure.is_none() {
            self.failure = Some(FailureWitness {
                sample,
                coordinates: coords.to_vec(),
                detail: detail(),
            });
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name.to_string(),
            pass: self.failure.is_none(),
            worst_margin: self.worst,
            samples: self.samples,
            failure: self.failure,
        }
    }
}

/// Per-point quantities for the spectral checks.
struct PointEval {
    x: Vec<f64>,
    eta_sum_dev: f64,
    unit_dev: f64,
    trace_dev: f64,
    b_min: f64,
    b_max: f64,
    opnorm_slack: f64,
    det_gap: std::result::Result<f64, String>,
    ratio: f64,
    normalized_min_eig: f64,
    pk_min_slack: std::result::Result<f64, String>,
    tail_min: std::result::Result<f64, String>,
    frames_rel: f64,
}

const TAIL_ALPHAS: [f64; 3] = [0.1, 0.5, 0.9];

fn eval_point(cfg: &MapConfig, x: Vec<f64>) -> Result<PointEval> {
    let wd = weight_decomposition(cfg, &x)?;
    let report = distortion_report(cfg, &x)?;
    let sb = &report.spectrum_b;
    let eta_sum: f64 = wd.eta().iter().sum();
    let unit_dev = wd
        .directions()
        .iter()
        .map(|w| (vector::norm(w) - 1.0).abs())
        .fold(0.0, f64::max);
    let normalized = eigen_sym(&wd.normalized_jacobian(cfg.alpha()))?;
    let det_gap = check_determinant_bound(sb, cfg.alpha(), cfg.k()).map_err(|e| e.to_string());
    let pk_min_slack = check_pk_chain(sb)
        .map(|s| s.into_iter().fold(f64::INFINITY, f64::min))
        .map_err(|e| e.to_string());
    let tail_min = TAIL_ALPHAS
        .iter()
        .chain(std::iter::once(&cfg.alpha()))
        .map(|&a| alternating_tail(sb, a))
        .try_fold(f64::INFINITY, |m, t| t.map(|t| m.min(t)))
        .map_err(|e| e.to_string());
    let decomposed = jac_map(cfg, &x)?;
    let series = jac_map_series(cfg, &x)?;
    Ok(PointEval {
        eta_sum_dev: (eta_sum - 1.0).abs(),
        unit_dev,
        trace_dev: (wd.b().trace() - 1.0).abs(),
        b_min: sb.min(),
        b_max: sb.max(),
        opnorm_slack: check_operator_norm_bound(&wd, cfg.alpha())?,
        det_gap,
        ratio: report.ratio,
        normalized_min_eig: normalized.min(),
        pk_min_slack,
        tail_min,
        frames_rel: decomposed.distance(&series) / series.frobenius_norm(),
        x,
    })
}

fn fd_relative_error(cfg: &MapConfig, x: &[f64]) -> Result<f64> {
    let d = cfg.dim();
    let analytic = jac_map(cfg, x)?;
    let h = 1e-5;
    let mut diff_sq = 0.0;
    for j in 0..d {
        let plus = eval_map(cfg, &vector::axpy(x, h, &vector::basis(d, j)));
        let minus = eval_map(cfg, &vector::axpy(x, -h, &vector::basis(d, j)));
        for i in 0..d {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            diff_sq += (fd - analytic.get(i, j)).powi(2);
        }
    }
    Ok(diff_sq.sqrt() / analytic.frobenius_norm())
}

fn distinct_centers_check(set: &LambdaSet) -> CheckOutcome {
    let mut t = Tracker::strict("lambda_centers_distinct");
    let c = set.centers();
    let mut sample = 0;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            let d = vector::distance(&c[i], &c[j]);
            t.record(sample, &c[j], d - MIN_SEPARATION, || {
                format!("lambda_{} and lambda_{} are {d:e} apart", i + 1, j + 1)
            });
            sample += 1;
        }
    }
    t.finish()
}

/// Runs every pointwise and multiscale check on `cfg`.
pub fn run_verification_suite(cfg: &MapConfig, opts: &SuiteOptions) -> Result<VerificationReport> {
    let exec = opts.exec;
    let d = cfg.dim();
    let k = cfg.k();
    let set = cfg.lambdas();
    let radius = set.bound() + 1.0;
    let mut checks = vec![distinct_centers_check(set)];

    // Pointwise spectral checks.
    let points: Vec<Vec<f64>> = {
        let mut rng = sampling::rng_stream(opts.seed, 1);
        (0..opts.samples)
            .map(|_| sampling::point_in_ball(&mut rng, d, radius))
            .collect()
    };
    let evals = par::map_slice(exec, &points, |x| eval_point(cfg, x.clone()));
    let mut eta = Tracker::new("eta_sum");
    let mut unit = Tracker::new("unit_directions");
    let mut trace = Tracker::new("trace_b");
    let mut b_range = Tracker::new("b_spectrum_range");
    let mut opn = Tracker::new("operator_norm_bound");
    let mut det = Tracker::new("determinant_bound");
    let mut ratio = Tracker::new("distortion_ratio");
    let mut pd = Tracker::strict("jacobian_positive_definite");
    let mut pk = Tracker::new("pk_chain");
    let mut tail = Tracker::new("alternating_tail");
    let mut frames = Tracker::new("jacobian_two_frames");
    for (i, ev) in evals.iter().enumerate() {
        let ev = match ev {
            Ok(ev) => ev,
            Err(e) => {
                // Only reachable when a sample lands on a center.
                let msg = e.to_string();
                eta.record(i, &points[i], f64::NAN, || msg);
                continue;
            }
        };
        let x = &ev.x;
        eta.record(i, x, 1e-12 - ev.eta_sum_dev, || {
            format!("|sum eta - 1| = {:e}", ev.eta_sum_dev)
        });
        unit.record(i, x, 1e-13 - ev.unit_dev, || {
            format!("||w_n| - 1| = {:e}", ev.unit_dev)
        });
        trace.record(i, x, 1e-11 - ev.trace_dev, || {
            format!("|tr B - 1| = {:e}", ev.trace_dev)
        });
        b_range.record(i, x, (ev.b_min + 1e-11).min(1.0 + 1e-11 - ev.b_max), || {
            format!("spectrum of B spans [{:e}, {}]", ev.b_min, ev.b_max)
        });
        opn.record(i, x, ev.opnorm_slack + 1e-11, || {
            format!("||I - alpha B|| = {}", 1.0 - ev.opnorm_slack)
        });
        match &ev.det_gap {
            Ok(g) => det.record(i, x, g + 1e-11, || {
                format!("det(I - alpha B) - 1/K = {g:e}")
            }),
            Err(m) => det.record(i, x, f64::NAN, || m.clone()),
        }
        ratio.record(i, x, k * (1.0 + 1e-9) - ev.ratio, || {
            format!("ratio = {} > K", ev.ratio)
        });
        pd.record(i, x, ev.normalized_min_eig, || {
            format!(
                "smallest eigenvalue of I - alpha B is {:e}",
                ev.normalized_min_eig
            )
        });
        match &ev.pk_min_slack {
            Ok(s) => pk.record(i, x, s + 1e-12, || format!("P_k - (k+1) P_(k+1) = {s:e}")),
            Err(m) => pk.record(i, x, f64::NAN, || m.clone()),
        }
        match &ev.tail_min {
            Ok(s) => tail.record(i, x, s + 1e-12, || format!("alternating tail = {s:e}")),
            Err(m) => tail.record(i, x, f64::NAN, || m.clone()),
        }
        frames.record(i, x, 1e-11 - ev.frames_rel, || {
            format!(
                "relative Frobenius gap between Jacobian forms = {:e}",
                ev.frames_rel
            )
        });
    }
    checks.extend(
        [
            eta, unit, trace, b_range, opn, det, ratio, pd, pk, tail, frames,
        ]
        .map(Tracker::finish),
    );

    // Finite differences away from the centers.
    let fd_points: Vec<Vec<f64>> = points
        .iter()
        .filter(|x| set.nearest(x).1 >= 0.05)
        .take(opts.fd_samples)
        .cloned()
        .collect();
    let fd = par::map_slice(exec, &fd_points, |x| fd_relative_error(cfg, x));
    let mut fd_t = Tracker::new("jacobian_finite_difference");
    for (i, (x, e)) in fd_points.iter().zip(&fd).enumerate() {
        let e = e.as_ref().map(|v| *v).unwrap_or(f64::NAN);
        fd_t.record(i, x, 1e-6 - e, || format!("relative error {e:e}"));
    }
    checks.push(fd_t.finish());

    // Monotonicity on random pairs.
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = {
        let mut rng = sampling::rng_stream(opts.seed, 2);
        (0..opts.pair_samples)
            .map(|_| {
                (
                    sampling::point_in_ball(&mut rng, d, radius),
                    sampling::point_in_ball(&mut rng, d, radius),
                )
            })
            .collect()
    };
    let mono = par::map_slice(exec, &pairs, |(x, y)| {
        let h = vector::sub(x, y);
        let inc = map_increment(cfg, y, &h);
        vector::dot(&inc, &h) / vector::dot(&h, &h)
    });
    let mut mono_t = Tracker::strict("monotonicity");
    for (i, ((x, y), m)) in pairs.iter().zip(&mono).enumerate() {
        let coords: Vec<f64> = x.iter().chain(y).copied().collect();
        mono_t.record(i, &coords, *m, || {
            format!("<F(x) - F(y), x - y> / |x - y|^2 = {m:e}")
        });
    }
    checks.push(mono_t.finish());

    // Exponent estimates with known answers.
    let ladder = ScaleLadder::default();
    let mut single_t = Tracker::new("singleton_exponent");
    let origin = vec![0.0; d];
    let singleton = MapConfig::new(LambdaSet::new(d, vec![origin.clone()])?, k)?;
    let e = estimate_exponent(&singleton, &origin, &vector::basis(d, 0), &ladder)?;
    let dev = (e.fitted_slope - 1.0 / k).abs().max(e.residual);
    single_t.record(0, &origin, 1e-10 - dev, || {
        format!("slope {} residual {:e}", e.fitted_slope, e.residual)
    });
    checks.push(single_t.finish());

    let bilip_ladder = ScaleLadder::dyadic(10, 30)?;
    let bilip_points: Vec<(Vec<f64>, Vec<f64>)> = {
        let mut rng = sampling::rng_stream(opts.seed, 3);
        (0..16)
            .map(|_| {
                (
                    sampling::point_away_from(&mut rng, set, radius, 0.1),
                    sampling::unit_vector(&mut rng, d),
                )
            })
            .collect()
    };
    let bilip = par::map_slice(exec, &bilip_points, |(x, u)| {
        estimate_exponent(cfg, x, u, &bilip_ladder).map(|e| e.fitted_slope)
    });
    let mut bilip_t = Tracker::new("bilipschitz_exponent");
    for (i, ((x, _), s)) in bilip_points.iter().zip(&bilip).enumerate() {
        let s = s.as_ref().map(|v| *v).unwrap_or(f64::NAN);
        bilip_t.record(i, x, 1e-3 - (s - 1.0).abs(), || format!("fitted slope {s}"));
    }
    checks.push(bilip_t.finish());

    // Stretch constant calibration and its scale invariance.
    let e1 = vector::basis(d, 0);
    let cal = calibrate_stretch_constant(
        &e1,
        k,
        (1e-6, 1e6),
        121,
        opts.calibration_directions,
        opts.seed,
        exec,
    )?;
    let scaled = calibrate_stretch_constant(
        &vector::scale(&e1, 7.25),
        k,
        (1e-6, 1e6),
        121,
        opts.calibration_directions,
        opts.seed,
        exec,
    )?;
    let mut cal_t = Tracker::new("stretch_constant_scale_invariance");
    let rel = (scaled.c_star - cal.c_star).abs() / cal.c_star;
    cal_t.record(0, &e1, 0.01 - rel, || {
        format!("C* = {} vs {} after rescaling", cal.c_star, scaled.c_star)
    });
    checks.push(cal_t.finish());

    // Calibrated bound on the actual center pairs, direction e1.
    let m = set.len();
    let pair_idx: Vec<(usize, usize)> = (1..=m)
        .flat_map(|n| (1..=m).filter(move |&j| j != n).map(move |j| (n, j)))
        .collect();
    let radii: Vec<f64> = (0..21).map(|i| 10f64.powf(-8.0 + 0.5 * i as f64)).collect();
    let slacks = par::map_slice(exec, &pair_idx, |&(n, j)| {
        let rel = vector::sub(&set.centers()[j - 1], &set.centers()[n - 1]);
        radii
            .iter()
            .map(|&r| {
                check_stretch_bound(&rel, k, r, &e1, cal.c)
                    .map(|rep| rep.slack / rep.reference)
                    .unwrap_or(f64::NAN)
            })
            .fold(f64::INFINITY, f64::min)
    });
    let mut sb_t = Tracker::new("stretch_bound_slack");
    for (i, (&(n, j), s)) in pair_idx.iter().zip(&slacks).enumerate() {
        sb_t.record(i, &set.centers()[j - 1], *s, || {
            format!("bound C min(r^(1/K), r |lambda|^(1/K-1)) violated for centers {n}, {j}")
        });
    }
    checks.push(sb_t.finish());

    // Tail bookkeeping and the stretching lower bound below r*.
    let tail_rows = par::map_indexed(exec, m, |i| -> Result<Vec<(f64, f64, f64)>> {
        let n = i + 1;
        let eps = weight(n + 2);
        let plan = predict_r_star(cfg, n, eps, cal.c)?;
        let top = if plan.unconstrained {
            2f64.powi(-10)
        } else {
            plan.r_star * 0.999
        };
        let mut rng = sampling::rng_stream(opts.seed, 100 + n as u64);
        let mut rows = Vec::with_capacity(opts.tail_radii);
        for _ in 0..opts.tail_radii {
            let r = top * 2f64.powf(-20.0 * rand::Rng::random::<f64>(&mut rng));
            if r <= 1e-300 || r.is_nan() {
                continue;
            }
            let sums = split_tail_check(cfg, n, &plan, r)?;
            let scale = (cfg.exponent() * r.ln()).exp();
            let lb = stretching_lower_bound(cfg, n, eps, r)?;
            rows.push((
                r,
                1.0 - sums.near.max(sums.far) / (eps * scale),
                (lb.displacement - lb.bound) / scale,
            ));
        }
        Ok(rows)
    });
    let mut tail_t = Tracker::new("tail_bookkeeping");
    let mut lower_t = Tracker::strict("stretching_lower_bound");
    let mut sample = 0;
    for (i, rows) in tail_rows.into_iter().enumerate() {
        let center = &set.centers()[i];
        for (r, tm, lm) in rows? {
            tail_t.record(sample, center, tm, || {
                format!("lambda_{} at r = {r:e}", i + 1)
            });
            lower_t.record(sample, center, lm, || {
                format!("lambda_{} at r = {r:e}", i + 1)
            });
            sample += 1;
        }
    }
    checks.extend([tail_t.finish(), lower_t.finish()]);

    let center_exponents = par::map_indexed(exec, m, |i| {
        let est = estimate_exponent(cfg, &set.centers()[i], &e1, &ladder).ok();
        CenterExponent {
            index: i + 1,
            fitted_slope: est.as_ref().map(|e| e.fitted_slope),
            deepest_secant: est.as_ref().and_then(|e| e.deepest_secant()),
        }
    });

    let passed = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        config_digest: config_digest(cfg),
        seed: opts.seed,
        dim: d,
        k,
        centers: m,
        calibrated_c_star: cal.c_star,
        calibrated_c: cal.c,
        checks,
        center_exponents,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_opts(seed: u64) -> SuiteOptions {
        SuiteOptions {
            samples: 300,
            pair_samples: 300,
            fd_samples: 50,
            calibration_directions: 32,
            tail_radii: 5,
            seed,
            exec: Execution::Parallel,
        }
    }

    #[test]
    fn singleton_passes_with_zero_ratio_margin() {
        let cfg = MapConfig::new(LambdaSet::new(2, vec![vec![0.0, 0.0]]).unwrap(), 2.0).unwrap();
        let rep = run_verification_suite(&cfg, &small_opts(1)).unwrap();
        assert!(rep.passed, "{}", rep.render_text());
        assert_eq!(rep.exit_code(), 0);
        let ratio = rep
            .checks
            .iter()
            .find(|c| c.name == "distortion_ratio")
            .unwrap();
        assert!(ratio.worst_margin.unwrap() < 1e-8);
    }

    #[test]
    fn duplicate_centers_fail_the_suite() {
        let set = LambdaSet::new_unchecked(2, vec![vec![0.1, 0.0], vec![0.5, 0.5], vec![0.1, 0.0]])
            .unwrap();
        let cfg = MapConfig::new(set, 2.0).unwrap();
        let rep = run_verification_suite(&cfg, &small_opts(2)).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.exit_code(), 1);
        let bad: Vec<&str> = rep.failed_checks().map(|c| c.name.as_str()).collect();
        assert!(bad.contains(&"lambda_centers_distinct"));
        let f = rep.checks[0].failure.as_ref().unwrap();
        assert_eq!(f.coordinates, vec![0.1, 0.0]);
    }

    #[test]
    fn json_and_exit_code_agree() {
        let mut rng = sampling::rng(4);
        let cfg = sampling::map_config(&mut rng, 3, 6, 1.5).unwrap();
        let rep = run_verification_suite(&cfg, &small_opts(3)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        let any_fail = v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .any(|c| c["pass"] == false);
        assert_eq!(any_fail, rep.exit_code() != 0);
        assert!(rep.passed, "{}", rep.render_text());
    }
}
