//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;

use qcstretch::analysis::{
    alternating_tail, calibrate_stretch_constant, check_pk_chain, distortion_report,
    estimate_exponent, predict_r_star, split_tail_check, stretching_lower_bound, ScaleLadder,
};
use qcstretch::composite::{eval_map, map_scale, weight, weight_decomposition};
use qcstretch::par::{map_indexed, Execution};
use qcstretch::sampling::{self, rng_stream};
use qcstretch::symmat::{eigen_sym, elem_sym_polys, spectral_norm, Spectrum};
use qcstretch::vector::{self, basis};
use qcstretch::{jac_map, LambdaSet, MapConfig};

const EXEC: Execution = Execution::Parallel;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn min(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}

fn singleton(d: usize, k: f64) -> MapConfig {
    MapConfig::new(LambdaSet::new(d, vec![vec![0.0; d]]).unwrap(), k).unwrap()
}

fn criterion_1() -> Outcome {
    let ladder = ScaleLadder::default();
    let mut worst_ratio = 0.0f64;
    let mut worst_slope = 0.0f64;
    for (i, &k) in [1.1, 2.0, 10.0].iter().enumerate() {
        for (j, &d) in [2usize, 3, 5].iter().enumerate() {
            let cfg = singleton(d, k);
            let stream = (i * 3 + j) as u64;
            let errs = map_indexed(EXEC, 1000, |s| {
                let mut rng = rng_stream(100 + stream, s as u64);
                let mut x = sampling::point_in_ball(&mut rng, d, 2.0);
                while vector::norm(&x) < 1e-3 {
                    x = sampling::point_in_ball(&mut rng, d, 2.0);
                }
                let rep = distortion_report(&cfg, &x).unwrap();
                (rep.ratio - k).abs() / k
            });
            worst_ratio = worst_ratio.max(max(errs));
            let u = basis(d, 0);
            let est = estimate_exponent(&cfg, &vec![0.0; d], &u, &ladder).unwrap();
            worst_slope = worst_slope.max((est.fitted_slope - 1.0 / k).abs());
        }
    }
    outcome(
        worst_ratio <= 1e-10 && worst_slope <= 1e-10,
        format!("max |ratio-K|/K = {worst_ratio:.2e} (tol 1e-10), max |slope-1/K| = {worst_slope:.2e} (tol 1e-10)"),
    )
}

fn criterion_2_configs() -> Vec<MapConfig> {
    let mut rng = sampling::rng(200);
    (0..20)
        .map(|i| {
            let d = [2, 3, 4][i % 3];
            let m = rng.random_range(1..=50);
            let k = rng.random_range(1.1..=10.0);
            sampling::map_config(&mut rng, d, m, k).unwrap()
        })
        .collect()
}

fn criterion_2(configs: &[MapConfig]) -> Outcome {
    #[derive(Default, Clone, Copy)]
    struct Worst {
        ratio: f64,
        det_gap: f64,
        op: f64,
        trace: f64,
        spec_lo: f64,
        spec_hi: f64,
    }
    let mut w = Worst {
        ratio: f64::NEG_INFINITY,
        det_gap: f64::INFINITY,
        op: f64::NEG_INFINITY,
        trace: 0.0,
        spec_lo: f64::INFINITY,
        spec_hi: f64::NEG_INFINITY,
    };
    let mut npoints = 0;
    for (ci, cfg) in configs.iter().enumerate() {
        let k = cfg.k();
        let alpha = cfg.alpha();
        let rows = map_indexed(EXEC, 10_000, |s| {
            let mut rng = rng_stream(201 + ci as u64, s as u64);
            let x = sampling::point_away_from(&mut rng, cfg.lambdas(), 2.0, 1e-9);
            let rep = distortion_report(cfg, &x).unwrap();
            let wd = weight_decomposition(cfg, &x).unwrap();
            let g = eigen_sym(&wd.normalized_jacobian(alpha)).unwrap();
            let det: f64 = g.eigenvalues().iter().product();
            let op = spectral_norm(g.eigenvalues());
            let b = rep.spectrum_b;
            Worst {
                ratio: rep.ratio / k,
                det_gap: det - 1.0 / k,
                op,
                trace: (wd.b().trace() - 1.0).abs(),
                spec_lo: b.min(),
                spec_hi: b.max(),
            }
        });
        npoints += rows.len();
        for r in rows {
            w.ratio = w.ratio.max(r.ratio);
            w.det_gap = w.det_gap.min(r.det_gap);
            w.op = w.op.max(r.op);
            w.trace = w.trace.max(r.trace);
            w.spec_lo = w.spec_lo.min(r.spec_lo);
            w.spec_hi = w.spec_hi.max(r.spec_hi);
        }
    }
    let pass = w.ratio <= 1.0 + 1e-9
        && w.det_gap >= -1e-11
        && w.op <= 1.0 + 1e-11
        && w.trace <= 1e-11
        && w.spec_lo >= -1e-11
        && w.spec_hi <= 1.0 + 1e-11;
    outcome(
        pass,
        format!(
            "{npoints} points: max ratio/K = {:.12}, min det(I-aB)-1/K = {:.2e}, max ||I-aB|| = {:.12}, max |tr B-1| = {:.2e}, spec(B) in [{:.2e}, {:.12}]",
            w.ratio, w.det_gap, w.op, w.trace, w.spec_lo, w.spec_hi
        ),
    )
}

fn subset_polys(sigma: &[f64]) -> Vec<f64> {
    let d = sigma.len();
    let mut p = vec![0.0; d + 1];
    for mask in 0u32..(1 << d) {
        let prod: f64 = (0..d)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| sigma[i])
            .product();
        p[mask.count_ones() as usize] += prod;
    }
    p
}

fn corners(d: usize) -> Vec<Vec<f64>> {
    let mut out = vec![basis(d, 0), vec![1.0 / d as f64; d]];
    let mut two = vec![0.0; d];
    two[0] = 0.5;
    two[1] = 0.5;
    out.push(two);
    let mut skew = vec![1e-12; d];
    skew[0] = 1.0 - 1e-12 * (d - 1) as f64;
    out.push(skew);
    out
}

fn criterion_3() -> Outcome {
    let mut chain = f64::INFINITY;
    let mut tail = f64::INFINITY;
    let mut enum_err = 0.0f64;
    let mut count = 0;
    for d in 2..=10usize {
        let mut spectra: Vec<Vec<f64>> = {
            let mut rng = sampling::rng(300 + d as u64);
            (0..10_000)
                .map(|_| sampling::simplex(&mut rng, d))
                .collect()
        };
        spectra.extend(corners(d));
        count += spectra.len();
        let rows = map_indexed(EXEC, spectra.len(), |i| {
            let sigma = &spectra[i];
            let s = Spectrum::diagonal(sigma).unwrap();
            let c = min(check_pk_chain(&s).unwrap());
            let t = min([0.1, 0.5, 0.9]
                .iter()
                .map(|&a| alternating_tail(&s, a).unwrap()));
            let e = if d <= 8 {
                let p = elem_sym_polys(&s).unwrap();
                let oracle = subset_polys(sigma);
                max((0..=d).map(|k| {
                    let diff = (p.get(k) - oracle[k]).abs();
                    if oracle[k] == 0.0 {
                        diff
                    } else {
                        diff / oracle[k].abs()
                    }
                }))
            } else {
                0.0
            };
            (c, t, e)
        });
        for (c, t, e) in rows {
            chain = chain.min(c);
            tail = tail.min(t);
            enum_err = enum_err.max(e);
        }
    }
    outcome(
        chain >= -1e-12 && tail >= -1e-12 && enum_err <= 1e-12,
        format!("{count} spectra: min chain slack = {chain:.2e}, min alternating tail = {tail:.2e}, max subset-oracle rel err = {enum_err:.2e}"),
    )
}

fn fd_jacobian(cfg: &MapConfig, x: &[f64], h: f64) -> Vec<f64> {
    let d = x.len();
    let mut out = vec![0.0; d * d];
    for j in 0..d {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let fp = eval_map(cfg, &xp);
        let fm = eval_map(cfg, &xm);
        for i in 0..d {
            out[i * d + j] = (fp[i] - fm[i]) / (xp[j] - xm[j]);
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let mut rng = sampling::rng(400);
    let mut worst = 0.0f64;
    for c in 0..5u64 {
        let d = [2, 3, 4, 3, 2][c as usize];
        let m = rng.random_range(2..=30);
        let k = rng.random_range(1.1..=10.0);
        let cfg = sampling::map_config(&mut rng, d, m, k).unwrap();
        let errs = map_indexed(EXEC, 1000, |s| {
            let mut rng = rng_stream(401 + c, s as u64);
            let x = sampling::point_away_from(&mut rng, cfg.lambdas(), 1.5, 0.05);
            let j = jac_map(&cfg, &x).unwrap();
            let fd = fd_jacobian(&cfg, &x, 1e-5);
            let num: f64 = j
                .entries()
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            num.sqrt() / j.frobenius_norm()
        });
        worst = worst.max(max(errs));
    }
    outcome(
        worst <= 1e-6,
        format!("5000 points: max ||DF - FD||_F / ||DF||_F = {worst:.2e} (tol 1e-6)"),
    )
}

fn criterion_5_config() -> MapConfig {
    let mut rng = sampling::rng(500);
    let set = sampling::lambda_set(&mut rng, 3, 10, 0.5, 0.05).unwrap();
    MapConfig::new(set, 2.0).unwrap()
}

fn calibrated_c(cfg: &MapConfig) -> f64 {
    calibrate_stretch_constant(
        &basis(cfg.dim(), 0),
        cfg.k(),
        (1e-6, 1e6),
        121,
        1024,
        501,
        EXEC,
    )
    .unwrap()
    .c
}

fn radii_below(r_star: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|_| 0.999 * r_star * 2f64.powf(-rng.random_range(0.0..30.0)))
        .collect()
}

fn criterion_5(cfg: &MapConfig, c: f64) -> Outcome {
    let ladder = ScaleLadder::dyadic(10, 40).unwrap();
    let u = basis(3, 0);
    let mut fits = Vec::new();
    let mut secants = Vec::new();
    let mut lower_ok = true;
    let mut lower_margin = f64::INFINITY;
    for n in 1..=cfg.lambdas().len() {
        let base = cfg.lambdas().center(n).unwrap().to_vec();
        let est = estimate_exponent(cfg, &base, &u, &ladder).unwrap();
        fits.push(est.fitted_slope);
        secants.push(est.deepest_secant().unwrap());
        let eps = weight(n + 2);
        let plan = predict_r_star(cfg, n, eps, c).unwrap();
        for r in radii_below(plan.r_star, 20, 502 + n as u64) {
            let chk = stretching_lower_bound(cfg, n, eps, r).unwrap();
            lower_ok &= chk.holds();
            lower_margin = lower_margin.min(chk.displacement / chk.bound - 1.0);
        }
    }
    let fit_ok: Vec<usize> = (0..fits.len())
        .filter(|&i| (fits[i] - 0.5).abs() > 0.05)
        .map(|i| i + 1)
        .collect();
    let sec_err = max(secants.iter().map(|s| (s - 0.5).abs()));
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|s| format!("{s:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        fit_ok.is_empty() && sec_err <= 0.02 && lower_ok,
        format!(
            "fitted slopes [{}] (tol 0.5+-0.05, out of range at n = {:?}); deepest secants [{}] (max err {sec_err:.2e}, tol 0.02); lower bound below r* {} (min displacement/bound - 1 = {lower_margin:.3e})",
            fmt(&fits),
            fit_ok,
            fmt(&secants),
            if lower_ok { "holds" } else { "violated" }
        ),
    )
}

fn criterion_6(cfg: &MapConfig, c: f64) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for n in 1..=cfg.lambdas().len() {
        let eps = weight(n + 2);
        let plan = predict_r_star(cfg, n, eps, c).unwrap();
        for r in radii_below(plan.r_star, 20, 600 + n as u64) {
            let t = split_tail_check(cfg, n, &plan, r).unwrap();
            let allowance = eps * (cfg.exponent() * r.ln()).exp();
            worst = worst.max(t.near.max(t.far) / allowance);
            count += 1;
        }
    }
    outcome(
        worst <= 1.0,
        format!("{count} radii: max tail / (eps r^(1/K)) = {worst:.4} (tol 1)"),
    )
}

fn criterion_7(configs: &[MapConfig]) -> Outcome {
    let mut worst = f64::INFINITY;
    for (ci, cfg) in configs.iter().enumerate() {
        let d = cfg.dim();
        let vals = map_indexed(EXEC, 100_000, |s| {
            let mut rng = rng_stream(700 + ci as u64, s as u64);
            let x = sampling::point_in_ball(&mut rng, d, 2.0);
            let y = sampling::point_in_ball(&mut rng, d, 2.0);
            let df = vector::sub(&eval_map(cfg, &x), &eval_map(cfg, &y));
            let dx = vector::sub(&x, &y);
            vector::dot(&df, &dx) / vector::dot(&dx, &dx)
        });
        worst = worst.min(min(vals));
    }
    outcome(
        worst > 0.0,
        format!("2000000 pairs: min <F(x)-F(y), x-y> / |x-y|^2 = {worst:.3e} (must be > 0)"),
    )
}

fn rel_err(a: &[f64], b: &[f64], scale: f64) -> f64 {
    vector::distance(a, b) / scale
}

fn criterion_8() -> Outcome {
    let trial = |kind: u64, s: usize| {
        let mut rng = rng_stream(800 + kind, s as u64);
        let d = rng.random_range(2..=4);
        let m = rng.random_range(1..=20);
        let k = rng.random_range(1.1..=10.0);
        let cfg = sampling::map_config(&mut rng, d, m, k).unwrap();
        let x = sampling::point_away_from(&mut rng, cfg.lambdas(), 1.5, 0.01);
        let fx = eval_map(&cfg, &x);
        let scale = map_scale(&cfg, &x);
        match kind {
            0 => {
                let t = sampling::point_in_ball(&mut rng, d, 1.0);
                let moved =
                    cfg.with_lambdas(cfg.lambdas().map_centers(|c| vector::add(c, &t)).unwrap());
                rel_err(&eval_map(&moved, &vector::add(&x, &t)), &fx, scale)
            }
            1 => {
                let q = sampling::orthogonal(&mut rng, d);
                let moved = cfg.with_lambdas(
                    cfg.lambdas()
                        .map_centers(|c| sampling::apply(&q, c))
                        .unwrap(),
                );
                rel_err(
                    &eval_map(&moved, &sampling::apply(&q, &x)),
                    &sampling::apply(&q, &fx),
                    scale,
                )
            }
            _ => {
                let c = 10f64.powf(rng.random_range(-1.0..1.0));
                let moved =
                    cfg.with_lambdas(cfg.lambdas().map_centers(|p| vector::scale(p, c)).unwrap());
                let want = vector::scale(&fx, c.powf(1.0 / k));
                rel_err(
                    &eval_map(&moved, &vector::scale(&x, c)),
                    &want,
                    scale * c.powf(1.0 / k),
                )
            }
        }
    };
    let t = max(map_indexed(EXEC, 1000, |s| trial(0, s)));
    let r = max(map_indexed(EXEC, 1000, |s| trial(1, s)));
    let c = max(map_indexed(EXEC, 1000, |s| trial(2, s)));
    outcome(
        t <= 1e-12 && r <= 1e-12 && c <= 1e-12,
        format!("max rel err: translation {t:.2e}, rotation {r:.2e}, scale {c:.2e} (tol 1e-12)"),
    )
}

/// The `qcs` binary next to this test's `deps/` directory, built on demand.
fn qcs_binary() -> Result<PathBuf, String> {
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let dir = exe
        .parent()
        .and_then(Path::parent)
        .ok_or("no target directory")?;
    let bin = dir.join(format!("qcs{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut cmd = Command::new(cargo);
        cmd.args(["build", "-p", "qcstretch", "--bin", "qcs"]);
        if dir.file_name().is_some_and(|n| n == "release") {
            cmd.arg("--release");
        }
        let status = cmd.status().map_err(|e| e.to_string())?;
        if !status.success() || !bin.exists() {
            return Err(format!("could not build {}", bin.display()));
        }
    }
    Ok(bin)
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"dim": 2, "K": 3.0, "lambdas": [[0.0, 0.0], [0.4, 0.1], [-0.2, 0.5], [0.1, -0.6]]}"#,
    )
    .unwrap();
    let exe = match qcs_binary() {
        Ok(p) => p,
        Err(e) => return outcome(false, e),
    };
    let run = |args: &[&str]| {
        let out = Command::new(&exe)
            .args(args)
            .arg("--config")
            .arg(&config)
            .args(["--seed", "9"])
            .output()
            .unwrap();
        (out.status.code(), out.stdout)
    };
    let verify = ["verify", "--samples", "500"];
    let grid = ["distortion-grid", "--grid", "-1,1,41"];
    let (c1, v1) = run(&verify);
    let (c2, v2) = run(&verify);
    let (g1c, g1) = run(&grid);
    let (g2c, g2) = run(&grid);
    let pass = c1 == Some(0)
        && c1 == c2
        && v1 == v2
        && g1c == Some(0)
        && g1c == g2c
        && g1 == g2
        && !v1.is_empty();
    outcome(
        pass,
        format!(
            "verify: exit {c1:?}/{c2:?}, {} bytes, identical = {}; distortion-grid: exit {g1c:?}/{g2c:?}, {} bytes, identical = {}",
            v1.len(),
            v1 == v2,
            g1.len(),
            g1 == g2
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let configs = criterion_2_configs();
    let c5 = criterion_5_config();
    let c = calibrated_c(&c5);
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("singleton equality family", Box::new(criterion_1)),
        ("distortion inequality", Box::new(|| criterion_2(&configs))),
        ("P_k chain and alternating tail", Box::new(criterion_3)),
        ("Jacobian vs finite differences", Box::new(criterion_4)),
        (
            "stretching exponent at the centers",
            Box::new(|| criterion_5(&c5, c)),
        ),
        (
            "tail bookkeeping below r*",
            Box::new(|| criterion_6(&c5, c)),
        ),
        ("monotonicity", Box::new(|| criterion_7(&configs))),
        ("equivariance", Box::new(criterion_8)),
        ("CLI determinism", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
