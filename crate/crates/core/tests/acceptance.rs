//! Acceptance suite: prints one PASS/FAIL line per criterion and exits with
//! status 1 if any criterion fails.

mod common;

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use common::quadrature::reg_incomplete_beta_quadrature;
use common::{lp_oracle, perturb_pure_row, planted_theta, random_interaction, random_lp, LpFlavor};
use splp::evaluation::entrywise_error;
use splp::harness::sweep::{run_sweep, SweepConfig, SweepVariable};
use splp::linalg::{condition_number, DenseMatrix};
use splp::lp::{simplex_core, solve_anchor_lp, LpProblem, SimplexOptions};
use splp::mmsb::build_probability_matrix;
use splp::rng::stream;
use splp::spa::{successive_projection, DEFAULT_ZERO_TOL};
use splp::theory::{
    compute_bounds, reg_incomplete_beta, run_concentration_check, EpsilonChoice, MinN,
};
use splp::{recover_all, LpStatus, MmsbParams, RecoveryMode, ThetaMatrix};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Exactly pure rows, exact P: SP+LP error ≤ 1e-6 in under 1 s per instance.
fn noiseless_exact_recovery() -> Check {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for seed in 0..20u64 {
        let mut rng = stream(1001, seed);
        let b = random_interaction(3, &mut rng);
        let theta = planted_theta(30, 3, 0.5, &[4, 11, 23], 0.8, &mut rng);
        let theta = ThetaMatrix::new(theta).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let p = build_probability_matrix(&theta, &b).map_err(|e| e.to_string())?;
        let rec = recover_all(&p, 3, RecoveryMode::Exact, &mut rng).map_err(|e| e.to_string())?;
        let err = entrywise_error(&rec.theta_hat, theta.as_matrix())
            .map_err(|e| e.to_string())?
            .error;
        slowest = slowest.max(start.elapsed());
        worst = worst.max(err);
        ensure(err <= 1e-6, || format!("seed {seed}: error {err:e}"))?;
    }
    ensure(slowest < Duration::from_secs(1), || format!("slowest instance {slowest:?}"))?;
    Ok(format!("20 instances, max error {worst:.2e}, slowest {slowest:.2?}"))
}

/// Anchored LP at an η-near-pure row: ‖x*/‖x*‖_∞ − θ_j‖_∞ ≤ 4η(2√2k+1).
fn lp_error_bound() -> Check {
    let n = 200;
    let mut worst_ratio = 0.0f64;
    let mut trials = 0;
    for (ci, &k) in [2usize, 3].iter().enumerate() {
        for (ei, &eta) in [0.005, 0.01, 0.02].iter().enumerate() {
            let bound = 4.0 * eta * (2.0 * std::f64::consts::SQRT_2 * k as f64 + 1.0);
            for t in 0..100u64 {
                let mut rng = stream(3003, ((ci * 3 + ei) as u64) << 32 | t);
                // Redraw until the bound's hypothesis on c_min/c_max holds.
                let (theta, b) = loop {
                    let b = random_interaction(k, &mut rng);
                    let pure: Vec<usize> = (0..k).collect();
                    let mut theta = planted_theta(n, k, 0.5, &pure, 1.0, &mut rng);
                    for s in 0..k {
                        perturb_pure_row(&mut theta, s, s, eta, &mut rng);
                    }
                    let c: Vec<f64> = (0..k).map(|j| theta.column(j).iter().sum()).collect();
                    let ratio = c.iter().cloned().fold(f64::INFINITY, f64::min)
                        / c.iter().cloned().fold(0.0, f64::max);
                    if ratio > 0.5 && eta < (ratio - 0.5) / (4.0 * k as f64) {
                        break (theta, b);
                    }
                };
                // range(ΘB) = range(P) for P = ΘBΘᵀ with Θ of full column rank.
                let basis = theta.matmul(&b).map_err(|e| e.to_string())?;
                for j in 0..k {
                    let prob = LpProblem::new(&basis, j).map_err(|e| e.to_string())?;
                    let sol = solve_anchor_lp(&prob).map_err(|e| e.to_string())?;
                    ensure(sol.status == LpStatus::Optimal, || {
                        format!("k={k} eta={eta} trial {t} column {j}: {:?}", sol.status)
                    })?;
                    let scale = sol.x_star.iter().cloned().fold(0.0, f64::max);
                    let err = (0..n)
                        .map(|i| (sol.x_star[i] / scale - theta.get(i, j)).abs())
                        .fold(0.0, f64::max);
                    worst_ratio = worst_ratio.max(err / bound);
                    ensure(err <= bound, || {
                        format!("k={k} eta={eta} trial {t} column {j}: error {err:e} > {bound:e}")
                    })?;
                }
                trials += 1;
            }
        }
    }
    Ok(format!("{trials}/{trials} trials within bound, max error/bound {worst_ratio:.3}"))
}

/// SPA on exact P with ‖Δ‖_max below the threshold: the selected rows are
/// within 40√2·κ₀²·‖Δ‖_max of the identity up to a permutation.
fn spa_error_bound() -> Check {
    let (n, k) = (200, 3);
    let limit = (1.0 / ((k - 1) as f64).sqrt()).min(0.5) / (2.0 * std::f64::consts::SQRT_2);
    let mut worst_ratio = 0.0f64;
    let trials = 50;
    for t in 0..trials as u64 {
        let mut rng = stream(2002, t);
        let b = random_interaction(k, &mut rng);
        let pure = [17usize, 88, 150];
        let base = planted_theta(n, k, 0.5, &pure, 1.0, &mut rng);
        let mut eps_hat = 1e-2;
        let (theta, delta, kappa0) = loop {
            let mut theta = base.clone();
            for (s, &i) in pure.iter().enumerate() {
                perturb_pure_row(&mut theta, i, s, eps_hat, &mut rng);
            }
            let kappa0 = condition_number(&theta.matmul(&b).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            // ‖Δ‖_max: for each corner, the best approximating row of Θ.
            let delta = (0..k)
                .map(|j| {
                    (0..n)
                        .map(|p| {
                            (0..k)
                                .map(|s| (theta.get(p, s) - f64::from(u8::from(s == j))).abs())
                                .fold(0.0, f64::max)
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            if delta < limit / (kappa0 * (1.0 + 80.0 * kappa0 * kappa0)) {
                break (theta, delta, kappa0);
            }
            eps_hat *= 0.5;
        };
        let theta = ThetaMatrix::new(theta).map_err(|e| e.to_string())?;
        let p = build_probability_matrix(&theta, &b).map_err(|e| e.to_string())?;
        let spa = successive_projection(p.adjacency(), k, DEFAULT_ZERO_TOL).map_err(|e| e.to_string())?;
        ensure(spa.indices.len() == k, || format!("trial {t}: SPA stopped early"))?;
        let selected = DenseMatrix::from_fn(k, k, |r, c| theta.as_matrix().get(spa.indices[r], c));
        // min_Π ‖ΠX − I‖_max = min_Π ‖X − ΠᵀI‖_max: a column matching against I.
        let err = entrywise_error(&selected, &DenseMatrix::identity(k))
            .map_err(|e| e.to_string())?
            .error;
        let bound = 40.0 * std::f64::consts::SQRT_2 * kappa0 * kappa0 * delta;
        worst_ratio = worst_ratio.max(err / bound);
        ensure(err <= bound, || format!("trial {t}: {err:e} > {bound:e}"))?;
    }
    Ok(format!("{trials}/{trials} trials within bound, max error/bound {worst_ratio:.3}"))
}

/// Dense revised simplex vs vertex enumeration on 200 random LPs.
fn simplex_oracle() -> Check {
    let mut rng = stream(4004, 0);
    let flavors = [LpFlavor::Bounded, LpFlavor::Infeasible, LpFlavor::Free];
    let mut counts = [0usize; 3];
    for t in 0..200 {
        let (a, b, c) = random_lp(&mut rng, flavors[t % 3]);
        let (status, obj) = lp_oracle(&a, &b, &c);
        let got = simplex_core(&a, &b, &c, &SimplexOptions::default()).map_err(|e| e.to_string())?;
        ensure(got.status == status, || format!("LP {t}: {:?} vs oracle {status:?}", got.status))?;
        match status {
            LpStatus::Optimal => {
                counts[0] += 1;
                ensure((got.objective - obj).abs() <= 1e-7 * obj.abs().max(1.0), || {
                    format!("LP {t}: objective {} vs oracle {obj}", got.objective)
                })?
            }
            LpStatus::Infeasible => counts[1] += 1,
            LpStatus::Unbounded => counts[2] += 1,
        }
    }
    Ok(format!(
        "200/200 agree ({} optimal, {} infeasible, {} unbounded)",
        counts[0], counts[1], counts[2]
    ))
}

/// Concentration lemmas at n = 5000, k = 3, α = 0.5 over 100 trials.
fn concentration() -> Check {
    let params = MmsbParams::new(5000, 3, 0.5, DenseMatrix::identity(3)).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let r = run_concentration_check(&params, 100, 5005).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(r.c_vector_violations == 0, || format!("{} c_j violations", r.c_vector_violations))?;
    ensure(r.c_ratio_violations == 0, || format!("{} c ratio violations", r.c_ratio_violations))?;
    ensure(r.theta_norm_violations == 0, || format!("{} ‖Θ‖ violations", r.theta_norm_violations))?;
    ensure(r.all_within_bounds(), || format!("violation rates exceed bounds: {r:?}"))?;
    ensure(r.max_c_sum_error < 1e-8, || format!("Σc ≠ n: {}", r.max_c_sum_error))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "0 violations in 100 trials (p1 = {:.2e}, p2 = {:.2e}), {elapsed:.2?}",
        r.bound_probabilities.p1, r.bound_probabilities.p2
    ))
}

/// min_n = 299 for the closed-form case; incomplete beta vs quadrature.
fn bound_calculator() -> Check {
    let params = MmsbParams::new(1000, 2, 1.0, DenseMatrix::identity(2)).map_err(|e| e.to_string())?;
    let t = compute_bounds(&params, 0.1, EpsilonChoice::Value(0.01)).map_err(|e| e.to_string())?;
    ensure(t.min_n == MinN::Finite(299), || format!("min_n = {}", t.min_n))?;
    let shapes = [(0.5, 1.0), (0.5, 2.5), (2.0, 0.7), (1.5, 1.5), (4.0, 9.0)];
    let xs = [0.01, 0.05, 0.15, 0.3, 0.45, 0.55, 0.7, 0.85, 0.95, 0.99];
    let mut worst = 0.0f64;
    for &(a, b) in &shapes {
        for &x in &xs {
            let got = reg_incomplete_beta(x, a, b).map_err(|e| e.to_string())?;
            let want = reg_incomplete_beta_quadrature(x, a, b);
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 1e-10, || format!("I_{x}({a},{b}) = {got} vs {want}"))?;
        }
    }
    Ok(format!("min_n = 299; 50-point grid max deviation {worst:.1e}"))
}

/// Mean error strictly decreases over n ∈ {500, 1000, 2000}.
fn error_trend_in_n() -> Check {
    let mut cfg = SweepConfig::new(SweepVariable::N, vec![500.0, 1000.0, 2000.0]);
    cfg.repeats = 10;
    cfg.base_seed = 6006;
    let start = Instant::now();
    let records = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for r in &records {
        ensure(r.failed_trials() == 0, || format!("n = {}: {} failed trials", r.value, r.failed_trials()))?;
    }
    let means: Vec<f64> = records.iter().map(|r| r.mean_error).collect();
    ensure(means.windows(2).all(|w| w[1] < w[0]), || format!("means not decreasing: {means:?}"))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "mean errors {:.4} > {:.4} > {:.4}, {elapsed:.2?}",
        means[0], means[1], means[2]
    ))
}

/// Every CLI output written with a fixed seed is byte-identical on rerun.
fn cli_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let run = |args: &[&str]| -> std::result::Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_splp"))
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr))
        })?;
        Ok(out.stdout)
    };
    let mut files = 0;
    for round in ["a", "b"] {
        let g = path(&format!("g_{round}.tsv"));
        let th = path(&format!("t_{round}.csv"));
        run(&["generate", "--n", "200", "--seed", "9", "--out", &g, "--theta-out", &th])?;
        run(&["recover", "--in", &g, "--k", "3", "--seed", "9", "--out", &path(&format!("r_{round}.csv"))])?;
        run(&[
            "sweep", "--variable", "alpha", "--grid", "0.3,0.5", "--n", "300", "--repeats", "3",
            "--seed", "9", "--out", &path(&format!("s_{round}.csv")),
        ])?;
        run(&["ppi", "--in", &g, "--k", "3", "--seed", "9", "--out", &path(&format!("c_{round}.txt"))])?;
        let conc = run(&["conc-check", "--n", "1000", "--trials", "5", "--seed", "9"])?;
        fs::write(path(&format!("k_{round}.txt")), conc).map_err(|e| e.to_string())?;
    }
    for stem in ["g", "t", "r", "s", "c", "k"] {
        let ext = match stem {
            "g" => "tsv",
            "c" | "k" => "txt",
            _ => "csv",
        };
        let a = fs::read(path(&format!("{stem}_a.{ext}"))).map_err(|e| e.to_string())?;
        let b = fs::read(path(&format!("{stem}_b.{ext}"))).map_err(|e| e.to_string())?;
        ensure(!a.is_empty() && a == b, || format!("{stem}.{ext} differs between runs"))?;
        files += 1;
    }
    Ok(format!("{files} output files byte-identical across reruns"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("noiseless exact recovery", noiseless_exact_recovery),
        ("LP recovery error bound", lp_error_bound),
        ("SPA anchor error bound", spa_error_bound),
        ("simplex oracle equivalence", simplex_oracle),
        ("concentration", concentration),
        ("bound calculator", bound_calculator),
        ("error decreases with n", error_trend_in_n),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
