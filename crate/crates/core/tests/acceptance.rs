//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{blue, log_lerp, max_abs, oracle_sigma, spread_points};
use levmirror::gaussian::{reflect, uncertainty_min_eigenvalue};
use levmirror::linearization::{stability_cell, CellStatus, LinearizedModel};
use levmirror::operating_point::OperatingPoint;
use levmirror::params::SystemParams;
use levmirror::steady_state::{
    residual, solve_branches, threshold_power, threshold_power_bisection, BranchLabel,
};
use levmirror::sweep::{
    entanglement_peaks, run_entanglement_sweep, Status, SweepConfig, DEFAULT_GAMMA_GRID, DEFAULT_KAPPA_GRID,
};
use levmirror::Error;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| log_lerp(lo, hi, k as f64 / (n - 1) as f64)).collect()
}

fn steady_state_residuals() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for p in log_grid(6e-4, 1.0, 100) {
        let params = SystemParams::paper().with_p_tilde(p);
        let (b1, b2) = solve_branches(&params).expect("steady state above threshold");
        for b in [b1, b2] {
            worst = worst.max(residual(&b, &params).unwrap().max_abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst < 1e-10 && secs < 1.0,
        format!("max normalized residual {worst:.2e} (< 1e-10) over 100 powers x 2 branches, {secs:.3} s (< 1 s)"),
    )
}

fn detuning_signs() -> Outcome {
    let t = Instant::now();
    let omega_l = SystemParams::paper().derived().unwrap().omega_l;
    let mut kappas = vec![SystemParams::paper().kappa];
    kappas.extend(log_grid(1e-9, 1e-6, 31).into_iter().map(|r| r * omega_l));
    let (mut checked, mut below, mut wrong) = (0, 0, 0);
    for p in log_grid(6e-4, 1.0, 100) {
        for &k in &kappas {
            match solve_branches(&SystemParams::paper().with_p_tilde(p).with_kappa(k)) {
                Ok((b1, b2)) => {
                    checked += 1;
                    if !(b1.delta < 0.0 && b2.delta > 0.0) {
                        wrong += 1;
                    }
                }
                Err(Error::NoRealSteadyState { .. }) => below += 1,
                Err(e) => panic!("{e}"),
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        wrong == 0 && checked > 0 && secs < 1.0,
        format!(
            "{checked} (p_tilde, kappa) points with Delta1 < 0 < Delta2, {wrong} violations, \
             {below} below threshold, {secs:.3} s (< 1 s)"
        ),
    )
}

fn threshold() -> Outcome {
    let p = SystemParams::paper();
    let analytic = threshold_power(&p).unwrap();
    let bisected = threshold_power_bisection(&p, 1e-14).unwrap();
    let rel = (analytic - bisected).abs() / analytic;
    outcome(
        (4e-4..=6e-4).contains(&analytic) && rel < 1e-10,
        format!("p_min = {analytic:.10e} in [4e-4, 6e-4], bisection {bisected:.10e}, relative difference {rel:.1e} (< 1e-10)"),
    )
}

fn stability() -> Outcome {
    let t = Instant::now();
    let paper = SystemParams::paper();
    let op = blue(paper.p_tilde);
    let blue_ok = op.is_stable();

    let cells: Vec<CellStatus> = DEFAULT_KAPPA_GRID
        .points()
        .into_par_iter()
        .flat_map_iter(|k| {
            DEFAULT_GAMMA_GRID
                .points()
                .into_iter()
                .map(move |g| stability_cell(&paper.with_kappa(k).with_gamma(g), BranchLabel::Red).status)
        })
        .collect();
    let count = |status: CellStatus| cells.iter().filter(|&&s| s == status).count();
    let red_stable = count(CellStatus::Stable);
    let red_failed = count(CellStatus::NumericalError);

    // kappa = 0 has no steady state, so the cavity damping is removed from
    // the linearized dynamics of the operating point instead.
    let m = op.model;
    let no_kappa = LinearizedModel::new(m.omega_m, m.g_c, m.delta, 0.0, m.gamma).stability().unwrap();
    let no_gamma = stability_cell(&paper.with_gamma(0.0), BranchLabel::Blue);
    let secs = t.elapsed().as_secs_f64();
    outcome(
        blue_ok && red_stable == 0 && red_failed == 0 && !no_kappa.stable
            && no_gamma.status == CellStatus::Unstable && secs < 10.0,
        format!(
            "blue at paper point stable: {blue_ok} (max Re {:.3e}); red map {}x{}: {} unstable, \
             {red_stable} stable, {} without a steady state, {red_failed} numerical errors; \
             kappa = 0 unstable: {} (max Re {:.3e}); \
             Gamma = 0 unstable: {} (max Re {:.3e}); {secs:.2} s (< 10 s)",
            op.verdict.max_real_part,
            DEFAULT_KAPPA_GRID.count,
            DEFAULT_GAMMA_GRID.count,
            count(CellStatus::Unstable),
            count(CellStatus::NoSteadyState),
            !no_kappa.stable,
            no_kappa.max_real_part,
            no_gamma.status == CellStatus::Unstable,
            no_gamma.max_real_part.unwrap_or(f64::NAN),
        ),
    )
}

struct Surface {
    config: SweepConfig,
    rows: Vec<levmirror::sweep::SweepRow>,
}

fn entanglement_band(surface: &Surface, secs: f64) -> Outcome {
    let peaks: Vec<f64> = entanglement_peaks(&surface.rows)
        .iter()
        .filter_map(|p| p.peak_e2_ebits)
        .collect();
    let in_band = peaks.iter().filter(|e| (15.0..=20.0).contains(*e)).count();
    let in_window = peaks.iter().filter(|e| (13.0..=22.0).contains(*e)).count();
    let (lo, hi) = peaks.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));

    let omegas = surface.config.omega_grid().unwrap().points();
    let refined = |p: f64| blue(p).refine_peak(&omegas, 1e-9).unwrap().1;
    let (low, high) = (refined(0.005), refined(0.05));
    let n = surface.config.p_tilde_points().len();
    outcome(
        in_band > 0 && high < low && secs < 60.0,
        format!(
            "{} stable powers of {n}, peak E2 spans [{lo:.2}, {hi:.2}] ebits, {in_band} in [15, 20], \
             {in_window} in [13, 22]; peak E2(0.05) = {high:.3} < E2(0.005) = {low:.3}; \
             {n}x{} grid in {secs:.2} s (< 60 s)",
            peaks.len(),
            omegas.len()
        ),
    )
}

fn squeezing() -> Outcome {
    let config = SweepConfig::from_json_file(configs().join("paper.json")).unwrap();
    let op = OperatingPoint::new(&config.params, BranchLabel::Blue).unwrap();
    let omegas = config.omega_grid().unwrap().points();
    let (w, var, eig) = omegas
        .iter()
        .map(|&w| {
            let r = op.sideband(w).unwrap();
            (w, r.variances.q_b, r.mirror_eigen.0)
        })
        .fold((f64::NAN, f64::INFINITY, f64::NAN), |a, x| if x.1 < a.1 { x } else { a });
    let gap = (var - eig) / var;

    // Smallest variance reachable by mixing only the cosine and sine position
    // quadratures at the same sideband.
    let s = op.covariance_at(w).unwrap().sigma;
    let (a, b, c) = (s[(0, 0)], s[(2, 2)], s[(0, 2)]);
    let cs_min = 0.5 * (a + b) - (0.25 * (a - b) * (a - b) + c * c).sqrt();
    outcome(
        var < 0.5 && gap < 1e-3,
        format!(
            "min Var(Q_b) = {var:.6} (< 0.5) at omega {w:.4e}; min eig(sigma_b) there {eig:.6e}, relative gap \
             {gap:.4} (< 1e-3); cosine/sine position mixing alone reaches {cs_min:.6} (gap {:.1e})",
            (var - cs_min) / var
        ),
    )
}

fn oracle() -> Outcome {
    let (mut n, mut worst, mut worst_abs) = (0, 0.0f64, 0.0f64);
    for (u, v) in spread_points(64) {
        let op = blue(log_lerp(6e-4, 0.1, u));
        if !op.is_stable() {
            continue;
        }
        let w = log_lerp(1e-1, 1e9, v);
        let s = op.covariance_at(w).unwrap().sigma;
        let (o, _) = oracle_sigma(&op.model, w);
        let d = max_abs(&(s - o));
        worst = worst.max(d / max_abs(&o).max(1.0));
        worst_abs = worst_abs.max(d);
        n += 1;
    }
    outcome(
        n >= 20 && worst < 1e-10,
        format!(
            "{n} stable (p_tilde, omega) points (>= 20), max entry difference {worst:.2e} of max(1, max|sigma|) \
             (< 1e-10; absolute {worst_abs:.2e})"
        ),
    )
}

fn gaussian_properties(surface: &Surface) -> Outcome {
    let ok: Vec<_> = surface.rows.iter().filter(|r| r.status == Status::Ok).collect();
    let e2 = ok.iter().filter_map(|r| r.e2_discrepancy).fold(0.0, f64::max);
    let purity = ok.iter().filter_map(|r| r.purity_deviation).fold(0.0, f64::max);
    let ops: Vec<(f64, OperatingPoint)> = surface
        .config
        .p_tilde_points()
        .into_iter()
        .map(|p| (p, blue(p)))
        .collect();
    let per_point: Vec<(f64, f64, f64, f64)> = ok
        .par_iter()
        .map(|r| {
            let op = &ops.iter().find(|(p, _)| *p == r.p_tilde).unwrap().1;
            let w = r.omega_rad_s.unwrap();
            let s = op.covariance_at(w).unwrap().sigma;
            let scale = max_abs(&s).max(1.0);
            let d = s.diagonal();
            let cs = [(0, 2), (1, 3), (4, 6), (5, 7)]
                .iter()
                .map(|&(c, n)| (d[c] - d[n]).abs())
                .fold(0.0, f64::max)
                / scale;
            let mirrored = max_abs(&(reflect(&s) - op.covariance_at(-w).unwrap().sigma)) / scale;
            let f64_e2 = levmirror::gaussian::entanglement_entropy(&s).unwrap().discrepancy;
            (uncertainty_min_eigenvalue(&s), cs, mirrored, f64_e2)
        })
        .collect();
    let min_unc = per_point.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    let cs = per_point.iter().map(|x| x.1).fold(0.0, f64::max);
    let mirrored = per_point.iter().map(|x| x.2).fold(0.0, f64::max);
    let f64_e2 = per_point.iter().map(|x| x.3).fold(0.0, f64::max);
    let blocks_psd = ok.iter().all(|r| r.min_eig_sigma_b.unwrap() > 0.0);
    outcome(
        e2 < 1e-6 && purity < 1e-6 && min_unc >= -1e-8 && cs < 1e-10 && mirrored < 1e-10 && blocks_psd,
        format!(
            "{} stable points: E2 discrepancy {e2:.1e} (< 1e-6; plain f64 {f64_e2:.1e}), |det(2 sigma) - 1| \
             {purity:.1e} (< 1e-6), min eig(sigma + i Omega/2) {min_unc:.1e} (>= -1e-8), cosine/sine \
             {cs:.1e} (< 1e-10), sigma(-omega) {mirrored:.1e} (< 1e-10)",
            ok.len()
        ),
    )
}

fn mass_independence() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let config = SweepConfig::from_json_file(configs().join("paper.json")).unwrap();
    let p = config.params;
    let a = OperatingPoint::new(&p, BranchLabel::Blue).unwrap();
    let b = OperatingPoint::new(&p.with_mass(10.0 * p.mass), BranchLabel::Blue).unwrap();
    let scalars = [
        rel(a.branch.delta, b.branch.delta),
        rel(a.model.omega_m, b.model.omega_m),
        rel(a.model.g_c, b.model.g_c),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let norm = a.model.drift.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let drift = (a.model.drift - b.model.drift).iter().map(|z| z.norm()).fold(0.0, f64::max) / norm;
    let (mut sigma, mut e2) = (0.0f64, 0.0f64);
    for w in config.omega_grid().unwrap().points() {
        let (sa, sb) = (a.covariance_at(w).unwrap().sigma, b.covariance_at(w).unwrap().sigma);
        sigma = sigma.max(max_abs(&(sa - sb)) / max_abs(&sa).max(1.0));
        let ea = a.sideband(w).unwrap().entanglement.value();
        let eb = b.sideband(w).unwrap().entanglement.value();
        e2 = e2.max((ea - eb).abs() / ea.max(1.0));
    }
    let n_c = rel(b.branch.n_c, 10.0 * a.branch.n_c);
    outcome(
        scalars < 1e-11 && drift < 1e-11 && sigma < 1e-11 && e2 < 1e-11,
        format!(
            "m vs 10 m at p_tilde {:e}: Delta/Omega_M/g_C {scalars:.1e}, A {drift:.1e}, sigma {sigma:.1e}, \
             E2 {e2:.1e} (all < 1e-11 relative); N_c scales with m to {n_c:.1e}",
            p.p_tilde
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let runs = [
        ("steady-state", "steady_state.json"),
        ("stability-map", "fig2_stability.json"),
        ("entangle-sweep", "fig3_entanglement.json"),
        ("variance-sweep", "fig4_variance.json"),
    ];
    let mut identical = Vec::new();
    for (sub, cfg) in runs {
        let outputs: Vec<(Vec<u8>, Vec<u8>)> = [None, Some("2")]
            .iter()
            .enumerate()
            .map(|(k, threads)| {
                let out = dir.path().join(format!("{sub}-{k}.csv"));
                let mut cmd = Command::new(env!("CARGO_BIN_EXE_levmirror"));
                cmd.arg(sub).arg("--config").arg(configs().join(cfg)).arg("--out").arg(&out);
                if let Some(n) = threads {
                    cmd.args(["--threads", n]);
                }
                let status = cmd.output().unwrap().status;
                assert!(status.success(), "{sub} failed");
                (std::fs::read(&out).unwrap(), std::fs::read(out.with_extension("summary.json")).unwrap())
            })
            .collect();
        identical.push((sub, outputs[0] == outputs[1]));
    }
    outcome(
        identical.iter().all(|x| x.1),
        identical
            .iter()
            .map(|(s, same)| format!("{s} {}", if *same { "identical" } else { "DIFFERENT" }))
            .collect::<Vec<_>>()
            .join(", ")
            + " (CSV and summary, default vs 2 threads)",
    )
}

fn main() -> ExitCode {
    let t = Instant::now();
    let config = SweepConfig::from_json_file(configs().join("fig3_entanglement.json")).unwrap();
    let rows = run_entanglement_sweep(&config).unwrap();
    let sweep_secs = t.elapsed().as_secs_f64();
    let surface = Surface { config, rows };

    let results: Vec<(u8, &str, Outcome)> = vec![
        (1, "steady-state residuals", steady_state_residuals()),
        (2, "detuning signs", detuning_signs()),
        (3, "threshold power", threshold()),
        (4, "stability", stability()),
        (5, "entanglement band", entanglement_band(&surface, sweep_secs)),
        (6, "squeezing", squeezing()),
        (7, "oracle equivalence", oracle()),
        (8, "Gaussian-state properties", gaussian_properties(&surface)),
        (9, "mass cancellation", mass_independence()),
        (10, "determinism", determinism()),
    ];
    for (id, name, o) in &results {
        println!("{} {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
