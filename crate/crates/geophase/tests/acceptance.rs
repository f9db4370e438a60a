//! End-to-end acceptance run: one line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use geophase::{parallel, validate};
use geophase_core::counting::trial_rng;
use geophase_core::fringe::{
    chi_grid, fit_sinusoid, slope_at_zero, synthesize_scan, theta1_grid, CurveOptions, Exposure, FitOptions,
};
use geophase_core::geometric::{
    closed_form_one_photon, pancharatnam_phase, postselect_stats, signed_solid_angle, to_stokes, PhaseReport,
};
use geophase_core::nphoton::{
    coincidence_breakdown, coincidence_probability, mz_two_photon_expand, nphoton_from_states, nphoton_postselect,
};
use geophase_core::phase::mod_2pi_distance;
use geophase_core::polarization::{inner, prepare_setup_states};
use geophase_core::snr::{
    crossover_rate, direct_at, direct_plateau, geometric_at, geometric_plateau, monte_carlo_snr, Scheme,
};
use geophase_core::{NoiseModel, PolarizationState, SetupConfig};
use num_complex::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

fn verdict(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn budget(detail: String, start: Instant, limit: Duration) -> Outcome {
    let took = start.elapsed();
    verdict(
        took < limit,
        format!("{detail}; {:.2}s of {}s budget", took.as_secs_f64(), limit.as_secs()),
    )
}

fn random_state<R: Rng>(rng: &mut R) -> PolarizationState {
    let a = rng.random_range(0.0..FRAC_PI_2);
    let b = rng.random_range(0.0..TAU);
    let g = rng.random_range(0.0..TAU);
    let global = Complex64::from_polar(1.0, g);
    PolarizationState::new(global * a.cos(), global * Complex64::from_polar(a.sin(), b))
}

fn solid_angle_theorem() -> Outcome {
    let start = Instant::now();
    let mut rng = trial_rng(2024, 0);
    let (mut tested, mut skipped, mut worst) = (0, 0, 0.0f64);
    while tested < 10_000 {
        let (a, b, c) = (random_state(&mut rng), random_state(&mut rng), random_state(&mut rng));
        let gamma = pancharatnam_phase(&a, &b, &c);
        let omega = signed_solid_angle(&to_stokes(&a), &to_stokes(&b), &to_stokes(&c));
        let (Ok(gamma), Ok(omega)) = (gamma, omega) else {
            skipped += 1;
            continue;
        };
        worst = worst.max(mod_2pi_distance(gamma, omega / 2.0));
        tested += 1;
    }
    let pass = worst < 1e-9;
    let detail = format!("{tested} triples ({skipped} degenerate redrawn), max |gamma - Omega/2| = {worst:.2e}");
    verdict(pass, detail).and_then(|d| budget(d, start, Duration::from_secs(5)))
}

fn closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let deg = PI / 180.0;
    let (mut worst_one, mut worst_n, mut points) = (0.0f64, 0.0f64, 0usize);
    let mut failures = Vec::new();
    for i in 0..181 {
        let t1 = (i as f64 - 90.0) * deg;
        let orthogonal_arms = (2.0 * t1).cos().abs() < 1e-12;
        for k in 0..90 {
            let t2 = (k as f64 + 0.5) * 2.0 * deg;
            let config = match SetupConfig::new(t1, t2, 1, 0.0) {
                Ok(c) => c,
                Err(e) => {
                    failures.push(format!("config ({t1}, {t2}): {e}"));
                    continue;
                }
            };
            points += 1;
            let states = prepare_setup_states(&config);
            let closed = closed_form_one_photon(t1, t2).map_err(|e| e.to_string())?;
            let mut diffs = Vec::new();
            if orthogonal_arms {
                // φ_m and γ are undefined; the post-selected quantities still are
                let post = postselect_stats(&states.psi_a, &states.psi_b, &states.psi2).map_err(|e| e.to_string())?;
                diffs.push(mod_2pi_distance(post.phase.unwrap_or(f64::NAN), closed.phase_f));
                diffs.push((post.success_probability - closed.success_probability).abs());
                diffs.push((post.visibility - closed.visibility_f).abs());
            } else {
                let general = PhaseReport::from_states(&states).map_err(|e| e.to_string())?;
                diffs.push(mod_2pi_distance(general.phase_f, closed.phase_f));
                diffs.push(mod_2pi_distance(general.phase_m, closed.phase_m));
                diffs.push(mod_2pi_distance(general.geometric, closed.geometric));
                diffs.push(mod_2pi_distance(general.solid_angle / 2.0, closed.geometric));
                diffs.push((general.success_probability - closed.success_probability).abs());
                diffs.push((general.visibility_f - closed.visibility_f).abs());
                diffs.push((general.visibility_m - closed.visibility_m).abs());
            }
            worst_one = diffs.iter().fold(worst_one, |w, &d| if d.is_nan() { f64::INFINITY } else { w.max(d) });

            let ca = inner(&states.psi2, &states.psi_a);
            let cb = inner(&states.psi2, &states.psi_b);
            let ba = inner(&states.psi_b, &states.psi_a);
            let (mut pa, mut pb, mut pm) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
            for n in 1..=5u32 {
                pa *= ca;
                pb *= cb;
                pm *= ba;
                let cfg = config.with_photon_number(n).map_err(|e| e.to_string())?;
                let closed_n = nphoton_postselect(&cfg).map_err(|e| e.to_string())?;
                let p = 0.5 * (pa.norm_sqr() + pb.norm_sqr());
                let v = 2.0 * (pa * pb).norm() / (pa.norm_sqr() + pb.norm_sqr());
                let mut d = vec![
                    (p - closed_n.success_probability).abs(),
                    (v - closed_n.visibility).abs(),
                    mod_2pi_distance((pb.conj() * pa).arg(), closed_n.phase),
                    (pm.norm() - closed_n.visibility_m).abs(),
                ];
                if !orthogonal_arms {
                    d.push(mod_2pi_distance(pm.arg(), closed_n.phase_m));
                    let routed = nphoton_from_states(&states, n).map_err(|e| e.to_string())?;
                    d.push(mod_2pi_distance(routed.phase, closed_n.phase));
                    d.push((routed.success_probability - closed_n.success_probability).abs());
                }
                worst_n = d.iter().fold(worst_n, |w, &x| if x.is_nan() { f64::INFINITY } else { w.max(x) });
            }
        }
    }
    let pass = failures.is_empty() && worst_one < 1e-9 && worst_n < 1e-9;
    let detail = format!(
        "{points} grid points, one-photon max diff {worst_one:.2e}, N=1..5 max diff {worst_n:.2e}{}",
        if failures.is_empty() { String::new() } else { format!(", errors: {}", failures.join("; ")) }
    );
    verdict(pass, detail).and_then(|d| budget(d, start, Duration::from_secs(10)))
}

fn period_halving() -> Outcome {
    let chi = chi_grid(120, 4.0 * PI);
    let hint = 4.0 * PI / 3.0;
    let opts = FitOptions::with_period_range(0.6, 1.8);
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for seed in 1..=5u64 {
        let model = validate::reference_model(seed);
        let mut periods = [0.0; 2];
        for (slot, n) in [1u32, 2].into_iter().enumerate() {
            let config = SetupConfig::new(10f64.to_radians(), FRAC_PI_4, n, 0.0).map_err(|e| e.to_string())?;
            let scan =
                synthesize_scan(&config, &model, &chi, 1.0, Exposure::MeanCounts(1e4)).map_err(|e| e.to_string())?;
            periods[slot] = fit_sinusoid(&scan, hint, &opts).map_err(|e| e.to_string())?.period;
        }
        let ratio = periods[1] / periods[0];
        worst = worst.max((ratio / 0.5 - 1.0).abs());
        ratios.push(format!("{ratio:.5}"));
    }
    verdict(
        worst <= 0.01,
        format!("T2/T1 over 5 seeds = [{}], max relative deviation from 1/2 = {:.3}%", ratios.join(", "), 100.0 * worst),
    )
}

fn hom_suppression() -> Outcome {
    let chi = chi_grid(721, 2.0 * TAU);
    let scale = coincidence_probability(0.0) / 2.0;
    let mut nonzero = 0;
    let mut worst = 0.0f64;
    for &x in &chi {
        let parts = coincidence_breakdown(&mz_two_photon_expand(x));
        if parts.from_11 != Complex64::new(0.0, 0.0) {
            nonzero += 1;
        }
        worst = worst.max((coincidence_probability(x) - scale * (1.0 + (2.0 * x).cos())).abs());
    }
    verdict(
        nonzero == 0 && worst <= 1e-12,
        format!(
            "|1,1> contribution nonzero at {nonzero} of {} offsets, max |P_c - s(1 + cos 2chi)| = {worst:.2e} (s = {scale:.6})",
            chi.len()
        ),
    )
}

struct CurveStats {
    end: f64,
    end_err: f64,
    within: usize,
    total: usize,
    slope: (f64, f64),
}

fn curve_stats(theta2: f64, n: u32, visibility_factor: f64, seed: u64) -> Result<CurveStats, String> {
    let grid = theta1_grid(181);
    let model = validate::reference_model(seed);
    let options = CurveOptions {
        visibility_factor,
        ..CurveOptions::default()
    };
    let curve = parallel::phase_shift_curve(theta2, &grid, n, &model, &options).map_err(|e| e.to_string())?;
    let last = curve.last().ok_or("empty curve")?;
    let within = curve
        .iter()
        .filter(|p| !p.flagged && (p.displacement - p.theory).abs() <= 3.0 * p.stderr)
        .count();
    let slope = slope_at_zero(&curve, theta2 / 2.0).map_err(|e| e.to_string())?;
    Ok(CurveStats {
        end: last.displacement,
        end_err: last.stderr,
        within,
        total: curve.len(),
        slope,
    })
}

fn check_curves(visibility_factor: f64, seed: u64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, deg) in [45.0f64, 20.0, 10.0].into_iter().enumerate() {
        let theta2 = deg.to_radians();
        let mut slopes = [(0.0, 0.0); 2];
        for (slot, n) in [1u32, 2].into_iter().enumerate() {
            let s = curve_stats(theta2, n, visibility_factor, seed + 10 * k as u64 + slot as u64)?;
            let span_ok = (s.end - f64::from(n)).abs() <= 3.0 * s.end_err;
            let cover_ok = s.within as f64 >= 0.95 * s.total as f64;
            pass &= span_ok && cover_ok;
            parts.push(format!(
                "th2={deg} N={n}: span {:.4}+-{:.4} {}, {}/{} within 3se",
                s.end,
                s.end_err,
                if span_ok { "ok" } else { "BAD" },
                s.within,
                s.total
            ));
            slopes[slot] = s.slope;
        }
        let ratio = slopes[1].0 / slopes[0].0;
        let slope_ok = (ratio / 2.0 - 1.0).abs() <= 0.05;
        pass &= slope_ok;
        parts.push(format!("th2={deg} slope ratio {ratio:.4}{}", if slope_ok { "" } else { " BAD" }));
    }
    verdict(pass, parts.join("; "))
}

fn phase_shift_curves() -> Outcome {
    let start = Instant::now();
    check_curves(1.0, 601).and_then(|d| budget(d, start, Duration::from_secs(120)))
}

fn phase_shift_curves_reduced_visibility() -> Outcome {
    check_curves(0.63, 701)
}

fn noise_validation() -> Outcome {
    let start = Instant::now();
    let trials = 100_000;
    let mut pass = true;
    let (mut shot, mut technical) = (0, 0);
    let mut parts = Vec::new();
    for point in validate::validation_grid(11) {
        // closed forms written out here rather than taken from the engine
        let predicted = match &point.probe {
            validate::Probe::Direct(m) if m.theta1 == 0.0 => {
                let NoiseModel {
                    mean_rate: rate,
                    technical_power: xi,
                    integration_time: tau,
                    detection_efficiency: eta,
                    ..
                } = m.model;
                (1.0 / (eta * rate) + xi / 2.0) / tau
            }
            validate::Probe::Geometric(m) if m.config.theta1() == 0.0 => {
                let NoiseModel {
                    mean_rate: nu,
                    technical_power: xi,
                    integration_time: tau,
                    detection_efficiency: eta,
                    ..
                } = m.model;
                let n = m.config.photon_number();
                let p0 = m.config.theta2().sin().powi(2 * n as i32);
                (1.0 / (eta * nu * p0) + xi / 2.0) / tau
            }
            _ => continue,
        };
        let summary = point.probe.run(trials).map_err(|e| e.to_string())?;
        let rel = (summary.variance / predicted - 1.0).abs();
        let ok = rel <= 0.10;
        pass &= ok;
        if point.shot_dominant {
            shot += 1;
        } else {
            technical += 1;
        }
        parts.push(format!(
            "{} [{}]: {:.1}%{}",
            point.label,
            if point.shot_dominant { "shot" } else { "technical" },
            100.0 * rel,
            if ok { "" } else { " BAD" }
        ));
    }
    let coverage = shot + technical >= 4 && shot > 0 && technical > 0;
    verdict(pass && coverage, format!("{} points at {trials} trials: {}", shot + technical, parts.join("; ")))
        .and_then(|d| budget(d, start, Duration::from_secs(60)))
}

fn snr_reproduction() -> Outcome {
    let model = validate::reference_model(0);
    let theta1 = PI / 180.0;
    let theta2 = PI / 20.0;
    let xi = model.technical_power;
    let tau = model.integration_time;
    let direct = direct_plateau(theta1, &model);
    let direct_expected = 2.0 * theta1 * (2.0 * tau / xi).sqrt();
    let config = |n: u32| SetupConfig::new(theta1, theta2, n, 0.0).map_err(|e| e.to_string());
    let geo2 = geometric_plateau(&config(2)?, 1.0, &model);
    let geo2_expected = 4.0 * theta1 / theta2.tan() * (2.0 * tau / xi).sqrt();
    let plateaus: Vec<f64> = (1..=3)
        .map(|n| config(n).map(|c| geometric_plateau(&c, 1.0, &model)))
        .collect::<Result<_, _>>()?;
    let closed_ratio = (1..=3)
        .map(|n| (plateaus[n - 1] / plateaus[0] - n as f64).abs())
        .fold(0.0f64, f64::max);

    let mut mc = Vec::new();
    for n in 1..=3u32 {
        let cfg = config(n)?;
        let m = 1000.0 * crossover_rate(Scheme::Geometric, &cfg, &model);
        let signal = geometric_at(&cfg, 1.0, m, &model.with_seed(900 + u64::from(n)));
        let null_cfg = cfg.with_theta1(0.0).map_err(|e| e.to_string())?;
        let null = geometric_at(&null_cfg, 1.0, m, &model.with_seed(950 + u64::from(n)));
        let s = parallel::run_ensemble(&signal, 10_000).map_err(|e| e.to_string())?;
        let z = parallel::run_ensemble(&null, 10_000).map_err(|e| e.to_string())?;
        mc.push(monte_carlo_snr(&s, &z));
    }
    let mc_dev: Vec<f64> = (1..=3).map(|n| mc[n - 1] / mc[0] / n as f64 - 1.0).collect();
    let mc_ok = mc_dev.iter().all(|d| d.abs() <= 0.15);

    // direct-scheme MC plateau as a sanity anchor for the MC estimator
    let m_direct = 1000.0 * crossover_rate(Scheme::Direct, &config(1)?, &model);
    let ds = parallel::run_ensemble(&direct_at(theta1, m_direct, &model.with_seed(990)), 10_000)
        .map_err(|e| e.to_string())?;
    let dz = parallel::run_ensemble(&direct_at(0.0, m_direct, &model.with_seed(991)), 10_000)
        .map_err(|e| e.to_string())?;
    let direct_mc = monte_carlo_snr(&ds, &dz);

    let pass = (direct - direct_expected).abs() <= 1e-9 * direct_expected
        && (geo2 - geo2_expected).abs() <= 1e-9 * geo2_expected
        && geo2 > direct
        && closed_ratio <= 1e-9
        && mc_ok;
    verdict(
        pass,
        format!(
            "direct plateau {direct:.6} (expect {direct_expected:.6}, MC {direct_mc:.3}), N=2 plateau {geo2:.4} (expect {geo2_expected:.4}), \
             closed 1:2:3 max dev {closed_ratio:.1e}, MC R = [{:.2}, {:.2}, {:.2}] ratio dev [{:+.1}%, {:+.1}%, {:+.1}%]",
            mc[0],
            mc[1],
            mc[2],
            100.0 * mc_dev[0],
            100.0 * mc_dev[1],
            100.0 * mc_dev[2]
        ),
    )
}

fn run_cli(args: &[&str], out: &Path, threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_geophase"));
    cmd.env_remove("GEOPHASE_SEED").args(args).arg("--output").arg(out);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let status = cmd.output().map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?} exited with {}", status.status));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 5] = [
        &["--seed", "42", "fringe", "--theta1", "10deg", "--theta2", "45deg", "--n", "2"],
        &["--seed", "42", "fringe", "--mode", "curve", "--theta2", "20deg", "--n", "2", "--grid-points", "61"],
        &["--seed", "42", "sweep", "--kind", "snr", "--points", "25"],
        &["--seed", "42", "--format", "jsonl", "mc-validate", "--trials", "2000"],
        &["--seed", "42", "phase", "--theta1", "30deg", "--theta2", "60deg", "--n", "3"],
    ];
    let mut identical = 0;
    let mut bad = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let a = run_cli(args, &dir.path().join(format!("{i}a")), None)?;
        let b = run_cli(args, &dir.path().join(format!("{i}b")), None)?;
        let c = run_cli(args, &dir.path().join(format!("{i}c")), Some("1"))?;
        if a == b && a == c && !a.is_empty() {
            identical += 1;
        } else {
            bad.push(args.join(" "));
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{identical}/{} commands byte-identical across repeats and thread counts{}",
            runs.len(),
            if bad.is_empty() { String::new() } else { format!("; differing: {}", bad.join(" | ")) }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1", solid_angle_theorem),
        ("2", closed_form_equivalence),
        ("3", period_halving),
        ("4", hom_suppression),
        ("5", phase_shift_curves),
        ("5 (visibility 0.63)", phase_shift_curves_reduced_visibility),
        ("6", noise_validation),
        ("7", snr_reproduction),
        ("8", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({secs:.2}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.2}s) {detail}");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion line(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
