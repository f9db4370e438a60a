//! Monte Carlo validation of the counting model against its analytic
//! predictions: ensemble means, ratio-estimator variances and SNRs.

use std::f64::consts::{FRAC_PI_4, PI};

use geophase_core::counting::{predicted_ratio_variance, DirectMeasurement, GeometricMeasurement, Measurement};
use geophase_core::snr::{direct_at, geometric_at, monte_carlo_snr, snr_direct, snr_geometric};
use geophase_core::{NoiseModel, Result, SetupConfig};

use crate::output::Table;
use crate::parallel::run_ensemble;

/// Below this many trials results are reported but not judged.
pub const MIN_TRIALS: usize = 1000;
pub const VARIANCE_TOLERANCE: f64 = 0.10;
pub const SNR_TOLERANCE: f64 = 0.10;
/// Mean check: |mean − expected| within this many standard errors.
pub const MEAN_SIGMAS: f64 = 4.0;
pub const MAX_REGIME_VIOLATION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Insufficient,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Insufficient => "INSUFFICIENT",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub point: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    Direct(DirectMeasurement),
    Geometric(GeometricMeasurement),
}

impl Probe {
    fn expected_counts(&self) -> (f64, f64) {
        match self {
            Probe::Direct(m) => m.expected_counts(),
            Probe::Geometric(m) => m.expected_counts(),
        }
    }

    fn expected_n(&self) -> f64 {
        match self {
            Probe::Direct(m) => m.expected_n(),
            Probe::Geometric(m) => m.expected_n(),
        }
    }

    fn model(&self) -> NoiseModel {
        match self {
            Probe::Direct(m) => m.model,
            Probe::Geometric(m) => m.model,
        }
    }

    fn with_model(self, model: NoiseModel) -> Self {
        match self {
            Probe::Direct(m) => Probe::Direct(DirectMeasurement { model, ..m }),
            Probe::Geometric(m) => Probe::Geometric(GeometricMeasurement { model, ..m }),
        }
    }

    pub fn run(&self, trials: usize) -> Result<geophase_core::counting::EnsembleSummary> {
        match self {
            Probe::Direct(m) => run_ensemble(m, trials),
            Probe::Geometric(m) => run_ensemble(m, trials),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub label: String,
    pub probe: Probe,
    /// True when the shot term of the variance exceeds the technical term.
    pub shot_dominant: bool,
}

/// Noise parameters of the reference SNR comparison: η = 1, τ = 1 s,
/// ξ̄² = 2.5×10⁻⁵ s.
pub fn reference_model(seed: u64) -> NoiseModel {
    NoiseModel::new(0.0, 2.5e-5, 1.0, 1.0, seed).expect("valid constants")
}

/// Distinct, reproducible seed for item `index` of a run seeded with `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn gp(theta1: f64, theta2: f64, n: u32) -> SetupConfig {
    SetupConfig::new(theta1, theta2, n, 0.0).expect("valid constants")
}

/// Parameter points spanning shot- and technical-noise dominated regimes
/// for both schemes.
pub fn validation_grid(seed: u64) -> Vec<GridPoint> {
    let base = reference_model(seed);
    let deg = PI / 180.0;
    let mut probes: Vec<(String, Probe)> = Vec::new();
    for &(theta1, m) in &[(0.0, 1e4), (0.0, 1e8), (deg, 1e5)] {
        probes.push((
            format!("direct theta1={theta1:.6} M={m:e}"),
            Probe::Direct(direct_at(theta1, m, &base)),
        ));
    }
    for &(theta1, theta2, n, m) in &[
        (0.0, FRAC_PI_4, 1, 1e4),
        (0.0, PI / 20.0, 2, 1e6),
        (0.0, PI / 20.0, 2, 1e10),
        (0.1 * deg, PI / 20.0, 2, 1e8),
        (0.5 * deg, FRAC_PI_4, 3, 1e7),
    ] {
        probes.push((
            format!("geometric N={n} theta1={theta1:.6} theta2={theta2:.6} M={m:e}"),
            Probe::Geometric(geometric_at(&gp(theta1, theta2, n), 1.0, m, &base)),
        ));
    }
    probes
        .into_iter()
        .enumerate()
        .map(|(i, (label, probe))| {
            let probe = probe.with_model(probe.model().with_seed(sub_seed(seed, i as u64)));
            let (p, m) = probe.expected_counts();
            let total = p + m;
            let technical = total * total * probe.model().window_variance() / 2.0;
            GridPoint {
                label,
                probe,
                shot_dominant: total >= technical,
            }
        })
        .collect()
}

/// (label, signal probe at θ₁, null probe at θ₁ = 0, closed-form SNR).
pub fn snr_grid(seed: u64) -> Result<Vec<(String, Probe, Probe, f64)>> {
    let base = reference_model(seed);
    let theta1 = PI / 180.0;
    let mut out = Vec::new();
    let mut k = 100;
    let mut next = |model: &NoiseModel| {
        k += 1;
        model.with_seed(sub_seed(seed, k))
    };
    for &m in &[1e4, 1e6, 1e8] {
        let r = snr_direct(theta1, m, &base)?.snr;
        let s = direct_at(theta1, m, &next(&base));
        let z = direct_at(0.0, m, &next(&base));
        out.push((format!("direct M={m:e}"), Probe::Direct(s), Probe::Direct(z), r));
    }
    for &(theta2, n, m) in &[(FRAC_PI_4, 1, 1e5), (PI / 20.0, 2, 1e6), (PI / 20.0, 2, 1e8), (PI / 20.0, 2, 1e10)] {
        let cfg = gp(theta1, theta2, n);
        let r = snr_geometric(&cfg, 1.0, m, &base)?.snr;
        let s = geometric_at(&cfg, 1.0, m, &next(&base));
        let z = geometric_at(&cfg.with_theta1(0.0)?, 1.0, m, &next(&base));
        out.push((
            format!("geometric N={n} theta2={theta2:.6} M={m:e}"),
            Probe::Geometric(s),
            Probe::Geometric(z),
            r,
        ));
    }
    Ok(out)
}

fn judge(pass: bool, trials: usize) -> Status {
    if trials < MIN_TRIALS {
        Status::Insufficient
    } else if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Runs every check. With `mismatch`, counts are simulated with four times
/// the nominal technical noise while predictions keep the nominal value, a
/// negative control that must fail.
pub fn run_checks(trials: usize, seed: u64, mismatch: bool) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for point in validation_grid(seed) {
        let nominal = point.probe.model();
        let simulated = if mismatch {
            point
                .probe
                .with_model(nominal.with_technical_power(4.0 * nominal.technical_power))
        } else {
            point.probe
        };
        let s = simulated.run(trials)?;
        let (p, m) = point.probe.expected_counts();
        let expected_n = point.probe.expected_n();
        checks.push(Check {
            name: "mean",
            point: point.label.clone(),
            expected: expected_n,
            observed: s.mean,
            tolerance: MEAN_SIGMAS * s.std_err,
            status: judge((s.mean - expected_n).abs() <= MEAN_SIGMAS * s.std_err, trials),
        });
        let predicted = predicted_ratio_variance(p, m, &nominal)?;
        checks.push(Check {
            name: if point.shot_dominant { "variance-shot" } else { "variance-technical" },
            point: point.label.clone(),
            expected: predicted,
            observed: s.variance,
            tolerance: VARIANCE_TOLERANCE,
            status: judge((s.variance / predicted - 1.0).abs() <= VARIANCE_TOLERANCE, trials),
        });
        checks.push(Check {
            name: "regime",
            point: point.label,
            expected: 0.0,
            observed: s.regime_violation_fraction,
            tolerance: MAX_REGIME_VIOLATION,
            status: judge(s.regime_violation_fraction <= MAX_REGIME_VIOLATION, trials),
        });
    }
    for (label, signal, null, closed) in snr_grid(seed)? {
        let (signal, null) = if mismatch {
            let bump = |p: Probe| {
                let m = p.model();
                p.with_model(m.with_technical_power(4.0 * m.technical_power))
            };
            (bump(signal), bump(null))
        } else {
            (signal, null)
        };
        let mc = monte_carlo_snr(&signal.run(trials)?, &null.run(trials)?);
        checks.push(Check {
            name: "snr",
            point: label,
            expected: closed,
            observed: mc,
            tolerance: SNR_TOLERANCE,
            status: judge((mc / closed - 1.0).abs() <= SNR_TOLERANCE, trials),
        });
    }
    Ok(checks)
}

pub fn report(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "point", "expected", "observed", "tolerance", "status"]);
    for c in checks {
        t.push(vec![
            c.name.into(),
            c.point.as_str().into(),
            c.expected.into(),
            c.observed.into(),
            c.tolerance.into(),
            c.status.label().into(),
        ]);
    }
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    t.trailer(
        "summary",
        vec![
            ("pass", count(Status::Pass).into()),
            ("fail", count(Status::Fail).into()),
            ("insufficient", count(Status::Insufficient).into()),
        ],
    );
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_both_regimes() {
        let g = validation_grid(1);
        for direct in [true, false] {
            let of_kind: Vec<_> = g
                .iter()
                .filter(|p| matches!(p.probe, Probe::Direct(_)) == direct)
                .collect();
            assert!(of_kind.iter().any(|p| p.shot_dominant));
            assert!(of_kind.iter().any(|p| !p.shot_dominant));
        }
    }

    #[test]
    fn tiny_runs_are_not_judged() {
        let checks = run_checks(50, 3, false).unwrap();
        assert!(checks.iter().all(|c| c.status == Status::Insufficient));
    }
}
