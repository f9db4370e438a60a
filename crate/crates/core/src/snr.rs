//! Closed-form signal-to-noise ratios for direct polarimetry and for the
//! geometric-phase scheme, log-grid sweeps, and Monte Carlo hooks.
//!
//! `M` is always the total photon rate. The geometric scheme counts
//! N-photon events at flux `ν = M/N`.

use alloc::vec::Vec;

use libm::{exp, log, pow, sin, sqrt, tan};

use crate::counting::{
    check_small_angle, DirectMeasurement, EnsembleSummary, GeometricMeasurement, NoiseModel,
};
use crate::error::{Error, Result};
use crate::polarization::SetupConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Direct,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    /// M, photons per second.
    pub total_photon_rate: f64,
    pub snr: f64,
    pub scheme: Scheme,
    /// For the direct scheme only θ₁ is meaningful.
    pub config: SetupConfig,
    pub visibility: f64,
    pub model: NoiseModel,
    /// False when θ₁ is outside the linear small-angle regime.
    pub linear_regime: bool,
}

fn check_rate(m: f64) -> Result<()> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidRate(m));
    }
    Ok(())
}

fn direct_config(theta1: f64) -> Result<SetupConfig> {
    SetupConfig::new(theta1, core::f64::consts::FRAC_PI_4, 1, 0.0)
}

/// `R = 2√τ·θ₁/√(1/ηM + ξ̄²/2)`.
pub fn snr_direct(theta1: f64, m: f64, model: &NoiseModel) -> Result<SnrPoint> {
    check_rate(m)?;
    let config = direct_config(theta1)?;
    let shot = 1.0 / (model.detection_efficiency * m);
    let r = 2.0 * sqrt(model.integration_time) * theta1 / sqrt(shot + model.technical_power / 2.0);
    Ok(SnrPoint {
        total_photon_rate: m,
        snr: if m == 0.0 { 0.0 } else { r },
        scheme: Scheme::Direct,
        config,
        visibility: 1.0,
        model: *model,
        linear_regime: theta1.abs() <= 0.1,
    })
}

/// `P(0, θ₂) = sin^{2N}θ₂`.
pub fn balanced_success_probability(theta2: f64, n: u32) -> f64 {
    pow(sin(theta2), 2.0 * f64::from(n))
}

/// `R = (2NV_fθ₁/tanθ₂)·√(τ/(N/(ηMP(0,θ₂)) + ξ̄²/2))`.
///
/// Outside the small-angle regime the value is still returned, with
/// `linear_regime` cleared.
pub fn snr_geometric(
    config: &SetupConfig,
    visibility: f64,
    m: f64,
    model: &NoiseModel,
) -> Result<SnrPoint> {
    check_rate(m)?;
    let n = f64::from(config.photon_number());
    let p0 = balanced_success_probability(config.theta2(), config.photon_number());
    let gain = 2.0 * n * visibility * config.theta1() / tan(config.theta2());
    let shot = n / (model.detection_efficiency * m * p0);
    let r = gain * sqrt(model.integration_time / (shot + model.technical_power / 2.0));
    let linear_regime = match check_small_angle(config) {
        Ok(_) => true,
        Err(Error::SmallAngleViolation { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(SnrPoint {
        total_photon_rate: m,
        snr: if m == 0.0 { 0.0 } else { r },
        scheme: Scheme::Geometric,
        config: config.with_null_offset(),
        visibility,
        model: *model,
        linear_regime,
    })
}

/// `M → ∞` limit of [`snr_direct`]: `2θ₁√(2τ/ξ̄²)`.
pub fn direct_plateau(theta1: f64, model: &NoiseModel) -> f64 {
    2.0 * theta1 * sqrt(2.0 * model.integration_time / model.technical_power)
}

/// `M → ∞` limit of [`snr_geometric`]: `(2NV_fθ₁/tanθ₂)√(2τ/ξ̄²)`.
pub fn geometric_plateau(config: &SetupConfig, visibility: f64, model: &NoiseModel) -> f64 {
    let n = f64::from(config.photon_number());
    2.0 * n * visibility * config.theta1() / tan(config.theta2())
        * sqrt(2.0 * model.integration_time / model.technical_power)
}

/// Total rate at which shot and technical terms are equal: `ηνP = 2/ξ̄²`
/// (`P = 1`, `ν = M` for the direct scheme). Infinite when ξ̄² = 0.
pub fn crossover_rate(scheme: Scheme, config: &SetupConfig, model: &NoiseModel) -> f64 {
    let (n, p) = match scheme {
        Scheme::Direct => (1.0, 1.0),
        Scheme::Geometric => (
            f64::from(config.photon_number()),
            balanced_success_probability(config.theta2(), config.photon_number()),
        ),
    };
    2.0 * n / (model.detection_efficiency * p * model.technical_power)
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || count < 2 {
        return Err(Error::InvalidScan("log grid needs 0 < lo < hi and at least 2 points"));
    }
    let (a, b) = (log(lo), log(hi));
    let step = (b - a) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => exp(a + step * i as f64),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrSweep {
    pub points: Vec<SnrPoint>,
    /// Shot/technical crossover M*.
    pub crossover: f64,
}

/// Evaluates one scheme across `m_values`, which must be strictly increasing.
/// For the direct scheme only `template.theta1()` is used.
pub fn snr_sweep(
    scheme: Scheme,
    template: &SetupConfig,
    visibility: f64,
    m_values: &[f64],
    model: &NoiseModel,
) -> Result<SnrSweep> {
    if m_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidScan("M values must be strictly increasing"));
    }
    let points = m_values
        .iter()
        .map(|&m| match scheme {
            Scheme::Direct => snr_direct(template.theta1(), m, model),
            Scheme::Geometric => snr_geometric(template, visibility, m, model),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SnrSweep {
        points,
        crossover: crossover_rate(scheme, template, model),
    })
}

/// Direct measurement with total rate M.
pub fn direct_at(theta1: f64, m: f64, model: &NoiseModel) -> DirectMeasurement {
    DirectMeasurement {
        theta1,
        model: model.with_mean_rate(m),
    }
}

/// Geometric measurement with total rate M (flux ν = M/N) at the nulling offset.
pub fn geometric_at(config: &SetupConfig, visibility: f64, m: f64, model: &NoiseModel) -> GeometricMeasurement {
    let nu = m / f64::from(config.photon_number());
    GeometricMeasurement::nulled(*config, visibility, model.with_mean_rate(nu))
}

/// Monte Carlo SNR: ensemble mean of `n` at the signal angle over the
/// ensemble spread of `n` at θ₁ = 0, the operating point where the noise
/// in the closed-form expressions is evaluated.
pub fn monte_carlo_snr(signal: &EnsembleSummary, null: &EnsembleSummary) -> f64 {
    signal.mean / sqrt(null.variance)
}
