//! Photon-counting noise: Poisson shot noise on top of a white relative
//! intensity fluctuation, the difference-over-sum ratio estimator, and its
//! predicted variance.
//!
//! The white technical noise of power `ξ̄²` is discretized once per
//! integration window of length τ: the window's relative rate fluctuation
//! is Gaussian with variance `ξ̄²/τ`, and the fluctuated rate is clamped at
//! zero. A window with mean count `m` then has variance `m + m²ξ̄²/τ`.
//!
//! Every trial draws from its own ChaCha stream selected by the trial
//! index, so an ensemble can be evaluated in any order (or in parallel)
//! and still reproduce the sequential result exactly.

use alloc::vec::Vec;

use libm::{cos, sin, sqrt, tan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::nphoton::nphoton_postselect;
use crate::polarization::{PolarizationState, SetupConfig};
use crate::stats::Moments;

/// Photon source and detector parameters for one measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Incident flux ⟨i⟩ in events per second. For the direct scheme this
    /// is the photon rate M; for the geometric scheme it is the N-photon
    /// flux ν.
    pub mean_rate: f64,
    /// `ξ̄²`, power spectrum of the relative intensity fluctuation (seconds).
    pub technical_power: f64,
    /// τ, length of one counting window (seconds).
    pub integration_time: f64,
    /// η
    pub detection_efficiency: f64,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn new(
        mean_rate: f64,
        technical_power: f64,
        integration_time: f64,
        detection_efficiency: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        let m = Self {
            mean_rate,
            technical_power,
            integration_time,
            detection_efficiency,
            rng_seed,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_rate >= 0.0) || !self.mean_rate.is_finite() {
            return Err(Error::InvalidModel("mean_rate must be finite and >= 0"));
        }
        if !(self.technical_power >= 0.0) || !self.technical_power.is_finite() {
            return Err(Error::InvalidModel("technical_power must be finite and >= 0"));
        }
        if !(self.integration_time > 0.0) || !self.integration_time.is_finite() {
            return Err(Error::InvalidModel("integration_time must be finite and > 0"));
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency) {
            return Err(Error::InvalidModel("detection_efficiency must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn with_mean_rate(self, mean_rate: f64) -> Self {
        Self { mean_rate, ..self }
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        Self { rng_seed, ..self }
    }

    pub fn with_technical_power(self, technical_power: f64) -> Self {
        Self {
            technical_power,
            ..self
        }
    }

    pub fn with_integration_time(self, integration_time: f64) -> Self {
        Self {
            integration_time,
            ..self
        }
    }

    /// Variance of the per-window relative rate fluctuation, `ξ̄²/τ`.
    pub fn window_variance(&self) -> f64 {
        self.technical_power / self.integration_time
    }

    /// Expected count in one window at incident `rate`: `η·rate·τ`.
    pub fn expected_count(&self, rate: f64) -> f64 {
        self.detection_efficiency * rate * self.integration_time
    }

    /// Variance of a single window count with mean `mean_count`.
    pub fn count_variance(&self, mean_count: f64) -> f64 {
        mean_count + mean_count * mean_count * self.window_variance()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    pub counts: u64,
    pub window_start: f64,
    pub window_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSample {
    /// `(I₊ − I₋)/(I₊ + I₋)`
    pub n_value: f64,
    pub i_plus: CountRecord,
    pub i_minus: CountRecord,
}

/// Stream for trial `index` of an ensemble seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Counts one window starting at `window_start` with incident `rate`.
pub fn simulate_count<R: Rng + ?Sized>(
    model: &NoiseModel,
    rate: f64,
    window_start: f64,
    rng: &mut R,
) -> Result<CountRecord> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidRate(rate));
    }
    let sigma2 = model.window_variance();
    let fluctuation = if sigma2 > 0.0 {
        Normal::new(0.0, sqrt(sigma2))
            .map_err(|_| Error::InvalidModel("technical noise variance"))?
            .sample(rng)
    } else {
        0.0
    };
    let mean = model.expected_count((rate * (1.0 + fluctuation)).max(0.0));
    let counts = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|_| Error::InvalidRate(rate))?
            .sample(rng) as u64
    } else {
        0
    };
    Ok(CountRecord {
        counts,
        window_start,
        window_length: model.integration_time,
    })
}

pub fn ratio_estimator(plus: CountRecord, minus: CountRecord) -> Result<EstimatorSample> {
    let total = plus.counts + minus.counts;
    if total == 0 {
        return Err(Error::EmptyWindow);
    }
    let n_value = (plus.counts as f64 - minus.counts as f64) / total as f64;
    Ok(EstimatorSample {
        n_value,
        i_plus: plus,
        i_minus: minus,
    })
}

/// Predicted variance of the ratio estimator for independent windows with
/// expected counts `mean_plus` and `mean_minus`.
///
/// First-order propagation through `n = (I₊ − I₋)/(I₊ + I₋)`:
/// `Var n = 4(⟨I₋⟩²·Var I₊ + ⟨I₊⟩²·Var I₋)/(⟨I₊⟩ + ⟨I₋⟩)⁴`, with
/// `Var I = ⟨I⟩ + ⟨I⟩²ξ̄²/τ`. At balanced outputs this is
/// `(Var I₊ + Var I₋)/(⟨I₊⟩ + ⟨I₋⟩)²`, giving `(1/τ)(1/ηM + ξ̄²/2)` for the
/// direct scheme and `(1/τ)(1/ηνP + ξ̄²/2)` for the geometric one.
pub fn predicted_ratio_variance(mean_plus: f64, mean_minus: f64, model: &NoiseModel) -> Result<f64> {
    let sum = mean_plus + mean_minus;
    if !(mean_plus >= 0.0 && mean_minus >= 0.0 && sum > 0.0) {
        return Err(Error::InvalidRate(sum));
    }
    let vp = model.count_variance(mean_plus);
    let vm = model.count_variance(mean_minus);
    let s2 = sum * sum;
    Ok(4.0 * (mean_minus * mean_minus * vp + mean_plus * mean_plus * vm) / (s2 * s2))
}

/// A two-window difference-over-sum measurement that can be repeated.
pub trait Measurement {
    fn model(&self) -> &NoiseModel;

    /// Incident rates for the `+` and `−` windows.
    fn rates(&self) -> (f64, f64);

    /// Expected counts `(⟨I₊⟩, ⟨I₋⟩)`.
    fn expected_counts(&self) -> (f64, f64) {
        let (p, m) = self.rates();
        (self.model().expected_count(p), self.model().expected_count(m))
    }

    /// Noiseless ensemble mean of the estimator.
    fn expected_n(&self) -> f64 {
        let (p, m) = self.expected_counts();
        (p - m) / (p + m)
    }

    fn predicted_variance(&self) -> Result<f64> {
        let (p, m) = self.expected_counts();
        predicted_ratio_variance(p, m, self.model())
    }

    /// One sequential `+`/`−` window pair with the given generator.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, index: u64) -> Result<EstimatorSample> {
        let model = self.model();
        let (rp, rm) = self.rates();
        let t0 = 2.0 * index as f64 * model.integration_time;
        let plus = simulate_count(model, rp, t0, rng)?;
        let minus = simulate_count(model, rm, t0 + model.integration_time, rng)?;
        ratio_estimator(plus, minus)
    }

    /// Trial `index` on its own stream; `Ok(None)` when both windows are empty.
    fn trial(&self, index: u64) -> Result<Option<EstimatorSample>> {
        let mut rng = trial_rng(self.model().rng_seed, index);
        match self.sample(&mut rng, index) {
            Ok(s) => Ok(Some(s)),
            Err(Error::EmptyWindow) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Direct polarimetry of θ₁ with 135° (`+`) and 45° (`−`) analyzers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectMeasurement {
    pub theta1: f64,
    pub model: NoiseModel,
}

impl Measurement for DirectMeasurement {
    fn model(&self) -> &NoiseModel {
        &self.model
    }

    fn rates(&self) -> (f64, f64) {
        let psi1 = PolarizationState::from_real(-sin(self.theta1), cos(self.theta1));
        let plus = PolarizationState::antidiagonal().inner(&psi1).norm_sqr();
        let minus = PolarizationState::diagonal().inner(&psi1).norm_sqr();
        (self.model.mean_rate * plus, self.model.mean_rate * minus)
    }
}

/// Geometric-phase measurement: the two out-of-phase N-photon outputs
/// after post-selection, counted sequentially.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricMeasurement {
    pub config: SetupConfig,
    /// Fringe visibility `V_f`; 1 for the ideal setup.
    pub visibility: f64,
    pub model: NoiseModel,
}

impl GeometricMeasurement {
    /// Uses the offset χ = (N+1)π/2N that nulls the estimator at θ₁ = 0.
    pub fn nulled(config: SetupConfig, visibility: f64, model: NoiseModel) -> Self {
        Self {
            config: config.with_null_offset(),
            visibility,
            model,
        }
    }

    fn fringe_cos(&self) -> f64 {
        // nphoton_postselect only fails for tan θ₂ = 0, which SetupConfig rejects
        let r = nphoton_postselect(&self.config).expect("validated setup");
        cos(f64::from(r.photon_number) * self.config.chi() - r.phase)
    }

    /// N-photon post-selection probability P(θ₁, θ₂).
    pub fn success_probability(&self) -> f64 {
        nphoton_postselect(&self.config)
            .expect("validated setup")
            .success_probability
    }
}

impl Measurement for GeometricMeasurement {
    fn model(&self) -> &NoiseModel {
        &self.model
    }

    fn rates(&self) -> (f64, f64) {
        let base = 0.5 * self.model.mean_rate * self.success_probability();
        let c = self.visibility * self.fringe_cos();
        (base * (1.0 + c), base * (1.0 - c))
    }
}

/// One direct-measurement sample drawn from `rng`.
pub fn direct_measurement<R: Rng + ?Sized>(
    theta1: f64,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<EstimatorSample> {
    DirectMeasurement {
        theta1,
        model: *model,
    }
    .sample(rng, 0)
}

/// One geometric-phase sample drawn from `rng`, using the offset χ stored
/// in `config` (see [`SetupConfig::with_null_offset`]).
pub fn gp_measurement<R: Rng + ?Sized>(
    config: &SetupConfig,
    visibility: f64,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<EstimatorSample> {
    GeometricMeasurement {
        config: *config,
        visibility,
        model: *model,
    }
    .sample(rng, 0)
}

/// Largest accepted value of `(|θ₁|/tanθ₂)/tan(1/2N)` for the linear
/// response `⟨n⟩ ≈ 2NV_fθ₁/tanθ₂`.
pub const SMALL_ANGLE_LIMIT: f64 = 0.5;

/// Ratio `(|θ₁|/tanθ₂)/tan(1/2N)`; errors with
/// [`Error::SmallAngleViolation`] above [`SMALL_ANGLE_LIMIT`]. The error is
/// advisory: the simulation itself stays valid outside the linear regime.
pub fn check_small_angle(config: &SetupConfig) -> Result<f64> {
    let n = f64::from(config.photon_number());
    let ratio = (config.theta1().abs() / tan(config.theta2()).abs()) / tan(1.0 / (2.0 * n));
    if ratio > SMALL_ANGLE_LIMIT {
        return Err(Error::SmallAngleViolation { ratio });
    }
    Ok(ratio)
}

/// Relative deviation of `I₊ + I₋` from its mean beyond which a trial is
/// outside the linearized-estimator regime.
pub const REGIME_DEVIATION: f64 = 0.3;

/// Ensemble statistics of the ratio estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSummary {
    pub trials: usize,
    pub empty_windows: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_err: f64,
    /// Fraction of trials whose total count deviates from its expectation
    /// by more than [`REGIME_DEVIATION`].
    pub regime_violation_fraction: f64,
}

/// Reduces per-trial outcomes in index order.
pub fn summarize(outcomes: &[Option<EstimatorSample>], expected_total: f64) -> EnsembleSummary {
    let values: Vec<f64> = outcomes.iter().flatten().map(|s| s.n_value).collect();
    let moments = Moments::of(&values);
    let violations = outcomes
        .iter()
        .filter(|o| {
            let total = o.map_or(0, |s| s.i_plus.counts + s.i_minus.counts) as f64;
            (total - expected_total).abs() > REGIME_DEVIATION * expected_total
        })
        .count();
    EnsembleSummary {
        trials: outcomes.len(),
        empty_windows: outcomes.len() - values.len(),
        mean: moments.mean,
        variance: moments.variance,
        std_err: moments.std_err(),
        regime_violation_fraction: if outcomes.is_empty() {
            0.0
        } else {
            violations as f64 / outcomes.len() as f64
        },
    }
}

/// Runs trials `0..trials` sequentially.
pub fn run_ensemble<M: Measurement>(measurement: &M, trials: usize) -> Result<EnsembleSummary> {
    let outcomes = (0..trials as u64)
        .map(|i| measurement.trial(i))
        .collect::<Result<Vec<_>>>()?;
    let (p, m) = measurement.expected_counts();
    Ok(summarize(&outcomes, p + m))
}
