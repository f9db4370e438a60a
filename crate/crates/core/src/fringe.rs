//! Synthetic interference fringes, sinusoid fitting, and phase-shift
//! curves referenced to θ₁ = −90°.
//!
//! The fitter models counts as `a + c·cos(kχ) + s·sin(kχ)` with period
//! `2π/k`. For a trial period the linear parameters follow from weighted
//! least squares; the period is located by a coarse grid plus golden-section
//! search and then polished, together with the linear parameters, by
//! Gauss–Newton steps. Weights are Poisson (`1/μ`) and re-evaluated from
//! the fitted model until the parameters stop moving.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use libm::{atan2, cos, sin, sqrt};
use rand::Rng;

use crate::counting::{simulate_count, trial_rng, NoiseModel};
use crate::error::{Error, FitFailure, Result};
use crate::geometric::continuous_half_angle;
use crate::linalg::{cholesky, cholesky_solve, inverse};
use crate::nphoton::nphoton_postselect;
use crate::phase::{unwrap, wrap};
use crate::polarization::SetupConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionScheme {
    /// One-photon fringe at a single detector.
    Single,
    /// N-photon coincidences.
    Coincidence,
}

/// How many counts a scan point collects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exposure {
    /// Mean count per point `ηντP` from the noise model (ν = `mean_rate`).
    Model,
    /// Mean count per point, averaged over the fringe, fixed to this value.
    MeanCounts(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub chi_values: Vec<f64>,
    pub counts: Vec<u64>,
    pub scheme: DetectionScheme,
    pub config: SetupConfig,
    pub model: NoiseModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    /// b in `a + b·cos(2πχ/period − phase)`.
    pub amplitude: f64,
    pub offset: f64,
    /// In (−π, π], referenced at χ = 0.
    pub phase: f64,
    pub period: f64,
    pub visibility: f64,
    pub residual_rms: f64,
    /// Infinite when the amplitude is not resolved (b < 3σ_b).
    pub phase_stderr: f64,
    pub visibility_stderr: f64,
    /// Zero when the period was held fixed.
    pub period_stderr: f64,
    pub reduced_chi2: f64,
}

/// `n` points spaced `span/n` apart, symmetric about χ = 0.
pub fn chi_grid(n: usize, span: f64) -> Vec<f64> {
    let step = span / n as f64;
    (0..n)
        .map(|j| (j as f64 + 0.5) * step - 0.5 * span)
        .collect()
}

fn scheme_for(config: &SetupConfig) -> DetectionScheme {
    if config.photon_number() == 1 {
        DetectionScheme::Single
    } else {
        DetectionScheme::Coincidence
    }
}

/// Noiseless mean count at every χ: `C·[1 + f·V_f·cos(Nχ − Φ_f)]`, where
/// `C` is set by `exposure`.
pub fn expected_counts(
    config: &SetupConfig,
    model: &NoiseModel,
    chi_values: &[f64],
    visibility_factor: f64,
    exposure: Exposure,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&visibility_factor) {
        return Err(Error::InvalidScan("visibility factor must lie in [0, 1]"));
    }
    let r = nphoton_postselect(config)?;
    let level = match exposure {
        Exposure::Model => model.expected_count(model.mean_rate * r.success_probability),
        Exposure::MeanCounts(c) if c >= 0.0 && c.is_finite() => c,
        Exposure::MeanCounts(c) => return Err(Error::InvalidRate(c)),
    };
    let nf = f64::from(r.photon_number);
    let v = visibility_factor * r.visibility;
    Ok(chi_values
        .iter()
        .map(|&chi| level * (1.0 + v * cos(nf * chi - r.phase)))
        .collect())
}

fn check_grid(chi_values: &[f64]) -> Result<()> {
    if chi_values.len() < 8 {
        return Err(Error::InvalidScan("a scan needs at least 8 points"));
    }
    if chi_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidScan("chi values must be strictly increasing"));
    }
    Ok(())
}

/// Draws one count per χ from `rng`. Technical noise is drawn independently
/// per point.
pub fn synthesize_scan_with<R: Rng + ?Sized>(
    config: &SetupConfig,
    model: &NoiseModel,
    chi_values: &[f64],
    visibility_factor: f64,
    exposure: Exposure,
    rng: &mut R,
) -> Result<FringeScan> {
    check_grid(chi_values)?;
    let means = expected_counts(config, model, chi_values, visibility_factor, exposure)?;
    // simulate_count multiplies by ητ; hand it the equivalent rate
    let per_rate = model.expected_count(1.0);
    if !(per_rate > 0.0) {
        return Err(Error::InvalidModel("detection efficiency must be > 0 to synthesize"));
    }
    let counts = means
        .iter()
        .zip(chi_values)
        .map(|(&mu, &chi)| simulate_count(model, mu / per_rate, chi, rng).map(|c| c.counts))
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeScan {
        chi_values: chi_values.to_vec(),
        counts,
        scheme: scheme_for(config),
        config: *config,
        model: *model,
    })
}

/// [`synthesize_scan_with`] on stream 0 of the model's seed.
pub fn synthesize_scan(
    config: &SetupConfig,
    model: &NoiseModel,
    chi_values: &[f64],
    visibility_factor: f64,
    exposure: Exposure,
) -> Result<FringeScan> {
    let mut rng = trial_rng(model.rng_seed, 0);
    synthesize_scan_with(config, model, chi_values, visibility_factor, exposure, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Period search interval as multiples of the hint; `None` holds the
    /// period at the hint.
    pub period_range: Option<(f64, f64)>,
    /// Coarse grid points for the period search.
    pub coarse_points: usize,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            period_range: Some((0.8, 1.25)),
            coarse_points: 48,
            max_iterations: 100,
        }
    }
}

impl FitOptions {
    pub fn fixed_period() -> Self {
        Self {
            period_range: None,
            ..Self::default()
        }
    }

    pub fn with_period_range(lo: f64, hi: f64) -> Self {
        Self {
            period_range: Some((lo, hi)),
            ..Self::default()
        }
    }
}

fn diverged(f: FitFailure) -> Error {
    Error::FitDiverged(f)
}

/// Solves the weighted normal equations `JᵀWJ·x = JᵀW·r` with Jacobi
/// scaling. Returns the solution and `(JᵀWJ)⁻¹`.
fn normal_solve<const P: usize>(
    n: usize,
    row: impl Fn(usize) -> [f64; P],
    resid: &[f64],
    w: &[f64],
) -> Option<([f64; P], [[f64; P]; P])> {
    let mut a = [[0.0; P]; P];
    let mut b = [0.0; P];
    for i in 0..n {
        let j = row(i);
        for r in 0..P {
            b[r] += w[i] * j[r] * resid[i];
            for c in 0..=r {
                a[r][c] += w[i] * j[r] * j[c];
            }
        }
    }
    let mut d = [0.0; P];
    for r in 0..P {
        if !(a[r][r] > 0.0) || !a[r][r].is_finite() {
            return None;
        }
        d[r] = 1.0 / sqrt(a[r][r]);
    }
    let mut scaled = [[0.0; P]; P];
    for r in 0..P {
        for c in 0..=r {
            scaled[r][c] = a[r][c] * d[r] * d[c];
            scaled[c][r] = scaled[r][c];
        }
    }
    let l = cholesky(scaled)?;
    let mut rhs = [0.0; P];
    for r in 0..P {
        rhs[r] = b[r] * d[r];
    }
    let y = cholesky_solve(&l, &rhs);
    let inv = inverse(&l);
    let mut x = [0.0; P];
    let mut cov = [[0.0; P]; P];
    for r in 0..P {
        x[r] = y[r] * d[r];
        for c in 0..P {
            cov[r][c] = inv[r][c] * d[r] * d[c];
        }
    }
    Some((x, cov))
}

struct Problem<'a> {
    chi: &'a [f64],
    y: &'a [f64],
}

impl Problem<'_> {
    fn model(&self, p: &[f64; 4], i: usize) -> f64 {
        let x = p[3] * self.chi[i];
        p[0] + p[1] * cos(x) + p[2] * sin(x)
    }

    fn chi2(&self, p: &[f64; 4], w: &[f64]) -> f64 {
        (0..self.y.len())
            .map(|i| {
                let r = self.y[i] - self.model(p, i);
                w[i] * r * r
            })
            .sum()
    }

    /// Linear parameters at fixed wavenumber `k`.
    fn linear(&self, k: f64, w: &[f64]) -> Option<([f64; 4], [[f64; 3]; 3])> {
        let (x, cov) = normal_solve::<3>(
            self.y.len(),
            |i| {
                let t = k * self.chi[i];
                [1.0, cos(t), sin(t)]
            },
            self.y,
            w,
        )?;
        Some(([x[0], x[1], x[2], k], cov))
    }

    fn jacobian_row(&self, p: &[f64; 4], i: usize) -> [f64; 4] {
        let chi = self.chi[i];
        let (s, c) = (sin(p[3] * chi), cos(p[3] * chi));
        [1.0, c, s, chi * (p[2] * c - p[1] * s)]
    }

    /// Gauss–Newton on all four parameters with step halving.
    fn polish(&self, mut p: [f64; 4], w: &[f64]) -> Result<[f64; 4]> {
        let mut current = self.chi2(&p, w);
        for _ in 0..50 {
            let resid: Vec<f64> = (0..self.y.len()).map(|i| self.y[i] - self.model(&p, i)).collect();
            let (step, _) = normal_solve::<4>(self.y.len(), |i| self.jacobian_row(&p, i), &resid, w)
                .ok_or(diverged(FitFailure::RankDeficient))?;
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = [
                    p[0] + scale * step[0],
                    p[1] + scale * step[1],
                    p[2] + scale * step[2],
                    p[3] + scale * step[3],
                ];
                let value = self.chi2(&trial, w);
                if value <= current {
                    p = trial;
                    current = value;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted || (scale * step[3]).abs() <= 1e-15 * p[3].abs() {
                break;
            }
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(diverged(FitFailure::NonFinite));
        }
        Ok(p)
    }

    /// Wavenumber minimizing χ² over periods in `[lo, hi]`.
    fn search(&self, lo: f64, hi: f64, coarse: usize, w: &[f64]) -> Result<f64> {
        let cost = |period: f64| {
            self.linear(TAU / period, w)
                .map(|(p, _)| self.chi2(&p, w))
                .unwrap_or(f64::INFINITY)
        };
        let coarse = coarse.max(3);
        let grid: Vec<f64> = (0..coarse)
            .map(|j| lo + (hi - lo) * j as f64 / (coarse - 1) as f64)
            .collect();
        let values: Vec<f64> = grid.iter().map(|&p| cost(p)).collect();
        let best = (0..coarse)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap_or(0);
        if !values[best].is_finite() {
            return Err(diverged(FitFailure::RankDeficient));
        }
        let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(coarse - 1)]);
        let g = 0.5 * (sqrt(5.0) - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (cost(x1), cost(x2));
        while (b - a) > 1e-12 * b {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = cost(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = cost(x2);
            }
        }
        Ok(TAU / (0.5 * (a + b)))
    }
}

/// Fits a sinusoid to a scan. See [`fit_counts`].
pub fn fit_sinusoid(scan: &FringeScan, period_hint: f64, options: &FitOptions) -> Result<FringeFit> {
    let y: Vec<f64> = scan.counts.iter().map(|&c| c as f64).collect();
    fit_counts(&scan.chi_values, &y, period_hint, options)
}

/// Poisson-weighted sinusoid fit of `counts` against `chi`.
///
/// Standard errors come from the inverse normal matrix, scaled by the
/// reduced χ² when that exceeds 1 (technical noise on top of shot noise).
pub fn fit_counts(chi: &[f64], counts: &[f64], period_hint: f64, options: &FitOptions) -> Result<FringeFit> {
    check_grid(chi)?;
    if counts.len() != chi.len() {
        return Err(Error::InvalidScan("chi and counts differ in length"));
    }
    if !(period_hint > 0.0) || !period_hint.is_finite() {
        return Err(Error::InvalidScan("period hint must be positive"));
    }
    let n = chi.len();
    let step = (chi[n - 1] - chi[0]) / (n - 1) as f64;
    let span = chi[n - 1] - chi[0] + step;
    let max_period = match options.period_range {
        Some((lo, hi)) => {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::InvalidScan("period range must satisfy 0 < lo < hi"));
            }
            period_hint * hi
        }
        None => period_hint,
    };
    if span < period_hint.min(max_period) * (1.0 - 1e-9) {
        return Err(diverged(FitFailure::InsufficientSpan));
    }
    if counts.iter().any(|c| !c.is_finite()) {
        return Err(diverged(FitFailure::NonFinite));
    }

    let problem = Problem { chi, y: counts };
    let mut w: Vec<f64> = counts.iter().map(|&c| 1.0 / c.max(1.0)).collect();
    let mut params: Option<[f64; 4]> = None;
    let mut converged = false;
    for _ in 0..options.max_iterations.max(1) {
        let k = match (params, options.period_range) {
            (_, None) => TAU / period_hint,
            (None, Some((lo, hi))) => problem.search(lo * period_hint, hi * period_hint, options.coarse_points, &w)?,
            (Some(p), Some(_)) => p[3],
        };
        let (start, _) = problem.linear(k, &w).ok_or(diverged(FitFailure::RankDeficient))?;
        let next = match options.period_range {
            None => start,
            Some(_) => problem.polish(start, &w)?,
        };
        // convergence is judged on the fitted curve: with no fringe the
        // wavenumber is unidentifiable and may drift without consequence
        let moved = params.map_or(f64::INFINITY, |p| {
            (0..n)
                .map(|i| {
                    let (old, new) = (problem.model(&p, i), problem.model(&next, i));
                    (new - old).abs() / old.abs().max(1.0)
                })
                .fold(0.0, f64::max)
        });
        params = Some(next);
        w = (0..n).map(|i| 1.0 / problem.model(&next, i).max(0.5)).collect();
        if moved <= 1e-8 {
            converged = true;
            break;
        }
    }
    let p = params.ok_or(diverged(FitFailure::Stalled))?;
    if !converged {
        return Err(diverged(FitFailure::Stalled));
    }

    let chi2 = problem.chi2(&p, &w);
    let free = if options.period_range.is_some() { 4 } else { 3 };
    let reduced_chi2 = chi2 / (n - free) as f64;
    let (var_c, var_s, cov_cs, var_a, cov_ac, cov_as, var_k) = match options.period_range {
        Some(_) => {
            let (_, cov) = normal_solve::<4>(n, |i| problem.jacobian_row(&p, i), &vec_zeros(n), &w)
                .ok_or(diverged(FitFailure::RankDeficient))?;
            (cov[1][1], cov[2][2], cov[1][2], cov[0][0], cov[0][1], cov[0][2], cov[3][3])
        }
        None => {
            let (_, cov) = problem.linear(p[3], &w).ok_or(diverged(FitFailure::RankDeficient))?;
            (cov[1][1], cov[2][2], cov[1][2], cov[0][0], cov[0][1], cov[0][2], 0.0)
        }
    };
    let (a, c, s, k) = (p[0], p[1], p[2], p[3]);
    let b = sqrt(c * c + s * s);
    // Poisson weights are absolute; inflate only for overdispersed data
    let scale = reduced_chi2.max(1.0);
    let var_b = if b > 0.0 {
        (c * c * var_c + s * s * var_s + 2.0 * c * s * cov_cs) / (b * b) * scale
    } else {
        f64::INFINITY
    };
    let phase_stderr = if b > 0.0 && b > 3.0 * sqrt(var_b) {
        sqrt((s * s * var_c + c * c * var_s - 2.0 * c * s * cov_cs) * scale) / (b * b)
    } else {
        f64::INFINITY
    };
    let visibility = if a > 0.0 { b / a } else { f64::NAN };
    // gradient of b/a with respect to (a, c, s)
    let visibility_stderr = if a > 0.0 && b > 0.0 {
        let (ga, gc, gs) = (-b / (a * a), c / (a * b), s / (a * b));
        let var = ga * ga * var_a
            + gc * gc * var_c
            + gs * gs * var_s
            + 2.0 * (ga * gc * cov_ac + ga * gs * cov_as + gc * gs * cov_cs);
        sqrt(var * scale)
    } else {
        f64::INFINITY
    };
    let residual_rms = sqrt(
        (0..n)
            .map(|i| {
                let r = counts[i] - problem.model(&p, i);
                r * r
            })
            .sum::<f64>()
            / n as f64,
    );
    let period = TAU / k;
    let fit = FringeFit {
        amplitude: b,
        offset: a,
        phase: wrap(atan2(s, c)),
        period,
        visibility,
        residual_rms,
        phase_stderr,
        visibility_stderr,
        period_stderr: sqrt(var_k * scale) * period / k,
        reduced_chi2,
    };
    if !fit.offset.is_finite() || !fit.amplitude.is_finite() || !fit.period.is_finite() {
        return Err(diverged(FitFailure::NonFinite));
    }
    Ok(fit)
}

fn vec_zeros(n: usize) -> Vec<f64> {
    alloc::vec![0.0; n]
}

/// Settings shared by every point of a phase-shift curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveOptions {
    pub points_per_scan: usize,
    /// χ span of each scan, centered on χ = 0.
    pub chi_span: f64,
    pub exposure: Exposure,
    pub visibility_factor: f64,
    pub fit: FitOptions,
    /// Points with post-selection probability below this are not fitted.
    pub min_success_probability: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            points_per_scan: 50,
            chi_span: 2.0 * TAU,
            exposure: Exposure::MeanCounts(1e3),
            visibility_factor: 1.0,
            fit: FitOptions::default(),
            min_success_probability: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub theta1: f64,
    /// Fringe displacement from the θ₁ = −90° fringe, in fringe periods.
    /// NaN for flagged points.
    pub displacement: f64,
    /// Standard error of `displacement`, combining this point's and the
    /// reference's phase errors.
    pub stderr: f64,
    /// `N[u(θ₁) − u(−90°)]/π` with `u` the continuous half geometric angle.
    pub theory: f64,
    /// Set when the point could not be fitted (low success probability,
    /// failed or unresolved fit).
    pub flagged: bool,
    pub fit: Option<FringeFit>,
}

/// Theoretical displacement in fringe periods relative to θ₁ = −π/2.
pub fn theory_displacement(theta1: f64, theta2: f64, n: u32) -> f64 {
    let u = continuous_half_angle(theta1, theta2) - continuous_half_angle(-PI / 2.0, theta2);
    f64::from(n) * u / PI
}

fn check_curve_grid(theta1_grid: &[f64]) -> Result<()> {
    if theta1_grid.len() < 2 || theta1_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidScan("theta1 grid must be strictly increasing"));
    }
    let (first, last) = (theta1_grid[0], theta1_grid[theta1_grid.len() - 1]);
    if (first + PI / 2.0).abs() > 1e-9 || (last - PI / 2.0).abs() > 1e-9 {
        return Err(Error::InvalidScan("theta1 grid must run from -pi/2 to pi/2"));
    }
    Ok(())
}

/// Synthesizes and fits the fringe at grid point `index`. The scan draws
/// from stream `index` of the model's seed, so points can be evaluated in
/// any order. `Ok(None)` marks a point that is not fittable.
pub fn fit_curve_point(
    theta2: f64,
    theta1: f64,
    n: u32,
    model: &NoiseModel,
    options: &CurveOptions,
    index: u64,
) -> Result<Option<FringeFit>> {
    let config = SetupConfig::new(theta1, theta2, n, 0.0)?;
    let p = nphoton_postselect(&config)?.success_probability;
    if p < options.min_success_probability {
        return Ok(None);
    }
    let chi = chi_grid(options.points_per_scan, options.chi_span);
    let mut rng = trial_rng(model.rng_seed, index);
    let scan = synthesize_scan_with(
        &config,
        model,
        &chi,
        options.visibility_factor,
        options.exposure,
        &mut rng,
    )?;
    match fit_sinusoid(&scan, TAU / f64::from(n), &options.fit) {
        Ok(fit) if fit.phase_stderr.is_finite() => Ok(Some(fit)),
        Ok(_) | Err(Error::FitDiverged(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Unwraps fitted phases along the grid and references them to θ₁ = −π/2.
pub fn assemble_curve(
    theta2: f64,
    theta1_grid: &[f64],
    n: u32,
    fits: &[Option<FringeFit>],
) -> Result<Vec<CurvePoint>> {
    check_curve_grid(theta1_grid)?;
    if fits.len() != theta1_grid.len() {
        return Err(Error::InvalidScan("one fit per grid point is required"));
    }
    let reference = fits[0].ok_or(Error::InvalidScan("reference point at -pi/2 is not fittable"))?;
    let good: Vec<f64> = fits.iter().flatten().map(|f| f.phase).collect();
    let mut unwrapped = unwrap(&good).into_iter();
    let phi0 = reference.phase;
    Ok(theta1_grid
        .iter()
        .zip(fits)
        .map(|(&theta1, fit)| {
            let theory = theory_displacement(theta1, theta2, n);
            match fit {
                Some(f) => {
                    let phi = unwrapped.next().unwrap_or(f64::NAN);
                    CurvePoint {
                        theta1,
                        displacement: (phi - phi0) / TAU,
                        stderr: sqrt(f.phase_stderr * f.phase_stderr + reference.phase_stderr * reference.phase_stderr)
                            / TAU,
                        theory,
                        flagged: false,
                        fit: Some(*f),
                    }
                }
                None => CurvePoint {
                    theta1,
                    displacement: f64::NAN,
                    stderr: f64::NAN,
                    theory,
                    flagged: true,
                    fit: None,
                },
            }
        })
        .collect())
}

/// Fringe displacement versus θ₁ at fixed θ₂, in fringe periods, with the
/// theoretical overlay.
pub fn phase_shift_curve(
    theta2: f64,
    theta1_grid: &[f64],
    n: u32,
    model: &NoiseModel,
    options: &CurveOptions,
) -> Result<Vec<CurvePoint>> {
    check_curve_grid(theta1_grid)?;
    let fits = theta1_grid
        .iter()
        .enumerate()
        .map(|(i, &t1)| fit_curve_point(theta2, t1, n, model, options, i as u64))
        .collect::<Result<Vec<_>>>()?;
    assemble_curve(theta2, theta1_grid, n, &fits)
}

/// Uniform θ₁ grid from −π/2 to π/2 with `count` points.
pub fn theta1_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| -PI / 2.0 + PI * i as f64 / (count - 1) as f64)
        .collect()
}

/// Slope of the displacement at θ₁ = 0 (periods per radian) with its
/// standard error, from a weighted cubic fit over `|θ₁| ≤ half_width`.
pub fn slope_at_zero(curve: &[CurvePoint], half_width: f64) -> Result<(f64, f64)> {
    let pts: Vec<&CurvePoint> = curve
        .iter()
        .filter(|p| !p.flagged && p.theta1.abs() <= half_width && p.stderr > 0.0)
        .collect();
    if pts.len() < 5 {
        return Err(Error::InvalidScan("too few fitted points near theta1 = 0"));
    }
    let y: Vec<f64> = pts.iter().map(|p| p.displacement).collect();
    let w: Vec<f64> = pts.iter().map(|p| 1.0 / (p.stderr * p.stderr)).collect();
    let (x, cov) = normal_solve::<4>(
        pts.len(),
        |i| {
            let t = pts[i].theta1;
            [1.0, t, t * t, t * t * t]
        },
        &y,
        &w,
    )
    .ok_or(diverged(FitFailure::RankDeficient))?;
    Ok((x[1], sqrt(cov[1][1])))
}
