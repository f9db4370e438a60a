//! Rayon versions of the core ensemble and curve runners. Each work item
//! draws from its own stream and results are collected in index order, so
//! the output equals the sequential one bit for bit.

use geophase_core::counting::{summarize, EnsembleSummary, Measurement};
use geophase_core::fringe::{assemble_curve, fit_curve_point, CurveOptions, CurvePoint};
use geophase_core::{NoiseModel, Result};
use rayon::prelude::*;

pub fn run_ensemble<M: Measurement + Sync>(measurement: &M, trials: usize) -> Result<EnsembleSummary> {
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| measurement.trial(i))
        .collect::<Result<Vec<_>>>()?;
    let (p, m) = measurement.expected_counts();
    Ok(summarize(&outcomes, p + m))
}

pub fn phase_shift_curve(
    theta2: f64,
    theta1_grid: &[f64],
    n: u32,
    model: &NoiseModel,
    options: &CurveOptions,
) -> Result<Vec<CurvePoint>> {
    let fits = theta1_grid
        .par_iter()
        .enumerate()
        .map(|(i, &t1)| fit_curve_point(theta2, t1, n, model, options, i as u64))
        .collect::<Result<Vec<_>>>()?;
    assemble_curve(theta2, theta1_grid, n, &fits)
}
