//! `coherence_compare`: free against pulsed single-qubit purity.

use bbjump::decoupling::{averaged_coherence_gap, extrapolate_to_zero, purity_loss_slope, CoherenceMode, SLOPE_POINTS};
use bbjump::Complex64;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::report::{CoherenceSummary, ExperimentReport, ReportRow, StateSlope};

pub const COLUMNS: &[&str] =
    &["gamma_tc", "free_mean", "pulsed_mean", "gap", "gap_over_gamma_tc", "free_loss_rate", "pulsed_loss_rate"];

/// `|β|²` of the probe states; the relative phase is fixed at `PROBE_PHASE`.
pub const PROBE_BETA_SQ: [f64; 6] = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0];
const PROBE_PHASE: f64 = 0.7;

pub fn state_slope(beta_sq: f64, phase: f64) -> bbjump::Result<StateSlope> {
    let alpha = Complex64::new((1.0 - beta_sq).sqrt(), 0.0);
    let beta = Complex64::from_polar(beta_sq.sqrt(), phase);
    let free = purity_loss_slope(alpha, beta, CoherenceMode::Free)?.extrapolated;
    let pulsed = purity_loss_slope(alpha, beta, CoherenceMode::Pulsed)?.extrapolated;
    let a2 = 1.0 - beta_sq;
    let free_derived = 2.0 * beta_sq * beta_sq;
    let pulsed_derived = a2 * a2 + beta_sq * beta_sq;
    Ok(StateSlope {
        beta_sq,
        beta_phase: phase,
        free_measured: free,
        free_derived,
        free_printed: beta_sq,
        pulsed_measured: pulsed,
        pulsed_derived,
        free_relative_error: ((free - free_derived) / free_derived).abs(),
        pulsed_relative_error: ((pulsed - pulsed_derived) / pulsed_derived).abs(),
    })
}

pub fn coherence_compare(config: &ExperimentConfig, report: &mut ExperimentReport) -> bbjump::Result<()> {
    let gamma = if config.max_rate() > 0.0 { config.max_rate() } else { 1.0 };
    let points: Vec<f64> =
        if config.sweep.gamma_tc.is_empty() { SLOPE_POINTS.to_vec() } else { config.sweep.gamma_tc.clone() };
    let samples = config.haar_samples();
    let mut free_rates = Vec::new();
    let mut pulsed_rates = Vec::new();
    for (k, &x) in points.iter().enumerate() {
        let avg = averaged_coherence_gap(gamma, x / gamma, samples, config.base_seed)?;
        let (fr, pr) = ((1.0 - avg.free) / x, (1.0 - avg.pulsed) / x);
        free_rates.push(fr);
        pulsed_rates.push(pr);
        report.rows.push(
            ReportRow::new(k, format!("gamma_tc={x}"))
                .with("gamma_tc", x)
                .with("free_mean", avg.free)
                .with("pulsed_mean", avg.pulsed)
                .with("gap", avg.gap)
                .with("gap_over_gamma_tc", avg.gap / x)
                .with("free_loss_rate", fr)
                .with("pulsed_loss_rate", pr),
        );
    }
    let states = PROBE_BETA_SQ
        .par_iter()
        .map(|&b| state_slope(b, PROBE_PHASE))
        .collect::<bbjump::Result<Vec<_>>>()?;
    let max_relative_error =
        states.iter().map(|s| s.free_relative_error.max(s.pulsed_relative_error)).fold(0.0, f64::max);
    let (free_avg, pulsed_avg) = if points.len() == 3 {
        (extrapolate_to_zero(&points, &free_rates), extrapolate_to_zero(&points, &pulsed_rates))
    } else {
        let k = (0..points.len()).min_by(|&a, &b| points[a].total_cmp(&points[b])).unwrap_or(0);
        (free_rates.get(k).copied().unwrap_or(f64::NAN), pulsed_rates.get(k).copied().unwrap_or(f64::NAN))
    };
    report.checks_passed = Some(max_relative_error <= 0.01);
    report.coherence = Some(CoherenceSummary {
        gamma,
        haar_samples: samples,
        states,
        max_relative_error,
        derived_average_slope: 2.0 / 3.0,
        measured_average_free_slope: free_avg,
        measured_average_pulsed_slope: pulsed_avg,
    });
    Ok(())
}
