//! `double_jump_scaling`: failure probability against the detection window.
//!
//! Each trajectory is one window of length `t_detect = γt/γ`; every reported
//! jump is corrected only when the window closes, so a single jump is always
//! undone while two or more are not.

use crate::config::ExperimentConfig;
use crate::report::{ExperimentReport, ReportRow, ScalingSummary};
use crate::scenarios::memory::MemoryRun;

pub const COLUMNS: &[&str] = &[
    "gamma_t",
    "failure_probability",
    "failure_stderr",
    "double_jump_fraction",
    "mean_fidelity",
    "fidelity_stderr",
    "jumps",
];

pub const DEFAULT_WINDOWS: [f64; 5] = [0.02, 0.0356, 0.0632, 0.1125, 0.2];

/// Least-squares line through `(ln x, ln y)` for points with `y > 0`:
/// returns `(slope, intercept, points used)`.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> (f64, f64, usize) {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &v)| v > 0.0).map(|(&a, &b)| (a.ln(), b.ln())).collect();
    let n = pts.len();
    if n < 2 {
        return (f64::NAN, f64::NAN, n);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, n)
}

pub fn double_jump_scaling(config: &ExperimentConfig, report: &mut ExperimentReport) -> bbjump::Result<()> {
    let gamma = config.max_rate();
    let windows: Vec<f64> =
        if config.sweep.gamma_t.is_empty() { DEFAULT_WINDOWS.to_vec() } else { config.sweep.gamma_t.clone() };
    let threshold = config.failure_threshold();
    let mut failures = Vec::with_capacity(windows.len());
    let mut last_double = None;
    for (k, &w) in windows.iter().enumerate() {
        let duration = w / gamma;
        let dt = config.effective_dt().min(duration / 10.0);
        let run = MemoryRun::build(config, duration, config.protocol.bb_enabled, Some(duration), None, dt)?;
        let outcome = run.simulate(config.num_trajectories, config.base_seed)?;
        let (p, se) = outcome.failure_fraction(threshold);
        failures.push(p);
        last_double = Some(outcome.double_jump_fraction);
        report.rows.push(
            ReportRow::new(k, format!("gamma_t={w}"))
                .with("gamma_t", w)
                .with("failure_probability", p)
                .with("failure_stderr", se)
                .with("double_jump_fraction", outcome.double_jump_fraction)
                .with("mean_fidelity", outcome.fidelity.mean)
                .with("fidelity_stderr", outcome.fidelity.stderr)
                .with("jumps", outcome.counts.jumps as f64),
        );
    }
    let (slope, intercept, points_used) = log_log_fit(&windows, &failures);
    report.scaling = Some(ScalingSummary { slope, intercept, points_used, failure_threshold: threshold });
    report.double_jump_probability = last_double;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let x = [0.1, 0.2, 0.4, 0.8];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        let (s, c, n) = log_log_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-12 && (c - 3.0f64.ln()).abs() < 1e-12 && n == 4);
        assert_eq!(log_log_fit(&x, &[0.0, 0.0, 0.0, 1.0]).2, 1);
    }
}
