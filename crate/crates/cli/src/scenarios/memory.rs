//! Stored-register experiments: `memory_fidelity` and `detector_sweep`.

use std::sync::Arc;

use bbjump::jump_code::JumpCode;
use bbjump::quantum::{apply, inner_product, StateVector};
use bbjump::trajectory::{lindblad_integrate, run_ensemble, NoiseModel, ProtocolSchedule, RunSettings, TrajectoryRecord};

use crate::config::ExperimentConfig;
use crate::report::{EventCounts, ExperimentReport, FidelityStats, ReportRow};

pub const COLUMNS: &[&str] = &[
    "p_undetected",
    "p_misidentify",
    "mean_fidelity",
    "fidelity_stderr",
    "oracle_fidelity",
    "double_jump_fraction",
    "jumps",
    "detected",
    "undetected",
    "misidentified",
    "recoveries",
    "restarts",
    "undetected_fraction",
    "misidentified_fraction",
];

/// Largest register for which the master-equation cross-check is run.
const ORACLE_MAX_QUBITS: usize = 6;

pub const DEFAULT_DETECTOR_POINTS: [[f64; 2]; 6] =
    [[0.0, 0.0], [0.05, 0.0], [0.1, 0.0], [0.0, 0.05], [0.0, 0.1], [0.1, 0.1]];

/// A fully assembled memory experiment on the physical register.
#[derive(Debug, Clone)]
pub struct MemoryRun {
    pub code: Arc<JumpCode>,
    pub noise: NoiseModel,
    pub schedule: ProtocolSchedule,
    /// Encoded initial state.
    pub initial: StateVector,
    /// Program unitaries applied to `initial`, noise-free.
    pub target: StateVector,
    pub duration: f64,
    pub dt: f64,
    /// Recovery delay in time units, or `None` without recovery.
    pub delay: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TrajectorySummary {
    fidelity: f64,
    counts: EventCounts,
    double_jump: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryOutcome {
    pub fidelity: FidelityStats,
    pub counts: EventCounts,
    /// Fraction of trajectories with a second emission before the first
    /// emission's recovery was due.
    pub double_jump_fraction: f64,
    /// Per-trajectory logical fidelities in index order.
    pub fidelities: Vec<f64>,
}

impl MemoryOutcome {
    /// Fraction of trajectories with fidelity below `threshold`, and its standard error.
    pub fn failure_fraction(&self, threshold: f64) -> (f64, f64) {
        let n = self.fidelities.len() as f64;
        let p = self.fidelities.iter().filter(|&&f| f < threshold).count() as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }
}

impl MemoryRun {
    /// The configured experiment; `protected = false` drops pulses, recovery and parity checks.
    pub fn from_config(config: &ExperimentConfig, protected: bool) -> bbjump::Result<Self> {
        let parity = if protected && config.protocol.parity_check_enabled {
            config.protocol.parity_check_interval
        } else {
            None
        };
        let delay = (protected && config.protocol.qecc_enabled).then(|| config.recovery_delay_time());
        Self::build(config, config.duration, protected && config.protocol.bb_enabled, delay, parity, config.effective_dt())
    }

    pub fn build(
        config: &ExperimentConfig,
        duration: f64,
        pulses: bool,
        delay: Option<f64>,
        parity_interval: Option<f64>,
        dt: f64,
    ) -> bbjump::Result<Self> {
        let code = Arc::new(JumpCode::new(config.n)?);
        let noise = config.noise_model()?;
        let np = config.num_physical();
        let mut schedule = ProtocolSchedule::new(np);
        if pulses {
            config.pulse_schedule().apply_to(&mut schedule, duration)?;
        }
        let initial = code.encode(&config.logical_state()?)?;
        let mut target = initial.clone();
        for (t, op, label) in config.program_unitaries()? {
            if t <= duration {
                target = apply(&op, &target)?;
                schedule.add_unitary(t, op, label)?;
            }
        }
        if let Some(d) = delay {
            schedule.set_recovery(code.clone(), d)?;
        }
        if let Some(interval) = parity_interval {
            let mut k = 1;
            while k as f64 * interval <= duration * (1.0 + 1e-12) {
                schedule.add_parity_check((k as f64 * interval).min(duration), code.clone())?;
                k += 1;
            }
        }
        Ok(Self { code, noise, schedule, initial, target, duration, dt, delay })
    }

    fn settings(&self) -> RunSettings<'_> {
        RunSettings { schedule: &self.schedule, noise: &self.noise, duration: self.duration, dt: self.dt }
    }

    pub fn simulate(&self, num_trajectories: usize, base_seed: u64) -> bbjump::Result<MemoryOutcome> {
        let delay = self.delay.unwrap_or(0.0);
        let summaries = run_ensemble(&self.initial, self.settings(), num_trajectories, base_seed, |record| {
            summarize(&record, &self.target, delay)
        })?
        .into_iter()
        .collect::<bbjump::Result<Vec<_>>>()?;
        let mut counts = EventCounts::default();
        let mut doubles = 0usize;
        let fidelities: Vec<f64> = summaries
            .iter()
            .map(|s| {
                counts.merge(&s.counts);
                doubles += s.double_jump as usize;
                s.fidelity
            })
            .collect();
        Ok(MemoryOutcome {
            fidelity: FidelityStats::from_samples(&fidelities),
            counts,
            double_jump_fraction: doubles as f64 / num_trajectories as f64,
            fidelities,
        })
    }

    /// Fidelity of the master-equation solution with the target, where the
    /// protocol has a master-equation counterpart.
    pub fn oracle_fidelity(&self) -> bbjump::Result<Option<f64>> {
        let np = self.initial.num_qubits();
        if np > ORACLE_MAX_QUBITS || self.schedule.has_parity_checks() || self.delay.is_some_and(|d| d > 0.0) {
            return Ok(None);
        }
        let kmax = self.noise.max_rate();
        let dt = if kmax > 0.0 { self.dt.min(0.01 / kmax) } else { self.dt };
        let rho = lindblad_integrate(&self.initial.projector(), self.duration, &self.noise, &self.schedule, dt)?;
        Ok(Some(rho.expectation_in(&self.target)?))
    }
}

fn summarize(record: &TrajectoryRecord, target: &StateVector, delay: f64) -> bbjump::Result<TrajectorySummary> {
    let events = &record.events;
    let counts = EventCounts {
        trajectories: 1,
        jumps: events.len() as u64,
        detected: events.iter().filter(|e| e.is_detected()).count() as u64,
        undetected: events.iter().filter(|e| !e.is_detected()).count() as u64,
        misidentified: events.iter().filter(|e| e.is_misidentified()).count() as u64,
        recoveries: record.applied_recoveries.len() as u64,
        restarts: record.restarts as u64,
    };
    let double_jump = delay > 0.0 && events.windows(2).any(|w| w[1].time - w[0].time <= delay * (1.0 + 1e-12));
    Ok(TrajectorySummary {
        fidelity: inner_product(target, &record.final_state)?.norm_sqr(),
        counts,
        double_jump,
    })
}

pub(crate) fn outcome_row(
    point: usize,
    label: &str,
    config: &ExperimentConfig,
    outcome: &MemoryOutcome,
    oracle: Option<f64>,
) -> ReportRow {
    let c = &outcome.counts;
    let jumps = c.jumps.max(1) as f64;
    let mut row = ReportRow::new(point, label)
        .with("p_undetected", config.noise.p_undetected)
        .with("p_misidentify", config.noise.p_misidentify)
        .with("mean_fidelity", outcome.fidelity.mean)
        .with("fidelity_stderr", outcome.fidelity.stderr)
        .with("double_jump_fraction", outcome.double_jump_fraction)
        .with("jumps", c.jumps as f64)
        .with("detected", c.detected as f64)
        .with("undetected", c.undetected as f64)
        .with("misidentified", c.misidentified as f64)
        .with("recoveries", c.recoveries as f64)
        .with("restarts", c.restarts as f64)
        .with("undetected_fraction", c.undetected as f64 / jumps)
        .with("misidentified_fraction", c.misidentified as f64 / jumps);
    if let Some(f) = oracle {
        row.set("oracle_fidelity", f);
    }
    row
}

pub fn memory_fidelity(config: &ExperimentConfig, report: &mut ExperimentReport) -> bbjump::Result<()> {
    let protected = MemoryRun::from_config(config, true)?;
    let unprotected = MemoryRun::from_config(config, false)?;
    let p = protected.simulate(config.num_trajectories, config.base_seed)?;
    let u = unprotected.simulate(config.num_trajectories, config.base_seed)?;
    report.rows.push(outcome_row(0, "protected", config, &p, protected.oracle_fidelity()?));
    report.rows.push(outcome_row(1, "unprotected", config, &u, unprotected.oracle_fidelity()?));
    let spread = (p.fidelity.stderr.powi(2) + u.fidelity.stderr.powi(2)).sqrt();
    report.separation_sigma = (spread > 0.0).then(|| (p.fidelity.mean - u.fidelity.mean) / spread);
    report.fidelity = Some(p.fidelity);
    report.counts = Some(p.counts);
    report.double_jump_probability = Some(p.double_jump_fraction);
    Ok(())
}

pub fn detector_sweep(config: &ExperimentConfig, report: &mut ExperimentReport) -> bbjump::Result<()> {
    let points: Vec<[f64; 2]> = if config.sweep.detector.is_empty() {
        DEFAULT_DETECTOR_POINTS
            .into_iter()
            .filter(|[_, pm]| config.num_physical() > 1 || *pm == 0.0)
            .collect()
    } else {
        config.sweep.detector.clone()
    };
    let mut total = EventCounts::default();
    for (k, [pu, pm]) in points.into_iter().enumerate() {
        let mut c = config.clone();
        c.noise.p_undetected = pu;
        c.noise.p_misidentify = pm;
        let run = MemoryRun::from_config(&c, true)?;
        // common random numbers across points
        let outcome = run.simulate(c.num_trajectories, c.base_seed)?;
        total.merge(&outcome.counts);
        let label = format!("pu={pu},pm={pm}");
        report.rows.push(outcome_row(k, &label, &c, &outcome, run.oracle_fidelity()?));
    }
    report.counts = Some(total);
    Ok(())
}
