//! Monte-Carlo orchestration across seeds and worker threads.

use std::fmt;

use crate::env::RewardStream;
use crate::error::Error;
use crate::harness::config::{ExperimentConfig, InstanceSpec, ScheduleSpec};
use crate::instance::{BanditInstance, SphereInstance};
use crate::linalg::Matrix;
use crate::policy::{self, TrialOptions};
use crate::schedule::{Schedule, ScheduleKind};
use crate::theory::{self, TheoryConstants};

/// Per-trial seeding is salted per policy lane so baselines do not share
/// reward streams with the two-phase runs.
fn lane_seed(base: u64, lane: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in lane.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    base ^ h
}

/// Errors from building or running an experiment.
#[derive(Debug)]
pub enum HarnessError {
    Config(Vec<String>),
    Build(Error),
    Trial(Error),
    Io(std::io::Error),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(errs) => {
                writeln!(f, "invalid config:")?;
                for e in errs {
                    writeln!(f, "  - {e}")?;
                }
                Ok(())
            }
            HarnessError::Build(e) => write!(f, "cannot build experiment: {e}"),
            HarnessError::Trial(e) => write!(f, "trial failed: {e}"),
            HarnessError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e)
    }
}

/// The instance an experiment actually runs on.
#[derive(Debug, Clone)]
pub enum BuiltInstance {
    Finite(BanditInstance),
    Sphere(SphereInstance),
}

impl BuiltInstance {
    pub fn dimension(&self) -> usize {
        match self {
            BuiltInstance::Finite(i) => i.n(),
            BuiltInstance::Sphere(s) => s.dimension(),
        }
    }

    /// Number of arms; 0 stands for the uncountable sphere.
    pub fn arm_count(&self) -> usize {
        match self {
            BuiltInstance::Finite(i) => i.m(),
            BuiltInstance::Sphere(_) => 0,
        }
    }
}

/// Build the instance a config describes.
pub fn build_instance(config: &ExperimentConfig) -> Result<BuiltInstance, HarnessError> {
    match &config.instance {
        InstanceSpec::FiniteInline { arm_rows, preference, weights } => {
            let n = arm_rows.len();
            let m = arm_rows[0].len();
            let cols: Vec<Vec<f64>> =
                (0..m).map(|j| arm_rows.iter().map(|r| r[j]).collect()).collect();
            let arms = Matrix::from_columns(n, &cols).map_err(HarnessError::Build)?;
            BanditInstance::new(arms, preference.clone(), weights.clone())
                .map(BuiltInstance::Finite)
                .map_err(HarnessError::Build)
        }
        InstanceSpec::FiniteGenerated { dimension, arm_count, instance_seed, preference_norm } => {
            BanditInstance::generate(*dimension, *arm_count, *instance_seed, *preference_norm)
                .map(BuiltInstance::Finite)
                .map_err(HarnessError::Build)
        }
        InstanceSpec::SphereInline { preference } => SphereInstance::new(preference.clone())
            .map(BuiltInstance::Sphere)
            .map_err(HarnessError::Build),
        InstanceSpec::SphereGenerated { dimension, instance_seed, preference_norm } => {
            let mut stream = RewardStream::new(*instance_seed);
            let pref = loop {
                let v: Vec<f64> = (0..*dimension).map(|_| stream.next_gaussian()).collect();
                let norm = crate::linalg::norm2(&v);
                if norm > 1e-6 {
                    break v.iter().map(|x| x / norm * preference_norm).collect::<Vec<f64>>();
                }
            };
            SphereInstance::new(pref).map(BuiltInstance::Sphere).map_err(HarnessError::Build)
        }
    }
}

/// Resolve the schedule spec against the instance dimension.
pub fn build_schedule(config: &ExperimentConfig, dimension: usize) -> Result<Schedule, HarnessError> {
    let kind = match &config.schedule {
        ScheduleSpec::Lls => ScheduleKind::Lls,
        ScheduleSpec::LinearOverN => ScheduleKind::LinearOverN(dimension as u32),
        ScheduleSpec::Poly(d) => ScheduleKind::Poly(*d),
        ScheduleSpec::Custom(t) => ScheduleKind::Custom(t.clone()),
    };
    Schedule::new(kind).map_err(HarnessError::Build)
}

/// One mean-regret curve with standard errors, plus the theoretical bound
/// where one applies (the two-phase policy with computable constants).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCurve {
    pub policy: String,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    pub bound: Option<Vec<f64>>,
}

/// Aggregated experiment output; a pure function of the config.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub checkpoints: Vec<u64>,
    pub curves: Vec<PolicyCurve>,
    pub constants: Option<TheoryConstants>,
    /// Why constants/bounds are absent, when they are.
    pub constants_note: Option<String>,
    /// Set when any two-phase mean exceeds its bound; the CLI turns this
    /// into a nonzero exit because the bounds are theorems.
    pub bound_violation: bool,
    pub dimension: usize,
    pub arm_count: usize,
    /// Indices of the best arms (empty in sphere mode, where the best arm
    /// is `z*/‖z*‖` rather than a column).
    pub best_set: Vec<usize>,
    /// `w_V α*_V`, the per-step value of an optimal pull.
    pub best_value: f64,
    pub trials: u64,
    pub base_seed: u64,
    pub config_hash: String,
    pub version: String,
}

impl ExperimentReport {
    pub fn curve(&self, policy: &str) -> Option<&PolicyCurve> {
        self.curves.iter().find(|c| c.policy == policy)
    }
}

/// Run every policy lane of the experiment over `trials` seeded trials,
/// distributing trials over `jobs` worker threads. The report is identical
/// for every `jobs >= 1`.
pub fn run_experiment(
    config: &ExperimentConfig,
    jobs: usize,
) -> Result<ExperimentReport, HarnessError> {
    let jobs = jobs.max(1);
    let built = build_instance(config)?;
    let sched = build_schedule(config, built.dimension())?;
    let checkpoints = config.checkpoints.clone();

    // Theory constants: absence downgrades bounds, not the curves.
    let (constants, constants_note) = match &built {
        BuiltInstance::Finite(inst) => {
            let probe = policy::choose_probe_set(inst).map_err(HarnessError::Build)?;
            match theory::compute_constants(inst, &probe, &sched) {
                Ok(c) => (Some(c), None),
                Err(e @ Error::DegenerateDelta) | Err(e @ Error::ScheduleNotAdmissible { .. }) => {
                    (None, Some(format!("no bound emitted: {e}")))
                }
                Err(e) => return Err(HarnessError::Build(e)),
            }
        }
        BuiltInstance::Sphere(s) => {
            (Some(TheoryConstants::for_sphere(s.preference_norm())), None)
        }
    };

    let mut curves = Vec::new();
    let two_phase = run_lane(&built, &sched, config, jobs, "two_phase")?;
    let bound = constants.as_ref().and_then(|c| match &built {
        BuiltInstance::Finite(inst) => Some(
            checkpoints.iter().map(|&t| theory::bound_finite(c, inst, &sched, t)).collect(),
        ),
        BuiltInstance::Sphere(s) => {
            let per: Option<Vec<f64>> = checkpoints
                .iter()
                .map(|&t| theory::bound_infinite(c, s.dimension(), s.preference_norm(), t).ok())
                .collect();
            per
        }
    });
    let mut bound_violation = false;
    if let Some(bounds) = &bound {
        for (mean, b) in two_phase.0.iter().zip(bounds) {
            if mean > b {
                bound_violation = true;
            }
        }
    }
    curves.push(PolicyCurve {
        policy: "two_phase".into(),
        mean_regret: two_phase.0,
        stderr: two_phase.1,
        bound,
    });

    for b in &config.baselines {
        let (mean, stderr) = run_lane(&built, &sched, config, jobs, b.name())?;
        curves.push(PolicyCurve { policy: b.name().into(), mean_regret: mean, stderr, bound: None });
    }

    let (best_set, best_value) = match &built {
        BuiltInstance::Finite(inst) => (inst.best_set().to_vec(), inst.best_value()),
        BuiltInstance::Sphere(s) => (Vec::new(), s.best_mean()),
    };
    Ok(ExperimentReport {
        checkpoints,
        curves,
        constants,
        constants_note,
        bound_violation,
        dimension: built.dimension(),
        arm_count: built.arm_count(),
        best_set,
        best_value,
        trials: config.trials,
        base_seed: config.base_seed,
        config_hash: config.hash(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

/// Run one policy lane; returns per-checkpoint (means, standard errors).
fn run_lane(
    built: &BuiltInstance,
    sched: &Schedule,
    config: &ExperimentConfig,
    jobs: usize,
    lane: &str,
) -> Result<(Vec<f64>, Vec<f64>), HarnessError> {
    let trials = config.trials;
    let seed = lane_seed(config.base_seed, lane);
    let opts = TrialOptions {
        detail: crate::env::TraceDetail::Summary,
        checkpoints: config.checkpoints.clone(),
    };
    // Probe set is shared read-only across workers.
    let probe = match built {
        BuiltInstance::Finite(inst) => {
            Some(policy::choose_probe_set(inst).map_err(HarnessError::Build)?)
        }
        BuiltInstance::Sphere(_) => None,
    };

    let run_one = |trial: u64| -> Result<Vec<f64>, Error> {
        let mut stream = RewardStream::for_trial(seed, trial);
        let trace = match (built, lane) {
            (BuiltInstance::Finite(inst), "two_phase") => {
                policy::run_trial_finite(
                    inst,
                    probe.as_ref().expect("finite lane has a probe set"),
                    sched,
                    config.horizon,
                    &mut stream,
                    &opts,
                )?
                .trace
            }
            (BuiltInstance::Sphere(s), "two_phase") => {
                policy::run_trial_sphere(s, sched, config.horizon, &mut stream, &opts)?.trace
            }
            (BuiltInstance::Finite(inst), "ucb1") => {
                policy::baseline_ucb1(inst, config.horizon, &mut stream, &opts)?
            }
            (BuiltInstance::Finite(inst), "random") => {
                policy::baseline_random(inst, config.horizon, &mut stream, &opts)?
            }
            (BuiltInstance::Sphere(_), other) => {
                return Err(Error::BadShape(format!(
                    "baseline `{other}` is undefined on the sphere"
                )));
            }
            (_, other) => return Err(Error::BadShape(format!("unknown policy lane `{other}`"))),
        };
        Ok(trace.checkpoint_values().to_vec())
    };

    let mut per_trial: Vec<Vec<f64>> = vec![Vec::new(); trials as usize];
    if jobs == 1 || trials <= 1 {
        for (i, slot) in per_trial.iter_mut().enumerate() {
            *slot = run_one(i as u64).map_err(HarnessError::Trial)?;
        }
    } else {
        let chunk = per_trial.len().div_ceil(jobs);
        let mut first_err: Option<Error> = None;
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (w, slots) in per_trial.chunks_mut(chunk).enumerate() {
                let run_one = &run_one;
                handles.push(scope.spawn(move || -> Result<(), Error> {
                    for (off, slot) in slots.iter_mut().enumerate() {
                        *slot = run_one((w * chunk + off) as u64)?;
                    }
                    Ok(())
                }));
            }
            for h in handles {
                if let Err(e) = h.join().expect("worker panicked") {
                    first_err.get_or_insert(e);
                }
            }
        });
        if let Some(e) = first_err {
            return Err(HarnessError::Trial(e));
        }
    }

    let k = config.checkpoints.len();
    let mut means = vec![0.0f64; k];
    for row in &per_trial {
        debug_assert_eq!(row.len(), k, "all checkpoints lie within the horizon");
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= trials as f64;
    }
    let mut stderr = vec![0.0f64; k];
    if trials > 1 {
        for row in &per_trial {
            for ((s, v), m) in stderr.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stderr {
            *s = (*s / (trials - 1) as f64).sqrt() / (trials as f64).sqrt();
        }
    }
    Ok((means, stderr))
}
