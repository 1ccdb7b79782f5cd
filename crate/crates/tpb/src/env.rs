//! Deterministic stochastic environment: seeded Bernoulli reward draws and
//! regret accounting.
//!
//! Reproducibility contract:
//! - the same seed and the same query sequence produce the same rewards,
//!   bit for bit;
//! - every pull consumes exactly one draw from the stream;
//! - trial `i` of an experiment uses the sub-seed
//!   `base_seed XOR (i × 0x9E3779B97F4A7C15)` (a fixed odd constant), so a
//!   trial's stream does not depend on scheduling or worker count.

use crate::error::{Error, Result};
use crate::instance::{BanditInstance, SphereInstance};
use crate::linalg;

/// Odd 64-bit constant for per-trial sub-seed derivation.
pub const SUBSEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 pseudo-random stream: full 2⁶⁴ period, splittable by seed,
/// and passes the standard empirical batteries. One `next_u64` per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardStream {
    seed: u64,
    state: u64,
    draws: u64,
    gaussian_spare: Option<f64>,
}

impl RewardStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, state: seed, draws: 0, gaussian_spare: None }
    }

    /// Stream for trial `trial_index` of an experiment seeded by `base_seed`.
    pub fn for_trial(base_seed: u64, trial_index: u64) -> Self {
        Self::new(base_seed ^ trial_index.wrapping_mul(SUBSEED_STRIDE))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` by rejection, bias-free.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Standard normal via Box-Muller (used only for instance generation,
    /// not for rewards, so the one-draw-per-pull contract is unaffected).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(v) = self.gaussian_spare.take() {
            return v;
        }
        loop {
            let u1 = self.next_f64();
            if u1 <= f64::MIN_POSITIVE {
                continue;
            }
            let u2 = self.next_f64();
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = std::f64::consts::TAU * u2;
            self.gaussian_spare = Some(r * theta.sin());
            return r * theta.cos();
        }
    }
}

/// Draw one reward for `arm`: `w_arm` with probability `α*_arm`, else 0.
/// Consumes exactly one draw.
pub fn pull(instance: &BanditInstance, arm: usize, stream: &mut RewardStream) -> Result<f64> {
    if arm >= instance.m() {
        return Err(Error::ArmIndex(arm));
    }
    let p = instance.true_means()[arm];
    let hit = stream.next_f64() < p;
    Ok(if hit { instance.weights()[arm] } else { 0.0 })
}

/// Draw one `{0, 1}` reward for a unit arm on the sphere.
pub fn pull_sphere(
    instance: &SphereInstance,
    arm: &[f64],
    stream: &mut RewardStream,
) -> Result<f64> {
    if arm.len() != instance.dimension() {
        return Err(Error::BadShape(format!(
            "arm has dimension {}, sphere has {}",
            arm.len(),
            instance.dimension()
        )));
    }
    let norm = linalg::norm2(arm);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit(norm));
    }
    let p = instance.success_prob(arm);
    Ok(if stream.next_f64() < p { 1.0 } else { 0.0 })
}

/// Phase label of a pull.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Exploration pull of a probe arm.
    One,
    /// Exploitation pull of the epoch's chosen arm.
    Two,
}

/// How much per-step detail a trace keeps. Cumulative totals, epoch
/// boundaries and checkpoint snapshots are always kept; `Full` additionally
/// records every pull, which a horizon of 10⁶ makes worth opting into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceDetail {
    #[default]
    Summary,
    Full,
}

/// One recorded pull (only stored under `TraceDetail::Full`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub arm: u32,
    pub phase: Phase,
    pub reward: f64,
    pub pseudo_regret: f64,
    pub cumulative: f64,
}

/// Sentinel arm id for sphere exploitation pulls, whose arm is a unit vector
/// rather than a column index (the vector lives in the epoch record).
pub const SPHERE_EXPLOIT_ARM: u32 = u32::MAX;

/// Per-timestep record of pulls, rewards, phase labels and cumulative
/// pseudo-regret for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    horizon: u64,
    len: u64,
    cumulative: f64,
    cumulative_phase1: f64,
    cumulative_phase2: f64,
    total_reward: f64,
    epoch_boundaries: Vec<u64>,
    checkpoints: Vec<u64>,
    checkpoint_values: Vec<f64>,
    steps: Option<Vec<StepRecord>>,
}

impl RegretTrace {
    pub fn new(horizon: u64, detail: TraceDetail) -> Self {
        Self {
            horizon,
            len: 0,
            cumulative: 0.0,
            cumulative_phase1: 0.0,
            cumulative_phase2: 0.0,
            total_reward: 0.0,
            epoch_boundaries: Vec::new(),
            checkpoints: Vec::new(),
            checkpoint_values: Vec::new(),
            steps: match detail {
                TraceDetail::Summary => None,
                TraceDetail::Full => Some(Vec::new()),
            },
        }
    }

    /// Register ascending checkpoint timesteps to snapshot cumulative regret
    /// at. Must be called before recording begins.
    pub fn with_checkpoints(mut self, checkpoints: &[u64]) -> Self {
        assert_eq!(self.len, 0, "checkpoints must be set before recording");
        let mut cps = checkpoints.to_vec();
        cps.sort_unstable();
        cps.dedup();
        self.checkpoints = cps;
        self
    }

    /// Append one timestep. `t` must equal the current length plus one.
    pub fn record(
        &mut self,
        t: u64,
        arm: u32,
        phase: Phase,
        reward: f64,
        pseudo_regret: f64,
    ) -> Result<()> {
        if t != self.len + 1 {
            return Err(Error::OutOfOrder { expected: self.len + 1, got: t });
        }
        debug_assert!(pseudo_regret >= 0.0, "pseudo-regret is non-negative by construction");
        self.len = t;
        self.cumulative += pseudo_regret;
        match phase {
            Phase::One => self.cumulative_phase1 += pseudo_regret,
            Phase::Two => self.cumulative_phase2 += pseudo_regret,
        }
        self.total_reward += reward;
        if let Some(steps) = &mut self.steps {
            steps.push(StepRecord { arm, phase, reward, pseudo_regret, cumulative: self.cumulative });
        }
        if self.checkpoint_values.len() < self.checkpoints.len()
            && self.checkpoints[self.checkpoint_values.len()] == t
        {
            self.checkpoint_values.push(self.cumulative);
        }
        Ok(())
    }

    /// Mark the start of a new epoch at timestep `t` (the next pull).
    pub fn begin_epoch(&mut self, t: u64) {
        self.epoch_boundaries.push(t);
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Total pseudo-regret accumulated so far.
    pub fn cumulative(&self) -> f64 {
        self.cumulative
    }

    pub fn cumulative_phase1(&self) -> f64 {
        self.cumulative_phase1
    }

    pub fn cumulative_phase2(&self) -> f64 {
        self.cumulative_phase2
    }

    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    /// Start timestep of each epoch that began before the horizon cut.
    pub fn epoch_boundaries(&self) -> &[u64] {
        &self.epoch_boundaries
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    /// Cumulative regret at each registered checkpoint that was reached.
    pub fn checkpoint_values(&self) -> &[f64] {
        &self.checkpoint_values
    }

    /// Per-step records when the trace was built with `TraceDetail::Full`.
    pub fn steps(&self) -> Option<&[StepRecord]> {
        self.steps.as_deref()
    }
}
