//! The two-phase explore/exploit policy and the baseline policies used for
//! comparison curves.
//!
//! Each epoch `l` pulls every probe arm once (Phase 1), re-estimates the
//! preference vector from the per-arm empirical means, then pulls the
//! estimated-best arm `g(l)` times (Phase 2). An epoch is *good* when every
//! empirical mean lies strictly inside (0, 1), so the link inverts; in a bad
//! epoch the estimate is pinned to the zero vector and selection falls back
//! to the tie rule.

use crate::env::{self, Phase, RegretTrace, RewardStream, SPHERE_EXPLOIT_ARM, TraceDetail};
use crate::error::{Error, Result};
use crate::instance::{BanditInstance, SphereInstance};
use crate::linalg::{self, LuFactors, Matrix};
use crate::link::{logistic, logit};
use crate::schedule::Schedule;

/// The `n` probe arms used for Phase 1, with a reusable factorization of
/// `Σᵀ` so each epoch's solve is a pair of triangular substitutions.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    indices: Vec<usize>,
    sigma: Matrix,
    sigma_t_lu: LuFactors,
}

impl ProbeSet {
    /// Probe set from explicit column indices of the instance's arm matrix.
    pub fn from_indices(instance: &BanditInstance, indices: &[usize]) -> Result<Self> {
        let n = instance.n();
        if indices.len() != n {
            return Err(Error::BadShape(format!(
                "probe set needs {n} arms, got {}",
                indices.len()
            )));
        }
        let cols: Vec<Vec<f64>> = indices
            .iter()
            .map(|&j| {
                if j >= instance.m() {
                    Err(Error::ArmIndex(j))
                } else {
                    Ok(instance.arm(j).to_vec())
                }
            })
            .collect::<Result<_>>()?;
        let sigma = Matrix::from_columns(n, &cols)?;
        let sigma_t_lu = LuFactors::factor(&transpose(&sigma))?;
        Ok(Self { indices: indices.to_vec(), sigma, sigma_t_lu })
    }

    /// The standard basis `{e₁,…,eₙ}`, the probe set for the unit sphere.
    pub fn standard_basis(n: usize) -> Self {
        let sigma = Matrix::identity(n);
        let sigma_t_lu = LuFactors::factor(&sigma).expect("identity is regular");
        Self { indices: (0..n).collect(), sigma, sigma_t_lu }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Column indices of the probe arms in the instance's arm matrix.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// The probe arms as an `n×n` matrix Σ.
    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    /// Solve `Σᵀ x = rhs` with the stored factorization.
    pub fn solve_sigma_t(&self, rhs: &[f64]) -> Vec<f64> {
        self.sigma_t_lu.solve(rhs)
    }

    /// Solve `Σ x = rhs` by reusing the `Σᵀ` factors transposed.
    pub fn solve_sigma(&self, rhs: &[f64]) -> Vec<f64> {
        self.sigma_t_lu.solve_transposed(rhs)
    }

    /// Largest probe-arm Euclidean norm (enters the bad-epoch constant).
    pub fn max_arm_norm(&self) -> f64 {
        (0..self.len())
            .map(|j| linalg::norm2(self.sigma.col(j)))
            .fold(0.0, f64::max)
    }
}

fn transpose(m: &Matrix) -> Matrix {
    let n = m.rows();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..m.cols()).map(|j| m.col(j)[i]).collect())
        .collect();
    Matrix::from_columns(m.cols(), &cols).expect("transpose of a valid matrix")
}

/// Pick `n` full-rank probe arms by greedy column pivoting; deterministic,
/// and the pivoting keeps the selected Σ reasonably conditioned.
pub fn choose_probe_set(instance: &BanditInstance) -> Result<ProbeSet> {
    let indices = linalg::greedy_independent_columns(instance.arms())?;
    ProbeSet::from_indices(instance, &indices)
}

/// Estimate the preference vector from per-probe empirical means.
///
/// Returns `None` (the bad-epoch marker) when any estimate falls outside the
/// open interval (0, 1); otherwise solves `Σᵀ ẑ = f⁻¹(α̂)`.
pub fn estimate_preference(probe: &ProbeSet, estimates: &[f64]) -> Option<Vec<f64>> {
    assert_eq!(estimates.len(), probe.len(), "one estimate per probe arm");
    if estimates.iter().any(|&a| a <= 0.0 || a >= 1.0) {
        return None;
    }
    let rhs: Vec<f64> = estimates
        .iter()
        .map(|&a| logit(a).expect("checked to lie in (0,1)"))
        .collect();
    Some(probe.solve_sigma_t(&rhs))
}

/// Estimated-best finite arm under `ẑ`: `argmax_u w_u f(uᵀẑ)`, ties to the
/// lowest index so replay is deterministic.
///
/// With uniform weights the strictly increasing link drops out and the
/// argmax is taken over `uᵀẑ` directly, which also sidesteps the link's
/// floating-point saturation for large `‖ẑ‖`.
pub fn select_arm_finite(instance: &BanditInstance, zhat: &[f64]) -> usize {
    let uniform = instance.uniform_weights();
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for j in 0..instance.m() {
        let quality = linalg::dot(instance.arm(j), zhat);
        let score =
            if uniform { quality } else { instance.weights()[j] * logistic(quality) };
        if score > best_score {
            best_score = score;
            best = j;
        }
    }
    best
}

/// Estimated-best sphere arm: `ẑ/‖ẑ‖`, or `e₁` when `ẑ = 0` (any fixed unit
/// vector works; a bad epoch costs at most the full per-step value).
pub fn select_arm_sphere(zhat: &[f64]) -> Vec<f64> {
    let norm = linalg::norm2(zhat);
    if norm <= 0.0 {
        let mut e1 = vec![0.0; zhat.len()];
        e1[0] = 1.0;
        return e1;
    }
    zhat.iter().map(|v| v / norm).collect()
}

/// The epoch's Phase-2 arm.
#[derive(Debug, Clone, PartialEq)]
pub enum ChosenArm {
    /// Column index into the instance's arm matrix.
    Index(usize),
    /// Unit vector on the sphere.
    Unit(Vec<f64>),
}

/// The policy's knowledge at the end of one epoch's estimation step.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochState {
    /// Epoch index `l ≥ 1`.
    pub epoch: u64,
    /// Success counts `q_u` per probe arm.
    pub success_counts: Vec<u64>,
    /// Empirical means `α̂_u = q_u / l`.
    pub estimates: Vec<f64>,
    /// `ẑ_l`; the zero vector in a bad epoch.
    pub z_estimate: Vec<f64>,
    /// The epoch's Phase-2 arm.
    pub chosen_arm: ChosenArm,
    /// Whether every estimate lies strictly inside (0, 1).
    pub good: bool,
}

/// Options shared by all trial runners.
#[derive(Debug, Clone, Default)]
pub struct TrialOptions {
    pub detail: TraceDetail,
    pub checkpoints: Vec<u64>,
}

/// A finished trial: the regret trace plus the per-epoch decision states.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub trace: RegretTrace,
    pub epochs: Vec<EpochState>,
}

/// Run the two-phase policy on a finite instance for `horizon` pulls,
/// truncating mid-epoch when the horizon lands there.
pub fn run_trial_finite(
    instance: &BanditInstance,
    probe: &ProbeSet,
    sched: &Schedule,
    horizon: u64,
    stream: &mut RewardStream,
    opts: &TrialOptions,
) -> Result<TrialOutput> {
    assert!(horizon >= 1, "horizon starts at 1");
    let mut trace = RegretTrace::new(horizon, opts.detail).with_checkpoints(&opts.checkpoints);
    let mut epochs: Vec<EpochState> = Vec::new();
    let mut counts = vec![0u64; probe.len()];
    let mut t: u64 = 0;
    let mut l: u64 = 1;
    'run: while t < horizon {
        trace.begin_epoch(t + 1);
        // Phase 1: one pull per probe arm.
        for (slot, &arm) in probe.indices().iter().enumerate() {
            if t == horizon {
                break 'run;
            }
            t += 1;
            let reward = env::pull(instance, arm, stream)?;
            if reward > 0.0 {
                counts[slot] += 1;
            }
            trace.record(t, arm as u32, Phase::One, reward, instance.pseudo_regret(arm))?;
        }
        // Estimate and choose.
        let estimates: Vec<f64> = counts.iter().map(|&q| q as f64 / l as f64).collect();
        let (good, zhat) = match estimate_preference(probe, &estimates) {
            Some(z) => (true, z),
            None => (false, vec![0.0; probe.len()]),
        };
        let chosen = select_arm_finite(instance, &zhat);
        epochs.push(EpochState {
            epoch: l,
            success_counts: counts.clone(),
            estimates,
            z_estimate: zhat,
            chosen_arm: ChosenArm::Index(chosen),
            good,
        });
        // Phase 2: g(l) pulls of the chosen arm.
        let step_regret = instance.pseudo_regret(chosen);
        for _ in 0..sched.g(l) {
            if t == horizon {
                break 'run;
            }
            t += 1;
            let reward = env::pull(instance, chosen, stream)?;
            trace.record(t, chosen as u32, Phase::Two, reward, step_regret)?;
        }
        l += 1;
    }
    Ok(TrialOutput { trace, epochs })
}

/// Run the two-phase policy on the unit sphere: probes are the standard
/// basis and the Phase-2 arm is the normalized estimate.
pub fn run_trial_sphere(
    instance: &SphereInstance,
    sched: &Schedule,
    horizon: u64,
    stream: &mut RewardStream,
    opts: &TrialOptions,
) -> Result<TrialOutput> {
    assert!(horizon >= 1, "horizon starts at 1");
    let n = instance.dimension();
    let probe = ProbeSet::standard_basis(n);
    let basis: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut trace = RegretTrace::new(horizon, opts.detail).with_checkpoints(&opts.checkpoints);
    let mut epochs: Vec<EpochState> = Vec::new();
    let mut counts = vec![0u64; n];
    let mut t: u64 = 0;
    let mut l: u64 = 1;
    'run: while t < horizon {
        trace.begin_epoch(t + 1);
        for (slot, e) in basis.iter().enumerate() {
            if t == horizon {
                break 'run;
            }
            t += 1;
            let reward = env::pull_sphere(instance, e, stream)?;
            if reward > 0.0 {
                counts[slot] += 1;
            }
            trace.record(t, slot as u32, Phase::One, reward, instance.pseudo_regret(e))?;
        }
        let estimates: Vec<f64> = counts.iter().map(|&q| q as f64 / l as f64).collect();
        let (good, zhat) = match estimate_preference(&probe, &estimates) {
            Some(z) => (true, z),
            None => (false, vec![0.0; n]),
        };
        let chosen = select_arm_sphere(&zhat);
        let step_regret = instance.pseudo_regret(&chosen);
        epochs.push(EpochState {
            epoch: l,
            success_counts: counts.clone(),
            estimates,
            z_estimate: zhat,
            chosen_arm: ChosenArm::Unit(chosen.clone()),
            good,
        });
        for _ in 0..sched.g(l) {
            if t == horizon {
                break 'run;
            }
            t += 1;
            let reward = env::pull_sphere(instance, &chosen, stream)?;
            trace.record(t, SPHERE_EXPLOIT_ARM, Phase::Two, reward, step_regret)?;
        }
        l += 1;
    }
    Ok(TrialOutput { trace, epochs })
}

/// UCB1 baseline treating the arms as independent: after one pull of each
/// arm, play `argmax mean_u + w_max √(2 ln t / n_u)`. The exploration term
/// is scaled by the largest reward value so weighted instances stay on the
/// index's native `[0, reward range]` scale.
pub fn baseline_ucb1(
    instance: &BanditInstance,
    horizon: u64,
    stream: &mut RewardStream,
    opts: &TrialOptions,
) -> Result<RegretTrace> {
    let m = instance.m();
    let w_max = instance.weights().iter().fold(0.0f64, |a, &b| a.max(b));
    let mut trace = RegretTrace::new(horizon, opts.detail).with_checkpoints(&opts.checkpoints);
    let mut pulls = vec![0u64; m];
    let mut sums = vec![0.0f64; m];
    let mut t: u64 = 0;
    while t < horizon {
        t += 1;
        let arm = if let Some(unpulled) = pulls.iter().position(|&c| c == 0) {
            unpulled
        } else {
            let tf = t as f64;
            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for j in 0..m {
                let mean = sums[j] / pulls[j] as f64;
                let bonus = w_max * (2.0 * tf.ln() / pulls[j] as f64).sqrt();
                let score = mean + bonus;
                if score > best_score {
                    best_score = score;
                    best = j;
                }
            }
            best
        };
        let phase = if pulls[arm] == 0 { Phase::One } else { Phase::Two };
        let reward = env::pull(instance, arm, stream)?;
        pulls[arm] += 1;
        sums[arm] += reward;
        trace.record(t, arm as u32, phase, reward, instance.pseudo_regret(arm))?;
    }
    Ok(trace)
}

/// Uniform-random baseline.
pub fn baseline_random(
    instance: &BanditInstance,
    horizon: u64,
    stream: &mut RewardStream,
    opts: &TrialOptions,
) -> Result<RegretTrace> {
    let m = instance.m() as u64;
    let mut trace = RegretTrace::new(horizon, opts.detail).with_checkpoints(&opts.checkpoints);
    for t in 1..=horizon {
        let arm = stream.next_below(m) as usize;
        let reward = env::pull(instance, arm, stream)?;
        trace.record(t, arm as u32, Phase::Two, reward, instance.pseudo_regret(arm))?;
    }
    Ok(trace)
}
