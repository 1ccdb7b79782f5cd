//! Problem instances: a finite arm set with a hidden preference vector, and
//! the infinite unit-sphere variant.

use crate::env::RewardStream;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::link::logistic;

/// Relative tolerance for deciding membership in the best-arm set.
const BEST_SET_RTOL: f64 = 1e-12;

/// A finite-armed instance: arm attribute columns `U ∈ ℝ^{n×m}`, the hidden
/// preference `z* ∈ ℝⁿ`, per-arm reward values `w`, and everything derived
/// from them (qualities `β_u = uᵀz*`, success probabilities `α*_u = f(β_u)`,
/// the best-arm set and its value).
#[derive(Debug, Clone)]
pub struct BanditInstance {
    arms: Matrix,
    preference: Vec<f64>,
    weights: Vec<f64>,
    qualities: Vec<f64>,
    true_means: Vec<f64>,
    best_set: Vec<usize>,
    best_value: f64,
}

impl BanditInstance {
    /// Build and validate an instance. `weights = None` means all ones,
    /// which reduces the weighted model to the plain Bernoulli one.
    pub fn new(arms: Matrix, preference: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = arms.rows();
        let m = arms.cols();
        if n == 0 || m == 0 {
            return Err(Error::BadShape("empty arm matrix".into()));
        }
        if m < n {
            return Err(Error::BadShape(format!("need m >= n, got m = {m}, n = {n}")));
        }
        if preference.len() != n {
            return Err(Error::BadShape(format!(
                "preference has dimension {}, arms have {n}",
                preference.len()
            )));
        }
        if preference.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("preference entry"));
        }
        if !linalg::has_full_row_rank(&arms) {
            return Err(Error::RankDeficient);
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != m {
                    return Err(Error::BadShape(format!(
                        "got {} weights for {m} arms",
                        w.len()
                    )));
                }
                if let Some(&bad) = w.iter().find(|v| !v.is_finite() || **v <= 0.0) {
                    return Err(Error::BadWeight(bad));
                }
                w
            }
            None => vec![1.0; m],
        };
        let qualities = arms.transpose_apply(&preference);
        let true_means: Vec<f64> = qualities.iter().map(|&b| logistic(b)).collect();
        let (best_set, best_value) = best_arms(&weights, &true_means);
        Ok(Self { arms, preference, weights, qualities, true_means, best_set, best_value })
    }

    /// Seeded random instance: unit-norm Gaussian arm columns and a Gaussian
    /// preference direction scaled to `preference_norm`. Resamples until the
    /// arm matrix has full row rank (a couple of draws at most).
    pub fn generate(n: usize, m: usize, seed: u64, preference_norm: f64) -> Result<Self> {
        if m < n || n == 0 {
            return Err(Error::BadShape(format!("generate needs m >= n >= 1, got n={n}, m={m}")));
        }
        if !(preference_norm.is_finite() && preference_norm > 0.0) {
            return Err(Error::NonFinite("preference_norm"));
        }
        let mut stream = RewardStream::new(seed);
        for _attempt in 0..64 {
            let cols: Vec<Vec<f64>> = (0..m).map(|_| random_unit(n, &mut stream)).collect();
            let arms = Matrix::from_columns(n, &cols)?;
            let dir = random_unit(n, &mut stream);
            let pref: Vec<f64> = dir.iter().map(|v| v * preference_norm).collect();
            match Self::new(arms, pref, None) {
                Ok(inst) => return Ok(inst),
                Err(Error::RankDeficient) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::RankDeficient)
    }

    pub fn n(&self) -> usize {
        self.arms.rows()
    }

    pub fn m(&self) -> usize {
        self.arms.cols()
    }

    pub fn arms(&self) -> &Matrix {
        &self.arms
    }

    pub fn arm(&self, j: usize) -> &[f64] {
        self.arms.col(j)
    }

    pub fn preference(&self) -> &[f64] {
        &self.preference
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `β_u = uᵀz*` per arm.
    pub fn qualities(&self) -> &[f64] {
        &self.qualities
    }

    /// `α*_u = f(β_u)` per arm.
    pub fn true_means(&self) -> &[f64] {
        &self.true_means
    }

    /// Indices of arms attaining the maximal `w_u α*_u`, ascending.
    pub fn best_set(&self) -> &[usize] {
        &self.best_set
    }

    /// `w_V α*_V`, the per-step value of an optimal pull.
    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    /// `w_u α*_u` for one arm.
    pub fn score(&self, arm: usize) -> f64 {
        self.weights[arm] * self.true_means[arm]
    }

    /// Per-step pseudo-regret of pulling `arm`: `w_V α*_V − w_u α*_u`,
    /// clamped at zero for members of the best set.
    pub fn pseudo_regret(&self, arm: usize) -> f64 {
        (self.best_value - self.score(arm)).max(0.0)
    }

    /// True when all weights are equal (the plain model in disguise).
    pub fn uniform_weights(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|w| (w - w0).abs() <= w0 * 1e-12)
    }
}

fn best_arms(weights: &[f64], means: &[f64]) -> (Vec<usize>, f64) {
    let mut best = f64::NEG_INFINITY;
    for (w, a) in weights.iter().zip(means) {
        best = best.max(w * a);
    }
    let cut = best - best.abs() * BEST_SET_RTOL;
    let set = weights
        .iter()
        .zip(means)
        .enumerate()
        .filter(|(_, (w, a))| *w * *a >= cut)
        .map(|(i, _)| i)
        .collect();
    (set, best)
}

fn random_unit(n: usize, stream: &mut RewardStream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| stream.next_gaussian()).collect();
        let norm = linalg::norm2(&v);
        if norm > 1e-6 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// The infinite-armed instance: every unit vector of `ℝⁿ` is an arm.
/// Exploration probes the standard basis, so no arm matrix is stored.
#[derive(Debug, Clone)]
pub struct SphereInstance {
    dimension: usize,
    preference: Vec<f64>,
    preference_norm: f64,
}

impl SphereInstance {
    pub fn new(preference: Vec<f64>) -> Result<Self> {
        let n = preference.len();
        if n < 2 {
            return Err(Error::SphereDimension(n));
        }
        if preference.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("preference entry"));
        }
        let norm = linalg::norm2(&preference);
        if norm <= 0.0 {
            return Err(Error::BadShape("sphere preference must be nonzero".into()));
        }
        Ok(Self { dimension: n, preference, preference_norm: norm })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn preference(&self) -> &[f64] {
        &self.preference
    }

    pub fn preference_norm(&self) -> f64 {
        self.preference_norm
    }

    /// The probe set is the standard basis, i.e. the identity matrix.
    pub fn probe_arms(&self) -> Matrix {
        Matrix::identity(self.dimension)
    }

    /// Success probability of a unit arm: `f(armᵀz*)`.
    pub fn success_prob(&self, arm: &[f64]) -> f64 {
        logistic(linalg::dot(arm, &self.preference))
    }

    /// Best achievable per-step value: `f(‖z*‖)`, attained at `z*/‖z*‖`.
    pub fn best_mean(&self) -> f64 {
        logistic(self.preference_norm)
    }

    /// Per-step pseudo-regret of pulling a unit arm.
    pub fn pseudo_regret(&self, arm: &[f64]) -> f64 {
        (self.best_mean() - self.success_prob(arm)).max(0.0)
    }
}
