//! Experiment config: a small `key = value` text format.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; vectors
//! are bracketed comma lists and matrices are bracketed lists of row
//! vectors. Unknown keys are errors, and validation reports every problem
//! found rather than the first one.
//!
//! ```text
//! mode = finite                      # finite | sphere
//! arms = [[1, 0, 0.6], [0, 1, 0.8]]  # rows of the n x m arm matrix
//! preference = [0.5, 0.5]
//! weights = [1, 1, 50]               # optional, default all ones
//! schedule = lls                     # lls | linear_over_n | poly:K | custom:[..]
//! horizon = 100000
//! trials = 500
//! base_seed = 42
//! baselines = ucb1, random           # optional
//! checkpoints = [1000, 10000, 100000] # optional, defaults to a ladder
//! ```
//!
//! Instead of inline `arms`/`preference`, an instance can be generated:
//! `dimension`, `arm_count` (finite only), `instance_seed`,
//! `preference_norm`. Sphere mode never takes `arms`, `weights` or
//! `arm_count` (the arm set is the whole sphere).

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Which arm-set model the experiment runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Finite,
    Sphere,
}

/// Where the instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    FiniteInline {
        /// Rows of the `n×m` arm matrix.
        arm_rows: Vec<Vec<f64>>,
        preference: Vec<f64>,
        weights: Option<Vec<f64>>,
    },
    FiniteGenerated {
        dimension: usize,
        arm_count: usize,
        instance_seed: u64,
        preference_norm: f64,
    },
    SphereInline {
        preference: Vec<f64>,
    },
    SphereGenerated {
        dimension: usize,
        instance_seed: u64,
        preference_norm: f64,
    },
}

/// Schedule selection as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Lls,
    /// `g(l) = ⌊l/n⌋` with `n` taken from the instance dimension.
    LinearOverN,
    Poly(u32),
    Custom(Vec<u64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Ucb1,
    Random,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Ucb1 => "ucb1",
            Baseline::Random => "random",
        }
    }
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub instance: InstanceSpec,
    pub schedule: ScheduleSpec,
    pub horizon: u64,
    pub trials: u64,
    pub base_seed: u64,
    pub baselines: Vec<Baseline>,
    pub checkpoints: Vec<u64>,
}

impl ExperimentConfig {
    /// Canonical re-emission: parsing this text reproduces the config
    /// exactly, which pins the config hash.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            Mode::Finite => "finite",
            Mode::Sphere => "sphere",
        };
        let _ = writeln!(out, "mode = {mode}");
        match &self.instance {
            InstanceSpec::FiniteInline { arm_rows, preference, weights } => {
                let _ = writeln!(out, "arms = {}", fmt_matrix(arm_rows));
                let _ = writeln!(out, "preference = {}", fmt_vec(preference));
                if let Some(w) = weights {
                    let _ = writeln!(out, "weights = {}", fmt_vec(w));
                }
            }
            InstanceSpec::FiniteGenerated {
                dimension,
                arm_count,
                instance_seed,
                preference_norm,
            } => {
                let _ = writeln!(out, "dimension = {dimension}");
                let _ = writeln!(out, "arm_count = {arm_count}");
                let _ = writeln!(out, "instance_seed = {instance_seed}");
                let _ = writeln!(out, "preference_norm = {preference_norm:?}");
            }
            InstanceSpec::SphereInline { preference } => {
                let _ = writeln!(out, "preference = {}", fmt_vec(preference));
            }
            InstanceSpec::SphereGenerated { dimension, instance_seed, preference_norm } => {
                let _ = writeln!(out, "dimension = {dimension}");
                let _ = writeln!(out, "instance_seed = {instance_seed}");
                let _ = writeln!(out, "preference_norm = {preference_norm:?}");
            }
        }
        let sched = match &self.schedule {
            ScheduleSpec::Lls => "lls".to_string(),
            ScheduleSpec::LinearOverN => "linear_over_n".to_string(),
            ScheduleSpec::Poly(d) => format!("poly:{d}"),
            ScheduleSpec::Custom(t) => format!(
                "custom:[{}]",
                t.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
            ),
        };
        let _ = writeln!(out, "schedule = {sched}");
        let _ = writeln!(out, "horizon = {}", self.horizon);
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "base_seed = {}", self.base_seed);
        if !self.baselines.is_empty() {
            let names: Vec<&str> = self.baselines.iter().map(|b| b.name()).collect();
            let _ = writeln!(out, "baselines = {}", names.join(", "));
        }
        let _ = writeln!(
            out,
            "checkpoints = [{}]",
            self.checkpoints.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
        );
        out
    }

    /// FNV-1a hash of the canonical text, as fixed-width hex.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        format!("{h:016x}")
    }
}

const KNOWN_KEYS: &[&str] = &[
    "mode",
    "arms",
    "preference",
    "weights",
    "dimension",
    "arm_count",
    "instance_seed",
    "preference_norm",
    "schedule",
    "horizon",
    "trials",
    "base_seed",
    "baselines",
    "checkpoints",
];

/// Parse and validate config text, reporting every error found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<String>> {
    let mut errors: Vec<String> = Vec::new();
    let mut pairs: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            errors.push(format!("line {line_no}: expected `key = value`, got `{line}`"));
            continue;
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            errors.push(format!("line {line_no}: unknown key `{key}`"));
            continue;
        }
        if pairs.insert(key.clone(), (line_no, value)).is_some() {
            errors.push(format!("line {line_no}: duplicate key `{key}`"));
        }
    }

    let get = |k: &str| pairs.get(k).map(|(_, v)| v.as_str());

    let mode = match get("mode") {
        Some("finite") => Some(Mode::Finite),
        Some("sphere") => Some(Mode::Sphere),
        Some(other) => {
            errors.push(format!("mode must be `finite` or `sphere`, got `{other}`"));
            None
        }
        None => {
            errors.push("missing required key `mode`".into());
            None
        }
    };

    let horizon = parse_u64_field(&pairs, "horizon", &mut errors);
    let trials = parse_u64_field(&pairs, "trials", &mut errors);
    let base_seed = parse_u64_field(&pairs, "base_seed", &mut errors).unwrap_or(0);

    let schedule = match get("schedule") {
        None => {
            errors.push("missing required key `schedule`".into());
            None
        }
        Some("lls") => Some(ScheduleSpec::Lls),
        Some("linear_over_n") => Some(ScheduleSpec::LinearOverN),
        Some(s) if s.starts_with("poly:") => match s["poly:".len()..].parse::<u32>() {
            Ok(d) if d >= 1 => Some(ScheduleSpec::Poly(d)),
            _ => {
                errors.push(format!("schedule `{s}`: poly degree must be an integer >= 1"));
                None
            }
        },
        Some(s) if s.starts_with("custom:") => {
            match parse_u64_list(&s["custom:".len()..]) {
                Ok(t) if !t.is_empty() && t.windows(2).all(|w| w[1] >= w[0]) => {
                    Some(ScheduleSpec::Custom(t))
                }
                Ok(_) => {
                    errors.push("custom schedule table must be non-empty and non-decreasing".into());
                    None
                }
                Err(e) => {
                    errors.push(format!("schedule `{s}`: {e}"));
                    None
                }
            }
        }
        Some(other) => {
            errors.push(format!(
                "schedule must be lls, linear_over_n, poly:K or custom:[..], got `{other}`"
            ));
            None
        }
    };

    let baselines = match get("baselines") {
        None => Vec::new(),
        Some(list) => {
            let mut out = Vec::new();
            for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match item {
                    "ucb1" => out.push(Baseline::Ucb1),
                    "random" => out.push(Baseline::Random),
                    other => errors.push(format!("unknown baseline `{other}`")),
                }
            }
            out
        }
    };

    let arms = match get("arms").map(parse_matrix) {
        None => None,
        Some(Ok(m)) => Some(m),
        Some(Err(e)) => {
            errors.push(format!("arms: {e}"));
            None
        }
    };
    let preference = match get("preference").map(parse_f64_list) {
        None => None,
        Some(Ok(v)) => Some(v),
        Some(Err(e)) => {
            errors.push(format!("preference: {e}"));
            None
        }
    };
    let weights = match get("weights").map(parse_f64_list) {
        None => None,
        Some(Ok(v)) => Some(v),
        Some(Err(e)) => {
            errors.push(format!("weights: {e}"));
            None
        }
    };
    let dimension = parse_opt_usize(&pairs, "dimension", &mut errors);
    let arm_count = parse_opt_usize(&pairs, "arm_count", &mut errors);
    let instance_seed = pairs.get("instance_seed").and_then(|(_, v)| match v.parse::<u64>() {
        Ok(x) => Some(x),
        Err(_) => {
            errors.push(format!("instance_seed: `{v}` is not an unsigned integer"));
            None
        }
    });
    let preference_norm = pairs.get("preference_norm").and_then(|(_, v)| match v.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Some(x),
        _ => {
            errors.push(format!("preference_norm: `{v}` must be a positive real"));
            None
        }
    });

    // Assemble the instance spec for the given mode.
    let instance = match mode {
        Some(Mode::Finite) => {
            if arms.is_some() || (preference.is_some() && dimension.is_none()) {
                if dimension.is_some() || arm_count.is_some() || instance_seed.is_some() {
                    errors.push(
                        "finite inline instance: generator keys (dimension/arm_count/instance_seed/preference_norm) are not allowed alongside `arms`".into(),
                    );
                }
                match (&arms, &preference) {
                    (Some(rows), Some(pref)) => {
                        validate_inline(rows, pref, weights.as_deref(), &mut errors);
                        Some(InstanceSpec::FiniteInline {
                            arm_rows: rows.clone(),
                            preference: pref.clone(),
                            weights: weights.clone(),
                        })
                    }
                    _ => {
                        errors.push("finite inline instance needs both `arms` and `preference`".into());
                        None
                    }
                }
            } else {
                match (dimension, arm_count, instance_seed, preference_norm) {
                    (Some(n), Some(m), Some(seed), Some(norm)) => {
                        if m < n {
                            errors.push(format!("arm_count {m} must be >= dimension {n}"));
                        }
                        if weights.is_some() {
                            errors.push("generated instances take no `weights`".into());
                        }
                        Some(InstanceSpec::FiniteGenerated {
                            dimension: n,
                            arm_count: m,
                            instance_seed: seed,
                            preference_norm: norm,
                        })
                    }
                    _ => {
                        errors.push(
                            "finite mode needs either `arms` + `preference`, or all of dimension/arm_count/instance_seed/preference_norm".into(),
                        );
                        None
                    }
                }
            }
        }
        Some(Mode::Sphere) => {
            if arms.is_some() {
                errors.push("sphere mode takes no arm matrix: the arms are the whole sphere".into());
            }
            if weights.is_some() {
                errors.push("sphere mode takes no weights".into());
            }
            if arm_count.is_some() {
                errors.push("sphere mode takes no arm_count".into());
            }
            if !baselines.is_empty() {
                errors.push("baselines need a finite arm set; sphere mode takes none".into());
            }
            if let Some(pref) = &preference {
                if pref.len() < 2 {
                    errors.push("sphere preference needs dimension >= 2".into());
                }
                if pref.iter().all(|v| *v == 0.0) {
                    errors.push("sphere preference must be nonzero".into());
                }
                Some(InstanceSpec::SphereInline { preference: pref.clone() })
            } else {
                match (dimension, instance_seed, preference_norm) {
                    (Some(n), Some(seed), Some(norm)) => {
                        if n < 2 {
                            errors.push("sphere dimension must be >= 2".into());
                        }
                        Some(InstanceSpec::SphereGenerated {
                            dimension: n,
                            instance_seed: seed,
                            preference_norm: norm,
                        })
                    }
                    _ => {
                        errors.push(
                            "sphere mode needs `preference`, or dimension/instance_seed/preference_norm".into(),
                        );
                        None
                    }
                }
            }
        }
        None => None,
    };

    let checkpoints = match get("checkpoints") {
        None => horizon.map(default_checkpoints),
        Some(v) => match parse_u64_list(v) {
            Ok(mut cps) => {
                cps.sort_unstable();
                cps.dedup();
                if cps.is_empty() {
                    errors.push("checkpoints list is empty".into());
                    None
                } else {
                    if let Some(t) = horizon
                        && cps.iter().any(|&c| c == 0 || c > t) {
                            errors.push("checkpoints must lie in [1, horizon]".into());
                        }
                    Some(cps)
                }
            }
            Err(e) => {
                errors.push(format!("checkpoints: {e}"));
                None
            }
        },
    };

    match (mode, instance, schedule, horizon, trials, checkpoints) {
        (Some(mode), Some(instance), Some(schedule), Some(horizon), Some(trials), Some(checkpoints))
            if errors.is_empty() =>
        {
            if horizon == 0 || trials == 0 {
                return Err(vec!["horizon and trials must be >= 1".into()]);
            }
            Ok(ExperimentConfig {
                mode,
                instance,
                schedule,
                horizon,
                trials,
                base_seed,
                baselines,
                checkpoints,
            })
        }
        _ => Err(errors),
    }
}

fn validate_inline(
    rows: &[Vec<f64>],
    pref: &[f64],
    weights: Option<&[f64]>,
    errors: &mut Vec<String>,
) {
    let n = rows.len();
    if n == 0 {
        errors.push("arms matrix is empty".into());
        return;
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        errors.push("arms rows have inconsistent lengths".into());
        return;
    }
    if pref.len() != n {
        errors.push(format!("preference has dimension {}, arms have {n} rows", pref.len()));
    }
    if let Some(w) = weights {
        if w.len() != m {
            errors.push(format!("got {} weights for {m} arms", w.len()));
        }
        if w.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            errors.push("weights must be strictly positive".into());
        }
    }
    // Full-rank check on the inline matrix.
    let cols: Vec<Vec<f64>> = (0..m).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    match crate::linalg::Matrix::from_columns(n, &cols) {
        Ok(mat) => {
            if !crate::linalg::has_full_row_rank(&mat) {
                errors.push("arms matrix does not have full row rank".into());
            }
        }
        Err(e) => errors.push(format!("arms: {e}")),
    }
}

fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut cps: Vec<u64> = [horizon / 100, horizon / 10, horizon / 4, horizon / 2, horizon]
        .into_iter()
        .filter(|&c| c >= 1)
        .collect();
    cps.sort_unstable();
    cps.dedup();
    cps
}

fn parse_u64_field(
    pairs: &BTreeMap<String, (usize, String)>,
    key: &str,
    errors: &mut Vec<String>,
) -> Option<u64> {
    match pairs.get(key) {
        None => {
            if key != "base_seed" {
                errors.push(format!("missing required key `{key}`"));
            }
            None
        }
        Some((_, v)) => match v.parse::<u64>() {
            Ok(x) => Some(x),
            Err(_) => {
                errors.push(format!("{key}: `{v}` is not an unsigned integer"));
                None
            }
        },
    }
}

fn parse_opt_usize(
    pairs: &BTreeMap<String, (usize, String)>,
    key: &str,
    errors: &mut Vec<String>,
) -> Option<usize> {
    pairs.get(key).and_then(|(_, v)| match v.parse::<usize>() {
        Ok(x) => Some(x),
        Err(_) => {
            errors.push(format!("{key}: `{v}` is not an unsigned integer"));
            None
        }
    })
}

fn strip_brackets(s: &str) -> Result<&str, String> {
    let s = s.trim();
    if !s.starts_with('[') || !s.ends_with(']') {
        return Err(format!("expected a bracketed list, got `{s}`"));
    }
    Ok(&s[1..s.len() - 1])
}

/// Split a bracketed body on top-level commas.
fn split_top_level(body: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in body.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&body[start..]);
    parts.into_iter().map(str::trim).filter(|p| !p.is_empty()).collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    split_top_level(strip_brackets(s)?)
        .into_iter()
        .map(|item| {
            item.parse::<f64>()
                .map_err(|_| format!("`{item}` is not a number"))
                .and_then(|v| {
                    if v.is_finite() { Ok(v) } else { Err(format!("`{item}` is not finite")) }
                })
        })
        .collect()
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    split_top_level(strip_brackets(s)?)
        .into_iter()
        .map(|item| item.parse::<u64>().map_err(|_| format!("`{item}` is not an unsigned integer")))
        .collect()
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>, String> {
    split_top_level(strip_brackets(s)?)
        .into_iter()
        .map(parse_f64_list)
        .collect()
}

fn fmt_vec(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", "))
}

fn fmt_matrix(rows: &[Vec<f64>]) -> String {
    format!("[{}]", rows.iter().map(|r| fmt_vec(r)).collect::<Vec<_>>().join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# comment line
mode = finite
arms = [[1, 0, 0.6], [0, 1, 0.8]]   # inline 2x3
preference = [1.0, 0.2]
schedule = lls
horizon = 1000
trials = 3
base_seed = 7
";

    #[test]
    fn minimal_finite_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.mode, Mode::Finite);
        assert_eq!(cfg.horizon, 1000);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.base_seed, 7);
        assert!(cfg.baselines.is_empty());
        assert_eq!(cfg.checkpoints, vec![10, 100, 250, 500, 1000]);
        match &cfg.instance {
            InstanceSpec::FiniteInline { arm_rows, preference, weights } => {
                assert_eq!(arm_rows.len(), 2);
                assert_eq!(arm_rows[0], vec![1.0, 0.0, 0.6]);
                assert_eq!(preference, &vec![1.0, 0.2]);
                assert!(weights.is_none());
            }
            other => panic!("unexpected instance {other:?}"),
        }
    }

    #[test]
    fn sphere_rejects_arm_matrix() {
        let text = "\
mode = sphere
arms = [[1, 0], [0, 1]]
preference = [0.8, 0.6]
schedule = linear_over_n
horizon = 100
trials = 1
";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("whole sphere")), "{errs:?}");
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "\
mode = neither
bogus = 1
schedule = poly:0
horizon = x
trials = 2
";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.len() >= 4, "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("unknown key `bogus`")));
        assert!(errs.iter().any(|e| e.contains("poly degree")));
    }

    #[test]
    fn rank_deficient_inline_rejected() {
        let text = "\
mode = finite
arms = [[1, 2], [2, 4]]
preference = [1.0, 0.0]
schedule = lls
horizon = 10
trials = 1
";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("full row rank")), "{errs:?}");
    }

    #[test]
    fn canonical_round_trip_fixes_hash() {
        let cfg = parse_config(MINIMAL).unwrap();
        let text = cfg.canonical();
        let cfg2 = parse_config(&text).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(cfg.hash(), cfg2.hash());
        assert_eq!(text, cfg2.canonical());
    }

    #[test]
    fn custom_schedule_and_weights_round_trip() {
        let text = "\
mode = finite
arms = [[1, 0, 0.6], [0, 1, 0.8]]
preference = [0.5, 0.5]
weights = [1, 1, 50]
schedule = custom:[0, 1, 2, 4, 8]
horizon = 64
trials = 2
base_seed = 1
baselines = ucb1, random
checkpoints = [8, 64]
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.schedule, ScheduleSpec::Custom(vec![0, 1, 2, 4, 8]));
        assert_eq!(cfg.baselines, vec![Baseline::Ucb1, Baseline::Random]);
        let cfg2 = parse_config(&cfg.canonical()).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn checkpoints_validated_against_horizon() {
        let text = "\
mode = finite
arms = [[1, 0], [0, 1]]
preference = [1.0, 0.2]
schedule = lls
horizon = 100
trials = 1
checkpoints = [50, 200]
";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("[1, horizon]")), "{errs:?}");
    }
}
