//! Exploitation-length schedules.
//!
//! A schedule maps the epoch index `l ∈ ℕ₁` to the number of exploitation
//! pulls `g(l) ∈ ℕ₀` in that epoch. Valid schedules are non-decreasing and
//! unbounded; the extended inverse
//!
//! ```text
//! g⁻¹(t) = max { 1 ∪ { l ∈ ℕ₁ : g(l) ≤ t } }
//! ```
//!
//! is then well defined for every horizon `t` and drives the closed-form
//! regret bounds. Note `g⁻¹(g(l)) ≥ l`, with equality wherever `g` is
//! strictly increasing; plateaus (which both `Lls` and `LinearOverN` have)
//! make it the largest index of the plateau.

use crate::error::{Error, Result};
use crate::link::iterated_log;

/// Natural logs of the `log*` region boundaries: `log*(t) = k` exactly for
/// `ln t ∈ (LN_REGION[k-1], LN_REGION[k]]`.
const LN_REGION: [f64; 5] = [
    0.0,
    1.0,
    std::f64::consts::E,
    15.154_262_241_479_262,  // e^e
    3_814_279.104_760_220_2, // e^(e^e)
];

/// The supported schedule families.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// `g(l) = max{ t ∈ ℕ₁ : ln(t)·log*(t) ≤ l }`, the near-logarithmic
    /// schedule behind the `n·log T·log* T` regret rate.
    Lls,
    /// `g(l) = ⌊l/n⌋`, used for the unit-sphere analysis.
    LinearOverN(u32),
    /// `g(l) = l^degree`.
    Poly(u32),
    /// Explicit table for `l = 1..=len`; extrapolated past the end by
    /// repeating the last increment (at least 1) so it stays unbounded.
    Custom(Vec<u64>),
}

/// A validated schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
}

impl Schedule {
    pub fn new(kind: ScheduleKind) -> Result<Self> {
        match &kind {
            ScheduleKind::Lls => {}
            ScheduleKind::LinearOverN(n) => {
                if *n == 0 {
                    return Err(Error::BadSchedule("linear_over_n requires n >= 1".into()));
                }
            }
            ScheduleKind::Poly(d) => {
                if *d == 0 {
                    return Err(Error::BadSchedule(
                        "poly degree 0 is constant, not unbounded".into(),
                    ));
                }
            }
            ScheduleKind::Custom(table) => {
                if table.is_empty() {
                    return Err(Error::BadSchedule("custom table is empty".into()));
                }
                if table.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::BadSchedule("custom table must be non-decreasing".into()));
                }
            }
        }
        Ok(Self { kind })
    }

    pub fn lls() -> Self {
        Self { kind: ScheduleKind::Lls }
    }

    pub fn linear_over_n(n: u32) -> Result<Self> {
        Self::new(ScheduleKind::LinearOverN(n))
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// Phase-2 length of epoch `l`. Saturates at `u64::MAX` for the `Lls`
    /// family, whose true value outgrows `u64` around `l ≈ 178`.
    pub fn g(&self, l: u64) -> u64 {
        assert!(l >= 1, "schedule_g: epoch index starts at 1");
        match &self.kind {
            ScheduleKind::Lls => lls_g(l),
            ScheduleKind::LinearOverN(n) => l / u64::from(*n),
            ScheduleKind::Poly(d) => {
                let mut acc: u64 = 1;
                for _ in 0..*d {
                    acc = acc.saturating_mul(l);
                }
                acc
            }
            ScheduleKind::Custom(table) => {
                let len = table.len() as u64;
                if l <= len {
                    table[(l - 1) as usize]
                } else {
                    let last = *table.last().unwrap();
                    let step = if table.len() >= 2 {
                        (last - table[table.len() - 2]).max(1)
                    } else {
                        1
                    };
                    last.saturating_add(step.saturating_mul(l - len))
                }
            }
        }
    }

    /// `ln g(l)` evaluated without overflow; used by the L′ scan, where the
    /// schedule term must be compared against 1/2 long after `g(l)` itself
    /// has left the representable range. Exact (up to `ln` rounding) while
    /// `g(l)` is representable; the `Lls` family falls back to its piecewise
    /// asymptotic form past saturation. Returns `-inf` when `g(l) = 0`.
    pub fn ln_g(&self, l: u64) -> f64 {
        let g = self.g(l);
        if g == 0 {
            f64::NEG_INFINITY
        } else if g < u64::MAX {
            (g as f64).ln()
        } else {
            match &self.kind {
                ScheduleKind::Lls => lls_ln_g(l as f64),
                ScheduleKind::Poly(d) => f64::from(*d) * (l as f64).ln(),
                // LinearOverN and extrapolated Custom never saturate for
                // any epoch index the scan can reach.
                _ => f64::MAX.ln(),
            }
        }
    }

    /// Extended inverse: the largest epoch index whose Phase-2 length fits
    /// within `t`, or 1 when even `g(1) > t`.
    pub fn g_inverse(&self, t: u64) -> u64 {
        if self.g(1) > t {
            return 1;
        }
        // g is non-decreasing and unbounded: bracket then bisect.
        let mut hi = 2u64;
        const CAP: u64 = 1 << 48;
        while self.g(hi) <= t && hi < CAP {
            hi *= 2;
        }
        let mut lo = hi / 2; // g(lo) <= t
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if self.g(mid) <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// `ln(t)·log*(t)` for integer `t ≥ 1`.
fn lls_weight(t: u64) -> f64 {
    let tf = t as f64;
    tf.ln() * f64::from(iterated_log(tf))
}

/// Smallest epoch index whose LLS length no longer fits in u64:
/// `ln(u64::MAX)·log*(u64::MAX) ≈ 44.36·4 ≈ 177.4`.
const LLS_SATURATION_EPOCH: u64 = 178;

/// `g_LLS(l)` by monotone search: the weight is increasing in `t`, so bracket
/// by doubling and finish with binary search.
fn lls_g(l: u64) -> u64 {
    if l >= LLS_SATURATION_EPOCH {
        return u64::MAX;
    }
    let lf = l as f64;
    debug_assert!(lls_weight(2) <= lf, "l >= 1 always admits t = 2");
    let mut lo = 2u64; // weight(2) ≈ 0.693 ≤ 1 ≤ l
    let mut hi = 4u64;
    loop {
        if lls_weight(hi) > lf {
            break;
        }
        lo = hi;
        match hi.checked_mul(2) {
            Some(next) => hi = next,
            None => return u64::MAX,
        }
    }
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if lls_weight(mid) <= lf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `ln g_LLS(l)` via the piecewise structure of `log*`: within the region
/// where `log* = k`, the constraint `ln(t)·k ≤ l` caps `ln t` at `l/k`.
fn lls_ln_g(l: f64) -> f64 {
    let mut best = (2.0f64).ln();
    for k in 1..=LN_REGION.len() - 1 {
        let kf = k as f64;
        let region_lo = LN_REGION[k - 1];
        let region_hi = LN_REGION[k];
        if kf * region_hi <= l {
            // Whole region admissible; the next one may extend further.
            best = region_hi;
            continue;
        }
        if kf * region_lo < l {
            best = best.max(l / kf);
        }
        return best;
    }
    // l deep enough that log* = 5+ matters: ln g = l/5 to the accuracy any
    // caller needs (the boundary e^(e^(e^e)) is far beyond f64 anyway).
    best.max(l / 5.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lls_small_values() {
        let s = Schedule::lls();
        // ln2·log*2 ≈ 0.693 ≤ 1 but ln3·log*3 ≈ 2.197 > 1.
        assert_eq!(s.g(1), 2);
        assert_eq!(s.g(2), 2);
        assert_eq!(s.g(3), 4);
        assert_eq!(s.g(4), 7);
        assert_eq!(s.g(5), 12);
        assert_eq!(s.g(9), 20);
    }

    #[test]
    fn linear_over_n_values() {
        let s = Schedule::linear_over_n(2).unwrap();
        assert_eq!(s.g(5), 2);
        let s3 = Schedule::linear_over_n(3).unwrap();
        assert_eq!(s3.g(2), 0);
    }

    #[test]
    fn lls_inverse_reference() {
        let s = Schedule::lls();
        // ⌊ln(100)·log*(100)⌋ = ⌊4.605·3⌋ = 13, and 100 is not a value of g.
        assert_eq!(s.g_inverse(100), 13);
    }

    #[test]
    fn inverse_when_t_below_g1() {
        let s = Schedule::linear_over_n(2).unwrap();
        // g(1) = 0 ≤ 0 and g(2) = 1 > 0, so the max over {1} ∪ {1} is 1.
        assert_eq!(s.g_inverse(0), 1);
        let lls = Schedule::lls();
        // g(1) = 2 > 0: set is empty, falls back to 1.
        assert_eq!(lls.g_inverse(0), 1);
        assert_eq!(lls.g_inverse(1), 1);
    }

    #[test]
    fn custom_strictly_increasing_round_trips() {
        let table = vec![0, 1, 3, 6, 10, 20];
        let s = Schedule::new(ScheduleKind::Custom(table.clone())).unwrap();
        for l in 1..=table.len() as u64 {
            assert_eq!(s.g_inverse(s.g(l)), l, "l = {l}");
        }
    }

    #[test]
    fn custom_rejects_decreasing() {
        assert!(Schedule::new(ScheduleKind::Custom(vec![3, 1])).is_err());
        assert!(Schedule::new(ScheduleKind::Custom(vec![])).is_err());
        assert!(Schedule::new(ScheduleKind::Poly(0)).is_err());
        assert!(Schedule::new(ScheduleKind::LinearOverN(0)).is_err());
    }

    #[test]
    fn ln_g_matches_exact_g_in_range() {
        let s = Schedule::lls();
        for l in 1..=170u64 {
            let g = s.g(l);
            if g < u64::MAX {
                assert_eq!(s.ln_g(l), (g as f64).ln(), "l={l}");
            } else {
                // Saturated: the asymptotic form continues the growth.
                assert!(s.ln_g(l) > (u64::MAX as f64).ln() * 0.9, "l={l}");
            }
        }
    }

    proptest! {
        #[test]
        fn duality_holds_for_lls(t in 0u64..200_000) {
            let s = Schedule::lls();
            let l = s.g_inverse(t);
            if s.g(1) <= t {
                prop_assert!(s.g(l) <= t);
            }
            prop_assert!(s.g(l + 1) > t);
        }

        #[test]
        fn duality_holds_for_linear(t in 0u64..100_000, n in 1u32..6) {
            let s = Schedule::linear_over_n(n).unwrap();
            let l = s.g_inverse(t);
            prop_assert!(s.g(l) <= t);
            prop_assert!(s.g(l + 1) > t);
        }

        #[test]
        fn g_is_non_decreasing(l in 1u64..500) {
            for s in [Schedule::lls(), Schedule::linear_over_n(3).unwrap(),
                      Schedule::new(ScheduleKind::Poly(2)).unwrap()] {
                prop_assert!(s.g(l + 1) >= s.g(l));
            }
        }

        #[test]
        fn inverse_of_image_is_at_least_l(l in 1u64..60) {
            let s = Schedule::lls();
            prop_assert!(s.g_inverse(s.g(l)) >= l);
        }
    }
}
