//! Exact dynamics of the sufficient statistic `h = n_N - a * n_Y`.
//!
//! The walk starts at `0`, moves `+1` on a `No` and `-a` on a `Yes`, and is
//! absorbed once it leaves `[-1, a]`: below `-1` every later agent plays
//! `Yes`, above `a` every later agent plays `No`. Landing exactly on a
//! boundary keeps the walk in play (the indifferent agent follows its
//! signal).
//!
//! For rational `a = r/q` the walk also tracks the integer state
//! `s = q * n_N - r * n_Y = q * h`, and every status decision is made on `s`.

use serde::Serialize;

use crate::constant::{CascadeConstant, Rationality};
use crate::error::{CascadeError, Result};
use crate::model::{Action, SignalQualities};

/// Equality band around the boundaries and the pivot for irrational `a`.
pub const BOUNDARY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkStatus {
    InPlay,
    YCascade,
    NCascade,
}

/// Position of an in-play walk relative to the pivot `a - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `[-1, a - 1)`: only `No` keeps the walk in play.
    LowerSegment,
    /// `a - 1`: both actions keep the walk in play.
    Pivot,
    /// `(a - 1, a]`: only `Yes` keeps the walk in play.
    UpperSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkState {
    pub n_yes: u64,
    pub n_no: u64,
    pub h: f64,
    /// `q * n_N - r * n_Y` when the constant is rational.
    pub exact: Option<i64>,
    pub status: WalkStatus,
}

impl WalkState {
    pub fn origin(cc: &CascadeConstant) -> Self {
        Self {
            n_yes: 0,
            n_no: 0,
            h: 0.0,
            exact: cc.rationality.fraction().map(|_| 0),
            status: WalkStatus::InPlay,
        }
    }

    /// Builds the state reached after `n_yes` and `n_no` in-play actions.
    /// The status is computed, not assumed.
    pub fn from_counts(n_yes: u64, n_no: u64, cc: &CascadeConstant) -> Self {
        let h = n_no as f64 - cc.value * n_yes as f64;
        let exact = cc
            .rationality
            .fraction()
            .map(|(r, q)| q as i64 * n_no as i64 - r as i64 * n_yes as i64);
        Self {
            n_yes,
            n_no,
            h,
            exact,
            status: status_of(h, exact, cc),
        }
    }

    pub fn steps(&self) -> u64 {
        self.n_yes + self.n_no
    }

    pub fn is_in_play(&self) -> bool {
        self.status == WalkStatus::InPlay
    }

    /// Public likelihood ratio `P(H | B) / P(H | G) = (p2 / (1 - p1))^h`.
    pub fn likelihood_ratio(&self, q: &SignalQualities) -> f64 {
        (q.p2() / (1.0 - q.p1())).powf(self.h)
    }

    /// Advances the walk by one in-play action.
    pub fn step(&self, action: Action, cc: &CascadeConstant) -> Result<Self> {
        if !self.is_in_play() {
            return Err(CascadeError::SteppedAfterCascade);
        }
        let mut next = *self;
        match action {
            Action::Yes => {
                next.n_yes += 1;
                next.h -= cc.value;
            }
            Action::No => {
                next.n_no += 1;
                next.h += 1.0;
            }
        }
        next.exact = match cc.rationality {
            Rationality::Rational { r, q } => Some(match (self.exact, action) {
                (Some(s), Action::Yes) => s - r as i64,
                (Some(s), Action::No) => s + q as i64,
                (None, _) => q as i64 * next.n_no as i64 - r as i64 * next.n_yes as i64,
            }),
            Rationality::Irrational => None,
        };
        next.status = status_of(next.h, next.exact, cc);
        Ok(next)
    }

    pub fn region(&self, cc: &CascadeConstant) -> Result<Region> {
        region_of(self, cc)
    }
}

pub fn step(state: &WalkState, action: Action, cc: &CascadeConstant) -> Result<WalkState> {
    state.step(action, cc)
}

pub fn region_of(state: &WalkState, cc: &CascadeConstant) -> Result<Region> {
    if !state.is_in_play() {
        return Err(CascadeError::NotInPlay);
    }
    let ordering = match (cc.rationality, state.exact) {
        (Rationality::Rational { r, q }, Some(s)) => s.cmp(&(r as i64 - q as i64)),
        _ => {
            let d = state.h - (cc.value - 1.0);
            if d.abs() <= BOUNDARY_BAND {
                std::cmp::Ordering::Equal
            } else if d < 0.0 {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        }
    };
    Ok(match ordering {
        std::cmp::Ordering::Less => Region::LowerSegment,
        std::cmp::Ordering::Equal => Region::Pivot,
        std::cmp::Ordering::Greater => Region::UpperSegment,
    })
}

fn status_of(h: f64, exact: Option<i64>, cc: &CascadeConstant) -> WalkStatus {
    match (cc.rationality, exact) {
        (Rationality::Rational { r, q }, Some(s)) => {
            if s < -(q as i64) {
                WalkStatus::YCascade
            } else if s > r as i64 {
                WalkStatus::NCascade
            } else {
                WalkStatus::InPlay
            }
        }
        _ => {
            if h < -1.0 - BOUNDARY_BAND {
                WalkStatus::YCascade
            } else if h > cc.value + BOUNDARY_BAND {
                WalkStatus::NCascade
            } else {
                WalkStatus::InPlay
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constant::cascade_constant;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cc_07_08() -> CascadeConstant {
        cascade_constant(&SignalQualities::new(0.7, 0.8).unwrap())
    }

    fn unit() -> CascadeConstant {
        CascadeConstant::from_fraction(1, 1).unwrap()
    }

    #[test]
    fn single_yes_cascades_when_a_exceeds_one() {
        let cc = cc_07_08();
        let s = WalkState::origin(&cc).step(Action::Yes, &cc).unwrap();
        assert!((s.h + 1.277_248_781_731_014).abs() < 1e-12);
        assert_eq!(s.status, WalkStatus::YCascade);
    }

    #[test]
    fn boundary_equality_stays_in_play() {
        let cc = unit();
        let s = WalkState::origin(&cc).step(Action::Yes, &cc).unwrap();
        assert_eq!(s.h, -1.0);
        assert_eq!(s.exact, Some(-1));
        assert_eq!(s.status, WalkStatus::InPlay);
        let s = s.step(Action::Yes, &cc).unwrap();
        assert_eq!(s.status, WalkStatus::YCascade);

        let up = WalkState::origin(&cc).step(Action::No, &cc).unwrap();
        assert_eq!(up.status, WalkStatus::InPlay);
        assert_eq!(up.step(Action::No, &cc).unwrap().status, WalkStatus::NCascade);
    }

    #[test]
    fn hand_traced_walk() {
        let cc = cc_07_08();
        let s = WalkState::from_counts(0, 1, &cc);
        assert_eq!(s.h, 1.0);
        let s = s.step(Action::Yes, &cc).unwrap();
        assert!((s.h + 0.277_248_781_731_014).abs() < 1e-12);
        assert_eq!(s.status, WalkStatus::InPlay);
        let s = s.step(Action::Yes, &cc).unwrap();
        assert!((s.h + 1.554_497_563_462_029).abs() < 1e-12);
        assert_eq!(s.status, WalkStatus::YCascade);
        assert_eq!((s.n_no, s.n_yes), (1, 2));
    }

    #[test]
    fn stepping_after_cascade_fails() {
        let cc = cc_07_08();
        let s = WalkState::origin(&cc).step(Action::Yes, &cc).unwrap();
        assert_eq!(s.step(Action::No, &cc), Err(CascadeError::SteppedAfterCascade));
        assert_eq!(s.region(&cc), Err(CascadeError::NotInPlay));
    }

    #[test]
    fn regions() {
        let cc = cc_07_08();
        assert_eq!(WalkState::origin(&cc).region(&cc).unwrap(), Region::LowerSegment);
        assert_eq!(WalkState::from_counts(0, 1, &cc).region(&cc).unwrap(), Region::UpperSegment);
        let one = unit();
        assert_eq!(WalkState::origin(&one).region(&one).unwrap(), Region::Pivot);
    }

    #[test]
    fn likelihood_ratio_follows_h() {
        let q = SignalQualities::new(0.7, 0.8).unwrap();
        let cc = cascade_constant(&q);
        assert_eq!(WalkState::origin(&cc).likelihood_ratio(&q), 1.0);
        let s = WalkState::from_counts(0, 1, &cc);
        assert!((s.likelihood_ratio(&q) - 0.8 / 0.3).abs() < 1e-12);
        // a Yes multiplies the ratio by (1 - p2) / p1
        let s = s.step(Action::Yes, &cc).unwrap();
        assert!((s.likelihood_ratio(&q) - (0.8 / 0.3) * (0.2 / 0.7)).abs() < 1e-12);
    }

    fn random_in_play_walk(cc: &CascadeConstant, seed: u64, mut visit: impl FnMut(&WalkState, Action, &WalkState)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = WalkState::origin(cc);
        while s.is_in_play() && s.steps() < 10_000 {
            let action = if rng.random::<bool>() { Action::Yes } else { Action::No };
            let next = s.step(action, cc).unwrap();
            visit(&s, action, &next);
            s = next;
        }
    }

    #[test]
    fn rational_walks_keep_float_and_integer_state_in_sync() {
        let fractions = [(1u64, 1u64), (3, 2), (5, 3), (9, 7), (7, 4), (2, 1)];
        for seed in 0..10_000u64 {
            let (r, q) = fractions[seed as usize % fractions.len()];
            let cc = CascadeConstant::from_fraction(r, q).unwrap();
            random_in_play_walk(&cc, seed, |_, _, next| {
                let s = next.exact.unwrap();
                assert!((next.h - s as f64 / q as f64).abs() <= 1e-12);
                let recomputed = next.n_no as f64 - cc.value * next.n_yes as f64;
                assert!((next.h - recomputed).abs() <= 1e-12);
            });
        }
    }

    proptest! {
        #[test]
        fn in_play_steps_respect_regions(p1 in 0.51f64..0.95, d in 0.0f64..0.04, seed in any::<u64>()) {
            let p2 = (p1 + d).min(0.99);
            let cc = cascade_constant(&SignalQualities::new(p1, p2).unwrap());
            let mut violations = 0;
            random_in_play_walk(&cc, seed, |before, action, after| {
                if after.is_in_play() {
                    let region = before.region(&cc).unwrap();
                    let allowed = match action {
                        Action::Yes => region != Region::LowerSegment,
                        Action::No => region != Region::UpperSegment,
                    };
                    if !allowed {
                        violations += 1;
                    }
                }
            });
            prop_assert_eq!(violations, 0);
        }

        #[test]
        fn incremental_h_matches_counts(p1 in 0.51f64..0.95, d in 0.0f64..0.04, seed in any::<u64>()) {
            let p2 = (p1 + d).min(0.99);
            let cc = cascade_constant(&SignalQualities::new(p1, p2).unwrap());
            random_in_play_walk(&cc, seed, |_, _, next| {
                let recomputed = next.n_no as f64 - cc.value * next.n_yes as f64;
                assert!((next.h - recomputed).abs() <= 1e-12);
            });
        }
    }
}
