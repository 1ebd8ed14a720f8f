//! Seeded Monte-Carlo simulation of the agent sequence.
//!
//! Every path owns a generator derived from `(seed, path index)` through a
//! 64-bit avalanche mix, so results do not depend on how paths are spread
//! over worker threads. Tallies are plain counts and reduce in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constant::CascadeConstant;
use crate::error::{CascadeError, Result};
use crate::model::{Action, SignalQualities, TruthState};
use crate::walk::{WalkState, WalkStatus};

/// Paths are absorbed almost surely; hitting this cap means the dynamics are
/// broken.
pub const STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathOutcome {
    pub status: WalkStatus,
    pub n_yes: u64,
    pub n_no: u64,
    pub steps: u64,
}

/// Runs one path from `h = 0` until absorption.
pub fn simulate_path<R: Rng + ?Sized>(q: &SignalQualities, truth: TruthState, rng: &mut R) -> Result<PathOutcome> {
    simulate_path_observed(q, &CascadeConstant::of(q), truth, rng, |_, _| {})
}

/// Like [`simulate_path`] with a precomputed constant; `observe` sees the
/// state before every step and the action taken from it.
pub fn simulate_path_observed<R, F>(
    q: &SignalQualities,
    cc: &CascadeConstant,
    truth: TruthState,
    rng: &mut R,
    mut observe: F,
) -> Result<PathOutcome>
where
    R: Rng + ?Sized,
    F: FnMut(&WalkState, Action),
{
    let p_yes = q.prob_yes(truth);
    let mut state = WalkState::origin(cc);
    while state.is_in_play() {
        if state.steps() >= STEP_CAP {
            return Err(CascadeError::StepCapExceeded { cap: STEP_CAP });
        }
        // in play, every agent follows its own signal
        let action = if rng.random::<f64>() < p_yes { Action::Yes } else { Action::No };
        observe(&state, action);
        state = state.step(action, cc)?;
    }
    Ok(PathOutcome {
        status: state.status,
        n_yes: state.n_yes,
        n_no: state.n_no,
        steps: state.steps(),
    })
}

/// SplitMix64 finalizer applied to `seed` offset by the golden-ratio stride
/// times `index`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, index))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchEstimate {
    pub paths: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
}

impl BatchEstimate {
    pub fn from_counts(successes: u64, paths: u64, seed: u64) -> Self {
        let estimate = successes as f64 / paths as f64;
        let std_error = (estimate * (1.0 - estimate) / paths as f64).sqrt();
        Self {
            paths,
            successes,
            estimate,
            std_error,
            ci95: (estimate - 1.96 * std_error, estimate + 1.96 * std_error),
            seed,
        }
    }

    /// `|estimate - value| <= k * std_error`.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.std_error
    }
}

fn count_hits(
    q: &SignalQualities,
    truth: TruthState,
    target: WalkStatus,
    indices: std::ops::Range<u64>,
    seed: u64,
) -> Result<u64> {
    let cc = CascadeConstant::of(q);
    indices
        .into_par_iter()
        .map(|i| {
            let outcome = simulate_path_observed(q, &cc, truth, &mut path_rng(seed, i), |_, _| {})?;
            Ok(u64::from(outcome.status == target))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn check_target(target: WalkStatus) -> Result<()> {
    if target == WalkStatus::InPlay {
        return Err(CascadeError::InvalidArgument("target must be a cascade".into()));
    }
    Ok(())
}

fn check_paths(paths: u64) -> Result<()> {
    if paths == 0 {
        return Err(CascadeError::InvalidArgument("paths must be at least 1".into()));
    }
    Ok(())
}

/// Fraction of `paths` simulated paths under `truth` that end in `target`.
pub fn estimate(
    q: &SignalQualities,
    truth: TruthState,
    target: WalkStatus,
    paths: u64,
    seed: u64,
) -> Result<BatchEstimate> {
    check_paths(paths)?;
    check_target(target)?;
    let hits = count_hits(q, truth, target, 0..paths, seed)?;
    Ok(BatchEstimate::from_counts(hits, paths, seed))
}

/// Correct-cascade frequency: the first half of the path indices run under
/// `G` and count Yes cascades, the second half run under `B` and count No
/// cascades.
pub fn estimate_pcc(q: &SignalQualities, paths: u64, seed: u64) -> Result<BatchEstimate> {
    check_paths(paths)?;
    if !paths.is_multiple_of(2) {
        return Err(CascadeError::InvalidArgument(format!("paths must be even, got {paths}")));
    }
    let half = paths / 2;
    let good = count_hits(q, TruthState::Good, WalkStatus::YCascade, 0..half, seed)?;
    let bad = count_hits(q, TruthState::Bad, WalkStatus::NCascade, half..paths, seed)?;
    Ok(BatchEstimate::from_counts(good + bad, paths, seed))
}

/// Every path outcome, in path-index order.
pub fn simulate_outcomes(q: &SignalQualities, truth: TruthState, paths: u64, seed: u64) -> Result<Vec<PathOutcome>> {
    check_paths(paths)?;
    let cc = CascadeConstant::of(q);
    (0..paths)
        .into_par_iter()
        .map(|i| simulate_path_observed(q, &cc, truth, &mut path_rng(seed, i), |_, _| {}))
        .collect()
}
