//! Binary channel model: the true state, private signals, actions and the
//! pair of signal qualities that parameterizes everything else.

use serde::Serialize;

use crate::error::{CascadeError, Result};

/// Signal qualities `(p1, p2)`: `p1 = P(H | G)` and `p2 = P(L | B)`.
///
/// Both lie strictly inside `(0.5, 1)`: every signal is informative but none
/// is revealing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalQualities {
    p1: f64,
    p2: f64,
}

impl SignalQualities {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        check_open_unit_half("p1", p1)?;
        check_open_unit_half("p2", p2)?;
        Ok(Self { p1, p2 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// `p1 <= p2`, the ordering the analytic formulas assume.
    pub fn is_canonical(&self) -> bool {
        self.p1 <= self.p2
    }

    /// Qualities with `p1` and `p2` exchanged. This relabels `G <-> B` and
    /// `Y <-> N`; the correct-cascade probability is unchanged.
    pub fn swapped(&self) -> Self {
        Self {
            p1: self.p2,
            p2: self.p1,
        }
    }

    /// Returns the canonical pair and whether a swap was needed.
    pub fn canonical(&self) -> (Self, bool) {
        if self.is_canonical() {
            (*self, false)
        } else {
            (self.swapped(), true)
        }
    }

    /// `|p1 - p2| <= 1e-12`.
    pub fn is_symmetric(&self) -> bool {
        (self.p1 - self.p2).abs() <= 1e-12
    }

    /// Probability that an agent who follows its signal plays `Yes`.
    pub fn prob_yes(&self, truth: TruthState) -> f64 {
        match truth {
            TruthState::Good => self.p1,
            TruthState::Bad => 1.0 - self.p2,
        }
    }
}

fn check_open_unit_half(name: &'static str, value: f64) -> Result<()> {
    if value > 0.5 && value < 1.0 {
        Ok(())
    } else {
        Err(CascadeError::OutOfRange { name, value })
    }
}

/// `validate_qualities`: builds a [`SignalQualities`], rejecting values
/// outside `(0.5, 1)`. Use [`SignalQualities::is_canonical`] for the ordering.
pub fn validate_qualities(p1: f64, p2: f64) -> Result<SignalQualities> {
    SignalQualities::new(p1, p2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthState {
    Good,
    Bad,
}

impl TruthState {
    /// The cascade that is correct under this state.
    pub fn correct_cascade(self) -> crate::walk::WalkStatus {
        match self {
            TruthState::Good => crate::walk::WalkStatus::YCascade,
            TruthState::Bad => crate::walk::WalkStatus::NCascade,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    High,
    Low,
}

impl Signal {
    /// Action of an agent that follows this private signal.
    pub fn followed(self) -> Action {
        match self {
            Signal::High => Action::Yes,
            Signal::Low => Action::No,
        }
    }
}
