//! Correct-cascade probability along a grid of `p2` values at fixed `p1`.
//!
//! Grid points below `p1` are evaluated on the swapped pair, so a single
//! sweep crosses the symmetric point. Rational-mode rows at points whose
//! constant is not a small fraction use the first continued-fraction
//! convergent within [`SWEEP_FRACTION_TOL`], so the rational curve is
//! defined everywhere and converges to the irrational one.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{pcc, pcc_at_fraction, CascadeProbabilities, PccMode, DEFAULT_SERIES_TOL};
use crate::constant::{cascade_constant_value, classify_rationality, DEFAULT_MAX_DENOMINATOR};
use crate::error::{CascadeError, Result};
use crate::model::SignalQualities;

pub const SWEEP_FRACTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub p1: f64,
    pub p2_from: f64,
    pub p2_to: f64,
    pub step: f64,
    pub modes: Vec<PccMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub p2: f64,
    pub a: f64,
    pub mode: PccMode,
    pub pcc: f64,
    pub ycas_good: f64,
    pub ncas_bad: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CascadeError::InvalidArgument(msg));
        if !(self.p2_from < self.p2_to) {
            return bad(format!("need p2_from < p2_to, got {} and {}", self.p2_from, self.p2_to));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if self.modes.is_empty() {
            return bad("at least one mode is required".into());
        }
        SignalQualities::new(self.p1, self.p2_from)?;
        SignalQualities::new(self.p1, self.p2_to)?;
        Ok(())
    }

    /// `floor((p2_to - p2_from) / step) + 1`.
    pub fn point_count(&self) -> usize {
        ((self.p2_to - self.p2_from) / self.step + 1e-9).floor() as usize + 1
    }

    /// Grid values, rounded to 12 decimals so that e.g. `0.501 + 199 * 0.001`
    /// lands on `0.7`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.point_count())
            .map(|i| ((self.p2_from + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }

    /// One row per `(grid point, mode)`, grid-major.
    pub fn rows(&self) -> Result<Vec<SweepRow>> {
        self.validate()?;
        let grid = self.grid();
        let per_point = grid
            .par_iter()
            .map(|&p2| {
                let q = SignalQualities::new(self.p1, p2)?;
                self.modes.iter().map(|&mode| sweep_row(&q, mode)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(per_point.into_iter().flatten().collect())
    }
}

fn sweep_row(q: &SignalQualities, mode: PccMode) -> Result<SweepRow> {
    let probs = match mode {
        PccMode::Rational => rational_row(q)?,
        other => pcc(q, other, DEFAULT_SERIES_TOL)?,
    };
    Ok(SweepRow {
        p2: q.p2(),
        a: probs.a,
        mode,
        pcc: probs.pcc,
        ycas_good: probs.ycas_good,
        ncas_bad: probs.ncas_bad,
    })
}

fn rational_row(q: &SignalQualities) -> Result<CascadeProbabilities> {
    match pcc(q, PccMode::Rational, DEFAULT_SERIES_TOL) {
        Err(CascadeError::NotRational { .. }) => {
            let (canon, _) = q.canonical();
            let a = cascade_constant_value(canon.p1(), canon.p2());
            let (r, qden) = classify_rationality(a, SWEEP_FRACTION_TOL, DEFAULT_MAX_DENOMINATOR)
                .fraction()
                .ok_or(CascadeError::NotRational { a })?;
            pcc_at_fraction(q, r, qden)
        }
        other => other,
    }
}
