//! The cascade constant `a = ln(p1 / (1 - p2)) / ln(p2 / (1 - p1))` and its
//! rational/irrational classification.

use serde::Serialize;

use crate::error::{CascadeError, Result};
use crate::model::SignalQualities;

pub const DEFAULT_RATIONAL_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_DENOMINATOR: u64 = 1_000_000;

/// Distance from an integer below which a floating `(i + 1) / a` is
/// considered ambiguous for an irrational-classified constant.
const NEAR_INTEGER_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rationality {
    Irrational,
    /// `a = r / q` in lowest terms.
    Rational { r: u64, q: u64 },
}

impl Rationality {
    pub fn fraction(&self) -> Option<(u64, u64)> {
        match *self {
            Rationality::Irrational => None,
            Rationality::Rational { r, q } => Some((r, q)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeConstant {
    pub value: f64,
    pub rationality: Rationality,
}

impl CascadeConstant {
    /// `cascade_constant`: computes `a` and classifies it with the default
    /// tolerance and denominator bound.
    pub fn of(q: &SignalQualities) -> Self {
        let value = cascade_constant_value(q.p1(), q.p2());
        Self {
            value,
            rationality: classify_rationality(value, DEFAULT_RATIONAL_TOL, DEFAULT_MAX_DENOMINATOR),
        }
    }

    /// Exact constant `r / q`; the fraction is reduced first.
    pub fn from_fraction(r: u64, q: u64) -> Result<Self> {
        if r == 0 || q == 0 {
            return Err(CascadeError::InvalidArgument(format!(
                "fraction {r}/{q} must have positive terms"
            )));
        }
        let g = gcd(r, q);
        let (r, q) = (r / g, q / g);
        Ok(Self {
            value: r as f64 / q as f64,
            rationality: Rationality::Rational { r, q },
        })
    }

    /// Treats `value` as irrational regardless of how it would classify.
    pub fn irrational(value: f64) -> Self {
        Self {
            value,
            rationality: Rationality::Irrational,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.rationality, Rationality::Rational { .. })
    }
}

/// Raw `a(p1, p2)` in double precision. Equal arguments give exactly `1.0`.
pub fn cascade_constant_value(p1: f64, p2: f64) -> f64 {
    (p1 / (1.0 - p2)).ln() / (p2 / (1.0 - p1)).ln()
}

pub fn cascade_constant(q: &SignalQualities) -> CascadeConstant {
    CascadeConstant::of(q)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Classifies `a` by walking its continued-fraction convergents. The first
/// convergent `r / q` with `q <= max_den` and `|a - r/q| <= tol` wins;
/// convergents are always in lowest terms.
pub fn classify_rationality(a: f64, tol: f64, max_den: u64) -> Rationality {
    if !(a.is_finite() && a > 0.0 && tol > 0.0 && max_den >= 1) {
        return Rationality::Irrational;
    }
    convergents(a)
        .take_while(|&(_, q)| q <= max_den)
        .find(|&(r, q)| (a - r as f64 / q as f64).abs() <= tol)
        .map_or(Rationality::Irrational, |(r, q)| Rationality::Rational { r, q })
}

/// Continued-fraction convergents `(numerator, denominator)` of a positive
/// real, in order of increasing denominator. Stops on overflow or once the
/// expansion terminates in floating point.
pub fn convergents(a: f64) -> impl Iterator<Item = (u64, u64)> {
    let mut x = a;
    let (mut h1, mut h2) = (1u64, 0u64);
    let (mut k1, mut k2) = (0u64, 1u64);
    let mut done = !(a.is_finite() && a > 0.0);
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let term = x.floor();
        if term > u64::MAX as f64 / 2.0 {
            done = true;
            return None;
        }
        let t = term as u64;
        let h = t.checked_mul(h1).and_then(|v| v.checked_add(h2));
        let k = t.checked_mul(k1).and_then(|v| v.checked_add(k2));
        let (Some(h), Some(k)) = (h, k) else {
            done = true;
            return None;
        };
        (h2, h1, k2, k1) = (h1, h, k1, k);
        let frac = x - term;
        if frac <= f64::EPSILON * x.max(1.0) {
            done = true;
        } else {
            x = 1.0 / frac;
        }
        Some((h, k))
    })
    // a < 1 has a leading zero term
    .filter(|&(h, _)| h != 0)
}

/// `k_i = floor((i + 1) / a) + 1`: the number of `Yes` actions on the unique
/// Yes-cascading history with `i` `No` actions.
///
/// Rational constants use exact integer arithmetic. An irrational constant
/// whose `(i + 1) / a` lands within `1e-12` of an integer is reported as
/// [`CascadeError::NearIntegerAmbiguity`].
pub fn k_index(i: u64, cc: &CascadeConstant) -> Result<u64> {
    match cc.rationality {
        Rationality::Rational { r, q } => {
            let k = (i as u128 + 1) * q as u128 / r as u128 + 1;
            Ok(k as u64)
        }
        Rationality::Irrational => {
            let x = (i + 1) as f64 / cc.value;
            if (x - x.round()).abs() <= NEAR_INTEGER_BAND {
                return Err(CascadeError::NearIntegerAmbiguity { i, a: cc.value });
            }
            Ok(x.floor() as u64 + 1)
        }
    }
}
