//! Cascade probabilities in closed form.
//!
//! For an irrational constant every Yes-cascading history with `i` `No`
//! actions has exactly `k_i` `Yes` actions, so
//!
//! ```text
//! P(Ycas | G) = sum_i (1 - p1)^i p1^k_i        P(Ycas | B) = sum_i p2^i (1 - p2)^k_i
//! ```
//!
//! For `a = r/q` the walk can revisit the pivot `a - 1`; summing the first
//! `r` terms and dividing by the probability of not returning to the pivot
//! gives the finite form
//!
//! ```text
//! P(Ycas | G) = sum_{i<r} (1 - p1)^i p1^k_i / (1 - 2 p1^q (1 - p1)^r)
//! ```
//!
//! and likewise for `B` with `(p2, 1 - p2)` in place of `(1 - p1, p1)`.
//! Both truth states share one shape: terms `x^i y^k_i` with `(x, y)` given
//! by [`Weights`].

use serde::Serialize;

use crate::constant::{cascade_constant_value, gcd, k_index, CascadeConstant, Rationality};
use crate::error::{CascadeError, Result};
use crate::model::{SignalQualities, TruthState};

pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
pub const MAX_SERIES_TERMS: u64 = 10_000_000;
/// Largest `|a(p1, p2) - r/q|` accepted when evaluating the rational form.
pub const FRACTION_MATCH_TOL: f64 = 1e-9;
pub const DEFAULT_SOLVE_TOL: f64 = 1e-12;
/// Upper end of the bisection bracket for `p2`.
pub const P2_CEILING: f64 = 1.0 - 1e-12;
const MAX_BISECTIONS: usize = 200;
/// Tolerance on `a` used when locating `p2` for census entries; tighter
/// than [`FRACTION_MATCH_TOL`] and attainable for large `a`, where `a`
/// moves by more than `1e-12` per ulp of `p2`.
pub const CENSUS_SOLVE_TOL: f64 = 1e-10;

/// Per-step weights of the Yes-cascade series: a `No` contributes `x`, a
/// `Yes` contributes `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Weights {
    x: f64,
    y: f64,
}

impl Weights {
    fn of(q: &SignalQualities, truth: TruthState) -> Self {
        match truth {
            TruthState::Good => Self {
                x: 1.0 - q.p1(),
                y: q.p1(),
            },
            TruthState::Bad => Self {
                x: q.p2(),
                y: 1.0 - q.p2(),
            },
        }
    }

    fn term(&self, i: u64, k: u64) -> f64 {
        self.x.powi(i as i32) * self.y.powi(k as i32)
    }

    /// Bound on `sum_{i > last} x^i y^k_i`, using `k_i > (i + 1) / a`:
    /// the terms are dominated by `y^(1/a) rho^i` with `rho = x y^(1/a)`.
    fn tail_after(&self, last: u64, a: f64) -> f64 {
        let y_root = self.y.powf(1.0 / a);
        let rho = self.x * y_root;
        y_root * rho.powf(last as f64 + 1.0) / (1.0 - rho)
    }

    fn truncation_index(&self, a: f64, tol: f64) -> Result<u64> {
        let y_root = self.y.powf(1.0 / a);
        let rho = self.x * y_root;
        let estimate = ((tol * (1.0 - rho) / y_root).ln() / rho.ln()).ceil() - 1.0;
        if !(estimate < MAX_SERIES_TERMS as f64) {
            return Err(CascadeError::ToleranceUnreachable {
                tol,
                max_terms: MAX_SERIES_TERMS,
            });
        }
        let mut last = estimate.max(0.0) as u64;
        while self.tail_after(last, a) >= tol {
            last += 1;
            if last > MAX_SERIES_TERMS {
                return Err(CascadeError::ToleranceUnreachable {
                    tol,
                    max_terms: MAX_SERIES_TERMS,
                });
            }
        }
        while last > 0 && self.tail_after(last - 1, a) < tol {
            last -= 1;
        }
        Ok(last)
    }

    /// `1 - 2 y^q x^r`: probability of not returning to the pivot.
    fn escape(&self, r: u64, q: u64) -> f64 {
        1.0 - 2.0 * self.y.powi(q as i32) * self.x.powi(r as i32)
    }
}

/// One term of the Yes-cascade series under both truth states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub i: u64,
    pub k: u64,
    pub term_good: f64,
    pub term_bad: f64,
}

pub fn series_term(q: &SignalQualities, cc: &CascadeConstant, i: u64) -> Result<SeriesTerm> {
    let k = k_index(i, cc)?;
    Ok(SeriesTerm {
        i,
        k,
        term_good: Weights::of(q, TruthState::Good).term(i, k),
        term_bad: Weights::of(q, TruthState::Bad).term(i, k),
    })
}

/// A truncated series value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    pub value: f64,
    /// Last index included.
    pub truncation_index: u64,
    /// Bound on the omitted tail.
    pub tail_bound: f64,
}

fn require_canonical(q: &SignalQualities) -> Result<()> {
    if q.is_canonical() {
        Ok(())
    } else {
        Err(CascadeError::InvalidArgument(format!(
            "formula requires p1 <= p2, got ({}, {})",
            q.p1(),
            q.p2()
        )))
    }
}

/// `P(Ycas | truth)` from the irrational-constant series, truncated once the
/// tail bound drops below `tol`.
pub fn ycas_irrational(q: &SignalQualities, truth: TruthState, tol: f64) -> Result<SeriesSum> {
    ycas_series(q, &CascadeConstant::of(q), truth, tol)
}

/// The irrational-constant series with `k_i` taken from `cc`. A rational
/// `cc` gives the exact-floor `k_i`.
pub fn ycas_series(q: &SignalQualities, cc: &CascadeConstant, truth: TruthState, tol: f64) -> Result<SeriesSum> {
    require_canonical(q)?;
    if !(tol > 0.0) {
        return Err(CascadeError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let w = Weights::of(q, truth);
    let last = w.truncation_index(cc.value, tol)?;
    let mut value = 0.0;
    for i in 0..=last {
        value += w.term(i, k_index(i, cc)?);
    }
    Ok(SeriesSum {
        value,
        truncation_index: last,
        tail_bound: w.tail_after(last, cc.value),
    })
}

/// `P(Ycas | truth)` for a rational constant `a = r/qden`.
pub fn ycas_rational(q: &SignalQualities, r: u64, qden: u64, truth: TruthState) -> Result<f64> {
    require_canonical(q)?;
    if r == 0 || qden == 0 || gcd(r, qden) != 1 {
        return Err(CascadeError::NotCoprime { r, q: qden });
    }
    let a = cascade_constant_value(q.p1(), q.p2());
    if (a - r as f64 / qden as f64).abs() > FRACTION_MATCH_TOL {
        return Err(CascadeError::ConstantMismatch { r, q: qden, a });
    }
    Ok(rational_form(q, r, qden, truth))
}

fn rational_form(q: &SignalQualities, r: u64, qden: u64, truth: TruthState) -> f64 {
    let w = Weights::of(q, truth);
    let cc = Rationality::Rational { r, q: qden };
    let cc = CascadeConstant {
        value: r as f64 / qden as f64,
        rationality: cc,
    };
    let mut numerator = 0.0;
    for i in 0..r {
        numerator += w.term(i, k_index(i, &cc).expect("rational k_index is infallible"));
        // the remaining terms are below double resolution of the sum
        if i % 64 == 63 && w.tail_after(i, cc.value) < numerator * 1e-3 * f64::EPSILON {
            break;
        }
    }
    numerator / w.escape(r, qden)
}

/// Correct-cascade probability of a symmetric channel `p1 = p2 = p`:
/// `(1 + (2p - 1) / (1 - 2p(1 - p))) / 2`.
pub fn symmetric_pcc(p: f64) -> f64 {
    0.5 * (1.0 + (2.0 * p - 1.0) / (1.0 - 2.0 * p * (1.0 - p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PccMode {
    /// Rational closed form at `p1 = p2`, irrational series elsewhere.
    Auto,
    Irrational,
    Rational,
}

impl std::str::FromStr for PccMode {
    type Err = CascadeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(PccMode::Auto),
            "irrational" => Ok(PccMode::Irrational),
            "rational" => Ok(PccMode::Rational),
            other => Err(CascadeError::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for PccMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PccMode::Auto => "auto",
            PccMode::Irrational => "irrational",
            PccMode::Rational => "rational",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    IrrationalSeries,
    RationalClosedForm,
}

/// Cascade probabilities for the qualities as given. When the input was not
/// canonical the computation runs on the swapped pair and the conditionals
/// are relabeled back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeProbabilities {
    pub p1: f64,
    pub p2: f64,
    /// Cascade constant of `(p1, p2)` in the given order.
    pub a: f64,
    pub swapped: bool,
    pub ycas_good: f64,
    pub ycas_bad: f64,
    pub ncas_bad: f64,
    pub pcc: f64,
    pub formula: Formula,
    /// Fraction used by the closed form.
    pub fraction: Option<(u64, u64)>,
    pub truncation_index: Option<u64>,
    /// Bound on the truncation error of `ycas_good + ncas_bad`.
    pub tail_bound: Option<f64>,
}

impl CascadeProbabilities {
    fn assemble(
        given: &SignalQualities,
        swapped: bool,
        canon_ycas_good: f64,
        canon_ycas_bad: f64,
        formula: Formula,
        fraction: Option<(u64, u64)>,
        truncation: Option<(u64, f64)>,
    ) -> Self {
        // swapping exchanges G <-> B and Y <-> N
        let (ycas_good, ycas_bad) = if swapped {
            (1.0 - canon_ycas_bad, 1.0 - canon_ycas_good)
        } else {
            (canon_ycas_good, canon_ycas_bad)
        };
        let ncas_bad = 1.0 - ycas_bad;
        Self {
            p1: given.p1(),
            p2: given.p2(),
            a: cascade_constant_value(given.p1(), given.p2()),
            swapped,
            ycas_good,
            ycas_bad,
            ncas_bad,
            pcc: 0.5 * (ycas_good + ncas_bad),
            formula,
            fraction,
            truncation_index: truncation.map(|t| t.0),
            tail_bound: truncation.map(|t| t.1),
        }
    }
}

/// Correct-cascade probability `(P(Ycas | G) + P(Ncas | B)) / 2`.
pub fn pcc(q: &SignalQualities, mode: PccMode, tol: f64) -> Result<CascadeProbabilities> {
    let (canon, swapped) = q.canonical();
    let use_rational = match mode {
        PccMode::Auto => canon.is_symmetric(),
        PccMode::Rational => true,
        PccMode::Irrational => false,
    };
    if use_rational {
        let (r, qden) = if mode == PccMode::Auto {
            (1, 1)
        } else {
            CascadeConstant::of(&canon)
                .rationality
                .fraction()
                .ok_or(CascadeError::NotRational {
                    a: cascade_constant_value(canon.p1(), canon.p2()),
                })?
        };
        let good = ycas_rational(&canon, r, qden, TruthState::Good)?;
        let bad = ycas_rational(&canon, r, qden, TruthState::Bad)?;
        return Ok(CascadeProbabilities::assemble(
            q,
            swapped,
            good,
            bad,
            Formula::RationalClosedForm,
            Some((r, qden)),
            None,
        ));
    }
    let cc = CascadeConstant::of(&canon);
    let good = ycas_series(&canon, &cc, TruthState::Good, tol)?;
    let bad = ycas_series(&canon, &cc, TruthState::Bad, tol)?;
    Ok(CascadeProbabilities::assemble(
        q,
        swapped,
        good.value,
        bad.value,
        Formula::IrrationalSeries,
        None,
        Some((
            good.truncation_index.max(bad.truncation_index),
            good.tail_bound + bad.tail_bound,
        )),
    ))
}

/// The closed form evaluated at an explicit fraction, skipping the check
/// that `r/q` matches `a(p1, p2)` to [`FRACTION_MATCH_TOL`]. Used for
/// rational approximations of an irrational constant.
pub fn pcc_at_fraction(q: &SignalQualities, r: u64, qden: u64) -> Result<CascadeProbabilities> {
    let (canon, swapped) = q.canonical();
    if r == 0 || qden == 0 || gcd(r, qden) != 1 {
        return Err(CascadeError::NotCoprime { r, q: qden });
    }
    let good = rational_form(&canon, r, qden, TruthState::Good);
    let bad = rational_form(&canon, r, qden, TruthState::Bad);
    Ok(CascadeProbabilities::assemble(
        q,
        swapped,
        good,
        bad,
        Formula::RationalClosedForm,
        Some((r, qden)),
        None,
    ))
}

/// Finds `p2 >= p1` with `|a(p1, p2) - a_target| <= tol` by bisection;
/// `a` is strictly increasing in `p2`.
pub fn solve_p2_for_a(p1: f64, a_target: f64, tol: f64) -> Result<f64> {
    if !(p1 > 0.5 && p1 < 1.0) {
        return Err(CascadeError::OutOfRange { name: "p1", value: p1 });
    }
    if !(a_target >= 1.0 && a_target.is_finite() && tol > 0.0) {
        return Err(CascadeError::InvalidArgument(format!(
            "need a_target >= 1 and tol > 0, got {a_target} and {tol}"
        )));
    }
    let f = |p2: f64| cascade_constant_value(p1, p2) - a_target;
    let (mut lo, mut hi) = (p1, P2_CEILING);
    if f(lo).abs() <= tol {
        return Ok(lo);
    }
    let f_hi = f(hi);
    if f_hi.abs() <= tol {
        return Ok(hi);
    }
    if f_hi < 0.0 {
        return Err(CascadeError::NoSolution { p1, target: a_target });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() <= tol {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // bracket collapsed to adjacent doubles without meeting tol
    Err(CascadeError::NoSolution { p1, target: a_target })
}

/// Difference between the rational and irrational formulas at the `p2`
/// where `a(p1, p2) = r/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalGap {
    pub r: u64,
    pub q: u64,
    pub p2: f64,
    pub gap_good: f64,
    pub gap_bad: f64,
    pub gap_pcc: f64,
}

pub fn rational_gap(p1: f64, r: u64, qden: u64) -> Result<RationalGap> {
    if r == 0 || qden == 0 || gcd(r, qden) != 1 {
        return Err(CascadeError::NotCoprime { r, q: qden });
    }
    if r < qden {
        return Err(CascadeError::InvalidArgument(format!("need r >= q, got {r}/{qden}")));
    }
    let p2 = solve_p2_for_a(p1, r as f64 / qden as f64, CENSUS_SOLVE_TOL)?;
    let q = SignalQualities::new(p1, p2)?;
    let cc = CascadeConstant::from_fraction(r, qden)?;

    let ra_good = ycas_rational(&q, r, qden, TruthState::Good)?;
    let ra_bad = ycas_rational(&q, r, qden, TruthState::Bad)?;
    let irr_good = ycas_series(&q, &cc, TruthState::Good, DEFAULT_SERIES_TOL)?.value;
    let irr_bad = ycas_series(&q, &cc, TruthState::Bad, DEFAULT_SERIES_TOL)?.value;
    let pcc_ra = 0.5 * (ra_good + 1.0 - ra_bad);
    let pcc_irr = 0.5 * (irr_good + 1.0 - irr_bad);
    Ok(RationalGap {
        r,
        q: qden,
        p2,
        gap_good: (ra_good - irr_good).abs(),
        gap_bad: (ra_bad - irr_bad).abs(),
        gap_pcc: (pcc_ra - pcc_irr).abs(),
    })
}

/// Census of how far the rational formula departs from the irrational one
/// over every reduced `r/q` with `q <= r <= max_den`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub p1: f64,
    pub epsilon: f64,
    pub max_den: u64,
    pub entries: Vec<RationalGap>,
    /// Fractions whose constant is not reachable below `p2 = 1 - 1e-12`.
    pub skipped: Vec<(u64, u64)>,
    /// Entries with `max(gap_good, gap_bad) > epsilon`.
    pub exceed_count: usize,
    pub exceed_count_good: usize,
    pub exceed_count_bad: usize,
    /// `(log2(1/epsilon) + 1)^2`.
    pub theoretical_bound: f64,
}

impl CensusReport {
    pub fn within_bound(&self) -> bool {
        self.exceed_count_good as f64 <= self.theoretical_bound
            && self.exceed_count_bad as f64 <= self.theoretical_bound
    }
}

pub fn census_bound(epsilon: f64) -> f64 {
    ((1.0 / epsilon).log2() + 1.0).powi(2)
}

pub fn rational_census(p1: f64, epsilon: f64, max_den: u64) -> Result<CensusReport> {
    if !(p1 > 0.5 && p1 < 1.0) {
        return Err(CascadeError::OutOfRange { name: "p1", value: p1 });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) || max_den == 0 {
        return Err(CascadeError::InvalidArgument(format!(
            "need 0 < epsilon < 1 and max_den >= 1, got {epsilon} and {max_den}"
        )));
    }
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for r in 1..=max_den {
        for qden in (1..=r).filter(|&qd| gcd(r, qd) == 1) {
            match rational_gap(p1, r, qden) {
                Ok(gap) => entries.push(gap),
                Err(CascadeError::NoSolution { .. }) => skipped.push((r, qden)),
                Err(e) => return Err(e),
            }
        }
    }
    let count = |pred: &dyn Fn(&RationalGap) -> bool| entries.iter().filter(|g| pred(g)).count();
    let exceed_count = count(&|g| g.gap_good.max(g.gap_bad) > epsilon);
    let exceed_count_good = count(&|g| g.gap_good > epsilon);
    let exceed_count_bad = count(&|g| g.gap_bad > epsilon);
    Ok(CensusReport {
        p1,
        epsilon,
        max_den,
        exceed_count,
        exceed_count_good,
        exceed_count_bad,
        theoretical_bound: census_bound(epsilon),
        entries,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p1: f64, p2: f64) -> SignalQualities {
        SignalQualities::new(p1, p2).unwrap()
    }

    // Frozen from a 50-digit term-by-term evaluation of the series.
    const YCAS_G_07_08: f64 = 0.886_814_916_901_310_9;
    const YCAS_B_07_08: f64 = 0.238_719_718_784_642;
    const YCAS_G_06_075: f64 = 0.796_790_638_084_124_5;
    const PCC_07_08: f64 = 0.824_047_599_058_334_5;

    #[test]
    fn irrational_series_examples() {
        let s = ycas_irrational(&q(0.7, 0.8), TruthState::Good, 1e-12).unwrap();
        assert!((s.value - YCAS_G_07_08).abs() < 1e-12, "{}", s.value);
        assert!(s.tail_bound < 1e-12);
        let s = ycas_irrational(&q(0.7, 0.8), TruthState::Bad, 1e-12).unwrap();
        assert!((s.value - YCAS_B_07_08).abs() < 1e-12, "{}", s.value);
        let s = ycas_irrational(&q(0.6, 0.75), TruthState::Good, 1e-12).unwrap();
        assert!((s.value - YCAS_G_06_075).abs() < 1e-12, "{}", s.value);
    }

    #[test]
    fn series_requires_canonical_order_and_positive_tol() {
        assert!(ycas_irrational(&q(0.8, 0.7), TruthState::Good, 1e-12).is_err());
        assert!(ycas_irrational(&q(0.7, 0.8), TruthState::Good, 0.0).is_err());
    }

    #[test]
    fn tiny_tolerances_stay_cheap() {
        // the per-term ratio never exceeds 1 - p1 < 1/2, even as p2 -> 1
        let s = ycas_irrational(&q(0.51, 1.0 - 1e-12), TruthState::Bad, 1e-300).unwrap();
        assert!(s.truncation_index < 2_000, "{s:?}");
        assert!(matches!(
            ycas_irrational(&q(0.7, 0.8), TruthState::Good, 0.0),
            Err(CascadeError::InvalidArgument(_))
        ));
    }

    #[test]
    fn slowly_decaying_series_is_refused() {
        let w = Weights { x: 1.0 - 1e-9, y: 1.0 - 1e-12 };
        assert!(matches!(
            w.truncation_index(1e9, 1e-12),
            Err(CascadeError::ToleranceUnreachable { .. })
        ));
    }

    #[test]
    fn rational_symmetric_examples() {
        let g = ycas_rational(&q(0.7, 0.7), 1, 1, TruthState::Good).unwrap();
        let b = ycas_rational(&q(0.7, 0.7), 1, 1, TruthState::Bad).unwrap();
        assert!((g - 49.0 / 58.0).abs() < 1e-15);
        assert!((b - 9.0 / 58.0).abs() < 1e-15);
    }

    #[test]
    fn rational_three_halves() {
        let p2 = solve_p2_for_a(0.6, 1.5, 1e-12).unwrap();
        let g = ycas_rational(&q(0.6, p2), 3, 2, TruthState::Good).unwrap();
        let expected = (0.6 + 0.144 + 0.034_56) / (1.0 - 2.0 * 0.36 * 0.064);
        assert!((g - expected).abs() < 1e-9, "{g} vs {expected}");
        assert!((g - 0.816_169).abs() < 1e-6);
    }

    #[test]
    fn rational_rejects_bad_fractions() {
        assert_eq!(
            ycas_rational(&q(0.7, 0.7), 2, 2, TruthState::Good),
            Err(CascadeError::NotCoprime { r: 2, q: 2 })
        );
        assert!(matches!(
            ycas_rational(&q(0.7, 0.8), 1, 1, TruthState::Good),
            Err(CascadeError::ConstantMismatch { r: 1, q: 1, .. })
        ));
    }

    #[test]
    fn pcc_examples() {
        let r = pcc(&q(0.7, 0.7), PccMode::Rational, 1e-12).unwrap();
        assert!((r.pcc - 49.0 / 58.0).abs() < 1e-12);
        assert_eq!(r.formula, Formula::RationalClosedForm);
        assert!(r.tail_bound.is_none());

        let irr = pcc(&q(0.7, 0.7), PccMode::Irrational, 1e-12).unwrap();
        assert!((irr.pcc - 119.0 / 158.0).abs() < 1e-12, "{}", irr.pcc);
        assert!(irr.tail_bound.is_some());

        let auto = pcc(&q(0.7, 0.8), PccMode::Auto, 1e-12).unwrap();
        assert_eq!(auto.formula, Formula::IrrationalSeries);
        assert!((auto.pcc - PCC_07_08).abs() < 1e-12);
        assert_eq!(auto.ncas_bad, 1.0 - auto.ycas_bad);

        let auto_sym = pcc(&q(0.7, 0.7), PccMode::Auto, 1e-12).unwrap();
        assert_eq!(auto_sym.formula, Formula::RationalClosedForm);
    }

    #[test]
    fn pcc_rational_mode_needs_a_fraction() {
        assert!(matches!(
            pcc(&q(0.7, 0.8), PccMode::Rational, 1e-12),
            Err(CascadeError::NotRational { .. })
        ));
    }

    #[test]
    fn swapped_input_relabels_conditionals() {
        let fwd = pcc(&q(0.7, 0.8), PccMode::Auto, 1e-12).unwrap();
        let rev = pcc(&q(0.8, 0.7), PccMode::Auto, 1e-12).unwrap();
        assert!(rev.swapped && !fwd.swapped);
        assert!((fwd.pcc - rev.pcc).abs() < 1e-15);
        // P(Y | G) under (0.8, 0.7) is P(N | B) under (0.7, 0.8)
        assert!((rev.ycas_good - fwd.ncas_bad).abs() < 1e-15);
        assert!((rev.ncas_bad - fwd.ycas_good).abs() < 1e-15);
        assert!((rev.a * fwd.a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_examples() {
        let p2 = solve_p2_for_a(0.7, 1.277_248_781_731_014_5, 1e-12).unwrap();
        assert!((p2 - 0.8).abs() < 1e-9);
        assert_eq!(solve_p2_for_a(0.7, 1.0, 1e-12).unwrap(), 0.7);
        let p2 = solve_p2_for_a(0.6, 1.5, 1e-12).unwrap();
        assert!((cascade_constant_value(0.6, p2) - 1.5).abs() <= 1e-12);
        assert!((p2 - 0.779_404_301_298_863_6).abs() < 1e-9);
    }

    #[test]
    fn solve_rejects_unreachable_targets() {
        assert!(matches!(solve_p2_for_a(0.7, 40.0, 1e-12), Err(CascadeError::NoSolution { .. })));
        assert!(solve_p2_for_a(0.7, 0.5, 1e-12).is_err());
        assert!(solve_p2_for_a(0.4, 1.5, 1e-12).is_err());
    }

    #[test]
    fn gap_examples() {
        let g = rational_gap(0.7, 1, 1).unwrap();
        assert_eq!(g.p2, 0.7);
        assert!((g.gap_pcc - (49.0 / 58.0 - 119.0 / 158.0)).abs() < 1e-12);
        assert!((g.gap_pcc - 0.091_663).abs() < 1e-6);
        assert!((g.gap_good - (49.0 / 58.0 - 49.0 / 79.0)).abs() < 1e-12);
        assert!((g.gap_good - 0.224_575).abs() < 1e-6);

        let g = rational_gap(0.7, 9, 7).unwrap();
        assert!(g.gap_good < 1e-3 && g.gap_bad < 1e-3);
        assert!(rational_gap(0.7, 2, 3).is_err());
        assert!(rational_gap(0.7, 4, 2).is_err());
    }

    #[test]
    fn gaps_shrink_along_convergents() {
        // convergents of a(0.7, 0.8) with r <= 64
        let fractions = [(1, 1), (4, 3), (5, 4), (9, 7), (14, 11), (23, 18)];
        let gaps: Vec<f64> = fractions
            .iter()
            .map(|&(r, qd)| rational_gap(0.7, r, qd).unwrap().gap_pcc)
            .collect();
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0], "{gaps:?}");
        }
        assert!(gaps[3] < gaps[0]);
    }

    #[test]
    fn census_examples() {
        let report = rational_census(0.7, 0.05, 32).unwrap();
        assert!((report.theoretical_bound - 28.322_918_647_151_43).abs() < 1e-9);
        assert!(report.exceed_count_good <= 28 && report.exceed_count_bad <= 28);
        assert!(report.within_bound());
        assert!(!report.entries.is_empty());
        assert_eq!(
            report.entries.len() + report.skipped.len(),
            (1..=32u64).map(|r| (1..=r).filter(|&q| gcd(r, q) == 1).count()).sum::<usize>()
        );

        let loose = rational_census(0.7, 0.5, 32).unwrap();
        assert_eq!(loose.exceed_count, 0);

        let ints = rational_census(0.7, 0.05, 1).unwrap();
        assert_eq!(ints.entries.len() + ints.skipped.len(), 1);
        assert!(ints.entries.iter().all(|g| g.q == 1));

        assert!(rational_census(0.7, 0.0, 4).is_err());
    }

    #[test]
    fn closed_form_identity_at_unit_constant() {
        for n in 51..100 {
            let p = n as f64 / 100.0;
            let g = ycas_rational(&q(p, p), 1, 1, TruthState::Good).unwrap();
            assert!((g - p * p / (1.0 - 2.0 * p * (1.0 - p))).abs() <= 1e-15);
            let r = pcc(&q(p, p), PccMode::Rational, 1e-12).unwrap();
            assert!((r.pcc - symmetric_pcc(p)).abs() <= 1e-15, "p = {p}");
        }
    }

    #[test]
    fn symmetric_point_cancellation() {
        // exact floor gives k_i = i + 2, the right limit gives k_i = i + 1
        for n in 0..8 {
            let p = 0.55 + 0.05 * n as f64;
            let sym = q(p, p);
            let floor_cc = CascadeConstant::from_fraction(1, 1).unwrap();
            let right_cc = CascadeConstant::irrational(1.0 + 1e-9);
            let fg = ycas_series(&sym, &floor_cc, TruthState::Good, 1e-14).unwrap().value;
            let fb = ycas_series(&sym, &floor_cc, TruthState::Bad, 1e-14).unwrap().value;
            let rg = ycas_series(&sym, &right_cc, TruthState::Good, 1e-14).unwrap().value;
            let rb = ycas_series(&sym, &right_cc, TruthState::Bad, 1e-14).unwrap().value;
            assert!((fg - rg).abs() > 1e-3 && (fb - rb).abs() > 1e-3);
            let floor_pcc = 0.5 * (fg + 1.0 - fb);
            let right_pcc = 0.5 * (rg + 1.0 - rb);
            assert!((floor_pcc - right_pcc).abs() <= 1e-12, "p = {p}");
        }
    }

    #[test]
    fn series_term_bounds() {
        let qq = q(0.7, 0.8);
        let cc = CascadeConstant::of(&qq);
        for i in 0..50 {
            let t = series_term(&qq, &cc, i).unwrap();
            assert!(t.term_good > 0.0 && t.term_good <= 0.3f64.powi(i as i32));
            assert!(t.term_bad > 0.0 && t.term_bad <= 0.8f64.powi(i as i32));
        }
    }

    fn canonical_pair() -> impl Strategy<Value = (f64, f64)> {
        (0.501f64..0.999, 0.501f64..0.999).prop_map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn tail_bound_is_sound((p1, p2) in canonical_pair(), good in any::<bool>()) {
            let truth = if good { TruthState::Good } else { TruthState::Bad };
            let qq = q(p1, p2);
            let coarse = ycas_irrational(&qq, truth, 1e-6).unwrap();
            let fine = ycas_irrational(&qq, truth, 1e-12).unwrap();
            prop_assert!(coarse.tail_bound < 1e-6);
            prop_assert!((fine.value - coarse.value).abs() <= coarse.tail_bound);
        }

        #[test]
        fn swap_symmetry((p1, p2) in canonical_pair()) {
            let fwd = pcc(&q(p1, p2), PccMode::Auto, 1e-12).unwrap();
            let rev = pcc(&q(p2, p1), PccMode::Auto, 1e-12).unwrap();
            let bound = 2.0 * fwd.tail_bound.unwrap_or(0.0) + 1e-15;
            prop_assert!((fwd.pcc - rev.pcc).abs() <= bound);
        }

        #[test]
        fn first_term_lower_bound((p1, p2) in canonical_pair()) {
            let qq = q(p1, p2);
            let cc = CascadeConstant::of(&qq);
            let first = p1.powi(k_index(0, &cc).unwrap() as i32);
            let probs = pcc(&qq, PccMode::Irrational, 1e-12).unwrap();
            prop_assert!(probs.ycas_good >= first);
            prop_assert!(probs.pcc > 0.0 && probs.pcc < 1.0);
        }
    }
}
