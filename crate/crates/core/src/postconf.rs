//! The race after confirmation: can the adversary close its deficit?
//!
//! Under the delay attack the race is a three-way walk (honest jumper alone,
//! jumper with one adversarial block in its window, or a net adversarial
//! gain), with the extra rule that a tie step at the running maximum also
//! wins. Under the rigged model arrivals are taken two at a time, so the walk
//! moves by -2, 0 or +2; an odd deficit is first made even with a single
//! rigged-model toss.

use serde::Serialize;

use crate::error::{Condition, Error, Result};
use crate::lead::{LeadPmf, LeadVariant};
use crate::params::{DerivedParams, RegimeReport};
use crate::pmf::{check_eps, Pmf, DEFAULT_INDEX_CAP};

/// Powers above this exponent are taken in log space.
const LOG_SPACE_EXPONENT: u64 = 50;

fn ratio_pow(ratio: f64, e: u64) -> f64 {
    if e > LOG_SPACE_EXPONENT {
        if ratio == 0.0 {
            0.0
        } else {
            (e as f64 * ratio.ln()).exp()
        }
    } else {
        ratio.powi(e as i32)
    }
}

/// Step law of the delay-attack walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeWayWalk {
    /// Honest jumper with an empty window (`alpha_0`).
    pub left: f64,
    /// Jumper with one adversarial block in its window (`alpha_1`).
    pub stay: f64,
    /// Adversarial block, or a jumper with two or more (`beta_1`).
    pub right: f64,
}

impl ThreeWayWalk {
    pub fn from_derived(d: &DerivedParams) -> Self {
        Self { left: d.alpha_0(), stay: d.alpha_1(), right: d.beta_1() }
    }

    fn check(&self) -> Result<()> {
        if self.right < self.left {
            Ok(())
        } else {
            Err(Error::RegimeViolation(Condition::ThreeWayDrift))
        }
    }
}

/// Step law of the rigged walk over pairs of arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedWalk {
    /// (2, 0) honest/adversarial growth, `abar^2`.
    pub both_honest: f64,
    /// (1, 1) growth, `rho`.
    pub split: f64,
    /// (0, 2) growth, `bbar^2`.
    pub both_adversarial: f64,
    /// Honest probability of the single parity-fixing toss, `abar`.
    pub single_honest: f64,
}

impl PairedWalk {
    pub fn from_derived(d: &DerivedParams) -> Self {
        let abar = d.abar();
        Self { both_honest: abar * abar, split: d.rho(), both_adversarial: d.bbar_sq(), single_honest: abar }
    }

    /// `bbar / abar`
    pub fn ratio(&self) -> f64 {
        self.both_adversarial.max(0.0).sqrt() / self.single_honest
    }

    fn check(&self) -> Result<()> {
        if self.both_adversarial.max(0.0).sqrt() < self.single_honest {
            Ok(())
        } else {
            Err(Error::RegimeViolation(Condition::TwoStepDrift))
        }
    }
}

/// `P(max_i T'_i >= a)` for the three-way walk with the tie rule:
/// `(beta_1/alpha_0)^{a-1} (1 - alpha_0) / (1 - beta_1)` for `a >= 1`, and 1
/// for `a <= 0`.
pub fn three_way_max_tail(w: &ThreeWayWalk, a: i64) -> Result<f64> {
    w.check()?;
    if a <= 0 {
        return Ok(1.0);
    }
    let first = (1.0 - w.left) / (1.0 - w.right);
    Ok(first * ratio_pow(w.right / w.left, (a - 1) as u64))
}

/// PMF of the walk maximum, by differencing [`three_way_max_tail`]. It has
/// the same law as the truncated-chain lead.
pub fn lead_equivalent_pmf(w: &ThreeWayWalk, eps: f64) -> Result<LeadPmf> {
    check_eps(eps)?;
    w.check()?;
    let mut masses = Vec::new();
    let mut tail = three_way_max_tail(w, 0)?;
    while tail > eps {
        if masses.len() >= DEFAULT_INDEX_CAP {
            return Err(Error::NonConvergence { cap: DEFAULT_INDEX_CAP, mass: 1.0 - tail });
        }
        let next = three_way_max_tail(w, masses.len() as i64 + 1)?;
        masses.push(tail - next);
        tail = next;
    }
    Ok(LeadPmf { pmf: Pmf::new(masses, tail), variant: LeadVariant::TruncatedLower })
}

/// `1 - F'_3(l)`: probability that the paired rigged walk ever closes a
/// deficit of `l + 1`.
pub fn two_step_catchup_tail(w: &PairedWalk, l: u64) -> Result<f64> {
    w.check()?;
    let r = w.ratio();
    if l % 2 == 1 {
        Ok(ratio_pow(r, l + 1))
    } else {
        let abar = w.single_honest;
        Ok(ratio_pow(r, l) * (1.0 - abar + abar * r * r))
    }
}

/// `F'_3(l) = P(M' <= l)`, where `M'` is the maximum adversarial advantage
/// of the paired walk.
pub fn two_step_catchup_cdf(w: &PairedWalk, l: u64) -> Result<f64> {
    Ok(1.0 - two_step_catchup_tail(w, l)?)
}

/// `P(N = n | M = m) = alpha * beta^{n-1}` for a two-way walk moving left
/// with probability `alpha`, where `N` counts visits to the maximum `M`.
pub fn max_hit_count_two_way(alpha: f64, n: u64) -> Result<f64> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("walk must drift left, got {alpha}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    Ok(alpha * ratio_pow(1.0 - alpha, n - 1))
}

/// `P(N = n | M = m)` for the three-way walk, where `N` counts moves from
/// `M - 1` up to `M`: geometric with success `alpha_0 / (alpha_0 + beta_1)`.
pub fn max_hit_count_three_way(w: &ThreeWayWalk, n: u64) -> Result<f64> {
    w.check()?;
    if n == 0 {
        return Ok(0.0);
    }
    let moving = w.left + w.right;
    Ok(w.left / moving * ratio_pow(w.right / moving, n - 1))
}

/// Walk laws for the given parameters, checked against their regimes.
pub fn walks(d: &DerivedParams) -> (Result<ThreeWayWalk>, Result<PairedWalk>) {
    let r = RegimeReport::evaluate(d);
    let three = r.require(Condition::ThreeWayDrift).map(|_| ThreeWayWalk::from_derived(d));
    let paired = r.require(Condition::TwoStepDrift).map(|_| PairedWalk::from_derived(d));
    (three, paired)
}
