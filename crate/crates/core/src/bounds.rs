//! Achievable and converse discard probabilities.
//!
//! The lower bound is `1 - sum_{i+j+l<k} P1(i) P2(j) P1(l)`, with `P1` the
//! lead (and walk-maximum) law and `P2` the confirmation count under the
//! delay attack. The upper bound is `1 - sum_{i+j<k} P1'(i) P2'(j) F3'(k-1-i-j)`
//! with the rigged-model lead, count and paired-walk CDF.
//!
//! Both are evaluated through their complements, as sums of the discard
//! probability over (lead, count) pairs, so small results keep their relative
//! precision. The textbook forms are kept as `*_direct` for cross-checking.

use rayon::prelude::*;
use serde::Serialize;

use crate::confirmation::{conf_pmf, ConfVariant, PmfVariant};
use crate::error::{Condition, Error, Result};
use crate::lead::{lead_full_lower, lead_rigged_upper, lead_truncated_lower, LeadPmf, LeadVariant};
use crate::params::{DerivedParams, ProtocolParams, RegimeReport};
use crate::pmf::{convolve, sum_ascending, Pmf};
use crate::postconf::{
    lead_equivalent_pmf, three_way_max_tail, two_step_catchup_cdf, two_step_catchup_tail, PairedWalk, ThreeWayWalk,
};
use crate::DEFAULT_EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    LowerT1,
    UpperT2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Lead used by the lower bound: `TruncatedLower` or `FullLower`.
    pub lead_variant: LeadVariant,
    pub pmf_variant: PmfVariant,
    pub eps: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { lead_variant: LeadVariant::TruncatedLower, pmf_variant: PmfVariant::Printed, eps: DEFAULT_EPS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    /// Probability mass the truncated distributions did not account for.
    pub truncation_error: f64,
    pub theorem: Theorem,
    pub lead_variant: LeadVariant,
    pub params: ProtocolParams,
}

fn lower_lead(d: &DerivedParams, opts: &BoundOptions) -> Result<LeadPmf> {
    match opts.lead_variant {
        LeadVariant::TruncatedLower => lead_truncated_lower(d, opts.eps),
        LeadVariant::FullLower => lead_full_lower(d, opts.eps),
        LeadVariant::RiggedUpper => Err(Error::invalid("lead_variant", "the lower bound needs a delay-attack lead")),
    }
}

/// Mass of all (lead, count) pairs lost to truncation.
fn pair_truncation(a: &Pmf, b: &Pmf) -> f64 {
    a.tail_mass() + b.tail_mass() - a.tail_mass() * b.tail_mass()
}

/// Sum over materialized (lead, count) pairs of their mass times the
/// probability of discarding from that pair.
fn pair_sum(lead: &Pmf, count: &Pmf, discard: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    let mut terms = Vec::with_capacity(lead.len() * count.len());
    for (i, &li) in lead.masses().iter().enumerate() {
        for (j, &sj) in count.masses().iter().enumerate() {
            terms.push(li * sj * discard(i + j)?);
        }
    }
    Ok(sum_ascending(terms))
}

/// Probability that a k-deep transaction is discarded under the delay
/// attack; truncated mass is left out, so the value never overstates it.
pub fn lower_bound(p: &ProtocolParams, opts: &BoundOptions) -> Result<BoundResult> {
    let d = p.derive();
    let regime = RegimeReport::evaluate(&d);
    regime.require(Condition::UltimateFaultTolerance)?;
    regime.require(Condition::ThreeWayDrift)?;

    let lead = lower_lead(&d, opts)?;
    let conf = conf_pmf(&d, p.k(), opts.eps, ConfVariant::LowerS, opts.pmf_variant)?;
    let walk = ThreeWayWalk::from_derived(&d);
    let k = p.k() as i64;

    let value = pair_sum(&lead.pmf, &conf.pmf, |n| three_way_max_tail(&walk, k - n as i64))?;
    Ok(BoundResult {
        value: value.clamp(0.0, 1.0),
        truncation_error: pair_truncation(&lead.pmf, &conf.pmf),
        theorem: Theorem::LowerT1,
        lead_variant: lead.variant,
        params: *p,
    })
}

/// Probability bound no attack can exceed, from the rigged model; truncated
/// mass is added, so the value never understates it.
pub fn upper_bound(p: &ProtocolParams, opts: &BoundOptions) -> Result<BoundResult> {
    let d = p.derive();
    let regime = RegimeReport::evaluate(&d);
    regime.require(Condition::RiggedFaultTolerance)?;
    regime.require(Condition::TwoStepDrift)?;

    let lead = lead_rigged_upper(&d, opts.eps)?;
    let conf = conf_pmf(&d, p.k(), opts.eps, ConfVariant::UpperS, opts.pmf_variant)?;
    let walk = PairedWalk::from_derived(&d);
    let k = p.k() as usize;

    let value = pair_sum(&lead.pmf, &conf.pmf, |n| {
        if n >= k {
            Ok(1.0)
        } else {
            two_step_catchup_tail(&walk, (k - 1 - n) as u64)
        }
    })?;
    let truncation_error = pair_truncation(&lead.pmf, &conf.pmf);
    Ok(BoundResult {
        value: (value + truncation_error).clamp(0.0, 1.0),
        truncation_error,
        theorem: Theorem::UpperT2,
        lead_variant: lead.variant,
        params: *p,
    })
}

/// `1 - sum_{i+j+l<k} P1(i) P2(j) P1(l)` evaluated as written.
pub fn lower_bound_direct(p: &ProtocolParams, opts: &BoundOptions) -> Result<f64> {
    let d = p.derive();
    let regime = RegimeReport::evaluate(&d);
    regime.require(Condition::UltimateFaultTolerance)?;
    regime.require(Condition::ThreeWayDrift)?;

    let k = p.k() as usize;
    let lead = lower_lead(&d, opts)?;
    let post = lead_equivalent_pmf(&ThreeWayWalk::from_derived(&d), opts.eps)?;
    let conf = conf_pmf(&d, p.k(), opts.eps, ConfVariant::LowerS, opts.pmf_variant)?;

    // Both lead-type factors are combined once; only indices below k matter.
    let leads = convolve(lead.pmf.masses(), post.pmf.masses(), k);
    let mut terms = Vec::new();
    for (m, &lm) in leads.iter().enumerate() {
        for j in 0..k - m {
            terms.push(lm * conf.pmf.mass(j));
        }
    }
    Ok(1.0 - sum_ascending(terms))
}

/// `1 - sum_{i+j<k} P1'(i) P2'(j) F3'(k-1-i-j)` evaluated as written.
pub fn upper_bound_direct(p: &ProtocolParams, opts: &BoundOptions) -> Result<f64> {
    let d = p.derive();
    let regime = RegimeReport::evaluate(&d);
    regime.require(Condition::RiggedFaultTolerance)?;
    regime.require(Condition::TwoStepDrift)?;

    let k = p.k() as usize;
    let lead = lead_rigged_upper(&d, opts.eps)?;
    let conf = conf_pmf(&d, p.k(), opts.eps, ConfVariant::UpperS, opts.pmf_variant)?;
    let walk = PairedWalk::from_derived(&d);
    let mut terms = Vec::new();
    for i in 0..k {
        for j in 0..k - i {
            terms.push(lead.pmf.mass(i) * conf.pmf.mass(j) * two_step_catchup_cdf(&walk, (k - 1 - i - j) as u64)?);
        }
    }
    Ok(1.0 - sum_ascending(terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Lower,
    Upper,
    Both,
}

impl Which {
    fn lower(self) -> bool {
        matches!(self, Which::Lower | Which::Both)
    }

    fn upper(self) -> bool {
        matches!(self, Which::Upper | Which::Both)
    }
}

/// The swept parameter; every other parameter comes from the base point.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    K(Vec<u32>),
    Alpha(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: ProtocolParams,
    pub regime: RegimeReport,
    /// `None` when not requested.
    pub lower: Option<Result<BoundResult>>,
    pub upper: Option<Result<BoundResult>>,
}

/// Evaluates the requested bounds at every point of the axis, in parallel,
/// preserving the axis order.
pub fn sweep(base: &ProtocolParams, axis: &SweepAxis, which: Which, opts: &BoundOptions) -> Result<Vec<SweepRow>> {
    let points: Vec<ProtocolParams> = match axis {
        SweepAxis::K(ks) => ks.iter().map(|&k| base.with_k(k)).collect::<Result<_>>()?,
        SweepAxis::Alpha(alphas) => alphas.iter().map(|&a| base.with_alpha(a)).collect::<Result<_>>()?,
    };
    Ok(points
        .par_iter()
        .map(|p| SweepRow {
            params: *p,
            regime: p.check_regime(),
            lower: which.lower().then(|| lower_bound(p, opts)),
            upper: which.upper().then(|| upper_bound(p, opts)),
        })
        .collect())
}
