//! Steady-state distribution of the adversary's pre-mining lead.
//!
//! Three chains are covered. The truncated chain (at most two adversarial
//! arrivals per delay window, at most one when the lead is zero) has a
//! geometric closed form and lower-bounds the lead of the delay attack. The
//! full delay-attack chain and the rigged chain are skip-free to the left
//! (M/G/1 type) and are solved with Ramaswami's recursion from a known
//! probability of the empty state.

use serde::Serialize;

use crate::error::{Condition, Error, Result};
use crate::params::{DerivedParams, RegimeReport};
use crate::pmf::{check_eps, sum_ascending, Pmf, DEFAULT_INDEX_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadVariant {
    /// Truncated delay-attack chain, closed form.
    TruncatedLower,
    /// Full delay-attack chain.
    FullLower,
    /// Rigged chain, where honest blocks inside a delay window count for the
    /// adversary.
    RiggedUpper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeadPmf {
    pub pmf: Pmf,
    pub variant: LeadVariant,
}

/// Probability that the truncated-chain lead is at least `i`.
pub fn truncated_lead_sf(d: &DerivedParams, i: usize) -> f64 {
    if i == 0 {
        return 1.0;
    }
    let (a0, b1) = (d.alpha_0(), d.beta_1());
    let first = (1.0 - a0) / (1.0 - b1);
    if i == 1 {
        return first;
    }
    first * (b1 / a0).powi((i - 1) as i32)
}

pub fn lead_truncated_lower(d: &DerivedParams, eps: f64) -> Result<LeadPmf> {
    check_eps(eps)?;
    RegimeReport::evaluate(d).require(Condition::ThreeWayDrift)?;
    let (a0, b1) = (d.alpha_0(), d.beta_1());
    let pi0 = (a0 - b1) / (1.0 - b1);
    let pi1 = pi0 * (1.0 - a0) / a0;
    let ratio = b1 / a0;

    let mut masses = vec![pi0];
    let mut next = pi1;
    while truncated_lead_sf(d, masses.len()) > eps {
        if masses.len() >= DEFAULT_INDEX_CAP {
            let mass = sum_ascending(masses.iter().copied());
            return Err(Error::NonConvergence { cap: DEFAULT_INDEX_CAP, mass });
        }
        masses.push(next);
        next *= ratio;
    }
    let tail = truncated_lead_sf(d, masses.len());
    Ok(LeadPmf { pmf: Pmf::new(masses, tail), variant: LeadVariant::TruncatedLower })
}

/// Steady state of a skip-free-to-the-left chain given the empty-state
/// probability `pi0`:
///
/// `pi_i = (pi0 * b_i + sum_{j=1}^{i-1} pi_j * a_{i+1-j}) / (1 - a_1)`
///
/// `a` and `b` are the tail sums of the level-transition and boundary rows,
/// indexed from 0; entries past the end of the slices are zero. The recursion
/// stops once the accumulated mass reaches `1 - eps`.
pub fn ramaswami_steady_state(a: &[f64], b: &[f64], pi0: f64, eps: f64, cap: usize) -> Result<Pmf> {
    check_eps(eps)?;
    if !(pi0 > 0.0 && pi0 <= 1.0) {
        return Err(Error::invalid("pi0", format!("must lie in (0, 1], got {pi0}")));
    }
    let a1 = a.get(1).copied().unwrap_or(0.0);
    if a1 >= 1.0 {
        return Err(Error::invalid("a", "a_1 must be below 1"));
    }
    let at = |s: &[f64], i: usize| s.get(i).copied().unwrap_or(0.0);
    let denom = 1.0 - a1;

    let mut pi = vec![pi0];
    let mut cum = pi0;
    let mut terms = Vec::new();
    while 1.0 - cum > eps {
        let i = pi.len();
        if i >= cap {
            return Err(Error::NonConvergence { cap, mass: cum });
        }
        terms.clear();
        terms.push(pi0 * at(b, i));
        // a_{i+1-j} vanishes once i+1-j runs past the slice.
        let lo = (i + 1).saturating_sub(a.len()).max(1);
        terms.extend((lo..i).map(|j| pi[j] * at(a, i + 1 - j)));
        let p = sum_ascending(terms.iter().copied()) / denom;
        pi.push(p);
        cum += p;
    }
    Ok(Pmf::new(pi, (1.0 - cum).max(0.0)))
}

/// Lead of the full delay-attack chain.
pub fn lead_full_lower(d: &DerivedParams, eps: f64) -> Result<LeadPmf> {
    RegimeReport::evaluate(d).require(Condition::UltimateFaultTolerance)?;
    let (alpha, beta, x) = (d.alpha(), d.beta(), d.lambda_delta());
    let pi0 = (1.0 - beta * (2.0 + alpha * x)) / alpha;
    let n = d.alpha_support().max(3) + 1;
    let a: Vec<f64> = (0..n).map(|i| d.a(i)).collect();
    let b: Vec<f64> = (0..n).map(|i| d.b(i)).collect();
    let pmf = ramaswami_steady_state(&a, &b, pi0, eps, DEFAULT_INDEX_CAP)?;
    Ok(LeadPmf { pmf, variant: LeadVariant::FullLower })
}

/// Lead of the rigged chain; upper-bounds every attainable lead.
pub fn lead_rigged_upper(d: &DerivedParams, eps: f64) -> Result<LeadPmf> {
    RegimeReport::evaluate(d).require(Condition::RiggedFaultTolerance)?;
    let (alpha, beta, x) = (d.alpha(), d.beta(), d.lambda_delta());
    let pi0 = (1.0 - 2.0 * beta - alpha * x) / alpha;
    let n = d.abar_support().max(3) + 1;
    let a: Vec<f64> = (0..n).map(|i| d.a_bar(i)).collect();
    let b: Vec<f64> = (0..n).map(|i| d.b_bar(i)).collect();
    let pmf = ramaswami_steady_state(&a, &b, pi0, eps, DEFAULT_INDEX_CAP)?;
    Ok(LeadPmf { pmf, variant: LeadVariant::RiggedUpper })
}
