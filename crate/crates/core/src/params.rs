//! Protocol parameters and the quantities derived from them.

use serde::Serialize;

use crate::error::{Condition, Error, Result};

/// Poisson terms are dropped once they fall below this fraction of the
/// running sum.
const POISSON_REL_CUTOFF: f64 = 1e-18;
/// Hard cap on the number of Poisson terms kept.
const POISSON_MAX_INDEX: usize = 64;

/// Mining rate, network delay bound, honest fraction and confirmation depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    lambda: f64,
    delta: f64,
    alpha: f64,
    k: u32,
}

impl ProtocolParams {
    /// `lambda` in blocks per second, `delta` in seconds, `alpha` the honest
    /// fraction of mining power and `k` the confirmation depth.
    pub fn new(lambda: f64, delta: f64, alpha: f64, k: u32) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", format!("must be finite and > 0, got {lambda}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::invalid("delta", format!("must be finite and >= 0, got {delta}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        if k == 0 {
            return Err(Error::invalid("k", "confirmation depth must be at least 1"));
        }
        Ok(Self { lambda, delta, alpha, k })
    }

    /// Bitcoin-like setting: one block per 600 s, 10 s delay bound.
    pub fn bitcoin(alpha: f64, k: u32) -> Result<Self> {
        Self::new(1.0 / 600.0, 10.0, alpha, k)
    }

    /// Proof-of-work Ethereum setting: one block per 13 s, 2 s delay bound.
    pub fn ethereum(alpha: f64, k: u32) -> Result<Self> {
        Self::new(1.0 / 13.0, 2.0, alpha, k)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Expected number of arrivals in one delay window.
    pub fn lambda_delta(&self) -> f64 {
        self.lambda * self.delta
    }

    pub fn with_k(&self, k: u32) -> Result<Self> {
        Self::new(self.lambda, self.delta, self.alpha, k)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.lambda, self.delta, alpha, self.k)
    }

    pub fn derive(&self) -> DerivedParams {
        DerivedParams::new(*self)
    }

    pub fn check_regime(&self) -> RegimeReport {
        RegimeReport::evaluate(&self.derive())
    }
}

/// `scale * Poisson(mean)` masses, truncated by relative size.
fn scaled_poisson(scale: f64, mean: f64) -> Vec<f64> {
    let mut terms = Vec::with_capacity(8);
    let mut term = scale * (-mean).exp();
    let mut sum = term;
    terms.push(term);
    for i in 1..=POISSON_MAX_INDEX {
        term *= mean / i as f64;
        // Only stop past the mode, where terms are strictly decreasing.
        if i as f64 > mean && term < POISSON_REL_CUTOFF * sum {
            break;
        }
        terms.push(term);
        sum += term;
    }
    terms
}

fn suffix_sums(terms: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; terms.len() + 1];
    for i in (0..terms.len()).rev() {
        out[i] = out[i + 1] + terms[i];
    }
    out
}

/// Every derived quantity the bounds are written in.
///
/// `alpha_i` is the probability that the next mining event is an honest block
/// followed by exactly `i` adversarial blocks within its delay window; the
/// barred sequence counts every arrival in the window instead.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    params: ProtocolParams,
    alpha_seq: Vec<f64>,
    alpha_tail: Vec<f64>,
    abar_seq: Vec<f64>,
    abar_tail: Vec<f64>,
}

impl DerivedParams {
    pub fn new(params: ProtocolParams) -> Self {
        let x = params.lambda_delta();
        let alpha_seq = scaled_poisson(params.alpha(), params.beta() * x);
        let abar_seq = scaled_poisson(params.alpha(), x);
        let alpha_tail = suffix_sums(&alpha_seq);
        let abar_tail = suffix_sums(&abar_seq);
        Self { params, alpha_seq, alpha_tail, abar_seq, abar_tail }
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    pub fn beta(&self) -> f64 {
        self.params.beta()
    }

    pub fn lambda_delta(&self) -> f64 {
        self.params.lambda_delta()
    }

    /// `alpha * e^{-beta*lambda*delta} * (beta*lambda*delta)^i / i!`
    pub fn alpha_i(&self, i: usize) -> f64 {
        self.alpha_seq.get(i).copied().unwrap_or(0.0)
    }

    /// `alpha * e^{-lambda*delta} * (lambda*delta)^i / i!`
    pub fn abar_i(&self, i: usize) -> f64 {
        self.abar_seq.get(i).copied().unwrap_or(0.0)
    }

    /// Number of stored (non-negligible) `alpha_i` terms.
    pub fn alpha_support(&self) -> usize {
        self.alpha_seq.len()
    }

    pub fn abar_support(&self) -> usize {
        self.abar_seq.len()
    }

    pub fn alpha_0(&self) -> f64 {
        self.alpha_i(0)
    }

    pub fn alpha_1(&self) -> f64 {
        self.alpha_i(1)
    }

    /// `1 - alpha_0 - alpha_1`: an adversarial block, or an honest one with
    /// two or more adversarial arrivals in its window.
    pub fn beta_1(&self) -> f64 {
        1.0 - self.alpha_0() - self.alpha_1()
    }

    /// `alpha * e^{-lambda*delta}`, probability that an arrival is honest and
    /// isolated by at least the delay bound.
    pub fn abar(&self) -> f64 {
        self.abar_i(0)
    }

    /// Probability of a (1, 1) growth over a pair of rigged-model arrivals.
    pub fn rho(&self) -> f64 {
        let x = self.lambda_delta();
        let abar = self.abar();
        abar * (1.0 + x + self.beta() - abar)
    }

    /// `1 - abar^2 - rho`, probability of a (0, 2) pair.
    pub fn bbar_sq(&self) -> f64 {
        let abar = self.abar();
        1.0 - abar * abar - self.rho()
    }

    pub fn bbar(&self) -> f64 {
        self.bbar_sq().max(0.0).sqrt()
    }

    fn tail(tails: &[f64], i: usize) -> f64 {
        tails.get(i).copied().unwrap_or(0.0)
    }

    /// `sum_{j >= i} alpha_j + beta * [i <= 2]`
    pub fn a(&self, i: usize) -> f64 {
        Self::tail(&self.alpha_tail, i) + if i <= 2 { self.beta() } else { 0.0 }
    }

    /// `sum_{j >= i} alpha_j + beta * [i <= 1]`
    pub fn b(&self, i: usize) -> f64 {
        Self::tail(&self.alpha_tail, i) + if i <= 1 { self.beta() } else { 0.0 }
    }

    /// `sum_{j >= i} abar_j + beta * [i <= 2]`
    pub fn a_bar(&self, i: usize) -> f64 {
        Self::tail(&self.abar_tail, i) + if i <= 2 { self.beta() } else { 0.0 }
    }

    /// `sum_{j >= i} abar_j + beta * [i <= 1]`
    pub fn b_bar(&self, i: usize) -> f64 {
        Self::tail(&self.abar_tail, i) + if i <= 1 { self.beta() } else { 0.0 }
    }
}

/// Which of the regime conditions hold. This is data rather than an error so
/// callers can report exactly which bound is unavailable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeReport {
    pub ultimate_fault_tolerance: bool,
    pub rigged_fault_tolerance: bool,
    pub two_step_drift: bool,
    pub three_way_drift: bool,
}

impl RegimeReport {
    pub fn evaluate(d: &DerivedParams) -> Self {
        let beta = d.beta();
        let alpha = d.alpha();
        let x = d.lambda_delta();
        Self {
            ultimate_fault_tolerance: beta < (1.0 - beta) / (1.0 + (1.0 - beta) * x),
            rigged_fault_tolerance: 1.0 > 2.0 * beta + alpha * x,
            two_step_drift: d.bbar() < d.abar(),
            three_way_drift: d.beta_1() < d.alpha_0(),
        }
    }

    pub fn holds(&self, c: Condition) -> bool {
        match c {
            Condition::UltimateFaultTolerance => self.ultimate_fault_tolerance,
            Condition::RiggedFaultTolerance => self.rigged_fault_tolerance,
            Condition::TwoStepDrift => self.two_step_drift,
            Condition::ThreeWayDrift => self.three_way_drift,
        }
    }

    pub fn require(&self, c: Condition) -> Result<()> {
        if self.holds(c) {
            Ok(())
        } else {
            Err(Error::RegimeViolation(c))
        }
    }

    /// Conditions needed by the lower bound.
    pub fn lower_valid(&self) -> bool {
        self.ultimate_fault_tolerance && self.three_way_drift
    }

    /// Conditions needed by the upper bound.
    pub fn upper_valid(&self) -> bool {
        self.rigged_fault_tolerance && self.two_step_drift
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_params() {
        assert!(ProtocolParams::new(0.0, 1.0, 0.9, 1).is_err());
        assert!(ProtocolParams::new(1.0, -1.0, 0.9, 1).is_err());
        assert!(ProtocolParams::new(1.0, 1.0, 0.0, 1).is_err());
        assert!(ProtocolParams::new(1.0, 1.0, 1.1, 1).is_err());
        assert!(ProtocolParams::new(1.0, 1.0, 0.9, 0).is_err());
        assert!(ProtocolParams::new(f64::NAN, 1.0, 0.9, 1).is_err());
        assert!(ProtocolParams::new(1.0, 0.0, 1.0, 1).is_ok());
    }

    #[test]
    fn zero_delay_collapses_exponentials() {
        let d = ProtocolParams::new(0.01, 0.0, 0.75, 3).unwrap().derive();
        assert_eq!(d.alpha_0(), 0.75);
        assert_eq!(d.alpha_1(), 0.0);
        assert!((d.beta_1() - 0.25).abs() < 1e-15);
        assert_eq!(d.abar(), 0.75);
        assert!((d.bbar_sq() - 0.0625).abs() < 1e-14);
    }

    #[test]
    fn bitcoin_alpha_0_and_beta_1() {
        // Frozen from a 40-digit evaluation of the defining formulas.
        let d = ProtocolParams::bitcoin(0.9, 6).unwrap().derive();
        assert!((d.alpha_0() - 0.898501249305845).abs() < 1e-14, "{}", d.alpha_0());
        assert!((d.alpha_1() - 0.001497502082176).abs() < 1e-14, "{}", d.alpha_1());
        assert!((d.beta_1() - 0.100001248611979).abs() < 1e-14, "{}", d.beta_1());
    }

    #[test]
    fn ethereum_abar() {
        let d = ProtocolParams::ethereum(0.75, 10).unwrap().derive();
        let expected = 0.75 * (-2.0f64 / 13.0).exp();
        assert!((d.abar() - expected).abs() < 1e-15);
    }

    #[test]
    fn row_sum_identities() {
        for alpha in [0.6, 0.75, 0.9, 0.99] {
            let d = ProtocolParams::ethereum(alpha, 1).unwrap().derive();
            assert!((d.a(1) - (1.0 - d.alpha_0())).abs() < 1e-15);
            assert!((d.a_bar(1) - (1.0 - d.abar())).abs() < 1e-15);
            assert!((d.a(0) - 1.0).abs() < 1e-15);
            assert!((d.alpha_0() + d.alpha_1() + d.beta_1() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn regime_flags() {
        let r = ProtocolParams::bitcoin(0.9, 6).unwrap().check_regime();
        assert!(r.ultimate_fault_tolerance && r.rigged_fault_tolerance);
        assert!(r.two_step_drift && r.three_way_drift);

        let r = ProtocolParams::new(1.0, 0.0, 0.5, 1).unwrap().check_regime();
        assert!(!r.ultimate_fault_tolerance);
        assert!(!r.rigged_fault_tolerance);
        assert!(!r.three_way_drift);
        assert_eq!(r.require(Condition::ThreeWayDrift), Err(Error::RegimeViolation(Condition::ThreeWayDrift)));
    }

    #[test]
    fn ethereum_near_half_flags() {
        // lambda*delta = 2/13, alpha = 0.52: only the ultimate condition and
        // the three-way drift survive.
        let r = ProtocolParams::ethereum(0.52, 6).unwrap().check_regime();
        assert!(r.ultimate_fault_tolerance);
        assert!(!r.rigged_fault_tolerance);
        assert!(!r.two_step_drift);
        assert!(r.three_way_drift);
    }
}
