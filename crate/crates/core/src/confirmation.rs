//! Blocks the adversary gains while the target block is buried `k` deep.
//!
//! Between the publications of two consecutive jumpers the adversary collects
//! a geometric number of blocks before the next honest arrival, plus whatever
//! arrives inside that jumper's delay window: only adversarial blocks under
//! the delay attack, every block under the rigged model. The confirmation
//! count is the sum of `k` such independent per-jumper counts.
//!
//! Two evaluation routes are provided and must agree: the closed-form
//! Pascal-Poisson mixture, and a k-fold convolution of the per-jumper PMF.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::DerivedParams;
use crate::pmf::{check_eps, convolve, sum_ascending, Pmf, DEFAULT_INDEX_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfVariant {
    /// Adversarial blocks under the delay attack.
    LowerS,
    /// Adversarial and rigged blocks under the rigged model.
    UpperS,
}

/// How the confirmation-count PMF is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PmfVariant {
    /// Closed-form Pascal-Poisson mixture, evaluated as written.
    #[default]
    Printed,
    /// k-fold convolution of the per-jumper count, which is written as a
    /// geometric count composed with the Poisson window count.
    Composition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfPmf {
    pub pmf: Pmf,
    pub variant: ConfVariant,
    pub k: u32,
}

/// `e^{-mean} mean^j / j!` for `j = 0..=n`.
fn poisson_terms(mean: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut t = (-mean).exp();
    out.push(t);
    for j in 1..=n {
        t *= mean / j as f64;
        out.push(t);
    }
    out
}

/// `sum_{j<=n} x^j / j!`
fn exp_partial_sum(x: f64, n: usize) -> f64 {
    let mut t = 1.0;
    let mut terms = Vec::with_capacity(n + 1);
    terms.push(t);
    for j in 1..=n {
        t *= x / j as f64;
        terms.push(t);
    }
    sum_ascending(terms)
}

/// Per-jumper count under the delay attack, as a geometric number of
/// adversarial blocks before the jumper plus Poisson(`beta*lambda*delta`)
/// adversarial blocks in its window.
pub fn per_jumper_pmf_lower(d: &DerivedParams, c: usize) -> f64 {
    let beta = d.beta();
    let pois = poisson_terms(beta * d.lambda_delta(), c);
    let terms = (0..=c).map(|j| beta.powi((c - j) as i32) * pois[j]);
    d.alpha() * sum_ascending(terms)
}

/// `alpha * beta^c * e^{-beta*lambda*delta} * sum_{j<=c} (lambda*delta)^j / j!`
///
/// Algebraically the same as [`per_jumper_pmf_lower`]: `beta^{c-j}` times
/// `(beta*lambda*delta)^j` is `beta^c * (lambda*delta)^j`.
pub fn per_jumper_pmf_lower_printed(d: &DerivedParams, c: usize) -> f64 {
    let (alpha, beta, x) = (d.alpha(), d.beta(), d.lambda_delta());
    alpha * beta.powi(c as i32) * (-beta * x).exp() * exp_partial_sum(x, c)
}

/// Per-jumper count under the rigged model: geometric adversarial blocks
/// before the jumper plus Poisson(`lambda*delta`) arrivals of either kind in
/// its window.
pub fn per_jumper_pmf_upper(d: &DerivedParams, c: usize) -> f64 {
    let beta = d.beta();
    let pois = poisson_terms(d.lambda_delta(), c);
    let terms = (0..=c).map(|j| beta.powi((c - j) as i32) * pois[j]);
    d.alpha() * sum_ascending(terms)
}

/// `alpha * beta^c * e^{-lambda*delta} * sum_{j<=c} (lambda*delta/beta)^j / j!`,
/// falling back to the composition form when `beta == 0`.
pub fn per_jumper_pmf_upper_printed(d: &DerivedParams, c: usize) -> f64 {
    let (alpha, beta, x) = (d.alpha(), d.beta(), d.lambda_delta());
    if beta == 0.0 {
        return per_jumper_pmf_upper(d, c);
    }
    alpha * beta.powi(c as i32) * (-x).exp() * exp_partial_sum(x / beta, c)
}

/// `e * ln(base)`, with `0 * ln(0) = 0`.
fn ln_pow(base: f64, e: usize) -> f64 {
    if e == 0 {
        0.0
    } else if base == 0.0 {
        f64::NEG_INFINITY
    } else {
        e as f64 * base.ln()
    }
}

/// `ln C(n, r)`: multiplicative recurrence for small `n`, log-gamma otherwise.
fn ln_choose(n: usize, r: usize) -> f64 {
    if n <= 60 {
        let r = r.min(n - r);
        let mut c = 1.0f64;
        for i in 1..=r {
            c = c * (n - r + i) as f64 / i as f64;
        }
        c.ln()
    } else {
        ln_binomial(n as u64, r as u64)
    }
}

/// `exp(ln_prefactor) * sum_{n<=s} C(k-1+n, n) ratio^n mean^{s-n} / (s-n)!`
fn pascal_poisson_mass(k: u32, s: usize, ln_prefactor: f64, ratio: f64, mean: f64) -> f64 {
    let k = k as usize;
    let terms = (0..=s).map(|n| {
        let m = s - n;
        let ln_t =
            ln_prefactor + ln_choose(k - 1 + n, n) + ln_pow(ratio, n) + ln_pow(mean, m) - ln_gamma(m as f64 + 1.0);
        ln_t.exp()
    });
    sum_ascending(terms)
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::invalid("k", "confirmation depth must be at least 1"))
    } else {
        Ok(())
    }
}

/// `P(S = s) = alpha_0^k beta^s sum_{n<=s} C(k-1+n, n) (lambda*delta*k)^{s-n} / (s-n)!`
pub fn conf_mass_lower(d: &DerivedParams, k: u32, s: usize) -> f64 {
    let ln_pref = k as f64 * d.alpha_0().ln() + ln_pow(d.beta(), s);
    pascal_poisson_mass(k, s, ln_pref, 1.0, d.lambda_delta() * k as f64)
}

/// `P(S_bar = s) = abar_0^k sum_{n<=s} C(k-1+n, n) (lambda*delta*k)^{s-n} / (s-n)! beta^n`
pub fn conf_mass_upper(d: &DerivedParams, k: u32, s: usize) -> f64 {
    let ln_pref = k as f64 * d.abar().ln();
    pascal_poisson_mass(k, s, ln_pref, d.beta(), d.lambda_delta() * k as f64)
}

/// Closed-form PMF of the adversarial count over the confirmation interval.
pub fn conf_pmf_lower(d: &DerivedParams, k: u32, eps: f64) -> Result<ConfPmf> {
    check_k(k)?;
    check_eps(eps)?;
    let pmf = Pmf::from_sequence(eps, DEFAULT_INDEX_CAP, |s| conf_mass_lower(d, k, s))?;
    Ok(ConfPmf { pmf, variant: ConfVariant::LowerS, k })
}

/// Closed-form PMF of the adversarial-plus-rigged count.
pub fn conf_pmf_upper(d: &DerivedParams, k: u32, eps: f64) -> Result<ConfPmf> {
    check_k(k)?;
    check_eps(eps)?;
    let pmf = Pmf::from_sequence(eps, DEFAULT_INDEX_CAP, |s| conf_mass_upper(d, k, s))?;
    Ok(ConfPmf { pmf, variant: ConfVariant::UpperS, k })
}

fn self_convolve(base: &[f64], k: u32, len: usize) -> Vec<f64> {
    let mut result = vec![1.0];
    let mut power = base[..base.len().min(len)].to_vec();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = convolve(&result, &power, len);
        }
        e >>= 1;
        if e > 0 {
            power = convolve(&power, &power, len);
        }
    }
    result
}

/// The confirmation-count PMF as the k-fold convolution of the per-jumper
/// PMF (composition form). Entries below the working length are exact, so
/// the length is doubled until the mass reaches `1 - eps`.
pub fn conf_pmf_by_convolution(d: &DerivedParams, k: u32, eps: f64, variant: ConfVariant) -> Result<ConfPmf> {
    check_k(k)?;
    check_eps(eps)?;
    let per_jumper = |c| match variant {
        ConfVariant::LowerS => per_jumper_pmf_lower(d, c),
        ConfVariant::UpperS => per_jumper_pmf_upper(d, c),
    };
    let mut len = 32;
    loop {
        let base: Vec<f64> = (0..len).map(per_jumper).collect();
        let full = self_convolve(&base, k, len);
        let mut cum = 0.0;
        for (s, m) in full.iter().enumerate() {
            cum += m;
            if 1.0 - cum <= eps {
                let pmf = Pmf::new(full[..=s].to_vec(), (1.0 - cum).max(0.0));
                return Ok(ConfPmf { pmf, variant, k });
            }
        }
        if len >= DEFAULT_INDEX_CAP {
            return Err(Error::NonConvergence { cap: len, mass: cum });
        }
        len = (len * 2).min(DEFAULT_INDEX_CAP);
    }
}

/// Dispatches on the evaluation route.
pub fn conf_pmf(d: &DerivedParams, k: u32, eps: f64, variant: ConfVariant, route: PmfVariant) -> Result<ConfPmf> {
    match (route, variant) {
        (PmfVariant::Printed, ConfVariant::LowerS) => conf_pmf_lower(d, k, eps),
        (PmfVariant::Printed, ConfVariant::UpperS) => conf_pmf_upper(d, k, eps),
        (PmfVariant::Composition, v) => conf_pmf_by_convolution(d, k, eps, v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProtocolParams;

    fn bitcoin() -> DerivedParams {
        ProtocolParams::bitcoin(0.9, 6).unwrap().derive()
    }

    fn zero_delay(alpha: f64) -> DerivedParams {
        ProtocolParams::new(1.0, 0.0, alpha, 1).unwrap().derive()
    }

    #[test]
    fn per_jumper_zero_delay_is_geometric() {
        let d = zero_delay(0.75);
        for c in 0..10 {
            let geo = 0.75 * 0.25f64.powi(c as i32);
            assert!((per_jumper_pmf_lower(&d, c) - geo).abs() < 1e-16);
            assert!((per_jumper_pmf_lower_printed(&d, c) - geo).abs() < 1e-16);
            assert!((per_jumper_pmf_upper(&d, c) - geo).abs() < 1e-16);
            assert!((per_jumper_pmf_upper_printed(&d, c) - geo).abs() < 1e-16);
        }
    }

    #[test]
    fn per_jumper_at_zero_is_alpha_0() {
        let d = bitcoin();
        assert!((per_jumper_pmf_lower(&d, 0) - d.alpha_0()).abs() < 1e-16);
        assert!((per_jumper_pmf_upper(&d, 0) - d.abar()).abs() < 1e-16);
    }

    #[test]
    fn per_jumper_bitcoin_one() {
        let d = bitcoin();
        let (a, b, x) = (0.9, 0.1f64, 1.0 / 60.0);
        let expected = a * b * (-b * x).exp() * (1.0 + x);
        assert!((per_jumper_pmf_lower(&d, 1) - expected).abs() < 1e-16);
    }

    #[test]
    fn printed_and_composition_coincide() {
        for d in [bitcoin(), ProtocolParams::ethereum(0.75, 1).unwrap().derive()] {
            for c in 0..40 {
                let (x, y) = (per_jumper_pmf_lower(&d, c), per_jumper_pmf_lower_printed(&d, c));
                assert!((x - y).abs() <= 1e-14 * x.max(1e-300), "c={c} {x} {y}");
                let (x, y) = (per_jumper_pmf_upper(&d, c), per_jumper_pmf_upper_printed(&d, c));
                assert!((x - y).abs() <= 1e-14 * x.max(1e-300), "c={c} {x} {y}");
            }
        }
    }

    #[test]
    fn upper_no_adversary_limit() {
        // beta = 0: one rigged arrival in the window, nothing before it.
        let d = ProtocolParams::new(1.0 / 13.0, 2.0, 1.0, 1).unwrap().derive();
        assert!((per_jumper_pmf_upper_printed(&d, 1) - d.abar_i(1)).abs() < 1e-16);
    }

    #[test]
    fn per_jumper_normalizes() {
        let d = ProtocolParams::ethereum(0.75, 1).unwrap().derive();
        let lo: f64 = (0..200).map(|c| per_jumper_pmf_lower(&d, c)).sum();
        let hi: f64 = (0..200).map(|c| per_jumper_pmf_upper(&d, c)).sum();
        assert!((lo - 1.0).abs() < 1e-13);
        assert!((hi - 1.0).abs() < 1e-13);
    }

    #[test]
    fn zero_count_is_alpha_0_to_the_k() {
        let d = bitcoin();
        let s = conf_pmf_lower(&d, 6, 1e-12).unwrap();
        assert!((s.pmf.mass(0) - d.alpha_0().powi(6)).abs() < 1e-15);
        let s = conf_pmf_upper(&d, 6, 1e-12).unwrap();
        assert!((s.pmf.mass(0) - d.abar().powi(6)).abs() < 1e-15);
    }

    #[test]
    fn convolution_route_agrees() {
        let d = ProtocolParams::ethereum(0.75, 1).unwrap().derive();
        for k in [1, 2, 5, 9] {
            for v in [ConfVariant::LowerS, ConfVariant::UpperS] {
                let closed = conf_pmf(&d, k, 1e-12, v, PmfVariant::Printed).unwrap();
                let conv = conf_pmf(&d, k, 1e-12, v, PmfVariant::Composition).unwrap();
                for s in 0..closed.pmf.len().max(conv.pmf.len()) {
                    assert!((closed.pmf.mass(s) - conv.pmf.mass(s)).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn mean_is_k_times_per_jumper_mean() {
        let d = ProtocolParams::ethereum(0.75, 1).unwrap().derive();
        let (a, b, x) = (d.alpha(), d.beta(), d.lambda_delta());
        let s = conf_pmf_lower(&d, 8, 1e-15).unwrap();
        assert!((s.pmf.mean() - 8.0 * (b / a + b * x)).abs() < 1e-10);
        let s = conf_pmf_upper(&d, 8, 1e-15).unwrap();
        assert!((s.pmf.mean() - 8.0 * (b / a + x)).abs() < 1e-10);
    }

    #[test]
    fn large_binomial_uses_log_gamma() {
        let direct = ln_choose(60, 30);
        assert!((direct - ln_binomial(60, 30)).abs() < 1e-12);
        assert!((ln_choose(80, 5) - (24040016.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_depth() {
        assert!(conf_pmf_lower(&bitcoin(), 0, 1e-12).is_err());
        assert!(conf_pmf_by_convolution(&bitcoin(), 0, 1e-12, ConfVariant::UpperS).is_err());
    }
}
