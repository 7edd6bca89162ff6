//! Truncated probability mass functions on the non-negative integers.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest index any sequentially generated PMF may reach.
pub const DEFAULT_INDEX_CAP: usize = 10_000;

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("eps", format!("must lie in (0, 1), got {eps}")))
    }
}

/// Masses for `0..len` plus the probability of everything beyond.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    masses: Vec<f64>,
    tail_mass: f64,
}

impl Pmf {
    pub fn new(masses: Vec<f64>, tail_mass: f64) -> Self {
        Self { masses, tail_mass }
    }

    pub fn point_mass(at: usize) -> Self {
        let mut masses = vec![0.0; at + 1];
        masses[at] = 1.0;
        Self::new(masses, 0.0)
    }

    /// Generates masses in order until the cumulative mass reaches `1 - eps`.
    /// The residual is recorded as the tail.
    pub fn from_sequence<F>(eps: f64, cap: usize, mut mass_at: F) -> Result<Self>
    where
        F: FnMut(usize) -> f64,
    {
        let mut masses = Vec::new();
        let mut cum = 0.0;
        for i in 0..cap {
            let m = mass_at(i);
            masses.push(m);
            cum += m;
            if 1.0 - cum <= eps {
                return Ok(Self::new(masses, (1.0 - cum).max(0.0)));
            }
        }
        Err(Error::NonConvergence { cap, mass: cum })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Mass at `i`; zero past the materialized support.
    pub fn mass(&self, i: usize) -> f64 {
        self.masses.get(i).copied().unwrap_or(0.0)
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Materialized mass plus tail, which should be 1.
    pub fn total(&self) -> f64 {
        sum_ascending(self.masses.iter().copied()) + self.tail_mass
    }

    /// `P(X <= i)` over materialized masses.
    pub fn cdf(&self, i: usize) -> f64 {
        let end = (i + 1).min(self.masses.len());
        sum_ascending(self.masses[..end].iter().copied())
    }

    /// `P(X >= a)`, including the tail mass.
    pub fn sf(&self, a: usize) -> f64 {
        let start = a.min(self.masses.len());
        sum_ascending(self.masses[start..].iter().copied()) + self.tail_mass
    }

    /// Mean of the materialized part.
    pub fn mean(&self) -> f64 {
        sum_ascending(self.masses.iter().enumerate().map(|(i, m)| i as f64 * m))
    }

    /// Distribution of the sum of independent draws. Tail masses combine as
    /// the probability that either draw lands in its tail.
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        let masses = convolve(&self.masses, &other.masses, usize::MAX);
        let tail = 1.0 - (1.0 - self.tail_mass) * (1.0 - other.tail_mass);
        Pmf::new(masses, tail)
    }
}

/// Discrete convolution truncated to `max_len` entries.
pub fn convolve(a: &[f64], b: &[f64], max_len: usize) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = (a.len() + b.len() - 1).min(max_len);
    let mut out = Vec::with_capacity(len);
    let mut terms = Vec::new();
    for n in 0..len {
        terms.clear();
        let lo = n.saturating_sub(b.len() - 1);
        let hi = n.min(a.len() - 1);
        for i in lo..=hi {
            terms.push(a[i] * b[n - i]);
        }
        out.push(sum_sorted(&mut terms));
    }
    out
}

/// Sums non-negative terms smallest first.
pub(crate) fn sum_ascending<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut v: Vec<f64> = terms.into_iter().collect();
    sum_sorted(&mut v)
}

fn sum_sorted(v: &mut [f64]) -> f64 {
    v.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    v.iter().sum()
}
