//! Monte Carlo simulation of the delay attack and of the rigged model.
//!
//! Blocks arrive as a Poisson process of rate `lambda`; each is honest with
//! probability `alpha`. The simulator works on the renewal decomposition: a
//! mining event is either an adversarial block or an honest jumper together
//! with its delay window, whose arrivals are generated from exponential
//! inter-arrival times. Under the delay attack only adversarial blocks in the
//! window count; under the rigged model every block in it is credited to the
//! adversary. [`simulate_lead_timeline`] runs the lead process on an absolute
//! clock instead and checks the decomposition itself.
//!
//! Every trial draws from its own ChaCha stream selected by the trial index,
//! and per-batch accumulators hold only integers, so reports are identical
//! whatever the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{DerivedParams, ProtocolParams};
use crate::postconf::{PairedWalk, ThreeWayWalk};

const BATCH: u64 = 4096;
/// A losing walk is abandoned once the chance of ever recovering drops below
/// this.
const ABANDON_PROBABILITY: f64 = 1e-13;
/// Largest tolerated share of horizon-truncated trials, relative to the
/// estimate itself.
const MAX_TRUNCATED_SHARE: f64 = 1e-3;

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_WARMUP: u64 = 10_000;
pub const DEFAULT_HORIZON: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    /// Every honest block is published exactly `delta` late.
    PrivateAttackDelta,
    /// Honest blocks inside a jumper's delay window count for the adversary.
    RiggedModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: ProtocolParams,
    pub trials: u64,
    /// Mining events run before the lead is read.
    pub warmup_blocks: u64,
    pub seed: u64,
    pub mode: SimMode,
    /// Step cap for post-confirmation walks.
    pub horizon: u64,
}

impl SimConfig {
    pub fn new(params: ProtocolParams, mode: SimMode) -> Self {
        Self { params, trials: DEFAULT_TRIALS, warmup_blocks: DEFAULT_WARMUP, seed: 0, mode, horizon: DEFAULT_HORIZON }
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn warmup(mut self, warmup_blocks: u64) -> Self {
        self.warmup_blocks = warmup_blocks;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "at least one trial is required"));
        }
        if self.warmup_blocks == 0 {
            return Err(Error::invalid("warmup_blocks", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        Ok(())
    }
}

/// Integer histogram over non-negative outcomes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn record(&mut self, value: u64) {
        let i = value as usize;
        if i >= self.counts.len() {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += 1;
    }

    pub fn merge(mut self, other: Histogram) -> Histogram {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts.get(i).copied().unwrap_or(0)
    }

    pub fn trials(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical probability of outcome `i`.
    pub fn freq(&self, i: usize) -> f64 {
        self.count(i) as f64 / self.trials() as f64
    }

    /// Empirical probability of outcomes `>= i`.
    pub fn freq_at_least(&self, i: usize) -> f64 {
        let n: u64 = self.counts.iter().skip(i).sum();
        n as f64 / self.trials() as f64
    }

    /// Standard error of a bin whose true probability is `p`.
    pub fn stderr_for(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials() as f64).sqrt()
    }
}

/// Bernoulli frequency estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    /// Trials stopped by the horizon before resolving; counted as failures.
    pub truncated: u64,
}

impl Estimate {
    fn merge(self, o: Estimate) -> Estimate {
        Estimate {
            successes: self.successes + o.successes,
            trials: self.trials + o.trials,
            truncated: self.truncated + o.truncated,
        }
    }

    fn record(&mut self, outcome: Outcome) {
        self.trials += 1;
        match outcome {
            Outcome::Win => self.successes += 1,
            Outcome::Loss => {}
            Outcome::Truncated => self.truncated += 1,
        }
    }

    pub fn freq(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of [`Estimate::freq`].
    pub fn stderr(&self) -> f64 {
        let p = self.freq();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    fn check_horizon(self) -> Result<Self> {
        if self.truncated > 0 && self.truncated as f64 > MAX_TRUNCATED_SHARE * self.successes as f64 {
            Err(Error::HorizonTooSmall { truncated: self.truncated, trials: self.trials })
        } else {
            Ok(self)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SimReport {
    pub lead_hist: Histogram,
    pub conf_count_hist: Histogram,
    pub discard: Estimate,
}

impl SimReport {
    fn merge(self, o: SimReport) -> SimReport {
        SimReport {
            lead_hist: self.lead_hist.merge(o.lead_hist),
            conf_count_hist: self.conf_count_hist.merge(o.conf_count_hist),
            discard: self.discard.merge(o.discard),
        }
    }

    pub fn discard_freq(&self) -> f64 {
        self.discard.freq()
    }

    pub fn stderr(&self) -> f64 {
        self.discard.stderr()
    }

    pub fn truncated_trials(&self) -> u64 {
        self.discard.truncated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Win,
    Loss,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Adversarial,
    /// Honest jumper with the number of blocks credited to the adversary
    /// inside its delay window.
    Jumper {
        window: u64,
    },
}

/// Block arrival primitives for one parameter point and mode.
struct Arrivals {
    alpha: f64,
    delta: f64,
    gap: Exp<f64>,
    rigged: bool,
}

impl Arrivals {
    fn new(cfg: &SimConfig) -> Self {
        let p = &cfg.params;
        Self {
            alpha: p.alpha(),
            delta: p.delta(),
            gap: Exp::new(p.lambda()).expect("lambda validated positive"),
            rigged: cfg.mode == SimMode::RiggedModel,
        }
    }

    fn gap(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.gap.sample(rng)
    }

    fn honest(&self, rng: &mut ChaCha8Rng) -> bool {
        rng.random::<f64>() < self.alpha
    }

    /// Blocks credited to the adversary during one delay window.
    fn window(&self, rng: &mut ChaCha8Rng) -> u64 {
        let mut t = self.gap(rng);
        let mut n = 0;
        while t < self.delta {
            if self.rigged || !self.honest(rng) {
                n += 1;
            }
            t += self.gap(rng);
        }
        n
    }

    fn event(&self, rng: &mut ChaCha8Rng) -> Event {
        if self.honest(rng) {
            Event::Jumper { window: self.window(rng) }
        } else {
            Event::Adversarial
        }
    }

    fn lead(&self, rng: &mut ChaCha8Rng, events: u64) -> u64 {
        let mut lead = 0u64;
        for _ in 0..events {
            lead = match self.event(rng) {
                Event::Adversarial => lead + 1,
                Event::Jumper { window } => lead.saturating_sub(1) + window,
            };
        }
        lead
    }

    /// Blocks credited to the adversary between two jumper publications.
    fn jumper_interval(&self, rng: &mut ChaCha8Rng) -> u64 {
        let mut c = 0;
        loop {
            match self.event(rng) {
                Event::Adversarial => c += 1,
                Event::Jumper { window } => return c + window,
            }
        }
    }

    fn confirmation(&self, rng: &mut ChaCha8Rng, k: u32) -> u64 {
        (0..k).map(|_| self.jumper_interval(rng)).sum()
    }
}

/// Walk abandonment distance: levels below the target from which recovery
/// is less likely than [`ABANDON_PROBABILITY`].
fn abandon_gap(ratio: f64) -> i64 {
    if ratio <= 0.0 {
        2
    } else if ratio >= 1.0 {
        i64::MAX
    } else {
        (ABANDON_PROBABILITY.ln() / ratio.ln()).ceil() as i64 + 2
    }
}

struct Race {
    arrivals: Arrivals,
    gap: i64,
    horizon: u64,
}

impl Race {
    fn new(cfg: &SimConfig, d: &DerivedParams) -> Self {
        let ratio = match cfg.mode {
            SimMode::PrivateAttackDelta => {
                let w = ThreeWayWalk::from_derived(d);
                w.right / w.left
            }
            SimMode::RiggedModel => PairedWalk::from_derived(d).ratio(),
        };
        Self { arrivals: Arrivals::new(cfg), gap: abandon_gap(ratio), horizon: cfg.horizon }
    }

    fn run(&self, rng: &mut ChaCha8Rng, deficit: i64) -> Outcome {
        if deficit <= 0 {
            return Outcome::Win;
        }
        if self.arrivals.rigged {
            self.paired(rng, deficit)
        } else {
            self.three_way(rng, deficit)
        }
    }

    /// Delay-attack walk: at most two adversarial blocks per window matter,
    /// and a tie step at `deficit - 1` wins.
    fn three_way(&self, rng: &mut ChaCha8Rng, deficit: i64) -> Outcome {
        let mut pos = 0i64;
        for _ in 0..self.horizon {
            let step = match self.arrivals.event(rng) {
                Event::Adversarial => 1,
                Event::Jumper { window: 0 } => -1,
                Event::Jumper { window: 1 } => 0,
                Event::Jumper { .. } => 1,
            };
            if pos + step + i64::from(step == 0) >= deficit {
                return Outcome::Win;
            }
            pos += step;
            if deficit - pos >= self.gap {
                return Outcome::Loss;
            }
        }
        Outcome::Truncated
    }

    /// Rigged walk over pairs of arrivals. Each pair starts at a renewal
    /// point; an honest arrival grows the honest chain only if it is at
    /// least `delta` clear of the preceding honest growth or group start.
    fn paired(&self, rng: &mut ChaCha8Rng, mut deficit: i64) -> Outcome {
        let a = &self.arrivals;
        if deficit % 2 == 1 {
            let t = a.gap(rng);
            if a.honest(rng) && t > a.delta {
                deficit += 1;
            } else {
                deficit -= 1;
            }
            if deficit <= 0 {
                return Outcome::Win;
            }
        }
        let mut pos = 0i64;
        for _ in 0..self.horizon {
            let t1 = a.gap(rng);
            let h1 = a.honest(rng);
            let t2 = t1 + a.gap(rng);
            let h2 = a.honest(rng);
            let first = h1 && t1 > a.delta;
            let second = if first {
                h2 && t2 - t1 > a.delta
            } else if t1 > a.delta {
                h2
            } else {
                h2 && t2 > a.delta
            };
            let honest = i64::from(first) + i64::from(second);
            pos += 2 - 2 * honest;
            if pos >= deficit {
                return Outcome::Win;
            }
            if deficit - pos >= self.gap {
                return Outcome::Loss;
            }
        }
        Outcome::Truncated
    }
}

/// Runs `trial` for every trial index in fixed batches and merges the
/// per-batch accumulators.
fn run_trials<A, I, F, M>(cfg: &SimConfig, init: I, trial: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut ChaCha8Rng, &mut A) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let batches = cfg.trials.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            for t in b * BATCH..((b + 1) * BATCH).min(cfg.trials) {
                let mut rng = base.clone();
                rng.set_stream(t);
                trial(&mut rng, &mut acc);
            }
            acc
        })
        .reduce(&init, &merge)
}

/// Empirical steady-state lead after `warmup_blocks` mining events.
pub fn simulate_lead(cfg: &SimConfig) -> Result<Histogram> {
    cfg.validate()?;
    let arrivals = Arrivals::new(cfg);
    Ok(run_trials(cfg, Histogram::default, |rng, h| h.record(arrivals.lead(rng, cfg.warmup_blocks)), Histogram::merge))
}

/// Reference lead simulation on an absolute clock: honest heights grow only
/// with jumpers (honest blocks at least `delta` after the previous jumper),
/// the adversary extends its private chain and adopts the honest tip
/// whenever it falls behind. The lead is read after the last window of the
/// `warmup_blocks`-th mining event has closed.
pub fn simulate_lead_timeline(cfg: &SimConfig) -> Result<Histogram> {
    cfg.validate()?;
    let a = Arrivals::new(cfg);
    Ok(run_trials(
        cfg,
        Histogram::default,
        |rng, h| {
            let (mut honest_height, mut adv_height) = (0u64, 0u64);
            let mut t = 0.0;
            // The genesis block is the zeroth jumper.
            let mut window_end = a.delta;
            let mut events = 0;
            loop {
                t += a.gap(rng);
                if events == cfg.warmup_blocks && t >= window_end {
                    break;
                }
                let honest = a.honest(rng);
                if t < window_end {
                    if !honest || a.rigged {
                        adv_height += 1;
                    }
                } else {
                    if honest {
                        honest_height += 1;
                        adv_height = adv_height.max(honest_height);
                        window_end = t + a.delta;
                    } else {
                        adv_height += 1;
                    }
                    events += 1;
                }
            }
            h.record(adv_height - honest_height);
        },
        Histogram::merge,
    ))
}

/// Empirical count of blocks credited to the adversary over `k` jumper
/// intervals.
pub fn simulate_confirmation(cfg: &SimConfig, k: u32) -> Result<Histogram> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::invalid("k", "confirmation depth must be at least 1"));
    }
    let arrivals = Arrivals::new(cfg);
    Ok(run_trials(cfg, Histogram::default, |rng, h| h.record(arrivals.confirmation(rng, k)), Histogram::merge))
}

/// Frequency with which the post-confirmation race closes `deficit`.
pub fn simulate_postconf(cfg: &SimConfig, deficit: u64) -> Result<Estimate> {
    cfg.validate()?;
    if deficit == 0 {
        return Err(Error::invalid("deficit", "must be at least 1"));
    }
    let race = Race::new(cfg, &cfg.params.derive());
    run_trials(cfg, Estimate::default, |rng, e| e.record(race.run(rng, deficit as i64)), Estimate::merge)
        .check_horizon()
}

/// Full attack per trial: steady-state lead, confirmation count, then the
/// post-confirmation race for whatever deficit is left.
pub fn simulate_end_to_end(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let race = Race::new(cfg, &cfg.params.derive());
    let k = cfg.params.k();
    let report = run_trials(
        cfg,
        SimReport::default,
        |rng, r| {
            let lead = race.arrivals.lead(rng, cfg.warmup_blocks);
            let count = race.arrivals.confirmation(rng, k);
            r.lead_hist.record(lead);
            r.conf_count_hist.record(count);
            let deficit = k as i64 - (lead + count) as i64;
            r.discard.record(race.run(rng, deficit));
        },
        SimReport::merge,
    );
    report.discard.check_horizon()?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, Default)]
struct LagSums {
    pairs: u128,
    x: u128,
    y: u128,
    xx: u128,
    yy: u128,
    xy: u128,
}

impl LagSums {
    fn merge(self, o: LagSums) -> LagSums {
        LagSums {
            pairs: self.pairs + o.pairs,
            x: self.x + o.x,
            y: self.y + o.y,
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            xy: self.xy + o.xy,
        }
    }
}

/// Lag-1 sample correlation of consecutive per-jumper counts within a trial
/// of `k` jumpers, pooled over trials, with its approximate standard error
/// under independence.
pub fn jumper_count_lag1(cfg: &SimConfig, k: u32) -> Result<(f64, f64)> {
    cfg.validate()?;
    if k < 2 {
        return Err(Error::invalid("k", "need at least two jumpers per trial"));
    }
    let arrivals = Arrivals::new(cfg);
    let s = run_trials(
        cfg,
        LagSums::default,
        |rng, s| {
            let mut prev = arrivals.jumper_interval(rng) as u128;
            for _ in 1..k {
                let cur = arrivals.jumper_interval(rng) as u128;
                s.pairs += 1;
                s.x += prev;
                s.y += cur;
                s.xx += prev * prev;
                s.yy += cur * cur;
                s.xy += prev * cur;
                prev = cur;
            }
        },
        LagSums::merge,
    );
    let n = s.pairs as f64;
    let cov = s.xy as f64 / n - (s.x as f64 / n) * (s.y as f64 / n);
    let vx = s.xx as f64 / n - (s.x as f64 / n).powi(2);
    let vy = s.yy as f64 / n - (s.y as f64 / n).powi(2);
    Ok((cov / (vx * vy).sqrt(), 1.0 / n.sqrt()))
}
