//! The simulator against itself and against the analytic walk laws.

use nakamoto_bounds::postconf::{max_hit_count_three_way, max_hit_count_two_way, three_way_max_tail};
use nakamoto_bounds::sim::{
    jumper_count_lag1, simulate_confirmation, simulate_end_to_end, simulate_lead, simulate_lead_timeline,
    simulate_postconf, SimConfig, SimMode,
};
use nakamoto_bounds::{lower_bound, upper_bound, BoundOptions, ProtocolParams, ThreeWayWalk};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(p: ProtocolParams, mode: SimMode, trials: u64, seed: u64) -> SimConfig {
    SimConfig::new(p, mode).trials(trials).warmup(64).seed(seed)
}

#[test]
fn timeline_and_renewal_leads_agree() {
    for p in [ProtocolParams::bitcoin(0.75, 6).unwrap(), ProtocolParams::ethereum(0.75, 6).unwrap()] {
        for mode in [SimMode::PrivateAttackDelta, SimMode::RiggedModel] {
            let a = simulate_lead(&cfg(p, mode, 200_000, 1)).unwrap();
            let b = simulate_lead_timeline(&cfg(p, mode, 200_000, 2)).unwrap();
            let n = a.trials() as f64;
            for i in 0..6 {
                let (pa, pb) = (a.freq(i), b.freq(i));
                let pool = (pa + pb) / 2.0;
                let se = (2.0 * pool * (1.0 - pool) / n).sqrt();
                assert!((pa - pb).abs() <= 3.5 * se.max(1.0 / n), "{mode:?} bin {i}: {pa} vs {pb}");
            }
        }
    }
}

#[test]
fn jumper_counts_are_uncorrelated() {
    for mode in [SimMode::PrivateAttackDelta, SimMode::RiggedModel] {
        let c = cfg(ProtocolParams::ethereum(0.75, 6).unwrap(), mode, 100_000, 5);
        let (r, se) = jumper_count_lag1(&c, 6).unwrap();
        assert!(r.abs() <= 3.0 * se, "{mode:?}: r = {r}, se = {se}");
    }
}

/// Maximum of a walk with steps -1/0/+1 and the number of up-moves into it.
fn walk_max_hits(rng: &mut ChaCha8Rng, left: f64, stay: f64) -> (i64, u64) {
    let (mut pos, mut max, mut hits) = (0i64, 0i64, 0u64);
    while max - pos < 60 {
        let u: f64 = rng.random();
        let step = if u < left {
            -1
        } else if u < left + stay {
            0
        } else {
            1
        };
        pos += step;
        if pos > max {
            max = pos;
            hits = 1;
        } else if pos == max && step == 1 {
            hits += 1;
        }
    }
    (max, hits)
}

#[test]
fn hit_count_laws_match_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;

    // Two-way walk: visits to the maximum, the start included.
    let alpha = 0.7;
    let mut counts = [0u64; 4];
    for _ in 0..n {
        let (max, hits) = walk_max_hits(&mut rng, alpha, 0.0);
        let visits = hits + u64::from(max == 0);
        if visits <= 4 {
            counts[visits as usize - 1] += 1;
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        let p = max_hit_count_two_way(alpha, i as u64 + 1).unwrap();
        let f = c as f64 / n as f64;
        assert!((f - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt(), "two-way n={}: {f} vs {p}", i + 1);
    }

    // Three-way walk, given a positive maximum.
    let w = ThreeWayWalk { left: 0.55, stay: 0.15, right: 0.3 };
    let mut counts = [0u64; 4];
    let mut positive = 0u64;
    for _ in 0..n {
        let (max, hits) = walk_max_hits(&mut rng, w.left, w.stay);
        if max >= 1 {
            positive += 1;
            if hits <= 4 {
                counts[hits as usize - 1] += 1;
            }
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        let p = max_hit_count_three_way(&w, i as u64 + 1).unwrap();
        let f = c as f64 / positive as f64;
        assert!((f - p).abs() <= 3.0 * (p * (1.0 - p) / positive as f64).sqrt(), "three-way n={}: {f} vs {p}", i + 1);
    }
}

#[test]
fn estimates_stable_when_doubling_trials() {
    let p = ProtocolParams::bitcoin(0.75, 6).unwrap();
    for seed in 0..5 {
        let c = cfg(p, SimMode::PrivateAttackDelta, 50_000, seed);
        let a = simulate_postconf(&c, 2).unwrap();
        let b = simulate_postconf(&c.trials(100_000).seed(seed + 100), 2).unwrap();
        assert!((a.freq() - b.freq()).abs() <= 3.0 * a.stderr().hypot(b.stderr()), "seed {seed}");

        let ha = simulate_confirmation(&c, 6).unwrap();
        let hb = simulate_confirmation(&c.trials(100_000).seed(seed + 100), 6).unwrap();
        for i in 0..4 {
            let (fa, fb) = (ha.freq(i), hb.freq(i));
            let se = ha.stderr_for(fa).hypot(hb.stderr_for(fb));
            assert!((fa - fb).abs() <= 3.0 * se, "seed {seed}, bin {i}");
        }
    }
}

#[test]
fn postconf_matches_walk_tail() {
    let p = ProtocolParams::bitcoin(0.9, 6).unwrap();
    let e = simulate_postconf(&cfg(p, SimMode::PrivateAttackDelta, 500_000, 3), 2).unwrap();
    let exact = three_way_max_tail(&ThreeWayWalk::from_derived(&p.derive()), 2).unwrap();
    assert!((e.freq() - exact).abs() <= 3.0 * (exact * (1.0 - exact) / e.trials as f64).sqrt());
}

#[test]
fn end_to_end_respects_the_bounds() {
    let opts = BoundOptions::default();
    for alpha in [0.75, 0.9] {
        let p = ProtocolParams::bitcoin(alpha, 6).unwrap();
        let lb = lower_bound(&p, &opts).unwrap().value;
        let ub = upper_bound(&p, &opts).unwrap().value;
        let lower = simulate_end_to_end(&cfg(p, SimMode::PrivateAttackDelta, 1_000_000, 21)).unwrap();
        let upper = simulate_end_to_end(&cfg(p, SimMode::RiggedModel, 1_000_000, 22)).unwrap();
        assert!(lower.discard_freq() >= lb - 3.0 * lower.stderr(), "alpha={alpha}");
        assert!(upper.discard_freq() <= ub + 3.0 * upper.stderr(), "alpha={alpha}");
        assert_eq!(lower.lead_hist.trials(), 1_000_000);
        assert_eq!(lower.conf_count_hist.trials(), 1_000_000);
        assert_eq!(lower.truncated_trials(), 0);
    }
}
