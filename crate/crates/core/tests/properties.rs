use nakamoto_bounds::bounds::{lower_bound_direct, upper_bound_direct};
use nakamoto_bounds::confirmation::{conf_pmf, conf_pmf_lower, conf_pmf_upper};
use nakamoto_bounds::lead::{lead_full_lower, lead_rigged_upper, lead_truncated_lower};
use nakamoto_bounds::{lower_bound, upper_bound, BoundOptions, ConfVariant, LeadVariant, PmfVariant, ProtocolParams};
use proptest::prelude::*;

const EPS: f64 = 1e-12;

fn point() -> impl Strategy<Value = ProtocolParams> {
    (0.55f64..0.99, 0.0f64..0.3, 1u32..16)
        .prop_map(|(alpha, delta, k)| ProtocolParams::new(1.0, delta, alpha, k).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmfs_normalize(p in point()) {
        let d = p.derive();
        let mut totals = vec![
            conf_pmf_lower(&d, p.k(), EPS).unwrap().pmf.total(),
            conf_pmf_upper(&d, p.k(), EPS).unwrap().pmf.total(),
        ];
        totals.extend(lead_truncated_lower(&d, EPS).ok().map(|l| l.pmf.total()));
        totals.extend(lead_full_lower(&d, EPS).ok().map(|l| l.pmf.total()));
        totals.extend(lead_rigged_upper(&d, EPS).ok().map(|l| l.pmf.total()));
        for t in totals {
            prop_assert!((t - 1.0).abs() <= 1e-12, "total {}", t);
        }
    }

    #[test]
    fn upper_dominates_lower(p in point()) {
        let opts = BoundOptions::default();
        if let (Ok(l), Ok(u)) = (lower_bound(&p, &opts), upper_bound(&p, &opts)) {
            prop_assert!(l.value <= u.value);
            let full = lower_bound(&p, &BoundOptions { lead_variant: LeadVariant::FullLower, ..opts }).unwrap();
            prop_assert!(l.value <= full.value + 1e-15);
            prop_assert!(full.value <= u.value);
        }
    }

    #[test]
    fn bounds_decrease_with_depth(p in point()) {
        let deeper = p.with_k(p.k() + 1).unwrap();
        let opts = BoundOptions::default();
        if let (Ok(a), Ok(b)) = (lower_bound(&p, &opts), lower_bound(&deeper, &opts)) {
            prop_assert!(b.value <= a.value);
        }
        if let (Ok(a), Ok(b)) = (upper_bound(&p, &opts), upper_bound(&deeper, &opts)) {
            prop_assert!(b.value <= a.value);
        }
    }

    #[test]
    fn eps_stability(p in point()) {
        let coarse = BoundOptions { eps: 1e-10, ..BoundOptions::default() };
        let fine = BoundOptions { eps: 1e-14, ..BoundOptions::default() };
        if let (Ok(a), Ok(b)) = (lower_bound(&p, &coarse), lower_bound(&p, &fine)) {
            prop_assert!((a.value - b.value).abs() <= 1e-9);
        }
        if let (Ok(a), Ok(b)) = (upper_bound(&p, &coarse), upper_bound(&p, &fine)) {
            prop_assert!((a.value - b.value).abs() <= 1e-9);
        }
    }

    #[test]
    fn complement_matches_direct(p in point()) {
        let opts = BoundOptions::default();
        if let (Ok(a), Ok(b)) = (lower_bound(&p, &opts), lower_bound_direct(&p, &opts)) {
            prop_assert!((a.value - b).abs() <= 1e-10);
        }
        if let (Ok(a), Ok(b)) = (upper_bound(&p, &opts), upper_bound_direct(&p, &opts)) {
            prop_assert!((a.value - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn pmf_routes_agree(p in point()) {
        let d = p.derive();
        for v in [ConfVariant::LowerS, ConfVariant::UpperS] {
            let a = conf_pmf(&d, p.k(), EPS, v, PmfVariant::Printed).unwrap().pmf;
            let b = conf_pmf(&d, p.k(), EPS, v, PmfVariant::Composition).unwrap().pmf;
            for i in 0..a.len().max(b.len()) {
                prop_assert!((a.mass(i) - b.mass(i)).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn lower_bound_decreases_with_honest_share() {
    let opts = BoundOptions::default();
    let mut prev = 1.0;
    for a in 52..=99 {
        let p = ProtocolParams::bitcoin(a as f64 / 100.0, 6).unwrap();
        let v = lower_bound(&p, &opts).unwrap().value;
        assert!(v <= prev, "alpha={a}");
        prev = v;
    }
}
