use chrono::Days;
use proptest::prelude::*;
use sdid_core::panel_core::{
    build_panel, compute_log_returns, BuildOptions, GroupSelection, PriceSeries,
};
use sdid_core::RawRecord;

mod common;

fn records_from(
    prices: &[Vec<f64>],
    volumes: &[Vec<f64>],
    missing: &[Option<usize>],
    n_co: usize,
) -> Vec<RawRecord> {
    let mut out = Vec::new();
    for (i, (p, v)) in prices.iter().zip(volumes).enumerate() {
        for (s, (&price, &volume)) in p.iter().zip(v).enumerate() {
            if missing[i] == Some(s) {
                continue;
            }
            out.push(RawRecord {
                date: common::start() + Days::new(s as u64),
                asset_id: format!("a{i}"),
                price,
                volume,
                market_cap: 1e9,
                group: if i < n_co { "CO" } else { "TR" }.to_string(),
            });
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn returns_invariant_to_price_scaling(
        prices in proptest::collection::vec(1e-3f64..1e6, 2..60),
        c in 1e-3f64..1e3,
    ) {
        let dates: Vec<_> = (0..prices.len()).map(|s| common::start() + Days::new(s as u64)).collect();
        let scaled: Vec<f64> = prices.iter().map(|p| p * c).collect();
        let r0 = compute_log_returns(&PriceSeries { asset_id: "x", dates: &dates, prices: &prices }).unwrap();
        let r1 = compute_log_returns(&PriceSeries { asset_id: "x", dates: &dates, prices: &scaled }).unwrap();
        prop_assert_eq!(r0.len(), prices.len() - 1);
        for (a, b) in r0.iter().zip(&r1) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn build_is_idempotent_and_balanced(
        t in 4usize..20,
        n_co in 1usize..5,
        n_tr in 1usize..4,
        seed in proptest::collection::vec((0.5f64..2.0, 0u32..4, 0u32..8), 8),
    ) {
        let n = n_co + n_tr;
        let prices: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..t).map(|s| 100.0 * seed[i].0 * (1.0 + 0.01 * ((i * 7 + s * 3) % 11) as f64)).collect())
            .collect();
        // one illiquid day for assets with flag 0, one missing day for flag 1
        let volumes: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..t).map(|s| if seed[i].1 == 0 && s == (seed[i].2 as usize % t) { 10.0 } else { 1e6 }).collect())
            .collect();
        let missing: Vec<Option<usize>> = (0..n)
            .map(|i| (seed[i].1 == 1).then_some(seed[i].2 as usize % t))
            .collect();
        let records = records_from(&prices, &volumes, &missing, n_co);
        let groups = GroupSelection { treated: "TR".into(), control: "CO".into() };
        let opts = BuildOptions::default();
        match build_panel(&records, &groups, &opts) {
            Ok(first) => {
                let p = &first.panel;
                prop_assert_eq!(p.outcomes().shape(), (p.n_units(), p.n_periods()));
                prop_assert!(p.outcomes().as_slice().iter().all(|v| v.is_finite()));
                prop_assert_eq!(first.report.dropped.len() + p.n_units(), n);
                let kept: Vec<RawRecord> = records
                    .iter()
                    .filter(|r| first.retained_assets().contains(&r.asset_id))
                    .cloned()
                    .collect();
                let second = build_panel(&kept, &groups, &opts).unwrap();
                prop_assert_eq!(&second.panel, p);
                prop_assert!(second.report.dropped.is_empty());
            }
            Err(sdid_core::Error::EmptyGroup(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
