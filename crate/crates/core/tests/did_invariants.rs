use proptest::prelude::*;
use sdid_core::did::{four_means_did, twfe_did, DidOptions, TreatmentAssignment};

mod common;
use common::{add_to_outcomes, close, random_panel};

fn did(p: &sdid_core::Panel, a: &TreatmentAssignment) -> (f64, f64) {
    let e = twfe_did(p, a, &[], &DidOptions::default()).unwrap();
    (e.tau_hat, e.se)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn four_means_identity(seed in any::<u64>(), n_co in 1usize..8, n_tr in 1usize..4, t_pre in 2usize..12, t_post in 1usize..6) {
        let (p, a) = random_panel(seed, n_co, n_tr, t_pre, t_post, 0.05);
        let (tau, _) = did(&p, &a);
        prop_assert!((tau - four_means_did(&p, &a)).abs() <= 1e-10);
    }

    #[test]
    fn constant_and_time_shocks_absorbed(
        seed in any::<u64>(), n_co in 1usize..8, n_tr in 1usize..4, t_pre in 2usize..12, t_post in 1usize..6,
        c in -5.0f64..5.0,
        shocks in proptest::collection::vec(-1.0f64..1.0, 20),
    ) {
        let (p, a) = random_panel(seed, n_co, n_tr, t_pre, t_post, 0.05);
        let (tau, _) = did(&p, &a);
        let (tau_c, _) = did(&add_to_outcomes(&p, |_, _| c), &a);
        let (tau_t, _) = did(&add_to_outcomes(&p, |_, s| shocks[s]), &a);
        prop_assert!((tau - tau_c).abs() <= 1e-10);
        prop_assert!((tau - tau_t).abs() <= 1e-10);
    }

    #[test]
    fn unit_relabeling_is_irrelevant(seed in any::<u64>(), n_co in 2usize..8, n_tr in 1usize..4, t_pre in 3usize..10, t_post in 1usize..5, rot in 0usize..20) {
        let (p, a) = random_panel(seed, n_co, n_tr, t_pre, t_post, 0.05);
        let n = n_co + n_tr;
        let perm: Vec<usize> = (0..n).map(|k| (k + rot) % n).rev().collect();
        let q = p.select_units(&perm).unwrap();
        let treated: Vec<usize> = perm.iter().enumerate().filter(|(_, &i)| i >= n_co).map(|(k, _)| k).collect();
        let b = TreatmentAssignment::new(&q, treated, t_pre).unwrap();
        let (tau0, se0) = did(&p, &a);
        let (tau1, se1) = did(&q, &b);
        prop_assert!(close(tau0, tau1, 1e-12), "{tau0} {tau1}");
        prop_assert!(close(se0, se1, 1e-12), "{se0} {se1}");
    }
}
