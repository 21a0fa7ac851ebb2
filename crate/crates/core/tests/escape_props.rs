use escape_atlas::efun::{eval, FunctionSpec};
use escape_atlas::escape::{
    build_interval_chain, classify_grid, classify_point, construct_fast_orbit, ChainMode, ClassifierConfig,
    Containment, Verdict, Window, BRANCH_K,
};
use escape_atlas::xnum::TowerReal;
use num_complex::Complex64;
use proptest::prelude::*;

fn fixtures() -> Vec<(FunctionSpec, Complex64)> {
    vec![
        (FunctionSpec::exp(), Complex64::new(1.0, 0.0)),
        (FunctionSpec::exp(), Complex64::new(0.3, 0.0)),
        (FunctionSpec::exp(), Complex64::new(1.0, 0.5)),
        (FunctionSpec::exp_family(0.1).unwrap(), Complex64::new(0.0, 0.0)),
        (FunctionSpec::exp_family(0.1).unwrap(), Complex64::new(5.0, 0.0)),
        (FunctionSpec::rot_exp(), Complex64::new(1.0, 1.0)),
        (FunctionSpec::hardy_g(0.01).unwrap(), Complex64::new(0.5, 0.0)),
        (FunctionSpec::hardy_g(0.01).unwrap(), Complex64::new(1.7, 0.0)),
    ]
}

#[test]
fn deeper_runs_never_demote_maximal_points() {
    for (f, z) in fixtures() {
        let mut was_maximal = false;
        for depth in [4, 8, 12, 20] {
            let v = classify_point(&f, z, &ClassifierConfig::with_depth(depth)).unwrap().verdict;
            if was_maximal {
                assert_ne!(v, Verdict::NonEscaping, "{} at {z} depth {depth}", f.name());
            }
            was_maximal |= v == Verdict::MaximallyFastCandidate;
        }
    }
}

#[test]
fn maximal_points_map_to_maximal_points() {
    let cfg = ClassifierConfig::with_depth(12);
    for (f, z) in fixtures() {
        if classify_point(&f, z, &cfg).unwrap().verdict != Verdict::MaximallyFastCandidate {
            continue;
        }
        let Some(w) = eval(&f, z).value else { continue };
        assert_eq!(classify_point(&f, w, &cfg).unwrap().verdict, Verdict::MaximallyFastCandidate, "{} at {z}", f.name());
    }
}

#[test]
fn one_pixel_grid_matches_point() {
    let cfg = ClassifierConfig::with_depth(10);
    for (f, _) in fixtures() {
        let win = Window::new(-1.0, -0.5, 2.0, 0.5);
        let g = classify_grid(&f, win, 1, 1, &cfg).unwrap();
        let p = classify_point(&f, win.pixel_center(0, 0, 1, 1), &cfg).unwrap();
        assert_eq!(g.verdicts[0], p.verdict);
    }
}

#[test]
fn exp_grid_has_maximal_axis_row() {
    let cfg = ClassifierConfig::with_depth(20);
    let g = classify_grid(&FunctionSpec::exp(), Window::new(-4.0, -4.0, 4.0, 4.0), 65, 65, &cfg).unwrap();
    let row = (0..65).filter(|&i| g.verdict_at(i, 32) == Verdict::MaximallyFastCandidate).count();
    // the row has im = 0 exactly; every pixel with x > 0 is on the maximal locus
    assert!(row >= 32, "only {row} maximal pixels on the axis row");
    assert_eq!(g.histogram.values().sum::<usize>(), 65 * 65);
}

#[test]
fn grid_is_deterministic() {
    let cfg = ClassifierConfig::with_depth(10);
    let w = Window::new(-2.0, -2.0, 2.0, 2.0);
    let a = classify_grid(&FunctionSpec::exp(), w, 24, 24, &cfg).unwrap();
    let b = classify_grid(&FunctionSpec::exp(), w, 24, 24, &cfg).unwrap();
    assert_eq!(a.to_pgm(), b.to_pgm());
}

#[test]
fn fast_orbit_ratios_are_branch_constants() {
    let orbit = construct_fast_orbit(&FunctionSpec::exp(), 10.0, 3).unwrap();
    assert_eq!(orbit.steps.len(), 3);
    for st in &orbit.steps {
        assert!(matches!(st.branch.factor_over_k(), 1 | 16));
        assert_eq!(st.m_k, 1);
        assert!(st.grows && st.above_mu && st.gap_symbolic && st.gap_numeric);
    }
    // r_2 = K e^10 or 16 K e^10, both at least mu(r_1) = K e^10
    let r2 = orbit.steps[0].r_next.to_f64().unwrap();
    let base = BRANCH_K * 10f64.exp();
    assert!((r2 / base - 1.0).abs() < 1e-12 || (r2 / base - 16.0).abs() < 1e-11);
    // r_2 and r_3 stay machine-size from r_1 = 10, so every step is checked
    assert!(orbit.steps.iter().all(|s| s.containment == Containment::Verified));
    // from r_1 = 20, r_2 = K e^20 is past the numeric search and containment is only symbolic
    let far = construct_fast_orbit(&FunctionSpec::exp(), 20.0, 3).unwrap();
    assert_eq!(far.steps[0].containment, Containment::Verified);
    assert!(far.steps[1..].iter().all(|s| matches!(s.containment, Containment::NotVerified(_))));
}

#[test]
fn fast_orbit_for_hardy_grows() {
    let g = FunctionSpec::hardy_g(0.01).unwrap();
    let orbit = construct_fast_orbit(&g, 3.0, 3).unwrap();
    let radii = orbit.radii();
    assert!(radii.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn chain_json_has_tower_endpoints() {
    let c = build_interval_chain(&FunctionSpec::hardy_g(0.01).unwrap(), ChainMode::SSet, 2, "01", 1).unwrap();
    let j = serde_json::to_value(&c).unwrap();
    let s = j["steps"][2]["left_lo"].as_str().unwrap();
    let t: TowerReal = s.parse().unwrap();
    assert_eq!(t, c.steps[2].left_lo);
    assert!(t.height() >= 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_positive_axis_is_maximal_at_any_depth(x in 0.01f64..6.0, depth in 2usize..24) {
        let v = classify_point(&FunctionSpec::exp(), Complex64::new(x, 0.0), &ClassifierConfig::with_depth(depth)).unwrap();
        prop_assert_eq!(v.verdict, Verdict::MaximallyFastCandidate);
    }

    #[test]
    fn chain_pullbacks_nest(bits in proptest::collection::vec(0u8..2, 1..5), j in any::<bool>(), k0 in 1u64..4) {
        let choices: String = bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
        let mode = if j { ChainMode::JBlocks } else { ChainMode::SSet };
        let c = build_interval_chain(&FunctionSpec::hardy_g(0.01).unwrap(), mode, bits.len(), &choices, k0).unwrap();
        prop_assert!(c.certified);
        prop_assert!(c.nested);
        for w in c.steps.windows(2) {
            prop_assert!(w[1].left_lo > w[0].left_lo);
        }
    }
}
