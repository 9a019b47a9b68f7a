use gffmax_core::extremes::{level_one_z_scores, mc_maxima, paired_max_estimates, LEVEL_ONE_GAP, LEVEL_ONE_MEAN};
use gffmax_core::*;

#[test]
fn level_one_closed_forms() {
    let stats = mc_max_stats(1, 100_000, SeedSpec::new(1, 0), 1).unwrap();
    let (zm, zg) = level_one_z_scores(&stats);
    assert!(zm < 3.0, "mean {} vs {LEVEL_ONE_MEAN}", stats.mean_max);
    assert!(zg < 3.0, "gap {} vs {LEVEL_ONE_GAP}", stats.dh_gap);
    // Z_1 = max(ξ, 0) has an atom of mass 1/2 at 0, which holds the lower quartiles.
    assert!((stats.quantiles.q10 + stats.mean_max).abs() < 1e-12);
    assert!((stats.quantiles.q25 + stats.mean_max).abs() < 1e-12);
}

#[test]
fn max_identity_holds_on_samples() {
    let maxima = mc_maxima(3, 2_000, SeedSpec::new(2, 0), 1).unwrap();
    let (direct, identity) = paired_max_estimates(&maxima);
    assert!((direct - identity).abs() < 1e-12);
}

#[test]
fn small_levels_obey_the_inequalities() {
    let stats: Vec<MaxStats> = (1..=5)
        .map(|n| mc_max_stats(n, 4_000, SeedSpec::new(3, 0), 1).unwrap())
        .collect();
    for step in monotonicity_report(&stats, 2.0).unwrap() {
        assert!(step.monotone, "{step}");
        assert!(step.dekking_host, "{step}");
    }
    let detector = subsequence_detector(&stats, 2.0).unwrap();
    assert_eq!(detector.scanned, vec![1, 2, 3, 4]);
    assert!(!detector.detected.is_empty());
}

#[test]
fn levels_use_disjoint_streams() {
    let seed = SeedSpec::new(4, 0);
    let a = mc_maxima(2, 200, seed, 1).unwrap();
    let b = mc_maxima(2, 200, seed, 1).unwrap();
    let c = mc_maxima(3, 200, seed, 1).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn reports_need_enough_data() {
    assert!(mc_max_stats(2, 99, SeedSpec::new(0, 0), 1).is_err());
    let stats: Vec<MaxStats> = [1, 3]
        .iter()
        .map(|&n| mc_max_stats(n, 100, SeedSpec::new(0, 0), 1).unwrap())
        .collect();
    assert!(matches!(
        monotonicity_report(&stats, 2.0),
        Err(Error::NonConsecutiveLevels { prev: 1, next: 3 })
    ));
    assert!(growth_fit(&stats).is_err());
    assert!(tightness_diagnostic(&stats).is_err());
}
