mod common;

use common::*;
use proptest::prelude::*;
use sparse_sarima::diagnostics::ljung_box;
use sparse_sarima::forecasting::forecast;
use sparse_sarima::sarima::{
    fit, information_criteria, log_likelihood, score_at_estimate, simulate, CoefficientSet, FittedModel, SarimaSpec,
};
use sparse_sarima::{MonthIndex, MonthlySeries};

#[test]
fn likelihood_matches_direct_density() {
    for seed in [1, 2, 3] {
        let (gap, cases) = likelihood_oracle_gap(seed);
        assert!(cases > 1000);
        assert!(gap < 1e-8, "seed {seed}: gap {gap}");
    }
}

#[test]
fn ma1_five_points_match_direct_density() {
    let spec: SarimaSpec = "(0,0,1)x(0,0,0)1".parse().unwrap();
    let coef = CoefficientSet::from_free(&spec, &[0.5]).unwrap();
    let x = [0.3, -1.2, 0.8, 2.1, -0.4];
    let series = MonthlySeries::new(MonthIndex::new(2000, 1).unwrap(), x.to_vec()).unwrap();
    let ll = log_likelihood(&spec, &coef, 1.3, &series).unwrap();
    assert!((ll - oracle_loglik(&spec, &coef, 1.3, &x)).abs() < 1e-8);
}

#[test]
fn difference_integrate_identity() {
    let gap = round_trip_gap(5, 300);
    assert!(gap < 1e-12, "{gap}");
}

#[test]
fn simulate_then_fit_recovers_model3() {
    let (gap, model) = simulate_fit_gap(2000, 21);
    assert!(gap < 0.05, "max coefficient error {gap}");
    assert!(intervals_nest(&model, 12));
}

#[test]
fn one_step_coverage_is_nominal() {
    let cov = one_step_coverage(600, 1000);
    assert!((cov - 0.95).abs() <= 0.025, "coverage {cov}");
}

fn simulated_fit(spec: &str, free: &[f64], n: usize, seed: u64) -> FittedModel {
    let spec: SarimaSpec = spec.parse().unwrap();
    let c = CoefficientSet::from_free(&spec, free).unwrap();
    let y = simulate(&spec, &c, 1.0, n, seed).unwrap();
    fit(&spec, &y).unwrap()
}

#[test]
fn fitted_model_invariants() {
    let cases: [(&str, &[f64]); 4] = [
        ("(0,1,1)x(4,1,0)12[sar3=0]", &[-0.6, -0.6, -0.35, -0.25]),
        ("(1,0,1)x(0,0,0)1", &[0.6, -0.3]),
        ("(0,1,1)x(1,1,1)12", &[-0.4, 0.3, -0.5]),
        ("(2,0,0)x(1,0,0)4[ar1=0]", &[0.4, 0.3]),
    ];
    for (i, (text, free)) in cases.into_iter().enumerate() {
        let m = simulated_fit(text, free, 300, 40 + i as u64);
        let spec = m.spec().clone();
        for slot in spec.mask() {
            assert_eq!(m.coefficients().get(*slot), 0.0, "{text}: {slot}");
        }
        let ic = information_criteria(m.loglik(), spec.free_count() + 1, m.n_effective() as f64).unwrap();
        assert_eq!(ic.aic, m.aic());
        assert_eq!(ic.bic, m.bic());
        assert_eq!(ic.aicc, m.aicc());
        assert_eq!(m.residuals().len(), m.n_effective());
        for start in m.starts() {
            if let (Some(a), Some(b)) = (start.initial_loglik, start.final_loglik) {
                assert!(b >= a - 1e-9, "{text}: {} went from {a} to {b}", start.label);
            }
            if let Some(b) = start.final_loglik {
                assert!(m.loglik() >= b - 1e-6, "{text}: best {} below start {b}", m.loglik());
            }
        }
        let g = score_at_estimate(&m).unwrap();
        let theta = m.coefficients().free_values(&spec);
        for (gi, t) in g.iter().zip(theta) {
            assert!(gi.abs() / t.abs().max(1.0) < 1e-3, "{text}: gradient {g:?}");
        }
    }
}

#[test]
fn masked_slots_cannot_be_set() {
    let spec: SarimaSpec = "(0,1,1)x(4,1,0)12[sar3=0]".parse().unwrap();
    let mut c = CoefficientSet::zeros(&spec);
    assert!(c.set("sar3".parse().unwrap(), 0.1).is_err());
    assert!(c.set("sar5".parse().unwrap(), 0.1).is_err());
    assert!(c.set("sar4".parse().unwrap(), 0.1).is_ok());
}

#[test]
fn fit_rejects_short_series() {
    let spec: SarimaSpec = "(0,1,1)x(1,1,0)12".parse().unwrap();
    let y = MonthlySeries::new(MonthIndex::new(2000, 1).unwrap(), (0..20).map(|v| v as f64).collect()).unwrap();
    assert!(fit(&spec, &y).is_err());
}

#[test]
fn one_step_variance_is_sigma2() {
    let m = simulated_fit("(1,1,1)x(0,1,1)12", &[0.3, -0.4, -0.5], 150, 8);
    let f = forecast(&m, 3, &[0.9]).unwrap();
    assert!((f.se[0] * f.se[0] - m.sigma2()).abs() < 1e-9 * m.sigma2());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interval_nesting(seed in 0u64..10_000) {
        let spec: SarimaSpec = "(0,1,1)x(1,1,0)12".parse().unwrap();
        let c = CoefficientSet::from_free(&spec, &[-0.3, -0.5]).unwrap();
        let y = simulate(&spec, &c, 1.0, 60, seed).unwrap();
        let m = FittedModel::from_coefficients(&spec, c, &y).unwrap();
        prop_assert!(intervals_nest(&m, 18));
    }

    #[test]
    fn ljung_box_monotone_on_residuals(seed in 0u64..10_000) {
        let spec: SarimaSpec = "(0,0,1)x(0,0,0)1".parse().unwrap();
        let c = CoefficientSet::from_free(&spec, &[0.7]).unwrap();
        let y = simulate(&spec, &c, 1.0, 80, seed).unwrap();
        let lb = ljung_box(&y, 30, 1).unwrap();
        for w in lb.statistics.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn document_round_trip(seed in 0u64..10_000) {
        let spec: SarimaSpec = "(0,1,1)x(2,1,0)4[sar1=0]".parse().unwrap();
        let c = CoefficientSet::from_free(&spec, &[-0.4, 0.2]).unwrap();
        let y = simulate(&spec, &c, 3.0, 40, seed).unwrap();
        let m = FittedModel::from_coefficients(&spec, c, &y).unwrap();
        let back = FittedModel::from_document(&m.to_document()).unwrap();
        prop_assert_eq!(back, m);
    }
}
