//! Event-loss estimation by counterfactual forecasting.
//!
//! A model fitted only on pre-event data forecasts the event window; the
//! gap between that forecast and what actually happened is the loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecasting::forecast;
use crate::sarima::{fit, CoefficientSet, FittedModel, SarimaSpec};
use crate::series::{MonthIndex, MonthlySeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub months: Vec<MonthIndex>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    /// `predicted − actual`.
    pub loss: Vec<f64>,
    /// `actual / predicted`; one minus the loss rate.
    pub retained: Vec<f64>,
    pub aggregate_actual: f64,
    pub aggregate_predicted: f64,
    pub aggregate_loss: f64,
    pub aggregate_retained: f64,
    /// Coefficients of the pre-event refit, when the report came from one.
    pub coefficients: Option<CoefficientSet>,
}

impl LossReport {
    pub fn from_paths(months: Vec<MonthIndex>, actual: Vec<f64>, predicted: Vec<f64>) -> Result<Self> {
        if months.len() != actual.len() || actual.len() != predicted.len() || months.is_empty() {
            return Err(Error::Range("months, actual and predicted must share a non-zero length".into()));
        }
        if let Some(k) = predicted.iter().position(|p| *p == 0.0) {
            return Err(Error::Degenerate(format!("counterfactual is zero at {}", months[k])));
        }
        let loss = predicted.iter().zip(&actual).map(|(p, a)| p - a).collect();
        let retained = actual.iter().zip(&predicted).map(|(a, p)| a / p).collect();
        let aggregate_actual: f64 = actual.iter().sum();
        let aggregate_predicted: f64 = predicted.iter().sum();
        Ok(Self {
            months,
            actual,
            predicted,
            loss,
            retained,
            aggregate_actual,
            aggregate_predicted,
            aggregate_loss: aggregate_predicted - aggregate_actual,
            aggregate_retained: aggregate_actual / aggregate_predicted,
            coefficients: None,
        })
    }
}

/// Report from an already fitted pre-event model against `actuals`, which
/// must start the month after the model's training window.
pub fn loss_against(model: &FittedModel, actuals: &MonthlySeries) -> Result<LossReport> {
    let first = model.train().end().add_months(1);
    if actuals.start() != first {
        return Err(Error::Range(format!(
            "actuals start at {}, counterfactual starts at {first}",
            actuals.start()
        )));
    }
    let f = forecast(model, actuals.len(), &[])?;
    let mut report = LossReport::from_paths(f.months, actuals.values().to_vec(), f.point)?;
    report.coefficients = Some(model.coefficients().clone());
    Ok(report)
}

/// Refits `spec` on `series` up to `train_end`, forecasts `horizon` months,
/// and compares them with the observed values.
pub fn quantify_impact(
    spec: &SarimaSpec,
    series: &MonthlySeries,
    train_end: MonthIndex,
    horizon: usize,
) -> Result<LossReport> {
    if horizon == 0 {
        return Err(Error::Range("horizon must be positive".into()));
    }
    let first = train_end.add_months(1);
    let last = train_end.add_months(horizon as i64);
    if train_end < series.start() || last > series.end() {
        return Err(Error::Range(format!(
            "horizon {first}..{last} is not covered by the series ({}..{})",
            series.start(),
            series.end()
        )));
    }
    let train = series.slice(series.start(), train_end)?;
    let model = fit(spec, &train)?;
    loss_against(&model, &series.slice(first, last)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn months(n: usize) -> Vec<MonthIndex> {
        let m = MonthIndex::new(2020, 2).unwrap();
        (0..n).map(|k| m.add_months(k as i64)).collect()
    }

    #[test]
    fn identical_paths_lose_nothing() {
        let v = vec![5.0, 6.0, 7.0];
        let r = LossReport::from_paths(months(3), v.clone(), v).unwrap();
        assert!(r.loss.iter().all(|l| *l == 0.0));
        assert!(r.retained.iter().all(|x| *x == 1.0));
        assert_eq!(r.aggregate_retained, 1.0);
    }

    #[test]
    fn horizon_past_data_is_rejected() {
        let spec: SarimaSpec = "(0,1,0)x(0,0,0)1".parse().unwrap();
        let v = vec![10.0, 12.0, 11.0, 13.0, 12.5, 14.0, 13.0, 15.0, 7.5, 3.0];
        let y = MonthlySeries::new(MonthIndex::new(2019, 1).unwrap(), v).unwrap();
        let end = MonthIndex::new(2019, 8).unwrap();
        assert!(matches!(quantify_impact(&spec, &y, end, 3), Err(Error::Range(_))));
        let r = quantify_impact(&spec, &y, end, 2).unwrap();
        // A random walk's counterfactual stays at the last training value.
        assert_eq!(r.predicted, vec![15.0, 15.0]);
        assert_eq!(r.loss, vec![7.5, 12.0]);
        assert_eq!(r.aggregate_retained, 10.5 / 30.0);
    }

    proptest! {
        #[test]
        fn arithmetic_identities(
            pairs in prop::collection::vec((1.0f64..1e7, 1.0f64..1e7), 1..20)
        ) {
            let (actual, predicted): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = LossReport::from_paths(months(actual.len()), actual.clone(), predicted.clone()).unwrap();
            for k in 0..actual.len() {
                prop_assert_eq!(r.loss[k], predicted[k] - actual[k]);
                prop_assert!((r.retained[k] * predicted[k] - actual[k]).abs() <= 1e-9 * actual[k].max(1.0));
            }
            let ratio = actual.iter().sum::<f64>() / predicted.iter().sum::<f64>();
            prop_assert_eq!(r.aggregate_retained, ratio);
        }
    }
}
