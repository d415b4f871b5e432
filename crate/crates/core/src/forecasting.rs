//! Multi-step forecasts with Gaussian prediction intervals, and
//! out-of-sample accuracy comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sarima::{expand_polynomials, integrated_ar, psi_weights, FittedModel, InnovationsRun};
use crate::series::{difference_chain, integrate, MonthIndex, MonthlySeries};
use crate::stats::normal_quantile;

/// Interval bounds at one confidence level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub level: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub horizon: usize,
    pub months: Vec<MonthIndex>,
    pub point: Vec<f64>,
    /// One entry per requested level, in the order given.
    pub intervals: Vec<Interval>,
    /// Forecast standard error at each step, original scale.
    pub se: Vec<f64>,
}

impl ForecastResult {
    pub fn interval(&self, level: f64) -> Option<&Interval> {
        self.intervals.iter().find(|i| (i.level - level).abs() < 1e-12)
    }
}

/// Forecasts `h` months past the end of the training window.
///
/// Point forecasts are the exact finite-sample predictors of the ARMA part,
/// integrated back through the stored differencing context. Standard errors
/// accumulate the psi weights of the fully integrated model and ignore
/// parameter uncertainty.
pub fn forecast(model: &FittedModel, h: usize, levels: &[f64]) -> Result<ForecastResult> {
    if h == 0 {
        return Err(Error::Range("forecast horizon must be positive".into()));
    }
    if let Some(bad) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::Range(format!("confidence level must lie in (0, 1), got {bad}")));
    }
    let spec = model.spec();
    let (diffed, ctx) = difference_chain(model.train(), spec.d(), spec.seasonal_d(), spec.period())?;
    let (ar, ma) = expand_polynomials(spec, model.coefficients());
    let run = InnovationsRun::new(&ar, &ma, diffed.values(), h)?;
    let extended = diffed.extended(run.forecasts())?;
    let level_path = integrate(&extended, &ctx)?;
    let point = level_path.values()[level_path.len() - h..].to_vec();

    let psi = psi_weights(&integrated_ar(spec, &ar), &ma, h);
    let sigma = model.sigma2().sqrt();
    let mut acc = 0.0;
    let se: Vec<f64> = psi
        .iter()
        .map(|p| {
            acc += p * p;
            sigma * acc.sqrt()
        })
        .collect();

    let intervals = levels
        .iter()
        .map(|&level| {
            let z = normal_quantile(0.5 + level / 2.0);
            Interval {
                level,
                lower: point.iter().zip(&se).map(|(p, s)| p - z * s).collect(),
                upper: point.iter().zip(&se).map(|(p, s)| p + z * s).collect(),
            }
        })
        .collect();
    let first = model.train().end().add_months(1);
    Ok(ForecastResult {
        horizon: h,
        months: (0..h).map(|k| first.add_months(k as i64)).collect(),
        point,
        intervals,
        se,
    })
}

/// Error summary of one forecast path against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
}

impl ErrorMetrics {
    pub fn from_errors(errors: &[f64]) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::Length { needed: 1, got: 0 });
        }
        let n = errors.len() as f64;
        let mse = errors.iter().map(|e| e * e).sum::<f64>() / n;
        let mae = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
        Ok(Self {
            mse,
            rmse: mse.sqrt(),
            mae,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub name: String,
    pub metrics: ErrorMetrics,
    pub forecast: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub window_start: MonthIndex,
    pub window_end: MonthIndex,
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyTable {
    /// Row with the lowest rmse.
    pub fn best(&self) -> Option<&AccuracyRow> {
        self.rows
            .iter()
            .min_by(|a, b| a.metrics.rmse.total_cmp(&b.metrics.rmse))
    }
}

/// Forecasts every model over the months of `truth`, which must begin the
/// month after each model's training window ends.
pub fn accuracy(models: &[(&str, &FittedModel)], truth: &MonthlySeries) -> Result<AccuracyTable> {
    let rows = models
        .iter()
        .map(|(name, model)| {
            let expected = model.train().end().add_months(1);
            if truth.start() != expected {
                return Err(Error::Range(format!(
                    "{name}: truth starts at {}, forecasts start at {expected}",
                    truth.start()
                )));
            }
            let f = forecast(model, truth.len(), &[])?;
            let errors: Vec<f64> = f.point.iter().zip(truth.values()).map(|(p, t)| t - p).collect();
            Ok(AccuracyRow {
                name: name.to_string(),
                metrics: ErrorMetrics::from_errors(&errors)?,
                forecast: f.point,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyTable {
        window_start: truth.start(),
        window_end: truth.end(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sarima::{CoefficientSet, SarimaSpec};
    use crate::series::difference;

    fn month(y: i32, m: u32) -> MonthIndex {
        MonthIndex::new(y, m).unwrap()
    }

    #[test]
    fn white_noise_forecast_is_flat() {
        let spec: SarimaSpec = "(0,0,0)x(0,0,0)1".parse().unwrap();
        let y = MonthlySeries::new(month(2010, 1), vec![1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 0.0, 0.0]).unwrap();
        let m = FittedModel::from_coefficients(&spec, CoefficientSet::zeros(&spec), &y).unwrap();
        let f = forecast(&m, 5, &[0.95]).unwrap();
        assert!(f.point.iter().all(|p| *p == 0.0));
        let sd = m.sigma2().sqrt();
        let band = f.interval(0.95).unwrap();
        for k in 0..5 {
            assert!((f.se[k] - sd).abs() < 1e-12);
            assert!((band.upper[k] - 1.959963984540054 * sd).abs() < 1e-8);
        }
        assert_eq!(f.months[0], month(2010, 9));
    }

    #[test]
    fn random_walk_forecast_repeats_last_value() {
        let spec: SarimaSpec = "(0,1,0)x(0,0,0)1".parse().unwrap();
        let y = MonthlySeries::new(month(2010, 1), vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 9.0]).unwrap();
        let m = FittedModel::from_coefficients(&spec, CoefficientSet::zeros(&spec), &y).unwrap();
        let f = forecast(&m, 4, &[0.8]).unwrap();
        assert!(f.point.iter().all(|p| *p == 9.0));
        let s = m.sigma2().sqrt();
        for (k, se) in f.se.iter().enumerate() {
            assert!((se - s * ((k + 1) as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn differenced_forecasts_match_arma_forecasts() {
        let spec: SarimaSpec = "(0,1,1)x(1,1,0)4".parse().unwrap();
        let c = CoefficientSet::from_free(&spec, &[-0.4, 0.3]).unwrap();
        let vals: Vec<f64> = (0..40).map(|t| (t as f64 * 0.7).sin() * 5.0 + t as f64).collect();
        let y = MonthlySeries::new(month(2001, 1), vals).unwrap();
        let m = FittedModel::from_coefficients(&spec, c.clone(), &y).unwrap();
        let f = forecast(&m, 6, &[]).unwrap();
        let joined = y.extended(&f.point).unwrap();
        let back = difference(&difference(&joined, 1).unwrap(), 4).unwrap();
        let (dx, _) = difference_chain(&y, 1, 1, 4).unwrap();
        let (ar, ma) = expand_polynomials(&spec, &c);
        let run = InnovationsRun::new(&ar, &ma, dx.values(), 6).unwrap();
        let tail = &back.values()[back.len() - 6..];
        for (a, b) in tail.iter().zip(run.forecasts()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn metric_identities() {
        let zero = ErrorMetrics::from_errors(&[0.0; 4]).unwrap();
        assert_eq!((zero.mse, zero.rmse, zero.mae), (0.0, 0.0, 0.0));
        let bias = ErrorMetrics::from_errors(&[-3.0; 5]).unwrap();
        assert_eq!(bias.mse, 9.0);
        assert_eq!(bias.rmse, 3.0);
        assert_eq!(bias.mae, 3.0);
    }

    #[test]
    fn misaligned_truth_is_rejected() {
        let spec: SarimaSpec = "(0,0,0)x(0,0,0)1".parse().unwrap();
        let y = MonthlySeries::new(month(2010, 1), vec![1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 0.3, 0.1]).unwrap();
        let m = FittedModel::from_coefficients(&spec, CoefficientSet::zeros(&spec), &y).unwrap();
        let truth = MonthlySeries::new(month(2010, 10), vec![0.0, 0.0]).unwrap();
        assert!(matches!(accuracy(&[("wn", &m)], &truth), Err(Error::Range(_))));
        let truth = MonthlySeries::new(month(2010, 9), vec![0.0, 0.0]).unwrap();
        let t = accuracy(&[("wn", &m)], &truth).unwrap();
        assert_eq!(t.rows[0].metrics.mse, 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let spec: SarimaSpec = "(0,0,0)x(0,0,0)1".parse().unwrap();
        let y = MonthlySeries::new(month(2010, 1), vec![1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 0.3, 0.1]).unwrap();
        let m = FittedModel::from_coefficients(&spec, CoefficientSet::zeros(&spec), &y).unwrap();
        assert!(forecast(&m, 0, &[0.9]).is_err());
        assert!(forecast(&m, 3, &[1.0]).is_err());
        assert!(forecast(&m, 3, &[0.0]).is_err());
    }
}
