//! Correlograms and augmented Dickey-Fuller unit-root tests.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MonthlySeries;
use crate::stats::{autocorrelations, normal_quantile, ols};

/// Sample ACF or PACF at lags `1..=L`, with the white-noise band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelogramResult {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    /// Half-width `z / sqrt(n)` of the white-noise confidence band.
    pub band: f64,
}

fn check_lag(series: &MonthlySeries, max_lag: usize) -> Result<()> {
    if max_lag == 0 {
        return Err(Error::Range("max_lag must be positive".into()));
    }
    if max_lag >= series.len() {
        return Err(Error::Range(format!(
            "max_lag {max_lag} must be below the series length {}",
            series.len()
        )));
    }
    Ok(())
}

fn band(n: usize, level: f64) -> f64 {
    normal_quantile(0.5 + level / 2.0) / (n as f64).sqrt()
}

/// Sample autocorrelation function with a 95% band.
pub fn acf(series: &MonthlySeries, max_lag: usize) -> Result<CorrelogramResult> {
    acf_with_level(series, max_lag, 0.95)
}

pub fn acf_with_level(series: &MonthlySeries, max_lag: usize, level: f64) -> Result<CorrelogramResult> {
    check_lag(series, max_lag)?;
    let r = autocorrelations(series.values(), max_lag)?;
    Ok(CorrelogramResult {
        lags: (1..=max_lag).collect(),
        values: r[1..].to_vec(),
        band: band(series.len(), level),
    })
}

/// Sample partial autocorrelations from the Durbin-Levinson recursion.
pub fn pacf(series: &MonthlySeries, max_lag: usize) -> Result<CorrelogramResult> {
    check_lag(series, max_lag)?;
    let r = autocorrelations(series.values(), max_lag)?;
    let values = durbin_levinson(&r, max_lag)?;
    Ok(CorrelogramResult {
        lags: (1..=max_lag).collect(),
        values,
        band: band(series.len(), 0.95),
    })
}

/// Partial autocorrelations 1..=max_lag from autocorrelations `r[0..=max_lag]`.
pub(crate) fn durbin_levinson(r: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let mut partial = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = r[k] - phi.iter().enumerate().map(|(j, p)| p * r[k - 1 - j]).sum::<f64>();
        if v <= 1e-14 {
            return Err(Error::Numerical(format!(
                "Durbin-Levinson breakdown at lag {k}: prediction variance vanished"
            )));
        }
        let a = num / v;
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - a * prev[prev.len() - 1 - j];
        }
        phi.push(a);
        v *= 1.0 - a * a;
        partial.push(a);
    }
    Ok(partial)
}

/// Deterministic terms included in the Dickey-Fuller regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdfType {
    /// Type 1: no drift, no trend.
    NoDriftNoTrend,
    /// Type 2: drift, no trend.
    Drift,
    /// Type 3: drift and linear trend.
    DriftAndTrend,
}

impl AdfType {
    pub const ALL: [AdfType; 3] = [AdfType::NoDriftNoTrend, AdfType::Drift, AdfType::DriftAndTrend];

    /// 1, 2 or 3.
    pub fn number(self) -> u8 {
        match self {
            AdfType::NoDriftNoTrend => 1,
            AdfType::Drift => 2,
            AdfType::DriftAndTrend => 3,
        }
    }

    fn deterministic_terms(self) -> usize {
        self.number() as usize - 1
    }

    fn table(self) -> &'static [[f64; 8]; 6] {
        match self {
            AdfType::NoDriftNoTrend => &TAU_NONE,
            AdfType::Drift => &TAU_DRIFT,
            AdfType::DriftAndTrend => &TAU_TREND,
        }
    }
}

impl fmt::Display for AdfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type{}", self.number())
    }
}

/// Which end of the critical-value table the p-value was clamped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PValueBound {
    /// True p-value is at most 0.01.
    AtMost,
    /// True p-value is at least 0.99.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub kind: AdfType,
    pub lag: usize,
    pub statistic: f64,
    /// Interpolated p-value, clamped to [0.01, 0.99].
    pub p_value: f64,
    pub bound: Option<PValueBound>,
}

// Dickey-Fuller τ quantiles (Fuller 1976) by sample size.
const TABLE_SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, 100_000.0];
const TABLE_PROBS: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];

const TAU_NONE: [[f64; 8]; 6] = [
    [-2.66, -2.26, -1.95, -1.60, 0.92, 1.33, 1.70, 2.16],
    [-2.62, -2.25, -1.95, -1.61, 0.91, 1.31, 1.66, 2.08],
    [-2.60, -2.24, -1.95, -1.61, 0.90, 1.29, 1.64, 2.03],
    [-2.58, -2.23, -1.95, -1.62, 0.89, 1.29, 1.63, 2.01],
    [-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00],
    [-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00],
];

#[allow(clippy::approx_constant)]
const TAU_DRIFT: [[f64; 8]; 6] = [
    [-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
];

const TAU_TREND: [[f64; 8]; 6] = [
    [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
    [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
    [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
    [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
    [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
    [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
];

/// Linear interpolation with constant extrapolation; `xs` increasing.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.windows(2).position(|w| x < w[1]).unwrap_or(last - 1);
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// P-value of a Dickey-Fuller τ statistic, clamped to the table's range.
pub fn adf_p_value(statistic: f64, kind: AdfType, sample_size: usize) -> (f64, Option<PValueBound>) {
    let table = kind.table();
    let n = sample_size as f64;
    let quantiles: Vec<f64> = (0..TABLE_PROBS.len())
        .map(|j| {
            let column: Vec<f64> = table.iter().map(|row| row[j]).collect();
            interpolate(&TABLE_SIZES, &column, n)
        })
        .collect();
    if statistic <= quantiles[0] {
        return (TABLE_PROBS[0], Some(PValueBound::AtMost));
    }
    if statistic >= quantiles[quantiles.len() - 1] {
        return (TABLE_PROBS[TABLE_PROBS.len() - 1], Some(PValueBound::AtLeast));
    }
    (interpolate(&quantiles, &TABLE_PROBS, statistic), None)
}

/// ADF regressions for lags `0..=max_lag`.
///
/// The regression of Δy_t on y_{t-1}, `lag` lagged differences and the
/// deterministic terms of `kind`; the statistic is the t-ratio of the
/// y_{t-1} coefficient.
pub fn adf_test(series: &MonthlySeries, max_lag: usize, kind: AdfType) -> Result<Vec<AdfResult>> {
    let y = series.values();
    let regressors = 1 + max_lag + kind.deterministic_terms();
    let needed = max_lag + 3 + regressors;
    if y.len() < needed {
        return Err(Error::Length {
            needed,
            got: y.len(),
        });
    }
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if y.iter().all(|v| (v - y[0]).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate("series is constant".into()));
    }
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    (0..=max_lag)
        .map(|lag| {
            let statistic = adf_statistic(y, &dy, lag, kind)?;
            let (p_value, bound) = adf_p_value(statistic, kind, dy.len());
            Ok(AdfResult {
                kind,
                lag,
                statistic,
                p_value,
                bound,
            })
        })
        .collect()
}

fn adf_statistic(y: &[f64], dy: &[f64], lag: usize, kind: AdfType) -> Result<f64> {
    let rows: Vec<usize> = (lag..dy.len()).collect();
    let cols = 1 + lag + kind.deterministic_terms();
    let x = DMatrix::from_fn(rows.len(), cols, |r, c| {
        let t = rows[r];
        match c {
            0 => y[t],
            c if c <= lag => dy[t - c],
            c if c == lag + 1 => 1.0,
            _ => (t + 1) as f64,
        }
    });
    let target = DVector::from_iterator(rows.len(), rows.iter().map(|&t| dy[t]));
    let fit = ols(&x, &target)?;
    let stat = fit.coefficients[0] / fit.std_errors[0];
    if !stat.is_finite() {
        return Err(Error::Numerical("non-finite ADF statistic".into()));
    }
    Ok(stat)
}
