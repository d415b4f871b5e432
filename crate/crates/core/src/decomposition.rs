//! Classical additive decomposition: centered moving-average trend,
//! calendar-position seasonal indices, remainder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{MonthIndex, MonthlySeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub start: MonthIndex,
    pub period: usize,
    pub observed: Vec<f64>,
    /// `None` on the edges where the centered average is not defined.
    pub trend: Vec<Option<f64>>,
    pub seasonal: Vec<f64>,
    pub remainder: Vec<Option<f64>>,
    /// Index `j` applies to months whose ordinal is `j` modulo the period;
    /// for period 12 that is calendar month `j + 1`.
    pub seasonal_indices: Vec<f64>,
}

impl Decomposition {
    pub fn seasonal_index(&self, month: MonthIndex) -> f64 {
        self.seasonal_indices[position(month, self.period)]
    }

    /// Calendar positions sorted from the largest seasonal index down.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.period).collect();
        order.sort_by(|&a, &b| self.seasonal_indices[b].total_cmp(&self.seasonal_indices[a]));
        order
    }
}

fn position(month: MonthIndex, period: usize) -> usize {
    month.ordinal().rem_euclid(period as i64) as usize
}

/// Centered moving average of length `period` (a 2×period average with
/// half weights at the ends when the period is even).
fn centered_average(x: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = x.len();
    let half = period / 2;
    let mut out = vec![None; n];
    for t in half..n.saturating_sub(half) {
        let v = if period.is_multiple_of(2) {
            let inner: f64 = x[t + 1 - half..t + half].iter().sum();
            (inner + 0.5 * (x[t - half] + x[t + half])) / period as f64
        } else {
            x[t - half..=t + half].iter().sum::<f64>() / period as f64
        };
        out[t] = Some(v);
    }
    out
}

pub fn decompose(series: &MonthlySeries, period: usize) -> Result<Decomposition> {
    if period == 0 {
        return Err(Error::Range("period must be positive".into()));
    }
    let x = series.values();
    let n = x.len();
    if n < 2 * period + 1 {
        return Err(Error::Length {
            needed: 2 * period + 1,
            got: n,
        });
    }
    let trend = centered_average(x, period);
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (k, tr) in trend.iter().enumerate() {
        if let Some(tr) = tr {
            let j = position(series.month_at(k), period);
            sums[j] += x[k] - tr;
            counts[j] += 1;
        }
    }
    let raw: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let centre = raw.iter().sum::<f64>() / period as f64;
    let seasonal_indices: Vec<f64> = raw.iter().map(|v| v - centre).collect();
    let seasonal: Vec<f64> = (0..n)
        .map(|k| seasonal_indices[position(series.month_at(k), period)])
        .collect();
    let remainder = trend
        .iter()
        .zip(x.iter().zip(&seasonal))
        .map(|(tr, (v, s))| tr.map(|tr| v - tr - s))
        .collect();
    Ok(Decomposition {
        start: series.start(),
        period,
        observed: x.to_vec(),
        trend,
        seasonal,
        remainder,
        seasonal_indices,
    })
}
