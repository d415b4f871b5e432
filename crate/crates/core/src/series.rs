//! Month-indexed series, differencing and its exact inverse.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar month. Ordering is chronological.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MonthIndex {
    year: i32,
    month: u8,
}

impl MonthIndex {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Range(format!("month {month} outside 1..12")));
        }
        Ok(Self {
            year,
            month: month as u8,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        u32::from(self.month)
    }

    /// Months elapsed since January of year 0.
    pub fn ordinal(&self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(12);
        let month = ordinal.rem_euclid(12) + 1;
        Self {
            year: year as i32,
            month: month as u8,
        }
    }

    /// Shift by `k` months (negative moves backwards).
    pub fn add_months(&self, k: i64) -> Self {
        Self::from_ordinal(self.ordinal() + k)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(&self, other: MonthIndex) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthIndex {
    type Err = Error;

    /// Parses `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            position: 0,
            message: format!("expected YYYY-MM, got '{s}'"),
        };
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        MonthIndex::new(year, month)
    }
}

impl TryFrom<String> for MonthIndex {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MonthIndex> for String {
    fn from(m: MonthIndex) -> String {
        m.to_string()
    }
}

/// A gap-free sequence of finite observations, one per month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySeries {
    start: MonthIndex,
    values: Vec<f64>,
}

impl MonthlySeries {
    pub fn new(start: MonthIndex, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Length { needed: 1, got: 0 });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Range(format!(
                "non-finite observation at {}",
                start.add_months(k as i64)
            )));
        }
        Ok(Self { start, values })
    }

    pub fn start(&self) -> MonthIndex {
        self.start
    }

    /// Last month covered.
    pub fn end(&self) -> MonthIndex {
        self.start.add_months(self.values.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn month_at(&self, k: usize) -> MonthIndex {
        self.start.add_months(k as i64)
    }

    pub fn months(&self) -> impl Iterator<Item = MonthIndex> + '_ {
        (0..self.values.len()).map(|k| self.month_at(k))
    }

    /// Position of `month` in the series, if covered.
    pub fn position(&self, month: MonthIndex) -> Option<usize> {
        let k = self.start.months_until(month);
        (k >= 0 && (k as usize) < self.values.len()).then_some(k as usize)
    }

    pub fn get(&self, month: MonthIndex) -> Option<f64> {
        self.position(month).map(|k| self.values[k])
    }

    /// Same values, relabelled to begin at `start`.
    pub fn rebased(self, start: MonthIndex) -> Self {
        Self { start, ..self }
    }

    /// Inclusive sub-series `from..=to`.
    pub fn slice(&self, from: MonthIndex, to: MonthIndex) -> Result<Self> {
        if from > to {
            return Err(Error::Range(format!("slice start {from} is after end {to}")));
        }
        match (self.position(from), self.position(to)) {
            (Some(a), Some(b)) => Ok(Self {
                start: from,
                values: self.values[a..=b].to_vec(),
            }),
            _ => Err(Error::Range(format!(
                "slice {from}..{to} outside series range {}..{}",
                self.start,
                self.end()
            ))),
        }
    }

    /// Appends `tail` values continuing the monthly index.
    pub fn extended(&self, tail: &[f64]) -> Result<Self> {
        let mut values = self.values.clone();
        values.extend_from_slice(tail);
        Self::new(self.start, values)
    }
}

/// Lag-`lag` difference: `out[k] = x[k + lag] - x[k]`.
pub fn difference(series: &MonthlySeries, lag: usize) -> Result<MonthlySeries> {
    if lag == 0 {
        return Err(Error::Range("difference lag must be positive".into()));
    }
    let x = series.values();
    if x.len() <= lag {
        return Err(Error::Length {
            needed: lag + 1,
            got: x.len(),
        });
    }
    let values = x[lag..].iter().zip(x).map(|(a, b)| a - b).collect();
    Ok(MonthlySeries {
        start: series.start.add_months(lag as i64),
        values,
    })
}

/// Record of a differencing chain, sufficient to undo it exactly.
///
/// Ordinary passes are applied first, then seasonal ones. Each pass keeps
/// the leading values of its input that it consumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffContext {
    ordinary_order: usize,
    seasonal_order: usize,
    period: usize,
    origin: MonthIndex,
    retained_prefixes: Vec<Vec<f64>>,
}

impl DiffContext {
    pub fn ordinary_order(&self) -> usize {
        self.ordinary_order
    }

    pub fn seasonal_order(&self) -> usize {
        self.seasonal_order
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// First month of the undifferenced series.
    pub fn origin(&self) -> MonthIndex {
        self.origin
    }

    pub fn retained_prefixes(&self) -> &[Vec<f64>] {
        &self.retained_prefixes
    }

    /// Observations consumed by the chain: `d + D·s`.
    pub fn consumed(&self) -> usize {
        self.ordinary_order + self.seasonal_order * self.period
    }

    fn lags(&self) -> impl Iterator<Item = usize> {
        std::iter::repeat_n(1, self.ordinary_order)
            .chain(std::iter::repeat_n(self.period, self.seasonal_order))
    }

    /// Build a context from stored parts, checking prefix shapes.
    pub fn from_parts(
        ordinary_order: usize,
        seasonal_order: usize,
        period: usize,
        origin: MonthIndex,
        retained_prefixes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let ctx = Self {
            ordinary_order,
            seasonal_order,
            period,
            origin,
            retained_prefixes,
        };
        ctx.check_prefixes()?;
        Ok(ctx)
    }

    fn check_prefixes(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::Context("period must be positive".into()));
        }
        if self.retained_prefixes.len() != self.ordinary_order + self.seasonal_order {
            return Err(Error::Context(format!(
                "expected {} prefixes, found {}",
                self.ordinary_order + self.seasonal_order,
                self.retained_prefixes.len()
            )));
        }
        for (i, (lag, prefix)) in self.lags().zip(&self.retained_prefixes).enumerate() {
            if prefix.len() != lag {
                return Err(Error::Context(format!(
                    "prefix {i} has length {}, expected {lag}",
                    prefix.len()
                )));
            }
        }
        Ok(())
    }
}

/// Applies `d` ordinary then `seasonal_order` seasonal differences at `period`.
pub fn difference_chain(
    series: &MonthlySeries,
    d: usize,
    seasonal_order: usize,
    period: usize,
) -> Result<(MonthlySeries, DiffContext)> {
    if period == 0 {
        return Err(Error::Range("seasonal period must be positive".into()));
    }
    let needed = d + seasonal_order * period + 1;
    if series.len() < needed {
        return Err(Error::Length {
            needed,
            got: series.len(),
        });
    }
    let mut ctx = DiffContext {
        ordinary_order: d,
        seasonal_order,
        period,
        origin: series.start,
        retained_prefixes: Vec::with_capacity(d + seasonal_order),
    };
    let mut current = series.clone();
    let lags: Vec<usize> = ctx.lags().collect();
    for lag in lags {
        ctx.retained_prefixes.push(current.values[..lag].to_vec());
        current = difference(&current, lag)?;
    }
    Ok((current, ctx))
}

/// Undoes [`difference_chain`]. `diffed` may run past the original end
/// (e.g. with forecasts appended); the integration simply continues.
pub fn integrate(diffed: &MonthlySeries, ctx: &DiffContext) -> Result<MonthlySeries> {
    ctx.check_prefixes()?;
    let expected_start = ctx.origin.add_months(ctx.consumed() as i64);
    if diffed.start != expected_start {
        return Err(Error::Context(format!(
            "differenced series starts at {}, context expects {expected_start}",
            diffed.start
        )));
    }
    let lags: Vec<usize> = ctx.lags().collect();
    let mut values = diffed.values.clone();
    for (lag, prefix) in lags.iter().zip(&ctx.retained_prefixes).rev() {
        let mut level = Vec::with_capacity(values.len() + lag);
        level.extend_from_slice(prefix);
        for (k, dv) in values.iter().enumerate() {
            let prev = level[k];
            level.push(dv + prev);
        }
        values = level;
    }
    MonthlySeries::new(ctx.origin, values)
}
