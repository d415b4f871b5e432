//! Residual adequacy checks: Ljung-Box, Shapiro-Wilk, Jarque-Bera and Q-Q data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identification::{acf, CorrelogramResult};
use crate::sarima::FittedModel;
use crate::series::MonthlySeries;
use crate::stats::{autocorrelations, central_moments, chi_square_sf, normal_cdf, normal_quantile};

/// Ljung-Box statistics for lags `1..=max_lag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxCurve {
    pub lags: Vec<usize>,
    pub statistics: Vec<f64>,
    /// `None` where `lag ≤ fitdf` (no degrees of freedom left).
    pub p_values: Vec<Option<f64>>,
    pub fitdf: usize,
}

pub fn ljung_box(residuals: &MonthlySeries, max_lag: usize, fitdf: usize) -> Result<LjungBoxCurve> {
    let x = residuals.values();
    let n = x.len();
    if max_lag == 0 || max_lag >= n {
        return Err(Error::Range(format!("max_lag must lie in 1..{n}, got {max_lag}")));
    }
    let r = autocorrelations(x, max_lag)?;
    let nf = n as f64;
    let mut q = 0.0;
    let mut statistics = Vec::with_capacity(max_lag);
    let mut p_values = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        q += r[k] * r[k] / (nf - k as f64);
        let stat = nf * (nf + 2.0) * q;
        statistics.push(stat);
        p_values.push((k > fitdf).then(|| chi_square_sf(stat, (k - fitdf) as f64)));
    }
    Ok(LjungBoxCurve {
        lags: (1..=max_lag).collect(),
        statistics,
        p_values,
        fitdf,
    })
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Shapiro-Wilk W and its p-value, using Royston's coefficient and null
/// distribution approximations (valid for 3 ≤ n ≤ 5000).
pub fn shapiro_wilk(sample: &[f64]) -> Result<(f64, f64)> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::Range(format!("Shapiro-Wilk needs 3..=5000 observations, got {n}")));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if !(range > 0.0) {
        return Err(Error::Degenerate("sample has zero range".into()));
    }
    let nf = n as f64;
    let half = n / 2;

    // Coefficients for the upper half; the lower half is antisymmetric.
    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        let m: Vec<f64> = (0..half)
            .map(|i| -normal_quantile((i as f64 + 1.0 - 0.375) / (nf + 0.25)))
            .collect();
        let ssm = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let u = 1.0 / nf.sqrt();
        let an = m[0] / ssm.sqrt() + poly(&[0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056], u);
        if n > 5 {
            let an1 = m[1] / ssm.sqrt() + poly(&[0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633], u);
            let phi = (ssm - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
            a[0] = an;
            a[1] = an1;
            for i in 2..half {
                a[i] = m[i] / phi.sqrt();
            }
        } else {
            let phi = (ssm - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * an * an);
            a[0] = an;
            for i in 1..half {
                a[i] = m[i] / phi.sqrt();
            }
        }
    }

    let mean = x.iter().sum::<f64>() / nf;
    let ss: f64 = x.iter().map(|v| ((v - mean) / range).powi(2)).sum();
    let b: f64 = (0..half).map(|i| a[i] * (x[n - 1 - i] - x[i]) / range).sum();
    let w = (b * b / ss).min(1.0);

    let p = if n == 3 {
        let p = 6.0 / std::f64::consts::PI * (w.sqrt().asin() - std::f64::consts::FRAC_PI_3);
        p.clamp(0.0, 1.0)
    } else if n <= 11 {
        let gamma = poly(&[-2.273, 0.459], nf);
        let y = (1.0 - w).ln();
        if y >= gamma {
            0.0
        } else {
            let z = -(gamma - y).ln();
            let mu = poly(&[0.5440, -0.39978, 0.025054, -6.714e-4], nf);
            let sigma = poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf).exp();
            1.0 - normal_cdf((z - mu) / sigma)
        }
    } else {
        let ln_n = nf.ln();
        let mu = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], ln_n);
        let sigma = poly(&[-0.4803, -0.082676, 0.0030302], ln_n).exp();
        1.0 - normal_cdf(((1.0 - w).ln() - mu) / sigma)
    };
    Ok((w, p))
}

/// Jarque-Bera statistic from sample skewness and kurtosis, and its
/// chi-square(2) upper-tail p-value.
pub fn jarque_bera(sample: &[f64]) -> Result<(f64, f64)> {
    let (jb, _, _) = jarque_bera_parts(sample)?;
    Ok((jb, (-jb / 2.0).exp()))
}

fn jarque_bera_parts(sample: &[f64]) -> Result<(f64, f64, f64)> {
    let n = sample.len();
    if n < 8 {
        return Err(Error::Length { needed: 8, got: n });
    }
    let (m2, m3, m4) = central_moments(sample);
    let scale = sample.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m2 == 0.0 || m2.sqrt() <= 1e-12 * scale {
        return Err(Error::Degenerate("sample has zero variance".into()));
    }
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    let jb = n as f64 / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    Ok((jb, skew, kurt))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub n: usize,
    pub shapiro_w: f64,
    pub shapiro_p: f64,
    pub jb_stat: f64,
    pub jb_p: f64,
    pub skewness: f64,
    /// Non-excess kurtosis (3 for a normal sample).
    pub kurtosis: f64,
}

pub fn normality(sample: &[f64]) -> Result<NormalityReport> {
    let (shapiro_w, shapiro_p) = shapiro_wilk(sample)?;
    let (jb_stat, skewness, kurtosis) = jarque_bera_parts(sample)?;
    Ok(NormalityReport {
        n: sample.len(),
        shapiro_w,
        shapiro_p,
        jb_stat,
        jb_p: (-jb_stat / 2.0).exp(),
        skewness,
        kurtosis,
    })
}

/// `(theoretical, empirical)` pairs, empirical sorted ascending, plotting
/// positions `(i − 0.5)/n`.
pub fn qq_pairs(sample: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (normal_quantile((i as f64 + 0.5) / n), v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostics {
    pub ljung_box: LjungBoxCurve,
    pub normality: NormalityReport,
    pub residual_acf: CorrelogramResult,
    pub qq: Vec<(f64, f64)>,
}

/// Ljung-Box default: two seasonal cycles of monthly data.
pub const DEFAULT_MAX_LAG: usize = 24;

pub fn residual_diagnostics(model: &FittedModel, max_lag: usize) -> Result<ResidualDiagnostics> {
    let res = model.residuals();
    Ok(ResidualDiagnostics {
        ljung_box: ljung_box(res, max_lag, model.spec().free_count())?,
        normality: normality(res.values())?,
        residual_acf: acf(res, max_lag)?,
        qq: qq_pairs(res.values()),
    })
}
