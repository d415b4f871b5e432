//! Exact Gaussian likelihood of a zero-mean ARMA process.
//!
//! The one-step predictors come from the innovations algorithm applied to
//! the transformed process of Ansley (1979): `W_t = X_t` for `t ≤ m` and
//! `W_t = φ(B)X_t` afterwards, `m = max(p, q)`. Its covariance is banded
//! beyond `m`, so each step past `m` costs `O(q²)`. Everything here runs
//! with unit innovation variance; the variance is scaled in afterwards.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::polynomial::{expand_polynomials, is_stationary};
use super::spec::{CoefficientSet, Factor, SarimaSpec};
use crate::error::{Error, Result};
use crate::series::MonthlySeries;

/// Autocovariances γ(0..=max_lag) of an ARMA process with unit innovation
/// variance, from the linear system of the first `p + 1` Yule-Walker-type
/// equations and the AR recursion beyond.
pub(crate) fn autocovariances(ar: &[f64], ma: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let p = ar.len();
    let q = ma.len();
    let theta = |j: usize| if j == 0 { 1.0 } else { ma[j - 1] };
    let mut psi = vec![0.0; q + 1];
    for j in 0..=q {
        let mut v = theta(j);
        for i in 1..=p.min(j) {
            v += ar[i - 1] * psi[j - i];
        }
        psi[j] = v;
    }
    let rhs = |k: usize| -> f64 { (k..=q).map(|j| theta(j) * psi[j - k]).sum() };

    let mut gamma = vec![0.0; max_lag.max(p) + 1];
    if p == 0 {
        for (k, g) in gamma.iter_mut().enumerate() {
            *g = if k <= q { rhs(k) } else { 0.0 };
        }
    } else {
        let mut a = DMatrix::<f64>::zeros(p + 1, p + 1);
        let b = DVector::from_fn(p + 1, |k, _| rhs(k));
        for k in 0..=p {
            a[(k, k)] += 1.0;
            for i in 1..=p {
                let lag = k.abs_diff(i);
                a[(k, lag)] -= ar[i - 1];
            }
        }
        let solved = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Likelihood("autocovariance system is singular".into()))?;
        gamma[..=p].copy_from_slice(solved.as_slice());
        for k in p + 1..gamma.len() {
            let mut v = if k <= q { rhs(k) } else { 0.0 };
            for i in 1..=p {
                v += ar[i - 1] * gamma[k - i];
            }
            gamma[k] = v;
        }
    }
    if !(gamma[0] > 0.0) || gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::Likelihood(
            "autocovariances are not those of a stationary process".into(),
        ));
    }
    gamma.truncate(max_lag + 1);
    Ok(gamma)
}

/// One pass of the innovations algorithm over `x`, extended `extra` steps
/// past the data for forecasting.
pub(crate) struct InnovationsRun {
    /// Predictor of the observation at each time, data span followed by
    /// the `extra` forecasts.
    pub predictions: Vec<f64>,
    /// Relative prediction variance at each time (multiply by σ²).
    pub variances: Vec<f64>,
    n: usize,
}

impl InnovationsRun {
    pub fn new(ar: &[f64], ma: &[f64], x: &[f64], extra: usize) -> Result<Self> {
        let p = ar.len();
        let q = ma.len();
        let m = p.max(q);
        let gamma = autocovariances(ar, ma, m)?;
        let theta0 = |j: usize| if j == 0 { 1.0 } else { ma[j - 1] };

        // Covariance of the transformed process, 1-based indices.
        let kappa = |i: usize, j: usize| -> f64 {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            let h = hi - lo;
            if hi <= m {
                gamma[h]
            } else if lo <= m {
                if h > q {
                    0.0
                } else {
                    let mut v = gamma[h];
                    for r in 1..=p {
                        v -= ar[r - 1] * gamma[r.abs_diff(h)];
                    }
                    v
                }
            } else if h <= q {
                (0..=q - h).map(|r| theta0(r) * theta0(r + h)).sum()
            } else {
                0.0
            }
        };

        let n = x.len();
        let total = n + extra;
        let mut v = Vec::with_capacity(total);
        // theta[t][j-1] = θ_{t,j}; rows past m keep only j ≤ q.
        let mut theta: Vec<Vec<f64>> = Vec::with_capacity(total);
        v.push(kappa(1, 1));
        theta.push(Vec::new());
        for t in 1..total {
            let len = if t >= m { q.min(t) } else { t };
            let lo = t - len;
            let mut row = vec![0.0; len];
            for k in lo..t {
                let mut acc = kappa(t + 1, k + 1);
                let row_k = &theta[k];
                let i_start = lo.max(k.saturating_sub(row_k.len()));
                for i in i_start..k {
                    acc -= row_k[k - i - 1] * row[t - i - 1] * v[i];
                }
                row[t - k - 1] = acc / v[k];
            }
            let mut vt = kappa(t + 1, t + 1);
            for k in lo..t {
                let c = row[t - k - 1];
                vt -= c * c * v[k];
            }
            if !(vt > 0.0) || !vt.is_finite() {
                return Err(Error::Likelihood(format!(
                    "innovation variance non-positive at step {t}"
                )));
            }
            v.push(vt);
            theta.push(row);
        }

        // Predictors: observed values inside the data span, forecasts beyond.
        let mut predictions = vec![0.0; total];
        let mut innovations = vec![0.0; total];
        let mut level = vec![0.0; total];
        for t in 0..total {
            // Observation at 0-based time t is X_{t+1}; its predictor uses row t.
            let row = &theta[t];
            let mut pred = 0.0;
            if t >= m {
                for i in 1..=p {
                    pred += ar[i - 1] * level[t - i];
                }
            }
            for (j, c) in row.iter().enumerate() {
                pred += c * innovations[t - j - 1];
            }
            predictions[t] = pred;
            if t < n {
                innovations[t] = x[t] - pred;
                level[t] = x[t];
            } else {
                level[t] = pred;
            }
        }
        Ok(Self {
            predictions,
            variances: v,
            n,
        })
    }

    /// In-sample one-step prediction errors.
    pub fn residuals<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        x.iter().zip(&self.predictions[..self.n]).map(|(a, b)| a - b)
    }

    /// `(Σ e²/v, Σ ln v)` over the data span.
    pub fn sums(&self, x: &[f64]) -> (f64, f64) {
        let mut ss = 0.0;
        let mut log_det = 0.0;
        for (e, v) in self.residuals(x).zip(&self.variances) {
            ss += e * e / v;
            log_det += v.ln();
        }
        (ss, log_det)
    }

    /// Forecasts beyond the data span.
    pub fn forecasts(&self) -> &[f64] {
        &self.predictions[self.n..]
    }
}

/// Rejects coefficient sets that are non-stationary in either AR factor.
pub(crate) fn check_admissible(coef: &CoefficientSet) -> Result<()> {
    for f in [Factor::Ar, Factor::SeasonalAr] {
        if !is_stationary(coef.factor(f)) {
            return Err(Error::Likelihood(format!(
                "{} polynomial has a root on or inside the unit circle",
                f.prefix()
            )));
        }
    }
    Ok(())
}

/// Concentrated likelihood pieces at given coefficients.
pub(crate) struct Concentrated {
    pub loglik: f64,
    pub sigma2: f64,
    pub residuals: Vec<f64>,
}

pub(crate) fn concentrated(spec: &SarimaSpec, coef: &CoefficientSet, x: &[f64]) -> Result<Concentrated> {
    check_admissible(coef)?;
    let (ar, ma) = expand_polynomials(spec, coef);
    let run = InnovationsRun::new(&ar, &ma, x, 0)?;
    let (ss, log_det) = run.sums(x);
    let n = x.len() as f64;
    let sigma2 = ss / n;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Likelihood("zero residual variance".into()));
    }
    let loglik = -0.5 * (n * (2.0 * PI * sigma2).ln() + log_det + n);
    Ok(Concentrated {
        loglik,
        sigma2,
        residuals: run.residuals(x).collect(),
    })
}

/// Concentrated log-likelihood only; the optimizer's objective.
pub(crate) fn concentrated_loglik(spec: &SarimaSpec, coef: &CoefficientSet, x: &[f64]) -> Result<f64> {
    check_admissible(coef)?;
    let (ar, ma) = expand_polynomials(spec, coef);
    let run = InnovationsRun::new(&ar, &ma, x, 0)?;
    let (ss, log_det) = run.sums(x);
    let n = x.len() as f64;
    let sigma2 = ss / n;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Likelihood("zero residual variance".into()));
    }
    Ok(-0.5 * (n * (2.0 * PI * sigma2).ln() + log_det + n))
}

/// Exact Gaussian log-likelihood of the ARMA part of `spec` on an already
/// differenced series, at innovation variance `sigma2`.
pub fn log_likelihood(
    spec: &SarimaSpec,
    coef: &CoefficientSet,
    sigma2: f64,
    diffed: &MonthlySeries,
) -> Result<f64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Range(format!("sigma2 must be positive, got {sigma2}")));
    }
    if !coef.matches(spec) {
        return Err(Error::Validation("coefficients do not match the model orders and mask".into()));
    }
    check_admissible(coef)?;
    let x = diffed.values();
    let (ar, ma) = expand_polynomials(spec, coef);
    let run = InnovationsRun::new(&ar, &ma, x, 0)?;
    let (ss, log_det) = run.sums(x);
    let n = x.len() as f64;
    Ok(-0.5 * (n * (2.0 * PI * sigma2).ln() + log_det + ss / sigma2))
}
