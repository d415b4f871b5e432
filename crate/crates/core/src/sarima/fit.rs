//! Maximum-likelihood estimation.
//!
//! The free coefficients of each factor are searched in an unconstrained
//! space. A factor without pinned slots goes through the partial
//! autocorrelation map (`tanh` then Levinson-Durbin), which covers exactly
//! the stationary (AR) or invertible (MA) region. A factor with pinned
//! slots cannot keep its zeros under that map, so its free coefficients are
//! searched directly and the stationarity check rejects points outside the
//! region.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::likelihood::{concentrated, concentrated_loglik};
use super::optimize::{bfgs, gradient, BfgsOptions, Minimum};
use super::polynomial::{ar_to_pacf, is_invertible, is_stationary, pacf_to_ar};
use super::spec::{CoefficientSet, Factor, SarimaSpec, Slot};
use crate::error::{Error, Result};
use crate::identification::durbin_levinson;
use crate::series::{difference_chain, DiffContext, MonthlySeries};
use crate::stats::{autocorrelations, ols};

/// AIC, BIC and small-sample corrected AIC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub bic: f64,
    pub aicc: f64,
}

/// `k` counts every estimated parameter, including the innovation variance.
pub fn information_criteria(loglik: f64, k: usize, n: f64) -> Result<InformationCriteria> {
    let kf = k as f64;
    if n <= kf + 1.0 {
        return Err(Error::Range(format!(
            "AICc undefined: n = {n} must exceed k + 1 = {}",
            k + 1
        )));
    }
    let aic = -2.0 * loglik + 2.0 * kf;
    let bic = -2.0 * loglik + kf * n.ln();
    let aicc = aic + 2.0 * kf * (kf + 1.0) / (n - kf - 1.0);
    Ok(InformationCriteria { aic, bic, aicc })
}

/// One row of a coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub slot: Slot,
    pub value: f64,
    /// `None` when pinned (reported as 0) or when the information matrix
    /// was not positive definite.
    pub std_error: Option<f64>,
    pub masked: bool,
}

impl CoefficientEstimate {
    /// `|coef| ≥ 2·se`; `None` when no standard error is available.
    pub fn is_significant(&self) -> Option<bool> {
        if self.masked {
            return None;
        }
        self.std_error.map(|se| self.value.abs() >= 2.0 * se)
    }
}

/// Outcome of one optimizer start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub label: String,
    pub initial_loglik: Option<f64>,
    pub final_loglik: Option<f64>,
    pub converged: bool,
}

/// A model estimated on a training window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    spec: SarimaSpec,
    coef: CoefficientSet,
    /// Standard errors of the free coefficients, in free-slot order.
    std_errors: Option<Vec<f64>>,
    sigma2: f64,
    loglik: f64,
    criteria: InformationCriteria,
    residuals: MonthlySeries,
    ctx: DiffContext,
    n_effective: usize,
    train: MonthlySeries,
    starts: Vec<StartRecord>,
}

impl FittedModel {
    pub fn spec(&self) -> &SarimaSpec {
        &self.spec
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coef
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    pub fn aic(&self) -> f64 {
        self.criteria.aic
    }

    pub fn bic(&self) -> f64 {
        self.criteria.bic
    }

    pub fn aicc(&self) -> f64 {
        self.criteria.aicc
    }

    pub fn criteria(&self) -> InformationCriteria {
        self.criteria
    }

    /// One-step innovations on the differenced scale.
    pub fn residuals(&self) -> &MonthlySeries {
        &self.residuals
    }

    pub fn diff_context(&self) -> &DiffContext {
        &self.ctx
    }

    pub fn n_effective(&self) -> usize {
        self.n_effective
    }

    /// Training series on the original scale.
    pub fn train(&self) -> &MonthlySeries {
        &self.train
    }

    /// Parameters counted by the information criteria: free coefficients + 1.
    pub fn parameter_count(&self) -> usize {
        self.spec.free_count() + 1
    }

    pub fn starts(&self) -> &[StartRecord] {
        &self.starts
    }

    pub fn std_errors_available(&self) -> bool {
        self.std_errors.is_some()
    }

    pub fn std_error(&self, slot: Slot) -> Option<f64> {
        let pos = self.spec.free_slots().iter().position(|s| *s == slot)?;
        self.std_errors.as_ref().map(|se| se[pos])
    }

    /// Every slot of the model, pinned ones included.
    pub fn estimates(&self) -> Vec<CoefficientEstimate> {
        self.spec
            .slots()
            .map(|slot| {
                let masked = self.spec.is_masked(slot);
                CoefficientEstimate {
                    slot,
                    value: self.coef.get(slot),
                    std_error: if masked { None } else { self.std_error(slot) },
                    masked,
                }
            })
            .collect()
    }

    /// Evaluates a model at fixed coefficients (innovation variance
    /// concentrated out), without estimating anything.
    pub fn from_coefficients(spec: &SarimaSpec, coef: CoefficientSet, train: &MonthlySeries) -> Result<Self> {
        if !coef.matches(spec) {
            return Err(Error::Validation("coefficients do not match the model orders and mask".into()));
        }
        let (diffed, ctx) = difference_chain(train, spec.d(), spec.seasonal_d(), spec.period())?;
        let c = concentrated(spec, &coef, diffed.values())?;
        assemble(spec, coef, None, c, diffed, ctx, train, Vec::new())
    }

    pub(crate) fn from_stored_parts(parts: StoredParts) -> Result<Self> {
        let model = FittedModel {
            spec: parts.spec,
            coef: parts.coef,
            std_errors: parts.std_errors,
            sigma2: parts.sigma2,
            loglik: parts.loglik,
            criteria: parts.criteria,
            residuals: parts.residuals,
            ctx: parts.ctx,
            n_effective: parts.n_effective,
            train: parts.train,
            starts: parts.starts,
        };
        model.validate()?;
        Ok(model)
    }

    pub(crate) fn to_stored_parts(&self) -> StoredParts {
        StoredParts {
            spec: self.spec.clone(),
            coef: self.coef.clone(),
            std_errors: self.std_errors.clone(),
            sigma2: self.sigma2,
            loglik: self.loglik,
            criteria: self.criteria,
            residuals: self.residuals.clone(),
            ctx: self.ctx.clone(),
            n_effective: self.n_effective,
            train: self.train.clone(),
            starts: self.starts.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Document(m.into()));
        if !self.coef.matches(&self.spec) {
            return bad("coefficients do not match the model orders and mask");
        }
        if self.residuals.len() != self.n_effective {
            return bad("residual count differs from n_effective");
        }
        if self.train.len() != self.n_effective + self.spec.consumed() {
            return bad("training length inconsistent with n_effective");
        }
        if self.ctx.consumed() != self.spec.consumed() || self.ctx.origin() != self.train.start() {
            return bad("differencing context does not match the model");
        }
        if let Some(se) = &self.std_errors {
            if se.len() != self.spec.free_count() {
                return bad("standard error count differs from free coefficient count");
            }
        }
        if !(self.sigma2 > 0.0) {
            return bad("sigma2 must be positive");
        }
        Ok(())
    }
}

/// Plain field bundle used by the model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct StoredParts {
    pub spec: SarimaSpec,
    pub coef: CoefficientSet,
    pub std_errors: Option<Vec<f64>>,
    pub sigma2: f64,
    pub loglik: f64,
    pub criteria: InformationCriteria,
    pub residuals: MonthlySeries,
    pub ctx: DiffContext,
    pub n_effective: usize,
    pub train: MonthlySeries,
    pub starts: Vec<StartRecord>,
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    spec: &SarimaSpec,
    coef: CoefficientSet,
    std_errors: Option<Vec<f64>>,
    c: super::likelihood::Concentrated,
    diffed: MonthlySeries,
    ctx: DiffContext,
    train: &MonthlySeries,
    starts: Vec<StartRecord>,
) -> Result<FittedModel> {
    let n = diffed.len();
    let criteria = information_criteria(c.loglik, spec.free_count() + 1, n as f64)?;
    Ok(FittedModel {
        spec: spec.clone(),
        coef,
        std_errors,
        sigma2: c.sigma2,
        loglik: c.loglik,
        criteria,
        residuals: MonthlySeries::new(diffed.start(), c.residuals)?,
        ctx,
        n_effective: n,
        train: train.clone(),
        starts,
    })
}

struct Block {
    factor: Factor,
    /// 0-based lag positions that are estimated.
    free: Vec<usize>,
    transformed: bool,
}

/// Mapping between optimizer coordinates and coefficient sets.
struct Layout {
    blocks: Vec<Block>,
}

impl Layout {
    fn new(spec: &SarimaSpec) -> Self {
        let blocks = Factor::ALL
            .into_iter()
            .filter(|&f| spec.order(f) > 0)
            .filter_map(|factor| {
                let order = spec.order(factor);
                let free: Vec<usize> = (0..order)
                    .filter(|&i| !spec.is_masked(Slot::new(factor, i + 1)))
                    .collect();
                if free.is_empty() {
                    return None;
                }
                let transformed = free.len() == order;
                Some(Block {
                    factor,
                    free,
                    transformed,
                })
            })
            .collect();
        Self { blocks }
    }

    fn decode(&self, spec: &SarimaSpec, x: &[f64]) -> Option<CoefficientSet> {
        let mut set = CoefficientSet::zeros(spec);
        let mut at = 0;
        for b in &self.blocks {
            let chunk = &x[at..at + b.free.len()];
            at += b.free.len();
            let values: Vec<f64> = if b.transformed {
                let partial: Vec<f64> = chunk.iter().map(|v| v.tanh()).collect();
                if partial.iter().any(|r| r.abs() >= 1.0) {
                    return None;
                }
                let phi = pacf_to_ar(&partial);
                if b.factor.is_autoregressive() {
                    phi
                } else {
                    phi.into_iter().map(|c| -c).collect()
                }
            } else {
                chunk.to_vec()
            };
            for (&i, v) in b.free.iter().zip(values) {
                set.set(Slot::new(b.factor, i + 1), v).ok()?;
            }
        }
        Some(set)
    }

    fn encode(&self, coef: &CoefficientSet) -> Option<Vec<f64>> {
        let mut x = Vec::new();
        for b in &self.blocks {
            let values = coef.factor(b.factor);
            if b.transformed {
                let signed: Vec<f64> = if b.factor.is_autoregressive() {
                    values.to_vec()
                } else {
                    values.iter().map(|c| -c).collect()
                };
                let partial = ar_to_pacf(&signed)?;
                x.extend(partial.iter().map(|r| r.clamp(-0.999, 0.999).atanh()));
            } else {
                x.extend(b.free.iter().map(|&i| values[i]));
            }
        }
        Some(x)
    }
}

/// Shrinks each factor towards zero until it is stationary/invertible.
fn project(spec: &SarimaSpec, coef: &CoefficientSet) -> CoefficientSet {
    let mut out = CoefficientSet::zeros(spec);
    for f in Factor::ALL {
        let mut values = coef.factor(f).to_vec();
        let ok = |v: &[f64]| {
            let admissible = if f.is_autoregressive() {
                is_stationary(v)
            } else {
                is_invertible(v)
            };
            let signed: Vec<f64> = if f.is_autoregressive() {
                v.to_vec()
            } else {
                v.iter().map(|c| -c).collect()
            };
            admissible && ar_to_pacf(&signed).is_some_and(|r| r.iter().all(|x| x.abs() < 0.98))
        };
        let mut tries = 0;
        while !ok(&values) && tries < 200 {
            values.iter_mut().for_each(|v| *v *= 0.9);
            tries += 1;
        }
        if !ok(&values) {
            values.iter_mut().for_each(|v| *v = 0.0);
        }
        for (i, v) in values.into_iter().enumerate() {
            let slot = Slot::new(f, i + 1);
            if !spec.is_masked(slot) {
                out.set(slot, v).expect("free slot");
            }
        }
    }
    out
}

/// Two-stage regression start: a long autoregression estimates the
/// innovations, then the series is regressed on its own lags and the
/// estimated innovations at every free slot's lag. Cross-product lags of
/// the multiplicative structure are ignored.
fn hannan_rissanen(spec: &SarimaSpec, x: &[f64]) -> Option<CoefficientSet> {
    let n = x.len();
    let slots = spec.free_slots();
    if slots.is_empty() {
        return None;
    }
    let lag_of = |s: &Slot| s.index * spec.lag_step(s.factor);
    let needs_innovations = slots.iter().any(|s| !s.factor.is_autoregressive());
    let max_ar_lag = slots
        .iter()
        .filter(|s| s.factor.is_autoregressive())
        .map(lag_of)
        .max()
        .unwrap_or(0);
    let max_ma_lag = slots
        .iter()
        .filter(|s| !s.factor.is_autoregressive())
        .map(lag_of)
        .max()
        .unwrap_or(0);

    let mut innov = vec![0.0; n];
    let mut long_order = 0;
    if needs_innovations {
        long_order = (spec.ar_degree() + spec.ma_degree()).clamp(4, n / 3);
        let r = autocorrelations(x, long_order).ok()?;
        let partial = durbin_levinson(&r, long_order).ok()?;
        let phi = pacf_to_ar(&partial);
        for t in long_order..n {
            innov[t] = x[t] - phi.iter().enumerate().map(|(i, c)| c * x[t - 1 - i]).sum::<f64>();
        }
    }
    let first = max_ar_lag.max(if needs_innovations { long_order + max_ma_lag } else { 0 });
    if n <= first + slots.len() + 2 {
        return None;
    }
    let rows = n - first;
    let design = DMatrix::from_fn(rows, slots.len(), |r, c| {
        let t = first + r;
        let s = &slots[c];
        if s.factor.is_autoregressive() {
            x[t - lag_of(s)]
        } else {
            innov[t - lag_of(s)]
        }
    });
    let target = DVector::from_column_slice(&x[first..]);
    let fit = ols(&design, &target).ok()?;
    if fit.coefficients.iter().any(|c| !c.is_finite()) {
        return None;
    }
    let raw = CoefficientSet::from_free(spec, &fit.coefficients).ok()?;
    Some(project(spec, &raw))
}

/// Negative log-likelihood as a function of the free coefficients.
fn nll_free(spec: &SarimaSpec, x: &[f64], free: &[f64]) -> f64 {
    CoefficientSet::from_free(spec, free)
        .ok()
        .and_then(|c| concentrated_loglik(spec, &c, x).ok())
        .map_or(f64::INFINITY, |ll| -ll)
}

/// Observed information via central differences in coefficient space.
fn observed_information(spec: &SarimaSpec, x: &[f64], theta: &[f64]) -> Option<DMatrix<f64>> {
    let k = theta.len();
    let f = |v: &[f64]| nll_free(spec, x, v);
    let f0 = f(theta);
    let h: Vec<f64> = theta.iter().map(|t| 1e-4 * t.abs().max(1.0)).collect();
    let mut hess = DMatrix::zeros(k, k);
    let mut probe = theta.to_vec();
    for i in 0..k {
        probe[i] = theta[i] + h[i];
        let up = f(&probe);
        probe[i] = theta[i] - h[i];
        let down = f(&probe);
        probe[i] = theta[i];
        hess[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let mut eval = |si: f64, sj: f64| {
                probe[i] = theta[i] + si * h[i];
                probe[j] = theta[j] + sj * h[j];
                let v = f(&probe);
                probe[i] = theta[i];
                probe[j] = theta[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess.iter().all(|v| v.is_finite()).then_some(hess)
}

fn standard_errors(info: DMatrix<f64>) -> Option<Vec<f64>> {
    let k = info.nrows();
    let chol = info.cholesky()?;
    let inv = chol.inverse();
    let se: Vec<f64> = (0..k).map(|i| inv[(i, i)]).map(f64::sqrt).collect();
    se.iter().all(|v| v.is_finite() && *v > 0.0).then_some(se)
}

/// Maximum-likelihood fit on `train` (original scale). The innovation
/// variance is concentrated out; no mean term is estimated.
pub fn fit(spec: &SarimaSpec, train: &MonthlySeries) -> Result<FittedModel> {
    let (diffed, ctx) = difference_chain(train, spec.d(), spec.seasonal_d(), spec.period())?;
    let x = diffed.values();
    let n = x.len();
    let k = spec.free_count();
    if n <= k + 5 {
        return Err(Error::Length {
            needed: spec.consumed() + k + 6,
            got: train.len(),
        });
    }
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Degenerate("differenced series is identically zero".into()));
    }

    if k == 0 {
        let coef = CoefficientSet::zeros(spec);
        let c = concentrated(spec, &coef, x)?;
        return assemble(spec, coef, Some(Vec::new()), c, diffed, ctx, train, Vec::new());
    }

    let layout = Layout::new(spec);
    let nf = n as f64;
    let objective = |v: &[f64]| -> f64 {
        layout
            .decode(spec, v)
            .and_then(|c| concentrated_loglik(spec, &c, x).ok())
            .map_or(f64::INFINITY, |ll| -ll / nf)
    };
    let opts = BfgsOptions::default();

    let mut starts: Vec<(String, CoefficientSet)> = vec![("zero".into(), CoefficientSet::zeros(spec))];
    if let Some(hr) = hannan_rissanen(spec, x) {
        starts.push(("hannan-rissanen".into(), hr));
    }

    let mut records = Vec::new();
    let mut best: Option<Minimum> = None;
    let mut consider = |label: String, coef: &CoefficientSet, best: &mut Option<Minimum>| {
        let Some(x0) = layout.encode(coef) else {
            records.push(StartRecord {
                label,
                initial_loglik: None,
                final_loglik: None,
                converged: false,
            });
            return;
        };
        let f0 = objective(&x0);
        let m = bfgs(&objective, &x0, &opts);
        records.push(StartRecord {
            label,
            initial_loglik: f0.is_finite().then(|| -f0 * nf),
            final_loglik: m.value.is_finite().then(|| -m.value * nf),
            converged: m.converged,
        });
        if m.value.is_finite() && best.as_ref().is_none_or(|b| m.value < b.value) {
            *best = Some(m);
        }
    };
    for (label, coef) in &starts {
        consider(label.clone(), coef, &mut best);
    }
    // Jittered restarts around the incumbent.
    for sign in [1.0, -1.0] {
        let Some(b) = best.as_ref() else { break };
        let Some(center) = layout.decode(spec, &b.x) else { break };
        let free: Vec<f64> = center
            .free_values(spec)
            .iter()
            .enumerate()
            .map(|(i, v)| v + sign * if i % 2 == 0 { 0.1 } else { -0.1 })
            .collect();
        let Ok(raw) = CoefficientSet::from_free(spec, &free) else { break };
        let jittered = project(spec, &raw);
        let label = if sign > 0.0 { "jitter+0.1" } else { "jitter-0.1" };
        consider(label.into(), &jittered, &mut best);
    }

    let Some(mut best) = best else {
        return Err(Error::Fit {
            message: format!("likelihood could not be evaluated from any start for {spec}"),
            best: None,
        });
    };
    if !best.converged {
        let again = bfgs(&objective, &best.x, &opts);
        if again.value <= best.value {
            best = again;
        }
    }
    let coef = layout.decode(spec, &best.x).ok_or_else(|| Error::Fit {
        message: "optimum left the admissible region".into(),
        best: None,
    })?;
    if !best.converged {
        return Err(Error::Fit {
            message: format!("optimizer did not converge for {spec} after all restarts"),
            best: Some(coef.free_values(spec)),
        });
    }

    let c = concentrated(spec, &coef, x)?;
    let theta = coef.free_values(spec);
    let std_errors = observed_information(spec, x, &theta).and_then(standard_errors);
    assemble(spec, coef, std_errors, c, diffed, ctx, train, records)
}

/// Finite-difference gradient of the negative log-likelihood with respect
/// to the free coefficients, at the model's estimates.
pub fn score_at_estimate(model: &FittedModel) -> Result<Vec<f64>> {
    let spec = model.spec();
    let (diffed, _) = difference_chain(model.train(), spec.d(), spec.seasonal_d(), spec.period())?;
    let x = diffed.values();
    let theta = model.coefficients().free_values(spec);
    let f = |v: &[f64]| nll_free(spec, x, v);
    let f0 = f(&theta);
    Ok(gradient(&f, &theta, f0, 1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_by_hand() {
        let c = information_criteria(0.0, 1, std::f64::consts::E.powi(2)).unwrap();
        assert!((c.aic - 2.0).abs() < 1e-12);
        assert!((c.bic - 2.0).abs() < 1e-12);
        let c = information_criteria(-10.0, 0, 50.0).unwrap();
        assert_eq!(c.aic, 20.0);
        assert_eq!(c.bic, 20.0);
        assert!(information_criteria(-10.0, 5, 6.0).is_err());
    }

    #[test]
    fn bic_aic_gap_for_five_parameters() {
        let c = information_criteria(-1433.545, 5, 107.0).unwrap();
        let gap = c.bic - c.aic;
        assert!((gap - 5.0 * (107f64.ln() - 2.0)).abs() < 1e-9);
        assert!((gap - 13.37).abs() < 0.01);
    }

    #[test]
    fn layout_round_trip() {
        let spec: SarimaSpec = "(1,1,1)x(4,1,1)12[sar3=0]".parse().unwrap();
        let layout = Layout::new(&spec);
        let coef = CoefficientSet::from_free(&spec, &[0.3, -0.6, -0.5, -0.3, -0.2, -0.4]).unwrap();
        let x = layout.encode(&coef).unwrap();
        let back = layout.decode(&spec, &x).unwrap();
        for (a, b) in back.free_values(&spec).iter().zip(coef.free_values(&spec)) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(back.get(Slot::new(Factor::SeasonalAr, 3)), 0.0);
    }

    #[test]
    fn projection_restores_stationarity() {
        let spec: SarimaSpec = "(2,0,1)x(0,0,0)1".parse().unwrap();
        let raw = CoefficientSet::from_free(&spec, &[0.9, 0.5, -1.5]).unwrap();
        let p = project(&spec, &raw);
        assert!(is_stationary(p.factor(Factor::Ar)));
        assert!(is_invertible(p.factor(Factor::Ma)));
    }
}
