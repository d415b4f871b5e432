//! Lag-polynomial arithmetic.
//!
//! AR coefficients follow `1 − Σ φ_i B^i`, MA coefficients `1 + Σ θ_i B^i`.
//! Coefficient vectors omit the unit constant term: element `k` is lag `k+1`.

use super::spec::{CoefficientSet, Factor, SarimaSpec};

/// Expanded `φ(B)Φ(B^s)` and `θ(B)Θ(B^s)` coefficients, trailing zeros trimmed.
pub fn expand_polynomials(spec: &SarimaSpec, coef: &CoefficientSet) -> (Vec<f64>, Vec<f64>) {
    let s = spec.period();
    let ar = multiply_ar(coef.factor(Factor::Ar), coef.factor(Factor::SeasonalAr), s);
    let ma = multiply_ma(coef.factor(Factor::Ma), coef.factor(Factor::SeasonalMa), s);
    (trim(ar), trim(ma))
}

fn trim(mut v: Vec<f64>) -> Vec<f64> {
    while v.last() == Some(&0.0) {
        v.pop();
    }
    v
}

/// Spreads seasonal coefficients onto lags `s, 2s, ...`.
fn spread(seasonal: &[f64], s: usize) -> Vec<f64> {
    let mut out = vec![0.0; seasonal.len() * s];
    for (j, &c) in seasonal.iter().enumerate() {
        out[(j + 1) * s - 1] = c;
    }
    out
}

/// Full polynomial (with leading 1) to the product of two full polynomials.
pub(crate) fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `[1, -φ_1, ..., -φ_p]` for AR-convention coefficients.
pub(crate) fn ar_full(coefs: &[f64]) -> Vec<f64> {
    std::iter::once(1.0).chain(coefs.iter().map(|c| -c)).collect()
}

fn ma_full(coefs: &[f64]) -> Vec<f64> {
    std::iter::once(1.0).chain(coefs.iter().copied()).collect()
}

fn multiply_ar(nonseasonal: &[f64], seasonal: &[f64], s: usize) -> Vec<f64> {
    let prod = convolve(&ar_full(nonseasonal), &ar_full(&spread(seasonal, s)));
    prod[1..].iter().map(|c| -c).collect()
}

fn multiply_ma(nonseasonal: &[f64], seasonal: &[f64], s: usize) -> Vec<f64> {
    let prod = convolve(&ma_full(nonseasonal), &ma_full(&spread(seasonal, s)));
    prod[1..].to_vec()
}

/// AR-convention coefficients of `φ(B)Φ(B^s)(1−B)^d(1−B^s)^D`.
pub(crate) fn integrated_ar(spec: &SarimaSpec, ar: &[f64]) -> Vec<f64> {
    let mut full = ar_full(ar);
    for _ in 0..spec.d() {
        full = convolve(&full, &[1.0, -1.0]);
    }
    let mut seasonal = vec![0.0; spec.period() + 1];
    seasonal[0] = 1.0;
    seasonal[spec.period()] = -1.0;
    for _ in 0..spec.seasonal_d() {
        full = convolve(&full, &seasonal);
    }
    full[1..].iter().map(|c| -c).collect()
}

/// Maps partial autocorrelations in (−1, 1) to AR coefficients
/// (Levinson-Durbin recursion).
pub(crate) fn pacf_to_ar(partial: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(partial.len());
    for &r in partial {
        let prev = phi.clone();
        for j in 0..prev.len() {
            phi[j] = prev[j] - r * prev[prev.len() - 1 - j];
        }
        phi.push(r);
    }
    phi
}

/// Inverse of [`pacf_to_ar`]. Returns `None` unless the polynomial is
/// strictly stationary (every partial autocorrelation inside (−1, 1)).
pub(crate) fn ar_to_pacf(coefs: &[f64]) -> Option<Vec<f64>> {
    let mut phi = coefs.to_vec();
    let mut partial = vec![0.0; coefs.len()];
    for k in (0..coefs.len()).rev() {
        let r = phi[k];
        if !r.is_finite() || r.abs() >= 1.0 {
            return None;
        }
        partial[k] = r;
        let denom = 1.0 - r * r;
        let prev = phi[..k].to_vec();
        for j in 0..k {
            phi[j] = (prev[j] + r * prev[k - 1 - j]) / denom;
        }
        phi.truncate(k);
    }
    Some(partial)
}

/// True when `1 − Σ φ_i z^i` has all roots outside the unit circle.
pub(crate) fn is_stationary(coefs: &[f64]) -> bool {
    ar_to_pacf(coefs).is_some()
}

/// True when `1 + Σ θ_i z^i` has all roots outside the unit circle.
pub(crate) fn is_invertible(coefs: &[f64]) -> bool {
    let negated: Vec<f64> = coefs.iter().map(|c| -c).collect();
    is_stationary(&negated)
}

/// ψ_0..ψ_{len−1} of `θ(B)/φ(B)`.
pub(crate) fn psi_weights(ar: &[f64], ma: &[f64], len: usize) -> Vec<f64> {
    let mut psi = vec![0.0; len];
    for j in 0..len {
        let mut v = if j == 0 {
            1.0
        } else {
            ma.get(j - 1).copied().unwrap_or(0.0)
        };
        for (i, &phi) in ar.iter().enumerate().take(j) {
            v += phi * psi[j - 1 - i];
        }
        psi[j] = v;
    }
    psi
}
