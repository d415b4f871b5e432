//! Checks shared by the property and acceptance suites.
//!
//! The likelihood oracle here deliberately avoids every routine of the
//! library: autocovariances come from a long psi-weight sum and the density
//! from a dense Cholesky factorization.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_sarima::forecasting::forecast;
use sparse_sarima::sarima::{fit, log_likelihood, simulate, CoefficientSet, Factor, FittedModel, SarimaSpec, Slot};
use sparse_sarima::series::{difference_chain, integrate};
use sparse_sarima::{MonthIndex, MonthlySeries};

/// `(1 + Σ c_i B^i)` products written by hand; `sign` is −1 for AR factors.
fn factor_product(short: &[f64], seasonal: &[f64], s: usize, sign: f64) -> Vec<f64> {
    let mut a = vec![0.0; short.len() + 1];
    a[0] = 1.0;
    for (i, c) in short.iter().enumerate() {
        a[i + 1] = sign * c;
    }
    let mut b = vec![0.0; seasonal.len() * s + 1];
    b[0] = 1.0;
    for (j, c) in seasonal.iter().enumerate() {
        b[(j + 1) * s] = sign * c;
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Autocovariances γ(0..n) of the ARMA part at innovation variance `sigma2`,
/// by summing `terms` psi weights.
pub fn psi_autocovariances(spec: &SarimaSpec, coef: &CoefficientSet, sigma2: f64, n: usize, terms: usize) -> Vec<f64> {
    let s = spec.period();
    let phi = factor_product(coef.factor(Factor::Ar), coef.factor(Factor::SeasonalAr), s, -1.0);
    let theta = factor_product(coef.factor(Factor::Ma), coef.factor(Factor::SeasonalMa), s, 1.0);
    // phi(B) psi(B) = theta(B)
    let mut psi = vec![0.0; terms];
    for j in 0..terms {
        let mut v = theta.get(j).copied().unwrap_or(0.0);
        for i in 1..phi.len().min(j + 1) {
            v -= phi[i] * psi[j - i];
        }
        psi[j] = v;
    }
    (0..n)
        .map(|h| sigma2 * (0..terms - h).map(|j| psi[j] * psi[j + h]).sum::<f64>())
        .collect()
}

/// Direct multivariate-normal log density of `x` under the ARMA part.
pub fn oracle_loglik(spec: &SarimaSpec, coef: &CoefficientSet, sigma2: f64, x: &[f64]) -> f64 {
    let n = x.len();
    let gamma = psi_autocovariances(spec, coef, sigma2, n, 20_000);
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    let chol = cov.cholesky().expect("autocovariance matrix is positive definite");
    let l = chol.l();
    let log_det: f64 = (0..n).map(|i| 2.0 * l[(i, i)].ln()).sum();
    let z = chol.solve(&DVector::from_column_slice(x));
    let quad = DVector::from_column_slice(x).dot(&z);
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

/// Random coefficients with Σ|c| < 0.8 in every factor, so each factor is
/// stationary and invertible by the triangle inequality.
pub fn random_coefficients(spec: &SarimaSpec, rng: &mut impl Rng) -> CoefficientSet {
    let mut coef = CoefficientSet::zeros(spec);
    for f in Factor::ALL {
        let free: Vec<Slot> = spec.free_slots().into_iter().filter(|s| s.factor == f).collect();
        if free.is_empty() {
            continue;
        }
        let budget = 0.79 / free.len() as f64;
        for slot in free {
            coef.set(slot, rng.random_range(-budget..budget)).unwrap();
        }
    }
    coef
}

/// Every spec with p, q ≤ 2, P, Q ≤ 1, period in {1, 2, 3, 4, 6, 12} and
/// total lag span p + sP + q + sQ ≤ 14, plus masked variants.
pub fn oracle_specs() -> Vec<SarimaSpec> {
    let mut out = Vec::new();
    for s in [1usize, 2, 3, 4, 6, 12] {
        for p in 0..=2 {
            for q in 0..=2 {
                for sp in 0..=1 {
                    for sq in 0..=1 {
                        if p + s * sp + q + s * sq > 14 {
                            continue;
                        }
                        out.push(SarimaSpec::new([p, 0, q], [sp, 0, sq], s).unwrap());
                    }
                }
            }
        }
    }
    for text in [
        "(2,0,0)x(0,0,0)1[ar1=0]",
        "(0,0,2)x(0,0,0)1[ma1=0]",
        "(2,0,2)x(0,0,0)1[ar2=0,ma1=0]",
        "(0,0,1)x(2,0,0)4[sar1=0]",
        "(1,0,0)x(3,0,0)4[sar2=0]",
        "(0,0,1)x(3,0,0)3[sar3=0]",
    ] {
        out.push(text.parse().unwrap());
    }
    out
}

fn origin() -> MonthIndex {
    MonthIndex::new(2000, 1).unwrap()
}

/// Largest |innovations − oracle| over every oracle spec and n = 1..=8.
pub fn likelihood_oracle_gap(seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for spec in oracle_specs() {
        let coef = random_coefficients(&spec, &mut rng);
        let sigma2 = rng.random_range(0.5..2.0);
        let data: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        let gamma = psi_autocovariances(&spec, &coef, sigma2, 8, 20_000);
        for n in 1..=8 {
            let x = &data[..n];
            let series = MonthlySeries::new(origin(), x.to_vec()).unwrap();
            let ll = log_likelihood(&spec, &coef, sigma2, &series).unwrap();
            let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
            let chol = cov.cholesky().unwrap();
            let l = chol.l();
            let log_det: f64 = (0..n).map(|i| 2.0 * l[(i, i)].ln()).sum();
            let v = DVector::from_column_slice(x);
            let quad = v.dot(&chol.solve(&v));
            let oracle = -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad);
            worst = worst.max((ll - oracle).abs());
            cases += 1;
        }
    }
    (worst, cases)
}

/// Largest round-trip error, relative to each series' magnitude, of difference_chain then integrate.
pub fn round_trip_gap(seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let d = rng.random_range(0..=2);
        let big_d = rng.random_range(0..=1);
        let s = if rng.random_bool(0.5) { 4 } else { 12 };
        let n = d + big_d * s + rng.random_range(1..60);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1e6..1e6)).collect();
        let x = MonthlySeries::new(origin(), v.clone()).unwrap();
        let (dx, ctx) = difference_chain(&x, d, big_d, s).unwrap();
        let back = integrate(&dx, &ctx).unwrap();
        let scale = v.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        for (a, b) in back.values().iter().zip(&v) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    worst
}

pub fn model3() -> SarimaSpec {
    "(0,1,1)x(4,1,0)12[sar3=0]".parse().unwrap()
}

/// Coefficients reported for the 2009-01..2018-12 fit of Model3.
pub fn model3_published() -> CoefficientSet {
    let spec = model3();
    CoefficientSet::from_free(&spec, &[-0.6960, -0.6535, -0.3670, -0.2897]).unwrap()
}

/// Max |estimate − truth| after fitting Model3 to `n` simulated months.
pub fn simulate_fit_gap(n: usize, seed: u64) -> (f64, FittedModel) {
    let spec = model3();
    let truth = model3_published();
    let y = simulate(&spec, &truth, 1.0, n, seed).unwrap();
    let m = fit(&spec, &y).unwrap();
    let gap = m
        .coefficients()
        .free_values(&spec)
        .iter()
        .zip(truth.free_values(&spec))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (gap, m)
}

/// Fraction of `trials` one-step 95% intervals that cover the realized
/// value, for a known airline-type model.
pub fn one_step_coverage(trials: usize, seed: u64) -> f64 {
    let spec: SarimaSpec = "(0,1,1)x(1,1,0)12".parse().unwrap();
    let coef = CoefficientSet::from_free(&spec, &[-0.5, -0.4]).unwrap();
    let n = 200;
    let mut hits = 0;
    for t in 0..trials {
        let y = simulate(&spec, &coef, 4.0, n + 1, seed + t as u64).unwrap();
        let train = MonthlySeries::new(y.start(), y.values()[..n].to_vec()).unwrap();
        let model = FittedModel::from_coefficients(&spec, coef.clone(), &train).unwrap();
        let f = forecast(&model, 1, &[0.95]).unwrap();
        let band = f.interval(0.95).unwrap();
        let actual = y.values()[n];
        if band.lower[0] <= actual && actual <= band.upper[0] {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}

/// True when every wider interval contains the narrower one and widths
/// never shrink with the horizon.
pub fn intervals_nest(model: &FittedModel, h: usize) -> bool {
    let levels = [0.5, 0.8, 0.9, 0.95, 0.99];
    let f = forecast(model, h, &levels).unwrap();
    let nested = f.intervals.windows(2).all(|w| {
        (0..h).all(|k| {
            w[1].lower[k] <= w[0].lower[k] && w[0].upper[k] <= w[1].upper[k] && w[0].lower[k] <= f.point[k]
        })
    });
    let widening = f
        .intervals
        .iter()
        .all(|band| (1..h).all(|k| band.upper[k] - band.lower[k] >= band.upper[k - 1] - band.lower[k - 1] - 1e-9));
    nested && widening
}
