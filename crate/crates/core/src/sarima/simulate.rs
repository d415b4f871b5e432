use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::likelihood::check_admissible;
use super::polynomial::expand_polynomials;
use super::spec::{CoefficientSet, SarimaSpec};
use crate::error::{Error, Result};
use crate::series::{integrate, DiffContext, MonthIndex, MonthlySeries};

/// Draws `n` observations of the model, starting 2000-01.
///
/// The ARMA part runs from zero through a burn-in of ten times the lag
/// span (at least 200 steps) and is integrated from zero starting levels
/// across the burn-in, so no output value is pinned to a start level.
pub fn simulate(spec: &SarimaSpec, coef: &CoefficientSet, sigma2: f64, n: usize, seed: u64) -> Result<MonthlySeries> {
    if n == 0 {
        return Err(Error::Range("simulation length must be positive".into()));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Range(format!("sigma2 must be positive, got {sigma2}")));
    }
    if !coef.matches(spec) {
        return Err(Error::Validation("coefficients do not match the model orders and mask".into()));
    }
    check_admissible(coef).map_err(|e| Error::Simulation(e.to_string()))?;

    let (ar, ma) = expand_polynomials(spec, coef);
    let burn = (10 * (ar.len() + ma.len() + 1)).max(200);
    let consumed = spec.consumed();
    let total = burn + n;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::Range(e.to_string()))?;
    let e: Vec<f64> = (0..total).map(|_| normal.sample(&mut rng)).collect();
    let mut x = vec![0.0; total];
    for t in 0..total {
        let mut v = e[t];
        for (i, c) in ar.iter().enumerate().take(t) {
            v += c * x[t - 1 - i];
        }
        for (j, c) in ma.iter().enumerate().take(t) {
            v += c * e[t - 1 - j];
        }
        x[t] = v;
    }

    let origin = MonthIndex::new(2000, 1)?;
    let prefixes = std::iter::repeat_n(vec![0.0], spec.d())
        .chain(std::iter::repeat_n(vec![0.0; spec.period()], spec.seasonal_d()))
        .collect();
    let ctx = DiffContext::from_parts(spec.d(), spec.seasonal_d(), spec.period(), origin, prefixes)?;
    let diffed = MonthlySeries::new(origin.add_months(consumed as i64), x)?;
    let mut values = integrate(&diffed, &ctx)?.into_values();
    MonthlySeries::new(origin, values.split_off(values.len() - n))
}
