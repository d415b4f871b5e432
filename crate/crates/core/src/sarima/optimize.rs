//! Quasi-Newton minimization with central-difference gradients.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub(crate) struct BfgsOptions {
    pub max_iter: usize,
    /// Converged once the gradient max-norm falls below this.
    pub grad_tol: f64,
    /// Accepted as converged when the line search stalls below this norm.
    pub stall_tol: f64,
    pub fd_step: f64,
    /// Largest allowed change of any coordinate in one step.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 400,
            grad_tol: 1e-7,
            stall_tol: 1e-4,
            fd_step: 1e-5,
            max_step: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

/// Central-difference gradient. Non-finite neighbours fall back to a
/// one-sided difference.
pub(crate) fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            match (up.is_finite(), down.is_finite()) {
                (true, true) => (up - down) / (2.0 * h),
                (true, false) => (up - fx) / h,
                (false, true) => (fx - down) / h,
                (false, false) => 0.0,
            }
        })
        .collect()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Minimize `f` from `x0`. `f` returns `+∞` outside its domain.
pub(crate) fn bfgs<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    if n == 0 || !fx.is_finite() {
        return Minimum {
            x: x0.to_vec(),
            value: fx,
            converged: n == 0 && fx.is_finite(),
        };
    }
    let mut g = DVector::from_vec(gradient(f, x.as_slice(), fx, opts.fd_step));
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut first = true;

    for _ in 0..opts.max_iter {
        let gnorm = max_norm(g.as_slice());
        if gnorm < opts.grad_tol {
            return Minimum {
                x: x.as_slice().to_vec(),
                value: fx,
                converged: true,
            };
        }
        let mut dir = -(&h_inv * &g);
        if dir.dot(&g) >= 0.0 {
            h_inv = DMatrix::identity(n, n);
            dir = -g.clone();
        }
        let biggest = max_norm(dir.as_slice());
        if biggest > opts.max_step {
            dir *= opts.max_step / biggest;
        }
        let slope = dir.dot(&g);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial = &x + alpha * &dir;
            let ft = f(trial.as_slice());
            if ft.is_finite() && ft <= fx + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            return Minimum {
                x: x.as_slice().to_vec(),
                value: fx,
                converged: gnorm < opts.stall_tol,
            };
        };
        let g_new = DVector::from_vec(gradient(f, x_new.as_slice(), f_new, opts.fd_step));
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if first {
                h_inv *= sy / y.dot(&y);
                first = false;
            }
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - rho * &s * y.transpose();
            let right = &eye - rho * &y * s.transpose();
            h_inv = left * h_inv * right + rho * &s * s.transpose();
        }
        let stalled = (fx - f_new).abs() <= 1e-15 * (1.0 + fx.abs());
        x = x_new;
        fx = f_new;
        g = g_new;
        if stalled && max_norm(g.as_slice()) < opts.stall_tol {
            return Minimum {
                x: x.as_slice().to_vec(),
                value: fx,
                converged: true,
            };
        }
    }
    let converged = max_norm(g.as_slice()) < opts.stall_tol;
    Minimum {
        x: x.as_slice().to_vec(),
        value: fx,
        converged,
    }
}
