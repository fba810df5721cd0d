//! Gradient ascent with Armijo backtracking, shared by the dense and
//! Nystrom-structured marginal-likelihood fits.

use crate::error::{Error, Result};

pub const ARMIJO_C: f64 = 1e-4;
const MAX_REJECTIONS: usize = 60;

#[derive(Debug, Clone)]
pub struct AscentOptions {
    pub max_iters: usize,
    /// Convergence threshold on the gradient infinity norm.
    pub tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            max_iters: 200,
            tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AscentOutcome {
    pub params: Vec<f64>,
    pub value: f64,
    /// Objective after the initial evaluation and each accepted step.
    pub history: Vec<f64>,
    pub iterations: usize,
}

/// Maximizes `eval` (value, gradient) from `init`. Steps walk the gradient
/// with halving until the Armijo test passes; a step that evaluates to NaN
/// is rejected, and sixty consecutive NaN rejections abort the fit.
pub fn ascend<F>(mut eval: F, init: Vec<f64>, opts: &AscentOptions) -> Result<AscentOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let (mut value, mut grad) = eval(&init)?;
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut params = init;
    let mut history = vec![value];
    let mut iterations = 0;

    for _ in 0..opts.max_iters {
        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm <= opts.tol {
            break;
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let mut step = 1.0;
        let mut accepted = false;
        let mut saw_nan = false;
        for _ in 0..MAX_REJECTIONS {
            let candidate: Vec<f64> = params
                .iter()
                .zip(&grad)
                .map(|(p, g)| p + step * g)
                .collect();
            match eval(&candidate) {
                Ok((v, g)) if v.is_finite() && v >= value + ARMIJO_C * step * g2 => {
                    params = candidate;
                    value = v;
                    grad = g;
                    accepted = true;
                    break;
                }
                Ok((v, _)) => {
                    saw_nan |= v.is_nan();
                    step *= 0.5;
                }
                Err(_) => {
                    // Singular system at this step; back off like a NaN.
                    step *= 0.5;
                }
            }
        }
        iterations += 1;
        if !accepted {
            if saw_nan {
                return Err(Error::NonFinite);
            }
            // Line search exhausted without improvement: numerically flat.
            break;
        }
        history.push(value);
    }

    Ok(AscentOutcome {
        params,
        value,
        history,
        iterations,
    })
}
