//! Spectral projected gradient (nonmonotone Barzilai-Borwein steps) on a box.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy)]
pub struct SpgOptions {
    pub max_iter: usize,
    /// Stop when `‖P(x − g) − x‖_∞` falls below this.
    pub tol: f64,
    /// Nonmonotone line-search memory.
    pub memory: usize,
}

impl Default for SpgOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-10,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpgResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(lo, hi);
    }
}

fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&lo, &hi))| ((xi - gi).clamp(lo, hi) - xi).abs())
        .fold(0.0, f64::max)
}

/// Minimizes `f` over `lower ≤ x ≤ upper`. `f` returns the value and writes the gradient.
pub fn minimize<F>(mut f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: SpgOptions) -> SpgResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    const LAMBDA_MIN: f64 = 1e-30;
    const LAMBDA_MAX: f64 = 1e30;
    const GAMMA: f64 = 1e-4;

    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut history = vec![fx; opts.memory.max(1)];
    let mut pg = projected_gradient_norm(&x, &g, lower, upper);
    let mut lambda = if pg > 0.0 { (1.0 / pg).clamp(LAMBDA_MIN, LAMBDA_MAX) } else { 1.0 };

    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut iter = 0;
    while iter < opts.max_iter && pg > opts.tol {
        iter += 1;
        for i in 0..n {
            d[i] = (x[i] - lambda * g[i]).clamp(lower[i], upper[i]) - x[i];
        }
        let gtd: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let fmax = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut alpha = 1.0;
        let mut fnew;
        loop {
            for i in 0..n {
                xn[i] = (x[i] + alpha * d[i]).clamp(lower[i], upper[i]);
            }
            fnew = f(&xn, &mut gn);
            if fnew <= fmax + GAMMA * alpha * gtd || alpha < 1e-16 {
                break;
            }
            // safeguarded quadratic backtracking
            let denom = 2.0 * (fnew - fx - alpha * gtd);
            let trial = if denom > 0.0 { -gtd * alpha * alpha / denom } else { 0.5 * alpha };
            alpha = trial.clamp(0.1 * alpha, 0.5 * alpha);
        }
        if !fnew.is_finite() {
            break;
        }
        let mut sts = 0.0;
        let mut sty = 0.0;
        for i in 0..n {
            let s = xn[i] - x[i];
            let y = gn[i] - g[i];
            sts += s * s;
            sty += s * y;
        }
        core::mem::swap(&mut x, &mut xn);
        core::mem::swap(&mut g, &mut gn);
        fx = fnew;
        let slot = iter % history.len();
        history[slot] = fx;
        pg = projected_gradient_norm(&x, &g, lower, upper);
        if sts == 0.0 {
            break;
        }
        lambda = if sty <= 0.0 { LAMBDA_MAX } else { (sts / sty).clamp(LAMBDA_MIN, LAMBDA_MAX) };
    }
    SpgResult {
        converged: pg <= opts.tol,
        x,
        f: fx,
        iterations: iter,
    }
}
