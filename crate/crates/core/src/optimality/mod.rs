//! First- and second-order certification of two-sum KKT points.
//!
//! The program minimizes `f₀ = −Q₁` subject to `g_k = b_k − √P ≤ 0` and
//! `h = Q₁ − Q₂ + ΔD = 0`, where `Q_m = B_m²/A`. Derivatives are analytic;
//! residuals are reported in `u = b/√P` coordinates so they do not depend on
//! the power scale.

mod oracle;

pub use oracle::{brute_force_min, OracleResult};

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Matrix};
use crate::mse::{aggregates, Aggregates};
use crate::model::{Instance, TxPolicy};
use crate::Result;

/// Signature of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub rho: usize,
    pub eta: usize,
    pub theta: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub licq_ok: bool,
    pub jacobian_rank: usize,
    pub inertia_k: Inertia,
    /// Every active constraint has a strictly positive multiplier.
    pub strict_complementarity: bool,
    pub is_local_min: bool,
    /// Max deviation of the analytic Hessian from central differences of
    /// the analytic gradient, relative to the largest Hessian entry.
    pub hessian_fd_error: f64,
}

/// Positive multipliers below this (in `u`-units) count as zero.
const STRICT_LAMBDA: f64 = 1e-10;

fn membership(instance: &Instance) -> Vec<[f64; 2]> {
    let mut beta = vec![[0.0; 2]; instance.k()];
    for (m, g) in instance.groups.groups().iter().take(2).enumerate() {
        for &k in g {
            beta[k][m] = 1.0;
        }
    }
    beta
}

/// `∇Q₁` and `∇Q₂` with the aggregates they were computed from.
pub fn ratio_gradients(instance: &Instance, b: &[f64]) -> Result<(Aggregates, [Vec<f64>; 2])> {
    let agg = aggregates(instance, &TxPolicy::new(b.to_vec()))?;
    let h = instance.h();
    let beta = membership(instance);
    let a = agg.a;
    let mut grads = [vec![0.0; b.len()], vec![0.0; b.len()]];
    for k in 0..b.len() {
        let alpha = 2.0 * h[k] * h[k] * b[k];
        for m in 0..2 {
            let bm = agg.b[m];
            grads[m][k] = 2.0 * bm * h[k] * beta[k][m] / a - bm * bm * alpha / (a * a);
        }
    }
    Ok((agg, grads))
}

/// `∇f₀ = −∇Q₁`.
pub fn objective_gradient(instance: &Instance, b: &[f64]) -> Result<Vec<f64>> {
    let (_, [g1, _]) = ratio_gradients(instance, b)?;
    Ok(g1.into_iter().map(|v| -v).collect())
}

/// Exact `∇h = ∇Q₁ − ∇Q₂`, valid at any `b`.
pub fn equality_gradient(instance: &Instance, b: &[f64]) -> Result<Vec<f64>> {
    let (_, [g1, g2]) = ratio_gradients(instance, b)?;
    Ok(g1.iter().zip(&g2).map(|(a, c)| a - c).collect())
}

/// `∇h` simplified with `(B₁² − B₂²)/A = −ΔD`; equals [`equality_gradient`]
/// only where the equality constraint holds.
pub fn equality_gradient_on_manifold(instance: &Instance, b: &[f64]) -> Result<Vec<f64>> {
    let agg = aggregates(instance, &TxPolicy::new(b.to_vec()))?;
    let dd = instance.delta_d() as f64;
    let h = instance.h();
    let owners = instance.owners();
    Ok((0..b.len())
        .map(|k| {
            let s = 2.0 * h[k] / agg.a;
            match owners[k] {
                Some(0) => s * (agg.b[0] + h[k] * b[k] * dd),
                Some(1) => -s * (agg.b[1] - h[k] * b[k] * dd),
                _ => 0.0,
            }
        })
        .collect())
}

/// `h(b) = (B₁² − B₂²)/A + ΔD`.
pub fn equality_residual(instance: &Instance, b: &[f64]) -> Result<f64> {
    let agg = aggregates(instance, &TxPolicy::new(b.to_vec()))?;
    Ok((agg.b[0] * agg.b[0] - agg.b[1] * agg.b[1]) / agg.a + instance.delta_d() as f64)
}

/// `∇_b L = ∇f₀ + λ + μ ∇h`.
pub fn lagrangian_gradient(instance: &Instance, b: &[f64], lambda: &[f64], mu: f64) -> Result<Vec<f64>> {
    let (_, [g1, g2]) = ratio_gradients(instance, b)?;
    Ok((0..b.len())
        .map(|k| -g1[k] + lambda[k] + mu * (g1[k] - g2[k]))
        .collect())
}

/// `∇²_b L`. The box constraints are linear, so `λ` does not enter.
pub fn lagrangian_hessian(instance: &Instance, b: &[f64], mu: f64) -> Result<Matrix> {
    let agg = aggregates(instance, &TxPolicy::new(b.to_vec()))?;
    let h = instance.h();
    let beta = membership(instance);
    let n = b.len();
    let a = agg.a;
    let alpha: Vec<f64> = (0..n).map(|k| 2.0 * h[k] * h[k] * b[k]).collect();
    let beta_h: Vec<[f64; 2]> = (0..n).map(|k| [h[k] * beta[k][0], h[k] * beta[k][1]]).collect();
    let weights = [mu - 1.0, -mu];
    let mut out = Matrix::zeros(n, n);
    for j in 0..n {
        for k in 0..=j {
            let mut v = 0.0;
            for m in 0..2 {
                let bm = agg.b[m];
                let mut q = 2.0 * beta_h[j][m] * beta_h[k][m] / a
                    - 2.0 * bm * beta_h[k][m] * alpha[j] / (a * a)
                    - 2.0 * bm * beta_h[j][m] * alpha[k] / (a * a)
                    + 2.0 * bm * bm * alpha[j] * alpha[k] / (a * a * a);
                if j == k {
                    q -= bm * bm * 2.0 * h[k] * h[k] / (a * a);
                }
                v += weights[m] * q;
            }
            out.set(j, k, v);
            out.set(k, j, v);
        }
    }
    Ok(out)
}

/// Active box constraints as unit columns, then `∇h`.
pub fn jacobian(instance: &Instance, b: &[f64], active: &[usize]) -> Result<Matrix> {
    let grad_h = equality_gradient(instance, b)?;
    let n = b.len();
    let cols = active.len() + 1;
    let mut j = Matrix::zeros(n, cols);
    for (c, &k) in active.iter().enumerate() {
        j.set(k, c, 1.0);
    }
    for (k, v) in grad_h.iter().enumerate() {
        j.set(k, cols - 1, *v);
    }
    Ok(j)
}

/// Full column rank test with singular-value threshold `1e-10 σ_max`.
pub fn licq(j: &Matrix) -> (bool, usize) {
    let r = linalg::rank(j, 1e-10);
    (r == j.cols, r)
}

/// Inertia of `[[H, J], [Jᵀ, 0]]` with zero threshold `1e-9 max|eig|`, and
/// whether it equals `(K, cols(J), 0)`.
pub fn kkt_inertia(h: &Matrix, j: &Matrix) -> (Inertia, bool) {
    let n = h.rows;
    let c = j.cols;
    let mut kkt = Matrix::zeros(n + c, n + c);
    for r in 0..n {
        for s in 0..n {
            kkt.set(r, s, h.get(r, s));
        }
        for s in 0..c {
            kkt.set(r, n + s, j.get(r, s));
            kkt.set(n + s, r, j.get(r, s));
        }
    }
    let eig = linalg::symmetric_eigenvalues(&kkt);
    let top = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * top;
    let rho = eig.iter().filter(|&&v| v > tol).count();
    let eta = eig.iter().filter(|&&v| v < -tol).count();
    let inertia = Inertia {
        rho,
        eta,
        theta: eig.len() - rho - eta,
    };
    (inertia, inertia.rho == n && inertia.eta == c && inertia.theta == 0)
}

/// Central-difference check of [`lagrangian_hessian`] against
/// [`lagrangian_gradient`], step `1e-5 √P`.
pub fn hessian_fd_error(instance: &Instance, b: &[f64], mu: f64) -> Result<f64> {
    let hess = lagrangian_hessian(instance, b, mu)?;
    let n = b.len();
    let zeros = vec![0.0; n];
    let step = 1e-5 * instance.sqrt_power();
    let mut worst = 0.0_f64;
    let scale = hess.max_abs().max(f64::MIN_POSITIVE);
    let mut x = b.to_vec();
    for k in 0..n {
        x[k] = b[k] + step;
        let gp = lagrangian_gradient(instance, &x, &zeros, mu)?;
        x[k] = b[k] - step;
        let gm = lagrangian_gradient(instance, &x, &zeros, mu)?;
        x[k] = b[k];
        for j in 0..n {
            let fd = (gp[j] - gm[j]) / (2.0 * step);
            worst = worst.max((fd - hess.get(j, k)).abs() / scale);
        }
    }
    Ok(worst)
}

/// Second-order sufficient test at a KKT point with active set `active`.
pub fn certify(instance: &Instance, b: &[f64], lambda: &[f64], mu: f64, active: &[usize]) -> Result<Certificate> {
    let j = jacobian(instance, b, active)?;
    let (licq_ok, jacobian_rank) = licq(&j);
    let hess = lagrangian_hessian(instance, b, mu)?;
    let (inertia_k, inertia_ok) = kkt_inertia(&hess, &j);
    let sp = instance.sqrt_power();
    let strict_complementarity = active.iter().all(|&k| lambda[k] * sp > STRICT_LAMBDA);
    Ok(Certificate {
        licq_ok,
        jacobian_rank,
        inertia_k,
        strict_complementarity,
        is_local_min: licq_ok && inertia_ok && strict_complementarity,
        hessian_fd_error: hessian_fd_error(instance, b, mu)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    fn q_value(instance: &Instance, b: &[f64], m: usize) -> f64 {
        let agg = aggregates(instance, &TxPolicy::new(b.to_vec())).unwrap();
        agg.b[m] * agg.b[m] / agg.a
    }

    fn lagrangian_value(instance: &Instance, b: &[f64], mu: f64) -> f64 {
        -q_value(instance, b, 0) + mu * (q_value(instance, b, 0) - q_value(instance, b, 1))
    }

    fn random_instance(rng: &mut SmallRng) -> (Instance, Vec<f64>) {
        let k = rng.random_range(2..7);
        let d1 = rng.random_range(1..k);
        let h: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..3.0)).collect();
        let p = rng.random_range(0.1..10.0);
        let i = Instance::two_sum(h, d1, p, rng.random_range(0.1..2.0)).unwrap();
        let b = (0..k).map(|_| i.sqrt_power() * rng.random_range(0.05..1.0)).collect();
        (i, b)
    }

    #[test]
    fn zero_policy_has_zero_equality_gradient() {
        let i = Instance::two_sum(vec![1.0, 2.0, 0.5], 1, 1.0, 1.0).unwrap();
        assert!(equality_gradient(&i, &[0.0; 3]).unwrap().iter().all(|&v| v == 0.0));
        assert!(equality_gradient_on_manifold(&i, &[0.0; 3]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = SmallRng::seed_from_u64(3);
        for _ in 0..20 {
            let (i, b) = random_instance(&mut rng);
            let step = 1e-6 * i.sqrt_power();
            let gh = equality_gradient(&i, &b).unwrap();
            let scale = gh.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mu = rng.random_range(-2.0..2.0);
            let gl = lagrangian_gradient(&i, &b, &vec![0.0; b.len()], mu).unwrap();
            let scale_l = gl.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mut x = b.clone();
            for k in 0..b.len() {
                x[k] = b[k] + step;
                let hp = equality_residual(&i, &x).unwrap();
                let lp = lagrangian_value(&i, &x, mu);
                x[k] = b[k] - step;
                let hm = equality_residual(&i, &x).unwrap();
                let lm = lagrangian_value(&i, &x, mu);
                x[k] = b[k];
                assert!(((hp - hm) / (2.0 * step) - gh[k]).abs() <= 1e-6 * scale);
                assert!(((lp - lm) / (2.0 * step) - gl[k]).abs() <= 1e-6 * scale_l);
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_and_matches_fd() {
        let mut rng = SmallRng::seed_from_u64(4);
        for _ in 0..20 {
            let (i, b) = random_instance(&mut rng);
            let mu = rng.random_range(-2.0..2.0);
            let h = lagrangian_hessian(&i, &b, mu).unwrap();
            assert!(h.is_symmetric());
            assert!(hessian_fd_error(&i, &b, mu).unwrap() <= 1e-5);
        }
    }

    #[test]
    fn single_variable_hessian() {
        // D_1 = {0}, b_1 alone varies; f = −h²b²/(σ² + h²b² + h₂²b₂²)
        let i = Instance::two_sum(vec![1.3, 0.7], 1, 1.0, 0.4).unwrap();
        let b = [0.6, 0.0];
        let (h, s) = (1.3_f64, 0.4_f64);
        let x = h * h * b[0] * b[0];
        // d²/db² of −x/(s + x) with x = h²b²: −2h² s (s − 3x)/(s + x)³
        let expect = -2.0 * h * h * s * (s - 3.0 * x) / ((s + x) * (s + x) * (s + x));
        let hess = lagrangian_hessian(&i, &b, 0.0).unwrap();
        assert_relative_eq!(hess.get(0, 0), expect, max_relative = 1e-12);
    }

    #[test]
    fn simplified_gradient_agrees_on_the_constraint() {
        // ΔD = 0 and B_1 = B_2: h = (2,1), b = (1/2, 1)
        let i = Instance::two_sum(vec![2.0, 1.0], 1, 1.0, 1.0).unwrap();
        let b = [0.5, 1.0];
        assert_eq!(equality_residual(&i, &b).unwrap(), 0.0);
        let exact = equality_gradient(&i, &b).unwrap();
        let simple = equality_gradient_on_manifold(&i, &b).unwrap();
        for (a, s) in exact.iter().zip(&simple) {
            assert_relative_eq!(a, s, max_relative = 1e-14);
        }
        // A = 1 + 1 + 1 = 3, B = 1: entries ±2 h_k B/A
        assert_relative_eq!(exact[0], 4.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(exact[1], -2.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobian_shape_and_licq() {
        let i = Instance::two_sum(vec![2.0, 1.0], 1, 1.0, 1.0).unwrap();
        let j = jacobian(&i, &[0.5, 1.0], &[1]).unwrap();
        assert_eq!((j.rows, j.cols), (2, 2));
        assert_eq!(j.get(1, 0), 1.0);
        assert_eq!(licq(&j), (true, 2));
        let none = jacobian(&i, &[0.5, 1.0], &[]).unwrap();
        assert_eq!(none.cols, 1);
        // vanishing ∇h next to an active column
        let zero = jacobian(&i, &[0.0, 0.0], &[0]).unwrap();
        assert_eq!(licq(&zero), (false, 1));
    }

    #[test]
    fn definite_hessian_gives_expected_inertia() {
        let h = Matrix::from_rows(3, 3, vec![2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 4.0]);
        let j = Matrix::from_rows(3, 2, vec![1.0, 0.2, 0.0, 1.0, 0.0, -0.5]);
        let (inertia, ok) = kkt_inertia(&h, &j);
        assert!(ok);
        assert_eq!(inertia, Inertia { rho: 3, eta: 2, theta: 0 });
        // negative curvature on the null space of Jᵀ breaks it
        let h = Matrix::from_rows(3, 3, vec![2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -4.0]);
        let j = Matrix::from_rows(3, 1, vec![1.0, 0.0, 0.0]);
        let (inertia, ok) = kkt_inertia(&h, &j);
        assert!(!ok);
        assert_eq!(inertia.eta, 2);
    }
}
