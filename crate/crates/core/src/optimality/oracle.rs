//! Independent reference minimizer of `max_m (|D_m| − B_m²/A)` over the box,
//! with no equalization constraint.

use alloc::vec;
use alloc::vec::Vec;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use crate::boxopt::{self, SpgOptions};
use crate::math::{exp, ln};
use crate::model::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub b: Vec<f64>,
    pub worst_mse: f64,
}

struct Scaled<'a> {
    h: &'a [f64],
    groups: &'a [Vec<usize>],
    /// `σ²/P`
    nu: f64,
}

impl Scaled<'_> {
    fn mses(&self, u: &[f64], out: &mut Vec<(f64, f64)>) -> f64 {
        let a = self.nu + self.h.iter().zip(u).map(|(h, u)| h * h * u * u).sum::<f64>();
        out.clear();
        for g in self.groups {
            let bm: f64 = g.iter().map(|&k| self.h[k] * u[k]).sum();
            out.push((g.len() as f64 - bm * bm / a, bm));
        }
        a
    }

    fn worst(&self, u: &[f64]) -> f64 {
        let mut tmp = Vec::new();
        self.mses(u, &mut tmp);
        tmp.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(1/t) log Σ exp(t · MSE_m)` and its gradient.
    fn smoothed(&self, u: &[f64], t: f64, grad: &mut [f64], tmp: &mut Vec<(f64, f64)>) -> f64 {
        let a = self.mses(u, tmp);
        let top = tmp.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = tmp.iter().map(|v| exp(t * (v.0 - top))).collect();
        let total: f64 = weights.iter().sum();
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (m, g) in self.groups.iter().enumerate() {
            let w = weights[m] / total;
            let bm = tmp[m].1;
            // ∂MSE_m/∂u_k = −2 B_m β_mk h_k/A + B_m² 2 h_k² u_k/A²
            for k in 0..u.len() {
                grad[k] += w * bm * bm * 2.0 * self.h[k] * self.h[k] * u[k] / (a * a);
            }
            for &k in g {
                grad[k] -= w * 2.0 * bm * self.h[k] / a;
            }
        }
        top + ln(total) / t
    }
}

/// Grid search and multistart projected gradient on a log-sum-exp smoothed
/// max with temperatures `10³ → 10⁶`. `grid = None` picks a coarse lattice
/// of at most ~10⁵ points. Starts are deterministic; returns the better of
/// both searches.
///
/// The lattice matters: once a whole group is driven to `u = 0` its MSE has
/// zero gradient and projected descent cannot leave that face.
pub fn brute_force_min(instance: &Instance, starts: usize, grid: Option<usize>) -> OracleResult {
    let sp = instance.sqrt_power();
    let s = Scaled {
        h: instance.h(),
        groups: instance.groups.groups(),
        nu: instance.noise / instance.power,
    };
    let n = instance.k();
    let mut best_u = vec![1.0; n];
    let mut best = s.worst(&best_u);

    let auto = (2..=11).rev().find(|&p: &usize| (p as f64).powi(n as i32) <= 1e5).unwrap_or(0);
    if let Some(points) = Some(grid.unwrap_or(auto)).filter(|&p| p >= 2) {
        let mut idx = vec![0usize; n];
        let mut u = vec![0.0; n];
        'outer: loop {
            for k in 0..n {
                u[k] = idx[k] as f64 / (points - 1) as f64;
            }
            let v = s.worst(&u);
            if v < best {
                best = v;
                best_u.copy_from_slice(&u);
            }
            for k in 0..n {
                idx[k] += 1;
                if idx[k] < points {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
    }

    let lower = vec![0.0; n];
    let upper = vec![1.0; n];
    let opts = SpgOptions {
        max_iter: 5000,
        tol: 1e-12,
        memory: 10,
    };
    let mut rng = SmallRng::seed_from_u64(0x0a5c_1e00_u64 ^ ((n as u64) << 32));
    let mut tmp = Vec::new();
    for st in 0..starts.max(1) {
        let mut x = match st {
            0 => best_u.clone(),
            1 => vec![1.0; n],
            _ => (0..n).map(|_| rng.random::<f64>()).collect(),
        };
        for t in [1e3, 1e4, 1e5, 1e6] {
            let res = boxopt::minimize(|u, g| s.smoothed(u, t, g, &mut tmp), &x, &lower, &upper, opts);
            x = res.x;
        }
        let v = s.worst(&x);
        if v < best {
            best = v;
            best_u = x;
        }
    }
    OracleResult {
        b: best_u.iter().map(|u| u * sp).collect(),
        worst_mse: best,
    }
}
