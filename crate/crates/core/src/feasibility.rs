//! Noise-variance thresholds above which the equalized two-sum program has no
//! feasible point.
//!
//! With `d = |ΔD| > 0` and `D_i` the larger group, feasibility requires
//! `σ² ≤ max (B_i²/d − C_i)` over the box with the other group silent. Every
//! quantity is evaluated in `u = b/√P ∈ [0,1]` so thresholds are exactly
//! linear in `P`.

use alloc::vec;
use alloc::vec::Vec;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use crate::boxopt::{self, SpgOptions};
use crate::math::sqrt;
use crate::model::{weakest_first, Instance};
use crate::{Error, Result};

const POLISH_STARTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub delta_d: i64,
    pub sigma_exact: f64,
    pub sigma_lower: f64,
    pub sigma_upper: f64,
    pub sigma_approx: f64,
    pub feasible: bool,
}

/// Channels of the group whose sum dominates the threshold, and `d = |ΔD|`.
fn relevant(instance: &Instance) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    if instance.groups.count() != 2 {
        return Err(Error::NotTwoSumPartition);
    }
    let dd = instance.delta_d();
    let (i, o) = if dd > 0 { (1, 0) } else { (0, 1) };
    let h = instance.h();
    let hi = instance.groups.group(i)?.iter().map(|&k| h[k]).collect();
    let ho = instance.groups.group(o)?.iter().map(|&k| h[k]).collect();
    Ok((hi, ho, dd.unsigned_abs() as usize))
}

/// `(Σ h u)²/d − Σ h² u²` and its gradient.
fn objective(h: &[f64], d: f64, u: &[f64], grad: &mut [f64]) -> f64 {
    let s: f64 = h.iter().zip(u).map(|(h, u)| h * u).sum();
    let q: f64 = h.iter().zip(u).map(|(h, u)| h * h * u * u).sum();
    for k in 0..h.len() {
        grad[k] = 2.0 * h[k] * s / d - 2.0 * h[k] * h[k] * u[k];
    }
    s * s / d - q
}

/// Best structured point (weakest sensors at full power, the rest equalized)
/// in `u`-space: value and point.
fn structured(h: &[f64], d: usize) -> (f64, Vec<f64>) {
    let n = h.len();
    let idx: Vec<usize> = (0..n).collect();
    let order = weakest_first(&idx, h);
    let df = d as f64;
    // |G| = 0: all at full power
    let (s_all, q_all) = h.iter().fold((0.0, 0.0), |(s, q), &v| (s + v, q + v * v));
    let mut best = (s_all * s_all / df - q_all, vec![1.0; n]);
    for g in 1..=n.min(d.saturating_sub(1)) {
        let full = &order[..n - g];
        let free = &order[n - g..];
        let (sf, qf) = full.iter().fold((0.0, 0.0), |(s, q), &k| (s + h[k], q + h[k] * h[k]));
        let hg = sf / (df - g as f64);
        let strongest_full = full.last().map_or(0.0, |&k| h[k]);
        let weakest_free = h[free[0]];
        if !(strongest_full <= hg && hg <= weakest_free) {
            continue;
        }
        let gf = g as f64;
        let v = (gf * hg + sf) * (gf * hg + sf) / df - (gf * hg * hg + qf);
        if v > best.0 {
            let mut u = vec![1.0; n];
            for &k in free {
                u[k] = hg / h[k];
            }
            best = (v, u);
        }
    }
    best
}

/// Structured lower bound on the threshold, clamped at zero.
pub fn sigma_tilde_lower(instance: &Instance) -> Result<f64> {
    let (h, _, d) = relevant(instance)?;
    if d == 0 {
        return Ok(f64::INFINITY);
    }
    Ok((instance.power * structured(&h, d).0).max(0.0))
}

/// Structured candidates polished by multistart projected gradient ascent.
pub fn sigma_tilde_exact(instance: &Instance) -> Result<f64> {
    let (h, _, d) = relevant(instance)?;
    if d == 0 {
        return Ok(f64::INFINITY);
    }
    let n = h.len();
    let df = d as f64;
    let (mut best, start) = structured(&h, d);
    let lower = vec![0.0; n];
    let upper = vec![1.0; n];
    let opts = SpgOptions {
        max_iter: 5000,
        tol: 1e-10,
        memory: 10,
    };
    let mut rng = SmallRng::seed_from_u64(0x5eed_0000 ^ n as u64);
    let mut x0 = start;
    for s in 0..POLISH_STARTS {
        if s == 1 {
            x0 = vec![1.0; n];
        } else if s > 1 {
            x0 = (0..n).map(|_| rng.random::<f64>()).collect();
        }
        let res = boxopt::minimize(
            |u, g| {
                let v = objective(&h, df, u, g);
                g.iter_mut().for_each(|x| *x = -*x);
                -v
            },
            &x0,
            &lower,
            &upper,
            opts,
        );
        best = best.max(-res.f);
    }
    Ok((instance.power * best).max(0.0))
}

/// Bound from `F_i ≤ (C_i/2)(|D_i| − 1 + ζ)`, `ζ = √((|D_i|−1)(|D_i|+3))`.
pub fn sigma_tilde_upper(instance: &Instance) -> Result<f64> {
    let (h, _, d) = relevant(instance)?;
    if d == 0 {
        return Ok(f64::INFINITY);
    }
    let n = h.len() as f64;
    let zeta = sqrt((n - 1.0) * (n + 3.0));
    let hs: f64 = h.iter().map(|v| v * v).sum();
    let df = d as f64;
    Ok((instance.power * hs / 2.0 * (1.0 - 2.0 * df + n + zeta) / df).max(0.0))
}

/// `P |D_other| Σ_{D_i} h² / |ΔD|`.
pub fn sigma_tilde_approx(instance: &Instance) -> Result<f64> {
    let (h, other, d) = relevant(instance)?;
    if d == 0 {
        return Ok(f64::INFINITY);
    }
    let hs: f64 = h.iter().map(|v| v * v).sum();
    Ok(instance.power * other.len() as f64 * hs / d as f64)
}

pub fn is_feasible(instance: &Instance) -> Result<FeasibilityReport> {
    let delta_d = instance.delta_d();
    let sigma_exact = sigma_tilde_exact(instance)?;
    Ok(FeasibilityReport {
        delta_d,
        sigma_exact,
        sigma_lower: sigma_tilde_lower(instance)?,
        sigma_upper: sigma_tilde_upper(instance)?,
        sigma_approx: sigma_tilde_approx(instance)?,
        feasible: delta_d == 0 || instance.noise <= sigma_exact,
    })
}
