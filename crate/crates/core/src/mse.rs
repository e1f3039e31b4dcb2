//! Scalar aggregates and per-computation MSEs on one receive chain.
//!
//! With real, nonnegative scalings the MSE of sum `m` is the quadratic
//! `c_m² A − 2 c_m B_m + |D_m|` where
//! `A = σ² + Σ_k h_k² b_k²`, `B_m = Σ_{k∈D_m} h_k b_k` and `C_m = Σ_{k∈D_m} h_k² b_k²`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::compensated_sum;
use crate::model::{Instance, TxPolicy};
use crate::{Error, Result};

const COMPENSATE_ABOVE: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregates {
    pub a: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Cross terms `F_m = Σ_{k≠j∈D_m} h_k h_j b_k b_j = B_m² − C_m`.
    pub f: Vec<f64>,
}

fn sum(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n > COMPENSATE_ABOVE {
        compensated_sum(values)
    } else {
        values.sum()
    }
}

pub fn aggregates(instance: &Instance, b: &TxPolicy) -> Result<Aggregates> {
    let h = instance.h();
    if b.b.len() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: b.b.len(),
        });
    }
    let mut bs = Vec::with_capacity(instance.groups.count());
    let mut cs = Vec::with_capacity(instance.groups.count());
    let mut fs = Vec::with_capacity(instance.groups.count());
    for g in instance.groups.groups() {
        let bm = sum(g.iter().map(|&k| h[k] * b.b[k]), g.len());
        let cm = sum(g.iter().map(|&k| (h[k] * b.b[k]) * (h[k] * b.b[k])), g.len());
        bs.push(bm);
        cs.push(cm);
        fs.push((bm * bm - cm).max(0.0));
    }
    let a = instance.noise + sum(cs.iter().copied(), h.len());
    Ok(Aggregates { a, b: bs, c: cs, f: fs })
}

impl Aggregates {
    /// `|D_m| − B_m²/A`, clamped to `[0, |D_m|]`.
    pub fn equalized_mse(&self, m: usize, size: usize) -> f64 {
        let v = size as f64 - self.b[m] * self.b[m] / self.a;
        v.clamp(0.0, size as f64)
    }
}

/// MSE of sum `m` for receive scaling `c_m` and transmit policy `b`.
pub fn mse_of(instance: &Instance, m: usize, c_m: f64, b: &TxPolicy) -> Result<f64> {
    let size = instance.groups.group(m)?.len() as f64;
    let agg = aggregates(instance, b)?;
    Ok((c_m * c_m * agg.a - 2.0 * c_m * agg.b[m] + size).max(0.0))
}

/// Minimizing receive scaling `c* = B_m/A` and its MSE `|D_m| − B_m²/A`.
pub fn optimal_rx(instance: &Instance, m: usize, b: &TxPolicy) -> Result<(f64, f64)> {
    let size = instance.groups.group(m)?.len();
    let agg = aggregates(instance, b)?;
    Ok((agg.b[m] / agg.a, agg.equalized_mse(m, size)))
}

/// `max_m (|D_m| − B_m²/A)`: the worst-case MSE once every receiver is optimal.
pub fn equalized_worst_case(instance: &Instance, b: &TxPolicy) -> Result<f64> {
    let agg = aggregates(instance, b)?;
    Ok(instance
        .group_sizes()
        .iter()
        .enumerate()
        .map(|(m, &n)| agg.equalized_mse(m, n))
        .fold(0.0, f64::max))
}

/// MSE of the linear estimate `Re{a_m* y}` in the complex channel model, with
/// `b̃_k = h̄_k b̄_k` and unit-variance independent sensor data.
pub fn complex_mse(instance: &Instance, m: usize, a_m: Complex64, b_bar: &[Complex64]) -> Result<f64> {
    let group = instance.groups.group(m)?;
    let phases = instance.channels.phases().ok_or(Error::MissingPhases)?;
    if b_bar.len() != instance.k() {
        return Err(Error::DimensionMismatch {
            expected: instance.k(),
            got: b_bar.len(),
        });
    }
    let owners = instance.owners();
    let mut total = instance.noise * a_m.norm_sqr();
    for (k, (&h, &phi)) in instance.h().iter().zip(phases).enumerate() {
        let h_bar = Complex64::from_polar(h, phi);
        let eff = (a_m.conj() * h_bar * b_bar[k]).re;
        let err = if owners[k] == Some(m) { eff - 1.0 } else { eff };
        total += err * err;
    }
    debug_assert!(group.iter().all(|&k| owners[k] == Some(m)));
    Ok(total)
}
