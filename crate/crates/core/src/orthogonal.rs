//! Splitting computations across the real and imaginary receive chains.
//!
//! Computations on different chains are phase-orthogonal and do not interfere,
//! so each chain is an independent problem with one or two sums. One sum on a
//! chain is solved in closed form by [`p2p_solve`]; two sums go to a
//! caller-supplied two-sum solver.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::math::sqrt;
use crate::model::{strongest_first, Instance, RxPolicy, TxPolicy};
use crate::mse::optimal_rx;
use crate::{Error, Result};

/// Arguments of [`chi`] with their range checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaTriple {
    pub lambda_no: f64,
    pub lambda_om: f64,
    pub z: i8,
}

impl LambdaTriple {
    pub fn new(lambda_no: f64, lambda_om: f64, z: i8) -> Result<Self> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(lambda_no) || !unit(lambda_om) || !(-1..=1).contains(&z) {
            return Err(Error::OutOfRange);
        }
        Ok(Self { lambda_no, lambda_om, z })
    }

    pub fn value(&self) -> f64 {
        let lo = self.lambda_no.min(self.lambda_om);
        let hi = self.lambda_no.max(self.lambda_om);
        // |λ_no + λ_om − 1| and 1 − |λ_no − λ_om|, arranged so that the
        // extreme points and argmin/argmax sets come out exact on grid inputs
        let v = if self.z >= 0 {
            let s = lo + hi;
            if s <= 1.0 { 1.0 - s } else { lo - (1.0 - hi) }
        } else {
            (1.0 - hi) + lo
        };
        v.clamp(0.0, 1.0)
    }
}

/// Combined convex weight of two chained phase differences. `z = 0` uses the
/// `z ≥ 0` branch; both branches agree whenever an input is 0 or 1.
pub fn chi(lambda_no: f64, lambda_om: f64, z: i8) -> Result<f64> {
    Ok(LambdaTriple::new(lambda_no, lambda_om, z)?.value())
}

/// Interference-free optimum for one sum: the strongest sensors invert their
/// channel to a common level `E`, the rest transmit at full power.
#[derive(Debug, Clone, PartialEq)]
pub struct P2pSolution {
    /// Transmit amplitudes in the order of the input channels.
    pub b: Vec<f64>,
    pub c: f64,
    pub mse: f64,
    /// Number of sensors inverting their channel.
    pub inverted: usize,
}

pub fn p2p_solve(h: &[f64], power: f64, noise: f64) -> Result<P2pSolution> {
    if h.is_empty() {
        return Err(Error::EmptyGroup(0));
    }
    let n = h.len();
    let sp = sqrt(power);
    let idx: Vec<usize> = (0..n).collect();
    let order = strongest_first(&idx, h);

    let evaluate = |p: usize, e: f64| -> (f64, f64, f64) {
        let (hp, hs) = order[p..].iter().fold((0.0, 0.0), |(a, s), &k| (a + h[k], s + h[k] * h[k]));
        let b_sum = p as f64 * e + sp * hp;
        let a = noise + p as f64 * e * e + power * hs;
        (b_sum / a, n as f64 - b_sum * b_sum / a, a)
    };

    let mut best_p = 0;
    let mut best_e = 0.0;
    let (mut best_c, mut best_mse, _) = evaluate(0, 0.0);
    // the window fixes p uniquely, but every valid p is scored to stay robust to rounding
    for p in 1..n {
        let (hp, hs) = order[p..].iter().fold((0.0, 0.0), |(a, s), &k| (a + h[k], s + h[k] * h[k]));
        let e = (noise + power * hs) / (sp * hp);
        let weakest_free = h[order[p - 1]];
        let strongest_full = h[order[p]];
        if !(weakest_free * sp > e && e >= strongest_full * sp) {
            continue;
        }
        let (c, mse, _) = evaluate(p, e);
        if mse < best_mse {
            best_p = p;
            best_e = e;
            best_c = c;
            best_mse = mse;
        }
    }
    let mut b = vec![sp; n];
    for &k in &order[..best_p] {
        b[k] = best_e / h[k];
    }
    Ok(P2pSolution {
        b,
        c: best_c,
        mse: best_mse.clamp(0.0, n as f64),
        inverted: best_p,
    })
}

/// Which computations ride on the real (`real`) and imaginary (`imag`) chain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChainAssignment {
    pub real: Vec<usize>,
    pub imag: Vec<usize>,
}

impl ChainAssignment {
    /// Per-sensor phase: 0 on the real chain, π/2 on the imaginary chain,
    /// 0 for sensors outside every group.
    pub fn phases(&self, instance: &Instance) -> Vec<f64> {
        let owners = instance.owners();
        owners
            .iter()
            .map(|o| match o {
                Some(m) if self.imag.contains(m) => FRAC_PI_2,
                _ => 0.0,
            })
            .collect()
    }

    pub fn chains(&self) -> [&[usize]; 2] {
        [&self.real, &self.imag]
    }
}

/// All assignments worth evaluating for `m` computations, up to chain swap.
pub fn candidate_assignments(m: usize) -> Result<Vec<ChainAssignment>> {
    if m == 0 {
        return Err(Error::EmptyGroup(0));
    }
    if m == 1 {
        return Ok(vec![ChainAssignment {
            real: vec![0],
            imag: Vec::new(),
        }]);
    }
    if m > 4 {
        return Err(Error::ChainOverloaded(m));
    }
    let mut out = Vec::new();
    // computation 0 always on the real chain
    for mask in 0u32..(1 << (m - 1)) {
        let mut real = vec![0];
        let mut imag = Vec::new();
        for j in 1..m {
            if mask & (1 << (j - 1)) != 0 {
                imag.push(j);
            } else {
                real.push(j);
            }
        }
        if imag.is_empty() || real.len() > 2 || imag.len() > 2 {
            continue;
        }
        out.push(ChainAssignment { real, imag });
    }
    Ok(out)
}

/// Solution on one chain, with per-computation receive scalings and MSEs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    pub computations: Vec<usize>,
    pub c: Vec<f64>,
    pub mse: Vec<f64>,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalSolution {
    pub assignment: ChainAssignment,
    pub chains: Vec<ChainSolution>,
    pub tx: TxPolicy,
    pub rx: RxPolicy,
    /// Per-computation MSE, indexed like the instance's groups.
    pub mse: Vec<f64>,
    pub worst: f64,
}

/// Solves a chain carrying two computations; the instance has exactly two
/// groups covering all of its sensors.
pub trait TwoSumSolver {
    fn solve(&self, instance: &Instance) -> Result<TxPolicy>;
}

impl<F> TwoSumSolver for F
where
    F: Fn(&Instance) -> Result<TxPolicy>,
{
    fn solve(&self, instance: &Instance) -> Result<TxPolicy> {
        self(instance)
    }
}

fn solve_chain(
    instance: &Instance,
    computations: &[usize],
    solver: &dyn TwoSumSolver,
    b: &mut [f64],
) -> Result<ChainSolution> {
    let (sub, map) = instance.restrict(computations)?;
    let local = match computations.len() {
        1 => TxPolicy::new(p2p_solve(sub.h(), sub.power, sub.noise)?.b),
        2 => solver.solve(&sub).map_err(|e| match e {
            Error::Infeasible | Error::NoCandidate => {
                Error::InfeasibleChain([computations[0], computations[1]])
            }
            other => other,
        })?,
        n => return Err(Error::ChainOverloaded(n)),
    };
    local.check(&sub)?;
    let mut c = Vec::with_capacity(computations.len());
    let mut mse = Vec::with_capacity(computations.len());
    for m in 0..computations.len() {
        let (cm, v) = optimal_rx(&sub, m, &local)?;
        c.push(cm);
        mse.push(v);
    }
    for (i, &s) in map.iter().enumerate() {
        b[s] = local.b[i];
    }
    let worst = mse.iter().copied().fold(0.0, f64::max);
    Ok(ChainSolution {
        computations: computations.to_vec(),
        c,
        mse,
        worst,
    })
}

/// Exhaustive search over chain assignments, minimizing the worse chain.
///
/// Assignments whose two-sum chain fails are skipped; if every assignment
/// fails, the first error is returned. Ties keep the earlier assignment.
pub fn assign_and_solve(instance: &Instance, solver: &dyn TwoSumSolver) -> Result<OrthogonalSolution> {
    let m = instance.groups.count();
    let mut best: Option<OrthogonalSolution> = None;
    let mut first_err = None;
    for assignment in candidate_assignments(m)? {
        let mut b = vec![0.0; instance.k()];
        let mut chains = Vec::new();
        let mut failed = None;
        for comps in assignment.chains() {
            if comps.is_empty() {
                continue;
            }
            match solve_chain(instance, comps, solver, &mut b) {
                Ok(sol) => chains.push(sol),
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            first_err.get_or_insert(e);
            continue;
        }
        let mut c = vec![0.0; m];
        let mut mse = vec![0.0; m];
        for ch in &chains {
            for (i, &comp) in ch.computations.iter().enumerate() {
                c[comp] = ch.c[i];
                mse[comp] = ch.mse[i];
            }
        }
        let worst = chains.iter().map(|ch| ch.worst).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| worst < b.worst) {
            best = Some(OrthogonalSolution {
                assignment,
                chains,
                tx: TxPolicy::new(b),
                rx: RxPolicy { c },
                mse,
                worst,
            });
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::NoCandidate))
}

/// Complex receive scalars `a_m` and transmit scalars `b̄_k` realizing an
/// orthogonal solution: `b̄_k = b_k e^{i(α_k − φ_k)}`, `a_m = c_m e^{iα_m}`.
pub fn complex_policy(instance: &Instance, sol: &OrthogonalSolution) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let channel_phases = instance.channels.phases().ok_or(Error::MissingPhases)?;
    let alpha = sol.assignment.phases(instance);
    let b_bar = (0..instance.k())
        .map(|k| Complex64::from_polar(sol.tx.b[k], alpha[k] - channel_phases[k]))
        .collect();
    let a = (0..instance.groups.count())
        .map(|m| {
            let phase = if sol.assignment.imag.contains(&m) { FRAC_PI_2 } else { 0.0 };
            Complex64::from_polar(sol.rx.c[m], phase)
        })
        .collect();
    Ok((a, b_bar))
}
