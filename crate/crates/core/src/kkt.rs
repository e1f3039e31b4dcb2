//! KKT points of the equalized two-sum program, enumerated over the number of
//! sensors in each group that transmit below full power.
//!
//! For a cardinality pair `(p₁, p₂)` the `p_m` strongest sensors of `D_m` are
//! free and share a common received amplitude `E_m = h_k b_k`; the rest
//! transmit at `√P`. With `h′_m`, `h_{sm}` the sums of `h`, `h²` over the
//! full-power sensors:
//!
//! - `B_m = p_m E_m + √P h′_m`, `A = σ² + Σ_m (p_m E_m² + P h_{sm})`;
//! - equality: `B₂² − B₁² − ΔD·A = 0`;
//! - when both groups have free sensors, stationarity forces
//!   `E₁B₁ + E₂B₂ = A`, i.e. `√P(h′₁E₁ + h′₂E₂) = σ² + P(h_{s1} + h_{s2})`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math::sqrt;
use crate::model::{strongest_first, Instance, TxPolicy};
use crate::mse::aggregates;
use crate::optimality::{self, Certificate};
use crate::poly::{common_roots, quadratic_roots, Poly, QuadraticInY};
use crate::{Error, Result};

/// Sizes `|P₁|, |P₂|` of the below-full-power sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CardinalityPair {
    pub p1: usize,
    pub p2: usize,
}

impl CardinalityPair {
    pub fn new(p1: usize, p2: usize) -> Self {
        Self { p1, p2 }
    }

    pub fn get(&self, m: usize) -> usize {
        if m == 0 { self.p1 } else { self.p2 }
    }
}

/// `P_m` (free) and `P_m^C` (full power), each ordered strongest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalitySets {
    pub free: [Vec<usize>; 2],
    pub full: [Vec<usize>; 2],
}

impl CardinalitySets {
    pub fn active(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.full.iter().flatten().copied().collect();
        a.sort_unstable();
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// Both groups have free sensors.
    C,
    /// Only group `free` has free sensors.
    D { free: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `‖∇_b L‖_∞` in `u = b/√P` coordinates.
    pub stationarity_residual: f64,
    /// `|B₂² − B₁² − ΔD·A| / max(1, A)`.
    pub equality_residual: f64,
    /// Spread of the per-sensor stationarity values of `μ`.
    pub mu_spread: f64,
    /// Whether `E` lies strictly inside the closed-form primal/dual window.
    pub window_ok: bool,
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSolution {
    pub b: TxPolicy,
    /// `(E_{P₁}, E_{P₂})`; zero for a group without free sensors.
    pub e: [f64; 2],
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub pair: CardinalityPair,
    pub case: Case,
    /// `|D₁| − B₁²/A`, equal to the other group's MSE on the constraint.
    pub worst_mse: f64,
    pub diagnostics: Diagnostics,
}

impl CandidateSolution {
    pub fn is_local_min(&self) -> bool {
        self.diagnostics.certificate.as_ref().is_some_and(|c| c.is_local_min)
    }

    pub fn active_set(&self, instance: &Instance) -> Vec<usize> {
        let sp = instance.sqrt_power();
        (0..self.b.b.len()).filter(|&k| self.b.b[k] == sp).collect()
    }
}

pub fn build_sets(instance: &Instance, pair: CardinalityPair) -> Result<CardinalitySets> {
    instance.require_two_sum()?;
    let h = instance.h();
    let mut free: [Vec<usize>; 2] = Default::default();
    let mut full: [Vec<usize>; 2] = Default::default();
    for m in 0..2 {
        let ordered = strongest_first(instance.groups.group(m)?, h);
        let p = pair.get(m);
        if p > ordered.len() {
            return Err(Error::OutOfRange);
        }
        free[m] = ordered[..p].to_vec();
        full[m] = ordered[p..].to_vec();
    }
    Ok(CardinalitySets { free, full })
}

/// Scalar summary of one cardinality pair.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    p: [f64; 2],
    /// `h′_m`
    hp: [f64; 2],
    /// `h_{sm}`
    hs: [f64; 2],
    sp: f64,
    power: f64,
    noise: f64,
    dd: f64,
}

impl Reduced {
    fn new(instance: &Instance, sets: &CardinalitySets) -> Self {
        let h = instance.h();
        let sum = |s: &[usize], f: &dyn Fn(f64) -> f64| s.iter().map(|&k| f(h[k])).sum::<f64>();
        Self {
            p: [sets.free[0].len() as f64, sets.free[1].len() as f64],
            hp: [sum(&sets.full[0], &|v| v), sum(&sets.full[1], &|v| v)],
            hs: [sum(&sets.full[0], &|v| v * v), sum(&sets.full[1], &|v| v * v)],
            sp: instance.sqrt_power(),
            power: instance.power,
            noise: instance.noise,
            dd: instance.delta_d() as f64,
        }
    }

    fn c(&self, m: usize) -> f64 {
        self.sp * self.hp[m]
    }

    /// `σ² + P(h_{s1} + h_{s2})`
    fn s(&self) -> f64 {
        self.noise + self.power * (self.hs[0] + self.hs[1])
    }

    fn b(&self, m: usize, e: f64) -> f64 {
        self.p[m] * e + self.c(m)
    }

    fn a(&self, e: [f64; 2]) -> f64 {
        self.s() + self.p[0] * e[0] * e[0] + self.p[1] * e[1] * e[1]
    }

    fn equality(&self, e: [f64; 2]) -> f64 {
        let (b1, b2) = (self.b(0, e[0]), self.b(1, e[1]));
        b2 * b2 - b1 * b1 - self.dd * self.a(e)
    }

    fn coupling(&self, e: [f64; 2]) -> f64 {
        e[0] * self.b(0, e[0]) + e[1] * self.b(1, e[1]) - self.a(e)
    }

    /// Equality constraint as a polynomial in `x = E₁`, `y = E₂`.
    fn equality_poly(&self) -> QuadraticInY {
        let [p1, p2] = self.p;
        let (c1, c2) = (self.c(0), self.c(1));
        let s = self.s();
        QuadraticInY {
            q: [
                Poly::new(vec![c2 * c2 - c1 * c1 - self.dd * s, -2.0 * p1 * c1, -p1 * p1 - self.dd * p1]),
                Poly::constant(2.0 * p2 * c2),
                Poly::constant(p2 * p2 - self.dd * p2),
            ],
        }
    }

    /// `E₁B₁ + E₂B₂ − A` after the quadratic terms cancel.
    fn coupling_poly(&self) -> QuadraticInY {
        QuadraticInY {
            q: [
                Poly::linear(-self.s(), self.c(0)),
                Poly::constant(self.c(1)),
                Poly::default(),
            ],
        }
    }

    fn accepts(&self, e: [f64; 2]) -> bool {
        let scale = self.a(e).max(1.0);
        e.iter().all(|&v| v >= 0.0 && v.is_finite())
            && self.equality(e).abs() <= 1e-9 * scale
            && (self.p[0] == 0.0 || self.p[1] == 0.0 || self.coupling(e).abs() <= 1e-9 * scale)
    }
}

/// Clears roundoff-level negatives so that `E = 0` roots survive the sign filter.
fn snap_nonnegative(v: f64, scale: f64) -> f64 {
    if v < 0.0 && v > -1e-12 * scale { 0.0 } else { v }
}

/// Case c: both groups keep at least one free sensor.
pub fn solve_case_c(instance: &Instance, sets: &CardinalitySets) -> Result<Vec<[f64; 2]>> {
    let r = Reduced::new(instance, sets);
    if r.p[0] == 0.0 || r.p[1] == 0.0 {
        return Err(Error::OutOfRange);
    }
    if r.hp[0] == 0.0 && r.hp[1] == 0.0 {
        // the coupling would need σ² = 0
        return Err(Error::NoRealRoot);
    }
    let raw: Vec<[f64; 2]> = if r.dd == 0.0 {
        let den = r.sp * (r.p[0] * r.hp[1] + r.p[1] * r.hp[0]);
        if den == 0.0 {
            return Err(Error::DegenerateDenominator);
        }
        let dh = r.hp[1] - r.hp[0];
        let e1 = (r.p[1] * r.s() + r.power * dh * r.hp[1]) / den;
        let e2 = (r.p[0] * r.s() - r.power * dh * r.hp[0]) / den;
        vec![[e1, e2]]
    } else {
        case_c_by_resultant(&r)
    };
    let scale = r.sp * (r.hp[0] + r.hp[1]).max(1.0);
    let out: Vec<[f64; 2]> = raw
        .into_iter()
        .map(|[a, b]| [snap_nonnegative(a, scale), snap_nonnegative(b, scale)])
        .filter(|&e| r.accepts(e))
        .collect();
    if out.is_empty() {
        return Err(Error::NoRealRoot);
    }
    Ok(out)
}

fn case_c_by_resultant(r: &Reduced) -> Vec<[f64; 2]> {
    common_roots(&r.equality_poly(), &r.coupling_poly())
        .into_iter()
        .map(|(x, y)| [x, y])
        .collect()
}

/// Case d: only group `m` keeps free sensors, `E_n = 0`.
pub fn solve_case_d(instance: &Instance, sets: &CardinalitySets, m: usize) -> Result<Vec<f64>> {
    let r = Reduced::new(instance, sets);
    let n = 1 - m;
    if r.p[m] == 0.0 || r.p[n] != 0.0 {
        return Err(Error::OutOfRange);
    }
    let raw = if r.dd == 0.0 {
        vec![r.sp * (r.hp[n] - r.hp[m]) / r.p[m]]
    } else {
        // s·[(p E + c_m)² − c_n²] − ΔD(S + p E²), s = +1 for m = 2, −1 for m = 1
        let s = if m == 1 { 1.0 } else { -1.0 };
        let (p, cm, cn) = (r.p[m], r.c(m), r.c(n));
        quadratic_roots(
            s * p * p - r.dd * p,
            2.0 * s * p * cm,
            s * (cm * cm - cn * cn) - r.dd * r.s(),
        )
    };
    let scale = r.sp * (r.hp[0] + r.hp[1]).max(1.0);
    let out: Vec<f64> = raw
        .into_iter()
        .map(|v| snap_nonnegative(v, scale))
        .filter(|&v| {
            let mut e = [0.0; 2];
            e[m] = v;
            (r.dd != 0.0 || v > 0.0) && r.accepts(e)
        })
        .collect();
    if out.is_empty() {
        return Err(Error::NoRealRoot);
    }
    Ok(out)
}

/// Transmit vector for given `E`; `None` if a free sensor would exceed `√P`.
pub fn assemble(instance: &Instance, sets: &CardinalitySets, e: [f64; 2]) -> Option<TxPolicy> {
    let sp = instance.sqrt_power();
    let h = instance.h();
    let mut b = vec![sp; instance.k()];
    for m in 0..2 {
        for &k in &sets.free[m] {
            let v = e[m] / h[k];
            if !(v < sp) {
                return None;
            }
            b[k] = v;
        }
    }
    Some(TxPolicy::new(b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub stationarity_residual: f64,
    pub mu_spread: f64,
}

/// Multipliers from stationarity: `μ` fitted on the free sensors, then
/// `λ_k = −(∂f₀/∂b_k + μ ∂h/∂b_k)` on the full-power sensors.
pub fn multipliers(instance: &Instance, sets: &CardinalitySets, b: &TxPolicy) -> Result<Multipliers> {
    let (_, [g1, g2]) = optimality::ratio_gradients(instance, &b.b)?;
    let k = b.b.len();
    let g0: Vec<f64> = g1.iter().map(|v| -v).collect();
    let gh: Vec<f64> = g1.iter().zip(&g2).map(|(a, c)| a - c).collect();
    let free: Vec<usize> = sets.free.iter().flatten().copied().collect();
    let (num, den) = free
        .iter()
        .fold((0.0, 0.0), |(n, d), &j| (n - g0[j] * gh[j], d + gh[j] * gh[j]));
    if free.is_empty() || den == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let mu = num / den;
    let per_sensor: Vec<f64> = free.iter().filter(|&&j| gh[j] != 0.0).map(|&j| -g0[j] / gh[j]).collect();
    let lo = per_sensor.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = per_sensor.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mu_spread = if per_sensor.is_empty() { 0.0 } else { hi - lo };
    if mu_spread > 1e-8 * mu.abs().max(1.0) {
        return Err(Error::InconsistentMu(mu_spread));
    }
    let mut lambda = vec![0.0; k];
    for &j in sets.full.iter().flatten() {
        lambda[j] = -(g0[j] + mu * gh[j]);
    }
    let sp = instance.sqrt_power();
    let stationarity_residual = (0..k)
        .map(|j| (g0[j] + lambda[j] + mu * gh[j]).abs() * sp)
        .fold(0.0, f64::max);
    Ok(Multipliers {
        lambda,
        mu,
        stationarity_residual,
        mu_spread,
    })
}

/// Closed-form primal/dual window on `E` (open intervals).
pub fn feasibility_window(instance: &Instance, sets: &CardinalitySets, e: [f64; 2], case: Case) -> bool {
    let r = Reduced::new(instance, sets);
    let h = instance.h();
    let sp = r.sp;
    let sizes = instance.group_sizes();
    let upper_by_size = |m: usize| -> f64 {
        let n = 1 - m;
        let full = sets.full[m].len();
        if sizes[n] < full {
            sp * r.hp[m] / (full - sizes[n]) as f64
        } else {
            f64::INFINITY
        }
    };
    let bounds = |m: usize| -> (f64, f64) {
        let v_over = sets.free[m].last().map_or(0.0, |&k| h[k]);
        let v_under = sets.full[m].first().map_or(0.0, |&k| h[k]);
        (v_under * sp, (v_over * sp).min(upper_by_size(m)))
    };
    match case {
        Case::C => (0..2).all(|m| {
            let (lo, hi) = bounds(m);
            lo < e[m] && e[m] < hi
        }),
        Case::D { free: m } => {
            let n = 1 - m;
            let (lo, mut hi) = bounds(m);
            let w_over = sets.full[n].first().map_or(0.0, |&k| h[k]);
            let num = r.noise + r.power * (r.hs[0] + r.hs[1] - w_over * r.hp[n]);
            if r.hp[m] > 0.0 {
                hi = hi.min(num / (sp * r.hp[m]));
            } else if num <= 0.0 {
                return false;
            }
            lo < e[m] && e[m] < hi
        }
    }
}

fn pairs(instance: &Instance) -> Vec<CardinalityPair> {
    let sizes = instance.group_sizes();
    let mut out = Vec::new();
    for p1 in 0..=sizes[0] {
        for p2 in 0..=sizes[1] {
            if (p1, p2) == (0, 0) || (p1, p2) == (sizes[0], sizes[1]) {
                continue;
            }
            out.push(CardinalityPair::new(p1, p2));
        }
    }
    out
}

fn candidate(instance: &Instance, sets: &CardinalitySets, pair: CardinalityPair, case: Case, e: [f64; 2]) -> Option<CandidateSolution> {
    let b = assemble(instance, sets, e)?;
    let mult = multipliers(instance, sets, &b).ok()?;
    if mult.stationarity_residual > 1e-8 {
        return None;
    }
    let sp = instance.sqrt_power();
    let lambda_scale = 1e-9 / sp;
    let mut lambda = mult.lambda;
    for l in lambda.iter_mut() {
        if *l < 0.0 {
            if *l < -lambda_scale {
                return None;
            }
            *l = 0.0;
        }
    }
    let agg = aggregates(instance, &b).ok()?;
    let eq = (agg.b[1] * agg.b[1] - agg.b[0] * agg.b[0] - instance.delta_d() as f64 * agg.a).abs();
    let equality_residual = eq / agg.a.max(1.0);
    if equality_residual > 1e-8 {
        return None;
    }
    let d1 = instance.group_sizes()[0];
    Some(CandidateSolution {
        worst_mse: agg.equalized_mse(0, d1),
        b,
        e,
        lambda,
        mu: mult.mu,
        pair,
        case,
        diagnostics: Diagnostics {
            stationarity_residual: mult.stationarity_residual,
            equality_residual,
            mu_spread: mult.mu_spread,
            window_ok: feasibility_window(instance, sets, e, case),
            certificate: None,
        },
    })
}

fn secondary(a: &CandidateSolution, b: &CandidateSolution) -> Ordering {
    (a.pair.p1 + a.pair.p2, a.pair.p1, a.pair.p2)
        .cmp(&(b.pair.p1 + b.pair.p2, b.pair.p1, b.pair.p2))
        .then(a.e[0].total_cmp(&b.e[0]))
        .then(a.e[1].total_cmp(&b.e[1]))
}

/// Sorts by worst-case MSE; runs within `1e-10` of their first element are
/// ordered by `p₁ + p₂`, then lexicographically.
fn canonical_order(cands: &mut [CandidateSolution]) {
    cands.sort_by(|a, b| a.worst_mse.total_cmp(&b.worst_mse).then_with(|| secondary(a, b)));
    let mut start = 0;
    while start < cands.len() {
        let base = cands[start].worst_mse;
        let mut end = start + 1;
        while end < cands.len() && cands[end].worst_mse - base <= 1e-10 {
            end += 1;
        }
        cands[start..end].sort_by(secondary);
        start = end;
    }
}

/// All KKT points that pass the primal, dual and residual checks, best first,
/// without second-order certification.
pub fn kkt_points(instance: &Instance) -> Result<Vec<CandidateSolution>> {
    instance.require_two_sum()?;
    let mut out = Vec::new();
    for pair in pairs(instance) {
        let sets = build_sets(instance, pair)?;
        if pair.p1 >= 1 && pair.p2 >= 1 {
            if let Ok(roots) = solve_case_c(instance, &sets) {
                out.extend(roots.into_iter().filter_map(|e| candidate(instance, &sets, pair, Case::C, e)));
            }
        } else {
            let m = if pair.p1 >= 1 { 0 } else { 1 };
            if let Ok(roots) = solve_case_d(instance, &sets, m) {
                for v in roots {
                    let mut e = [0.0; 2];
                    e[m] = v;
                    out.extend(candidate(instance, &sets, pair, Case::D { free: m }, e));
                }
            }
        }
    }
    canonical_order(&mut out);
    Ok(out)
}

fn certify_candidate(instance: &Instance, c: &mut CandidateSolution) -> Result<()> {
    let active = c.active_set(instance);
    c.diagnostics.certificate = Some(optimality::certify(instance, &c.b.b, &c.lambda, c.mu, &active)?);
    Ok(())
}

/// Every certified KKT point, best first.
pub fn enumerate_candidates(instance: &Instance) -> Result<Vec<CandidateSolution>> {
    let mut cands = kkt_points(instance)?;
    if cands.is_empty() {
        return Err(Error::NoCandidate);
    }
    for c in cands.iter_mut() {
        certify_candidate(instance, c)?;
    }
    Ok(cands)
}

/// The best candidate certified as a strict local minimum, or the best
/// candidate when none certifies. Candidates are certified in order until
/// one passes.
pub fn solve_two_sum(instance: &Instance) -> Result<CandidateSolution> {
    let mut cands = kkt_points(instance)?;
    if cands.is_empty() {
        return Err(if crate::feasibility::is_feasible(instance)?.feasible {
            Error::NoCandidate
        } else {
            Error::Infeasible
        });
    }
    for i in 0..cands.len() {
        certify_candidate(instance, &mut cands[i])?;
        if cands[i].is_local_min() {
            return Ok(cands.swap_remove(i));
        }
    }
    Ok(cands.swap_remove(0))
}

/// Root of the equality in case c when `ΔD = 0`, computed through the
/// resultant instead of the closed form. Exposed for cross-checking.
pub fn case_c_resultant_roots(instance: &Instance, sets: &CardinalitySets) -> Vec<[f64; 2]> {
    let r = Reduced::new(instance, sets);
    case_c_by_resultant(&r)
        .into_iter()
        .filter(|e| e.iter().all(|&v| v >= 0.0) && sqrt(r.equality(*e).abs()) <= 1e-5 * r.a(*e).max(1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    fn random_instance(rng: &mut SmallRng, k: usize, d1: usize) -> Instance {
        let h = (0..k).map(|_| rng.random_range(0.1..3.0)).collect();
        Instance::two_sum(h, d1, rng.random_range(0.5..20.0), 1.0).unwrap()
    }

    #[test]
    fn sets_follow_order_statistics() {
        let i = Instance::two_sum(vec![3.0, 1.0, 2.0, 0.5, 0.7], 3, 1.0, 1.0).unwrap();
        let s = build_sets(&i, CardinalityPair::new(2, 0)).unwrap();
        assert_eq!(s.free[0], vec![0, 2]);
        assert_eq!(s.full[0], vec![1]);
        assert!(s.free[1].is_empty());
        assert_eq!(s.full[1], vec![4, 3]);
        let all = build_sets(&i, CardinalityPair::new(3, 2)).unwrap();
        assert!(all.full.iter().all(Vec::is_empty));
        assert_eq!(build_sets(&i, CardinalityPair::new(4, 0)), Err(Error::OutOfRange));
    }

    #[test]
    fn all_free_has_no_solution() {
        let i = Instance::two_sum(vec![1.0, 2.0, 1.5], 1, 1.0, 1.0).unwrap();
        let s = build_sets(&i, CardinalityPair::new(1, 2)).unwrap();
        assert_eq!(solve_case_c(&i, &s), Err(Error::NoRealRoot));
    }

    #[test]
    fn extreme_pairs_never_enumerated() {
        let mut rng = SmallRng::seed_from_u64(1);
        let i = random_instance(&mut rng, 5, 2);
        let ps = pairs(&i);
        assert!(!ps.contains(&CardinalityPair::new(0, 0)));
        assert!(!ps.contains(&CardinalityPair::new(2, 3)));
        assert_eq!(ps.len(), 3 * 4 - 2);
    }

    #[test]
    fn two_sensor_case_d() {
        let i = Instance::two_sum(vec![2.0, 1.0], 1, 1.0, 1.0).unwrap();
        let pair = CardinalityPair::new(1, 0);
        let s = build_sets(&i, pair).unwrap();
        assert_eq!(solve_case_d(&i, &s, 0).unwrap(), vec![1.0]);
        let b = assemble(&i, &s, [1.0, 0.0]).unwrap();
        assert_eq!(b.b, vec![0.5, 1.0]);
        let m = multipliers(&i, &s, &b).unwrap();
        assert!(m.lambda[1] > 0.0);
        assert_eq!(m.lambda[0], 0.0);
        assert!(m.stationarity_residual < 1e-14);
        // cross-check against the closed form for λ on the idle group:
        // 2B₁B₂/A² · (A − E B₁ − h₂√P B₂)/B₁ with A = 3, B = 1, E = 1, h₂ = 1
        assert_relative_eq!(m.lambda[1], 2.0 / 9.0 * (3.0 - 1.0 - 1.0), max_relative = 1e-12);
        // no full-power sensor in D₁, so the window is (0, h₁√P) = (0, 2)
        assert!(feasibility_window(&i, &s, [1.0, 0.0], Case::D { free: 0 }));
        assert!(!feasibility_window(&i, &s, [2.0, 0.0], Case::D { free: 0 }));
        let best = solve_two_sum(&i).unwrap();
        assert_relative_eq!(best.worst_mse, 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn case_d_closed_form_sign_filter() {
        let i = Instance::two_sum(vec![1.0, 3.0], 1, 1.0, 1.0).unwrap();
        let s = build_sets(&i, CardinalityPair::new(0, 1)).unwrap();
        // E₂ = √P(h₁′ − h₂′) = 1
        assert_eq!(solve_case_d(&i, &s, 1).unwrap(), vec![1.0]);
        let s = build_sets(&i, CardinalityPair::new(1, 0)).unwrap();
        // E₁ = 3 needs b₁ = 3 > √P
        assert_eq!(solve_case_d(&i, &s, 0).unwrap(), vec![3.0]);
        assert!(assemble(&i, &s, [3.0, 0.0]).is_none());
    }

    #[test]
    fn balanced_symmetric_case_c() {
        let i = Instance::two_sum(vec![2.0, 0.5, 2.0, 0.5], 2, 1.0, 1.0).unwrap();
        let s = build_sets(&i, CardinalityPair::new(1, 1)).unwrap();
        let roots = solve_case_c(&i, &s).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0][0], roots[0][1], max_relative = 1e-15);
        let b = assemble(&i, &s, roots[0]).unwrap();
        assert_eq!(b.b[0], b.b[2]);
        assert!(b.b[0] < 1.0);
    }

    #[test]
    fn closed_form_matches_resultant_when_balanced() {
        let mut rng = SmallRng::seed_from_u64(21);
        for _ in 0..200 {
            let i = random_instance(&mut rng, 6, 3);
            let p1 = rng.random_range(1..=3);
            let p2 = rng.random_range(1..=3);
            if (p1, p2) == (3, 3) {
                continue;
            }
            let s = build_sets(&i, CardinalityPair::new(p1, p2)).unwrap();
            let closed = solve_case_c(&i, &s);
            let via_res = case_c_resultant_roots(&i, &s);
            match closed {
                Ok(c) => {
                    let hit = via_res.iter().any(|r| {
                        (r[0] - c[0][0]).abs() <= 1e-8 * (1.0 + c[0][0]) && (r[1] - c[0][1]).abs() <= 1e-8 * (1.0 + c[0][1])
                    });
                    assert!(hit, "closed {:?} vs resultant {:?}", c, via_res);
                }
                Err(_) => {}
            }
        }
    }

    #[test]
    fn unbalanced_roots_satisfy_both_equations() {
        let mut rng = SmallRng::seed_from_u64(5);
        let mut seen = 0;
        for _ in 0..300 {
            let i = random_instance(&mut rng, 4, 1);
            for p2 in 1..3 {
                let s = build_sets(&i, CardinalityPair::new(1, p2)).unwrap();
                let r = Reduced::new(&i, &s);
                if let Ok(roots) = solve_case_c(&i, &s) {
                    for e in roots {
                        seen += 1;
                        let scale = r.a(e).max(1.0);
                        assert!(r.equality(e).abs() <= 1e-9 * scale);
                        assert!(r.coupling(e).abs() <= 1e-9 * scale);
                    }
                }
            }
        }
        assert!(seen > 20, "{seen}");
    }

    #[test]
    fn accepted_candidates_are_kkt_points() {
        let mut rng = SmallRng::seed_from_u64(9);
        for _ in 0..100 {
            let k = rng.random_range(3..7);
            let d1 = rng.random_range(1..k);
            let i = random_instance(&mut rng, k, d1);
            let Ok(cands) = kkt_points(&i) else { continue };
            for c in cands {
                assert!(c.lambda.iter().all(|&l| l >= 0.0));
                assert!(c.diagnostics.stationarity_residual <= 1e-8);
                assert!(c.diagnostics.equality_residual <= 1e-8);
                let agg = aggregates(&i, &c.b).unwrap();
                let sizes = i.group_sizes();
                let gap = agg.equalized_mse(0, sizes[0]) - agg.equalized_mse(1, sizes[1]);
                assert!(gap.abs() <= 1e-8, "{gap}");
                c.b.check(&i).unwrap();
                for (k, &l) in c.lambda.iter().enumerate() {
                    if c.b.b[k] < i.sqrt_power() {
                        assert_eq!(l, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn scale_invariance() {
        let i = Instance::two_sum(vec![0.6, 1.4, 2.2, 0.9, 1.1], 2, 3.0, 0.8).unwrap();
        let t: f64 = 2.5;
        let j = Instance::two_sum(vec![0.6, 1.4, 2.2, 0.9, 1.1], 2, 3.0 * t * t, 0.8 * t * t).unwrap();
        let a = solve_two_sum(&i).unwrap();
        let b = solve_two_sum(&j).unwrap();
        assert_relative_eq!(a.worst_mse, b.worst_mse, max_relative = 1e-10);
        for (x, y) in a.b.b.iter().zip(&b.b.b) {
            assert_relative_eq!(x * t, *y, max_relative = 1e-10);
        }
    }

    #[test]
    fn high_snr_single_full_power_sensor() {
        let mut rng = SmallRng::seed_from_u64(13);
        for _ in 0..20 {
            let h: Vec<f64> = (0..8).map(|_| rng.random_range(0.1..3.0)).collect();
            let i = Instance::two_sum(h.clone(), 3, 1e6, 1.0).unwrap();
            let best = solve_two_sum(&i).unwrap();
            assert_eq!(best.pair.p1 + best.pair.p2, 7);
            let weakest = (0..8).min_by(|&a, &b| h[a].total_cmp(&h[b])).unwrap();
            assert_eq!(best.active_set(&i), vec![weakest]);
        }
    }
}
