//! Problem instances and transmit/receive policies.
//!
//! Sensor indices are 0-based everywhere in this crate. The file formats in the
//! companion crate translate to and from the 1-based labels users see.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math;
use crate::{Error, Result};

/// Channel magnitudes `h_k > 0`, optionally with phases for the complex model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    h: Vec<f64>,
    phases: Option<Vec<f64>>,
}

impl ChannelVector {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        let cv = Self { h, phases: None };
        cv.check()?;
        Ok(cv)
    }

    pub fn with_phases(h: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != h.len() {
            return Err(Error::DimensionMismatch {
                expected: h.len(),
                got: phases.len(),
            });
        }
        let cv = Self {
            h,
            phases: Some(phases),
        };
        cv.check()?;
        Ok(cv)
    }

    fn check(&self) -> Result<()> {
        if self.h.len() < 2 {
            return Err(Error::TooFewSensors(self.h.len()));
        }
        if let Some(k) = self.h.iter().position(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::NonPositiveChannel(k));
        }
        if let Some(ph) = &self.phases {
            if let Some(k) = ph.iter().position(|p| !p.is_finite()) {
                return Err(Error::NonPositiveChannel(k));
            }
        }
        Ok(())
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.h
    }

    pub fn phases(&self) -> Option<&[f64]> {
        self.phases.as_deref()
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// Disjoint sensor index sets `D_m`, one per computed sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputationGroups {
    groups: Vec<Vec<usize>>,
}

impl ComputationGroups {
    /// Groups are kept in the order given; indices inside a group are sorted.
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        let groups = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        Self { groups }
    }

    /// `D_1 = {0..d1}`, `D_2 = {d1..d1+d2}`.
    pub fn contiguous(d1: usize, d2: usize) -> Self {
        Self {
            groups: vec![(0..d1).collect(), (d1..d1 + d2).collect()],
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, m: usize) -> Result<&[usize]> {
        self.groups
            .get(m)
            .map(Vec::as_slice)
            .ok_or(Error::InvalidComputationIndex(m))
    }

    pub fn count(&self) -> usize {
        self.groups.len()
    }

    fn check(&self, k: usize) -> Result<()> {
        let mut seen = vec![false; k];
        for (m, g) in self.groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::EmptyGroup(m));
            }
            for &s in g {
                if s >= k {
                    return Err(Error::SensorOutOfRange { index: s, k });
                }
                if seen[s] {
                    return Err(Error::OverlappingGroups { sensor: s });
                }
                seen[s] = true;
            }
        }
        Ok(())
    }
}

/// One robust AirComp problem: channels, groups, peak power `P` and per-dimension noise `σ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub channels: ChannelVector,
    pub groups: ComputationGroups,
    pub power: f64,
    pub noise: f64,
}

impl Instance {
    pub fn new(channels: ChannelVector, groups: ComputationGroups, power: f64, noise: f64) -> Result<Self> {
        validate(Self {
            channels,
            groups,
            power,
            noise,
        })
    }

    /// Two-sum instance with `D_1 = {0..d1}` and `D_2` the remaining sensors.
    pub fn two_sum(h: Vec<f64>, d1: usize, power: f64, noise: f64) -> Result<Self> {
        let k = h.len();
        if d1 == 0 || d1 >= k {
            return Err(Error::EmptyGroup(if d1 == 0 { 0 } else { 1 }));
        }
        Self::new(ChannelVector::new(h)?, ComputationGroups::contiguous(d1, k - d1), power, noise)
    }

    pub fn k(&self) -> usize {
        self.channels.len()
    }

    pub fn h(&self) -> &[f64] {
        self.channels.magnitudes()
    }

    pub fn sqrt_power(&self) -> f64 {
        math::sqrt(self.power)
    }

    pub fn snr(&self) -> f64 {
        self.power / self.noise
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.groups().iter().map(Vec::len).collect()
    }

    /// `ΔD = |D_2| − |D_1|`; only meaningful for two groups.
    pub fn delta_d(&self) -> i64 {
        let sizes = self.group_sizes();
        match sizes.as_slice() {
            [d1, d2, ..] => *d2 as i64 - *d1 as i64,
            _ => 0,
        }
    }

    /// Membership vector: `owner[k] = Some(m)` when sensor `k ∈ D_m`.
    pub fn owners(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.k()];
        for (m, g) in self.groups.groups().iter().enumerate() {
            for &s in g {
                owner[s] = Some(m);
            }
        }
        owner
    }

    /// Checks the two-sum convention `M = 2`, `D_1 ∪ D_2 = [0..K)`.
    pub fn require_two_sum(&self) -> Result<()> {
        if self.groups.count() != 2 || self.group_sizes().iter().sum::<usize>() != self.k() {
            return Err(Error::NotTwoSumPartition);
        }
        Ok(())
    }

    /// Sub-instance keeping only `sensors` (re-indexed contiguously in the given order)
    /// and the groups listed in `computations`.
    pub fn restrict(&self, computations: &[usize]) -> Result<(Instance, Vec<usize>)> {
        let mut sensors = Vec::new();
        let mut groups = Vec::new();
        for &m in computations {
            let g = self.groups.group(m)?;
            let start = sensors.len();
            sensors.extend_from_slice(g);
            groups.push((start..sensors.len()).collect());
        }
        let h = sensors.iter().map(|&s| self.h()[s]).collect();
        let phases = self
            .channels
            .phases()
            .map(|p| sensors.iter().map(|&s| p[s]).collect());
        let channels = match phases {
            Some(p) => ChannelVector::with_phases(h, p)?,
            None => ChannelVector {
                h,
                phases: None,
            },
        };
        // single-sensor chains are legal sub-problems, so K ≥ 2 is not re-checked here
        let sub = Instance {
            channels,
            groups: ComputationGroups::new(groups),
            power: self.power,
            noise: self.noise,
        };
        Ok((sub, sensors))
    }
}

/// Returns the instance unchanged when every invariant holds.
pub fn validate(instance: Instance) -> Result<Instance> {
    instance.channels.check()?;
    if !(instance.power > 0.0 && instance.power.is_finite()) {
        return Err(Error::NonPositivePower);
    }
    if !(instance.noise > 0.0 && instance.noise.is_finite()) {
        return Err(Error::NonPositiveNoise);
    }
    instance.groups.check(instance.k())?;
    Ok(instance)
}

/// Transmit amplitudes `b_k ∈ [0, √P]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TxPolicy {
    pub b: Vec<f64>,
}

impl TxPolicy {
    pub fn new(b: Vec<f64>) -> Self {
        Self { b }
    }

    pub fn full_power(instance: &Instance) -> Self {
        Self {
            b: vec![instance.sqrt_power(); instance.k()],
        }
    }

    pub fn zeros(k: usize) -> Self {
        Self { b: vec![0.0; k] }
    }

    pub fn check(&self, instance: &Instance) -> Result<()> {
        if self.b.len() != instance.k() {
            return Err(Error::DimensionMismatch {
                expected: instance.k(),
                got: self.b.len(),
            });
        }
        let cap = instance.sqrt_power() * (1.0 + 1e-12);
        match self.b.iter().position(|&b| !(0.0..=cap).contains(&b)) {
            Some(k) => Err(Error::OutsideBox(k)),
            None => Ok(()),
        }
    }
}

/// Receive scaling magnitudes `c_m ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RxPolicy {
    pub c: Vec<f64>,
}

/// Orders `indices` by channel, strongest first; ties by ascending index.
pub fn strongest_first(indices: &[usize], h: &[f64]) -> Vec<usize> {
    let mut v = indices.to_vec();
    v.sort_by(|&a, &b| h[b].partial_cmp(&h[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    v
}

/// Orders `indices` by channel, weakest first; ties by ascending index.
pub fn weakest_first(indices: &[usize], h: &[f64]) -> Vec<usize> {
    let mut v = indices.to_vec();
    v.sort_by(|&a, &b| h[a].partial_cmp(&h[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(h: Vec<f64>, groups: Vec<Vec<usize>>, p: f64, s: f64) -> Result<Instance> {
        Instance::new(ChannelVector::new(h)?, ComputationGroups::new(groups), p, s)
    }

    #[test]
    fn minimal_instance_is_valid() {
        let i = inst(vec![1.0, 2.0], vec![vec![0], vec![1]], 1.0, 1.0).unwrap();
        assert_eq!(i.delta_d(), 0);
        assert_eq!(validate(i.clone()).unwrap(), i);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let e = inst(vec![1.0, 2.0], vec![vec![0], vec![0]], 1.0, 1.0).unwrap_err();
        assert_eq!(e, Error::OverlappingGroups { sensor: 0 });
    }

    #[test]
    fn zero_channel_rejected() {
        let e = inst(vec![0.0, 1.0], vec![vec![0], vec![1]], 1.0, 1.0).unwrap_err();
        assert_eq!(e, Error::NonPositiveChannel(0));
    }

    #[test]
    fn other_errors() {
        assert_eq!(
            inst(vec![1.0, 1.0], vec![vec![0], vec![]], 1.0, 1.0).unwrap_err(),
            Error::EmptyGroup(1)
        );
        assert_eq!(
            inst(vec![1.0, 1.0], vec![vec![0], vec![1]], 0.0, 1.0).unwrap_err(),
            Error::NonPositivePower
        );
        assert_eq!(
            inst(vec![1.0, 1.0], vec![vec![0], vec![1]], 1.0, -1.0).unwrap_err(),
            Error::NonPositiveNoise
        );
        assert_eq!(
            inst(vec![1.0, 1.0], vec![vec![0], vec![2]], 1.0, 1.0).unwrap_err(),
            Error::SensorOutOfRange { index: 2, k: 2 }
        );
        assert_eq!(ChannelVector::new(vec![1.0]).unwrap_err(), Error::TooFewSensors(1));
    }

    #[test]
    fn ordering_breaks_ties_by_index() {
        let h = [2.0, 3.0, 2.0, 1.0];
        assert_eq!(strongest_first(&[0, 1, 2, 3], &h), vec![1, 0, 2, 3]);
        assert_eq!(weakest_first(&[0, 1, 2, 3], &h), vec![3, 0, 2, 1]);
    }

    #[test]
    fn restrict_reindexes() {
        let i = inst(
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![vec![0, 3], vec![1], vec![2, 4]],
            1.0,
            1.0,
        )
        .unwrap();
        let (sub, map) = i.restrict(&[0, 2]).unwrap();
        assert_eq!(map, vec![0, 3, 2, 4]);
        assert_eq!(sub.h(), &[1.0, 4.0, 3.0, 5.0]);
        assert_eq!(sub.groups.groups(), &[vec![0, 1], vec![2, 3]]);
        sub.require_two_sum().unwrap();
        assert!(i.require_two_sum().is_err());
    }

    #[test]
    fn tx_policy_box() {
        let i = Instance::two_sum(vec![1.0, 2.0], 1, 4.0, 1.0).unwrap();
        assert!(TxPolicy::full_power(&i).check(&i).is_ok());
        assert_eq!(TxPolicy::new(vec![0.0, 2.5]).check(&i).unwrap_err(), Error::OutsideBox(1));
        assert!(matches!(
            TxPolicy::new(vec![0.0]).check(&i),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
