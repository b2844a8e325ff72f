//! Brute-force ground truth, kept free of the closed formulas it checks:
//! exhaustive enumeration of 1D bridge fluctuation statistics, and exact
//! dynamic programming over the 2D transition kernel.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::ExactProb;
use crate::walk::{LatticeSite, PJProfile};

/// Largest half-length for exhaustive enumeration (4^12 paths).
pub const MAX_ENUM_N: u64 = 12;
/// Largest step count for the exact occupation DP.
pub const MAX_DP_STEPS: u64 = 32;
/// Largest N for dp_return_prob (2N steps).
pub const MAX_DP_RETURN_N: u64 = 16;

/// Which path statistic a table entry refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StatKind {
    /// G_{2n}: indices 0 <= j < 2n with S(j) >= 0.
    G,
    /// K_{2n-1}: indices 0 < j <= 2n-1 with S(j) > 0.
    K,
    /// M_{2n}: indices 0 < j <= 2n with S(j) <= 0.
    M,
}

impl StatKind {
    pub fn label(&self) -> &'static str {
        match self {
            StatKind::G => "G",
            StatKind::K => "K",
            StatKind::M => "M",
        }
    }
}

/// Exact joint distribution of the fluctuation counts with the bridge event
/// S(2n) = 0, from exhaustive enumeration of all 4^n sign sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointFluctuationTable {
    pub n: u64,
    entries: BTreeMap<(StatKind, u64), ExactProb>,
}

impl JointFluctuationTable {
    /// Mass at (kind, r); zero if the pair never occurred.
    pub fn mass(&self, kind: StatKind, r: u64) -> ExactProb {
        self.entries
            .get(&(kind, r))
            .cloned()
            .unwrap_or_else(ExactProb::zero)
    }

    /// Non-zero entries in (kind, r) order.
    pub fn entries(&self) -> impl Iterator<Item = (StatKind, u64, &ExactProb)> {
        self.entries.iter().map(|(&(kind, r), p)| (kind, r, p))
    }

    /// Total bridge mass for one statistic (equals c_{2n}).
    pub fn total(&self, kind: StatKind) -> BigRational {
        self.entries
            .iter()
            .filter(|((k, _), _)| *k == kind)
            .map(|(_, p)| p.as_ratio().clone())
            .sum()
    }
}

#[derive(Default, Clone)]
struct BridgeCounts {
    g: Vec<u64>,
    k: Vec<u64>,
    m: Vec<u64>,
}

impl BridgeCounts {
    fn new(steps: usize) -> Self {
        BridgeCounts {
            g: vec![0; steps + 1],
            k: vec![0; steps + 1],
            m: vec![0; steps + 1],
        }
    }

    fn merge(mut self, other: BridgeCounts) -> BridgeCounts {
        for (a, b) in self.g.iter_mut().zip(other.g) {
            *a += b;
        }
        for (a, b) in self.k.iter_mut().zip(other.k) {
            *a += b;
        }
        for (a, b) in self.m.iter_mut().zip(other.m) {
            *a += b;
        }
        self
    }
}

fn count_mask_block(steps: usize, lo: u64, hi: u64) -> BridgeCounts {
    let mut counts = BridgeCounts::new(steps);
    for mask in lo..hi {
        let mut s: i64 = 0;
        let (mut g, mut k, mut m) = (0usize, 0usize, 0usize);
        for step in 0..steps {
            if s >= 0 {
                g += 1;
            }
            s += if mask >> step & 1 == 1 { 1 } else { -1 };
            if step + 1 < steps && s > 0 {
                k += 1;
            }
            if s <= 0 {
                m += 1;
            }
        }
        if s == 0 {
            counts.g[g] += 1;
            counts.k[k] += 1;
            counts.m[m] += 1;
        }
    }
    counts
}

/// Enumerates every 2n-step +-1 path and tallies (G_{2n}, K_{2n-1}, M_{2n})
/// over the bridges S(2n) = 0. The path space is sharded by mask prefix and
/// the per-shard tallies merge by exact integer addition, so the result does
/// not depend on scheduling.
pub fn enumerate_1d_joint(n: u64) -> Result<JointFluctuationTable> {
    if n == 0 || n > MAX_ENUM_N {
        return Err(Error::SizeBound {
            what: "enumeration half-length n",
            requested: n,
            bound: MAX_ENUM_N,
        });
    }
    let steps = (2 * n) as usize;
    let total: u64 = 1 << steps;
    let shards: u64 = if n >= 6 { 256 } else { 1 };
    let block = total / shards;
    let counts = (0..shards)
        .into_par_iter()
        .map(|i| count_mask_block(steps, i * block, (i + 1) * block))
        .reduce(|| BridgeCounts::new(steps), BridgeCounts::merge);

    let mut entries = BTreeMap::new();
    let mut insert = |kind: StatKind, tallies: &[u64]| {
        for (r, &c) in tallies.iter().enumerate() {
            if c > 0 {
                let p = ExactProb::dyadic(BigInt::from(c), 2 * n).expect("path fraction");
                entries.insert((kind, r as u64), p);
            }
        }
    };
    insert(StatKind::G, &counts.g);
    insert(StatKind::K, &counts.k);
    insert(StatKind::M, &counts.m);
    Ok(JointFluctuationTable { n, entries })
}

/// Exact occupation distribution of a walk after a fixed number of steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationVector {
    pub step: u64,
    pub mass: BTreeMap<LatticeSite, ExactProb>,
}

impl OccupationVector {
    pub fn mass_at(&self, site: LatticeSite) -> ExactProb {
        self.mass.get(&site).cloned().unwrap_or_else(ExactProb::zero)
    }

    pub fn total_mass(&self) -> BigRational {
        self.mass.values().map(|p| p.as_ratio().clone()).sum()
    }
}

/// Forward DP over the per-row kernel from the origin: exact occupation
/// probabilities after `steps` steps. The grid radius equals the step count,
/// which the walk cannot exit, so no mass is ever truncated.
pub fn dp_site_distribution(steps: u64, profile: &PJProfile) -> Result<OccupationVector> {
    if steps > MAX_DP_STEPS {
        return Err(Error::SizeBound {
            what: "dp step count",
            requested: steps,
            bound: MAX_DP_STEPS,
        });
    }
    let radius = steps as i64;
    let width = (2 * radius + 1) as usize;
    let idx = |k: i64, j: i64| -> usize { ((k + radius) as usize) * width + (j + radius) as usize };

    // per-row exact move probabilities
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let row_probs: Vec<(BigRational, BigRational)> = (-radius..=radius)
        .map(|j| {
            let p = profile.p(j);
            let p = BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()));
            (half.clone() - p.clone(), p)
        })
        .collect();

    let mut current = vec![BigRational::zero(); width * width];
    current[idx(0, 0)] = BigRational::one();
    for step in 0..steps as i64 {
        let mut next = vec![BigRational::zero(); width * width];
        for k in -step..=step {
            for j in -(step - k.abs())..=(step - k.abs()) {
                let mass = &current[idx(k, j)];
                if mass.is_zero() {
                    continue;
                }
                let (h, p) = &row_probs[(j + radius) as usize];
                if !h.is_zero() {
                    next[idx(k + 1, j)] += mass * h;
                    next[idx(k - 1, j)] += mass * h;
                }
                next[idx(k, j + 1)] += mass * p;
                next[idx(k, j - 1)] += mass * p;
            }
        }
        current = next;
    }

    let mut mass = BTreeMap::new();
    for k in -radius..=radius {
        for j in -radius..=radius {
            let m = &current[idx(k, j)];
            if !m.is_zero() {
                mass.insert(LatticeSite::new(k, j), ExactProb::new(m.clone())?);
            }
        }
    }
    debug_assert!(mass.values().map(|p| p.as_ratio().clone()).sum::<BigRational>() == BigRational::one());
    Ok(OccupationVector { step: steps, mass })
}

/// Exact probability that the half-plane half-comb walk is back at the
/// origin after 2N steps, by forward DP over the kernel.
pub fn dp_return_prob(n: u64) -> Result<ExactProb> {
    if n > MAX_DP_RETURN_N {
        return Err(Error::SizeBound {
            what: "dp return half-length N",
            requested: n,
            bound: MAX_DP_RETURN_N,
        });
    }
    let dist = dp_site_distribution(2 * n, &PJProfile::Hphc)?;
    Ok(dist.mass_at(LatticeSite::ORIGIN))
}
