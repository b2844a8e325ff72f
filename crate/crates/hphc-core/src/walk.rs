//! Walk simulation: the generic per-row transition kernel for any vertical
//! step profile p_j, and the interlacing construction that builds the
//! half-plane half-comb walk from two 1D walks plus geometric horizontal
//! runs. Both produce seeded, bit-reproducible trajectories.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A site (k, j) of the planar lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeSite {
    pub k: i64,
    pub j: i64,
}

impl LatticeSite {
    pub const ORIGIN: LatticeSite = LatticeSite { k: 0, j: 0 };

    pub fn new(k: i64, j: i64) -> Self {
        LatticeSite { k, j }
    }
}

impl fmt::Display for LatticeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.k, self.j)
    }
}

impl FromStr for LatticeSite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (k, j) = s
            .split_once(',')
            .ok_or_else(|| Error::InvalidArgument(format!("site must be `k,j`, got `{s}`")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| Error::InvalidArgument(format!("bad site coordinate `{t}`: {e}")))
        };
        Ok(LatticeSite::new(parse(k)?, parse(j)?))
    }
}

/// Vertical-step probability profile j -> p_j. Horizontal steps from row j
/// each carry probability 1/2 - p_j, vertical steps p_j, so rows with
/// p_j = 1/2 have their horizontal edges removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PJProfile {
    /// p_j = 1/4 everywhere: the simple symmetric planar walk.
    Simple,
    /// p_0 = 1/4, p_j = 1/2 elsewhere: the walk on the comb.
    Comb,
    /// p_j = 1/4 for j >= 0, p_j = 1/2 for j < 0: square lattice on the
    /// upper half-plane, comb below the axis.
    Hphc,
    /// p_{j+L} = p_j with one period of values for rows 0..L.
    Periodic { probs: Vec<Rational64> },
    /// Explicit per-row overrides on top of a default.
    Custom {
        map: BTreeMap<i64, Rational64>,
        default: Rational64,
    },
}

fn check_p(p: Rational64, what: &str) -> Result<()> {
    if p <= Rational64::new(0, 1) || p > Rational64::new(1, 2) {
        return Err(Error::InvalidProfile(format!(
            "{what}: p = {p} outside (0, 1/2]"
        )));
    }
    Ok(())
}

impl PJProfile {
    pub fn periodic(probs: Vec<Rational64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProfile("periodic profile needs L >= 1".into()));
        }
        for p in &probs {
            check_p(*p, "periodic profile")?;
        }
        if probs.iter().all(|p| *p == Rational64::new(1, 2)) {
            return Err(Error::InvalidProfile(
                "profile needs min p_j < 1/2 somewhere".into(),
            ));
        }
        Ok(PJProfile::Periodic { probs })
    }

    pub fn custom(map: BTreeMap<i64, Rational64>, default: Rational64) -> Result<Self> {
        check_p(default, "custom profile default")?;
        for (j, p) in &map {
            check_p(*p, &format!("custom profile row {j}"))?;
        }
        let half = Rational64::new(1, 2);
        if default == half && map.values().all(|p| *p == half) {
            return Err(Error::InvalidProfile(
                "profile needs min p_j < 1/2 somewhere".into(),
            ));
        }
        Ok(PJProfile::Custom { map, default })
    }

    /// Exact p_j for row j.
    pub fn p(&self, j: i64) -> Rational64 {
        match self {
            PJProfile::Simple => Rational64::new(1, 4),
            PJProfile::Comb => {
                if j == 0 {
                    Rational64::new(1, 4)
                } else {
                    Rational64::new(1, 2)
                }
            }
            PJProfile::Hphc => {
                if j >= 0 {
                    Rational64::new(1, 4)
                } else {
                    Rational64::new(1, 2)
                }
            }
            PJProfile::Periodic { probs } => {
                let l = probs.len() as i64;
                probs[j.rem_euclid(l) as usize]
            }
            PJProfile::Custom { map, default } => map.get(&j).copied().unwrap_or(*default),
        }
    }

    #[inline]
    pub fn p_f64(&self, j: i64) -> f64 {
        match self {
            PJProfile::Simple => 0.25,
            PJProfile::Hphc => {
                if j >= 0 {
                    0.25
                } else {
                    0.5
                }
            }
            PJProfile::Comb => {
                if j == 0 {
                    0.25
                } else {
                    0.5
                }
            }
            _ => self.p(j).to_f64().expect("profile probability fits f64"),
        }
    }
}

impl fmt::Display for PJProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PJProfile::Simple => write!(f, "simple"),
            PJProfile::Comb => write!(f, "comb"),
            PJProfile::Hphc => write!(f, "hphc"),
            PJProfile::Periodic { probs } => {
                write!(f, "periodic:")?;
                for (i, p) in probs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            PJProfile::Custom { map, default } => {
                write!(f, "custom:{default}")?;
                for (j, p) in map {
                    write!(f, ";{j}={p}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational64> {
    Rational64::from_str(s.trim())
        .map_err(|e| Error::InvalidProfile(format!("bad probability `{s}`: {e}")))
}

impl FromStr for PJProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "simple" => return Ok(PJProfile::Simple),
            "comb" => return Ok(PJProfile::Comb),
            "hphc" => return Ok(PJProfile::Hphc),
            _ => {}
        }
        if let Some(rest) = s.trim().strip_prefix("periodic:") {
            let probs = rest
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            return PJProfile::periodic(probs);
        }
        if let Some(rest) = s.trim().strip_prefix("custom:") {
            let mut parts = rest.split(';');
            let default = parse_rational(parts.next().unwrap_or(""))?;
            let mut map = BTreeMap::new();
            for part in parts {
                let (j, p) = part.split_once('=').ok_or_else(|| {
                    Error::InvalidProfile(format!("custom row must be `j=p`, got `{part}`"))
                })?;
                let j = j.trim().parse::<i64>().map_err(|e| {
                    Error::InvalidProfile(format!("bad custom row index `{j}`: {e}"))
                })?;
                map.insert(j, parse_rational(p)?);
            }
            return PJProfile::custom(map, default);
        }
        Err(Error::InvalidProfile(format!(
            "unknown profile `{s}` (expected simple|comb|hphc|periodic:<p,..>|custom:<p>[;j=p..])"
        )))
    }
}

/// One-step transition law from `site`: the up-to-four neighbors with their
/// exact probabilities (zero-probability moves are omitted).
pub fn step_kernel(site: LatticeSite, profile: &PJProfile) -> Vec<(LatticeSite, Rational64)> {
    let p = profile.p(site.j);
    let h = Rational64::new(1, 2) - p;
    let mut moves = Vec::with_capacity(4);
    if h != Rational64::new(0, 1) {
        moves.push((LatticeSite::new(site.k + 1, site.j), h));
        moves.push((LatticeSite::new(site.k - 1, site.j), h));
    }
    moves.push((LatticeSite::new(site.k, site.j + 1), p));
    moves.push((LatticeSite::new(site.k, site.j - 1), p));
    moves
}

/// The RNG stream for one replica of a Monte Carlo experiment: the master
/// seed keys the generator and the replica index selects the ChaCha stream,
/// so replicas are independent and scheduling-order never matters.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

/// One geometric sample with P(Y = k) = 2^{-(k+1)}: the inverse CDF of the
/// law read off the binary expansion of a uniform word (the sample is the
/// run of leading one bits), so a single draw suffices with probability
/// 1 - 2^-64 and the law is exact.
pub fn sample_geometric<R: RngCore + ?Sized>(rng: &mut R) -> u64 {
    let mut total = 0u64;
    loop {
        let ones = (!rng.next_u64()).leading_zeros() as u64;
        total += ones;
        if ones < 64 {
            return total;
        }
    }
}

/// U_K: the sum of K independent geometric samples (negative binomial,
/// mean K, variance 2K).
pub fn sample_negbin<R: RngCore + ?Sized>(k: u64, rng: &mut R) -> u64 {
    (0..k).map(|_| sample_geometric(rng)).sum()
}

/// Book-keeping of the interlacing construction: how much of each 1D walk
/// has been consumed and how many horizontal moves remain in the current
/// geometric run. `pending_horizontal > 0` only while j >= 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstructionState {
    pub site: LatticeSite,
    pub s1_index: u64,
    pub s2_index: u64,
    pub pending_horizontal: u64,
    pub geometric_index: u64,
}

#[derive(Debug, Clone)]
enum StreamKind {
    Kernel { profile: PJProfile, site: LatticeSite },
    Construction(ConstructionState),
}

/// A lazy, seeded trajectory: yields the start site and then one site per
/// lattice move, `steps + 1` sites in total. Identical seed and parameters
/// give an identical site sequence.
#[derive(Debug, Clone)]
pub struct TrajectoryStream {
    rng: ChaCha8Rng,
    remaining: u64,
    emitted_start: bool,
    kind: StreamKind,
}

impl TrajectoryStream {
    fn with_rng(rng: ChaCha8Rng, steps: u64, kind: StreamKind) -> Self {
        TrajectoryStream {
            rng,
            remaining: steps,
            emitted_start: false,
            kind,
        }
    }

    pub fn site(&self) -> LatticeSite {
        match &self.kind {
            StreamKind::Kernel { site, .. } => *site,
            StreamKind::Construction(state) => state.site,
        }
    }

    /// Construction-mode internals, for inspection in tests and diagnostics.
    pub fn construction_state(&self) -> Option<&ConstructionState> {
        match &self.kind {
            StreamKind::Construction(state) => Some(state),
            StreamKind::Kernel { .. } => None,
        }
    }

    pub fn steps_remaining(&self) -> u64 {
        self.remaining
    }

    fn advance(&mut self) {
        match &mut self.kind {
            StreamKind::Kernel { profile, site } => {
                let p = profile.p_f64(site.j);
                let h = 0.5 - p;
                let u: f64 = self.rng.random();
                if u < h {
                    site.k += 1;
                } else if u < 2.0 * h {
                    site.k -= 1;
                } else if u < 2.0 * h + p {
                    site.j += 1;
                } else {
                    site.j -= 1;
                }
            }
            StreamKind::Construction(state) => {
                if state.pending_horizontal > 0 {
                    state.pending_horizontal -= 1;
                    state.site.k += if self.rng.random::<bool>() { 1 } else { -1 };
                    state.s1_index += 1;
                } else {
                    state.site.j += if self.rng.random::<bool>() { 1 } else { -1 };
                    state.s2_index += 1;
                    // back on the upper half-plane (j = 0 counts): a fresh
                    // geometric horizontal run starts, possibly of length 0
                    if state.site.j >= 0 {
                        state.pending_horizontal = sample_geometric(&mut self.rng);
                        state.geometric_index += 1;
                    }
                }
            }
        }
    }
}

impl Iterator for TrajectoryStream {
    type Item = LatticeSite;

    fn next(&mut self) -> Option<LatticeSite> {
        if !self.emitted_start {
            self.emitted_start = true;
            return Some(self.site());
        }
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.advance();
        Some(self.site())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize + usize::from(!self.emitted_start);
        (n, Some(n))
    }
}

impl ExactSizeIterator for TrajectoryStream {}

/// Trajectory under the per-row transition kernel, started at the origin.
pub fn simulate_kernel(steps: u64, seed: u64, profile: &PJProfile) -> TrajectoryStream {
    simulate_kernel_from(LatticeSite::ORIGIN, steps, seed, profile)
}

/// Same, from an arbitrary start site.
pub fn simulate_kernel_from(
    start: LatticeSite,
    steps: u64,
    seed: u64,
    profile: &PJProfile,
) -> TrajectoryStream {
    kernel_with_rng(start, steps, replica_rng(seed, 0), profile)
}

pub(crate) fn kernel_with_rng(
    start: LatticeSite,
    steps: u64,
    rng: ChaCha8Rng,
    profile: &PJProfile,
) -> TrajectoryStream {
    TrajectoryStream::with_rng(
        rng,
        steps,
        StreamKind::Kernel {
            profile: profile.clone(),
            site: start,
        },
    )
}

/// Half-plane half-comb trajectory via the interlacing construction:
/// horizontal moves come in geometric runs consumed from one 1D walk while
/// j >= 0, and vertical moves follow the other 1D walk, uninterrupted while
/// below the axis.
pub fn simulate_construction(steps: u64, seed: u64) -> TrajectoryStream {
    construction_with_rng(steps, replica_rng(seed, 0))
}

pub(crate) fn construction_with_rng(steps: u64, mut rng: ChaCha8Rng) -> TrajectoryStream {
    // Y_1 horizontal steps before the first vertical one, possibly none.
    let pending = sample_geometric(&mut rng);
    TrajectoryStream::with_rng(
        rng,
        steps,
        StreamKind::Construction(ConstructionState {
            site: LatticeSite::ORIGIN,
            s1_index: 0,
            s2_index: 0,
            pending_horizontal: pending,
            geometric_index: 1,
        }),
    )
}
