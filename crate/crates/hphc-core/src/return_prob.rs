//! The 2N-step return probability of the half-plane half-comb walk, via the
//! exact double sum over the 1D bridge fluctuation law and the geometric-run
//! binomials, in two modes: big-rational (bit-exact) and log-domain f64
//! (for N far beyond exact reach), plus the 2/(pi N) asymptotic.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{binomial, BridgeRowCache, ExactProb};

/// Default cutoff for exact mode; the sum has ~N^2 big-rational terms with
/// O(N)-digit numerators.
pub const DEFAULT_EXACT_BOUND: u64 = 512;
/// Cutoff for the log-domain mode (the sum is O(N^2) float terms).
pub const MAX_LOG_N: u64 = 100_000;

/// A probability stored as its natural log; -inf encodes zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogProb(f64);

impl LogProb {
    pub fn new(log_value: f64) -> Result<Self> {
        if log_value.is_nan() {
            return Err(Error::InvalidArgument("log probability is NaN".into()));
        }
        if log_value > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "log probability {log_value} > 0"
            )));
        }
        Ok(LogProb(log_value.min(0.0)))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn prob(&self) -> f64 {
        self.0.exp()
    }
}

/// Which evaluation route(s) to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Big-rational only; errors above the exact bound.
    Exact,
    /// Log-domain only.
    Log,
    /// Exact (plus log) below the bound, log-domain alone above it.
    Auto,
}

/// One row of a return-probability table.
#[derive(Debug, Clone, Serialize)]
pub struct ReturnProbRecord {
    pub n: u64,
    #[serde(serialize_with = "ser_exact")]
    pub exact: Option<ExactProb>,
    pub log_prob: LogProb,
    /// pi * N * P(return) / 2; approaches 1 from below as N grows.
    pub scaled: f64,
}

fn ser_exact<S: serde::Serializer>(
    value: &Option<ExactProb>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(p) => ser.serialize_some(&format!("{p}")),
        None => ser.serialize_none(),
    }
}

/// Table of ln k!, filled on demand.
#[derive(Debug, Default)]
pub struct LnFactTable {
    values: Vec<f64>,
}

impl LnFactTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ensure(&mut self, max_n: u64) {
        while self.values.len() <= max_n as usize {
            let k = self.values.len() as f64;
            self.values.push(statrs::function::gamma::ln_gamma(k + 1.0));
        }
    }

    #[inline]
    pub fn ln_binom(&self, a: u64, b: u64) -> f64 {
        debug_assert!(b <= a);
        self.values[a as usize] - self.values[b as usize] - self.values[(a - b) as usize]
    }
}

/// Streaming log-sum-exp with a running maximum: terms spanning hundreds of
/// orders of magnitude accumulate without overflow or total underflow.
#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    fn add(&mut self, l: f64) {
        if l == f64::NEG_INFINITY {
            return;
        }
        if l <= self.max {
            self.sum += (l - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - l).exp() + 1.0;
            self.max = l;
        }
    }

    fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Evaluator with the memoized state shared across a table run: bridge-count
/// rows for exact mode and the ln-factorial table for log mode.
#[derive(Debug, Default)]
pub struct ReturnProbEngine {
    bridge: BridgeRowCache,
    lf: LnFactTable,
}

impl ReturnProbEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Exact P(C(2N) = (0,0)): every term of the double sum is a dyadic
    /// rational with denominator dividing 2^{4N}, so the sum accumulates as
    /// one big integer over that common denominator.
    pub fn exact(&mut self, n: u64, bound: u64) -> Result<ExactProb> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "return probability needs N >= 1".into(),
            ));
        }
        if n > bound {
            return Err(Error::SizeBound {
                what: "exact-mode half-length N",
                requested: n,
                bound,
            });
        }
        let mut num = binomial(2 * n, n as i64);
        for half in 1..=n {
            let b1 = binomial(2 * n - 2 * half, (n - half) as i64);
            let a = 2 * n - 2 * half;
            let mut b2 = BigInt::one();
            let row = self.bridge.row(half);
            for r in 1..=2 * half {
                b2 = b2 * BigInt::from(a + r) / BigInt::from(r);
                let w = &row[(r as usize + 1) / 2 - 1];
                num += ((w * &b1) * &b2) << (2 * half - r);
            }
        }
        ExactProb::dyadic(num, 4 * n)
    }

    /// ln P(2n, 2r) from the closed form, with Q evaluated through the
    /// ln-factorial table. The bracket 1 + ((2r-n)/n) Q stays in (0, 2].
    #[inline]
    fn ln_p2n2r(&self, n: u64, r: u64) -> f64 {
        let ln_c2nn = self.lf.ln_binom(2 * n, n);
        let q = (self.lf.ln_binom(2 * r, r) + self.lf.ln_binom(2 * n - 2 * r, n - r) - ln_c2nn)
            .exp();
        let skew = (2.0 * r as f64 - n as f64) / n as f64;
        -((2 * n + 1) as f64) * std::f64::consts::LN_2 + ln_c2nn - ((n + 1) as f64).ln()
            + (skew * q).ln_1p()
    }

    /// Log-domain P(C(2N) = (0,0)): same double sum, accumulated with a
    /// running-maximum log-sum-exp in a fixed (n outer, r inner) order.
    pub fn log(&mut self, n: u64) -> Result<LogProb> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "return probability needs N >= 1".into(),
            ));
        }
        if n > MAX_LOG_N {
            return Err(Error::SizeBound {
                what: "log-mode half-length N",
                requested: n,
                bound: MAX_LOG_N,
            });
        }
        let ln2 = std::f64::consts::LN_2;
        self.lf.ensure(2 * n + 1);
        let mut lse = LogSumExp::new();
        lse.add(self.lf.ln_binom(2 * n, n) - (4 * n) as f64 * ln2);
        for half in 1..=n {
            let a = 2 * n - 2 * half;
            let outer = self.lf.ln_binom(a, a / 2) - a as f64 * ln2;
            for rp in 1..=half {
                let ln_p = self.ln_p2n2r(half, rp);
                for r in [2 * rp - 1, 2 * rp] {
                    let inner = self.lf.ln_binom(a + r, r) - (a + r) as f64 * ln2;
                    lse.add(ln_p + outer + inner);
                }
            }
        }
        LogProb::new(lse.value())
    }

    /// One table row; in `Auto` mode the exact value is included whenever N
    /// is within the exact bound, and the log value is always present.
    pub fn record(&mut self, n: u64, mode: EvalMode, exact_bound: u64) -> Result<ReturnProbRecord> {
        let exact = match mode {
            EvalMode::Exact => Some(self.exact(n, exact_bound)?),
            EvalMode::Log => None,
            EvalMode::Auto => {
                if n <= exact_bound {
                    Some(self.exact(n, exact_bound)?)
                } else {
                    None
                }
            }
        };
        let log_prob = self.log(n)?;
        let ln_value = match &exact {
            Some(p) => p.ln(),
            None => log_prob.value(),
        };
        let scaled = std::f64::consts::PI * n as f64 / 2.0 * ln_value.exp();
        Ok(ReturnProbRecord {
            n,
            exact,
            log_prob,
            scaled,
        })
    }

    /// Records for an ascending grid of N values.
    pub fn table(
        &mut self,
        grid: &[u64],
        mode: EvalMode,
        exact_bound: u64,
    ) -> Result<Vec<ReturnProbRecord>> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty N grid".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "N grid must be strictly ascending".into(),
            ));
        }
        grid.iter().map(|&n| self.record(n, mode, exact_bound)).collect()
    }
}

/// Exact P(C(2N) = (0,0)) with the default exact-mode bound.
pub fn exact_return_prob(n: u64) -> Result<ExactProb> {
    ReturnProbEngine::new().exact(n, DEFAULT_EXACT_BOUND)
}

/// Log-domain P(C(2N) = (0,0)).
pub fn log_return_prob(n: u64) -> Result<LogProb> {
    ReturnProbEngine::new().log(n)
}

/// The asymptotic value 2 / (pi N).
pub fn asymptotic_return_prob(n: u64) -> f64 {
    assert!(n >= 1);
    2.0 / (std::f64::consts::PI * n as f64)
}

/// Convergence diagnostic table: scaled = pi N P / 2 per grid point.
pub fn scaled_convergence_table(
    grid: &[u64],
    mode: EvalMode,
    exact_bound: u64,
) -> Result<Vec<ReturnProbRecord>> {
    ReturnProbEngine::new().table(grid, mode, exact_bound)
}
