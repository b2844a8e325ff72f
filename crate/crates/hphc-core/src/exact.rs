//! Exact arbitrary-precision combinatorics for the fluctuation laws of the
//! one-dimensional simple walk and the geometric-run (negative binomial)
//! quantities that enter the planar return-probability sum.
//!
//! Everything here is a pure function returning big rationals in canonical
//! form, so cross-formula equality checks are structural comparisons.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::error::{Error, Result};

/// An exact probability: a non-negative rational in `[0, 1]`, stored in
/// lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    /// Wraps a rational, checking the probability range.
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_negative() || value > BigRational::one() {
            return Err(Error::InvalidArgument(format!(
                "probability {value} outside [0, 1]"
            )));
        }
        Ok(ExactProb(value))
    }

    pub fn zero() -> Self {
        ExactProb(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactProb(BigRational::one())
    }

    /// Exact rational `num / 2^exp`.
    pub fn dyadic(num: BigInt, exp: u64) -> Result<Self> {
        Self::new(BigRational::new(num, BigInt::one() << exp))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Nearest f64; underflows to 0.0 only for probabilities below ~1e-308.
    pub fn to_f64(&self) -> f64 {
        big_ratio_to_f64(&self.0)
    }

    /// Natural log, computed without overflowing even when numerator and
    /// denominator have thousands of bits. Returns -inf for zero.
    pub fn ln(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_big(self.0.numer()) - ln_big(self.0.denom())
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// ln of a positive big integer, via a 64-bit mantissa and an exponent shift.
pub fn ln_big(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln_big needs a positive integer");
    let bits = x.bits();
    if bits <= 512 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let mantissa = (x >> shift).to_f64().expect("64-bit mantissa fits");
    mantissa.ln() + shift as f64 * std::f64::consts::LN_2
}

/// f64 value of a big ratio, stable for operands too large for `to_f64`
/// on numerator and denominator separately.
pub fn big_ratio_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * (ln_big(&x.numer().abs()) - ln_big(x.denom())).exp()
}

/// Binomial coefficient C(n, k); zero for k < 0 or k > n.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// m-th Catalan number C(2m, m) / (m + 1).
pub fn catalan(m: u64) -> BigInt {
    let (q, r) = binomial(2 * m, m as i64).div_rem(&BigInt::from(m + 1));
    debug_assert!(r.is_zero());
    q
}

/// c_{2n}: the probability a 1D simple symmetric walk is back at 0 after
/// 2n steps, C(2n, n) / 4^n.
pub fn central_return_1d(n: u64) -> ExactProb {
    ExactProb::dyadic(binomial(2 * n, n as i64), 2 * n).expect("c_{2n} is a probability")
}

/// Q(r, n) = C(2r, r) C(2n-2r, n-r) / C(2n, n), for 0 <= r <= n.
pub fn q_ratio(r: u64, n: u64) -> Result<ExactProb> {
    if n == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "q_ratio requires 0 <= r <= n with n >= 1, got r={r}, n={n}"
        )));
    }
    let num = binomial(2 * r, r as i64) * binomial(2 * n - 2 * r, (n - r) as i64);
    ExactProb::new(BigRational::new(num, binomial(2 * n, n as i64)))
}

fn check_rn(n: u64, r: u64, what: &str) -> Result<()> {
    if n == 0 || r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "{what} requires 1 <= r <= n, got r={r}, n={n}"
        )));
    }
    Ok(())
}

/// Closed form for the joint mass P(G_{2n} = 2r, S(2n) = 0) of the count of
/// non-negative indices and the bridge condition:
///
/// (1 / 2^{2n+1}) C(2n, n) (1/(n+1)) (1 + ((2r-n)/n) Q(r, n))
pub fn p2n2r_closed(n: u64, r: u64) -> Result<ExactProb> {
    check_rn(n, r, "p2n2r_closed")?;
    let q = q_ratio(r, n)?.into_ratio();
    let skew = BigRational::new(
        BigInt::from(2 * r as i64 - n as i64),
        BigInt::from(n),
    );
    let base = BigRational::new(
        binomial(2 * n, n as i64),
        (BigInt::one() << (2 * n + 1)) * BigInt::from(n + 1),
    );
    ExactProb::new(base * (BigRational::one() + skew * q))
}

/// The same mass as a sum over the first-passage decomposition:
///
/// (1 / 2^{2n}) sum_{j=1}^{r} C(2j-1, j)/(2j-1) * C(2n+1-2j, n+1-j)/(2n+1-2j)
pub fn p2n2r_sum(n: u64, r: u64) -> Result<ExactProb> {
    check_rn(n, r, "p2n2r_sum")?;
    let mut acc = BigRational::zero();
    for j in 1..=r {
        let a = BigRational::new(
            binomial(2 * j - 1, j as i64),
            BigInt::from(2 * j - 1),
        );
        let b = BigRational::new(
            binomial(2 * n + 1 - 2 * j, (n + 1 - j) as i64),
            BigInt::from(2 * n + 1 - 2 * j),
        );
        acc += a * b;
    }
    ExactProb::new(acc / BigRational::from_integer(BigInt::one() << (2 * n)))
}

/// P(2n, 2r-1): odd values carry the same mass as the adjacent even value.
pub fn p2n_odd(n: u64, r: u64) -> Result<ExactProb> {
    check_rn(n, r, "p2n_odd")?;
    p2n2r_closed(n, r)
}

/// P(2n, r) for any r in [1, 2n], folding the odd/even parity.
pub fn p2n_any(n: u64, r: u64) -> Result<ExactProb> {
    if n == 0 || r == 0 || r > 2 * n {
        return Err(Error::InvalidArgument(format!(
            "p2n_any requires 1 <= r <= 2n, got r={r}, n={n}"
        )));
    }
    p2n2r_closed(n, r.div_ceil(2))
}

/// Parameters of the negative binomial law U_K = Y_1 + ... + Y_K built from
/// geometric runs with P(Y = k) = 2^{-(k+1)}. Mean K, variance 2K.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegBinParams {
    pub k: u64,
    pub r: u64,
}

impl NegBinParams {
    pub fn pmf(&self) -> ExactProb {
        negbin_pmf(self.k, self.r)
    }
}

/// P(U_K = r) = C(K-1+r, r) / 2^{K+r}.
pub fn negbin_pmf(k: u64, r: u64) -> ExactProb {
    assert!(k >= 1, "negbin_pmf needs K >= 1");
    ExactProb::dyadic(binomial(k - 1 + r, r as i64), k + r).expect("pmf is a probability")
}

/// Exact partial sum sum_{r=0}^{r_max} P(U_K = r); r_max = -1 gives 0.
pub fn negbin_cdf(k: u64, r_max: i64) -> ExactProb {
    assert!(k >= 1, "negbin_cdf needs K >= 1");
    if r_max < 0 {
        return ExactProb::zero();
    }
    let mut num = BigInt::zero();
    // term numerators at common scale 2^{K + r_max}
    let mut binom = BigInt::one();
    for r in 0..=r_max as u64 {
        if r > 0 {
            binom = binom * BigInt::from(k - 1 + r) / BigInt::from(r);
        }
        num += &binom << (r_max as u64 - r);
    }
    ExactProb::dyadic(num, k + r_max as u64).expect("cdf is a probability")
}

/// sum_{r=0}^{a} C(a+r, r) / 2^{a+r}, which equals 1 for every a >= 0.
pub fn negbin_partial_identity(a: u64) -> BigRational {
    // the summand is 2 P(U_{a+1} = r)
    (negbin_cdf(a + 1, a as i64).into_ratio()) * BigRational::from_integer(BigInt::from(2))
}

/// Truncation of sum_{r=0}^{inf} C(a+r, r) / 2^{a+r} (limit 2) together with
/// a rigorous tail bound below `2^-tail_exp`: returns (partial_sum, bound).
///
/// For r >= 3a - 1 consecutive terms shrink by at least 2/3, so the tail
/// past R is at most 3 * term(R).
pub fn negbin_full_sum_truncated(a: u64, tail_exp: u64) -> (BigRational, BigRational) {
    let target = BigRational::new(BigInt::one(), BigInt::one() << tail_exp);
    let term = |r: u64| -> BigRational {
        BigRational::new(binomial(a + r, r as i64), BigInt::one() << (a + r))
    };
    let mut cutoff = 3 * a + 1;
    loop {
        let bound = term(cutoff) * BigRational::from_integer(BigInt::from(3));
        if bound < target {
            let mut acc = BigRational::zero();
            for r in 0..cutoff {
                acc += term(r);
            }
            return (acc, bound);
        }
        cutoff += 8;
    }
}

/// Bridge-path counts for the joint law of (G_{2n}, S(2n) = 0): the number
/// of 2n-step bridges with exactly 2r non-negative indices is the partial
/// Catalan convolution sum_{j<=r} Cat(j-1) Cat(n-j), and odd counts 2r-1
/// repeat the same value. Rows are memoized because the return-probability
/// sum re-reads every row for each half-length.
#[derive(Debug, Default)]
pub struct BridgeRowCache {
    catalans: Vec<BigInt>,
    rows: Vec<Vec<BigInt>>,
}

impl BridgeRowCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn catalan_upto(&mut self, m: u64) {
        while self.catalans.len() <= m as usize {
            self.catalans.push(catalan(self.catalans.len() as u64));
        }
    }

    /// Row for half-length n: index r-1 holds the count for G = 2r (and for
    /// G = 2r - 1). `P(2n, 2r) = row[r-1] / 2^{2n}`.
    pub fn row(&mut self, n: u64) -> &[BigInt] {
        assert!(n >= 1);
        self.catalan_upto(n - 1);
        while self.rows.len() < n as usize {
            let m = self.rows.len() as u64 + 1;
            let mut row = Vec::with_capacity(m as usize);
            let mut acc = BigInt::zero();
            for j in 1..=m {
                acc += &self.catalans[(j - 1) as usize] * &self.catalans[(m - j) as usize];
                row.push(acc.clone());
            }
            self.rows.push(row);
        }
        &self.rows[(n - 1) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// Pascal-triangle oracle, independent of the multiplicative formula.
    fn pascal(rows: usize) -> Vec<Vec<BigInt>> {
        let mut tri = vec![vec![BigInt::one()]];
        for n in 1..rows {
            let prev = &tri[n - 1];
            let mut row = vec![BigInt::one()];
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigInt::one());
            tri.push(row);
        }
        tri
    }

    #[test]
    fn binomial_base_cases() {
        assert_eq!(binomial(0, 0), BigInt::one());
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(8, 4), BigInt::from(70));
        assert_eq!(binomial(5, -1), BigInt::zero());
        assert_eq!(binomial(5, 6), BigInt::zero());
    }

    #[test]
    fn binomial_matches_pascal_triangle() {
        let tri = pascal(17);
        for n in 0..17u64 {
            for k in 0..=n {
                assert_eq!(binomial(n, k as i64), tri[n as usize][k as usize]);
            }
        }
    }

    #[test]
    fn central_return_values() {
        assert_eq!(central_return_1d(0).as_ratio(), &frac(1, 1));
        assert_eq!(central_return_1d(1).as_ratio(), &frac(1, 2));
        // 16-path exhaustive count: 6 of the 4-step +-1 sequences return to 0
        let mut returning = 0;
        for mask in 0u32..16 {
            let s: i32 = (0..4).map(|b| if mask >> b & 1 == 1 { 1 } else { -1 }).sum();
            if s == 0 {
                returning += 1;
            }
        }
        assert_eq!(returning, 6);
        assert_eq!(central_return_1d(2).as_ratio(), &frac(6, 16));
    }

    #[test]
    fn q_ratio_values() {
        for n in 1..=12 {
            assert_eq!(q_ratio(0, n).unwrap(), ExactProb::one());
            assert_eq!(q_ratio(n, n).unwrap(), ExactProb::one());
        }
        assert_eq!(q_ratio(1, 2).unwrap().as_ratio(), &frac(4, 6));
        assert!(q_ratio(3, 2).is_err());
    }

    #[test]
    fn p2n2r_closed_small_values() {
        // frozen from the 4-path and 16-path enumerations
        assert_eq!(p2n2r_closed(1, 1).unwrap().as_ratio(), &frac(1, 4));
        assert_eq!(p2n2r_closed(2, 1).unwrap().as_ratio(), &frac(1, 16));
        assert_eq!(p2n2r_closed(2, 2).unwrap().as_ratio(), &frac(2, 16));
        assert!(p2n2r_closed(2, 0).is_err());
        assert!(p2n2r_closed(2, 3).is_err());
    }

    #[test]
    fn p2n2r_sum_small_values() {
        assert_eq!(p2n2r_sum(1, 1).unwrap().as_ratio(), &frac(1, 4));
        assert_eq!(p2n2r_sum(2, 1).unwrap().as_ratio(), &frac(1, 16));
        assert_eq!(p2n2r_sum(2, 2).unwrap().as_ratio(), &frac(2, 16));
    }

    #[test]
    fn closed_and_sum_forms_agree_exactly() {
        for n in 1..=24u64 {
            for r in 1..=n {
                assert_eq!(
                    p2n2r_closed(n, r).unwrap(),
                    p2n2r_sum(n, r).unwrap(),
                    "mismatch at n={n}, r={r}"
                );
            }
        }
    }

    #[test]
    fn parity_and_odd_values() {
        assert_eq!(p2n_odd(1, 1).unwrap().as_ratio(), &frac(1, 4));
        assert_eq!(p2n_odd(2, 2).unwrap().as_ratio(), &frac(2, 16));
        assert_eq!(p2n_odd(2, 1).unwrap().as_ratio(), &frac(1, 16));
        for n in 1..=24u64 {
            for r in 1..=n {
                assert_eq!(p2n_odd(n, r).unwrap(), p2n2r_closed(n, r).unwrap());
            }
        }
    }

    #[test]
    fn joint_marginal_recovers_central_return() {
        for n in 1..=24u64 {
            let mut acc = BigRational::zero();
            for r in 1..=2 * n {
                acc += p2n_any(n, r).unwrap().into_ratio();
            }
            assert_eq!(acc, central_return_1d(n).into_ratio(), "n={n}");
        }
    }

    #[test]
    fn bridge_rows_match_sum_form() {
        let mut cache = BridgeRowCache::new();
        for n in 1..=16u64 {
            let row = cache.row(n).to_vec();
            assert_eq!(row.len(), n as usize);
            for r in 1..=n {
                let expect = p2n2r_sum(n, r).unwrap();
                let got = ExactProb::dyadic(row[(r - 1) as usize].clone(), 2 * n).unwrap();
                assert_eq!(got, expect, "n={n}, r={r}");
            }
        }
    }

    #[test]
    fn negbin_pmf_values() {
        for r in 0..8u64 {
            assert_eq!(
                negbin_pmf(1, r).as_ratio(),
                &BigRational::new(BigInt::one(), BigInt::one() << (r + 1))
            );
        }
        assert_eq!(negbin_pmf(2, 0).as_ratio(), &frac(1, 4));
    }

    #[test]
    fn negbin_pmf_partial_sum_is_close_to_one() {
        // Exact tail past r = 200 for K = 3: between 2^-190 and 2^-188.
        let partial = negbin_cdf(3, 200).into_ratio();
        let gap = BigRational::one() - partial;
        assert!(gap.is_positive());
        assert!(gap < BigRational::new(BigInt::one(), BigInt::one() << 188));
        assert!(gap > BigRational::new(BigInt::one(), BigInt::one() << 190));
    }

    #[test]
    fn negbin_cdf_edges() {
        assert_eq!(negbin_cdf(4, -1), ExactProb::zero());
        assert_eq!(negbin_cdf(1, 0).as_ratio(), &frac(1, 2));
    }

    #[test]
    fn negbin_partial_identity_is_one() {
        for a in 0..=64u64 {
            assert_eq!(negbin_partial_identity(a), BigRational::one(), "a={a}");
        }
    }

    #[test]
    fn negbin_full_sum_approaches_two() {
        for a in [0u64, 1, 5, 17, 64] {
            let (sum, bound) = negbin_full_sum_truncated(a, 64);
            assert!(bound < BigRational::new(BigInt::one(), BigInt::one() << 64));
            let gap = BigRational::from_integer(BigInt::from(2)) - sum;
            assert!(gap.is_positive(), "a={a}: truncation overshot 2");
            assert!(gap <= bound, "a={a}: gap exceeds the tail bound");
        }
    }

    #[test]
    fn exact_prob_rejects_out_of_range() {
        assert!(ExactProb::new(frac(-1, 2)).is_err());
        assert!(ExactProb::new(frac(3, 2)).is_err());
        assert!(ExactProb::new(frac(1, 1)).is_ok());
    }

    #[test]
    fn exact_prob_is_canonical() {
        let p = ExactProb::new(frac(2, 4)).unwrap();
        assert_eq!(p.numer(), &BigInt::one());
        assert_eq!(p.denom(), &BigInt::from(2));
        assert_eq!(p.to_string(), "1/2");
    }

    #[test]
    fn ln_big_handles_huge_integers() {
        let x = BigInt::one() << 5000;
        let expect = 5000.0 * std::f64::consts::LN_2;
        assert!((ln_big(&x) - expect).abs() < 1e-9 * expect);
        let p = ExactProb::dyadic(BigInt::one(), 5000).unwrap();
        assert!((p.ln() + expect).abs() < 1e-9 * expect);
        assert_eq!(ExactProb::zero().ln(), f64::NEG_INFINITY);
    }

    #[test]
    fn catalan_values() {
        let expect = [1u64, 1, 2, 5, 14, 42, 132, 429];
        for (m, &c) in expect.iter().enumerate() {
            assert_eq!(catalan(m as u64), BigInt::from(c));
        }
    }
}
