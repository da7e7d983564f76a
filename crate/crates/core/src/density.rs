//! Exact sieves and moment statistics for the sumsets built from a
//! prime square (or two squares) plus a power of two, together with the
//! classical comparison counts: sums of two squares, integers free of
//! `4k+3` prime factors, Landau's constant, and the Romanoff-style sums
//! whose boundedness drives the second-moment density arguments.
//!
//! The reports here never extrapolate: every count is an exact
//! enumeration below an explicit limit, and every asymptotic claim is
//! rendered as a ratio table a caller can judge across decades.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    factorize, factorize_u64, is_prime_u64, lcm_u64, mod_pow_u64, mult_order_u64, primes_up_to,
    spf_table, FactorBudget,
};

/// Hard ceiling for the sieve limits: the representation histogram costs
/// two bytes per integer below the limit.
pub const SIEVE_GUARD: u64 = 100_000_000;

/// Hard ceiling for the order-weighted sum, which keeps a
/// smallest-prime-factor table of this size.
pub const ORD_SUM_GUARD: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DensityError {
    #[error("limit {requested} exceeds the sieve guard {limit}")]
    GuardExceeded { requested: u64, limit: u64 },
    #[error("representation count at {x} exceeds the u16 histogram")]
    HistogramOverflow { x: u64 },
}

/// Which set a [`DensityReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetTag {
    S3,
    S4,
    #[serde(rename = "two_squares")]
    TwoSquares,
    #[serde(rename = "Q_set")]
    QSet,
    #[serde(rename = "prime_sq_plus_sq")]
    PrimeSqPlusSq,
}

/// Exact membership and representation moments of a sieved set on
/// `[1, n]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: u64,
    pub set_tag: SetTag,
    /// Distinct members in `[1, n]`.
    pub member_count: u64,
    /// Total representations, `sum_x r(x)`.
    pub sum_r: u64,
    /// Second moment, `sum_x r(x)^2`.
    pub sum_r_sq: u64,
    /// `sum_r^2 / (sum_r_sq * n)`: the Cauchy-Schwarz lower bound for
    /// the density `member_count / n`.
    pub cs_lower_bound: f64,
    /// Member counts by residue, keyed `"modulus:residue"` for moduli 4
    /// and 8.
    pub residue_profile: BTreeMap<String, u64>,
}

impl DensityReport {
    /// The membership density on `[1, n]`.
    pub fn density(&self) -> f64 {
        self.member_count as f64 / self.n as f64
    }

    /// The Cauchy-Schwarz inequality on the exact integers:
    /// `sum_r^2 <= member_count * sum_r_sq`.
    pub fn cs_holds(&self) -> bool {
        (self.sum_r as u128).pow(2) <= self.member_count as u128 * self.sum_r_sq as u128
    }

    /// Every residue profile group must re-total to the member count.
    pub fn profile_consistent(&self) -> bool {
        for modulus in [4u64, 8] {
            let total: u64 = (0..modulus)
                .map(|r| {
                    self.residue_profile
                        .get(&format!("{modulus}:{r}"))
                        .copied()
                        .unwrap_or(0)
                })
                .sum();
            if total != self.member_count {
                return false;
            }
        }
        true
    }
}

fn guard(n: u64, limit: u64) -> Result<(), DensityError> {
    if n > limit {
        Err(DensityError::GuardExceeded {
            requested: n,
            limit,
        })
    } else {
        Ok(())
    }
}

/// Folds a representation histogram into a [`DensityReport`].
fn report_from_histogram(n: u64, set_tag: SetTag, hist: &[u16]) -> DensityReport {
    let mut member_count = 0u64;
    let mut sum_r = 0u64;
    let mut sum_r_sq = 0u64;
    let mut mod4 = [0u64; 4];
    let mut mod8 = [0u64; 8];
    for (x, &r) in hist.iter().enumerate().skip(1) {
        if r == 0 {
            continue;
        }
        member_count += 1;
        sum_r += r as u64;
        sum_r_sq += (r as u64) * (r as u64);
        mod4[x % 4] += 1;
        mod8[x % 8] += 1;
    }
    let mut residue_profile = BTreeMap::new();
    for (r, &count) in mod4.iter().enumerate() {
        residue_profile.insert(format!("4:{r}"), count);
    }
    for (r, &count) in mod8.iter().enumerate() {
        residue_profile.insert(format!("8:{r}"), count);
    }
    let cs_lower_bound = (sum_r as f64) * (sum_r as f64) / (sum_r_sq as f64 * n as f64);
    DensityReport {
        n,
        set_tag,
        member_count,
        sum_r,
        sum_r_sq,
        cs_lower_bound,
        residue_profile,
    }
}

fn bump(hist: &mut [u16], x: u64) -> Result<(), DensityError> {
    let slot = &mut hist[x as usize];
    *slot = slot
        .checked_add(1)
        .ok_or(DensityError::HistogramOverflow { x })?;
    Ok(())
}

/// Representation histogram of `p^2 + b^2 + 2^e <= n` over primes `p`,
/// integers `b >= 0`, and exponents `e >= 0`: entry `x` counts the
/// triples `(p, b, e)` landing on `x`.
pub fn s3_histogram(n: u64) -> Result<Vec<u16>, DensityError> {
    guard(n, SIEVE_GUARD)?;
    let mut hist = vec![0u16; n as usize + 1];
    for p in primes_up_to(n.isqrt()) {
        let p_sq = p * p;
        if p_sq + 1 > n {
            break;
        }
        let mut b = 0u64;
        while p_sq + b * b + 1 <= n {
            let base = p_sq + b * b;
            let mut pow = 1u64;
            while base + pow <= n {
                bump(&mut hist, base + pow)?;
                pow *= 2;
            }
            b += 1;
        }
    }
    Ok(hist)
}

/// Representation histogram of `b1^2 + b2^2 + 2^(k^2) <= n` over
/// integers `b1, b2, k >= 0`.
pub fn s4_histogram(n: u64) -> Result<Vec<u16>, DensityError> {
    guard(n, SIEVE_GUARD)?;
    let mut hist = vec![0u16; n as usize + 1];
    let mut k = 0u64;
    while k * k < 64 && 1u64 << (k * k) <= n {
        let pow = 1u64 << (k * k);
        let mut b1 = 0u64;
        while b1 * b1 + pow <= n {
            let base = b1 * b1 + pow;
            let mut b2 = 0u64;
            while base + b2 * b2 <= n {
                bump(&mut hist, base + b2 * b2)?;
                b2 += 1;
            }
            b1 += 1;
        }
        k += 1;
    }
    Ok(hist)
}

/// Sieve of `p^2 + b^2 + 2^e <= n`, reported with moments and residue
/// profile.
pub fn sieve_s3(n: u64) -> Result<DensityReport, DensityError> {
    Ok(report_from_histogram(n, SetTag::S3, &s3_histogram(n)?))
}

/// Sieve of `b1^2 + b2^2 + 2^(k^2) <= n`, reported with moments and
/// residue profile.
pub fn sieve_s4(n: u64) -> Result<DensityReport, DensityError> {
    Ok(report_from_histogram(n, SetTag::S4, &s4_histogram(n)?))
}

/// Direct per-value membership test matching [`sieve_s3`], used as the
/// sieve's oracle: tries every power of two below `x` and scans primes
/// against a perfect-square remainder.
pub fn is_s3_member(x: u64) -> bool {
    let mut pow = 1u64;
    while pow < x {
        let v = x - pow;
        let mut p = 2u64;
        while p * p <= v {
            if is_prime_u64(p) {
                let rest = v - p * p;
                if rest.isqrt().pow(2) == rest {
                    return true;
                }
            }
            p += 1;
        }
        if pow > u64::MAX / 2 {
            break;
        }
        pow *= 2;
    }
    false
}

/// Direct per-value membership test matching [`sieve_s4`].
pub fn is_s4_member(x: u64) -> bool {
    let mut k = 0u64;
    while k * k < 64 && 1u64 << (k * k) <= x {
        let v = x - (1u64 << (k * k));
        let mut b1 = 0u64;
        while b1 * b1 <= v {
            let rest = v - b1 * b1;
            if rest.isqrt().pow(2) == rest {
                return true;
            }
            b1 += 1;
        }
        k += 1;
    }
    false
}

/// Truncation of the two-squares counting constant
/// `2^-1/2 prod_(p = 3 mod 4) (1 - p^-2)^-1/2`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LandauEstimate {
    pub p_max: u64,
    /// The bare truncated product.
    pub raw: f64,
    /// The product times `exp(1/(4 p_max ln p_max))`, a first-order
    /// integral estimate of the omitted tail: half the primes beyond
    /// `p_max` fall in the residue class and each contributes
    /// `p^-2 / 2` to the log. The estimate overshoots for small
    /// `p_max` and is below rounding error by `p_max = 10^7`.
    pub corrected: f64,
}

/// Truncated product for the two-squares constant over primes
/// `p = 3 (mod 4)` up to `p_max`, accumulated in log space.
pub fn landau_constant(p_max: u64) -> LandauEstimate {
    assert!(p_max >= 3);
    let mut log_product = -0.5 * 2.0f64.ln();
    for p in primes_up_to(p_max) {
        if p % 4 == 3 {
            let p = p as f64;
            log_product -= 0.5 * (1.0 - 1.0 / (p * p)).ln();
        }
    }
    let raw = log_product.exp();
    let tail = 1.0 / (4.0 * p_max as f64 * (p_max as f64).ln());
    LandauEstimate {
        p_max,
        raw,
        corrected: raw * tail.exp(),
    }
}

/// Packed bitmap over `0..=limit`.
struct Bits {
    limit: u64,
    words: Vec<u64>,
}

impl Bits {
    fn new(limit: u64, filled: bool) -> Bits {
        let fill = if filled { u64::MAX } else { 0 };
        Bits {
            limit,
            words: vec![fill; limit as usize / 64 + 1],
        }
    }

    fn set(&mut self, i: u64) {
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: u64) {
        self.words[(i / 64) as usize] &= !(1 << (i % 64));
    }

    fn get(&self, i: u64) -> bool {
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Set bits with index in `[1, limit]`, by word popcounts.
    fn count_members(&self) -> u64 {
        let mut total: u64 = self.words.iter().map(|w| w.count_ones() as u64).sum();
        // Bits beyond the limit in the last word, and index 0, are not
        // members.
        for i in self.limit + 1..self.words.len() as u64 * 64 {
            if self.get(i) {
                total -= 1;
            }
        }
        if self.get(0) {
            total -= 1;
        }
        total
    }
}

/// Membership bitmap of the integers in `[0, n]` that are sums of two
/// squares, decided by the even-exponent criterion at every prime
/// `p = 3 (mod 4)`: each such prime walks its multiples and clears the
/// values whose `p`-adic valuation is odd.
fn two_squares_bitmap(n: u64) -> Bits {
    let mut allowed = Bits::new(n, true);
    for p in primes_up_to(n) {
        if p % 4 != 3 {
            continue;
        }
        let mut x = p;
        while x <= n {
            let mut v = 1u32;
            let mut rest = x / p;
            while rest % p == 0 {
                v += 1;
                rest /= p;
            }
            if v % 2 == 1 {
                allowed.clear(x);
            }
            x += p;
        }
    }
    allowed
}

/// Membership bitmap of the integers in `[0, n]` with no prime factor
/// `p = 3 (mod 4)` at all.
fn q_set_bitmap(n: u64) -> Bits {
    let mut allowed = Bits::new(n, true);
    for p in primes_up_to(n) {
        if p % 4 != 3 {
            continue;
        }
        let mut x = p;
        while x <= n {
            allowed.clear(x);
            x += p;
        }
    }
    allowed
}

/// Count of `1 <= x <= n` expressible as `b1^2 + b2^2` with
/// `b1, b2 >= 0`, by the even-exponent criterion.
pub fn count_two_squares(n: u64) -> Result<u64, DensityError> {
    guard(n, SIEVE_GUARD)?;
    Ok(two_squares_bitmap(n).count_members())
}

/// Count of `1 <= x <= n` free of prime factors `p = 3 (mod 4)`.
pub fn count_q_set(n: u64) -> Result<u64, DensityError> {
    guard(n, SIEVE_GUARD)?;
    Ok(q_set_bitmap(n).count_members())
}

/// Count of `1 <= x <= n` expressible as `p^2 + b^2` with `p` prime and
/// `b >= 0`, by enumeration into a membership bitmap.
pub fn count_prime_sq_plus_sq(n: u64) -> Result<u64, DensityError> {
    guard(n, SIEVE_GUARD)?;
    let mut member = Bits::new(n, false);
    for p in primes_up_to(n.isqrt()) {
        let p_sq = p * p;
        let mut b = 0u64;
        while p_sq + b * b <= n {
            member.set(p_sq + b * b);
            b += 1;
        }
    }
    Ok(member.count_members())
}

/// Multiplicative order of 2 modulo odd `d` by plain iteration, or
/// `None` when the order exceeds `cap`. The trivial modulus 1 has
/// order 1.
fn order_by_iteration(d: u64, cap: u64) -> Option<u64> {
    assert!(d % 2 == 1);
    if d == 1 {
        return Some(1);
    }
    // At the top of iteration k the accumulator holds 2^k mod d.
    let mut pow = 2u64 % d;
    for k in 1..=cap {
        if pow == 1 {
            return Some(k);
        }
        pow = pow * 2 % d;
    }
    None
}

/// Truncation of `E(x) = sum 1/d` over odd `d <= d_max` whose
/// multiplicative order of 2 is at most `x`. Orders are found by direct
/// iteration, so `x` is capped at 64.
pub fn romanoff_sum(x: u64, d_max: u64) -> f64 {
    assert!((1..=64).contains(&x), "orders are iterated, keep x <= 64");
    assert!(d_max < 1 << 62);
    let mut sum = 0.0;
    let mut d = 1u64;
    while d <= d_max {
        if order_by_iteration(d, x).is_some() {
            sum += 1.0 / d as f64;
        }
        d += 2;
    }
    sum
}

/// One gap's worth of the exponent-pair sum: the number of pairs with
/// this gap and the divisor product of `2^gap - 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairGapRow {
    pub gap: u32,
    pub pairs: u64,
    /// `prod (1 + 1/p)` over the distinct primes found in `2^gap - 1`.
    pub product: f64,
    /// False when the factor budget left a composite cofactor, making
    /// `product` a certified underestimate.
    pub complete: bool,
}

/// The pair sum `sum prod_(p | 2^(n2-n1) - 1) (1 + 1/p)` over exponent
/// pairs `0 <= n1 < n2` with `2^n2 <= n`, grouped by gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairSumReport {
    pub n: u64,
    pub sum: f64,
    /// `sum / (ln n)^2`, the boundedness diagnostic.
    pub ratio_to_log_sq: f64,
    pub rows: Vec<PairGapRow>,
}

impl PairSumReport {
    pub fn complete(&self) -> bool {
        self.rows.iter().all(|r| r.complete)
    }
}

/// `prod (1 + 1/p)` over the distinct prime factors of `2^k - 1` found
/// within the budget, plus a completeness flag.
pub fn mersenne_divisor_product(k: u32, budget: &FactorBudget) -> (f64, bool) {
    assert!((1..=63).contains(&k));
    let value = (1u64 << k) - 1;
    if value == 1 {
        return (1.0, true);
    }
    let f = factorize(&value.into(), budget);
    let product = f
        .distinct_primes()
        .map(|p| 1.0 + 1.0 / p.to_f64().unwrap())
        .product();
    (product, f.is_complete())
}

/// Sums the divisor products over all exponent pairs `2^n1 < 2^n2 <= n`,
/// one factorization per gap.
pub fn romanoff_pair_sum(n: u64, budget: &FactorBudget) -> PairSumReport {
    assert!(n >= 2);
    let top = n.ilog2();
    let mut rows = Vec::new();
    let mut sum = 0.0;
    for gap in 1..=top {
        let (product, complete) = mersenne_divisor_product(gap, budget);
        let pairs = (top - gap + 1) as u64;
        sum += pairs as f64 * product;
        rows.push(PairGapRow {
            gap,
            pairs,
            product,
            complete,
        });
    }
    let log_n = (n as f64).ln();
    PairSumReport {
        n,
        sum,
        ratio_to_log_sq: sum / (log_n * log_n),
        rows,
    }
}

/// Truncation of the convergent sum
/// `sum 2^omega(ord_2(d)) / (d sqrt(ord_2(d)))` over odd `d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedOrdSum {
    pub d_max: u64,
    pub value: f64,
    /// Cumulative value at each power of ten, ending at `d_max`.
    pub decade_partials: Vec<(u64, f64)>,
}

/// Evaluates the order-weighted sum for all odd `d <= d_max` by factoring
/// `d` over a smallest-prime-factor table and assembling `ord_2(d)` as
/// the lcm of prime-power orders; prime orders come from the arithmetic
/// of `p - 1` rather than iteration.
pub fn weighted_ord_sum(d_max: u64) -> Result<WeightedOrdSum, DensityError> {
    guard(d_max, ORD_SUM_GUARD)?;
    let spf = spf_table(d_max);
    let mut prime_order: HashMap<u64, u64> = HashMap::new();
    let mut power_order: HashMap<(u64, u32), u64> = HashMap::new();
    let mut value = 0.0;
    let mut decade_partials = Vec::new();
    let mut next_decade = 10u64;
    let mut d = 1u64;
    while d <= d_max {
        let ord = ord2_from_spf(d, &spf, &mut prime_order, &mut power_order);
        let omega = distinct_prime_count(ord, &spf);
        value += (1u64 << omega) as f64 / (d as f64 * (ord as f64).sqrt());
        d += 2;
        while next_decade <= d && next_decade <= d_max {
            decade_partials.push((next_decade, value));
            next_decade *= 10;
        }
    }
    if decade_partials.last().map(|&(at, _)| at) != Some(d_max) {
        decade_partials.push((d_max, value));
    }
    Ok(WeightedOrdSum {
        d_max,
        value,
        decade_partials,
    })
}

/// `ord_2(d)` for odd `d` via the factorization of `d`: the lcm over
/// prime powers `p^e || d` of `ord_2(p^e)`, where each extra power of
/// `p` multiplies the order by `p` exactly when the current order fails
/// to annihilate.
fn ord2_from_spf(
    d: u64,
    spf: &[u32],
    prime_order: &mut HashMap<u64, u64>,
    power_order: &mut HashMap<(u64, u32), u64>,
) -> u64 {
    if d == 1 {
        return 1;
    }
    let mut ord = 1u64;
    let mut rest = d;
    while rest > 1 {
        let p = spf[rest as usize] as u64;
        let mut e = 0u32;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        let part = *power_order.entry((p, e)).or_insert_with(|| {
            let base = *prime_order
                .entry(p)
                .or_insert_with(|| mult_order_u64(2, p).expect("odd prime modulus"));
            let modulus = p.pow(e);
            let mut t = base;
            while mod_pow_u64(2, t, modulus) != 1 {
                t *= p;
            }
            t
        });
        ord = lcm_u64(ord, part).expect("orders divide the totient, below the table size");
    }
    ord
}

/// Number of distinct primes in `m`, walking the table when it reaches.
fn distinct_prime_count(m: u64, spf: &[u32]) -> u32 {
    if m <= 1 {
        return 0;
    }
    if (m as usize) < spf.len() {
        let mut rest = m;
        let mut count = 0;
        while rest > 1 {
            let p = spf[rest as usize] as u64;
            count += 1;
            while rest % p == 0 {
                rest /= p;
            }
        }
        count
    } else {
        factorize_u64(m).len() as u32
    }
}

/// Exact count of pairs `x1 = x2 + m` with both `x_i` in `[1, n]` free
/// of prime factors `p = 3 (mod 4)`, with the ratio to the shape
/// `n / ln n * prod_(p | m, p = 3 mod 4) (1 + 1/p)` that bounds it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QPairReport {
    pub n: u64,
    pub m: u64,
    pub count: u64,
    pub bound: f64,
    pub ratio: f64,
}

pub fn q_pair_count(n: u64, m: u64) -> Result<QPairReport, DensityError> {
    guard(n, SIEVE_GUARD)?;
    assert!(m >= 1 && m < n);
    let members = q_set_bitmap(n);
    let mut count = 0u64;
    for x2 in 1..=n - m {
        if members.get(x2) && members.get(x2 + m) {
            count += 1;
        }
    }
    let product: f64 = factorize_u64(m)
        .iter()
        .filter(|&&(p, _)| p % 4 == 3)
        .map(|&(p, _)| 1.0 + 1.0 / p as f64)
        .product();
    let bound = n as f64 / (n as f64).ln() * product;
    Ok(QPairReport {
        n,
        m,
        count,
        bound,
        ratio: count as f64 / bound,
    })
}
