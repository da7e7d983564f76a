//! Quadratic Gauss sums, the singular series for the form
//! `x1^2 + x4^2 - x2^2 - x3^2`, exact local density factors, the
//! archimedean integral, and lattice-point counts matching the series
//! prediction.
//!
//! The central object is
//!
//! ```text
//! A(m, q, d) = q^-4 sum_{(a,q)=1} e(-am/q)
//!              S(q, a d1^2) S(q, a d4^2) S(q, -a d2^2) S(q, -a d3^2)
//! ```
//!
//! with `S(q, a) = sum_{x=1}^{q} e(a x^2 / q)`, summed over `q` to the
//! truncated singular series. The quotient by the unconstrained series is
//! an exact product of local factors, which this module also computes as
//! rationals so the two routes can be checked against each other.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::arith::{factorize_u64, gcd_u64, is_prime_u64, jacobi_u64, primes_up_to};

/// Partial sums of the singular series are considered settled when the
/// cumulative values over the last quarter of the `q` range stay within
/// this spread.
pub const STABILIZATION_TOL: f64 = 1e-3;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SingularError {
    #[error("local factors are defined for exponent pairs (1,0), (0,1), (1,1); got ({u},{v})")]
    UnsupportedLocalExponents { u: u32, v: u32 },
    #[error("constraint vector entries must be squarefree; {d} is not")]
    NonSquarefree { d: u64 },
    #[error("constraint vector puts {p} on both sides twice; exponents ({u},{v}) unsupported")]
    DeepConstraint { p: u64, u: u32, v: u32 },
}

/// `e(k/q)` for integer `k`.
fn root_of_unity(k: u64, q: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (k % q) as f64 / q as f64)
}

/// Quadratic Gauss sum `S(q, a) = sum_{x=1}^{q} e(a x^2 / q)` by direct
/// summation; `a` is reduced mod `q` first.
pub fn gauss_sum(q: u64, a: i64) -> Complex64 {
    assert!(q >= 1, "Gauss sums need a positive modulus");
    let a = a.rem_euclid(q as i64) as u64;
    let mut sum = Complex64::ZERO;
    for x in 1..=q {
        let sq = x % q * (x % q) % q;
        sum += root_of_unity(a * sq % q, q);
    }
    sum
}

/// Cached table of `S(q, c)` for all `1 <= q <= max_q` and `0 <= c < q`.
///
/// Each row is the discrete Fourier transform of the histogram of squares
/// modulo `q`, so building row `q` costs `O(q^2)` lookups into a
/// precomputed root table and the whole cache `O(max_q^3)`.
pub struct GaussTable {
    max_q: u64,
    rows: Vec<Vec<Complex64>>,
}

impl GaussTable {
    pub fn new(max_q: u64) -> Self {
        assert!(max_q >= 1);
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(max_q as usize + 1);
        rows.push(Vec::new());
        for q in 1..=max_q {
            let qu = q as usize;
            let mut counts = vec![0u32; qu];
            for x in 1..=q {
                counts[(x * x % q) as usize] += 1;
            }
            let roots: Vec<Complex64> = (0..q).map(|k| root_of_unity(k, q)).collect();
            let mut row = vec![Complex64::ZERO; qu];
            for (c, entry) in row.iter_mut().enumerate() {
                let mut sum = Complex64::ZERO;
                for (r, &cnt) in counts.iter().enumerate() {
                    if cnt > 0 {
                        sum += cnt as f64 * roots[(c * r) % qu];
                    }
                }
                *entry = sum;
            }
            rows.push(row);
        }
        GaussTable { max_q, rows }
    }

    pub fn max_q(&self) -> u64 {
        self.max_q
    }

    /// `S(q, c)` for `0 <= c < q`.
    pub fn entry(&self, q: u64, c: u64) -> Complex64 {
        assert!(q >= 1 && q <= self.max_q && c < q);
        self.rows[q as usize][c as usize]
    }
}

/// `A(m, q, d)`: the `q`-th term of the singular series for counting
/// `x1^2 + x4^2 = x2^2 + x3^2 + m` with `d_i | x_i`. The imaginary parts
/// cancel in exact arithmetic (terms pair off conjugately under
/// `a <-> q - a`); a residual beyond rounding noise trips an assertion.
pub fn local_sum(table: &GaussTable, m: u64, q: u64, d: &[u64; 4]) -> f64 {
    assert!(q >= 1 && q <= table.max_q());
    let m_mod = m % q;
    let d_sq: Vec<u64> = d.iter().map(|&di| di % q * (di % q) % q).collect();
    let mut sum = Complex64::ZERO;
    let mut magnitude = 0.0f64;
    for a in 1..=q {
        if gcd_u64(a, q) != 1 {
            continue;
        }
        // e(-am/q) = e((q - am mod q)/q).
        let phase = root_of_unity((q - a * m_mod % q) % q, q);
        let term = phase
            * table.entry(q, a * d_sq[0] % q)
            * table.entry(q, a * d_sq[3] % q)
            * table.entry(q, (q - a * d_sq[1] % q) % q)
            * table.entry(q, (q - a * d_sq[2] % q) % q);
        sum += term;
        magnitude += term.norm();
    }
    let scale = (q as f64).powi(4);
    let value = sum / scale;
    assert!(
        value.im.abs() <= 1e-9 * (magnitude / scale) + 1e-12,
        "imaginary residual {} in local sum at q = {q}",
        value.im
    );
    value.re
}

/// A truncated singular series along with its convergence diagnostics.
#[derive(Debug, Clone)]
pub struct SeriesEstimate {
    /// Cumulative sums after each `q = 1, 2, ..., q_max`.
    pub partial_sums: Vec<f64>,
    /// The final cumulative sum.
    pub value: f64,
    /// Spread (max - min) of the cumulative sums over the last quarter of
    /// the `q` range.
    pub window_spread: f64,
    /// Whether the spread is within [`STABILIZATION_TOL`].
    pub stabilized: bool,
}

/// Truncation of `sum_q A(m, q, d)` at `q_max`, with a stabilization
/// verdict computed from the trailing partial sums.
pub fn singular_series(table: &GaussTable, m: u64, d: &[u64; 4], q_max: u64) -> SeriesEstimate {
    assert!(m >= 1, "the series is used for positive shifts");
    assert!(q_max >= 4 && q_max <= table.max_q());
    let mut partial_sums = Vec::with_capacity(q_max as usize);
    let mut acc = 0.0;
    for q in 1..=q_max {
        acc += local_sum(table, m, q, d);
        partial_sums.push(acc);
    }
    let window_start = (3 * q_max / 4) as usize;
    let window = &partial_sums[window_start.saturating_sub(1)..];
    let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let window_spread = hi - lo;
    SeriesEstimate {
        value: acc,
        partial_sums,
        window_spread,
        stabilized: window_spread <= STABILIZATION_TOL,
    }
}

/// Exact local factor `omega_{u,v}(p)` for an odd prime `p`, where `u`
/// counts `p` in `d1 d4` and `v` counts it in `d2 d3`.
pub fn omega_local(p: u64, u: u32, v: u32, m: u64) -> Result<BigRational, SingularError> {
    assert!(p >= 3 && is_prime_u64(p), "local factors need an odd prime");
    assert!(m >= 1);
    let beta = valuation_u64(m, p);
    let big = |x: u64| BigInt::from(x);
    let pow = |e: u32| BigInt::from(p).pow(e);

    if beta == 0 {
        let symbol = |top: i64| {
            // jacobi(top, p) with top = +-m reduced mod p.
            let reduced = top.rem_euclid(p as i64) as u64;
            jacobi_u64(reduced, p)
        };
        let ratio = |sym: i8| {
            if sym == 1 {
                BigRational::new(big(p), big(p - 1))
            } else {
                BigRational::new(big(p), big(p + 1))
            }
        };
        return match (u, v) {
            (1, 0) => Ok(ratio(symbol(-(m as i64 % p as i64)))),
            (0, 1) => Ok(ratio(symbol(m as i64 % p as i64))),
            (1, 1) => Ok(BigRational::new(big(p), big(p + 1))),
            _ => Err(SingularError::UnsupportedLocalExponents { u, v }),
        };
    }

    // p^beta || m with beta >= 1: both one-sided factors coincide; all
    // three are ratios of the same denominator. Written with every term
    // scaled by p^(beta+2) to stay in integers.
    let denom = pow(beta + 2) + pow(beta + 1) - big(p) - BigInt::one();
    match (u, v) {
        (1, 0) | (0, 1) => {
            let num = pow(beta + 2) + pow(beta + 1) - pow(2) - big(p);
            Ok(BigRational::new(num, denom))
        }
        (1, 1) => {
            let num = BigInt::from(3) * pow(beta + 2) - pow(beta + 1) - pow(3) - pow(2);
            Ok(BigRational::new(num, denom))
        }
        _ => Err(SingularError::UnsupportedLocalExponents { u, v }),
    }
}

/// Exact ratio `S(m, d) / S(m, (1,1,1,1))` as a product of local factors
/// over the primes dividing the constraint vector.
pub fn omega_product(m: u64, d: &[u64; 4]) -> Result<BigRational, SingularError> {
    for &di in d {
        let sf = factorize_u64(di).iter().all(|&(_, e)| e == 1);
        if !sf {
            return Err(SingularError::NonSquarefree { d: di });
        }
    }
    let mut primes: Vec<u64> = d
        .iter()
        .filter(|&&di| di > 1)
        .flat_map(|&di| factorize_u64(di).into_iter().map(|(p, _)| p))
        .collect();
    primes.sort_unstable();
    primes.dedup();

    let mut product = BigRational::one();
    for p in primes {
        let u = (d[0] % p == 0) as u32 + (d[3] % p == 0) as u32;
        let v = (d[1] % p == 0) as u32 + (d[2] % p == 0) as u32;
        if u > 1 || v > 1 {
            return Err(SingularError::DeepConstraint { p, u, v });
        }
        product *= omega_local(p, u, v, m)?;
    }
    Ok(product)
}

fn valuation_u64(mut m: u64, p: u64) -> u32 {
    let mut beta = 0;
    while m % p == 0 {
        m /= p;
        beta += 1;
    }
    beta
}

/// The archimedean factor `I(theta) = 2 int t^-1/2 (1 - theta - t)^1/2 dt`
/// over `t` in `[0, 1 - theta]`, for `0 <= theta <= 1`.
///
/// Two independent quadratures must agree to 1e-6: a Simpson rule on the
/// square-root substitution `t = s^2`, and a Simpson rule on the fully
/// smoothed substitution `s = sqrt(1 - theta) sin(phi)`.
pub fn frak_i(theta: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&theta),
        "archimedean factor evaluated for shifts within the square range"
    );
    let a = frak_i_sqrt_substitution(theta);
    let b = frak_i_trig_substitution(theta);
    assert!(
        (a - b).abs() <= 1e-6,
        "quadrature routes disagree at theta = {theta}: {a} vs {b}"
    );
    b
}

/// `2 int_0^sqrt(1-theta) 2 (1 - theta - s^2)^1/2 ds` by composite
/// Simpson. The integrand vanishes like a square root at the right
/// endpoint, which Simpson handles at reduced order; the number of panels
/// is chosen for 1e-7 accuracy.
fn frak_i_sqrt_substitution(theta: f64) -> f64 {
    let upper = (1.0 - theta).sqrt();
    if upper == 0.0 {
        return 0.0;
    }
    let f = |s: f64| {
        let v = (1.0 - theta - s * s).max(0.0);
        2.0 * v.sqrt()
    };
    2.0 * simpson(f, 0.0, upper, 400_000)
}

/// Same integral after `s = sqrt(1-theta) sin(phi)`: the integrand
/// becomes `2 (1-theta) cos^2(phi)` on `[0, pi/2]`, which is entire, so a
/// modest Simpson rule is already at machine accuracy.
fn frak_i_trig_substitution(theta: f64) -> f64 {
    let scale = 1.0 - theta;
    let f = |phi: f64| 2.0 * scale * phi.cos() * phi.cos();
    2.0 * simpson(f, 0.0, std::f64::consts::FRAC_PI_2, 2_000)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Density of pair sums `t1 + t4 = u` with `t_i` in `[0, 1]` under the
/// weight `(t1 t4)^-1/2`: constant `pi` while the whole disk quadrant
/// fits in the box, then `4 asin(1/sqrt(u)) - pi` out to `u = 2`.
pub fn pair_density(u: f64) -> f64 {
    if !(0.0..2.0).contains(&u) {
        0.0
    } else if u <= 1.0 {
        std::f64::consts::PI
    } else {
        4.0 * (1.0 / u.sqrt()).asin() - std::f64::consts::PI
    }
}

/// Archimedean factor for the box domain `1 <= x_i^2 <= n`: the
/// autocorrelation `int pair_density(u) pair_density(u - theta) du`.
///
/// This differs from `pi * frak_i(theta)`, which cuts the pair sums off
/// at `n` instead of `2n`; the box count therefore stabilizes at
/// `box_archimedean / (pi * frak_i)` times the [`main_term`] prediction,
/// `16 ln 2 / pi^2` at `theta = 0`.
pub fn box_archimedean(theta: f64) -> f64 {
    assert!((0.0..=1.0).contains(&theta));
    let pi = std::f64::consts::PI;
    // Both densities are pi on [theta, 1].
    let flat = pi * pi * (1.0 - theta);
    // On [1, 1 + theta] only the left factor has entered its tail;
    // substituting u = 1 + s^2 turns the tail into the entire function
    // pi - 4 atan(s).
    let mid = simpson(
        |s: f64| 2.0 * s * pi * (pi - 4.0 * s.atan()),
        0.0,
        theta.sqrt(),
        2_000,
    );
    // On [1 + theta, 2] both factors are in their tails; the same
    // substitution u = 1 + theta + s^2 smooths the right factor and
    // leaves sqrt(theta + s^2) in the left one, smooth for theta > 0
    // and exactly atan(s) at theta = 0.
    let tail = simpson(
        |s: f64| {
            let left = pi - 4.0 * (theta + s * s).sqrt().atan();
            let right = pi - 4.0 * s.atan();
            2.0 * s * left * right
        },
        0.0,
        (1.0 - theta).sqrt(),
        200_000,
    );
    flat + mid + tail
}

/// Number of quadruples `x1^2 + x4^2 = x2^2 + x3^2 + m` with
/// `1 <= x_i^2 <= n`.
///
/// The right-hand pair values are histogrammed once; the left-hand pairs
/// then stream against the histogram, so memory is one `u32` per possible
/// pair value (about `8n` bytes) instead of a table per side.
pub fn lattice_count(m: u64, n: u64) -> u64 {
    assert!(m >= 1 && n >= 1);
    let r = n.isqrt();
    let max_pair = (2 * n) as usize;
    let mut pair_counts = vec![0u32; max_pair + 1];
    for x2 in 1..=r {
        for x3 in 1..=r {
            pair_counts[(x2 * x2 + x3 * x3) as usize] += 1;
        }
    }
    let mut count = 0u64;
    for x1 in 1..=r {
        for x4 in 1..=r {
            let v = x1 * x1 + x4 * x4;
            if v > m && (v - m) as usize <= max_pair {
                count += pair_counts[(v - m) as usize] as u64;
            }
        }
    }
    count
}

/// Same count with `x1` and `x2` restricted to primes and the other two
/// coordinates allowed to be zero: quadruples
/// `p1^2 + b4^2 = p2^2 + b3^2 + m` with `p_i` prime, `b_i >= 0`, and
/// every square at most `n`.
pub fn lattice_count_primes(m: u64, n: u64) -> u64 {
    assert!(m >= 1 && n >= 1);
    let r = n.isqrt();
    let primes = primes_up_to(r);
    let max_pair = (2 * n) as usize;
    let mut pair_counts = vec![0u32; max_pair + 1];
    for &p2 in &primes {
        for b3 in 0..=r {
            pair_counts[(p2 * p2 + b3 * b3) as usize] += 1;
        }
    }
    let mut count = 0u64;
    for &p1 in &primes {
        for b4 in 0..=r {
            let v = p1 * p1 + b4 * b4;
            if v > m && (v - m) as usize <= max_pair {
                count += pair_counts[(v - m) as usize] as u64;
            }
        }
    }
    count
}

/// Brute-force reference for [`lattice_count`], quartic in `sqrt(n)`.
pub fn lattice_count_brute(m: u64, n: u64) -> u64 {
    let r = n.isqrt();
    let mut count = 0;
    for x1 in 1..=r {
        for x2 in 1..=r {
            for x3 in 1..=r {
                for x4 in 1..=r {
                    if x1 * x1 + x4 * x4 == x2 * x2 + x3 * x3 + m {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// The series-and-integral prediction for [`lattice_count`]:
/// `(pi/16) S_-(m) I(m/n) n`.
pub fn main_term(table: &GaussTable, m: u64, n: u64, q_max: u64) -> f64 {
    let series = singular_series(table, m, &[1, 1, 1, 1], q_max);
    let theta = m as f64 / n as f64;
    std::f64::consts::PI / 16.0 * series.value * frak_i(theta) * n as f64
}

/// Observed-to-predicted ratio of the prime-constrained count against the
/// shape `n (log n)^-2 prod_{p | m} (1 + 1/p)` it is bounded by.
pub fn thm24_ratio(m: u64, n: u64) -> f64 {
    let count = lattice_count_primes(m, n) as f64;
    let log_n = (n as f64).ln();
    let divisor_product: f64 = factorize_u64(m)
        .iter()
        .map(|&(p, _)| 1.0 + 1.0 / p as f64)
        .product();
    count / (n as f64 / (log_n * log_n) * divisor_product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn test_gauss_sum_known_values() {
        // S(1, a) = 1.
        assert_close(gauss_sum(1, 0).re, 1.0, 1e-12);
        // S(3, 1) = 1 + 2 e(1/3) = i sqrt(3).
        let s3 = gauss_sum(3, 1);
        assert_close(s3.re, 0.0, 1e-12);
        assert_close(s3.im, 3.0f64.sqrt(), 1e-12);
        // S(5, 1) = sqrt(5), real since 5 = 1 (mod 4).
        let s5 = gauss_sum(5, 1);
        assert_close(s5.re, 5.0f64.sqrt(), 1e-12);
        assert_close(s5.im, 0.0, 1e-12);
        // S(q, 0) = q.
        assert_close(gauss_sum(12, 0).re, 12.0, 1e-12);
    }

    #[test]
    fn test_gauss_magnitude_law_odd_moduli() {
        // |S(q, a)|^2 = q for odd q and gcd(a, q) = 1.
        for q in (1..=99u64).step_by(2) {
            for a in 1..q {
                if gcd_u64(a, q) == 1 {
                    let s = gauss_sum(q, a as i64);
                    assert_close(s.norm_sqr(), q as f64, 1e-9 * q as f64);
                }
            }
        }
    }

    #[test]
    fn test_gauss_multiplicativity() {
        // S(q1 q2, a) = S(q1, a q2) S(q2, a q1) for coprime q1, q2.
        for (q1, q2) in [(3u64, 5u64), (4, 9), (7, 8), (9, 16), (5, 21)] {
            for a in 1..(q1 * q2).min(30) {
                let lhs = gauss_sum(q1 * q2, a as i64);
                let rhs = gauss_sum(q1, (a * q2) as i64) * gauss_sum(q2, (a * q1) as i64);
                assert_close(lhs.re, rhs.re, 1e-9);
                assert_close(lhs.im, rhs.im, 1e-9);
            }
        }
    }

    #[test]
    fn test_gauss_prime_twist_by_symbol() {
        // S(p, a) = (a/p) S(p, 1) for odd prime p and p not dividing a.
        for p in [3u64, 7, 11, 13, 17, 19, 23] {
            let base = gauss_sum(p, 1);
            for a in 2..p {
                let expected = base * jacobi_u64(a, p) as f64;
                let got = gauss_sum(p, a as i64);
                assert_close(got.re, expected.re, 1e-9);
                assert_close(got.im, expected.im, 1e-9);
            }
        }
    }

    #[test]
    fn test_table_matches_direct_summation() {
        let table = GaussTable::new(40);
        for q in 1..=40u64 {
            for c in 0..q {
                let direct = gauss_sum(q, c as i64);
                let cached = table.entry(q, c);
                assert_close(direct.re, cached.re, 1e-9);
                assert_close(direct.im, cached.im, 1e-9);
            }
        }
    }

    #[test]
    fn test_table_gcd_reduction_law() {
        // S(q, c) = g S(q/g, c/g) with g = gcd(c, q).
        let table = GaussTable::new(60);
        for q in 2..=60u64 {
            for c in 1..q {
                let g = gcd_u64(c, q);
                if g > 1 {
                    let reduced = table.entry(q / g, c / g) * g as f64;
                    let full = table.entry(q, c);
                    assert_close(full.re, reduced.re, 1e-9);
                    assert_close(full.im, reduced.im, 1e-9);
                }
            }
        }
    }

    /// Ramanujan sum by direct summation.
    fn ramanujan(q: u64, n: i64) -> f64 {
        let mut sum = Complex64::ZERO;
        for a in 1..=q {
            if gcd_u64(a, q) == 1 {
                let k = (a as i64 * n).rem_euclid(q as i64) as u64;
                sum += root_of_unity(k, q);
            }
        }
        assert!(sum.im.abs() < 1e-9);
        sum.re
    }

    #[test]
    fn test_local_sum_is_ramanujan_for_odd_q() {
        // For odd q the four Gauss factors collapse to |S|^4 = q^2, so
        // A(m, q, 1) = q^-2 c_q(-m).
        let table = GaussTable::new(99);
        for q in (1..=99u64).step_by(2) {
            for m in [1u64, 2, 12, 30] {
                let a = local_sum(&table, m, q, &[1, 1, 1, 1]);
                let expected = ramanujan(q, -(m as i64)) / (q * q) as f64;
                assert_close(a, expected, 1e-9);
            }
        }
    }

    #[test]
    fn test_series_closed_form_values() {
        // A(m, q) is multiplicative in q, so the full series is an Euler
        // product. Every odd-prime factor for p not dividing m collapses
        // to 1 - p^-2, giving the odd part 8/pi^2 for m in {1, 2, 4}.
        // The 2-adic factor is 1 + A(m,4) + A(m,8) with
        // A(m,4) = (1/2)cos(pi m/2) and A(m,8) = c_8(-m)/16: factor 1
        // for odd m, 1/2 for m = 2, and 1 + 1/2 - 1/4 = 5/4 for m = 4.
        let table = GaussTable::new(800);
        let base = 8.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let s1 = singular_series(&table, 1, &[1, 1, 1, 1], 800);
        assert!(s1.stabilized, "spread {}", s1.window_spread);
        assert_close(s1.value, base, 2e-3);

        let s2 = singular_series(&table, 2, &[1, 1, 1, 1], 800);
        assert_close(s2.value, base / 2.0, 2e-3);

        let s4 = singular_series(&table, 4, &[1, 1, 1, 1], 800);
        assert_close(s4.value, base * 1.25, 2e-3);
    }

    #[test]
    fn test_series_positive_for_small_shifts() {
        let table = GaussTable::new(400);
        for m in 1..=20u64 {
            let est = singular_series(&table, m, &[1, 1, 1, 1], 400);
            assert!(est.value > 0.05, "m = {m}: {}", est.value);
            assert!(est.stabilized, "m = {m}: spread {}", est.window_spread);
        }
    }

    #[test]
    fn test_local_factor_exact_values() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        // p = 3, beta = 1: (1 + 1/3 - 1/3 - 1/9) / (1 + 1/3 - 1/9 - 1/27)
        // = (8/9) / (32/27) = 3/4.
        assert_eq!(omega_local(3, 1, 0, 3).unwrap(), r(3, 4));
        // p = 3, beta = 2: 96/104 = 12/13.
        assert_eq!(omega_local(3, 1, 0, 9).unwrap(), r(12, 13));
        // p = 3, beta = 1, both sides: (3*27 - 9 - 27 - 9)/32 = 36/32.
        assert_eq!(omega_local(3, 1, 1, 3).unwrap(), r(9, 8));
        // jacobi(-1, 5) = 1: one-sided factor 5/4 either way.
        assert_eq!(omega_local(5, 1, 0, 1).unwrap(), r(5, 4));
        assert_eq!(omega_local(5, 0, 1, 1).unwrap(), r(5, 4));
        assert_eq!(omega_local(5, 1, 1, 1).unwrap(), r(5, 6));
        // jacobi(-1, 3) = -1 but jacobi(1, 3) = 1: the sides differ.
        assert_eq!(omega_local(3, 1, 0, 1).unwrap(), r(3, 4));
        assert_eq!(omega_local(3, 0, 1, 1).unwrap(), r(3, 2));
        assert_eq!(
            omega_local(3, 2, 0, 1).unwrap_err(),
            SingularError::UnsupportedLocalExponents { u: 2, v: 0 }
        );
    }

    #[test]
    fn test_omega_product_matches_series_quotient() {
        // The exact local product and the quotient of truncated series
        // are independent routes to the same ratio.
        let table = GaussTable::new(600);
        let q_max = 600;
        for (m, d) in [
            (1u64, [3u64, 1, 1, 1]),
            (1, [1, 3, 1, 1]),
            (1, [3, 3, 1, 1]),
            (1, [3, 5, 1, 1]),
            (3, [3, 1, 1, 1]),
            (2, [5, 1, 1, 7]),
            (6, [1, 15, 1, 1]),
        ] {
            let base = singular_series(&table, m, &[1, 1, 1, 1], q_max).value;
            let constrained = singular_series(&table, m, &d, q_max).value;
            let exact = omega_product(m, &d).unwrap().to_f64().unwrap();
            assert_close(constrained / base, exact, 2e-2);
        }
    }

    #[test]
    fn test_omega_product_rejects_bad_vectors() {
        assert_eq!(
            omega_product(1, &[4, 1, 1, 1]).unwrap_err(),
            SingularError::NonSquarefree { d: 4 }
        );
        assert_eq!(
            omega_product(1, &[3, 1, 1, 3]).unwrap_err(),
            SingularError::DeepConstraint { p: 3, u: 2, v: 0 }
        );
    }

    #[test]
    fn test_frak_i_closed_form() {
        // I(theta) = pi (1 - theta) on [0, 1], by the Beta integral
        // int_0^1 s^-1/2 (1-s)^1/2 ds = pi/2.
        assert_close(frak_i(0.0), std::f64::consts::PI, 1e-7);
        assert_close(frak_i(1.0), 0.0, 1e-12);
        for k in 0..=10 {
            let theta = k as f64 / 10.0;
            assert_close(frak_i(theta), std::f64::consts::PI * (1.0 - theta), 1e-6);
        }
    }

    #[test]
    fn test_lattice_count_matches_brute_force() {
        for m in [1u64, 2, 5, 12] {
            for n in [50u64, 200, 400] {
                assert_eq!(lattice_count(m, n), lattice_count_brute(m, n), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn test_lattice_count_tiny_cases() {
        // n = 2: only x_i = 1 is allowed, so the equation reads
        // 2 = 2 + m, impossible for m >= 1.
        assert_eq!(lattice_count(1, 2), 0);
        // n = 4, m = 2: x_i in {1, 2}; 1+4 = 1+2+2 has (x1,x4) = (1,2)
        // or (2,1) against (x2,x3) = (1,1), and 4+4 = 4+2+2 gives
        // (2,2) against (1,...)? 4 + 2 = 6 needs x2^2+x3^2 = 6: none.
        // Enumerating: pairs sums left {2,5,8}, right {2,5,8} + 2.
        // left 5 = right pair 3? no; left sums minus m=2: {0,3,6}; right
        // pair sums possible {2,5,8}: no match except... brute confirms.
        assert_eq!(lattice_count(2, 4), lattice_count_brute(2, 4));
    }

    #[test]
    fn test_lattice_count_primes_brute() {
        for m in [1u64, 4, 7] {
            for n in [100u64, 400] {
                let r = n.isqrt();
                let mut brute = 0u64;
                for p1 in 2..=r {
                    if !is_prime_u64(p1) {
                        continue;
                    }
                    for p2 in 2..=r {
                        if !is_prime_u64(p2) {
                            continue;
                        }
                        for b3 in 0..=r {
                            for b4 in 0..=r {
                                if p1 * p1 + b4 * b4 == p2 * p2 + b3 * b3 + m {
                                    brute += 1;
                                }
                            }
                        }
                    }
                }
                assert_eq!(lattice_count_primes(m, n), brute, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn test_box_archimedean_closed_forms() {
        // At theta = 0 the autocorrelation evaluates to 16 ln 2, and at
        // theta = 1 the surviving piece is pi (4 - pi); both drop out of
        // the atan antiderivatives.
        assert_close(box_archimedean(0.0), 16.0 * 2.0f64.ln(), 1e-9);
        let pi = std::f64::consts::PI;
        assert_close(box_archimedean(1.0), pi * (4.0 - pi), 1e-9);
        // Second route: raw Simpson on the unsmoothed product. The
        // square-root kinks at u = 1 and u = 1 + theta cost accuracy but
        // not correctness.
        for theta in [0.0, 0.3, 0.7, 1.0] {
            let raw = simpson(
                |u: f64| pair_density(u) * pair_density(u - theta),
                theta,
                2.0,
                400_000,
            );
            assert_close(box_archimedean(theta), raw, 1e-5);
        }
    }

    #[test]
    fn test_main_term_ratio_stabilizes() {
        // Against the pair-sum-truncated prediction the box count runs
        // a fixed factor high, tending to 16 ln 2 / pi^2 = 1.1237 as the
        // shift becomes negligible; the ratio must settle decade over
        // decade rather than drift.
        let table = GaussTable::new(400);
        let mut ratios = Vec::new();
        for n in [10_000u64, 100_000, 1_000_000] {
            let predicted = main_term(&table, 1, n, 400);
            let observed = lattice_count(1, n) as f64;
            ratios.push(observed / predicted);
        }
        for ratio in &ratios {
            assert!((1.0..1.2).contains(ratio), "ratios {ratios:?}");
        }
        let step1 = (ratios[1] / ratios[0] - 1.0).abs();
        let step2 = (ratios[2] / ratios[1] - 1.0).abs();
        assert!(step1 < 0.10 && step2 < 0.10, "steps {step1} {step2}");
        assert!(step2 < step1, "not settling: {step1} then {step2}");

        // Normalizing by the box-domain archimedean factor instead puts
        // the ratio within 1% of 1 by n = 10^6.
        let n = 1_000_000u64;
        let series = singular_series(&table, 1, &[1, 1, 1, 1], 400);
        let theta = 1.0 / n as f64;
        let boxed = series.value * box_archimedean(theta) * n as f64 / 16.0;
        let ratio = lattice_count(1, n) as f64 / boxed;
        assert_close(ratio, 1.0, 0.01);
    }

    #[test]
    fn test_thm24_ratio_bounded() {
        // The prime-constrained count is bounded by a constant times
        // n (log n)^-2 prod (1 + 1/p); the observed ratio stays modest.
        for m in [1u64, 2, 6, 30] {
            let ratio = thm24_ratio(m, 1_000_000);
            assert!(ratio > 0.0 && ratio < 40.0, "m={m}: {ratio}");
        }
    }
}
