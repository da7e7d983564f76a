//! Integer factorization: trial division by small primes, then seeded
//! Pollard-Brent splitting under an iteration budget. Partial results are
//! legal and carry the unfactored cofactor explicitly.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{gcd_u64, is_prime, mul_mod_u64, primes_up_to};

/// Deterministic splitting budget. The same seed and limits always yield
/// the same (possibly partial) factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorBudget {
    /// Trial-divide by all primes up to this bound first.
    pub trial_bound: u64,
    /// Total Pollard-Brent iterations allowed across all splitting attempts.
    pub rho_iterations: u64,
    /// Seed for the parameter stream of the splitting attempts.
    pub seed: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: 10_000,
            rho_iterations: 4_000_000,
            seed: 0x5eed_c0de_2026_0101,
        }
    }
}

/// Factorization outcome: prime factors in increasing order with
/// multiplicities, plus the unfactored cofactor when the budget ran out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: BigUint,
    pub factors: Vec<(BigUint, u32)>,
    pub cofactor: Option<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_none()
    }

    /// Product of `p^e` over all listed factors times the cofactor;
    /// always equals `value`.
    pub fn reassemble(&self) -> BigUint {
        let mut acc = BigUint::one();
        for (p, e) in &self.factors {
            acc *= p.pow(*e);
        }
        if let Some(c) = &self.cofactor {
            acc *= c;
        }
        acc
    }

    pub fn distinct_primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }
}

/// SplitMix64: tiny deterministic generator for Pollard-Brent parameters.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

fn small_primes() -> &'static [u64] {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    CACHE.get_or_init(|| primes_up_to(65_536))
}

/// `a + b mod m` for `a, b < m`, safe against u64 wraparound.
#[inline]
fn add_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

/// Factors `n` within the given budget. `1` yields an empty factor list;
/// `0` has no factorization and is reported whole as its own cofactor.
pub fn factorize(n: &BigUint, budget: &FactorBudget) -> Factorization {
    if n.is_zero() {
        return Factorization {
            value: n.clone(),
            factors: vec![],
            cofactor: Some(n.clone()),
        };
    }
    if n.is_one() {
        return Factorization {
            value: n.clone(),
            factors: vec![],
            cofactor: None,
        };
    }

    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    let mut rest = n.clone();

    let sieved;
    let trial_primes: &[u64] = if budget.trial_bound <= 65_536 {
        let all = small_primes();
        let end = all.partition_point(|&p| p <= budget.trial_bound);
        &all[..end]
    } else {
        sieved = primes_up_to(budget.trial_bound);
        &sieved
    };

    for &p in trial_primes {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            factors.push((pb, e));
        }
        if rest.is_one() {
            break;
        }
    }

    let mut cofactor = None;
    if !rest.is_one() {
        let mut iterations_left = budget.rho_iterations;
        let mut rng = SplitMix64(budget.seed);
        let mut pending = vec![rest];
        let mut found: Vec<BigUint> = Vec::new();
        while let Some(m) = pending.pop() {
            if is_prime(&m) {
                found.push(m);
                continue;
            }
            match split(&m, &mut rng, &mut iterations_left) {
                Some(d) => {
                    let q = &m / &d;
                    pending.push(d);
                    pending.push(q);
                }
                None => {
                    // Budget exhausted; everything still pending is merged
                    // into one explicit composite cofactor.
                    let mut c = m;
                    for r in pending.drain(..) {
                        c *= r;
                    }
                    cofactor = Some(c);
                    break;
                }
            }
        }
        found.sort();
        for p in found {
            match factors.iter_mut().find(|(q, _)| *q == p) {
                Some((_, e)) => *e += 1,
                None => factors.push((p, 1)),
            }
        }
    }

    factors.sort_by(|(a, _), (b, _)| a.cmp(b));
    Factorization {
        value: n.clone(),
        factors,
        cofactor,
    }
}

/// Convenience wrapper for machine words with the default budget; every
/// u64 input factors completely under it.
pub fn factorize_u64(n: u64) -> Vec<(u64, u32)> {
    let f = factorize(&BigUint::from(n), &FactorBudget::default());
    debug_assert!(f.is_complete());
    f.factors
        .into_iter()
        .map(|(p, e)| (u64::try_from(&p).expect("u64 input has u64 factors"), e))
        .collect()
}

/// One nontrivial divisor of composite `m`, or `None` when the iteration
/// budget runs out. Uses the u64 fast path when possible.
fn split(m: &BigUint, rng: &mut SplitMix64, iterations_left: &mut u64) -> Option<BigUint> {
    if let Ok(small) = u64::try_from(m) {
        return split_u64(small, rng, iterations_left).map(BigUint::from);
    }
    split_big(m, rng, iterations_left)
}

/// Pollard-Brent on machine words.
fn split_u64(n: u64, rng: &mut SplitMix64, iterations_left: &mut u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    loop {
        if *iterations_left == 0 {
            return None;
        }
        let c = rng.next() % (n - 1) + 1;
        let mut y = rng.next() % n;
        let mut x = y;
        let mut ys = y;
        let mut q: u64 = 1;
        let mut g: u64 = 1;
        let mut r: u64 = 1;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = add_mod_u64(mul_mod_u64(y, y, n), c, n);
            }
            let mut k = 0u64;
            while k < r && g == 1 {
                ys = y;
                let chunk = 128.min(r - k);
                if *iterations_left < chunk {
                    *iterations_left = 0;
                    return None;
                }
                *iterations_left -= chunk;
                for _ in 0..chunk {
                    y = add_mod_u64(mul_mod_u64(y, y, n), c, n);
                    q = mul_mod_u64(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += chunk;
            }
            r *= 2;
        }
        if g == n {
            // Replay the last checkpoint one step at a time.
            g = 1;
            y = ys;
            while g == 1 {
                y = add_mod_u64(mul_mod_u64(y, y, n), c, n);
                g = gcd_u64(x.abs_diff(y), n);
            }
        }
        if g > 1 && g < n {
            return Some(g);
        }
        // Only the trivial divisor emerged; retry with fresh parameters.
    }
}

/// Pollard-Brent on big integers, for composites beyond u64.
fn split_big(n: &BigUint, rng: &mut SplitMix64, iterations_left: &mut u64) -> Option<BigUint> {
    let one = BigUint::one();
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    loop {
        if *iterations_left == 0 {
            return None;
        }
        let c = BigUint::from(rng.next() % 1_000_003 + 1);
        let step = |v: &BigUint| (v * v + &c) % n;
        let mut y = BigUint::from(rng.next());
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut q = one.clone();
        let mut g = one.clone();
        let mut r: u64 = 1;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = step(&y);
            }
            let mut k = 0u64;
            while k < r && g.is_one() {
                ys = y.clone();
                let chunk = 64.min(r - k);
                if *iterations_left < chunk {
                    *iterations_left = 0;
                    return None;
                }
                *iterations_left -= chunk;
                for _ in 0..chunk {
                    y = step(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = q * diff % n;
                }
                g = q.gcd(n);
                k += chunk;
            }
            r *= 2;
        }
        if &g == n {
            // Replay the last checkpoint one step at a time.
            g = one.clone();
            y = ys;
            while g.is_one() {
                y = step(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                g = diff.gcd(n);
            }
        }
        if !g.is_one() && &g != n {
            return Some(g);
        }
    }
}
