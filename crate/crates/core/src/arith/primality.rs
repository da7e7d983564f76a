//! Primality testing. Below 2^64 the verdict is deterministic (fixed
//! Miller-Rabin witness set proven exhaustive for that range). Above 2^64
//! a fixed-base strong-probable-prime battery plus a strong Lucas test is
//! used, and prime verdicts are reported as [`Primality::ProbablePrime`]
//! so downstream reports can carry the annotation.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{is_perfect_square, jacobi, mod_pow, mul_mod_u64};

/// Outcome of a primality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primality {
    Composite,
    /// Deterministically certified prime (all inputs below 2^64).
    Prime,
    /// Passed the strong-probable-prime battery and a strong Lucas test.
    ProbablePrime,
}

impl Primality {
    pub fn is_prime(self) -> bool {
        !matches!(self, Primality::Composite)
    }

    /// Annotation used in emitted JSON.
    pub fn label(self) -> &'static str {
        match self {
            Primality::Composite => "composite",
            Primality::Prime => "deterministic",
            Primality::ProbablePrime => "probable",
        }
    }
}

/// Witness set proven to decide primality for every n < 3.3 * 10^24,
/// which covers the whole u64 range.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality for machine words.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in MR_WITNESSES.iter() {
        let mut x = super::mod_pow_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Classifies `n` as composite, prime, or probable prime.
pub fn primality(n: &BigUint) -> Primality {
    if let Ok(small) = u64::try_from(n) {
        return if is_prime_u64(small) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    // Trial by the witness primes also screens tiny factors.
    for p in MR_WITNESSES {
        if (n % BigUint::from(p)).is_zero() {
            return Primality::Composite;
        }
    }
    for &a in MR_WITNESSES.iter() {
        if !strong_probable_prime(n, &BigUint::from(a)) {
            return Primality::Composite;
        }
    }
    if !strong_lucas_probable_prime(n) {
        return Primality::Composite;
    }
    Primality::ProbablePrime
}

/// Convenience wrapper: true for both deterministic and probable primes.
pub fn is_prime(n: &BigUint) -> bool {
    primality(n).is_prime()
}

fn strong_probable_prime(n: &BigUint, base: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap();
    let d = &n_minus_1 >> s;
    let mut x = mod_pow(base, &d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Strong Lucas test with Selfridge parameters: the first
/// D in 5, -7, 9, -11, ... with jacobi(D, n) = -1, P = 1, Q = (1 - D) / 4.
fn strong_lucas_probable_prime(n: &BigUint) -> bool {
    // A perfect square never admits jacobi(D, n) = -1; rule it out first.
    if is_perfect_square(n).is_some() {
        return false;
    }
    let mut d = BigInt::from(5);
    loop {
        match jacobi(&d, n) {
            -1 => break,
            0 => {
                // Shares a factor with n; n > |D| here, so n is composite.
                if BigInt::from(n.clone()) != d.abs() {
                    return false;
                }
            }
            _ => {}
        }
        let step = BigInt::from(2);
        d = if d.is_positive() { -(d + step) } else { -(d - step) };
    }
    let q: BigInt = (BigInt::one() - &d) / 4;

    // Factor n + 1 = t * 2^s with t odd.
    let n_plus_1 = n + BigUint::one();
    let s = n_plus_1.trailing_zeros().unwrap();
    let t = &n_plus_1 >> s;

    let nn = BigInt::from(n.clone());
    let to_mod = |x: &BigInt| -> BigInt { x.mod_floor(&nn) };

    // Lucas sequences U_t, V_t by binary ladder on the index.
    let mut u = BigInt::one();
    let mut v = BigInt::one();
    let mut qk = to_mod(&q);
    let bits = t.bits();
    for i in (0..bits - 1).rev() {
        // (U, V)_{2k} from (U, V)_k.
        u = to_mod(&(&u * &v));
        v = to_mod(&(&v * &v - 2 * &qk));
        qk = to_mod(&(&qk * &qk));
        if t.bit(i) {
            // (U, V)_{2k+1} from (U, V)_{2k}; division by 2 mod odd n.
            let mut u1 = &u + &v;
            if u1.is_odd() {
                u1 += &nn;
            }
            let mut v1 = &d * &u + &v;
            if v1.is_odd() {
                v1 += &nn;
            }
            u = to_mod(&(u1 / 2));
            v = to_mod(&(v1 / 2));
            qk = to_mod(&(&qk * &q));
        }
    }

    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = to_mod(&(&v * &v - 2 * &qk));
        if v.is_zero() {
            return true;
        }
        qk = to_mod(&(&qk * &qk));
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_is_prime_u64_small_exhaustive() {
        // Sieve oracle on [0, 100000).
        let limit = 100_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for v in 0..limit {
            assert_eq!(is_prime_u64(v as u64), sieve[v], "mismatch at {v}");
        }
    }

    #[test]
    fn test_is_prime_u64_known_values() {
        assert!(is_prime_u64(524287)); // 2^19 - 1
        assert!(is_prime_u64(2_147_483_647)); // 2^31 - 1
        assert!(!is_prime_u64(891));
        assert!(!is_prime_u64(8388607)); // 47 * 178481
        assert!(is_prime_u64(2_646_507_710_984_041)); // largest orbit-table factor
        // Strong pseudoprime to base 2 alone.
        assert!(!is_prime_u64(2047));
    }

    #[test]
    fn test_primality_big() {
        let p: BigUint = "14973866897175265228063698945547".parse().unwrap();
        assert_eq!(primality(&p), Primality::ProbablePrime);
        let q: BigUint = "1409033313878253109224688819".parse().unwrap();
        assert_eq!(primality(&q), Primality::ProbablePrime);
        // Product of the two big primes above must read composite.
        let composite = &p * &q;
        assert_eq!(primality(&composite), Primality::Composite);
        // A big perfect square exercises the Lucas square guard.
        let sq = &p * &p;
        assert_eq!(primality(&sq), Primality::Composite);
        // Below 2^64 the verdict is flagged deterministic.
        assert_eq!(primality(&BigUint::from(65537u32)), Primality::Prime);
    }

    #[test]
    fn test_primality_labels() {
        assert_eq!(Primality::Prime.label(), "deterministic");
        assert_eq!(Primality::ProbablePrime.label(), "probable");
        assert!(Primality::ProbablePrime.is_prime());
        assert!(!Primality::Composite.is_prime());
    }
}
