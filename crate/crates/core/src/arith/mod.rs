//! Exact integer arithmetic used by every other module: modular
//! exponentiation, multiplicative orders, Jacobi symbols, CRT, primality
//! testing, integer factorization, and square-root extraction modulo prime
//! powers.
//!
//! All functions operate on arbitrary-precision naturals ([`BigUint`]);
//! hot paths that only ever see machine-sized inputs have dedicated `u64`
//! variants (`jacobi_u64`, `is_prime_u64`, ...) that the generic versions
//! agree with.

mod crt;
mod factor;
mod order;
mod primality;
mod sieve;
mod sqrt;
mod symbols;

pub use crt::crt;
pub use factor::{factorize, factorize_u64, FactorBudget, Factorization};
pub use order::{mult_order, mult_order_u64, order_from_multiple, OrderBudget};
pub use primality::{is_prime, is_prime_u64, primality, Primality};
pub use sieve::{primes_up_to, spf_table};
pub use sqrt::square_roots_mod_prime_power;
pub use symbols::{is_square_mod_squarefree, jacobi, jacobi_u64};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

/// Errors surfaced by the arithmetic layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("base {a} is not coprime to modulus {modulus}")]
    NotCoprime { a: BigUint, modulus: BigUint },
    #[error("moduli {first} and {second} share a common factor")]
    NonCoprimeModuli { first: BigUint, second: BigUint },
    #[error("factorization stopped with unfactored cofactor {cofactor}")]
    FactorizationIncomplete { cofactor: BigUint },
    #[error("multiplicative order not found within {cap} iterative steps")]
    OrderSearchExceeded { cap: u64 },
}

/// `base^exp mod modulus` by square-and-multiply. `modulus` must be >= 1;
/// the zero exponent yields `1 mod modulus`.
pub fn mod_pow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> BigUint {
    assert!(!modulus.is_zero(), "mod_pow requires a nonzero modulus");
    base.modpow(exp, modulus)
}

/// `base^exp mod modulus` on machine words, with 128-bit intermediates.
pub fn mod_pow_u64(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    assert!(modulus > 0, "mod_pow_u64 requires a nonzero modulus");
    if modulus == 1 {
        return 0;
    }
    let mut acc: u64 = 1;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, modulus);
        }
        base = mul_mod_u64(base, base, modulus);
        exp >>= 1;
    }
    acc
}

/// `a * b mod m` without overflow.
#[inline]
pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Greatest common divisor on machine words.
pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple on machine words; `None` on overflow.
pub fn lcm_u64(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd_u64(a, b)).checked_mul(b)
}

/// Exact integer square root check: `Some(r)` iff `n == r * r`.
pub fn is_perfect_square(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// `u64` variant of [`is_perfect_square`].
pub fn is_perfect_square_u64(n: u64) -> Option<u64> {
    let r = n.isqrt();
    if r * r == n {
        Some(r)
    } else {
        None
    }
}

/// Largest `k` with `p^k | a`. Requires `a >= 1` and `p >= 2`.
pub fn valuation(a: &BigUint, p: &BigUint) -> u32 {
    assert!(!a.is_zero(), "valuation of 0 is infinite");
    assert!(p >= &BigUint::from(2u32), "valuation base must be >= 2");
    let mut k = 0u32;
    let mut rest = a.clone();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&rest, p);
        if !r.is_zero() {
            return k;
        }
        rest = q;
        k += 1;
    }
}

/// True iff `n = x^2 + y^2` for some integers `x, y >= 0`, decided through
/// the prime factorization: every prime `p = 3 (mod 4)` must divide `n` to
/// an even power. Errors when the factorization budget runs out before the
/// verdict is certain.
pub fn is_sum_of_two_squares(n: &BigUint, budget: &FactorBudget) -> Result<bool, ArithError> {
    if n.is_zero() || n.is_one() {
        return Ok(true);
    }
    let f = factorize(n, budget);
    let three = BigUint::from(3u32);
    let four = BigUint::from(4u32);
    for (p, e) in &f.factors {
        if p % &four == three && e % 2 == 1 {
            return Ok(false);
        }
    }
    if let Some(c) = &f.cofactor {
        // Any remaining cofactor could hide an odd-exponent 3 (mod 4) prime.
        return Err(ArithError::FactorizationIncomplete {
            cofactor: c.clone(),
        });
    }
    Ok(true)
}
