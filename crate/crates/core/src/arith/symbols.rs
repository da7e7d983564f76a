//! Jacobi symbols and squareness modulo squarefree odd numbers.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

/// Jacobi symbol `(a / n)` for odd `n >= 1`; `a` may be negative or larger
/// than `n` and is reduced internally. Returns -1, 0, or 1.
pub fn jacobi(a: &BigInt, n: &BigUint) -> i8 {
    assert!(n.is_odd(), "Jacobi symbol requires an odd lower argument");
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut a = a.mod_floor(&n_int);
    let mut n = n.clone();
    let mut result: i8 = 1;
    let one = BigUint::one();
    while !a.is_zero() {
        let mut au = a.to_biguint().expect("mod_floor keeps a nonnegative");
        // Pull out factors of two: (2/n) = -1 iff n = 3, 5 (mod 8).
        let twos = au.trailing_zeros().unwrap_or(0);
        if twos % 2 == 1 {
            let n_mod_8 = (&n % 8u32).to_u32_digits().first().copied().unwrap_or(0);
            if n_mod_8 == 3 || n_mod_8 == 5 {
                result = -result;
            }
        }
        au >>= twos;
        // Quadratic reciprocity for odd au, n.
        let a_mod_4 = (&au % 4u32).to_u32_digits().first().copied().unwrap_or(0);
        let n_mod_4 = (&n % 4u32).to_u32_digits().first().copied().unwrap_or(0);
        if a_mod_4 == 3 && n_mod_4 == 3 {
            result = -result;
        }
        let next_n = au.clone();
        let next_a = &n % &au;
        n = next_n;
        a = BigInt::from_biguint(Sign::Plus, next_a);
    }
    if n == one {
        result
    } else {
        0
    }
}

/// Machine-word Jacobi symbol; `a` is reduced mod odd `n`.
pub fn jacobi_u64(mut a: u64, mut n: u64) -> i8 {
    assert!(n % 2 == 1, "Jacobi symbol requires an odd lower argument");
    a %= n;
    let mut result: i8 = 1;
    while a != 0 {
        let twos = a.trailing_zeros();
        if twos % 2 == 1 {
            let r = n & 7;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        a >>= twos;
        if a & 3 == 3 && n & 3 == 3 {
            result = -result;
        }
        let t = n % a;
        n = a;
        a = t;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// True iff `x` is a square modulo the squarefree odd number with the given
/// prime factorization: equivalent to `jacobi(x, p) >= 0` at every prime
/// factor (a residue of 0 at some factor still admits a square root there).
pub fn is_square_mod_squarefree(x: &BigUint, factors: &[BigUint]) -> bool {
    let x_int = BigInt::from_biguint(Sign::Plus, x.clone());
    factors.iter().all(|p| jacobi(&x_int, p) >= 0)
}
