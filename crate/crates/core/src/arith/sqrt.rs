//! Square roots modulo odd prime powers: Tonelli-Shanks modulo the prime,
//! Hensel lifting up the power, and explicit handling of inputs divisible
//! by the prime.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{jacobi, mod_pow, valuation};

/// All `x` in `[0, p^beta)` with `x^2 = a (mod p^beta)`, sorted
/// increasingly. Requires an odd prime `p`, `beta >= 1`, and `a < p^beta`.
/// The returned count never exceeds `2 * p^(nu/2)` where `nu` is the
/// p-adic valuation of `a` (taking `nu = beta` for `a = 0`).
pub fn square_roots_mod_prime_power(a: &BigUint, p: &BigUint, beta: u32) -> Vec<BigUint> {
    assert!(beta >= 1, "prime-power exponent must be >= 1");
    assert!(p.is_odd() && p > &BigUint::one(), "p must be an odd prime");
    let q = p.pow(beta);
    assert!(a < &q, "representative must be reduced mod p^beta");

    if a.is_zero() {
        // x must be divisible by p^ceil(beta/2).
        let half_up = p.pow(beta.div_ceil(2));
        let count = p.pow(beta / 2);
        let mut roots = Vec::new();
        let mut t = BigUint::zero();
        while t < count {
            roots.push(&t * &half_up);
            t += 1u32;
        }
        return roots;
    }

    let nu = valuation(a, p);
    if nu % 2 == 1 {
        // x^2 has even p-adic valuation; an odd one is unreachable.
        return vec![];
    }
    let k = nu / 2;
    let reduced_beta = beta - nu;
    let a_unit = a / p.pow(nu);

    let Some(y) = sqrt_mod_odd_prime(&(&a_unit % p), p) else {
        return vec![];
    };
    let y = hensel_lift(&y, &a_unit, p, reduced_beta);
    let q_red = p.pow(reduced_beta);
    let pk = p.pow(k);
    let stride = p.pow(reduced_beta + k);

    // Both lifts of the unit root, each smeared over p^k shifts.
    let mut roots = Vec::new();
    for base in [&y * &pk, (&q_red - &y) * &pk] {
        let mut x = base;
        while x < q {
            roots.push(x.clone());
            x += &stride;
        }
    }
    roots.sort();
    roots.dedup();
    roots
}

/// Tonelli-Shanks: one square root of `a` modulo odd prime `p`, or `None`
/// for a non-residue. `a` must be reduced mod `p` and nonzero callers are
/// expected (0 maps to 0).
fn sqrt_mod_odd_prime(a: &BigUint, p: &BigUint) -> Option<BigUint> {
    if a.is_zero() {
        return Some(BigUint::zero());
    }
    let a_int = BigInt::from_biguint(Sign::Plus, a.clone());
    match jacobi(&a_int, p) {
        -1 => return None,
        0 => unreachable!("unit expected"),
        _ => {}
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);

    // p - 1 = q * 2^s with q odd.
    let p_minus_1 = p - &one;
    let s = p_minus_1.trailing_zeros().unwrap();
    let q = &p_minus_1 >> s;

    if s == 1 {
        // p = 3 (mod 4): the root is a^((p+1)/4).
        let e = (p + &one) >> 2;
        return Some(mod_pow(a, &e, p));
    }

    // Any quadratic non-residue serves as the wobble generator.
    let mut z = two.clone();
    loop {
        let z_int = BigInt::from_biguint(Sign::Plus, z.clone());
        if jacobi(&z_int, p) == -1 {
            break;
        }
        z += 1u32;
    }

    let mut m = s;
    let mut c = mod_pow(&z, &q, p);
    let mut t = mod_pow(a, &q, p);
    let mut r = mod_pow(a, &((&q + &one) >> 1), p);
    while !t.is_one() {
        // Least i with t^(2^i) = 1.
        let mut i = 0u64;
        let mut probe = t.clone();
        while !probe.is_one() {
            probe = &probe * &probe % p;
            i += 1;
        }
        let gap = m - i - 1;
        let mut b = c;
        for _ in 0..gap {
            b = &b * &b % p;
        }
        m = i;
        c = &b * &b % p;
        t = t * &c % p;
        r = r * &b % p;
    }
    Some(r)
}

/// Lifts a root `y` of `x^2 = a (mod p)` to one modulo `p^beta`, linearly
/// one power at a time. `a` must be a unit mod `p`.
fn hensel_lift(y: &BigUint, a: &BigUint, p: &BigUint, beta: u32) -> BigUint {
    let mut y = y.clone();
    let mut pe = p.clone();
    for _ in 1..beta {
        let pe_next = &pe * p;
        // t = (a - y^2) / p^e * inv(2y) (mod p), then y += t * p^e.
        let y2 = &y * &y % &pe_next;
        let diff = (&pe_next + a % &pe_next - y2) % &pe_next;
        debug_assert!((&diff % &pe).is_zero());
        let quot = &diff / &pe;
        let inv2y = mod_inverse(&(BigUint::from(2u32) * &y % p), p);
        let t = quot * inv2y % p;
        y += t * &pe;
        pe = pe_next;
    }
    y
}

/// Inverse of a unit modulo an odd prime via Fermat.
fn mod_inverse(a: &BigUint, p: &BigUint) -> BigUint {
    mod_pow(a, &(p - BigUint::from(2u32)), p)
}
