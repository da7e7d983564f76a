//! Multiplicative orders. The order of `a` modulo `m` is found by
//! factoring a known multiple of it (the Carmichael exponent of `m`, or a
//! caller-supplied multiple) and stripping prime factors; iteration is the
//! fallback of last resort, capped so it cannot run away.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use super::{factorize, mod_pow, ArithError, FactorBudget, Factorization};

/// Budget for an order computation: the factorization effort for the
/// group exponent, and the iteration cap used when factoring fails.
#[derive(Debug, Clone, Copy)]
pub struct OrderBudget {
    pub factor_budget: FactorBudget,
    pub iteration_cap: u64,
}

impl Default for OrderBudget {
    fn default() -> Self {
        OrderBudget {
            factor_budget: FactorBudget::default(),
            iteration_cap: 10_000_000,
        }
    }
}

/// Multiplicative order of `a` modulo `m` (odd or even `m >= 2`), with the
/// default budget. Errors when `gcd(a, m) > 1` or the search exceeds caps.
pub fn mult_order(a: &BigUint, m: &BigUint) -> Result<BigUint, ArithError> {
    mult_order_with(a, m, &OrderBudget::default())
}

/// [`mult_order`] under an explicit budget.
pub fn mult_order_with(
    a: &BigUint,
    m: &BigUint,
    budget: &OrderBudget,
) -> Result<BigUint, ArithError> {
    assert!(m >= &BigUint::from(2u32), "order needs a modulus >= 2");
    let a = a % m;
    if !a.gcd(m).is_one() {
        return Err(ArithError::NotCoprime {
            a,
            modulus: m.clone(),
        });
    }
    if a.is_one() {
        return Ok(BigUint::one());
    }

    // Carmichael exponent of m, if m and each p - 1 factor completely.
    if let Some(exponent) = carmichael_exponent(m, &budget.factor_budget) {
        let exp_factors = factorize(&exponent, &budget.factor_budget);
        if exp_factors.is_complete() {
            return Ok(strip_order(&a, m, &exponent, &exp_factors));
        }
    }
    iterative_order(&a, m, budget.iteration_cap)
}

/// Order of `a` mod `m` given any multiple of it. `multiple` must satisfy
/// `a^multiple = 1 (mod m)` (checked) and factor completely under the
/// default budget. This avoids factoring `m - 1` when the caller already
/// knows a small exponent, as with table-driven `2^n = 1 (mod p)` facts.
pub fn order_from_multiple(
    a: &BigUint,
    m: &BigUint,
    multiple: &BigUint,
) -> Result<BigUint, ArithError> {
    assert!(
        mod_pow(a, multiple, m).is_one(),
        "claimed exponent multiple does not annihilate the base"
    );
    let f = factorize(multiple, &FactorBudget::default());
    match &f.cofactor {
        None => Ok(strip_order(&(a % m), m, multiple, &f)),
        Some(c) => Err(ArithError::FactorizationIncomplete {
            cofactor: c.clone(),
        }),
    }
}

/// Machine-word order of `a` mod odd prime-ish `m` via the default budget.
pub fn mult_order_u64(a: u64, m: u64) -> Result<u64, ArithError> {
    let ord = mult_order(&BigUint::from(a), &BigUint::from(m))?;
    Ok(u64::try_from(&ord).expect("order of a u64 modulus fits u64"))
}

/// lambda(m) = lcm of lambda(p^e) over the prime powers of m, or `None`
/// when some needed factorization is incomplete.
fn carmichael_exponent(m: &BigUint, budget: &FactorBudget) -> Option<BigUint> {
    let fm = factorize(m, budget);
    if !fm.is_complete() {
        return None;
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let mut lambda = BigUint::one();
    for (p, e) in &fm.factors {
        let le = if *p == two {
            // lambda(2) = 1, lambda(4) = 2, lambda(2^e) = 2^(e-2) for e >= 3.
            match e {
                1 => one.clone(),
                2 => two.clone(),
                _ => BigUint::from(2u32).pow(e - 2),
            }
        } else {
            (p - &one) * p.pow(e - 1)
        };
        lambda = lambda.lcm(&le);
    }
    // The lcm is only usable if it factors completely, which the caller
    // checks; returning it unconditionally here keeps one factorization.
    Some(lambda)
}

/// Given `a^t = 1 (mod m)` and the complete factorization of `t`, strip
/// primes until the exponent is minimal.
fn strip_order(a: &BigUint, m: &BigUint, t: &BigUint, t_factors: &Factorization) -> BigUint {
    let mut ord = t.clone();
    for (p, e) in &t_factors.factors {
        for _ in 0..*e {
            let reduced = &ord / p;
            if mod_pow(a, &reduced, m).is_one() {
                ord = reduced;
            } else {
                break;
            }
        }
    }
    ord
}

fn iterative_order(a: &BigUint, m: &BigUint, cap: u64) -> Result<BigUint, ArithError> {
    let mut acc = a.clone();
    let mut k = 1u64;
    while !acc.is_one() {
        if k >= cap {
            return Err(ArithError::OrderSearchExceeded { cap });
        }
        acc = acc * a % m;
        k += 1;
    }
    Ok(BigUint::from(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u128) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn test_mult_order_examples() {
        assert_eq!(mult_order(&n(2), &n(7)).unwrap(), n(3));
        // 8388607 = 47 * 178481 divides 2^23 - 1; both factors have order 23.
        assert_eq!(mult_order(&n(2), &n(8388607)).unwrap(), n(23));
        assert_eq!(mult_order(&n(2), &n(49)).unwrap(), n(21));
        assert_eq!(mult_order(&n(2), &n(3)).unwrap(), n(2));
        assert_eq!(mult_order(&n(1), &n(17)).unwrap(), n(1));
    }

    #[test]
    fn test_mult_order_not_coprime() {
        assert!(matches!(
            mult_order(&n(6), &n(9)),
            Err(ArithError::NotCoprime { .. })
        ));
    }

    #[test]
    fn test_mult_order_brute_force_agreement() {
        // Brute-force oracle across every modulus up to 300 and a sparse
        // sample of larger ones up to 10^4.
        let mut moduli: Vec<u64> = (2..=300).collect();
        moduli.extend([611, 1024, 2048, 3125, 4097, 6561, 9999, 10000]);
        for m in moduli {
            for a in 2..m.min(60) {
                if super::super::gcd_u64(a, m) != 1 {
                    continue;
                }
                let mut acc = a % m;
                let mut expected = 1u64;
                while acc != 1 {
                    acc = acc * a % m;
                    expected += 1;
                }
                assert_eq!(
                    mult_order_u64(a, m).unwrap(),
                    expected,
                    "order mismatch for a={a} m={m}"
                );
            }
        }
    }

    #[test]
    fn test_order_divides_carmichael_property() {
        for m in [15u64, 21, 35, 45, 77, 91, 99, 105] {
            for a in 2..m {
                if super::super::gcd_u64(a, m) != 1 {
                    continue;
                }
                let ord = mult_order_u64(a, m).unwrap();
                assert_eq!(super::super::mod_pow_u64(a, ord, m), 1);
            }
        }
    }

    #[test]
    fn test_order_from_multiple() {
        // 2^23 = 1 mod 47, and 23 is prime, so the stripped order is 23.
        assert_eq!(order_from_multiple(&n(2), &n(47), &n(23)).unwrap(), n(23));
        // 2^594 = 1 mod p for the 31-digit table prime with modulus 594.
        let p: BigUint = "14973866897175265228063698945547".parse().unwrap();
        let ord = order_from_multiple(&n(2), &p, &n(594)).unwrap();
        assert_eq!(&n(594) % &ord, n(0)); // the order divides 594
        assert!(mod_pow(&n(2), &ord, &p).is_one());
    }

    #[test]
    #[should_panic(expected = "does not annihilate")]
    fn test_order_from_multiple_rejects_non_multiple() {
        let _ = order_from_multiple(&n(2), &n(47), &n(22));
    }

    #[test]
    fn test_big_prime_orders_from_table_moduli() {
        // Doubled moduli from the covering table annihilate 2 modulo the
        // companion primes; the stripped orders must divide them.
        let cases: [(&str, u64); 3] = [
            ("581283643249112959", 1386),
            ("1409033313878253109224688819", 1782),
            ("12430037668834128259094186647", 1782),
        ];
        for (p_str, n_s) in cases {
            let p: BigUint = p_str.parse().unwrap();
            let ord = order_from_multiple(&n(2), &p, &n(n_s as u128)).unwrap();
            assert_eq!(&n(n_s as u128) % &ord, n(0));
            assert!(mod_pow(&n(2), &ord, &p).is_one());
        }
    }
}
