//! Chinese remainder theorem over pairwise-coprime moduli.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::ArithError;

/// Combines congruences `x = a_i (mod m_i)` into `(x, M)` with
/// `M = prod m_i` and `0 <= x < M`. Moduli must be `>= 1` and pairwise
/// coprime; the error names an offending pair. The empty system yields
/// `(0, 1)`.
pub fn crt(congruences: &[(BigUint, BigUint)]) -> Result<(BigUint, BigUint), ArithError> {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (idx, (a_i, m_i)) in congruences.iter().enumerate() {
        assert!(!m_i.is_zero(), "crt modulus must be >= 1");
        let mi = BigInt::from_biguint(Sign::Plus, m_i.clone());
        let ai = BigInt::from_biguint(Sign::Plus, a_i.clone());
        let g = m.gcd(&mi);
        if !g.is_one() {
            // Locate an original offending pair for the error message.
            for j in 0..idx {
                let mj = &congruences[j].1;
                if !mj.gcd(m_i).is_one() {
                    return Err(ArithError::NonCoprimeModuli {
                        first: mj.clone(),
                        second: m_i.clone(),
                    });
                }
            }
            unreachable!("accumulated gcd > 1 implies some earlier modulus shares a factor");
        }
        // x' = x + m * t with t = (a_i - x) / m (mod m_i).
        let egcd = m.extended_gcd(&mi);
        let inv = egcd.x.mod_floor(&mi);
        let t = ((&ai - &x) * inv).mod_floor(&mi);
        x += &m * t;
        m *= &mi;
        x = x.mod_floor(&m);
    }
    Ok((
        x.to_biguint().expect("mod_floor yields nonnegative"),
        m.to_biguint().expect("product of naturals"),
    ))
}
