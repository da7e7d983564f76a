//! Finite systems of residue classes `a (mod n)` and exhaustive
//! verification that they cover every integer. Covering is periodic with
//! period `L = lcm` of the moduli, so scanning `[0, L)` decides it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::gcd_u64;

/// One residue class `a (mod n)` with `0 <= a < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueClass {
    pub a: u64,
    pub n: u64,
}

/// An ordered list of residue classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSystem {
    pub classes: Vec<ResidueClass>,
}

/// Outcome of an exhaustive covering check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverVerdict {
    Covered,
    /// Least nonnegative integer missed by every class.
    Witness(u64),
}

impl CoverVerdict {
    pub fn is_covered(&self) -> bool {
        matches!(self, CoverVerdict::Covered)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("cover system has no classes")]
    Empty,
    #[error("residue {a} is not reduced modulo {n}")]
    UnreducedResidue { a: u64, n: u64 },
    #[error("modulus must be >= 1, found {n}")]
    ZeroModulus { n: u64 },
    #[error("lcm of moduli exceeds the {limit} scan guard")]
    LcmTooLarge { limit: u64 },
    #[error("modulus {n} is even where an odd one is required")]
    EvenModulus { n: u64 },
}

impl CoverSystem {
    /// Validates shape: nonempty, every modulus >= 1, residues reduced.
    pub fn new(classes: Vec<ResidueClass>) -> Result<Self, CoverError> {
        if classes.is_empty() {
            return Err(CoverError::Empty);
        }
        for c in &classes {
            if c.n == 0 {
                return Err(CoverError::ZeroModulus { n: c.n });
            }
            if c.a >= c.n {
                return Err(CoverError::UnreducedResidue { a: c.a, n: c.n });
            }
        }
        Ok(CoverSystem { classes })
    }

    /// lcm of all moduli, guarded against exceeding `limit`.
    pub fn lcm_of_moduli(&self, limit: u64) -> Result<u64, CoverError> {
        let mut l: u64 = 1;
        for c in &self.classes {
            let g = gcd_u64(l, c.n);
            match (l / g).checked_mul(c.n) {
                Some(next) if next <= limit => l = next,
                _ => return Err(CoverError::LcmTooLarge { limit }),
            }
        }
        Ok(l)
    }
}

/// Scan guard: covering checks walk one full period, so the lcm of the
/// moduli must stay below this bound (a 10^9-bit map is 125 MB).
pub const VERIFY_LCM_GUARD: u64 = 1_000_000_000;

/// Tighter guard for per-residue multiplicity counts, which allocate a
/// u32 per residue instead of a bit.
pub const MULTIPLICITY_LCM_GUARD: u64 = 100_000_000;

/// Exhaustively decides whether the classes cover all integers, by packed
/// bitmap over one full period `[0, L)`.
pub fn verify_cover(cs: &CoverSystem) -> Result<CoverVerdict, CoverError> {
    let l = cs.lcm_of_moduli(VERIFY_LCM_GUARD)?;
    let words = (l as usize).div_ceil(64);
    let mut hit = vec![0u64; words];
    for c in &cs.classes {
        let mut i = c.a;
        while i < l {
            hit[(i >> 6) as usize] |= 1u64 << (i & 63);
            i += c.n;
        }
    }
    for (w, &word) in hit.iter().enumerate() {
        let mask = if w == words - 1 && l % 64 != 0 {
            (1u64 << (l % 64)) - 1
        } else {
            u64::MAX
        };
        let missing = !word & mask;
        if missing != 0 {
            let witness = (w as u64) * 64 + missing.trailing_zeros() as u64;
            return Ok(CoverVerdict::Witness(witness));
        }
    }
    Ok(CoverVerdict::Covered)
}

/// Number of classes containing each residue in `[0, L)`. The system
/// covers the integers iff the minimum count is >= 1.
pub fn covering_multiplicity(cs: &CoverSystem) -> Result<Vec<u32>, CoverError> {
    let l = cs.lcm_of_moduli(MULTIPLICITY_LCM_GUARD)?;
    let mut counts = vec![0u32; l as usize];
    for c in &cs.classes {
        let mut i = c.a;
        while i < l {
            counts[i as usize] += 1;
            i += c.n;
        }
    }
    Ok(counts)
}

/// Doubles a system of classes with odd moduli: each `a' (mod n')` becomes
/// `a (mod 2n')` where `a` is the least nonnegative odd integer congruent
/// to `a'` mod `n'`, and the class `0 (mod 2)` is appended to absorb the
/// even integers.
pub fn double_cover(primed: &CoverSystem) -> Result<CoverSystem, CoverError> {
    let mut classes = Vec::with_capacity(primed.classes.len() + 1);
    for c in &primed.classes {
        if c.n % 2 == 0 {
            return Err(CoverError::EvenModulus { n: c.n });
        }
        let a = if c.a % 2 == 1 { c.a } else { c.a + c.n };
        classes.push(ResidueClass { a, n: 2 * c.n });
    }
    classes.push(ResidueClass { a: 0, n: 2 });
    CoverSystem::new(classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(pairs: &[(u64, u64)]) -> CoverSystem {
        CoverSystem::new(
            pairs
                .iter()
                .map(|&(a, n)| ResidueClass { a, n })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn test_verify_cover_classic() {
        // 0(2), 0(3), 1(4), 5(6), 7(12) is the textbook minimal cover.
        let sys = cs(&[(0, 2), (0, 3), (1, 4), (5, 6), (7, 12)]);
        assert_eq!(sys.lcm_of_moduli(u64::MAX).unwrap(), 12);
        assert_eq!(verify_cover(&sys).unwrap(), CoverVerdict::Covered);
    }

    #[test]
    fn test_verify_cover_witness_is_least() {
        let sys = cs(&[(0, 2), (1, 4)]);
        assert_eq!(verify_cover(&sys).unwrap(), CoverVerdict::Witness(3));
        let sys = cs(&[(1, 2), (0, 4)]);
        assert_eq!(verify_cover(&sys).unwrap(), CoverVerdict::Witness(2));
    }

    #[test]
    fn test_multiplicity_matches_direct_count() {
        let sys = cs(&[(0, 2), (0, 3), (1, 4), (5, 6), (7, 12)]);
        let counts = covering_multiplicity(&sys).unwrap();
        assert_eq!(counts.len(), 12);
        for r in 0..12u64 {
            let direct = sys
                .classes
                .iter()
                .filter(|c| r % c.n == c.a)
                .count() as u32;
            assert_eq!(counts[r as usize], direct);
        }
        assert!(counts.iter().all(|&c| c >= 1));
    }

    #[test]
    fn test_multiplicity_min_iff_covered() {
        // Deterministic small random systems.
        let mut state = 0xdead_beef_1234_5678u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..200 {
            let k = 2 + (next() % 6) as usize;
            let mut classes = Vec::new();
            for _ in 0..k {
                let n = 1 + next() % 12;
                let a = next() % n;
                classes.push(ResidueClass { a, n });
            }
            let sys = CoverSystem::new(classes).unwrap();
            let covered = verify_cover(&sys).unwrap().is_covered();
            let min = *covering_multiplicity(&sys).unwrap().iter().min().unwrap();
            assert_eq!(covered, min >= 1);
        }
    }

    #[test]
    fn test_translation_invariance() {
        // Covering is invariant under shifting every class by the same t.
        let base = cs(&[(0, 2), (0, 3), (1, 4), (5, 6), (7, 12)]);
        for t in 1..25u64 {
            let shifted = CoverSystem::new(
                base.classes
                    .iter()
                    .map(|c| ResidueClass {
                        a: (c.a + t) % c.n,
                        n: c.n,
                    })
                    .collect(),
            )
            .unwrap();
            assert!(verify_cover(&shifted).unwrap().is_covered(), "t={t}");
        }
    }

    #[test]
    fn test_double_cover_examples() {
        // 0 (mod 3) lifts to 3 (mod 6); 1 (mod 15) stays 1 (mod 30).
        let doubled = double_cover(&cs(&[(0, 3), (1, 15), (4, 15)])).unwrap();
        assert_eq!(
            doubled.classes,
            vec![
                ResidueClass { a: 3, n: 6 },
                ResidueClass { a: 1, n: 30 },
                ResidueClass { a: 19, n: 30 },
                ResidueClass { a: 0, n: 2 },
            ]
        );
        // Every doubled residue is odd; the appended class handles evens.
        for c in &doubled.classes[..doubled.classes.len() - 1] {
            assert_eq!(c.a % 2, 1);
        }
    }

    #[test]
    fn test_double_cover_rejects_even_moduli() {
        let sys = cs(&[(0, 4)]);
        assert_eq!(
            double_cover(&sys).unwrap_err(),
            CoverError::EvenModulus { n: 4 }
        );
    }

    #[test]
    fn test_lcm_guard() {
        let sys = cs(&[(0, 999_999_937), (0, 911)]); // lcm far above the guard
        assert!(matches!(
            verify_cover(&sys),
            Err(CoverError::LcmTooLarge { .. })
        ));
    }

    #[test]
    fn test_shape_validation() {
        assert_eq!(CoverSystem::new(vec![]).unwrap_err(), CoverError::Empty);
        assert_eq!(
            CoverSystem::new(vec![ResidueClass { a: 3, n: 3 }]).unwrap_err(),
            CoverError::UnreducedResidue { a: 3, n: 3 }
        );
        assert_eq!(
            CoverSystem::new(vec![ResidueClass { a: 0, n: 0 }]).unwrap_err(),
            CoverError::ZeroModulus { n: 0 }
        );
    }

    #[test]
    fn test_json_roundtrip() {
        let sys = cs(&[(0, 3), (1, 2)]);
        let s = serde_json::to_string(&sys).unwrap();
        assert_eq!(s, r#"{"classes":[{"a":0,"n":3},{"a":1,"n":2}]}"#);
        let back: CoverSystem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, sys);
    }
}
