//! The two embedded data tables and their revalidation.
//!
//! Table one: 49 rows `(a', n', p)` of residue classes with odd moduli
//! whose classes cover the integers, each carrying a companion prime
//! `p = 3 (mod 4)` dividing `2^n' - 1` or `2^n' + 1`, plus a synthetic
//! 50th row `(0, 2, 3)` for the class of even integers that appears when
//! the system is doubled.
//!
//! Table two: 50 rows `(c, r)` with `r` odd and squarefree (given in
//! factored form) such that `c + 2^n` is a quadratic non-residue modulo
//! `r` for every `n >= 0`; periodicity reduces this to one orbit
//! `0 <= n < ord_2(r)`.
//!
//! Every arithmetic claim encoded by the tables is rechecked here from
//! scratch; nothing is trusted from transcription.

use std::sync::LazyLock;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use crate::arith::{is_prime_u64, jacobi_u64, lcm_u64, mod_pow, mult_order_u64, primality};
use crate::cover::{double_cover, verify_cover, CoverSystem, ResidueClass};
use crate::report::{CheckLine, Report, RowReport};

/// Row of the covering table: class `a (mod n)` with companion prime `p`.
/// Rows 1..=49 store the undoubled (primed) class; row 50 stores the
/// final class `0 (mod 2)` directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverTriple {
    pub a: u64,
    pub n: u64,
    pub p: BigUint,
}

/// Row of the non-residue orbit table: constant `c` and the prime
/// factorization of the odd squarefree modulus `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddcongEntry {
    pub c: u64,
    pub factors: Vec<u64>,
}

impl AddcongEntry {
    /// The modulus `r` as a product of its prime factors.
    pub fn modulus(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, &p| acc * BigUint::from(p))
    }
}

/// (a', n', p) rows 1..=49 plus the synthetic row 50 = (0, 2, 3).
/// p fits in u128 for every row (the largest has 31 digits).
const COVER_RAW: [(u64, u64, u128); 50] = [
    (0, 3, 7),
    (1, 15, 11),
    (4, 15, 31),
    (7, 15, 151),
    (10, 15, 331),
    (13, 105, 43),
    (28, 105, 71),
    (43, 105, 127),
    (58, 105, 211),
    (73, 105, 29191),
    (88, 105, 86171),
    (103, 315, 870031),
    (208, 315, 983431),
    (313, 315, 1765891),
    (2, 9, 19),
    (5, 27, 87211),
    (14, 81, 71119),
    (41, 81, 97685839),
    (68, 81, 163),
    (23, 135, 271),
    (50, 135, 631),
    (77, 135, 811),
    (104, 135, 23311),
    (131, 135, 348031),
    (8, 99, 23),
    (17, 99, 67),
    (26, 99, 199),
    (35, 99, 683),
    (44, 99, 5347),
    (53, 99, 599479),
    (62, 99, 33057806959),
    (71, 99, 242099935645987),
    (80, 495, 991),
    (179, 495, 2971),
    (278, 495, 3191),
    (377, 495, 48912491),
    (476, 495, 2252127523412251),
    (89, 693, 463),
    (188, 693, 5419),
    (287, 693, 14323),
    (386, 693, 289511839),
    (485, 693, 35532364099),
    (584, 693, 2868251407519807),
    (683, 693, 581283643249112959),
    (98, 297, 694387),
    (197, 297, 14973866897175265228063698945547),
    (296, 891, 1783),
    (593, 891, 1409033313878253109224688819),
    (890, 891, 12430037668834128259094186647),
    (0, 2, 3),
];

/// (c, factors of r) rows 1..=50.
const ADDCONG_RAW: [(u64, &[u64]); 50] = [
    (505, &[47, 178481]),
    (5519, &[601, 1801]),
    (366, &[2731, 8191]),
    (1303, &[73, 262657]),
    (5149, &[233, 2089]),
    (5938, &[43691, 131071]),
    (182725, &[223, 616318177]),
    (12153, &[174763, 524287]),
    (148671, &[13367, 164511353]),
    (490297, &[431, 2099863]),
    (115115, &[2351, 13264529]),
    (2370639, &[6361, 20394401]),
    (37, &[5, 17, 257]),
    (5615, &[13, 37, 109]),
    (146, &[89, 397, 2113]),
    (637, &[97, 241, 673]),
    (6393, &[103, 2143, 11119]),
    (13847, &[53, 157, 1613]),
    (1799, &[29, 113, 15790321]),
    (335, &[59, 1103, 3033169]),
    (451, &[337, 92737, 649657]),
    (1479, &[641, 65537, 6700417]),
    (40655, &[137, 953, 26317]),
    (13353, &[228479, 48544121, 212885833]),
    (23775, &[439, 2298041, 9361973132609]),
    (10334, &[229, 457, 525313]),
    (65971, &[2687, 202029703, 1113491139767]),
    (5893, &[41, 61681, 4278255361]),
    (1344867, &[911, 112901153, 23140471537]),
    (560826, &[277, 1013, 30269]),
    (406789, &[283, 4513, 165768537521]),
    (415099, &[191, 420778751, 30327152671]),
    (61153, &[101, 4051, 8101]),
    (1261375, &[307, 2857, 6529]),
    (1324442, &[107, 69431, 28059810762433]),
    (1663519, &[321679, 26295457, 319020217]),
    (2094571, &[3391, 23279, 65993]),
    (1032375, &[571, 32377, 1212847]),
    (6321391, &[14951, 4036961, 2646507710984041]),
    (19031871, &[937, 6553, 7830118297]),
    (7918330, &[2833, 37171, 179951]),
    (2286429, &[61, 1321, 4562284561]),
    (2227201, &[5581, 8681, 49477]),
    (207773684, &[131, 409891, 7623851]),
    (2526613, &[281, 122921, 7416361]),
    (5596695, &[433, 577, 38737]),
    (25234915, &[593, 1777, 25781083]),
    (7950774, &[251, 100801, 10567201]),
    (10130779, &[313, 21841, 121369]),
    (14272093, &[1429, 3361, 14449]),
];

static COVER_TABLE: LazyLock<Vec<CoverTriple>> = LazyLock::new(|| {
    COVER_RAW
        .iter()
        .map(|&(a, n, p)| CoverTriple {
            a,
            n,
            p: BigUint::from(p),
        })
        .collect()
});

static ADDCONG_TABLE: LazyLock<Vec<AddcongEntry>> = LazyLock::new(|| {
    ADDCONG_RAW
        .iter()
        .map(|&(c, factors)| AddcongEntry {
            c,
            factors: factors.to_vec(),
        })
        .collect()
});

/// All 50 covering-table rows.
pub fn cover_table() -> &'static [CoverTriple] {
    &COVER_TABLE
}

/// All 50 non-residue orbit rows.
pub fn addcong_table() -> &'static [AddcongEntry] {
    &ADDCONG_TABLE
}

/// The undoubled 49-class system (rows 1..=49).
pub fn primed_cover_system() -> CoverSystem {
    CoverSystem::new(
        COVER_RAW[..49]
            .iter()
            .map(|&(a, n, _)| ResidueClass { a, n })
            .collect(),
    )
    .expect("embedded table rows are reduced")
}

/// The doubled 50-class system: odd lifts `a_s (mod 2 n_s')` for rows
/// 1..=49 plus `0 (mod 2)` as row 50.
pub fn doubled_cover_system() -> CoverSystem {
    double_cover(&primed_cover_system()).expect("embedded moduli are odd")
}

/// Doubled class of row `s` (1-based) paired with its companion prime.
#[derive(Debug, Clone)]
pub struct DoubledRow {
    pub s: usize,
    pub a: u64,
    pub n: u64,
    pub p: &'static BigUint,
}

/// The 50 doubled rows `(s, a_s, n_s, p_s)` in table order.
pub fn doubled_rows() -> Vec<DoubledRow> {
    let doubled = doubled_cover_system();
    doubled
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| DoubledRow {
            s: i + 1,
            a: c.a,
            n: c.n,
            p: &COVER_TABLE[i].p,
        })
        .collect()
}

/// Product of all 50 companion primes.
pub fn m1() -> BigUint {
    COVER_TABLE
        .iter()
        .fold(BigUint::one(), |acc, row| acc * &row.p)
}

/// Revalidates the embedded covering table.
pub fn validate_cover_table() -> Report {
    validate_cover_rows(cover_table())
}

/// Revalidates covering-table rows (callers may pass mutated copies to
/// confirm the checks detect corruption). Expects the final row to be the
/// synthetic `(0, 2, 3)` class-of-evens row.
pub fn validate_cover_rows(rows: &[CoverTriple]) -> Report {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let four = BigUint::from(4u32);
    let three = BigUint::from(3u32);

    let row_reports: Vec<RowReport> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let s = i + 1;
            let mut checks = Vec::new();

            let verdict = primality(&row.p);
            checks.push(CheckLine::new(
                "prime",
                verdict.is_prime(),
                format!("p = {} ({})", row.p, verdict.label()),
            ));

            let residue = &row.p % &four;
            checks.push(CheckLine::new(
                "three-mod-four",
                residue == three,
                format!("p mod 4 = {residue}"),
            ));

            checks.push(CheckLine::new(
                "reduced-residue",
                row.a < row.n && row.n >= 1,
                format!("a = {}, n = {}", row.a, row.n),
            ));

            // 2^n = +-1 (mod p); record which branch the row uses. The
            // synthetic last row stores the doubled modulus directly, so
            // its exponent is n itself, as for the primed rows.
            let pow = mod_pow(&two, &BigUint::from(row.n), &row.p);
            let branch = if pow == one {
                Some("divides 2^n - 1")
            } else if pow == &row.p - &one {
                Some("divides 2^n + 1")
            } else {
                None
            };
            checks.push(CheckLine::new(
                "power-branch",
                branch.is_some(),
                match branch {
                    Some(b) => format!("row {s}: {b}"),
                    None => format!("row {s}: 2^{} mod p = {}", row.n, pow),
                },
            ));

            RowReport { row: s, checks }
        })
        .collect();

    let mut table_checks = Vec::new();

    // All companion primes distinct.
    let mut sorted: Vec<&BigUint> = rows.iter().map(|r| &r.p).collect();
    sorted.sort();
    let distinct = sorted.windows(2).all(|w| w[0] != w[1]);
    table_checks.push(CheckLine::new(
        "distinct-primes",
        distinct,
        format!("{} rows", rows.len()),
    ));

    // The undoubled classes cover the integers, and so does the doubled
    // system. Only meaningful for the full-shape table.
    if rows.len() == 50 {
        let primed = CoverSystem::new(
            rows[..49]
                .iter()
                .map(|r| ResidueClass { a: r.a, n: r.n })
                .collect(),
        );
        match primed {
            Ok(sys) => {
                let lcm = sys.lcm_of_moduli(u64::MAX).unwrap_or(0);
                match verify_cover(&sys) {
                    Ok(v) => table_checks.push(CheckLine::new(
                        "primed-cover",
                        v.is_covered(),
                        format!("lcm = {lcm}, verdict = {v:?}"),
                    )),
                    Err(e) => table_checks.push(CheckLine::new(
                        "primed-cover",
                        false,
                        format!("{e}"),
                    )),
                }
                match double_cover(&sys).and_then(|d| {
                    let l = d.lcm_of_moduli(u64::MAX)?;
                    verify_cover(&d).map(|v| (l, v))
                }) {
                    Ok((l, v)) => table_checks.push(CheckLine::new(
                        "doubled-cover",
                        v.is_covered(),
                        format!("lcm = {l}, verdict = {v:?}"),
                    )),
                    Err(e) => table_checks.push(CheckLine::new(
                        "doubled-cover",
                        false,
                        format!("{e}"),
                    )),
                }
            }
            Err(e) => {
                table_checks.push(CheckLine::new("primed-cover", false, format!("{e}")));
            }
        }
    }

    Report {
        label: "cover".to_string(),
        rows: row_reports,
        checks: table_checks,
        passed: false,
    }
    .finalize()
}

/// Revalidates the embedded non-residue orbit table against the embedded
/// covering table's prime product.
pub fn validate_addcong_table() -> Report {
    validate_addcong_rows(addcong_table(), &m1())
}

/// Orbit length of the doubling map modulo the product of the given prime
/// factors: lcm of the per-factor orders of 2.
pub fn ord2_of_factored(factors: &[u64]) -> Option<u64> {
    let mut t = 1u64;
    for &p in factors {
        let ord = mult_order_u64(2, p).ok()?;
        t = lcm_u64(t, ord)?;
    }
    Some(t)
}

/// Revalidates orbit rows: primality, distinct odd factors, coprimality
/// to `m1` and across rows, and the full non-residue orbit
/// `c + 2^n` for `0 <= n < ord_2(r)`.
pub fn validate_addcong_rows(rows: &[AddcongEntry], m1: &BigUint) -> Report {
    let row_reports: Vec<RowReport> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let s = i + 1;
            let mut checks = Vec::new();

            let all_prime = row.factors.iter().all(|&p| is_prime_u64(p));
            checks.push(CheckLine::new(
                "factors-prime",
                all_prime,
                format!("{:?} (deterministic)", row.factors),
            ));

            let increasing = row.factors.windows(2).all(|w| w[0] < w[1]);
            let odd = row.factors.iter().all(|&p| p % 2 == 1);
            checks.push(CheckLine::new(
                "factors-distinct-odd",
                increasing && odd,
                format!("{} factors", row.factors.len()),
            ));

            let coprime_m1 = row
                .factors
                .iter()
                .all(|&p| (m1 % BigUint::from(p)) != BigUint::ZERO);
            checks.push(CheckLine::new(
                "coprime-to-prime-product",
                coprime_m1,
                "gcd(r, M1) = 1".to_string(),
            ));

            match ord2_of_factored(&row.factors) {
                Some(t) if all_prime => {
                    let (ok, first_fail) = non_residue_orbit(row.c, &row.factors, t);
                    checks.push(CheckLine::new(
                        "non-residue-orbit",
                        ok,
                        match first_fail {
                            None => format!("ord_2(r) = {t}, all {t} orbit values non-square"),
                            Some(n) => format!("ord_2(r) = {t}, c + 2^{n} is a square mod r"),
                        },
                    ));
                }
                _ => {
                    checks.push(CheckLine::new(
                        "non-residue-orbit",
                        false,
                        "order of 2 unavailable".to_string(),
                    ));
                }
            }

            RowReport { row: s, checks }
        })
        .collect();

    // Factors must be distinct across the whole table (pairwise coprime
    // moduli, since all factors are prime).
    let mut all: Vec<u64> = rows.iter().flat_map(|r| r.factors.clone()).collect();
    all.sort_unstable();
    let distinct = all.windows(2).all(|w| w[0] != w[1]);
    let table_checks = vec![CheckLine::new(
        "pairwise-coprime-moduli",
        distinct,
        format!("{} prime factors total", all.len()),
    )];

    Report {
        label: "addcong".to_string(),
        rows: row_reports,
        checks: table_checks,
        passed: false,
    }
    .finalize()
}

/// Checks that `c + 2^n` is a non-square modulo the squarefree product of
/// `factors` for every `0 <= n < t`: some factor must see a strict
/// non-residue. Returns the first failing `n`, if any.
fn non_residue_orbit(c: u64, factors: &[u64], t: u64) -> (bool, Option<u64>) {
    // Per-factor running powers 2^n mod p.
    let mut pow: Vec<u64> = factors.iter().map(|_| 1u64).collect();
    for n in 0..t {
        let mut non_square = false;
        for (i, &p) in factors.iter().enumerate() {
            let v = (c % p + pow[i]) % p;
            if jacobi_u64(v, p) == -1 {
                non_square = true;
                break;
            }
        }
        if !non_square {
            return (false, Some(n));
        }
        for (i, &p) in factors.iter().enumerate() {
            pow[i] = pow[i] * 2 % p;
        }
    }
    (true, None)
}

/// Canonical text form of the covering table, for checksum pinning.
pub fn cover_table_canonical() -> String {
    let mut out = String::new();
    for (i, &(a, n, p)) in COVER_RAW.iter().enumerate() {
        out.push_str(&format!("{}|{}|{}|{}\n", i + 1, a, n, p));
    }
    out
}

/// Canonical text form of the orbit table, for checksum pinning.
pub fn addcong_table_canonical() -> String {
    let mut out = String::new();
    for (i, &(c, factors)) in ADDCONG_RAW.iter().enumerate() {
        let fs: Vec<String> = factors.iter().map(|p| p.to_string()).collect();
        out.push_str(&format!("{}|{}|{}\n", i + 1, c, fs.join(",")));
    }
    out
}

/// FNV-1a 64-bit hash, used to pin the embedded tables against silent
/// transcription drift.
pub fn fnv1a64(data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
