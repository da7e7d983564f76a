//! CRT-built residue classes that avoid certain sums of squares and powers
//! of two, shipped as self-describing certificates.
//!
//! Three certificate kinds are built from the embedded tables:
//!
//! * `thm2` — a class `alpha (mod M)` containing no `p^2 + b^2 + 2^n` with
//!   `p` prime and `b, n >= 0`. Each exponent class `a_s (mod n_s)` of the
//!   covering system forces `p = p_s`; a companion prime `q_s = 7 (mod 8)`
//!   then makes `b^2 = -2^n (mod q_s)` impossible.
//! * `thm3` — a class `alpha' (mod M')` containing no `p^2 + b^2 - 2^n`.
//!   The cover forces `p = p_s` as before; an orbit row `(c_s, r_s)` with
//!   `c_s + 2^n` a non-square modulo `r_s` for every `n` blocks `b^2`.
//! * `thm5` — a class `alpha* (mod M*)` with squared odd modulus containing
//!   no `b_1^2 + b_2^2 + 2^n` for `n` drawn from a set that meets each class
//!   `e_s (mod p_s)` in a declared finite exception list. The cover descends
//!   to `n_s^* = ord_2(p_s)`, squares of `p_s` force `n = e_s (mod p_s)` via
//!   the lifted order `ord_2(p_s^2) = n_s^* p_s`, and one extra prime per
//!   exception kills the finitely many escapes.
//!
//! Verification never trusts the builder: every congruence, primality,
//! order, cover, and orbit claim is rechecked from the certificate alone,
//! walking one full period of the exponent.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    crt, factorize_u64, is_prime_u64, jacobi_u64, lcm_u64, mod_pow, mult_order_u64, primality,
    ArithError,
};
use crate::cover::{verify_cover, CoverSystem, CoverVerdict, ResidueClass};
use crate::jsonutil::{biguint_dec, to_canonical_json};
use crate::report::{CheckLine, Report, RowReport};
use crate::tables::{addcong_table, cover_table, doubled_rows};

/// Exponent periods and orbit scans longer than this are refused rather
/// than hammered through; honest certificates stay far below it.
const SCAN_GUARD: u64 = 10_000_000;

/// Errors from assembling a certificate out of caller-provided data.
#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("input must supply one entry per table row (expected {expected}, got {got})")]
    RowCount { expected: usize, got: usize },
    #[error("row {row}: exception class must lie in [1, p]")]
    ClassRange { row: usize },
    #[error("row {row}: exceptions must be strictly increasing")]
    ExceptionOrder { row: usize },
    #[error("row {row}: exception {h} is not in the row's class e (mod p)")]
    ExceptionClass { row: usize, h: u64 },
    #[error("row {row}: exception {h} lies in row {other}'s class but is not listed there")]
    ExceptionCrossRow { row: usize, h: u64, other: usize },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Row of a `thm2` certificate: exponent class `a (mod n)`, the prime `p`
/// it pins, and the companion prime `q = 7 (mod 8)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumRow {
    pub s: usize,
    pub a: u64,
    pub n: u64,
    #[serde(with = "biguint_dec")]
    pub p: BigUint,
    #[serde(with = "biguint_dec")]
    pub q: BigUint,
}

/// Certificate for a class with no `p^2 + b^2 + 2^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumCertificate {
    #[serde(with = "biguint_dec")]
    pub modulus: BigUint,
    #[serde(with = "biguint_dec")]
    pub residue: BigUint,
    pub rows: Vec<SumRow>,
}

/// Row of a `thm3` certificate: exponent class, pinned prime, and the
/// orbit pair `(c, r)` with `r` given by its prime factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffRow {
    pub s: usize,
    pub a: u64,
    pub n: u64,
    #[serde(with = "biguint_dec")]
    pub p: BigUint,
    pub c: u64,
    pub r_factors: Vec<u64>,
}

/// Certificate for a class with no `p^2 + b^2 - 2^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffCertificate {
    #[serde(with = "biguint_dec")]
    pub modulus: BigUint,
    #[serde(with = "biguint_dec")]
    pub residue: BigUint,
    pub rows: Vec<DiffRow>,
}

/// One declared exception `h` (an exponent) and the prime that blocks it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionRow {
    pub h: u64,
    #[serde(with = "biguint_dec")]
    pub q: BigUint,
}

/// Row of a `thm5` certificate: the descended exponent class
/// `a* (mod n*)` with `n* = ord_2(p)`, the class `e (mod p)` the exponent
/// set is allowed to meet, and the finite exception list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedRow {
    pub s: usize,
    #[serde(with = "biguint_dec")]
    pub a_star: BigUint,
    pub n_star: u64,
    #[serde(with = "biguint_dec")]
    pub p: BigUint,
    #[serde(with = "biguint_dec")]
    pub e: BigUint,
    pub exceptions: Vec<ExceptionRow>,
}

/// Certificate for a squared odd modulus class with no
/// `b_1^2 + b_2^2 + 2^n`, `n` restricted as declared by the rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedCertificate {
    #[serde(with = "biguint_dec")]
    pub modulus: BigUint,
    #[serde(with = "biguint_dec")]
    pub residue: BigUint,
    pub rows: Vec<RestrictedRow>,
}

/// A certificate of any kind, tagged for dispatch and serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    #[serde(rename = "thm2")]
    Sum(SumCertificate),
    #[serde(rename = "thm3")]
    Diff(DiffCertificate),
    #[serde(rename = "thm5")]
    Restricted(RestrictedCertificate),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Sum(_) => "thm2",
            Certificate::Diff(_) => "thm3",
            Certificate::Restricted(_) => "thm5",
        }
    }

    pub fn modulus(&self) -> &BigUint {
        match self {
            Certificate::Sum(c) => &c.modulus,
            Certificate::Diff(c) => &c.modulus,
            Certificate::Restricted(c) => &c.modulus,
        }
    }

    pub fn residue(&self) -> &BigUint {
        match self {
            Certificate::Sum(c) => &c.residue,
            Certificate::Diff(c) => &c.residue,
            Certificate::Restricted(c) => &c.residue,
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Per-row input for the restricted builder: the class `e (mod p)` the
/// exponent set may meet and the finitely many exponents where it does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedInputRow {
    pub e: BigUint,
    pub exceptions: Vec<u64>,
}

/// Input to [`build_thm5`], one entry per embedded table row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedInput {
    pub rows: Vec<RestrictedInputRow>,
}

/// The instance behind the even-modulus corollary: the exponent set is the
/// multiples of the product of all table primes. Every multiple is
/// `0 (mod p_s)`, so with `e_s = 1` each exception list is provably empty
/// and the certificate modulus collapses to the square of the prime
/// product.
pub fn corollary_input() -> RestrictedInput {
    RestrictedInput {
        rows: cover_table()
            .iter()
            .map(|_| RestrictedInputRow {
                e: BigUint::one(),
                exceptions: Vec::new(),
            })
            .collect(),
    }
}

/// The table primes that fit a machine word, for collision checks against
/// candidate companion primes.
fn small_table_primes() -> BTreeSet<u64> {
    cover_table()
        .iter()
        .filter_map(|row| u64::try_from(&row.p).ok())
        .collect()
}

/// Smallest `count` primes `= class (mod step)` excluding `avoid`, in
/// increasing order.
fn pick_primes(count: usize, class: u64, step: u64, avoid: &BTreeSet<u64>) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut cand = class;
    while out.len() < count {
        if cand > 1 && is_prime_u64(cand) && !avoid.contains(&cand) {
            out.push(cand);
        }
        cand += step;
    }
    out
}

/// Builds the `thm2` certificate from the embedded tables: companion
/// primes are the smallest primes `= 7 (mod 8)` coprime to the table
/// prime product, and the residue satisfies `alpha = 2^(a_s) (mod p_s)`
/// and `alpha = p_s^2 (mod q_s)` for every row.
pub fn build_thm2() -> SumCertificate {
    let rows = doubled_rows();
    let qs = pick_primes(rows.len(), 7, 8, &small_table_primes());

    let mut congruences = Vec::with_capacity(2 * rows.len());
    let two = BigUint::from(2u32);
    for (row, &q) in rows.iter().zip(&qs) {
        let qb = BigUint::from(q);
        congruences.push((mod_pow(&two, &BigUint::from(row.a), row.p), row.p.clone()));
        congruences.push(((row.p * row.p) % &qb, qb));
    }
    let (residue, modulus) =
        crt(&congruences).expect("table primes and companions are pairwise coprime");

    SumCertificate {
        modulus,
        residue,
        rows: rows
            .iter()
            .zip(&qs)
            .map(|(row, &q)| SumRow {
                s: row.s,
                a: row.a,
                n: row.n,
                p: row.p.clone(),
                q: BigUint::from(q),
            })
            .collect(),
    }
}

/// Builds the `thm3` certificate: `alpha' = -2^(a_s) (mod p_s)` pairs the
/// covering rows with the orbit rows by table order via
/// `alpha' = c_s + p_s^2 (mod r_s)`.
pub fn build_thm3() -> DiffCertificate {
    let rows = doubled_rows();
    let orbit = addcong_table();
    assert_eq!(rows.len(), orbit.len(), "tables pair row by row");

    let mut congruences = Vec::with_capacity(2 * rows.len());
    let two = BigUint::from(2u32);
    for (row, entry) in rows.iter().zip(orbit) {
        let pow = mod_pow(&two, &BigUint::from(row.a), row.p);
        congruences.push(((row.p - pow) % row.p, row.p.clone()));
        let r = entry.modulus();
        congruences.push(((BigUint::from(entry.c) + row.p * row.p) % &r, r));
    }
    let (residue, modulus) =
        crt(&congruences).expect("table primes and orbit moduli are pairwise coprime");

    DiffCertificate {
        modulus,
        residue,
        rows: rows
            .iter()
            .zip(orbit)
            .map(|(row, entry)| DiffRow {
                s: row.s,
                a: row.a,
                n: row.n,
                p: row.p.clone(),
                c: entry.c,
                r_factors: entry.factors.clone(),
            })
            .collect(),
    }
}

/// Builds a `thm5` certificate for the given exception data. Each row
/// descends the covering class to modulus `n_s^* = ord_2(p_s)` and splices
/// in `e_s` via `a_s^* = a_s (mod n_s^*)`, `a_s^* = e_s (mod p_s)`; each
/// declared exception gets the next unused prime `= 3 (mod 4)` outside the
/// table primes.
pub fn build_thm5(input: &RestrictedInput) -> Result<RestrictedCertificate, ConstructError> {
    let rows = doubled_rows();
    if input.rows.len() != rows.len() {
        return Err(ConstructError::RowCount {
            expected: rows.len(),
            got: input.rows.len(),
        });
    }

    // Exception lists must be ordered, lie in their own row's class, and
    // appear in every other row whose class they also meet.
    for (i, inp) in input.rows.iter().enumerate() {
        let p = rows[i].p;
        if inp.e < BigUint::one() || inp.e > *p {
            return Err(ConstructError::ClassRange { row: i + 1 });
        }
        if !inp.exceptions.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConstructError::ExceptionOrder { row: i + 1 });
        }
        for &h in &inp.exceptions {
            if BigUint::from(h) % p != &inp.e % p {
                return Err(ConstructError::ExceptionClass { row: i + 1, h });
            }
        }
    }
    for (i, inp) in input.rows.iter().enumerate() {
        for &h in &inp.exceptions {
            for (j, other) in input.rows.iter().enumerate() {
                let pj = rows[j].p;
                let in_class = BigUint::from(h) % pj == &other.e % pj;
                if in_class && !other.exceptions.contains(&h) {
                    return Err(ConstructError::ExceptionCrossRow {
                        row: i + 1,
                        h,
                        other: j + 1,
                    });
                }
            }
        }
    }

    let mut avoid = small_table_primes();
    let two = BigUint::from(2u32);
    let mut congruences = Vec::new();
    let mut out_rows = Vec::with_capacity(rows.len());

    for (row, inp) in rows.iter().zip(&input.rows) {
        let n_star = mult_order_u64_of(row.p)?;
        // a* = a (mod n*) and a* = e (mod p); the moduli are coprime
        // because n* divides the doubled modulus, which is prime to p.
        let (a_star, _) = crt(&[
            (BigUint::from(row.a % n_star), BigUint::from(n_star)),
            (&inp.e % row.p, row.p.clone()),
        ])?;

        let p_sq = row.p * row.p;
        congruences.push((mod_pow(&two, &a_star, &p_sq), p_sq));

        let mut exceptions = Vec::with_capacity(inp.exceptions.len());
        for &h in &inp.exceptions {
            let q = pick_primes(1, 3, 4, &avoid)[0];
            avoid.insert(q);
            let qb = BigUint::from(q);
            let q_sq = &qb * &qb;
            congruences.push(((mod_pow(&two, &BigUint::from(h), &q_sq) + &qb) % &q_sq, q_sq));
            exceptions.push(ExceptionRow { h, q: qb });
        }

        out_rows.push(RestrictedRow {
            s: row.s,
            a_star,
            n_star,
            p: row.p.clone(),
            e: inp.e.clone(),
            exceptions,
        });
    }

    let (residue, modulus) = crt(&congruences)?;
    Ok(RestrictedCertificate {
        modulus,
        residue,
        rows: out_rows,
    })
}

/// Order of 2 modulo a table prime. The doubled exponent modulus
/// annihilates 2, so the order divides it and the search is cheap even
/// for the giant rows.
fn mult_order_u64_of(p: &BigUint) -> Result<u64, ConstructError> {
    let row = doubled_rows()
        .into_iter()
        .find(|r| r.p == p)
        .expect("called only with table primes");
    let ord = crate::arith::order_from_multiple(&BigUint::from(2u32), p, &BigUint::from(row.n))?;
    Ok(u64::try_from(&ord).expect("order divides a u64 modulus"))
}

/// Verifies any certificate from its own data alone.
pub fn verify_certificate(cert: &Certificate) -> Report {
    match cert {
        Certificate::Sum(c) => verify_sum(c),
        Certificate::Diff(c) => verify_diff(c),
        Certificate::Restricted(c) => verify_restricted(c),
    }
}

/// Shared first stage: the exponent classes must cover the integers and
/// each pinned prime must be `3 (mod 4)` with `2^n = 1 (mod p)`.
fn check_cover_and_primes<'a>(
    classes: Vec<ResidueClass>,
    primes: impl Iterator<Item = (usize, &'a BigUint, u64)>,
    report: &mut Report,
) -> Option<u64> {
    let three = BigUint::from(3u32);
    let four = BigUint::from(4u32);
    let two = BigUint::from(2u32);

    for (s, p, n) in primes {
        let row = report
            .rows
            .iter_mut()
            .find(|r| r.row == s)
            .expect("row reports are pre-seeded");
        let verdict = primality(p);
        row.checks.push(CheckLine::new(
            "prime-three-mod-four",
            verdict.is_prime() && p % &four == three,
            format!("p = {p} ({})", verdict.label()),
        ));
        let pow = mod_pow(&two, &BigUint::from(n), p);
        row.checks.push(CheckLine::new(
            "exponent-modulus-annihilates",
            pow.is_one(),
            format!("2^{n} mod p = {pow}"),
        ));
    }

    let system = match CoverSystem::new(classes) {
        Ok(sys) => sys,
        Err(e) => {
            report
                .checks
                .push(CheckLine::new("cover", false, format!("{e}")));
            return None;
        }
    };
    let lcm = match system.lcm_of_moduli(SCAN_GUARD) {
        Ok(l) => l,
        Err(e) => {
            report
                .checks
                .push(CheckLine::new("cover", false, format!("{e}")));
            return None;
        }
    };
    match verify_cover(&system) {
        Ok(CoverVerdict::Covered) => {
            report.checks.push(CheckLine::new(
                "cover",
                true,
                format!("{} classes cover one period of {lcm}", system.classes.len()),
            ));
            Some(lcm)
        }
        Ok(CoverVerdict::Witness(w)) => {
            report.checks.push(CheckLine::new(
                "cover",
                false,
                format!("{w} is in no class"),
            ));
            None
        }
        Err(e) => {
            report
                .checks
                .push(CheckLine::new("cover", false, format!("{e}")));
            None
        }
    }
}

/// Walks `n` over one full exponent period and confirms that the first
/// covering row `s` containing `n` satisfies `target_s = 2^n (mod p_s)`,
/// where `target_s` is the residue the certificate needs at row `s`.
fn full_period_alignment(
    classes: &[(u64, u64)],
    primes: &[BigUint],
    targets: &[BigUint],
    period: u64,
) -> CheckLine {
    let mut pows: Vec<BigUint> = primes.iter().map(|_| BigUint::one()).collect();
    for n in 0..period {
        let hit = classes.iter().position(|&(a, m)| n % m == a % m);
        let Some(s) = hit else {
            return CheckLine::new(
                "full-period-alignment",
                false,
                format!("exponent {n} is in no class"),
            );
        };
        if pows[s] != targets[s] {
            return CheckLine::new(
                "full-period-alignment",
                false,
                format!("row {}: 2^{n} mod p does not match the residue", s + 1),
            );
        }
        for (pow, p) in pows.iter_mut().zip(primes) {
            *pow = &*pow * 2u32 % p;
        }
    }
    CheckLine::new(
        "full-period-alignment",
        true,
        format!("all {period} exponents pinned to their row"),
    )
}

/// Pairwise distinctness of every modulus prime appearing in the
/// certificate.
fn distinct_primes_check(all: &mut Vec<BigUint>) -> CheckLine {
    let count = all.len();
    all.sort();
    let distinct = all.windows(2).all(|w| w[0] != w[1]);
    CheckLine::new(
        "distinct-primes",
        distinct,
        format!("{count} primes across all rows"),
    )
}

fn verify_sum(cert: &SumCertificate) -> Report {
    let mut report = Report::new("thm2");
    report.rows = cert
        .rows
        .iter()
        .map(|r| RowReport {
            row: r.s,
            checks: Vec::new(),
        })
        .collect();

    let period = check_cover_and_primes(
        cert.rows.iter().map(|r| reduced_class(r.a, r.n)).collect(),
        cert.rows.iter().map(|r| (r.s, &r.p, r.n)),
        &mut report,
    );

    let seven = BigUint::from(7u32);
    let eight = BigUint::from(8u32);
    let two = BigUint::from(2u32);
    for (row, rep) in cert.rows.iter().zip(&mut report.rows) {
        let verdict = primality(&row.q);
        rep.checks.push(CheckLine::new(
            "companion-prime",
            verdict.is_prime() && &row.q % &eight == seven,
            format!("q = {} ({})", row.q, verdict.label()),
        ));

        rep.checks.push(CheckLine::new(
            "residue-power-congruence",
            &cert.residue % &row.p == mod_pow(&two, &BigUint::from(row.a), &row.p),
            format!("residue = 2^{} (mod p)", row.a),
        ));

        rep.checks.push(CheckLine::new(
            "residue-square-congruence",
            &cert.residue % &row.q == (&row.p * &row.p) % &row.q,
            "residue = p^2 (mod q)".to_string(),
        ));

        // b^2 = -2^n (mod q) must be unsolvable for every n; the pattern
        // of -2^n mod q repeats with period ord_2(q).
        rep.checks.push(negated_power_check(&row.q));
    }

    let mut all: Vec<BigUint> = cert
        .rows
        .iter()
        .flat_map(|r| [r.p.clone(), r.q.clone()])
        .collect();
    report.checks.push(distinct_primes_check(&mut all));

    let product: BigUint = cert
        .rows
        .iter()
        .fold(BigUint::one(), |acc, r| acc * &r.p * &r.q);
    report.checks.push(CheckLine::new(
        "modulus-product",
        product == cert.modulus && cert.residue < cert.modulus,
        format!("modulus has {} digits", cert.modulus.to_string().len()),
    ));

    if let Some(period) = period {
        let classes: Vec<(u64, u64)> = cert.rows.iter().map(|r| (r.a, r.n)).collect();
        let primes: Vec<BigUint> = cert.rows.iter().map(|r| r.p.clone()).collect();
        let targets: Vec<BigUint> = cert.rows.iter().map(|r| &cert.residue % &r.p).collect();
        report
            .checks
            .push(full_period_alignment(&classes, &primes, &targets, period));
    }

    report.finalize()
}

/// Checks that `-2^n` is a quadratic non-residue modulo `q` for every
/// `n >= 0`, by scanning one period `ord_2(q)` of the power.
fn negated_power_check(q: &BigUint) -> CheckLine {
    let name = "negated-power-non-residue";
    let Ok(q64) = u64::try_from(q) else {
        return CheckLine::new(name, false, "companion prime too large to scan".to_string());
    };
    let Ok(ord) = mult_order_u64(2, q64) else {
        return CheckLine::new(name, false, "order of 2 unavailable".to_string());
    };
    if ord > SCAN_GUARD {
        return CheckLine::new(name, false, format!("orbit of length {ord} exceeds guard"));
    }
    let mut pow = 1u64;
    for n in 0..ord {
        if jacobi_u64(q64 - pow, q64) != -1 {
            return CheckLine::new(name, false, format!("-2^{n} is a square mod {q64}"));
        }
        pow = pow * 2 % q64;
    }
    CheckLine::new(name, true, format!("all {ord} values non-square"))
}

fn verify_diff(cert: &DiffCertificate) -> Report {
    let mut report = Report::new("thm3");
    report.rows = cert
        .rows
        .iter()
        .map(|r| RowReport {
            row: r.s,
            checks: Vec::new(),
        })
        .collect();

    let period = check_cover_and_primes(
        cert.rows.iter().map(|r| reduced_class(r.a, r.n)).collect(),
        cert.rows.iter().map(|r| (r.s, &r.p, r.n)),
        &mut report,
    );

    let two = BigUint::from(2u32);
    for (row, rep) in cert.rows.iter().zip(&mut report.rows) {
        let r_modulus = row
            .r_factors
            .iter()
            .fold(BigUint::one(), |acc, &f| acc * BigUint::from(f));

        let factors_ok = row.r_factors.iter().all(|&f| f % 2 == 1 && is_prime_u64(f))
            && row.r_factors.windows(2).all(|w| w[0] < w[1]);
        rep.checks.push(CheckLine::new(
            "orbit-modulus-factors",
            factors_ok && !row.r_factors.is_empty(),
            format!("r = {r_modulus} with {} prime factors", row.r_factors.len()),
        ));

        let pow = mod_pow(&two, &BigUint::from(row.a), &row.p);
        rep.checks.push(CheckLine::new(
            "residue-negated-power-congruence",
            (&cert.residue + &pow) % &row.p == BigUint::ZERO,
            format!("residue = -2^{} (mod p)", row.a),
        ));

        rep.checks.push(CheckLine::new(
            "residue-shift-congruence",
            &cert.residue % &r_modulus == (BigUint::from(row.c) + &row.p * &row.p) % &r_modulus,
            "residue = c + p^2 (mod r)".to_string(),
        ));

        rep.checks.push(orbit_non_residue_check(row.c, &row.r_factors));
    }

    // Every prime in sight must be distinct: the pinned primes and all
    // orbit factors.
    let mut all: Vec<BigUint> = cert.rows.iter().map(|r| r.p.clone()).collect();
    all.extend(
        cert.rows
            .iter()
            .flat_map(|r| r.r_factors.iter().map(|&f| BigUint::from(f))),
    );
    report.checks.push(distinct_primes_check(&mut all));

    let product: BigUint = cert.rows.iter().fold(BigUint::one(), |acc, r| {
        r.r_factors
            .iter()
            .fold(acc * &r.p, |a, &f| a * BigUint::from(f))
    });
    report.checks.push(CheckLine::new(
        "modulus-product",
        product == cert.modulus && cert.residue < cert.modulus,
        format!("modulus has {} digits", cert.modulus.to_string().len()),
    ));

    if let Some(period) = period {
        let classes: Vec<(u64, u64)> = cert.rows.iter().map(|r| (r.a, r.n)).collect();
        let primes: Vec<BigUint> = cert.rows.iter().map(|r| r.p.clone()).collect();
        // residue = -2^n (mod p_s): the walked power must match the
        // negated residue.
        let targets: Vec<BigUint> = cert
            .rows
            .iter()
            .map(|r| (&r.p - &cert.residue % &r.p) % &r.p)
            .collect();
        report
            .checks
            .push(full_period_alignment(&classes, &primes, &targets, period));
    }

    report.finalize()
}

/// Checks that `c + 2^n` is a non-square modulo the squarefree product of
/// `factors` for one full orbit of the power.
fn orbit_non_residue_check(c: u64, factors: &[u64]) -> CheckLine {
    let name = "orbit-non-residue";
    let mut t = 1u64;
    for &f in factors {
        let Ok(ord) = mult_order_u64(2, f) else {
            return CheckLine::new(name, false, format!("order of 2 mod {f} unavailable"));
        };
        match lcm_u64(t, ord) {
            Some(l) if l <= SCAN_GUARD => t = l,
            _ => return CheckLine::new(name, false, "orbit length exceeds guard".to_string()),
        }
    }
    let mut pows: Vec<u64> = factors.iter().map(|_| 1u64).collect();
    for n in 0..t {
        let non_square = factors
            .iter()
            .zip(&pows)
            .any(|(&f, &pow)| jacobi_u64((c % f + pow) % f, f) == -1);
        if !non_square {
            return CheckLine::new(name, false, format!("c + 2^{n} is a square mod r"));
        }
        for (pow, &f) in pows.iter_mut().zip(factors) {
            *pow = *pow * 2 % f;
        }
    }
    CheckLine::new(name, true, format!("all {t} orbit values non-square"))
}

fn verify_restricted(cert: &RestrictedCertificate) -> Report {
    let mut report = Report::new("thm5");
    report.rows = cert
        .rows
        .iter()
        .map(|r| RowReport {
            row: r.s,
            checks: Vec::new(),
        })
        .collect();

    let period = check_cover_and_primes(
        cert.rows
            .iter()
            .map(|r| reduced_class_big(&r.a_star, r.n_star))
            .collect(),
        cert.rows.iter().map(|r| (r.s, &r.p, r.n_star)),
        &mut report,
    );

    let two = BigUint::from(2u32);
    let three = BigUint::from(3u32);
    let four = BigUint::from(4u32);
    for (row, rep) in cert.rows.iter().zip(&mut report.rows) {
        // n* must be the exact order of 2: it annihilates (checked by the
        // shared stage) and no maximal proper divisor does.
        let minimal = row.n_star >= 1
            && factorize_u64(row.n_star)
                .iter()
                .all(|&(ell, _)| !mod_pow(&two, &BigUint::from(row.n_star / ell), &row.p).is_one());
        rep.checks.push(CheckLine::new(
            "exponent-modulus-minimal",
            minimal,
            format!("ord_2(p) = {}", row.n_star),
        ));

        rep.checks.push(CheckLine::new(
            "exponent-modulus-coprime",
            BigUint::from(row.n_star).gcd(&row.p).is_one(),
            "gcd(n*, p) = 1".to_string(),
        ));

        // The order of 2 lifts from p to p^2 by exactly the factor p;
        // this is what turns `2^n = 2^(a*) (mod p^2)` into a congruence
        // for n modulo n* p, and hence modulo p.
        let p_sq = &row.p * &row.p;
        let at_order = mod_pow(&two, &BigUint::from(row.n_star), &p_sq);
        rep.checks.push(CheckLine::new(
            "order-does-not-stall",
            !at_order.is_one(),
            format!("2^{} mod p^2 != 1", row.n_star),
        ));
        let lifted = mod_pow(&two, &(BigUint::from(row.n_star) * &row.p), &p_sq);
        rep.checks.push(CheckLine::new(
            "order-lifts-by-p",
            lifted.is_one(),
            format!("2^({} p) mod p^2 = 1", row.n_star),
        ));

        let e_ok = row.e >= BigUint::one() && row.e <= row.p;
        let a_star_in_class = &row.a_star % &row.p == &row.e % &row.p;
        rep.checks.push(CheckLine::new(
            "exception-class",
            e_ok && a_star_in_class,
            format!("a* = e (mod p), e = {}", row.e),
        ));

        rep.checks.push(CheckLine::new(
            "residue-power-congruence",
            &cert.residue % &p_sq == mod_pow(&two, &row.a_star, &p_sq),
            "residue = 2^(a*) (mod p^2)".to_string(),
        ));

        let ordered = row.exceptions.windows(2).all(|w| w[0].h < w[1].h);
        rep.checks.push(CheckLine::new(
            "exceptions-ordered",
            ordered,
            format!("{} exceptions", row.exceptions.len()),
        ));

        for exc in &row.exceptions {
            let verdict = primality(&exc.q);
            let q_sq = &exc.q * &exc.q;
            let target = (mod_pow(&two, &BigUint::from(exc.h), &q_sq) + &exc.q) % &q_sq;
            let in_class = BigUint::from(exc.h) % &row.p == &row.e % &row.p;
            rep.checks.push(CheckLine::new(
                "exception-blocked",
                verdict.is_prime()
                    && &exc.q % &four == three
                    && &cert.residue % &q_sq == target
                    && in_class,
                format!("h = {}, q = {} ({})", exc.h, exc.q, verdict.label()),
            ));
        }
    }

    let mut all: Vec<BigUint> = cert.rows.iter().map(|r| r.p.clone()).collect();
    all.extend(
        cert.rows
            .iter()
            .flat_map(|r| r.exceptions.iter().map(|e| e.q.clone())),
    );
    report.checks.push(distinct_primes_check(&mut all));

    let base: BigUint = cert.rows.iter().fold(BigUint::one(), |acc, r| {
        r.exceptions.iter().fold(acc * &r.p, |a, e| a * &e.q)
    });
    report.checks.push(CheckLine::new(
        "modulus-product",
        &base * &base == cert.modulus && cert.residue < cert.modulus,
        format!("modulus is the square of a {}-digit odd number", base.to_string().len()),
    ));

    if let Some(period) = period {
        let classes: Vec<(u64, u64)> = cert
            .rows
            .iter()
            .map(|r| {
                let c = reduced_class_big(&r.a_star, r.n_star);
                (c.a, c.n)
            })
            .collect();
        let primes: Vec<BigUint> = cert.rows.iter().map(|r| r.p.clone()).collect();
        let targets: Vec<BigUint> = cert.rows.iter().map(|r| &cert.residue % &r.p).collect();
        report
            .checks
            .push(full_period_alignment(&classes, &primes, &targets, period));
    }

    report.finalize()
}

/// Reduces `a (mod n)` defensively; a zero modulus is passed through for
/// [`CoverSystem::new`] to reject.
fn reduced_class(a: u64, n: u64) -> ResidueClass {
    ResidueClass {
        a: if n == 0 { a } else { a % n },
        n,
    }
}

fn reduced_class_big(a: &BigUint, n: u64) -> ResidueClass {
    if n == 0 {
        return ResidueClass { a: 0, n: 0 };
    }
    let a = u64::try_from(&(a % BigUint::from(n))).expect("reduced below a u64 modulus");
    ResidueClass { a, n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::m1;

    #[test]
    fn test_companion_prime_selection() {
        // Ascending primes = 7 (mod 8), skipping those already used by the
        // covering table (7, 23, 31, 71, 127, 151 are table primes).
        let qs = pick_primes(5, 7, 8, &small_table_primes());
        assert_eq!(qs, vec![47, 79, 103, 167, 191]);

        let qs = pick_primes(50, 7, 8, &small_table_primes());
        assert_eq!(qs.len(), 50);
        assert!(qs.windows(2).all(|w| w[0] < w[1]));
        let m = m1();
        for &q in &qs {
            assert!(is_prime_u64(q));
            assert_eq!(q % 8, 7);
            assert!((&m % BigUint::from(q)) != BigUint::ZERO, "q = {q} divides M1");
        }
    }

    #[test]
    fn test_build_thm2_congruences() {
        let cert = build_thm2();
        assert_eq!(cert.rows.len(), 50);
        // Row 1: a_1 = 3 (mod 6), p_1 = 7: residue = 2^3 = 1 (mod 7).
        assert_eq!(&cert.residue % BigUint::from(7u32), BigUint::one());
        // Row 50: a_50 = 0: residue = 2^0 = 1 (mod 3).
        assert_eq!(&cert.residue % BigUint::from(3u32), BigUint::one());
        // First companion q = 47 carries p_1^2 = 49 = 2 (mod 47).
        assert_eq!(cert.rows[0].q, BigUint::from(47u32));
        assert_eq!(&cert.residue % BigUint::from(47u32), BigUint::from(2u32));
        // The modulus is the product of all 100 primes.
        let expected: BigUint = cert
            .rows
            .iter()
            .fold(BigUint::one(), |acc, r| acc * &r.p * &r.q);
        assert_eq!(cert.modulus, expected);
    }

    #[test]
    fn test_build_thm3_congruences() {
        let cert = build_thm3();
        assert_eq!(cert.rows.len(), 50);
        // Row 1: residue = c_1 + p_1^2 = 505 + 49 = 554 (mod 47 * 178481).
        assert_eq!(
            &cert.residue % BigUint::from(8388607u64),
            BigUint::from(554u32)
        );
        // Row 1: residue = -2^3 (mod 7), i.e. 7 - 1 = 6.
        assert_eq!(&cert.residue % BigUint::from(7u32), BigUint::from(6u32));
    }

    #[test]
    fn test_verify_thm2_passes() {
        let report = verify_certificate(&Certificate::Sum(build_thm2()));
        assert!(report.passed, "failures: {:?}", report.failures());
        let alignment = report
            .checks
            .iter()
            .find(|c| c.name == "full-period-alignment")
            .unwrap();
        assert!(alignment.detail.contains("62370"));
    }

    #[test]
    fn test_verify_thm3_passes() {
        let report = verify_certificate(&Certificate::Diff(build_thm3()));
        assert!(report.passed, "failures: {:?}", report.failures());
    }

    #[test]
    fn test_verify_thm5_corollary_passes() {
        let cert = build_thm5(&corollary_input()).unwrap();
        // With e_s = 1 and no exceptions the modulus is the square of the
        // prime product.
        let m = m1();
        assert_eq!(cert.modulus, &m * &m);
        assert!(cert.rows.iter().all(|r| r.exceptions.is_empty()));
        // Row 1: a* = 3 (mod 3), = 1 (mod 7) gives 15 (mod 21).
        assert_eq!(cert.rows[0].n_star, 3);
        assert_eq!(cert.rows[0].a_star, BigUint::from(15u32));

        let report = verify_certificate(&Certificate::Restricted(cert));
        assert!(report.passed, "failures: {:?}", report.failures());
    }

    #[test]
    fn test_build_thm5_with_exception() {
        // 15 = 1 (mod 7) and meets no other row's class e = 1, so listing
        // it only on row 1 is consistent.
        let mut input = corollary_input();
        input.rows[0].exceptions = vec![15];
        let cert = build_thm5(&input).unwrap();
        assert_eq!(cert.rows[0].exceptions.len(), 1);
        // First unused prime = 3 (mod 4): 3, 7, 11, 19, 23, 31, 43 are all
        // table primes; 47 is free.
        assert_eq!(cert.rows[0].exceptions[0].q, BigUint::from(47u32));
        let q_sq = BigUint::from(47u32 * 47);
        assert_eq!(
            &cert.residue % &q_sq,
            (mod_pow(&BigUint::from(2u32), &BigUint::from(15u32), &q_sq) + BigUint::from(47u32))
                % &q_sq
        );

        let report = verify_certificate(&Certificate::Restricted(cert));
        assert!(report.passed, "failures: {:?}", report.failures());
    }

    #[test]
    fn test_build_thm5_rejects_inconsistent_exceptions() {
        // 8 = 1 (mod 7) so it belongs on row 1, but 8 = 2 (mod 3) != 1, so
        // listing it nowhere else is fine; 22 = 1 (mod 7) and 22 = 1
        // (mod 3)? 22 = 1 (mod 3), yes: it must then be listed on the
        // final row too.
        let mut input = corollary_input();
        input.rows[0].exceptions = vec![22];
        let err = build_thm5(&input).unwrap_err();
        assert!(matches!(err, ConstructError::ExceptionCrossRow { h: 22, .. }));

        let mut input = corollary_input();
        input.rows[0].exceptions = vec![9]; // 9 = 2 (mod 7), not in class 1
        let err = build_thm5(&input).unwrap_err();
        assert!(matches!(err, ConstructError::ExceptionClass { h: 9, .. }));
    }

    #[test]
    fn test_verify_detects_wieferich_stall() {
        // 1093 is one of the two known primes whose order of 2 does not
        // grow from p to p^2; a row built on it must fail the stall check.
        assert_eq!(mult_order_u64(2, 1093).unwrap(), 364);
        let p = BigUint::from(1093u32);
        let p_sq = &p * &p;
        assert!(mod_pow(&BigUint::from(2u32), &BigUint::from(364u32), &p_sq).is_one());

        let (a_star, _) = crt(&[
            (BigUint::from(3u32), BigUint::from(364u32)),
            (BigUint::one(), p.clone()),
        ])
        .unwrap();
        let residue = mod_pow(&BigUint::from(2u32), &a_star, &p_sq);
        let cert = RestrictedCertificate {
            modulus: p_sq,
            residue,
            rows: vec![RestrictedRow {
                s: 1,
                a_star,
                n_star: 364,
                p,
                e: BigUint::one(),
                exceptions: Vec::new(),
            }],
        };
        let report = verify_certificate(&Certificate::Restricted(cert));
        assert!(!report.passed);
        let stall = report.rows[0]
            .checks
            .iter()
            .find(|c| c.name == "order-does-not-stall")
            .unwrap();
        assert!(!stall.pass);
    }

    #[test]
    fn test_verify_detects_mutations() {
        // A shifted residue breaks the row congruences.
        let mut cert = build_thm2();
        cert.residue += 1u32;
        let report = verify_certificate(&Certificate::Sum(cert));
        assert!(!report.passed);
        assert!(report
            .failures()
            .iter()
            .any(|f| f.contains("residue-power-congruence")));

        // A corrupted exponent class punches a hole in the cover.
        let mut cert = build_thm3();
        cert.rows[0].a += 2;
        let report = verify_certificate(&Certificate::Diff(cert));
        assert!(!report.passed);
        assert!(report
            .failures()
            .iter()
            .any(|f| f.contains("cover") || f.contains("full-period-alignment")));

        // A dropped row likewise.
        let mut cert = build_thm5(&corollary_input()).unwrap();
        cert.rows.pop();
        let report = verify_certificate(&Certificate::Restricted(cert));
        assert!(!report.passed);

        // A swapped companion prime breaks the square congruence.
        let mut cert = build_thm2();
        let q0 = cert.rows[0].q.clone();
        cert.rows[0].q = cert.rows[1].q.clone();
        cert.rows[1].q = q0;
        let report = verify_certificate(&Certificate::Sum(cert));
        assert!(!report.passed);
        assert!(report
            .failures()
            .iter()
            .any(|f| f.contains("residue-square-congruence")));
    }

    #[test]
    fn test_certificate_json_roundtrip() {
        for cert in [
            Certificate::Sum(build_thm2()),
            Certificate::Diff(build_thm3()),
            Certificate::Restricted(build_thm5(&corollary_input()).unwrap()),
        ] {
            let json = cert.to_json();
            assert!(json.contains(&format!("\"kind\": \"{}\"", cert.kind())));
            let back = Certificate::from_json(&json).unwrap();
            assert_eq!(back, cert);
        }
    }

    #[test]
    fn test_restricted_period_divides_doubled_period() {
        let cert = build_thm5(&corollary_input()).unwrap();
        let mut period = 1u64;
        for row in &cert.rows {
            period = lcm_u64(period, row.n_star).unwrap();
        }
        assert_eq!(62370 % period, 0);
    }
}
