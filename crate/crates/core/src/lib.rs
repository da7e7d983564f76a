//! Verification and experimentation library for covering systems of the
//! integers, CRT-built forbidden residue classes, quadratic-form singular
//! series, and binary-digit density sieves.
//!
//! The modules are layered bottom-up:
//!
//! * [`arith`] — exact integer plumbing: modular powers, multiplicative
//!   orders, Jacobi symbols, CRT, primality, factorization.
//! * [`cover`] — finite systems of residue classes and exhaustive
//!   verification that they cover every integer.
//! * [`tables`] — the two embedded data tables (a 49-row covering system
//!   with companion primes, and 50 quadratic-non-residue orbit rows) plus
//!   row-by-row revalidation of every arithmetic claim they encode.
//! * [`construct`] — builders and verifiers for the CRT certificates that
//!   assemble the tables into explicit forbidden residue classes.
//! * [`singular`] — Gauss sums, truncated singular series, exact local
//!   factors, the archimedean integral, and lattice-point counts.
//! * [`density`] — membership sieves, representation moments, the
//!   two-squares constant, and order-weighted harmonic sums.
//! * [`search`] — orbit scans that hunt for blocking constants `c` such
//!   that `c + 2^n` is a non-square modulo a fixed odd number for all `n`.
//! * [`checks`] — a registry of named end-to-end verification checks used
//!   by the CLI `bundle` command and the acceptance suite.

pub mod arith;
pub mod construct;
pub mod cover;
pub mod density;
pub mod jsonutil;
pub mod report;
pub mod singular;
pub mod tables;
