//! Shared support for the integration suites: an independent path-semantics
//! CTL evaluator, a brute-force state-space oracle, and seeded random
//! generators for bundles, systems and formulas.

#![allow(dead_code)]

pub mod gen;
pub mod oracle;
