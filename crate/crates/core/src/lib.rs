//! Exact symbolic families of rational numbers, their derived sets and
//! standardization certificates, with a brute-force oracle and a small
//! declarative language.

pub mod cases;
pub mod derived;
pub mod dsl;
pub mod geomsets;
pub mod laws;
pub mod oracle;
pub mod random;
mod scan;
pub mod serial;
pub mod setfam;
pub mod setops;

pub use derived::{
    certify, closure, derived_set, is_acc, is_dcc, standardized_near, CertVerdict, Certificate, DerivedError, Near,
    Witness,
};
pub use setfam::{
    int, member, normalize, parse_rational, rat, Assignment, Atom, FamilyError, Hull, Interval, Monomial, Parameter,
    PolyAtom, Rational, SetFamily, Verdict,
};
