//! Fixed families shared by the benchmarks.

use stdsets::dsl::evaluate;
use stdsets::{Interval, SetFamily};

/// Named families, written in the family language.
pub const FAMILIES: &[(&str, &str)] = &[
    ("gamma16", "g16()"),
    ("reciprocal_sums", "fam(0; 1/n[1] + 1/m[1])"),
    ("mixed_signs", "fam(1/3; 2/a[1, 2, 1] - 3/a[1, 2, 1]*b[1] + 1/c[1])"),
    ("diag3", "diag(3)"),
    ("hyper", "hyper({0, 1, 4})"),
];

/// Evaluates a fixture.
pub fn family(text: &str) -> SetFamily {
    evaluate(text).expect("fixture parses").family().expect("fixture is a family").clone()
}

/// Window used by the enumeration benchmarks.
pub fn window() -> Interval {
    Interval::new(stdsets::int(-2), stdsets::int(2)).expect("window")
}
