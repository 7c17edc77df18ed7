//! Gluing tables shipped with the crate.

use crate::io::parse_table;
use crate::triangulation::Triangulation;

pub const FIGURE_EIGHT: &str = include_str!("../../../fixtures/fig8.tri");
pub const GIESEKING: &str = include_str!("../../../fixtures/gieseking.tri");
pub const TWO_CUSP: &str = include_str!("../../../fixtures/two_cusp.tri");
pub const FOLD: &str = include_str!("../../../fixtures/fold.tri");
pub const SPHERE: &str = include_str!("../../../fixtures/s3.tri");
pub const DEGREE_ONE: &str = include_str!("../../../fixtures/degree_one.tri");
pub const M367: &str = include_str!("../../../fixtures/m367.json");
pub const K4_REP: &str = include_str!("../../../fixtures/k4_rep.json");

pub fn figure_eight() -> Triangulation {
    parse_table(FIGURE_EIGHT).expect("figure-eight fixture")
}

pub fn gieseking() -> Triangulation {
    parse_table(GIESEKING).expect("gieseking fixture")
}

pub fn two_cusp() -> Triangulation {
    parse_table(TWO_CUSP).expect("two-cusp fixture")
}

pub fn fold_ready() -> Triangulation {
    parse_table(FOLD).expect("fold fixture")
}

pub fn sphere() -> Triangulation {
    parse_table(SPHERE).expect("sphere fixture")
}

pub fn degree_one() -> Triangulation {
    parse_table(DEGREE_ONE).expect("degree-one fixture")
}
