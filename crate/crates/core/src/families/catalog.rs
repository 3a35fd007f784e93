//! The built-in families, the inductant edges between them, and the base
//! cases that anchor each induction.

use std::sync::OnceLock;

use super::format::parse_families;
use super::inductant::{InductantStep, Relabeling};
use super::{FamilyError, FamilySpec};

/// Family definitions in the text format of [`super::format`].
pub const CATALOG_SOURCE: &str = include_str!("../../catalog/catalog.fam");

fn catalog() -> &'static [FamilySpec] {
    static CATALOG: OnceLock<Vec<FamilySpec>> = OnceLock::new();
    CATALOG.get_or_init(|| parse_families(CATALOG_SOURCE).expect("embedded catalog parses"))
}

/// Looks a family up by name (`A0`, `B1`, `C2hat`, ...).
pub fn catalog_lookup(name: &str) -> Result<FamilySpec, FamilyError> {
    catalog()
        .iter()
        .find(|f| f.name == name)
        .cloned()
        .ok_or_else(|| FamilyError::UnknownFamily(name.to_string()))
}

pub fn catalog_names() -> Vec<&'static str> {
    catalog().iter().map(|f| f.name.as_str()).collect()
}

/// `child` is the `step`-inductant of `parent`, once the constructed
/// subvarieties are renamed by `relabel`.
#[derive(Debug, Clone)]
pub struct InductantEdge {
    pub child: &'static str,
    pub parent: &'static str,
    pub step: InductantStep,
    pub relabel: Relabeling,
}

impl InductantEdge {
    fn new(child: &'static str, parent: &'static str, step: InductantStep, k_child: usize) -> Self {
        InductantEdge {
            child,
            parent,
            step,
            relabel: Relabeling::identity(k_child),
        }
    }

    fn relabeled(mut self, images: Vec<usize>) -> Self {
        self.relabel = Relabeling::from_images(images);
        self
    }
}

/// Edges of the strategy for nice `(m, n)`.
pub fn nice_edges() -> Vec<InductantEdge> {
    use InductantStep as S;
    vec![
        InductantEdge::new("B0", "A0", S::q_step(), 1),
        InductantEdge::new("C0", "B0", S::ell_step(), 2),
        InductantEdge::new("D0", "C0", S::ell_step(), 3),
        InductantEdge::new("E0", "D0", S::ell_step(), 4),
        InductantEdge::new("F0", "E0", S::ell_step(), 5),
        InductantEdge::new("G0", "F0", S::ell_step(), 6),
        InductantEdge::new("B1", "B0", S::n_minus(2), 2),
        InductantEdge::new("B2", "B1", S::n_minus(1), 3),
        InductantEdge::new("C1", "C0", S::n_minus(2), 3),
        InductantEdge::new("C1", "B1", S::ell_step(), 3).relabeled(vec![1, 3, 2]),
        InductantEdge::new("D1", "D0", S::n_minus(2), 4),
        InductantEdge::new("D1", "C1", S::ell_step(), 4).relabeled(vec![1, 2, 4, 3]),
        InductantEdge::new("E1", "E0", S::n_minus(2), 5),
        InductantEdge::new("E1", "D1", S::ell_step(), 5).relabeled(vec![1, 2, 3, 5, 4]),
    ]
}

/// Edges of the strategy for ugly `(m, n)`.
pub fn ugly_edges() -> Vec<InductantEdge> {
    use InductantStep as S;
    vec![
        InductantEdge::new("A1hat", "A0", S::half_step(), 1),
        InductantEdge::new("A2hat", "A1hat", S::n_minus(4), 2),
        InductantEdge::new("A3hat", "A2hat", S::n_minus(4), 3),
        InductantEdge::new("B1hat", "A1hat", S::m2_n6(), 2),
        InductantEdge::new("B2hat", "B1hat", S::n_minus(4), 3),
        InductantEdge::new("B2hat", "A2hat", S::m2_n6(), 3).relabeled(vec![1, 3, 2]),
        InductantEdge::new("B3hat", "B2hat", S::n_minus(4), 4),
        InductantEdge::new("B3hat", "A3hat", S::m2_n6(), 4).relabeled(vec![1, 3, 4, 2]),
        InductantEdge::new("C1hat", "B1hat", S::m2_n6(), 3),
        InductantEdge::new("C2hat", "C1hat", S::n_minus(4), 4),
        InductantEdge::new("C2hat", "B2hat", S::m2_n6(), 4).relabeled(vec![1, 2, 4, 3]),
        InductantEdge::new("D1hat", "C1hat", S::m2_n6(), 4),
    ]
}

/// Inductants whose ideal is empty and whose points are all erased, closing
/// off the inductions: `(parent, step)`.
pub fn trivial_inductants() -> Vec<(&'static str, InductantStep)> {
    use InductantStep as S;
    vec![
        ("G0", S::n_minus(1)),
        ("D1hat", S::n_minus(4)),
        ("A3hat", S::n_minus(4)),
        ("B3hat", S::n_minus(4)),
        ("C1", S::n_minus(1)),
        ("D1", S::n_minus(1)),
        ("E1", S::n_minus(1)),
        ("F0", S::n_minus(1)),
    ]
}

/// Which base-case list to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Nice,
    Ugly,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nice" => Ok(Suite::Nice),
            "ugly" => Ok(Suite::Ugly),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite {other:?}; expected nice, ugly or all"
            )),
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Suite::Nice => "nice",
            Suite::Ugly => "ugly",
            Suite::All => "all",
        })
    }
}

const NICE_BASE_CASES: &[(&str, i64, i64)] = &[
    ("A0", 3, 8),
    ("A0", 3, 9),
    ("A0", 4, 26),
    ("B0", 2, 4),
    ("B0", 3, 12),
    ("B0", 3, 13),
    ("B1", 2, 4),
    ("B1", 3, 14),
    ("B2", 2, 5),
    ("C0", 4, 30),
    ("C0", 5, 50),
    ("C0", 5, 51),
    ("C1", 4, 30),
    ("C1", 5, 52),
    ("D0", 6, 82),
    ("D0", 7, 111),
    ("D0", 7, 112),
    ("D1", 6, 80),
    ("D1", 7, 112),
    ("E0", 8, 152),
    ("E0", 9, 196),
    ("E0", 9, 197),
    ("E1", 8, 154),
    ("F0", 10, 250),
    ("F0", 11, 306),
    ("G0", 12, 372),
];

const UGLY_BASE_CASES: &[(&str, i64, i64)] = &[
    ("A1hat", 4, 9),
    ("A1hat", 4, 11),
    ("A2hat", 2, 7),
    ("A2hat", 2, 9),
    ("A3hat", 2, 11),
    ("A3hat", 2, 13),
    ("B1hat", 4, 9),
    ("B1hat", 4, 11),
    ("B2hat", 4, 13),
    ("B2hat", 4, 15),
    ("B3hat", 4, 17),
    ("B3hat", 4, 19),
    ("C1hat", 6, 15),
    ("C1hat", 6, 17),
    ("C2hat", 6, 19),
    ("C2hat", 6, 21),
    ("D1hat", 8, 21),
    ("D1hat", 8, 23),
];

/// The `(family, m, n)` base cases of a suite.
pub fn base_cases(suite: Suite) -> Vec<(&'static str, i64, i64)> {
    match suite {
        Suite::Nice => NICE_BASE_CASES.to_vec(),
        Suite::Ugly => UGLY_BASE_CASES.to_vec(),
        Suite::All => NICE_BASE_CASES
            .iter()
            .chain(UGLY_BASE_CASES)
            .copied()
            .collect(),
    }
}
