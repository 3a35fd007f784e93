//! Non-defectivity checks for secant varieties of the Segre-Veronese
//! variety `P^m x P^n` embedded by bidegree (1,2) forms.
//!
//! * [`configs`] describes configurations of coordinate subvarieties and
//!   constrained double points, with their virtual dimension.
//! * [`families`] holds quasipolynomial families of configurations, the
//!   inductant construction and the built-in catalog.
//! * [`checker`] runs the randomized rank computation over GF(p), using the
//!   elimination in [`ffrank`].
//! * [`certs`] writes, parses and rechecks certificates of those runs.
//! * [`suite`] runs the base-case lists in batch.

pub mod certs;
pub mod checker;
pub mod configs;
pub mod families;
pub mod ffrank;
pub mod suite;

pub use certs::{reverify, Certificate};
pub use checker::{check_configuration, DefectVerdict, Outcome};
pub use configs::{virtual_dim, Abundancy, ConfigShape, SubsetIndex};
pub use families::{catalog_lookup, family_eval, FamilySpec, Suite};
pub use ffrank::{rank_mod_p, DenseMatrix, PrimeField};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/configurations.md")]
    mod configurations {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/inductants.md")]
    mod inductants {}
    #[doc = include_str!("../../../book/src/checking.md")]
    mod checking {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/suites.md")]
    mod suites {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
