//! Operator functionals on finite-dimensional semi-Hilbert spaces.
//!
//! A positive semidefinite matrix `A` induces the semi-inner product
//! `<x, y>_A = <Ax, y>` on `C^n`. This crate computes the A-adjoint, the
//! A-seminorm, the A-numerical radius and the A-Crawford number of
//! operators with certified enclosures, and runs a catalog of inequalities
//! between them over reproducible random campaigns.

pub mod campaign;
pub mod catalog;
pub mod enclosure;
pub mod error;
pub mod functionals;
pub mod instance;
pub mod linalg;
pub mod range;
pub mod sampler;
pub mod space;

pub use catalog::{
    catalog, definition, parse_check_ids, run_all, run_check, run_selected, tightness_report, CheckDefinition,
    CheckOptions, CheckResult, Direction, OperandBundle, Outcome, Relation, TightnessSummary, Verdict,
};
pub use enclosure::{Enclosure, Method};
pub use error::{Error, Result};
pub use functionals::{a_numerical_radius, crawford, mc_crawford_upper, mc_radius_lower, op_seminorm};
pub use linalg::{Complex64, ComplexMatrix, ComplexVector, EigenData, Tolerances};
pub use range::{crawford_number, numerical_radius, RadiusOptions};
pub use space::{build_space, Layout, SemiHilbertSpace, SemiOperator};
