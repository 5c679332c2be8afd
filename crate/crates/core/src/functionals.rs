//! The A-seminorm, A-numerical radius and A-Crawford number of operators
//! on a semi-Hilbert space, evaluated on the induced operator `tilde(T)`.

use crate::enclosure::Enclosure;
use crate::error::Result;
use crate::linalg::spectral_norm;
use crate::range::{crawford_number, mc_crawford_upper_of, mc_radius_lower_of, numerical_radius, RadiusOptions};
use crate::space::{SemiHilbertSpace, SemiOperator};

/// `||T||_A = ||tilde(T)||_2`.
pub fn op_seminorm(space: &SemiHilbertSpace, op: &SemiOperator) -> Result<Enclosure> {
    Ok(Enclosure::exact(spectral_norm(&space.tilde(op)?)))
}

/// `w_A(T) = w(tilde(T))`.
pub fn a_numerical_radius(space: &SemiHilbertSpace, op: &SemiOperator, opts: &RadiusOptions) -> Result<Enclosure> {
    numerical_radius(&space.tilde(op)?, opts)
}

/// `c_A(T) = c(tilde(T))`.
pub fn crawford(space: &SemiHilbertSpace, op: &SemiOperator, opts: &RadiusOptions) -> Result<Enclosure> {
    crawford_number(&space.tilde(op)?, opts)
}

/// Largest `|<Tx, x>_A|` over `samples` random A-unit vectors.
pub fn mc_radius_lower(space: &SemiHilbertSpace, op: &SemiOperator, samples: usize, seed: u64) -> Result<f64> {
    Ok(mc_radius_lower_of(&space.tilde(op)?, samples, seed))
}

/// Smallest `|<Tx, x>_A|` over `samples` random A-unit vectors.
pub fn mc_crawford_upper(space: &SemiHilbertSpace, op: &SemiOperator, samples: usize, seed: u64) -> Result<f64> {
    Ok(mc_crawford_upper_of(&space.tilde(op)?, samples, seed))
}
