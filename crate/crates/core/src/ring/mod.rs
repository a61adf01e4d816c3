//! Matrix-valued functions on a periodic lattice, difference operators over
//! them, and the dense eigen-oracle.

mod element;
mod operator;
mod oracle;

pub use element::{rcond, rel_diff, RingElement, DEFAULT_RCOND_MIN};
pub use operator::{eigen_residual, DifferenceOperator};
pub use oracle::{
    block_seed, dense_eigenpairs, dense_eigenvalues, eigen_solutions, null_vectors, spectrum, Eigenpair,
};
pub(crate) use oracle::seed_from_pairs;

use crate::error::{Error, Result};
use crate::rng::{self, LatticeRng};

/// Shape and numerical thresholds shared by everything built in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RingContext {
    pub sites: usize,
    pub dim: usize,
    /// Default relative residual tolerance.
    pub tol: f64,
    /// Pointwise reciprocal-condition floor for inversion.
    pub rcond_min: f64,
    /// Eigenvalues closer than this are treated as one.
    pub separation: f64,
}

impl RingContext {
    pub fn new(sites: usize, dim: usize) -> Result<Self> {
        if sites < 2 {
            return Err(Error::ParameterError(format!("sites must be at least 2, got {sites}")));
        }
        if dim < 1 {
            return Err(Error::ParameterError("dim must be at least 1".into()));
        }
        Ok(Self { sites, dim, tol: 1e-9, rcond_min: DEFAULT_RCOND_MIN, separation: 1e-8 })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn unit(&self) -> RingElement {
        RingElement::unit(self.sites, self.dim)
    }

    pub fn zero(&self) -> RingElement {
        RingElement::zero(self.sites, self.dim)
    }

    pub fn inverse(&self, f: &RingElement) -> Result<RingElement> {
        f.inverse_with(self.rcond_min)
    }

    /// Entries uniform in the unit square.
    pub fn random_element(&self, rng: &mut LatticeRng) -> RingElement {
        RingElement::from_fn(self.sites, self.dim, |_| rng::matrix(rng, self.dim))
    }

    /// Pointwise close to `2 I`, hence safely invertible.
    pub fn random_invertible(&self, rng: &mut LatticeRng) -> RingElement {
        RingElement::from_fn(self.sites, self.dim, |_| rng::well_conditioned(rng, self.dim))
    }

    /// Random operator with coefficients `U_low ..= U_high`.
    pub fn random_operator(&self, rng: &mut LatticeRng, low: i64, high: i64) -> DifferenceOperator {
        let coeffs = (low..=high).map(|_| self.random_element(rng)).collect();
        DifferenceOperator::new(low, coeffs).expect("coefficients share a shape")
    }

    pub fn eigen_solutions(&self, op: &DifferenceOperator, count: usize) -> Result<Vec<Eigenpair>> {
        eigen_solutions(self, op, count)
    }

    pub fn block_seed(&self, op: &DifferenceOperator, eigen_indices: &[usize]) -> Result<(RingElement, RingElement)> {
        block_seed(self, op, eigen_indices)
    }
}
