//! Dense eigendecomposition oracle.
//!
//! The operator is flattened into a `(sites*dim)^2` matrix, its spectrum is
//! read off a complex Schur form and eigenvectors are recovered as SVD null
//! vectors of `A - lambda I`. Exact lattice solutions of `L psi = psi lambda`
//! are manufactured from these.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, Schur};

use super::{DifferenceOperator, RingContext, RingElement};
use crate::error::{Error, Result};
use crate::{CMat, C64};

/// One right eigenpair of a flattened operator.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: C64,
    /// Unit-norm lattice vector, site-major.
    pub vector: DVector<C64>,
}

impl Eigenpair {
    /// Lattice vector embedded as column `col` of an otherwise zero element,
    /// so that `L psi = psi (lambda I)` holds.
    pub fn to_element(&self, sites: usize, dim: usize, col: usize) -> RingElement {
        RingElement::from_fn(sites, dim, |n| {
            let mut m = CMat::zeros(dim, dim);
            for i in 0..dim {
                m[(i, col)] = self.vector[n * dim + i];
            }
            m
        })
    }

    /// `lambda * I`.
    pub fn value_matrix(&self, dim: usize) -> CMat {
        DMatrix::identity(dim, dim) * self.value
    }
}

/// Orders eigenvalues by decreasing magnitude, then increasing phase.
fn spectral_order(a: &C64, b: &C64) -> Ordering {
    b.norm()
        .partial_cmp(&a.norm())
        .unwrap_or(Ordering::Equal)
        .then(a.arg().partial_cmp(&b.arg()).unwrap_or(Ordering::Equal))
}

const SCHUR_MAX_ITER: usize = 20_000;

/// All eigenvalues of a dense square matrix, in spectral order.
///
/// Shifted QR can stall on exactly structured input such as permutation
/// matrices; a fixed unitary similarity breaks the structure before retrying.
pub fn dense_eigenvalues(a: &DMatrix<C64>) -> Vec<C64> {
    let schur = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER).or_else(|| {
        let q = scrambler(a.nrows());
        Schur::try_new(q.adjoint() * a * &q, f64::EPSILON, SCHUR_MAX_ITER)
    });
    let mut vals: Vec<C64> = schur
        .expect("Schur iteration did not converge")
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect();
    vals.sort_by(spectral_order);
    vals
}

/// Deterministic random unitary.
fn scrambler(n: usize) -> DMatrix<C64> {
    let mut r = crate::rng::seeded(0x5eed);
    DMatrix::from_fn(n, n, |_, _| crate::rng::complex(&mut r)).qr().q()
}

/// Orthonormal basis (size `k`) of the approximate null space of `a`.
pub fn null_vectors(a: &DMatrix<C64>, k: usize) -> Vec<DVector<C64>> {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[i]
            .partial_cmp(&svd.singular_values[j])
            .unwrap_or(Ordering::Equal)
    });
    order
        .into_iter()
        .take(k)
        .map(|i| v_t.row(i).adjoint().into_owned())
        .collect()
}

struct Cluster {
    value: C64,
    size: usize,
}

fn clusters(vals: &[C64], separation: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for &v in vals {
        match out.iter_mut().find(|c| (c.value - v).norm() < separation) {
            Some(c) => c.size += 1,
            None => out.push(Cluster { value: v, size: 1 }),
        }
    }
    out
}

/// Eigenpairs of a dense matrix, one per numerically separated eigenvalue,
/// in spectral order. Eigenvalues closer than `separation` are merged.
pub fn dense_eigenpairs(a: &DMatrix<C64>, separation: f64) -> Vec<Eigenpair> {
    let n = a.nrows();
    let vals = dense_eigenvalues(a);
    clusters(&vals, separation)
        .into_iter()
        .map(|c| {
            let shifted = a - DMatrix::identity(n, n) * c.value;
            let mut v = null_vectors(&shifted, 1).remove(0);
            v /= C64::new(v.norm(), 0.0);
            Eigenpair { value: c.value, vector: v }
        })
        .collect()
}

/// Full spectrum of the flattened operator, with multiplicity.
pub fn spectrum(op: &DifferenceOperator) -> Vec<C64> {
    dense_eigenvalues(&op.flatten())
}

/// First `count` eigenpairs of `op`, one per separated eigenvalue.
pub fn eigen_solutions(ctx: &RingContext, op: &DifferenceOperator, count: usize) -> Result<Vec<Eigenpair>> {
    let pairs = dense_eigenpairs(&op.flatten(), ctx.separation);
    if count > pairs.len() {
        return Err(Error::DegenerateSpectrum { requested: count, available: pairs.len() });
    }
    Ok(pairs.into_iter().take(count).collect())
}

/// Matrix seed `phi` with the chosen eigenvectors as columns and constant
/// `mu = diag(lambda_i)`, so that `L phi = phi mu`. Returns `(mu, phi)`.
pub fn block_seed(
    ctx: &RingContext,
    op: &DifferenceOperator,
    eigen_indices: &[usize],
) -> Result<(RingElement, RingElement)> {
    let d = op.dim();
    if eigen_indices.len() != d {
        return Err(Error::LengthMismatch { expected: d, got: eigen_indices.len() });
    }
    let needed = eigen_indices.iter().max().map_or(0, |m| m + 1);
    let pairs = eigen_solutions(ctx, op, needed)?;
    seed_from_pairs(ctx, op.sites(), d, eigen_indices.iter().map(|&i| &pairs[i]))
}

pub(crate) fn seed_from_pairs<'a>(
    ctx: &RingContext,
    sites: usize,
    d: usize,
    chosen: impl Iterator<Item = &'a Eigenpair>,
) -> Result<(RingElement, RingElement)> {
    let chosen: Vec<&Eigenpair> = chosen.collect();
    let mu = CMat::from_diagonal(&DVector::from_iterator(d, chosen.iter().map(|p| p.value)));
    let phi = RingElement::from_fn(sites, d, |n| {
        CMat::from_fn(d, d, |i, k| chosen[k].vector[n * d + i])
    });
    for (site, m) in phi.values().iter().enumerate() {
        if super::rcond(m) < ctx.rcond_min {
            return Err(Error::DegenerateSeed(site));
        }
    }
    Ok((RingElement::constant(sites, &mu), phi))
}
