//! Zakharov-Shabat dressing chains for `L = J + U T` with constant `J`.
//!
//! Chains are generated by iterating the plus transform on oracle seeds; the
//! chain relations are then checked as residuals.

use crate::darboux::{dt_potentials, dt_wavefunction, Direction, DressingSeed};
use crate::error::{Error, Result};
use crate::ring::{rel_diff, DifferenceOperator, RingContext, RingElement};

/// `s = phi mu (T phi)^{-1}`.
pub fn zs_s(seed: &DressingSeed) -> Result<RingElement> {
    Ok(seed.phi() * seed.mu() * seed.phi().shift(1).inverse()?)
}

/// `U = s - J sigma` for a seed of `(J + U T) phi = phi mu`.
pub fn zs_potential(seed: &DressingSeed, j: &RingElement) -> Result<RingElement> {
    Ok(zs_s(seed)? - j * seed.sigma())
}

/// One link of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ZsChainState {
    pub n: usize,
    pub sigma: RingElement,
    pub s: RingElement,
    j: RingElement,
}

impl ZsChainState {
    /// Fails unless `J` is shift invariant.
    pub fn new(n: usize, sigma: RingElement, s: RingElement, j: RingElement) -> Result<Self> {
        sigma.check_shape(&s)?;
        sigma.check_shape(&j)?;
        if j.shift(1) != j {
            return Err(Error::ParameterError("J must be constant along the lattice".into()));
        }
        Ok(Self { n, sigma, s, j })
    }

    pub fn from_seed(n: usize, seed: &DressingSeed, j: &RingElement) -> Result<Self> {
        Self::new(n, seed.sigma().clone(), zs_s(seed)?, j.clone())
    }

    pub fn j(&self) -> &RingElement {
        &self.j
    }

    /// `U[n] = s_n - J sigma_n`.
    pub fn potential(&self) -> RingElement {
        &self.s - &self.j * &self.sigma
    }
}

/// Defect of `J sigma + U - sigma J - sigma T(U) (T sigma)^{-1} = 0`, the
/// condition for `J` to be unchanged by the transform.
pub fn zs_constraint_residual(state: &ZsChainState, u: &RingElement) -> Result<f64> {
    let sig = &state.sigma;
    let lhs = &state.j * sig + u;
    let rhs = sig * &state.j + sig * u.shift(1) * sig.shift(1).inverse()?;
    Ok(rel_diff(&lhs, &rhs))
}

/// `s_{n+1} = s_n + J sigma_{n+1} - sigma_n J`, validated against the
/// constraint at the new link.
pub fn zs_chain_step(state: &ZsChainState, sigma_next: &RingElement, tol: f64) -> Result<ZsChainState> {
    let s = &state.s + &state.j * sigma_next - &state.sigma * &state.j;
    let next = ZsChainState::new(state.n + 1, sigma_next.clone(), s, state.j.clone())?;
    let defect = zs_constraint_residual(&next, &next.potential())?;
    if defect > tol {
        return Err(Error::ChainInconsistency { defect });
    }
    Ok(next)
}

/// `(mu - J)^{-1} sigma (mu - J)`, the chain for commuting data.
pub fn zs_trivial_chain_step(sigma: &RingElement, mu: &RingElement, j: &RingElement) -> Result<RingElement> {
    let k = mu - j;
    Ok(k.inverse()? * sigma * k)
}

/// A chain generated by successive dressings of one operator.
#[derive(Debug, Clone)]
pub struct ZsChain {
    pub states: Vec<ZsChainState>,
    /// `L[0], L[1], ...`, one more than `states`.
    pub operators: Vec<DifferenceOperator>,
}

/// Dresses `J + U T` `length` times. Link `k` uses eigenvectors
/// `k*dim .. (k+1)*dim` of the original operator, carried forward through
/// the earlier transforms.
pub fn build_zs_chain(ctx: &RingContext, j: &RingElement, u: &RingElement, length: usize) -> Result<ZsChain> {
    let op = DifferenceOperator::new(0, vec![j.clone(), u.clone()])?;
    let d = ctx.dim;
    let pairs = ctx.eigen_solutions(&op, length * d)?;
    let mut blocks: Vec<(RingElement, RingElement)> = (0..length)
        .map(|k| crate::ring::seed_from_pairs(ctx, ctx.sites, d, pairs[k * d..(k + 1) * d].iter()))
        .collect::<Result<_>>()?;
    blocks.reverse();
    let mut states = Vec::with_capacity(length);
    let mut operators = vec![op];
    while let Some((mu, phi)) = blocks.pop() {
        let seed = DressingSeed::from_solution(phi, mu, Direction::Plus)?;
        states.push(ZsChainState::from_seed(states.len(), &seed, j)?);
        let current = operators.last().expect("nonempty");
        operators.push(dt_potentials(current, &seed, &ctx.zero())?);
        for (_, psi) in blocks.iter_mut() {
            *psi = dt_wavefunction(psi, &seed);
        }
    }
    Ok(ZsChain { states, operators })
}
