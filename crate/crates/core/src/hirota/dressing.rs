use std::f64::consts::PI;

use super::{HirotaGrid, LatticeField, ShiftDirection, TauField};
use crate::error::{Error, Result};
use crate::ring::{rcond, DEFAULT_RCOND_MIN};
use crate::{CMat, C64};

/// Absolute floor for scalar denominators in the chain formulas.
pub const DEFAULT_DENOMINATOR_FLOOR: f64 = 1e-10;

/// `sigma = phi (T^{-1} phi)^{-1}`.
pub fn sigma_minus(phi: &LatticeField) -> Result<LatticeField> {
    Ok(phi * phi.t(-1).inverse()?)
}

/// A dressed potential and the RMS defect of the relation linking it to the
/// old one.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedPotential {
    pub field: LatticeField,
    pub link_residual: f64,
}

/// `u' = u - sigma(r-1) + sigma(r)`. The link is
/// `u' T^{-1} sigma(r) = sigma(r-1) T^{-1} u`, reported in the equivalent
/// form `u T^{-1} sigma(r) - sigma(r-1) T^{-1} u - (sigma(r-1) - sigma(r)) T^{-1} sigma(r)`.
pub fn dt_minus_potential(u: &LatticeField, sigma_r: &LatticeField, sigma_rm1: &LatticeField) -> DressedPotential {
    let field = u - sigma_rm1 + sigma_r;
    let ts = sigma_r.t(-1);
    let link = u * &ts - sigma_rm1 * u.t(-1) - (sigma_rm1 - sigma_r) * &ts;
    DressedPotential { field, link_residual: link.rms() }
}

/// `v' = v - sigma(j-1) + T sigma(j)` with link `v' sigma(j) = sigma(j-1) T^{-1} v`.
pub fn dt_minus_potential_v(v: &LatticeField, sigma_j: &LatticeField, sigma_jm1: &LatticeField) -> DressedPotential {
    let field = v - sigma_jm1 + sigma_j.t(1);
    let link = &field * sigma_j - sigma_jm1 * v.t(-1);
    DressedPotential { field, link_residual: link.rms() }
}

/// RMS of `u T^{-1} sigma(r) - sigma(r-1) u - (sigma(r-1) - sigma(r)) T^{-1} sigma(r)`,
/// the link with `u` frozen under `T`. This is what the scalar solve below
/// inverts.
pub fn min_frozen_residual(u: &LatticeField, sigma_r: &LatticeField, sigma_rm1: &LatticeField) -> f64 {
    let ts = sigma_r.t(-1);
    (u * &ts - sigma_rm1 * u - (sigma_rm1 - sigma_r) * &ts).rms()
}

fn require_scalar(f: &LatticeField) -> Result<()> {
    match f.grid().dim {
        1 => Ok(()),
        d => Err(Error::DimensionError(d)),
    }
}

/// Pointwise `num / den` for scalar fields with an absolute floor on `|den|`.
fn divide(num: &LatticeField, den: &LatticeField, floor: f64) -> Result<LatticeField> {
    let mut values = Vec::with_capacity(num.values().len());
    for (i, (a, b)) in num.values().iter().zip(den.values()).enumerate() {
        let d = b[(0, 0)];
        if !(d.norm() >= floor) {
            return Err(Error::DenominatorUnderflow(i));
        }
        values.push(CMat::from_element(1, 1, a[(0, 0)] / d));
    }
    LatticeField::from_values(*num.grid(), values)
}

/// Scalar solve of the frozen link:
/// `u = (sigma(r-1) - sigma(r)) T^{-1} sigma(r) / (T^{-1} sigma(r) - sigma(r-1))`.
pub fn potential_from_sigma_scalar(
    sigma_r: &LatticeField,
    sigma_rm1: &LatticeField,
    floor: f64,
) -> Result<LatticeField> {
    require_scalar(sigma_r)?;
    let ts = sigma_r.t(-1);
    divide(&((sigma_rm1 - sigma_r) * &ts), &(&ts - sigma_rm1), floor)
}

/// `s = (sigma(r-1) - sigma(r)) / (T^{-1} sigma(r) - sigma(r-1))`.
fn chain_s(sigma: &LatticeField, floor: f64) -> Result<LatticeField> {
    let rm1 = sigma.r_shift(-1);
    divide(&(&rm1 - sigma), &(sigma.t(-1) - &rm1), floor)
}

/// Link `N` of the scalar chain.
#[derive(Debug, Clone, PartialEq)]
pub struct HirotaChainState {
    pub n: usize,
    pub sigma: LatticeField,
    pub s: LatticeField,
}

impl HirotaChainState {
    pub fn new(n: usize, sigma: LatticeField, floor: f64) -> Result<Self> {
        require_scalar(&sigma)?;
        let s = chain_s(&sigma, floor)?;
        Ok(Self { n, sigma, s })
    }
}

/// Advances the chain to `sigma_next` by `s_{N+1} = s_N sigma_N(r-1) / T^{-1} sigma_{N+1}(r)`
/// and checks it against the potential form
/// `s_{N+1} T^{-1} sigma_{N+1}(r) = s_N sigma_N(r-1)`, with `s_{N+1}` taken
/// from its definition.
pub fn chain_step(state: &HirotaChainState, sigma_next: &LatticeField, tol: f64, floor: f64) -> Result<HirotaChainState> {
    let advanced = ch1(&state.s, &state.sigma, sigma_next, floor)?;
    let next = HirotaChainState::new(state.n + 1, sigma_next.clone(), floor)?;
    let rhs = &state.s * state.sigma.r_shift(-1);
    let potential_form = (&next.s * sigma_next.t(-1) - &rhs).rms() / rhs.rms().max(1.0);
    let ratio_form = (&next.s - &advanced).rms() / advanced.rms().max(1.0);
    let defect = potential_form.max(ratio_form);
    if !(defect <= tol) {
        return Err(Error::ChainInconsistency { defect });
    }
    Ok(HirotaChainState { n: next.n, sigma: next.sigma, s: advanced })
}

fn ch1(s: &LatticeField, sigma: &LatticeField, sigma_next: &LatticeField, floor: f64) -> Result<LatticeField> {
    divide(&(s * sigma.r_shift(-1)), &sigma_next.t(-1), floor)
}

/// Iterates the ratio form of the chain through `sigmas = [sigma_N, .., sigma_{N+q}]`.
pub fn iterate_ch1(s: &LatticeField, sigmas: &[LatticeField], floor: f64) -> Result<LatticeField> {
    let mut out = s.clone();
    for w in sigmas.windows(2) {
        out = ch1(&out, &w[0], &w[1], floor)?;
    }
    Ok(out)
}

/// `s_{N+q} = s_N prod_{k<q} sigma_{N+k}(r-1) / prod_{1<=k<=q} T^{-1} sigma_{N+k}(r)`.
pub fn sol_closed_form(s: &LatticeField, sigmas: &[LatticeField], floor: f64) -> Result<LatticeField> {
    let q = sigmas.len().saturating_sub(1);
    let mut num = s.clone();
    let mut den = LatticeField::unit(*s.grid());
    for k in 0..q {
        num = num * sigmas[k].r_shift(-1);
        den = den * sigmas[k + 1].t(-1);
    }
    divide(&num, &den, floor)
}

/// The constant background `u = v = 1` with its two periodic plane-wave
/// solutions `zeta^n x^j y^r` (`T W = zeta W`).
#[derive(Debug, Clone)]
pub struct PlaneWaveBackground {
    pub grid: HirotaGrid,
    pub u: LatticeField,
    pub v: LatticeField,
    pub waves: [LatticeField; 2],
}

/// Requires `ln % 3 == 0` and `lj % 6 == lr % 6 == 0` so the waves close
/// on the periodic grid.
pub fn plane_wave_background(grid: HirotaGrid) -> Result<PlaneWaveBackground> {
    if !grid.ln.is_multiple_of(3) || !grid.lj.is_multiple_of(6) || !grid.lr.is_multiple_of(6) {
        return Err(Error::GridError(format!(
            "plane-wave background needs ln % 3 == 0 and lj, lr % 6 == 0, got {}x{}x{}",
            grid.ln, grid.lj, grid.lr
        )));
    }
    let z1 = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let z2 = z1.conj();
    let sign = match grid.direction {
        ShiftDirection::Forward => 1,
        ShiftDirection::Backward => -1,
    };
    let wave = |z: C64, other: C64| {
        let x = -1.0 / other;
        let y = -z / other;
        LatticeField::from_fn(grid, |n, j, r| {
            CMat::identity(grid.dim, grid.dim) * (z.powi(sign * n as i32) * x.powi(j as i32) * y.powi(r as i32))
        })
    };
    Ok(PlaneWaveBackground {
        grid,
        u: LatticeField::unit(grid),
        v: LatticeField::unit(grid),
        waves: [wave(z1, z2), wave(z2, z1)],
    })
}

/// Result of one minus-direction dressing of a background.
#[derive(Debug, Clone)]
pub struct BackgroundDressing {
    pub sigma: LatticeField,
    pub u: DressedPotential,
    pub v: DressedPotential,
    /// `T^{-1} phi`, whose substitution reproduces the dressed potentials.
    pub tau: TauField,
}

impl PlaneWaveBackground {
    /// `W_1 c_1 + W_2 c_2`, a solution of the Lax pair for any constant `c`.
    pub fn combination(&self, c1: &CMat, c2: &CMat) -> LatticeField {
        self.waves[0].mul_const_right(c1) + self.waves[1].mul_const_right(c2)
    }

    /// Dresses the background with seed `phi`.
    pub fn dress(&self, phi: &LatticeField) -> Result<BackgroundDressing> {
        dress(&self.u, &self.v, phi)
    }
}

/// Dresses `(u, v)` with the seed solution `phi`.
pub fn dress(u: &LatticeField, v: &LatticeField, phi: &LatticeField) -> Result<BackgroundDressing> {
    if let Some(i) = phi.values().iter().position(|m| rcond(m) < DEFAULT_RCOND_MIN) {
        return Err(Error::DegenerateSeed(i));
    }
    let sigma = sigma_minus(phi)?;
    let du = dt_minus_potential(u, &sigma, &sigma.r_shift(-1));
    let dv = dt_minus_potential_v(v, &sigma, &sigma.j_shift(-1));
    let tau = TauField::new(phi.t(-1))?;
    Ok(BackgroundDressing { sigma, u: du, v: dv, tau })
}

/// `psi - sigma T^{-1} psi`.
pub fn dress_wavefunction(psi: &LatticeField, sigma: &LatticeField) -> LatticeField {
    psi - sigma * psi.t(-1)
}
