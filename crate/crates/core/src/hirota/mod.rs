//! The nonabelian Hirota lattice system on a periodic `(n, j, r)` grid: Lax
//! pair, compatibility, tau substitution, the minus-direction dressing and
//! its scalar chain, and the periodic closure.

mod closure;
mod dressing;
mod equations;
mod io;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

pub use closure::{periodic_closure, ClosureResult, LogBranchWarning};
pub use dressing::{
    chain_step, dress, dress_wavefunction, dt_minus_potential, dt_minus_potential_v, iterate_ch1, min_frozen_residual, plane_wave_background,
    potential_from_sigma_scalar, sigma_minus, sol_closed_form, BackgroundDressing, DressedPotential,
    HirotaChainState, PlaneWaveBackground, DEFAULT_DENOMINATOR_FLOOR,
};
pub use equations::{
    bilinear_residual_nonabelian, bilinear_residual_scalar, compatibility_residuals, lax_residuals, tau_to_potentials,
};

use crate::error::{Error, Result};
use crate::ring::{rcond, DEFAULT_RCOND_MIN};
use crate::{CMat, C64};

/// What the shift `T` does to the `n` index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ShiftDirection {
    /// `T f_n = f_{n+1}`.
    #[default]
    Forward,
    /// `T f_n = f_{n-1}`.
    Backward,
}

impl ShiftDirection {
    fn sign(self) -> i64 {
        match self {
            ShiftDirection::Forward => 1,
            ShiftDirection::Backward => -1,
        }
    }
}

/// Periodic extents of `n`, `j`, `r`, the matrix size and the meaning of `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HirotaGrid {
    pub ln: usize,
    pub lj: usize,
    pub lr: usize,
    pub dim: usize,
    pub direction: ShiftDirection,
}

impl HirotaGrid {
    pub fn new(ln: usize, lj: usize, lr: usize, dim: usize) -> Result<Self> {
        if ln < 2 || lj < 2 || lr < 2 {
            return Err(Error::GridError(format!("extents must be at least 2, got {ln}x{lj}x{lr}")));
        }
        if dim == 0 {
            return Err(Error::GridError("dim must be positive".into()));
        }
        Ok(Self { ln, lj, lr, dim, direction: ShiftDirection::Forward })
    }

    pub fn with_direction(mut self, direction: ShiftDirection) -> Self {
        self.direction = direction;
        self
    }

    pub fn points(&self) -> usize {
        self.ln * self.lj * self.lr
    }

    pub fn index(&self, n: usize, j: usize, r: usize) -> usize {
        (n * self.lj + j) * self.lr + r
    }

    /// Inverse of [`HirotaGrid::index`].
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        (idx / (self.lj * self.lr), (idx / self.lr) % self.lj, idx % self.lr)
    }
}

/// Matrix-valued field over the grid. Used for wavefunctions and potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    grid: HirotaGrid,
    values: Vec<CMat>,
}

impl LatticeField {
    pub fn from_fn(grid: HirotaGrid, mut f: impl FnMut(usize, usize, usize) -> CMat) -> Self {
        let values = (0..grid.points())
            .map(|i| {
                let (n, j, r) = grid.coords(i);
                f(n, j, r)
            })
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: HirotaGrid, values: Vec<CMat>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::LengthMismatch { expected: grid.points(), got: values.len() });
        }
        if values.iter().any(|m| m.nrows() != grid.dim || m.ncols() != grid.dim) {
            return Err(Error::ShapeMismatch(format!("values must be {0}x{0}", grid.dim)));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: HirotaGrid, m: &CMat) -> Self {
        Self { grid, values: vec![m.clone(); grid.points()] }
    }

    pub fn zero(grid: HirotaGrid) -> Self {
        Self::constant(grid, &DMatrix::zeros(grid.dim, grid.dim))
    }

    pub fn unit(grid: HirotaGrid) -> Self {
        Self::constant(grid, &DMatrix::identity(grid.dim, grid.dim))
    }

    /// Scalar field (dim 1) from a complex function.
    pub fn scalar_fn(grid: HirotaGrid, mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        Self::from_fn(grid, |n, j, r| CMat::from_element(1, 1, f(n, j, r)))
    }

    pub fn grid(&self) -> &HirotaGrid {
        &self.grid
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn at(&self, n: usize, j: usize, r: usize) -> &CMat {
        &self.values[self.grid.index(n, j, r)]
    }

    /// Field whose value at `(n, j, r)` is this field at
    /// `(n + dn, j + dj, r + dr)`, all indices periodic.
    pub fn shifted(&self, dn: i64, dj: i64, dr: i64) -> Self {
        let g = self.grid;
        Self::from_fn(g, |n, j, r| {
            let nn = (n as i64 + dn).rem_euclid(g.ln as i64) as usize;
            let jj = (j as i64 + dj).rem_euclid(g.lj as i64) as usize;
            let rr = (r as i64 + dr).rem_euclid(g.lr as i64) as usize;
            self.at(nn, jj, rr).clone()
        })
    }

    /// `T^k` along `n`, in the grid's direction.
    pub fn t(&self, k: i64) -> Self {
        self.shifted(k * self.grid.direction.sign(), 0, 0)
    }

    pub fn j_shift(&self, k: i64) -> Self {
        self.shifted(0, k, 0)
    }

    pub fn r_shift(&self, k: i64) -> Self {
        self.shifted(0, 0, k)
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(f).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        assert_eq!(self.grid, other.grid, "lattice fields live on different grids");
        Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|m| m * c)
    }

    pub fn mul_const_right(&self, c: &CMat) -> Self {
        self.map(|m| m * c)
    }

    /// Pointwise inverse; the error carries the flat grid index.
    pub fn inverse(&self) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, m) in self.values.iter().enumerate() {
            if rcond(m) < DEFAULT_RCOND_MIN {
                return Err(Error::SingularElement(i));
            }
            values.push(m.clone().try_inverse().ok_or(Error::SingularElement(i))?);
        }
        Ok(Self { grid: self.grid, values })
    }

    /// Root mean square over grid points of the pointwise Frobenius norm.
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|m| m.norm_squared()).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    /// Largest pointwise Frobenius norm.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    /// Entry `(0, 0)`, for scalar fields.
    pub fn scalar_at(&self, n: usize, j: usize, r: usize) -> C64 {
        self.at(n, j, r)[(0, 0)]
    }
}

impl Mul for &LatticeField {
    type Output = LatticeField;
    fn mul(self, rhs: Self) -> LatticeField {
        self.zip(rhs, |a, b| a * b)
    }
}

impl Add for &LatticeField {
    type Output = LatticeField;
    fn add(self, rhs: Self) -> LatticeField {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &LatticeField {
    type Output = LatticeField;
    fn sub(self, rhs: Self) -> LatticeField {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &LatticeField {
    type Output = LatticeField;
    fn neg(self) -> LatticeField {
        self.map(|m| -m)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for LatticeField {
            type Output = LatticeField;
            fn $f(self, rhs: Self) -> LatticeField {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&LatticeField> for LatticeField {
            type Output = LatticeField;
            fn $f(self, rhs: &LatticeField) -> LatticeField {
                (&self).$f(rhs)
            }
        }
        impl $tr<LatticeField> for &LatticeField {
            type Output = LatticeField;
            fn $f(self, rhs: LatticeField) -> LatticeField {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Mul, mul);
forward_owned!(Add, add);
forward_owned!(Sub, sub);

/// A pointwise invertible field of tau values.
#[derive(Debug, Clone, PartialEq)]
pub struct TauField {
    field: LatticeField,
    inverse: LatticeField,
}

impl TauField {
    pub fn new(field: LatticeField) -> Result<Self> {
        let inverse = field.inverse()?;
        Ok(Self { field, inverse })
    }

    pub fn field(&self) -> &LatticeField {
        &self.field
    }

    pub fn inverse(&self) -> &LatticeField {
        &self.inverse
    }

    pub fn grid(&self) -> &HirotaGrid {
        self.field.grid()
    }
}
