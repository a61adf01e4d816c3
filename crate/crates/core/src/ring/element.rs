use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{CMat, C64};

/// Smallest reciprocal condition number accepted by [`RingElement::inverse`].
pub const DEFAULT_RCOND_MIN: f64 = 1e-12;

/// A matrix-valued function on a periodic lattice of `sites` points.
///
/// Multiplication is pointwise, the unit is the all-identity element, and
/// [`RingElement::shift`] is the ring automorphism `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingElement {
    dim: usize,
    values: Vec<CMat>,
}

impl RingElement {
    /// Builds an element from per-site matrices. All matrices must be
    /// square of the same size and there must be at least two sites.
    pub fn from_values(values: Vec<CMat>) -> Result<Self> {
        let dim = values.first().map(|m| m.nrows()).unwrap_or(0);
        if values.len() < 2 || dim == 0 {
            return Err(Error::ShapeMismatch(format!(
                "need at least 2 sites of nonempty matrices, got {} sites",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::ShapeMismatch(format!("site {bad} is not {dim}x{dim}")));
        }
        Ok(Self { dim, values })
    }

    pub fn from_fn(sites: usize, dim: usize, mut f: impl FnMut(usize) -> CMat) -> Self {
        let values = (0..sites).map(&mut f).collect();
        Self { dim, values }
    }

    pub fn zero(sites: usize, dim: usize) -> Self {
        Self::constant(sites, &DMatrix::zeros(dim, dim))
    }

    pub fn unit(sites: usize, dim: usize) -> Self {
        Self::constant(sites, &DMatrix::identity(dim, dim))
    }

    /// The same matrix at every site. Constants are shift-invariant.
    pub fn constant(sites: usize, m: &CMat) -> Self {
        Self { dim: m.nrows(), values: vec![m.clone(); sites] }
    }

    pub fn scalar(sites: usize, dim: usize, c: C64) -> Self {
        Self::constant(sites, &(DMatrix::identity(dim, dim) * c))
    }

    pub fn sites(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn at(&self, site: usize) -> &CMat {
        &self.values[site]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.sites() == other.sites()
    }

    pub(crate) fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "({} sites, dim {}) vs ({} sites, dim {})",
                self.sites(),
                self.dim,
                other.sites(),
                other.dim
            )))
        }
    }

    /// `T^m f`, i.e. `g(n) = f(n + m mod sites)`.
    pub fn shift(&self, m: i64) -> Self {
        let l = self.sites() as i64;
        let values = (0..l)
            .map(|n| self.values[(n + m).rem_euclid(l) as usize].clone())
            .collect();
        Self { dim: self.dim, values }
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self { dim: self.dim, values: self.values.iter().map(f).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        assert!(
            self.same_shape(other),
            "ring operands differ in shape: ({}, {}) vs ({}, {})",
            self.sites(),
            self.dim,
            other.sites(),
            other.dim
        );
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect();
        Self { dim: self.dim, values }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|m| m * c)
    }

    /// Right multiplication by a constant matrix at every site.
    pub fn mul_const_right(&self, c: &CMat) -> Self {
        self.map(|m| m * c)
    }

    pub fn mul_const_left(&self, c: &CMat) -> Self {
        self.map(|m| c * m)
    }

    /// Pointwise inverse with the default conditioning gate.
    pub fn inverse(&self) -> Result<Self> {
        self.inverse_with(DEFAULT_RCOND_MIN)
    }

    /// Pointwise inverse; fails at the first site whose reciprocal condition
    /// number is below `rcond_min`.
    pub fn inverse_with(&self, rcond_min: f64) -> Result<Self> {
        let mut values = Vec::with_capacity(self.sites());
        for (site, m) in self.values.iter().enumerate() {
            if rcond(m) < rcond_min {
                return Err(Error::SingularElement(site));
            }
            values.push(m.clone().try_inverse().ok_or(Error::SingularElement(site))?);
        }
        Ok(Self { dim: self.dim, values })
    }

    /// Frobenius norm over all sites.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    /// Smallest pointwise |det|.
    pub fn min_abs_det(&self) -> f64 {
        self.values
            .iter()
            .map(|m| m.clone().determinant().norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `true` when every site carries the same matrix.
    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// Commutator `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }
}

/// Reciprocal 2-norm condition number.
pub fn rcond(m: &CMat) -> f64 {
    if m.nrows() == 1 {
        return if m[(0, 0)].norm() > 0.0 && m[(0, 0)].is_finite() { 1.0 } else { 0.0 };
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if max == 0.0 || !max.is_finite() {
        0.0
    } else {
        min / max
    }
}

/// `||a - b|| / max(1, ||a||, ||b||)`.
pub fn rel_diff(a: &RingElement, b: &RingElement) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

impl Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: Self) -> RingElement {
        self.zip(rhs, |a, b| a * b)
    }
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: Self) -> RingElement {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: Self) -> RingElement {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        self.map(|m| -m)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for RingElement {
            type Output = RingElement;
            fn $f(self, rhs: Self) -> RingElement {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&RingElement> for RingElement {
            type Output = RingElement;
            fn $f(self, rhs: &RingElement) -> RingElement {
                (&self).$f(rhs)
            }
        }
        impl $tr<RingElement> for &RingElement {
            type Output = RingElement;
            fn $f(self, rhs: RingElement) -> RingElement {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Mul, mul);
forward_owned!(Add, add);
forward_owned!(Sub, sub);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random(seed: u64, sites: usize, dim: usize) -> RingElement {
        let mut r = rng::seeded(seed);
        RingElement::from_fn(sites, dim, |_| rng::matrix(&mut r, dim))
    }

    #[test]
    fn shift_of_unit_is_unit() {
        let u = RingElement::unit(8, 2);
        assert_eq!(u.shift(3), u);
    }

    #[test]
    fn shift_is_cyclic() {
        let f = RingElement::from_fn(8, 1, |n| CMat::from_element(1, 1, C64::new(2f64.powi(n as i32), 0.0)));
        let g = f.shift(1);
        for n in 0..8 {
            assert_eq!(g.at(n), f.at((n + 1) % 8));
        }
        assert_eq!(f.shift(0), f);
        assert_eq!(f.shift(-8), f);
    }

    #[test]
    fn shift_is_automorphism_exactly() {
        let f = random(42, 8, 2);
        let g = random(43, 8, 2);
        assert_eq!((&f * &g).shift(1), &f.shift(1) * &g.shift(1));
    }

    #[test]
    fn inverse_of_unit_and_scalar() {
        let u = RingElement::unit(5, 3);
        assert_eq!(u.inverse().unwrap(), u);
        let three = RingElement::scalar(6, 1, C64::new(3.0, 0.0));
        let inv = three.inverse().unwrap();
        for m in inv.values() {
            assert!((m[(0, 0)] - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn inverse_reports_singular_site() {
        let mut values = random(1, 8, 2).values().to_vec();
        values[5] = CMat::zeros(2, 2);
        let f = RingElement::from_values(values).unwrap();
        assert_eq!(f.inverse(), Err(Error::SingularElement(5)));
    }

    #[test]
    fn inverse_is_two_sided() {
        let f = random(7, 6, 3);
        let g = f.inverse().unwrap();
        let u = RingElement::unit(6, 3);
        assert!(rel_diff(&(&f * &g), &u) < 1e-12);
        assert!(rel_diff(&(&g * &f), &u) < 1e-12);
    }

    #[test]
    fn from_values_rejects_bad_shapes() {
        assert!(RingElement::from_values(vec![CMat::identity(2, 2)]).is_err());
        assert!(RingElement::from_values(vec![CMat::identity(2, 2), CMat::identity(3, 3)]).is_err());
    }
}
