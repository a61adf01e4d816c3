use nalgebra::DMatrix;

use super::RingElement;
use crate::error::{Error, Result};
use crate::{CMat, C64};

/// `L = sum_{m=low}^{high} U_m T^m` with ring-valued coefficients acting from
/// the left.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceOperator {
    low: i64,
    coeffs: Vec<RingElement>,
}

impl DifferenceOperator {
    /// `coeffs[k]` is `U_{low + k}`.
    pub fn new(low: i64, coeffs: Vec<RingElement>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::ShapeMismatch("operator needs at least one coefficient".into()))?;
        for c in &coeffs[1..] {
            first.check_shape(c)?;
        }
        Ok(Self { low, coeffs })
    }

    /// Single term `c T^m`.
    pub fn monomial(m: i64, c: RingElement) -> Self {
        Self { low: m, coeffs: vec![c] }
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn sites(&self) -> usize {
        self.coeffs[0].sites()
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    pub fn coeffs(&self) -> &[RingElement] {
        &self.coeffs
    }

    /// `U_m`, or `None` outside `[low, high]`.
    pub fn coeff(&self, m: i64) -> Option<&RingElement> {
        if m < self.low || m > self.high() {
            None
        } else {
            Some(&self.coeffs[(m - self.low) as usize])
        }
    }

    /// `U_m`, zero outside `[low, high]`.
    pub fn coeff_or_zero(&self, m: i64) -> RingElement {
        self.coeff(m)
            .cloned()
            .unwrap_or_else(|| RingElement::zero(self.sites(), self.dim()))
    }

    /// `sum_m U_m T^m psi`.
    pub fn apply(&self, psi: &RingElement) -> Result<RingElement> {
        self.coeffs[0].check_shape(psi)?;
        let mut out = RingElement::zero(psi.sites(), psi.dim());
        for (k, u) in self.coeffs.iter().enumerate() {
            out = out + u * psi.shift(self.low + k as i64);
        }
        Ok(out)
    }

    /// Dense `(sites*dim)^2` matrix of the operator acting on lattice vectors
    /// (one `dim`-vector per site, site-major).
    pub fn flatten(&self) -> DMatrix<C64> {
        let l = self.sites();
        let d = self.dim();
        let mut a = DMatrix::zeros(l * d, l * d);
        for (k, u) in self.coeffs.iter().enumerate() {
            let m = self.low + k as i64;
            for n in 0..l {
                let col = (n as i64 + m).rem_euclid(l as i64) as usize;
                let mut block = a.view_mut((n * d, col * d), (d, d));
                block += u.at(n);
            }
        }
        a
    }
}

/// Right-eigenvalue residual `||L psi - psi lambda|| / max(1, ||psi||)`.
pub fn eigen_residual(op: &DifferenceOperator, psi: &RingElement, lambda: &CMat) -> Result<f64> {
    let lhs = op.apply(psi)?;
    let rhs = psi.mul_const_right(lambda);
    Ok((lhs - rhs).norm() / psi.norm().max(1.0))
}
