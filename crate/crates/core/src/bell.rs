//! Lattice Bell polynomials, the classic differential Bell recursion, and the
//! rewrite of a forward-difference operator into powers of `T`.

use crate::error::{Error, Result};
use crate::ring::{DifferenceOperator, RingElement};
use crate::C64;

/// Shift scale for the forward difference `(T - 1) / delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellContext {
    delta: f64,
}

impl BellContext {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta.is_finite() {
            Ok(Self { delta })
        } else {
            Err(Error::ParameterError(format!("delta must be positive, got {delta}")))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `T^{m-1}(sigma)^{-1} ... T(sigma)^{-1} sigma^{-1}`, the unit for `m = 0`.
///
/// With `sigma = phi (T phi)^{-1}` this gives `T^m phi = B phi`.
pub fn bell_plus(sigma: &RingElement, m: usize) -> Result<RingElement> {
    let inv = sigma.inverse()?;
    Ok(ordered_product(&inv, 0, m as i64 - 1))
}

/// `T^m(sigma) ... T(sigma) sigma`.
///
/// With `sigma = phi (T^{-1} phi)^{-1}` this gives `T^m phi = B T^{-1} phi`.
pub fn bell_minus(sigma: &RingElement, m: usize) -> RingElement {
    ordered_product(sigma, 0, m as i64)
}

/// `T^hi(f) ... T^lo(f)`, the unit when `hi < lo`.
fn ordered_product(f: &RingElement, lo: i64, hi: i64) -> RingElement {
    let mut out = RingElement::unit(f.sites(), f.dim());
    for k in lo..=hi {
        out = f.shift(k) * out;
    }
    out
}

/// `bell_plus` continued to negative index so that `T^m phi = B phi` for all
/// integers `m`.
pub(crate) fn bell_plus_signed(sigma: &RingElement, m: i64) -> Result<RingElement> {
    if m >= 0 {
        bell_plus(sigma, m as usize)
    } else {
        let mut out = RingElement::unit(sigma.sites(), sigma.dim());
        for k in (m..=-1).rev() {
            out = sigma.shift(k) * out;
        }
        Ok(out)
    }
}

/// `bell_minus` continued to `m < 0` so that `T^m phi = B T^{-1} phi`.
pub(crate) fn bell_minus_signed(sigma: &RingElement, m: i64) -> Result<RingElement> {
    if m >= 0 {
        Ok(bell_minus(sigma, m as usize))
    } else {
        let inv = sigma.inverse()?;
        let mut out = RingElement::unit(sigma.sites(), sigma.dim());
        for k in ((m + 1)..=-1).rev() {
            out = inv.shift(k) * out;
        }
        Ok(out)
    }
}

/// One step of `B_{m+1} = sum_r C(m, r) B_{m-r} y_{r+1}` given
/// `b = [B_0..B_m]` and `y = [y_1..y_{m+1}]`.
pub fn classic_bell_next(b: &[f64], y: &[f64]) -> Result<f64> {
    if b.is_empty() || y.len() != b.len() {
        return Err(Error::LengthMismatch { expected: b.len().max(1), got: y.len() });
    }
    let m = b.len() - 1;
    Ok((0..=m).map(|r| binomial(m, r) * b[m - r] * y[r]).sum())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rewrites `sum_m u_m ((T - 1)/delta)^m` as `sum_r U_r T^r`.
pub fn rearrange_difference_to_shift(u: &[RingElement], delta: f64) -> Result<DifferenceOperator> {
    let ctx = BellContext::new(delta)?;
    let first = u.first().ok_or(Error::LengthMismatch { expected: 1, got: 0 })?;
    let coeffs = (0..u.len())
        .map(|r| {
            let mut acc = RingElement::zero(first.sites(), first.dim());
            for (m, um) in u.iter().enumerate().skip(r) {
                let sign = if (m - r) % 2 == 0 { 1.0 } else { -1.0 };
                let c = sign * binomial(m, r) / ctx.delta.powi(m as i32);
                acc = acc + um.scale(C64::new(c, 0.0));
            }
            acc
        })
        .collect();
    DifferenceOperator::new(0, coeffs)
}

/// Direct evaluation of `sum_m u_m ((T - 1)/delta)^m psi` by nesting the
/// difference. Reference for [`rearrange_difference_to_shift`].
pub fn apply_difference_form(u: &[RingElement], delta: f64, psi: &RingElement) -> RingElement {
    let scale = C64::new(1.0 / delta, 0.0);
    let mut diff = psi.clone();
    let mut out = RingElement::zero(psi.sites(), psi.dim());
    for um in u {
        out = out + um * &diff;
        diff = (diff.shift(1) - &diff).scale(scale);
    }
    out
}
