use crate::error::{Error, Result};
use crate::ring::RingElement;
use crate::{CMat, C64};

/// A `sigma0` value on the negative real axis, where the principal logarithm
/// is ambiguous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBranchWarning {
    pub site: usize,
    pub value: C64,
}

/// The stationary closure `sigma(r + p) = T^p sigma(r)` and its solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureResult {
    /// `sigma(r) = T^r sigma0` for `r = 0..=p`.
    pub sigma_of_r: Vec<RingElement>,
    /// `A = ln(T^{p+1} sigma0) / delta`, principal branch.
    pub a: RingElement,
    /// `phi(n) = exp(delta * sum_{k<n} A(k))`; `exp(A x)` with `x = n delta`
    /// when `A` is constant.
    pub phi: RingElement,
    /// RMS relative defect of `T phi = T(sigma(p)) phi` over the links that do
    /// not wrap around the lattice.
    pub residual: f64,
    /// Product of `T^{p+1} sigma0` over one period; `phi` is periodic iff
    /// this is 1.
    pub monodromy: C64,
    pub warnings: Vec<LogBranchWarning>,
}

/// Closes the scalar chain at period `p` from the boundary data `sigma0`.
pub fn periodic_closure(sigma0: &RingElement, p: usize, delta: f64) -> Result<ClosureResult> {
    if sigma0.dim() != 1 {
        return Err(Error::DimensionError(sigma0.dim()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::ParameterError(format!("delta must be positive, got {delta}")));
    }
    let value = |f: &RingElement, n: usize| f.at(n)[(0, 0)];
    let l = sigma0.sites();
    if let Some(site) = (0..l).find(|&n| value(sigma0, n).norm() == 0.0) {
        return Err(Error::SingularElement(site));
    }
    let warnings = (0..l)
        .map(|n| (n, value(sigma0, n)))
        .filter(|(_, z)| z.re < 0.0 && z.im == 0.0)
        .map(|(site, value)| LogBranchWarning { site, value })
        .collect();
    let sigma_of_r: Vec<RingElement> = (0..=p).map(|r| sigma0.shift(r as i64)).collect();
    let ts = sigma0.shift(p as i64 + 1);
    let a = ts.map(|m| m.map(|z| z.ln() / delta));
    let mut acc = C64::new(0.0, 0.0);
    let phi = RingElement::from_fn(l, 1, |n| {
        let out = CMat::from_element(1, 1, acc.exp());
        acc += value(&a, n) * delta;
        out
    });
    let mut sq = 0.0;
    for n in 0..l - 1 {
        let lhs = value(&phi, n + 1);
        let rhs = value(&ts, n) * value(&phi, n);
        sq += ((lhs - rhs).norm() / lhs.norm().max(1.0)).powi(2);
    }
    let residual = (sq / (l - 1) as f64).sqrt();
    let monodromy = (0..l).map(|n| value(&ts, n)).product();
    Ok(ClosureResult { sigma_of_r, a, phi, residual, monodromy, warnings })
}
