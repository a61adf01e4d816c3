use crate::error::Result;
use crate::ring::{rel_diff, DifferenceOperator, RingElement};
use crate::C64;

/// `L = u T + v + w T^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeTermOperator {
    pub u: RingElement,
    pub v: RingElement,
    pub w: RingElement,
}

impl ThreeTermOperator {
    pub fn new(u: RingElement, v: RingElement, w: RingElement) -> Result<Self> {
        u.check_shape(&v)?;
        u.check_shape(&w)?;
        Ok(Self { u, v, w })
    }

    /// `u T psi + v psi + w T^{-1} psi`.
    pub fn apply(&self, psi: &RingElement) -> Result<RingElement> {
        self.u.check_shape(psi)?;
        Ok(&self.u * psi.shift(1) + &self.v * psi + &self.w * psi.shift(-1))
    }

    pub fn to_difference_operator(&self) -> DifferenceOperator {
        DifferenceOperator::new(-1, vec![self.w.clone(), self.v.clone(), self.u.clone()])
            .expect("coefficients share a shape")
    }

    /// `F = u sigma + v + w (T^{-1} sigma)^{-1}`, which equals `(L phi) phi^{-1}`
    /// for `sigma = (T phi) phi^{-1}`.
    pub fn riccati(&self, sigma: &RingElement) -> Result<RingElement> {
        self.u.check_shape(sigma)?;
        Ok(&self.u * sigma + &self.v + &self.w * sigma.shift(-1).inverse()?)
    }
}

/// `E = p T + q`, the generator of `psi_y = E psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOperator {
    pub p: RingElement,
    pub q: RingElement,
}

impl EvolutionOperator {
    pub fn new(p: RingElement, q: RingElement) -> Result<Self> {
        p.check_shape(&q)?;
        Ok(Self { p, q })
    }

    /// `p = u + beta`, `q = v / 2`.
    pub fn from_three_term(l: &ThreeTermOperator, beta: C64) -> Self {
        let p = &l.u + RingElement::scalar(l.u.sites(), l.u.dim(), beta);
        let q = l.v.scale(C64::new(0.5, 0.0));
        Self { p, q }
    }

    pub fn apply(&self, psi: &RingElement) -> Result<RingElement> {
        self.p.check_shape(psi)?;
        Ok(&self.p * psi.shift(1) + &self.q * psi)
    }
}

/// `u T psi + v psi + w T^{-1} psi`.
pub fn three_term_apply(l: &ThreeTermOperator, psi: &RingElement) -> Result<RingElement> {
    l.apply(psi)
}

/// Relative defect of `u sigma + v + w (T^{-1} sigma)^{-1} = mu`.
pub fn riccati_residual(l: &ThreeTermOperator, sigma: &RingElement, mu: &RingElement) -> Result<f64> {
    Ok(rel_diff(&l.riccati(sigma)?, mu))
}

/// `psi[1] = g (T psi - sigma psi)`.
pub fn dt_three_term_wavefunction(psi: &RingElement, sigma: &RingElement, g: &RingElement) -> RingElement {
    g * (psi.shift(1) - sigma * psi)
}

/// Coefficients of `g (T - sigma) L (T - sigma)^{-1} g^{-1}`, plus `g_y g^{-1}`
/// in `v` for the evolution problem `psi_y = L psi`. With `spectral_only` the
/// `g_y` term is dropped, which is the transform of `L psi = psi lambda`.
pub fn dt_three_term(
    l: &ThreeTermOperator,
    sigma: &RingElement,
    g: &RingElement,
    g_y: &RingElement,
    spectral_only: bool,
) -> Result<ThreeTermOperator> {
    let gi = g.inverse()?;
    let u = g * l.u.shift(1) * g.shift(1).inverse()?;
    let mut v = g * (l.v.shift(1) - sigma * &l.u + l.u.shift(1) * sigma.shift(1)) * &gi;
    if !spectral_only {
        v = v + g_y * &gi;
    }
    let gs = g * sigma;
    let w = &gs * &l.w * gs.shift(-1).inverse()?;
    ThreeTermOperator::new(u, v, w)
}

/// `p[1] = g T(p) T(g)^{-1}`, `q[1] = g (T(q) - sigma p + T(p) T(sigma)) g^{-1} + g_y g^{-1}`.
pub fn evolution_dt(
    e: &EvolutionOperator,
    sigma: &RingElement,
    g: &RingElement,
    g_y: &RingElement,
) -> Result<EvolutionOperator> {
    let gi = g.inverse()?;
    let p = g * e.p.shift(1) * g.shift(1).inverse()?;
    let q = g * (e.q.shift(1) - sigma * &e.p + e.p.shift(1) * sigma.shift(1)) * &gi + g_y * &gi;
    EvolutionOperator::new(p, q)
}

/// `sigma_y = T(F) sigma - sigma F` under `psi_y = L psi`.
pub fn sigma_flow(l: &ThreeTermOperator, sigma: &RingElement) -> Result<RingElement> {
    let f = l.riccati(sigma)?;
    Ok(f.shift(1) * sigma - sigma * f)
}

/// `sigma_y = T(q) sigma - sigma p sigma + T(p) T(sigma) sigma - sigma q`
/// under `psi_y = E psi`.
pub fn sigma_evolution(e: &EvolutionOperator, sigma: &RingElement) -> RingElement {
    e.q.shift(1) * sigma - sigma * &e.p * sigma + e.p.shift(1) * sigma.shift(1) * sigma - sigma * &e.q
}

/// Relative defects of `L_y = [E, L]` read coefficientwise:
///
/// `u_y = p T(v) + q u - u T(q) - v p`,
/// `v_y = p T(w) + q v - v q - w T^{-1}(p)`,
/// `w_y = q w - w T^{-1}(q)`.
///
/// The `T^2` coefficient `p T(u) - u T(p)` is assumed to vanish.
pub fn compatibility_residuals(l: &ThreeTermOperator, e: &EvolutionOperator, l_y: &ThreeTermOperator) -> [f64; 3] {
    let (p, q) = (&e.p, &e.q);
    let u_rhs = p * l.v.shift(1) + q * &l.u - &l.u * q.shift(1) - &l.v * p;
    let v_rhs = p * l.w.shift(1) + q * &l.v - &l.v * q - &l.w * p.shift(-1);
    let w_rhs = q * &l.w - &l.w * q.shift(-1);
    [rel_diff(&l_y.u, &u_rhs), rel_diff(&l_y.v, &v_rhs), rel_diff(&l_y.w, &w_rhs)]
}
