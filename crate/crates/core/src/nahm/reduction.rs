use super::operators::{EvolutionOperator, ThreeTermOperator};
use crate::error::{Error, Result};
use crate::ring::RingElement;
use crate::{CMat, C64};

/// Default bound on the number of integrator steps.
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

const I: C64 = C64::new(0.0, 1.0);

/// Three lattice-constant `d x d` fields with the parameters of the
/// reduction. Constancy along the lattice holds by representation.
#[derive(Debug, Clone, PartialEq)]
pub struct NahmTriple {
    pub phi1: CMat,
    pub phi2: CMat,
    pub phi3: CMat,
    pub alpha: C64,
    pub beta: C64,
}

impl NahmTriple {
    pub fn new(phi1: CMat, phi2: CMat, phi3: CMat, alpha: C64, beta: C64) -> Result<Self> {
        let d = phi1.nrows();
        if [&phi1, &phi2, &phi3].iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::ShapeMismatch(format!("Nahm fields must all be {d}x{d}")));
        }
        Ok(Self { phi1, phi2, phi3, alpha, beta })
    }

    pub fn dim(&self) -> usize {
        self.phi1.nrows()
    }

    pub fn fields(&self) -> [&CMat; 3] {
        [&self.phi1, &self.phi2, &self.phi3]
    }

    /// Same parameters, new fields.
    pub fn with_fields(&self, [phi1, phi2, phi3]: [CMat; 3]) -> Self {
        Self { phi1, phi2, phi3, alpha: self.alpha, beta: self.beta }
    }

    /// `self + h * other`, fields only.
    pub fn axpy(&self, h: f64, other: &Self) -> Self {
        let h = C64::new(h, 0.0);
        self.with_fields([&self.phi1 + &other.phi1 * h, &self.phi2 + &other.phi2 * h, &self.phi3 + &other.phi3 * h])
    }

    /// Frobenius norm of the stacked fields.
    pub fn norm(&self) -> f64 {
        self.fields().iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    /// `(u, v, w)` as matrices:
    /// `u = alpha (-2i phi1 - 2 phi2)`, `v = -4 phi3`, `w = alpha^{-1} (-2i phi1 + 2 phi2)`.
    pub fn coefficient_matrices(&self) -> Result<(CMat, CMat, CMat)> {
        check_alpha(self.alpha)?;
        let a = &self.phi1 * (-2.0 * I);
        let b = &self.phi2 * C64::new(2.0, 0.0);
        Ok(((&a - &b) * self.alpha, &self.phi3 * C64::new(-4.0, 0.0), (a + b) / self.alpha))
    }
}

fn check_alpha(alpha: C64) -> Result<()> {
    if alpha == C64::new(0.0, 0.0) {
        Err(Error::ParameterError("alpha must be nonzero".into()))
    } else {
        Ok(())
    }
}

/// Levi-Civita symbol on `{0, 1, 2}` with `eps(0, 1, 2) = 1`.
pub fn levi_civita(i: usize, k: usize, l: usize) -> f64 {
    match (i, k, l) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `d phi_i / dy = i eps_{ikl} [phi_k, phi_l]`, summed over `k, l`.
pub fn nahm_rhs(phi: &NahmTriple) -> NahmTriple {
    let f = phi.fields();
    let d = phi.dim();
    let out = std::array::from_fn(|i| {
        let mut acc = CMat::zeros(d, d);
        for k in 0..3 {
            for l in 0..3 {
                let e = levi_civita(i, k, l);
                if e != 0.0 {
                    acc += (f[k] * f[l] - f[l] * f[k]) * (I * e);
                }
            }
        }
        acc
    });
    phi.with_fields(out)
}

/// `||phi_y - nahm_rhs(phi)|| / max(1, ||nahm_rhs(phi)||)` for a supplied
/// derivative.
pub fn nahm_defect(phi: &NahmTriple, phi_y: &NahmTriple) -> f64 {
    let rhs = nahm_rhs(phi);
    phi_y.axpy(-1.0, &rhs).norm() / rhs.norm().max(1.0)
}

/// The three-term operator and its evolution operator, embedded as
/// lattice-constant elements on `sites` sites.
pub fn fields_to_coeffs(phi: &NahmTriple, sites: usize) -> Result<(ThreeTermOperator, EvolutionOperator)> {
    let (u, v, w) = phi.coefficient_matrices()?;
    let l = ThreeTermOperator::new(
        RingElement::constant(sites, &u),
        RingElement::constant(sites, &v),
        RingElement::constant(sites, &w),
    )?;
    let e = EvolutionOperator::from_three_term(&l, phi.beta);
    Ok((l, e))
}

/// Inverse of [`NahmTriple::coefficient_matrices`].
pub fn matrices_to_fields(u: &CMat, v: &CMat, w: &CMat, alpha: C64, beta: C64) -> Result<NahmTriple> {
    check_alpha(alpha)?;
    let ua = u / alpha;
    let wa = w * alpha;
    let phi1 = (&ua + &wa) / (-4.0 * I);
    let phi2 = (wa - ua) / C64::new(4.0, 0.0);
    let phi3 = v / C64::new(-4.0, 0.0);
    NahmTriple::new(phi1, phi2, phi3, alpha, beta)
}

/// Inverse of [`fields_to_coeffs`]; the coefficients must be lattice constant.
pub fn coeffs_to_fields(l: &ThreeTermOperator, alpha: C64, beta: C64) -> Result<NahmTriple> {
    if !(l.u.is_constant() && l.v.is_constant() && l.w.is_constant()) {
        return Err(Error::ParameterError("coefficients must be lattice constant".into()));
    }
    matrices_to_fields(l.u.at(0), l.v.at(0), l.w.at(0), alpha, beta)
}

/// One classical RK4 step for a state of matrices.
pub(crate) fn rk4_step<F>(state: &[CMat], h: f64, f: F) -> Result<Vec<CMat>>
where
    F: Fn(&[CMat]) -> Result<Vec<CMat>>,
{
    let shifted = |base: &[CMat], k: &[CMat], c: f64| -> Vec<CMat> {
        base.iter().zip(k).map(|(x, dx)| x + dx * C64::new(c, 0.0)).collect()
    };
    let k1 = f(state)?;
    let k2 = f(&shifted(state, &k1, h / 2.0))?;
    let k3 = f(&shifted(state, &k2, h / 2.0))?;
    let k4 = f(&shifted(state, &k3, h))?;
    let c = C64::new(h / 6.0, 0.0);
    Ok((0..state.len())
        .map(|i| &state[i] + (&k1[i] + (&k2[i] + &k3[i]) * C64::new(2.0, 0.0) + &k4[i]) * c)
        .collect())
}

/// Number of steps `y_end / step`, which must be a nonnegative integer up
/// to rounding and at most `max_steps`.
pub(crate) fn step_count(y_end: f64, step: f64, max_steps: usize) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() || !(y_end >= 0.0) || !y_end.is_finite() {
        return Err(Error::ParameterError(format!("need step > 0 and y_end >= 0, got {step}, {y_end}")));
    }
    let ratio = y_end / step;
    if ratio > max_steps as f64 {
        return Err(Error::StepCountOverflow(ratio.ceil() as usize));
    }
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::ParameterError(format!("span {y_end} is not a multiple of step {step}")));
    }
    Ok(n as usize)
}

/// Samples at `y = k * step`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub step: f64,
    pub points: Vec<NahmTriple>,
}

impl Trajectory {
    pub fn y(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn last(&self) -> &NahmTriple {
        self.points.last().expect("trajectory holds the initial point")
    }
}

pub fn integrate_nahm(phi0: &NahmTriple, y_end: f64, step: f64) -> Result<Trajectory> {
    integrate_nahm_bounded(phi0, y_end, step, DEFAULT_MAX_STEPS)
}

/// RK4 integration of the Nahm system; fails with `StepCountOverflow`
/// above `max_steps`.
pub fn integrate_nahm_bounded(phi0: &NahmTriple, y_end: f64, step: f64, max_steps: usize) -> Result<Trajectory> {
    let n = step_count(y_end, step, max_steps)?;
    let rhs = |s: &[CMat]| -> Result<Vec<CMat>> {
        let t = phi0.with_fields([s[0].clone(), s[1].clone(), s[2].clone()]);
        Ok(nahm_rhs(&t).fields().into_iter().cloned().collect())
    };
    let mut points = Vec::with_capacity(n + 1);
    points.push(phi0.clone());
    for _ in 0..n {
        let cur: Vec<CMat> = points.last().unwrap().fields().into_iter().cloned().collect();
        let next = rk4_step(&cur, step, rhs)?;
        let [a, b, c]: [CMat; 3] = next.try_into().expect("three fields");
        points.push(phi0.with_fields([a, b, c]));
    }
    Ok(Trajectory { step, points })
}

/// Observed convergence order from endpoints at `step`, `step / 2` and a
/// `step / 8` reference: `log2(e(step) / e(step / 2))`.
pub fn self_convergence_order(phi0: &NahmTriple, y_end: f64, step: f64) -> Result<f64> {
    let end = |h: f64| integrate_nahm(phi0, y_end, h).map(|t| t.last().clone());
    let reference = end(step / 8.0)?;
    let e1 = end(step)?.axpy(-1.0, &reference).norm();
    let e2 = end(step / 2.0)?.axpy(-1.0, &reference).norm();
    Ok((e1 / e2).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nahm::operators::compatibility_residuals;
    use crate::rng;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    pub(crate) fn random_triple(seed: u64, d: usize) -> NahmTriple {
        let mut r = rng::seeded(seed);
        let m = |r: &mut rng::LatticeRng| rng::matrix(r, d) * C64::new(0.5, 0.0);
        NahmTriple::new(m(&mut r), m(&mut r), m(&mut r), C64::new(0.8, 0.3), C64::new(0.4, -0.2)).unwrap()
    }

    fn pauli() -> [CMat; 3] {
        let c = |re: f64, im: f64| C64::new(re, im);
        let z = c(0.0, 0.0);
        [
            CMat::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
            CMat::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
            CMat::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
        ]
    }

    #[test]
    fn levi_civita_is_antisymmetric() {
        for i in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let e = levi_civita(i, k, l);
                    assert_eq!(e, -levi_civita(k, i, l));
                    assert_eq!(e, -levi_civita(i, l, k));
                    assert_eq!(e, -levi_civita(l, k, i));
                }
            }
        }
        assert_eq!(levi_civita(0, 1, 2), 1.0);
    }

    #[test]
    fn rhs_cases() {
        let diag = |a: f64, b: f64| CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(a, 0.0), C64::new(b, 1.0)]));
        let t = NahmTriple::new(diag(1.0, 2.0), diag(-1.0, 0.5), diag(3.0, 0.0), one(), one()).unwrap();
        assert_eq!(nahm_rhs(&t).norm(), 0.0);

        let [s1, s2, _] = pauli();
        let t = NahmTriple::new(s1.clone(), s2.clone(), CMat::zeros(2, 2), one(), one()).unwrap();
        let rhs = nahm_rhs(&t);
        let expected = (&s1 * &s2 - &s2 * &s1) * (2.0 * I);
        assert!((&rhs.phi3 - expected).norm() < 1e-15);
        assert!(rhs.phi3.norm() > 1.0);

        let t = random_triple(1, 3);
        let c = C64::new(1.7, 0.0);
        let scaled = t.with_fields([&t.phi1 * c, &t.phi2 * c, &t.phi3 * c]);
        assert!(nahm_rhs(&scaled).axpy(-2.89, &nahm_rhs(&t)).norm() < 1e-13);
    }

    #[test]
    fn coefficient_map_cases() {
        let z = CMat::zeros(2, 2);
        let [s1, ..] = pauli();
        let t = NahmTriple::new(z.clone(), s1.clone(), z.clone(), one(), C64::new(0.5, 0.0)).unwrap();
        let (l, e) = fields_to_coeffs(&NahmTriple { phi2: z.clone(), ..t.clone() }, 4).unwrap();
        assert_eq!(l.u.norm() + l.v.norm() + l.w.norm() + e.q.norm(), 0.0);
        assert_eq!(e.p, RingElement::scalar(4, 2, C64::new(0.5, 0.0)));

        let zero_alpha = NahmTriple { alpha: C64::new(0.0, 0.0), ..t };
        assert!(matches!(fields_to_coeffs(&zero_alpha, 4), Err(Error::ParameterError(_))));
    }

    #[test]
    fn coefficient_map_round_trips() {
        let t = random_triple(66, 3);
        let (l, _) = fields_to_coeffs(&t, 5).unwrap();
        let back = coeffs_to_fields(&l, t.alpha, t.beta).unwrap();
        assert!(back.axpy(-1.0, &t).norm() <= 1e-14);

        let mut r = rng::seeded(2);
        let bad = ThreeTermOperator::new(
            RingElement::from_fn(5, 3, |_| rng::matrix(&mut r, 3)),
            l.v.clone(),
            l.w.clone(),
        )
        .unwrap();
        assert!(coeffs_to_fields(&bad, t.alpha, t.beta).is_err());
    }

    #[test]
    fn substitution_consistency() {
        for seed in [3, 4, 5] {
            let t = random_triple(seed, 2);
            let (l, e) = fields_to_coeffs(&t, 4).unwrap();
            let (l_y, _) = fields_to_coeffs(&nahm_rhs(&t), 4).unwrap();
            let res = compatibility_residuals(&l, &e, &l_y);
            assert!(res.iter().all(|&x| x <= 1e-9), "{res:?}");
        }
        // a wrong derivative is seen
        let t = random_triple(3, 2);
        let (l, e) = fields_to_coeffs(&t, 4).unwrap();
        let wrong = t.with_fields([t.phi1.clone(), t.phi2.clone(), t.phi3.clone()]);
        let (l_y, _) = fields_to_coeffs(&wrong, 4).unwrap();
        assert!(compatibility_residuals(&l, &e, &l_y).iter().any(|&x| x > 1e-2));
    }

    #[test]
    fn commuting_data_is_stationary() {
        let diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![one(), C64::new(0.0, 2.0)]));
        let t = NahmTriple::new(diag.clone(), &diag * C64::new(3.0, 0.0), CMat::identity(2, 2), one(), one()).unwrap();
        let traj = integrate_nahm(&t, 0.5, 0.05).unwrap();
        assert_eq!(traj.points.len(), 11);
        assert!(traj.points.iter().all(|p| p == &t));
    }

    #[test]
    fn step_count_checks() {
        let t = random_triple(1, 2);
        assert!(matches!(integrate_nahm_bounded(&t, 1.0, 1e-3, 100), Err(Error::StepCountOverflow(1000))));
        assert!(matches!(integrate_nahm(&t, 1.0, 0.3), Err(Error::ParameterError(_))));
        assert!(integrate_nahm(&t, 1.0, 0.0).is_err());
        assert_eq!(integrate_nahm(&t, 0.0, 0.1).unwrap().points.len(), 1);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let order = self_convergence_order(&random_triple(68, 2), 0.5, 0.02).unwrap();
        assert!(order >= 3.8, "{order}");
    }

    #[test]
    fn hermitian_data_stays_hermitian() {
        let mut r = rng::seeded(69);
        let h = |r: &mut rng::LatticeRng| rng::hermitian(r, 2) * C64::new(0.5, 0.0);
        let t = NahmTriple::new(h(&mut r), h(&mut r), h(&mut r), one(), one()).unwrap();
        let traj = integrate_nahm(&t, 1.0, 1e-3).unwrap();
        let drift = traj
            .points
            .iter()
            .flat_map(|p| p.fields().map(|m| (m - m.adjoint()).norm()))
            .fold(0.0, f64::max);
        assert!(drift <= 1e-8, "{drift}");
    }

    #[test]
    fn trajectory_stays_compatible() {
        let traj = integrate_nahm(&random_triple(70, 2), 0.5, 1e-2).unwrap();
        for p in &traj.points {
            let (l, e) = fields_to_coeffs(p, 3).unwrap();
            let (l_y, _) = fields_to_coeffs(&nahm_rhs(p), 3).unwrap();
            assert!(compatibility_residuals(&l, &e, &l_y).iter().all(|&x| x <= 1e-8));
        }
    }
}
