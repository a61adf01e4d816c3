use nalgebra::DVector;

use super::operators::riccati_residual;
use super::reduction::{fields_to_coeffs, matrices_to_fields, nahm_defect, nahm_rhs, rk4_step, NahmTriple, Trajectory};
use crate::error::{Error, Result};
use crate::ring::{dense_eigenpairs, dense_eigenvalues, null_vectors, rcond, RingElement, DEFAULT_RCOND_MIN};
use crate::{CMat, C64};

/// Eigenvalues closer than this are one cluster when diagonalizing `sigma`.
const CLUSTER_SEPARATION: f64 = 1e-8;

/// Sites used when the lattice-constant data is embedded for ring-level checks.
const EMBED_SITES: usize = 3;

/// Gauge and seed data at one output point. `sigma = chi Z chi^{-1}` with
/// `Z = diag(z)` fixed, so `sigma` keeps its spectrum along the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeState {
    pub y: f64,
    pub g: CMat,
    pub chi: CMat,
    pub z: Vec<C64>,
    pub sigma: CMat,
}

impl GaugeState {
    fn new(y: f64, g: CMat, chi: CMat, z: Vec<C64>) -> Result<Self> {
        let sigma = conjugate_diag(&chi, &z)?;
        Ok(Self { y, g, chi, z, sigma })
    }
}

fn inverse(m: &CMat) -> Result<CMat> {
    if rcond(m) < DEFAULT_RCOND_MIN {
        return Err(Error::SingularElement(0));
    }
    m.clone().try_inverse().ok_or(Error::SingularElement(0))
}

fn diag(z: &[C64]) -> CMat {
    CMat::from_diagonal(&DVector::from_column_slice(z))
}

fn conjugate_diag(chi: &CMat, z: &[C64]) -> Result<CMat> {
    Ok(chi * diag(z) * inverse(chi)?)
}

/// `sigma0 = chi Z chi^{-1}` where column `k` of `chi` is an eigenvector of
/// `u z_k + v + w / z_k`, the symbol of the lattice-constant operator. Then
/// `phi(n) = chi Z^n` solves `L phi = phi Lambda`.
pub fn spectral_seed(phi: &NahmTriple, z: &[C64]) -> Result<CMat> {
    let d = phi.dim();
    if z.len() != d {
        return Err(Error::LengthMismatch { expected: d, got: z.len() });
    }
    let (u, v, w) = phi.coefficient_matrices()?;
    let mut chi = CMat::zeros(d, d);
    for (k, &zk) in z.iter().enumerate() {
        if zk.norm() == 0.0 {
            return Err(Error::ParameterError("spectral points must be nonzero".into()));
        }
        let symbol = &u * zk + &v + &w / zk;
        let pair = dense_eigenpairs(&symbol, CLUSTER_SEPARATION).remove(0);
        chi.set_column(k, &pair.vector);
    }
    if rcond(&chi) < DEFAULT_RCOND_MIN {
        return Err(Error::DegenerateSeed(0));
    }
    conjugate_diag(&chi, z)
}

/// `sigma = chi diag(z) chi^{-1}` with clustered eigenvalues sharing one
/// invariant subspace. Fails for non-diagonalizable input.
fn diagonalize(sigma: &CMat) -> Result<(CMat, Vec<C64>)> {
    let d = sigma.nrows();
    let vals = dense_eigenvalues(sigma);
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for v in vals {
        match clusters.iter_mut().find(|(c, _)| (c - v).norm() < CLUSTER_SEPARATION * c.norm().max(1.0)) {
            Some(c) => c.1 += 1,
            None => clusters.push((v, 1)),
        }
    }
    let mut chi = CMat::zeros(d, d);
    let mut z = Vec::with_capacity(d);
    for (value, size) in clusters {
        let shifted = sigma - CMat::identity(d, d) * value;
        for vec in null_vectors(&shifted, size) {
            chi.set_column(z.len(), &vec);
            z.push(value);
        }
    }
    if rcond(&chi) < DEFAULT_RCOND_MIN {
        return Err(Error::SingularElement(0));
    }
    Ok((chi, z))
}

/// Part of `f` commuting with `diag(z)` in the `chi` basis: the matrix
/// eigenvalue `mu` that `sigma` can carry.
fn commutant_part(f: &CMat, chi: &CMat, z: &[C64]) -> Result<CMat> {
    let mut m = inverse(chi)? * f * chi;
    for i in 0..z.len() {
        for k in 0..z.len() {
            if (z[i] - z[k]).norm() >= CLUSTER_SEPARATION * z[i].norm().max(1.0) {
                m[(i, k)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(chi * m * inverse(chi)?)
}

/// Riccati defect of a lattice-constant `sigma` against the operator of `phi`,
/// with `mu` the best admissible eigenvalue.
pub fn seed_residual(phi: &NahmTriple, sigma: &CMat) -> Result<f64> {
    let (chi, z) = diagonalize(sigma)?;
    let (l, _) = fields_to_coeffs(phi, EMBED_SITES)?;
    let s = RingElement::constant(EMBED_SITES, sigma);
    let f = l.riccati(&s)?;
    let mu = RingElement::constant(EMBED_SITES, &commutant_part(f.at(0), &chi, &z)?);
    riccati_residual(&l, &s, &mu)
}

fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// `g_y = g [sigma, u] / 2`.
fn gauge_rhs(g: &CMat, sigma: &CMat, u: &CMat) -> CMat {
    g * commutator(sigma, u) * C64::new(0.5, 0.0)
}

/// `sigma_y = [q, sigma] + [p, sigma] sigma` for lattice-constant data.
fn sigma_rhs(p: &CMat, q: &CMat, sigma: &CMat) -> CMat {
    commutator(q, sigma) + commutator(p, sigma) * sigma
}

fn evolution_matrices(phi: &NahmTriple) -> Result<(CMat, CMat, CMat, CMat, CMat)> {
    let (u, v, w) = phi.coefficient_matrices()?;
    let p = &u + CMat::identity(phi.dim(), phi.dim()) * phi.beta;
    let q = &v * C64::new(0.5, 0.0);
    Ok((u, v, w, p, q))
}

/// Dressed fields and their exact `y`-derivative at one point:
/// `u[1] = g u g^{-1}`, `v[1] = g (v - sigma u + u sigma) g^{-1}`,
/// `w[1] = g sigma w sigma^{-1} g^{-1}`.
pub fn dressed_point(phi: &NahmTriple, gauge: &GaugeState) -> Result<(NahmTriple, NahmTriple)> {
    let (u, v, w, p, q) = evolution_matrices(phi)?;
    let (uy, vy, wy) = nahm_rhs(phi).coefficient_matrices()?;
    let (g, s) = (&gauge.g, &gauge.sigma);
    let gi = inverse(g)?;
    let si = inverse(s)?;
    let sy = sigma_rhs(&p, &q, s);
    let k = gauge_rhs(g, s, &u) * &gi;

    let conj = |m: &CMat| g * m * &gi;
    let u1 = conj(&u);
    let v1 = conj(&(&v - s * &u + &u * s));
    let w1 = conj(&(s * &w * &si));
    let u1y = commutator(&k, &u1) + conj(&uy);
    let v1y = commutator(&k, &v1) + conj(&(&vy - &sy * &u - s * &uy + &uy * s + &u * &sy));
    let w1y = commutator(&k, &w1) + conj(&(&sy * &w * &si + s * &wy * &si - s * &w * &si * &sy * &si));

    let fields = matrices_to_fields(&u1, &v1, &w1, phi.alpha, phi.beta)?;
    let deriv = matrices_to_fields(&u1y, &v1y, &w1y, phi.alpha, phi.beta)?;
    Ok((fields, deriv))
}

/// Output of [`dress_nahm`], one entry per trajectory point.
#[derive(Debug, Clone)]
pub struct DressedTrajectory {
    pub dressed: Trajectory,
    pub gauge: Vec<GaugeState>,
    /// Nahm defect of the dressed fields against their exact derivative.
    pub nahm_residuals: Vec<f64>,
    /// Riccati defect of `sigma(y)` against the undressed operator.
    pub riccati_residuals: Vec<f64>,
}

impl DressedTrajectory {
    pub fn max_nahm_residual(&self) -> f64 {
        self.nahm_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_riccati_residual(&self) -> f64 {
        self.riccati_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Dresses a Nahm trajectory. `sigma(y)` and `g(y)` are integrated alongside
/// the fields with the trajectory's step; `g(0) = exp(G0)`.
pub fn dress_nahm(traj: &Trajectory, sigma0: &RingElement, g0: &CMat, tol: f64) -> Result<DressedTrajectory> {
    let phi0 = &traj.points[0];
    let d = phi0.dim();
    if !sigma0.is_constant() || sigma0.dim() != d {
        return Err(Error::ParameterError(format!("sigma0 must be a lattice-constant {d}x{d} element")));
    }
    if g0.nrows() != d || g0.ncols() != d {
        return Err(Error::ShapeMismatch(format!("G0 must be {d}x{d}")));
    }
    let sigma = sigma0.at(0);
    let defect = seed_residual(phi0, sigma)?;
    if !(defect <= tol) {
        return Err(Error::SeedInconsistent { defect });
    }
    let (chi, z) = diagonalize(sigma)?;
    let zd = diag(&z);

    let rhs = |s: &[CMat]| -> Result<Vec<CMat>> {
        let phi = phi0.with_fields([s[0].clone(), s[1].clone(), s[2].clone()]);
        let (u, _, _, p, q) = evolution_matrices(&phi)?;
        let (chi, g) = (&s[3], &s[4]);
        let sig = chi * &zd * inverse(chi)?;
        let mut out: Vec<CMat> = nahm_rhs(&phi).fields().into_iter().cloned().collect();
        out.push(&q * chi + &p * chi * &zd);
        out.push(gauge_rhs(g, &sig, &u));
        Ok(out)
    };

    let mut state: Vec<CMat> = phi0.fields().into_iter().cloned().collect();
    state.push(chi);
    state.push(g0.exp());
    let n = traj.points.len();
    let mut out = DressedTrajectory {
        dressed: Trajectory { step: traj.step, points: Vec::with_capacity(n) },
        gauge: Vec::with_capacity(n),
        nahm_residuals: Vec::with_capacity(n),
        riccati_residuals: Vec::with_capacity(n),
    };
    for (k, given) in traj.points.iter().enumerate() {
        if k > 0 {
            state = rk4_step(&state, traj.step, rhs)?;
        }
        let phi = phi0.with_fields([state[0].clone(), state[1].clone(), state[2].clone()]);
        if phi.axpy(-1.0, given).norm() > 1e-12 * given.norm().max(1.0) {
            return Err(Error::ParameterError(format!("trajectory point {k} is not the RK4 image of its predecessor")));
        }
        let gauge = GaugeState::new(traj.y(k), state[4].clone(), state[3].clone(), z.clone())?;
        let (fields, deriv) = dressed_point(&phi, &gauge)?;
        out.nahm_residuals.push(nahm_defect(&fields, &deriv));
        out.riccati_residuals.push(seed_residual(&phi, &gauge.sigma)?);
        out.dressed.points.push(fields);
        out.gauge.push(gauge);
    }
    Ok(out)
}
