use super::{LatticeField, TauField};
use crate::error::{Error, Result};

/// RMS defects of `f(j-1) = T f + v f` and `f(r-1) = f + u T^{-1} f`.
pub fn lax_residuals(f: &LatticeField, u: &LatticeField, v: &LatticeField) -> (f64, f64) {
    let e1 = f.j_shift(-1) - f.t(1) - v * f;
    let e2 = f.r_shift(-1) - f - u * f.t(-1);
    (e1.rms(), e2.rms())
}

/// RMS defects of the two compatibility equations of the Lax pair:
/// `u(j-1) - T u - v(r-1) + v` and `v(r-1) u - u(j-1) T^{-1} v`.
pub fn compatibility_residuals(u: &LatticeField, v: &LatticeField) -> (f64, f64) {
    let uj = u.j_shift(-1);
    let vr = v.r_shift(-1);
    let e1 = &uj - u.t(1) - &vr + v;
    let e2 = &vr * u - &uj * v.t(-1);
    (e1.rms(), e2.rms())
}

/// Potentials from tau, factors in the order written:
/// `u = T tau(r-1) tau(r-1)^{-1} T^{-1} tau tau^{-1}`,
/// `v = T tau(j-1) tau(j-1)^{-1} tau (T tau)^{-1}`.
pub fn tau_to_potentials(tau: &TauField) -> (LatticeField, LatticeField) {
    let t = tau.field();
    let ti = tau.inverse();
    let u = t.shifted(0, 0, -1).t(1) * ti.r_shift(-1) * t.t(-1) * ti;
    let v = t.j_shift(-1).t(1) * ti.j_shift(-1) * t * ti.t(1);
    (u, v)
}

/// RMS of the four-term bilinear form in tau that is the first
/// compatibility equation after substituting tau for `u` and `v`.
pub fn bilinear_residual_nonabelian(tau: &TauField) -> f64 {
    let t = tau.field();
    let ti = tau.inverse();
    let at = |f: &LatticeField, k: i64, dj: i64, dr: i64| f.shifted(0, dj, dr).t(k);
    // u(n, j-1, r)
    let a = at(t, 1, -1, -1) * at(ti, 0, -1, -1) * at(t, -1, -1, 0) * at(ti, 0, -1, 0);
    // v(n, j, r-1)
    let b = at(t, 1, -1, -1) * at(ti, 0, -1, -1) * at(t, 0, 0, -1) * at(ti, 1, 0, -1);
    // u(n+1, j, r)
    let c = at(t, 2, 0, -1) * at(ti, 1, 0, -1) * t * ti.t(1);
    // v(n, j, r)
    let d = at(t, 1, -1, 0) * at(ti, 0, -1, 0) * t * ti.t(1);
    (a - b - c + d).rms()
}

/// RMS of `tau(j+1) tau(r+1) - tau tau(j+1, r+1) + T tau(j+1) T^{-1} tau(r+1)`
/// for scalar tau.
pub fn bilinear_residual_scalar(tau: &LatticeField) -> Result<f64> {
    if tau.grid().dim != 1 {
        return Err(Error::DimensionError(tau.grid().dim));
    }
    let e = tau.j_shift(1) * tau.r_shift(1) - tau * tau.shifted(0, 1, 1) + tau.j_shift(1).t(1) * tau.r_shift(1).t(-1);
    Ok(e.rms())
}

#[cfg(test)]
mod tests {
    use super::super::{HirotaGrid, ShiftDirection};
    use super::*;
    use crate::rng;
    use crate::{CMat, C64};

    fn grid(dim: usize) -> HirotaGrid {
        HirotaGrid::new(4, 3, 5, dim).unwrap()
    }

    fn random_tau(seed: u64, dim: usize, dir: ShiftDirection) -> TauField {
        let mut r = rng::seeded(seed);
        let g = grid(dim).with_direction(dir);
        TauField::new(LatticeField::from_fn(g, |_, _, _| rng::well_conditioned(&mut r, dim))).unwrap()
    }

    #[test]
    fn lax_trivial_cases() {
        let g = grid(2);
        let z = LatticeField::zero(g);
        assert_eq!(lax_residuals(&z, &z, &z), (0.0, 0.0));
        let c = LatticeField::constant(g, &rng::matrix(&mut rng::seeded(1), 2));
        assert_eq!(lax_residuals(&c, &z, &z), (0.0, 0.0));
    }

    #[test]
    fn lax_on_back_propagated_field() {
        // With u = v = 0 the pair says f(j-1) = T f and f(r-1) = f, solved by
        // spreading one n-slice along j with the shift.
        let g = HirotaGrid::new(4, 4, 3, 2).unwrap();
        let mut r = rng::seeded(51);
        let slice: Vec<CMat> = (0..4).map(|_| rng::matrix(&mut r, 2)).collect();
        let f = LatticeField::from_fn(g, |n, j, _| slice[(n + 4 - j) % 4].clone());
        let z = LatticeField::zero(g);
        let (a, b) = lax_residuals(&f, &z, &z);
        assert!(a <= 1e-10 && b <= 1e-10);
    }

    #[test]
    fn compatibility_trivial_cases() {
        let g = grid(1);
        let one = LatticeField::unit(g);
        assert_eq!(compatibility_residuals(&one, &one), (0.0, 0.0));
        let z = LatticeField::zero(g);
        assert_eq!(compatibility_residuals(&z, &z), (0.0, 0.0));
    }

    #[test]
    fn substitution_trivial_cases() {
        let g = grid(2);
        let tau = TauField::new(LatticeField::unit(g)).unwrap();
        let (u, v) = tau_to_potentials(&tau);
        assert_eq!(u, LatticeField::unit(g));
        assert_eq!(v, LatticeField::unit(g));

        let a = C64::new(1.3, 0.4);
        let geo = LatticeField::scalar_fn(grid(1), |n, _, _| a.powi(n as i32 - 2));
        // a^n is not periodic; check away from the n wrap
        let (u, v) = tau_to_potentials(&TauField::new(geo).unwrap());
        for j in 0..3 {
            for r in 0..5 {
                for n in 1..3 {
                    assert!((u.scalar_at(n, j, r) - 1.0).norm() < 1e-13);
                    assert!((v.scalar_at(n, j, r) - 1.0).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn substitution_solves_second_equation() {
        for dir in [ShiftDirection::Forward, ShiftDirection::Backward] {
            for (seed, dim) in [(52, 1), (53, 2), (54, 3)] {
                let tau = random_tau(seed, dim, dir);
                let (u, v) = tau_to_potentials(&tau);
                let (_, e2) = compatibility_residuals(&u, &v);
                assert!(e2 <= 1e-12, "{dir:?} dim {dim}: {e2}");
            }
        }
    }

    #[test]
    fn nonabelian_bilinear_is_first_equation() {
        for dir in [ShiftDirection::Forward, ShiftDirection::Backward] {
            let tau = random_tau(55, 2, dir);
            let (u, v) = tau_to_potentials(&tau);
            let (e1, _) = compatibility_residuals(&u, &v);
            let nh = bilinear_residual_nonabelian(&tau);
            assert!(e1 > 1e-3);
            assert!((nh - e1).abs() <= 1e-12 * e1.max(1.0));
        }
        let one = TauField::new(LatticeField::unit(grid(2))).unwrap();
        assert_eq!(bilinear_residual_nonabelian(&one), 0.0);
    }

    #[test]
    fn scalar_bilinear_cases() {
        let g = grid(1);
        assert_eq!(bilinear_residual_scalar(&LatticeField::zero(g)).unwrap(), 0.0);
        assert!((bilinear_residual_scalar(&LatticeField::unit(g)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(bilinear_residual_scalar(&LatticeField::unit(grid(2))), Err(Error::DimensionError(2)));
    }
}
