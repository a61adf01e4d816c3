use dressing_chain::bell::{bell_minus, bell_plus};
use dressing_chain::nahm::{coeffs_to_fields, fields_to_coeffs, nahm_rhs, NahmTriple};
use dressing_chain::ring::rel_diff;
use dressing_chain::{rng, RingContext, C64};
use proptest::prelude::*;

fn setup() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..12, 1usize..4, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shifts_compose((sites, d, seed) in setup(), a in -20i64..20, b in -20i64..20) {
        let f = RingContext::new(sites, d).unwrap().random_element(&mut rng::seeded(seed));
        prop_assert_eq!(f.shift(a).shift(b), f.shift(a + b));
        prop_assert_eq!(f.shift(sites as i64), f);
    }

    #[test]
    fn shift_is_multiplicative((sites, d, seed) in setup(), m in -5i64..5) {
        let c = RingContext::new(sites, d).unwrap();
        let mut r = rng::seeded(seed);
        let (f, g) = (c.random_element(&mut r), c.random_element(&mut r));
        prop_assert!(rel_diff(&(&f * &g).shift(m), &(f.shift(m) * g.shift(m))) <= 1e-15);
    }

    #[test]
    fn inverse_is_two_sided((sites, d, seed) in setup()) {
        let c = RingContext::new(sites, d).unwrap();
        let f = c.random_invertible(&mut rng::seeded(seed));
        let inv = f.inverse().unwrap();
        prop_assert!(rel_diff(&(&f * &inv), &c.unit()) <= 1e-11);
        prop_assert!(rel_diff(&(&inv * &f), &c.unit()) <= 1e-11);
    }

    #[test]
    fn bell_reconstructs_shifts((sites, d, seed) in setup(), m in 0usize..8) {
        let phi = RingContext::new(sites, d).unwrap().random_invertible(&mut rng::seeded(seed));
        let sp = &phi * phi.shift(1).inverse().unwrap();
        let sm = &phi * phi.shift(-1).inverse().unwrap();
        let target = phi.shift(m as i64);
        prop_assert!(rel_diff(&target, &(bell_plus(&sp, m).unwrap() * &phi)) <= 1e-10);
        prop_assert!(rel_diff(&target, &(bell_minus(&sm, m) * phi.shift(-1))) <= 1e-10);
    }

    #[test]
    fn nahm_fields_round_trip(d in 1usize..4, seed in any::<u64>(), ar in 0.2f64..2.0, at in 0.0f64..6.0) {
        let mut r = rng::seeded(seed);
        let alpha = C64::from_polar(ar, at);
        let beta = rng::complex(&mut r);
        let phi = NahmTriple::new(rng::matrix(&mut r, d), rng::matrix(&mut r, d), rng::matrix(&mut r, d), alpha, beta).unwrap();
        let (l, _) = fields_to_coeffs(&phi, 3).unwrap();
        let back = coeffs_to_fields(&l, alpha, beta).unwrap();
        prop_assert!(back.axpy(-1.0, &phi).norm() <= 1e-12 * phi.norm().max(1.0));
    }

    #[test]
    fn nahm_flow_is_traceless(d in 1usize..5, seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let phi = NahmTriple::new(rng::matrix(&mut r, d), rng::matrix(&mut r, d), rng::matrix(&mut r, d), C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        for f in nahm_rhs(&phi).fields() {
            prop_assert!(f.trace().norm() <= 1e-12 * phi.norm().max(1.0).powi(2));
        }
    }
}
