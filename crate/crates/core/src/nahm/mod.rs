//! The three-term spectral problem `L = u T + v + w T^{-1}` with evolution
//! `E = p T + q`, its gauged Darboux transform, and the reduction of the
//! compatibility system to the Nahm equations for lattice-constant fields.

mod dressing;
mod io;
mod operators;
mod reduction;

pub use dressing::{dress_nahm, dressed_point, seed_residual, spectral_seed, DressedTrajectory, GaugeState};
pub use operators::{
    compatibility_residuals, dt_three_term, dt_three_term_wavefunction, evolution_dt, riccati_residual, sigma_evolution,
    sigma_flow, three_term_apply, EvolutionOperator, ThreeTermOperator,
};
pub use reduction::{
    coeffs_to_fields, fields_to_coeffs, integrate_nahm, integrate_nahm_bounded, levi_civita, matrices_to_fields,
    nahm_defect, nahm_rhs, self_convergence_order, NahmTriple, Trajectory, DEFAULT_MAX_STEPS,
};
