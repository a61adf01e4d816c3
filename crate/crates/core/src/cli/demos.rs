use std::fmt::Write as _;

use serde_json::json;

use super::suite::{closure_sigma0, hirota_dressing, nahm_compatibility, nahm_instance, tau_reproduction, stream, CONVERGENCE_STEPS, RK4_ORDER};
use super::{CliError, Output, RunConfig, VerificationReport};
use crate::chains::{build_zs_chain, zs_chain_step, zs_constraint_residual};
use crate::hirota::{
    bilinear_residual_nonabelian, bilinear_residual_scalar, compatibility_residuals, dress_wavefunction, lax_residuals,
    periodic_closure,
};
use crate::nahm::{dress_nahm, integrate_nahm, spectral_seed};
use crate::ring::{rel_diff, RingContext, RingElement};
use crate::{rng, CMat, C64};

fn pairs(f: &RingElement) -> Vec<[f64; 2]> {
    f.values().iter().map(|m| [m[(0, 0)].re, m[(0, 0)].im]).collect()
}

/// Periodic closure of the scalar chain, then one dressing of the constant
/// background with the tau field and the dressed potentials written out.
pub(crate) fn hirota_demo(config: &RunConfig) -> Result<VerificationReport, CliError> {
    let out = Output::new(config)?;
    let mut report = VerificationReport::new(config.clone());

    let closure = periodic_closure(&closure_sigma0(config), config.p, config.delta)?;
    report.check("closure_reconstruction", 1e-10, || Ok(closure.residual));
    report.value("closure_monodromy", [closure.monodromy.re, closure.monodromy.im]);
    report.value("closure_log_branch_warnings", closure.warnings.len());
    out.artifact(
        "closure",
        || {
            let mut s = String::from("n,a_re,a_im,phi_re,phi_im\n");
            for (n, (a, p)) in closure.a.values().iter().zip(closure.phi.values()).enumerate() {
                let (a, p) = (a[(0, 0)], p[(0, 0)]);
                writeln!(s, "{n},{:e},{:e},{:e},{:e}", a.re, a.im, p.re, p.im).expect("write to string");
            }
            s
        },
        || json!({ "a": pairs(&closure.a), "phi": pairs(&closure.phi), "monodromy": [closure.monodromy.re, closure.monodromy.im] }),
    )?;

    let (bg, dressed) = hirota_dressing(config)?;
    let (u, v) = (&dressed.u.field, &dressed.v.field);
    let (c1, c2) = compatibility_residuals(u, v);
    report.check("dressed_compatibility_first", 1e-9, || Ok(c1));
    report.check("dressed_compatibility_second", 1e-9, || Ok(c2));
    report.check("dressed_u_link", 1e-10, || Ok(dressed.u.link_residual));
    report.check("dressed_v_link", 1e-10, || Ok(dressed.v.link_residual));
    report.check("tau_reproduction", 1e-10, || Ok(tau_reproduction(&dressed)));
    let mut r = stream(config, 11);
    let other = bg.combination(&rng::matrix(&mut r, config.dim), &rng::matrix(&mut r, config.dim));
    let (l1, l2) = lax_residuals(&dress_wavefunction(&other, &dressed.sigma), u, v);
    report.check("dressed_lax_pair", 1e-9, || Ok(l1.max(l2)));
    report.value("bilinear_nonabelian", bilinear_residual_nonabelian(&dressed.tau));
    if config.dim == 1 {
        report.value("bilinear_scalar", bilinear_residual_scalar(dressed.tau.field())?);
    }

    out.artifact("tau", || dressed.tau.field().to_csv(), || dressed.tau.field().to_json())?;
    out.artifact("u", || u.to_csv(), || u.to_json())?;
    out.artifact("v", || v.to_csv(), || v.to_json())?;
    out.report(&report)?;
    Ok(report)
}

/// Integrates the Nahm system, dresses the trajectory and reports the
/// residual curves and the step-halving ratio.
pub(crate) fn nahm_demo(config: &RunConfig) -> Result<VerificationReport, CliError> {
    let out = Output::new(config)?;
    let mut report = VerificationReport::new(config.clone());
    let (phi, z) = nahm_instance(config)?;

    let span = config.span.max(config.step);
    let h = span / CONVERGENCE_STEPS;
    let end = |h: f64| integrate_nahm(&phi, span, h).map(|t| t.last().clone());
    let (e1, e2, e4) = (end(h)?, end(h / 2.0)?, end(h / 4.0)?);
    let (d1, d2) = (e1.axpy(-1.0, &e2).norm(), e2.axpy(-1.0, &e4).norm());
    // commuting data has no error to shrink
    let ratio = if d2 > 0.0 { d1 / d2 } else { 16.0 };
    report.value("endpoint_shrink_ratio", ratio);
    report.check("rk4_order_deficit", 0.0, || Ok((RK4_ORDER - ratio.log2()).max(0.0)));

    let traj = integrate_nahm(&phi, config.span, config.step)?;
    report.check("compatibility", 1e-8, || nahm_compatibility(&traj.points));
    let sigma = RingElement::constant(3, &spectral_seed(&phi, &z)?);
    let dressed = dress_nahm(&traj, &sigma, &CMat::zeros(config.dim, config.dim), 1e-9)?;
    report.check("dressed_nahm_residual", 1e-6, || Ok(dressed.max_nahm_residual()));
    report.check("seed_drift", 1e-7, || Ok(dressed.max_riccati_residual()));

    out.artifact("trajectory", || traj.to_csv(), || traj.to_json())?;
    out.artifact("dressed", || dressed.dressed.to_csv(), || dressed.dressed.to_json())?;
    out.artifact(
        "residuals",
        || {
            let mut s = String::from("y,nahm_residual,riccati_residual\n");
            for (k, (a, b)) in dressed.nahm_residuals.iter().zip(&dressed.riccati_residuals).enumerate() {
                writeln!(s, "{:e},{a:e},{b:e}", traj.y(k)).expect("write to string");
            }
            s
        },
        || {
            let y: Vec<f64> = (0..traj.points.len()).map(|k| traj.y(k)).collect();
            json!({ "y": y, "nahm_residual": dressed.nahm_residuals, "riccati_residual": dressed.riccati_residuals })
        },
    )?;
    out.report(&report)?;
    Ok(report)
}

fn entries(m: &CMat) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |k| (i, k, m[(i, k)])))
}

/// Successive dressings of `J + U T` with the chain relations checked link
/// by link.
pub(crate) fn chain_demo(config: &RunConfig) -> Result<VerificationReport, CliError> {
    let out = Output::new(config)?;
    let mut report = VerificationReport::new(config.clone());
    let c = RingContext::new(config.sites, config.dim)?;
    let mut r = stream(config, 4);
    let j = RingElement::constant(c.sites, &rng::matrix(&mut r, c.dim));
    let u = c.random_element(&mut r);
    let chain = build_zs_chain(&c, &j, &u, config.chain_length)?;

    for (n, (st, op)) in chain.states.iter().zip(&chain.operators).enumerate() {
        report.check(&format!("link{n}_constraint"), 1e-8, || zs_constraint_residual(st, &op.coeff_or_zero(1)));
        report.check(&format!("link{n}_potential"), 1e-8, || Ok(rel_diff(&st.potential(), &op.coeff_or_zero(1))));
    }
    for (n, w) in chain.states.windows(2).enumerate() {
        report.check(&format!("step{n}"), 1e-8, || {
            zs_chain_step(&w[0], &w[1].sigma, f64::INFINITY).map(|next| rel_diff(&next.s, &w[1].s))
        });
    }

    out.artifact(
        "chain",
        || {
            let mut s = String::from("n,site,i,k,sigma_re,sigma_im,s_re,s_im\n");
            for st in &chain.states {
                for (site, (a, b)) in st.sigma.values().iter().zip(st.s.values()).enumerate() {
                    for ((i, k, x), (_, _, y)) in entries(a).zip(entries(b)) {
                        writeln!(s, "{},{site},{i},{k},{:e},{:e},{:e},{:e}", st.n, x.re, x.im, y.re, y.im)
                            .expect("write to string");
                    }
                }
            }
            s
        },
        || {
            let field = |f: &RingElement| -> Vec<Vec<[f64; 2]>> {
                f.values().iter().map(|m| entries(m).map(|(_, _, z)| [z.re, z.im]).collect()).collect()
            };
            let states: Vec<_> = chain.states.iter().map(|st| json!({ "n": st.n, "sigma": field(&st.sigma), "s": field(&st.s) })).collect();
            json!({ "sites": c.sites, "dim": c.dim, "states": states })
        },
    )?;
    out.report(&report)?;
    Ok(report)
}
