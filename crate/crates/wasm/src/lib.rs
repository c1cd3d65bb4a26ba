//! Browser bindings for the demo page in `www/`.
//!
//! Curves are returned as flat row-major `Float64Array`s; each function
//! documents its row layout.

use std::f64::consts::PI;

use coherence_core::config::parse_state;
use coherence_core::cphase::{run_sweep, CPhaseConfig};
use coherence_core::measures::{accessible_coherence_s2, correlation_t2, witness};
use coherence_core::random::{haar_pure_state, rng_for};
use coherence_core::spdc::{pump_coherence_s2in, run_spdc_sweep, visibility, SpdcConfig};
use coherence_core::tomography::{
    mle_reconstruct_with, simulate_counts_with, MleOptions, ProjectorSet,
};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>, JsError> {
    if points < 2 {
        return Err(JsError::new("need at least 2 points"));
    }
    Ok((0..points)
        .map(|k| start + (end - start) * k as f64 / (points - 1) as f64)
        .collect())
}

/// c-phase sweep over φ ∈ [0, π]. Rows: `[phi_over_pi, D2_norm, T2_norm, S2, B]`.
#[wasm_bindgen]
pub fn cphase_curve(
    input_state: &str,
    white_noise_weight: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let input = parse_state(input_state)
        .ok_or_else(|| JsError::new(&format!("unknown input state {input_state:?}")))?;
    let cfg = CPhaseConfig {
        phis: grid(0.0, PI, points)?,
        input_state: input,
        white_noise_weight,
        tomography: None,
    };
    let rows = run_sweep(&cfg).map_err(js_err)?;
    let mut out = Vec::with_capacity(rows.len() * 5);
    for (r, phi) in rows.iter().zip(&cfg.phis) {
        let rho = coherence_core::cphase::output_state(&cfg, *phi).map_err(js_err)?;
        out.extend([r.x, r.d2_norm, r.t2_norm, r.s2, witness(&rho).b]);
    }
    Ok(out)
}

/// SPDC model over d ∈ [0, d_max]. Rows: `[d_um, visibility, S2_in, S2_out]`.
#[wasm_bindgen]
pub fn spdc_curve(
    fwhm_um: f64,
    fit_offset: f64,
    fit_amplitude: f64,
    d_max_um: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let cfg = SpdcConfig {
        displacements_um: grid(0.0, d_max_um, points)?,
        fwhm_um,
        fit_offset,
        fit_amplitude,
        ..SpdcConfig::default()
    };
    let rows = run_spdc_sweep(&cfg).map_err(js_err)?;
    let mut out = Vec::with_capacity(rows.len() * 4);
    for r in &rows {
        let d = r.result.x;
        out.extend([
            d,
            r.visibility,
            pump_coherence_s2in(visibility(d, &cfg)),
            r.s2_out(),
        ]);
    }
    Ok(out)
}

/// Simulated tomography of one random pure state.
/// Returns `[fidelity, T2_true, T2_est, S2_true, S2_est, iterations]`.
#[wasm_bindgen]
pub fn tomography_round_trip(seed: u32, counts_per_setting: u32) -> Result<Vec<f64>, JsError> {
    if counts_per_setting == 0 {
        return Err(JsError::new("counts_per_setting must be positive"));
    }
    let mut rng = rng_for(u64::from(seed), 0);
    let psi = haar_pure_state(&mut rng);
    let rho = psi.density();
    let set = ProjectorSet::standard();
    let records = simulate_counts_with(&rho, &set, u64::from(counts_per_setting), &mut rng);
    let opts = MleOptions {
        max_iter: 20_000,
        ..MleOptions::default()
    };
    let fit = mle_reconstruct_with(&records, &set, &opts).map_err(js_err)?;
    Ok(vec![
        fit.state.fidelity_with_pure(&psi),
        correlation_t2(&rho),
        correlation_t2(&fit.state),
        accessible_coherence_s2(&rho),
        accessible_coherence_s2(&fit.state),
        fit.iterations as f64,
    ])
}
