//! Tunable controlled-phase gate acting on two polarization qubits.
//!
//! The gate multiplies |VV⟩ by e^{iφ} and leaves the other basis states alone.
//! On |++⟩ it moves local coherence into correlations:
//! D²(φ) = cos²(φ/2)/2 and T²(φ) = 1 − cos²(φ/2)/2, with S² = 1 throughout.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, Mat4, Vec4};
use crate::measures::CoherenceSummary;
use crate::random::{derive_seed, rng_for};
use crate::scenario::ScenarioResult;
use crate::state::PureState2Q;
use crate::tomography::{
    mle_reconstruct_with, repeated_run_uncertainty, resample_uncertainty, simulate_counts_with,
    MleOptions, ProjectorSet,
};

/// Phase settings of the published seven-point sweep, in units of π.
pub const DEFAULT_PHIS_OVER_PI: [f64; 7] = [0.0, 0.05, 0.125, 0.25, 0.5, 0.75, 1.0];

/// diag(1, 1, 1, e^{iφ}) in the (HH, HV, VH, VV) basis.
pub fn cphase_unitary(phi: f64) -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(phi.cos(), phi.sin()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealPoint {
    pub d2: f64,
    pub t2: f64,
}

/// Closed-form D² and T² of the gate output for input |++⟩.
pub fn ideal_curves(phi: f64) -> IdealPoint {
    let c2 = (phi / 2.0).cos().powi(2);
    IdealPoint {
        d2: c2 / 2.0,
        t2: 1.0 - c2 / 2.0,
    }
}

/// Fraction of the input local coherence that has moved into correlations,
/// sin²(φ/2) for input |++⟩.
pub fn migrated_fraction(phi: f64) -> f64 {
    (phi / 2.0).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UncertaintyEstimator {
    /// Parametric bootstrap around the observed counts.
    #[default]
    PoissonResample,
    /// Independent simulated repetitions of the measurement.
    RepeatedRuns,
}

/// Settings for reconstructing each sweep point from simulated counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographySettings {
    pub counts_per_setting: u64,
    pub replicates: usize,
    pub estimator: UncertaintyEstimator,
    pub mle: MleOptions,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CPhaseConfig {
    pub phis: Vec<f64>,
    pub input_state: PureState2Q,
    /// w in ρ → (1 − w) ρ + w I/4.
    pub white_noise_weight: f64,
    pub tomography: Option<TomographySettings>,
}

impl Default for CPhaseConfig {
    fn default() -> Self {
        Self {
            phis: DEFAULT_PHIS_OVER_PI.iter().map(|x| x * PI).collect(),
            input_state: PureState2Q::plus_plus(),
            white_noise_weight: 0.0,
            tomography: None,
        }
    }
}

impl CPhaseConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self.phis.iter().find(|p| !p.is_finite()) {
            return Err(Error::OutOfRange {
                field: "phis",
                value: *bad,
                reason: "phases must be finite",
            });
        }
        let w = self.white_noise_weight;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::OutOfRange {
                field: "white_noise_weight",
                value: w,
                reason: "must lie in [0, 1]",
            });
        }
        if let Some(t) = &self.tomography {
            if t.counts_per_setting == 0 {
                return Err(Error::OutOfRange {
                    field: "counts_per_setting",
                    value: 0.0,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }
}

/// Gate output for one phase, before any tomography.
pub fn output_state(cfg: &CPhaseConfig, phi: f64) -> Result<crate::state::TwoQubitState> {
    cfg.input_state
        .density()
        .evolve(&cphase_unitary(phi))
        .with_white_noise(cfg.white_noise_weight)
}

/// Runs the sweep in the order of `cfg.phis`. `x` of each row is φ/π.
pub fn run_sweep(cfg: &CPhaseConfig) -> Result<Vec<ScenarioResult>> {
    cfg.validate()?;
    let set = ProjectorSet::standard();
    cfg.phis
        .iter()
        .enumerate()
        .map(|(idx, &phi)| {
            let rho = output_state(cfg, phi)?;
            let Some(tomo) = &cfg.tomography else {
                return Ok(ScenarioResult::from_summary(
                    phi / PI,
                    &CoherenceSummary::of(&rho),
                ));
            };
            let point_seed = derive_seed(tomo.seed, idx as u64);
            let mut rng = rng_for(point_seed, 0);
            let records = simulate_counts_with(&rho, &set, tomo.counts_per_setting, &mut rng);
            let fit = mle_reconstruct_with(&records, &set, &tomo.mle)?;
            let mut row = ScenarioResult::from_summary(phi / PI, &CoherenceSummary::of(&fit.state));
            let boot_seed = derive_seed(point_seed, 1);
            row.uncertainty = match tomo.estimator {
                UncertaintyEstimator::PoissonResample => {
                    resample_uncertainty(&records, &set, tomo.replicates, boot_seed, &tomo.mle)?
                }
                UncertaintyEstimator::RepeatedRuns => repeated_run_uncertainty(
                    &rho,
                    &set,
                    tomo.counts_per_setting,
                    tomo.replicates,
                    boot_seed,
                    &tomo.mle,
                )?,
            };
            Ok(row)
        })
        .collect()
}
