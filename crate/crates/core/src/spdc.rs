//! Entangled-pair generation from a partially coherent pump.
//!
//! The pump's H and V components are displaced by `d`; the measured
//! interference visibility follows a Gaussian fit
//! V(d) = offset + amplitude · exp(−(d/σ)²) with σ = FWHM / (2√ln 2).
//! A pump with visibility V has polarization purity S²_in = (1 + V²)/2.
//!
//! The photon pairs are modeled as ρ = p|Ψ⁻⟩⟨Ψ⁻| + (1 − p)|Ψ⁺⟩⟨Ψ⁺| with
//! p = (1 + V)/2, the singlet fraction whose correlation T² equals S²_in.
//! Note the sign: (1 + V²)/2 is the purity of a qubit whose off-diagonal
//! element is V/2, ranging from 1/2 (incoherent) to 1 (fully coherent).

use crate::error::{Error, Result};
use crate::measures::CoherenceSummary;
use crate::scenario::ScenarioResult;
use crate::state::{PureState2Q, TwoQubitState};

/// Bias-corrected pump displacements of the published ten-point sweep, µm.
pub const DEFAULT_DISPLACEMENTS_UM: [f64; 10] = [
    0.0, 26.0, 42.0, 56.0, 72.0, 86.0, 100.0, 120.0, 138.0, 158.0,
];

#[derive(Debug, Clone, PartialEq)]
pub struct SpdcConfig {
    /// Bias-corrected H/V pump displacements, µm.
    pub displacements_um: Vec<f64>,
    pub fit_offset: f64,
    pub fit_amplitude: f64,
    pub fwhm_um: f64,
    /// Two-photon interference visibility measured on a triplet state.
    pub triplet_visibility: f64,
    /// Birefringent delay of the crystal cascade, subtracted from raw delays.
    pub bias_um: f64,
}

impl Default for SpdcConfig {
    fn default() -> Self {
        Self {
            displacements_um: DEFAULT_DISPLACEMENTS_UM.to_vec(),
            fit_offset: 0.029,
            fit_amplitude: 0.945,
            fwhm_um: 142.0,
            triplet_visibility: 0.94,
            bias_um: 84.0,
        }
    }
}

impl SpdcConfig {
    /// Config whose displacements are raw delays minus `bias_um`.
    pub fn from_raw_delays(raw_um: &[f64], base: SpdcConfig) -> Self {
        let displacements_um = raw_um.iter().map(|d| d - base.bias_um).collect();
        Self {
            displacements_um,
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        let range = |field, value, reason| {
            Err(Error::OutOfRange {
                field,
                value,
                reason,
            })
        };
        if !(self.fwhm_um > 0.0 && self.fwhm_um.is_finite()) {
            return range("fwhm_um", self.fwhm_um, "must be positive");
        }
        if self.fit_offset.is_nan() || self.fit_offset < 0.0 {
            return range("fit_offset", self.fit_offset, "must be non-negative");
        }
        if self.fit_amplitude.is_nan() || self.fit_amplitude < 0.0 {
            return range("fit_amplitude", self.fit_amplitude, "must be non-negative");
        }
        if self.fit_offset + self.fit_amplitude > 1.0 + 1e-6 {
            return range(
                "fit_amplitude",
                self.fit_offset + self.fit_amplitude,
                "offset + amplitude must not exceed 1",
            );
        }
        if !(self.triplet_visibility > 0.0 && self.triplet_visibility <= 1.0) {
            return range(
                "triplet_visibility",
                self.triplet_visibility,
                "must lie in (0, 1]",
            );
        }
        if let Some(d) = self.displacements_um.iter().find(|d| !d.is_finite()) {
            return range("displacements_um", *d, "must be finite");
        }
        Ok(())
    }

    /// Gaussian width σ = FWHM / (2√ln 2).
    pub fn sigma_um(&self) -> f64 {
        self.fwhm_um / (2.0 * std::f64::consts::LN_2.sqrt())
    }
}

/// Fitted pump visibility at displacement `d_um`.
pub fn visibility(d_um: f64, cfg: &SpdcConfig) -> f64 {
    let x = d_um / cfg.sigma_um();
    cfg.fit_offset + cfg.fit_amplitude * (-x * x).exp()
}

/// Purity of the pump polarization state, (1 + V²)/2.
pub fn pump_coherence_s2in(v: f64) -> f64 {
    (1.0 + v * v) / 2.0
}

/// Weight p of |Ψ⁻⟩ in the Ψ⁻/Ψ⁺ mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingletMixture {
    p: f64,
}

impl SingletMixture {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                field: "p",
                value: p,
                reason: "singlet fraction must lie in [0, 1]",
            });
        }
        Ok(Self { p })
    }

    pub fn p(self) -> f64 {
        self.p
    }
}

fn check_unit(field: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange {
            field,
            value: v,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

/// p = (1 + V)/2, so that T² of the mixture equals (1 + V²)/2.
pub fn singlet_fraction(v: f64) -> Result<SingletMixture> {
    check_unit("visibility", v)?;
    SingletMixture::new((1.0 + v) / 2.0)
}

/// p|Ψ⁻⟩⟨Ψ⁻| + (1 − p)|Ψ⁺⟩⟨Ψ⁺|.
pub fn mixture_state(m: SingletMixture) -> TwoQubitState {
    PureState2Q::psi_plus()
        .density()
        .mix(&PureState2Q::psi_minus().density(), m.p)
        .expect("weight already validated")
}

fn check_interference_visibility(v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::OutOfRange {
            field: "interference_visibility",
            value: v,
            reason: "must lie in (0, 1]",
        });
    }
    Ok(())
}

/// Coincidence (antibunching) probability behind a balanced beam splitter:
/// (1 − v)/2 + p·v. Within the interfering fraction v only the singlet
/// antibunches. The distinguishable fraction 1 − v antibunches half the time.
pub fn antibunch_probability(m: SingletMixture, interference_visibility: f64) -> Result<f64> {
    check_interference_visibility(interference_visibility)?;
    let v = interference_visibility;
    Ok((1.0 - v) / 2.0 + m.p * v)
}

/// Singlet fraction that explains an observed antibunching probability.
pub fn invert_antibunch(probability: f64, interference_visibility: f64) -> Result<SingletMixture> {
    check_interference_visibility(interference_visibility)?;
    let v = interference_visibility;
    let low = (1.0 - v) / 2.0;
    let high = (1.0 + v) / 2.0;
    let p = (probability - low) / v;
    if probability < low - 1e-9 || probability > high + 1e-9 || !p.is_finite() {
        return Err(Error::OutOfModel {
            probability,
            low,
            high,
            clamped: if p.is_finite() {
                p.clamp(0.0, 1.0)
            } else {
                0.5
            },
        });
    }
    SingletMixture::new(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcRow {
    pub result: ScenarioResult,
    pub visibility: f64,
    pub singlet_fraction: f64,
    /// Antibunching probability the model predicts at the triplet visibility.
    pub antibunch_probability: f64,
    pub s2_in: f64,
}

impl SpdcRow {
    pub fn s2_out(&self) -> f64 {
        self.result.s2
    }

    pub fn abs_diff(&self) -> f64 {
        (self.result.s2 - self.s2_in).abs()
    }
}

/// V(d) → p → ρ → (D_A, D_B, T², S²_out), compared with S²_in(d). The singlet
/// fraction goes through the antibunching readout and its visibility
/// correction, as it would for measured data.
pub fn run_spdc_sweep(cfg: &SpdcConfig) -> Result<Vec<SpdcRow>> {
    cfg.validate()?;
    cfg.displacements_um
        .iter()
        .map(|&d| {
            let v = visibility(d, cfg);
            let mixture = singlet_fraction(v)?;
            let observed = antibunch_probability(mixture, cfg.triplet_visibility)?;
            let corrected = invert_antibunch(observed, cfg.triplet_visibility)?;
            let rho = mixture_state(corrected);
            Ok(SpdcRow {
                result: ScenarioResult::from_summary(d, &CoherenceSummary::of(&rho)),
                visibility: v,
                singlet_fraction: corrected.p(),
                antibunch_probability: observed,
                s2_in: pump_coherence_s2in(v),
            })
        })
        .collect()
}
