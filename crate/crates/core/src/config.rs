//! Run configuration files.
//!
//! A config is a TOML document with three top-level keys and exactly one
//! scenario table, whose name must match `scenario`:
//!
//! ```toml
//! scenario = "spdc"          # cphase | spdc | conservation | tomo-roundtrip
//! seed = 1729                # optional, defaults to DEFAULT_SEED
//! output_path = "out/spdc"   # optional, defaults to "out"
//!
//! [spdc]
//! fwhm_um = 142.0
//! ```
//!
//! Every key inside a scenario table is optional and falls back to the
//! defaults listed in `configs/` and the README. Unknown keys are errors.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cphase::{CPhaseConfig, TomographySettings, UncertaintyEstimator, DEFAULT_PHIS_OVER_PI};
use crate::spdc::{SpdcConfig, DEFAULT_DISPLACEMENTS_UM};
use crate::state::{Polarization, PureState2Q};
use crate::tomography::{MleOptions, MIN_REPLICATES};

pub const DEFAULT_SEED: u64 = 1729;
pub const DEFAULT_OUTPUT: &str = "out";

const SCENARIOS: [&str; 4] = ["cphase", "spdc", "conservation", "tomo-roundtrip"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Dotted key path, e.g. `spdc.fwhm_um`; empty for document-level errors.
    pub field: String,
    /// 1-based source line, when it can be located.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    seed: Option<u64>,
    output_path: Option<String>,
    cphase: Option<RawCPhase>,
    spdc: Option<RawSpdc>,
    conservation: Option<RawConservation>,
    #[serde(rename = "tomo-roundtrip")]
    tomo_roundtrip: Option<RawTomoRoundtrip>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCPhase {
    phis_over_pi: Option<Vec<f64>>,
    input_state: Option<String>,
    white_noise_weight: Option<f64>,
    curve_points: Option<usize>,
    tomography: Option<RawCPhaseTomography>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCPhaseTomography {
    counts_per_setting: Option<u64>,
    replicates: Option<usize>,
    estimator: Option<String>,
    tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpdc {
    displacements_um: Option<Vec<f64>>,
    raw_delays_um: Option<Vec<f64>>,
    fit_offset: Option<f64>,
    fit_amplitude: Option<f64>,
    fwhm_um: Option<f64>,
    triplet_visibility: Option<f64>,
    bias_um: Option<f64>,
    s2_in_band: Option<f64>,
    curve_points: Option<usize>,
    curve_max_um: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConservation {
    samples: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTomoRoundtrip {
    states: Option<usize>,
    state_kind: Option<String>,
    counts_per_setting: Option<u64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    replicates: Option<usize>,
    counts_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CPhaseRun {
    pub sweep: CPhaseConfig,
    pub curve_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpdcRun {
    pub sweep: SpdcConfig,
    /// Half-width of the S²_in band in the curve output.
    pub s2_in_band: f64,
    pub curve_points: usize,
    pub curve_max_um: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationRun {
    pub samples: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    Mixed,
    AnyRank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomoRoundtripRun {
    pub states: usize,
    pub state_kind: StateKind,
    pub counts_per_setting: u64,
    pub mle: MleOptions,
    /// Bootstrap replicates for the counts-file path; 0 disables.
    pub replicates: usize,
    /// Reconstruct this measured count table instead of simulating states.
    pub counts_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioConfig {
    CPhase(CPhaseRun),
    Spdc(SpdcRun),
    Conservation(ConservationRun),
    TomoRoundtrip(TomoRoundtripRun),
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::CPhase(_) => "cphase",
            ScenarioConfig::Spdc(_) => "spdc",
            ScenarioConfig::Conservation(_) => "conservation",
            ScenarioConfig::TomoRoundtrip(_) => "tomo-roundtrip",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_path: PathBuf,
    pub scenario: ScenarioConfig,
}

impl RunConfig {
    /// Default configuration of a scenario, as shipped in `configs/`.
    pub fn default_for(scenario: &str) -> Option<Self> {
        let text = format!("scenario = \"{scenario}\"\n[{scenario}]\n");
        parse_config(&text).ok()
    }
}

/// Line number (1-based) of `key` inside table `section` (None = root).
fn find_line(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_matches(|ch| ch == '[' || ch == ']').trim();
            current = Some(name.trim_matches('"').to_string());
            if key.is_empty() && current.as_deref() == section {
                return Some(idx + 1);
            }
            continue;
        }
        if key.is_empty() || current.as_deref() != section {
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            if k.trim().trim_matches('"') == key {
                return Some(idx + 1);
            }
        }
    }
    None
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Checker<'a> {
    text: &'a str,
    diags: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn push(&mut self, section: Option<&str>, key: &str, message: String) {
        let field = match section {
            Some(s) if key.is_empty() => s.to_string(),
            Some(s) => format!("{s}.{key}"),
            None => key.to_string(),
        };
        let line = find_line(self.text, section, key);
        self.diags.push(Diagnostic {
            field,
            line,
            message,
        });
    }

    fn check(&mut self, ok: bool, section: &str, key: &str, message: impl FnOnce() -> String) {
        if !ok {
            self.push(Some(section), key, message());
        }
    }
}

/// Input state by name: "++", "phi+", "phi-", "psi+", "psi-", or a pair of
/// polarization symbols such as "HV" or "DR".
pub fn parse_state(name: &str) -> Option<PureState2Q> {
    match name.trim().to_ascii_lowercase().as_str() {
        "++" => Some(PureState2Q::plus_plus()),
        "phi+" => Some(PureState2Q::phi_plus()),
        "phi-" => Some(PureState2Q::phi_minus()),
        "psi+" => Some(PureState2Q::psi_plus()),
        "psi-" => Some(PureState2Q::psi_minus()),
        s if s.chars().count() == 2 => {
            let mut it = s.chars();
            let a = Polarization::from_symbol(it.next()?)?;
            let b = Polarization::from_symbol(it.next()?)?;
            Some(PureState2Q::from_polarizations(a, b))
        }
        _ => None,
    }
}

/// Parses and validates a config. On failure returns every diagnostic found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<Diagnostic>> {
    let raw: RawConfig = match toml::from_str(text) {
        Ok(raw) => raw,
        Err(e) => {
            return Err(vec![Diagnostic {
                field: String::new(),
                line: e.span().map(|s| line_of_offset(text, s.start)),
                message: e.message().to_string(),
            }])
        }
    };
    let mut ck = Checker {
        text,
        diags: Vec::new(),
    };

    let present: Vec<&str> = [
        raw.cphase.is_some().then_some("cphase"),
        raw.spdc.is_some().then_some("spdc"),
        raw.conservation.is_some().then_some("conservation"),
        raw.tomo_roundtrip.is_some().then_some("tomo-roundtrip"),
    ]
    .into_iter()
    .flatten()
    .collect();

    if !SCENARIOS.contains(&raw.scenario.as_str()) {
        ck.push(
            None,
            "scenario",
            format!(
                "unknown scenario {:?}, expected one of {}",
                raw.scenario,
                SCENARIOS.join(", ")
            ),
        );
    }
    match present.as_slice() {
        [] => ck.push(
            None,
            "",
            format!("missing scenario table [{}]", raw.scenario),
        ),
        [one] if *one != raw.scenario && SCENARIOS.contains(&raw.scenario.as_str()) => ck.push(
            Some(one),
            "",
            format!("table [{one}] does not match scenario {:?}", raw.scenario),
        ),
        [_] => {}
        many => ck.push(
            Some(many[1]),
            "",
            format!(
                "exactly one scenario table is allowed, found {}",
                many.join(", ")
            ),
        ),
    }

    let scenario = match raw.scenario.as_str() {
        "cphase" => raw
            .cphase
            .map(|b| ScenarioConfig::CPhase(cphase_block(&mut ck, b))),
        "spdc" => raw
            .spdc
            .map(|b| ScenarioConfig::Spdc(spdc_block(&mut ck, b))),
        "conservation" => raw
            .conservation
            .map(|b| ScenarioConfig::Conservation(conservation_block(&mut ck, b))),
        "tomo-roundtrip" => raw
            .tomo_roundtrip
            .map(|b| ScenarioConfig::TomoRoundtrip(tomo_block(&mut ck, b))),
        _ => None,
    };

    match scenario {
        Some(scenario) if ck.diags.is_empty() => Ok(RunConfig {
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            output_path: PathBuf::from(raw.output_path.unwrap_or_else(|| DEFAULT_OUTPUT.into())),
            scenario,
        }),
        _ => Err(ck.diags),
    }
}

fn cphase_block(ck: &mut Checker, b: RawCPhase) -> CPhaseRun {
    const S: &str = "cphase";
    let phis_over_pi = b
        .phis_over_pi
        .unwrap_or_else(|| DEFAULT_PHIS_OVER_PI.to_vec());
    ck.check(
        phis_over_pi.iter().all(|p| p.is_finite()),
        S,
        "phis_over_pi",
        || "phases must be finite".into(),
    );
    ck.check(!phis_over_pi.is_empty(), S, "phis_over_pi", || {
        "at least one phase is required".into()
    });
    let input_state = match b.input_state.as_deref() {
        None => PureState2Q::plus_plus(),
        Some(name) => parse_state(name).unwrap_or_else(|| {
            ck.push(
                Some(S),
                "input_state",
                format!(
                    "unknown state {name:?}; use ++, phi+, phi-, psi+, psi- or a pair such as HV"
                ),
            );
            PureState2Q::plus_plus()
        }),
    };
    let w = b.white_noise_weight.unwrap_or(0.0);
    ck.check((0.0..=1.0).contains(&w), S, "white_noise_weight", || {
        format!("must lie in [0, 1] (got {w})")
    });
    let curve_points = b.curve_points.unwrap_or(201);
    ck.check(curve_points >= 2, S, "curve_points", || {
        format!("must be at least 2 (got {curve_points})")
    });

    let tomography = b.tomography.map(|t| {
        const T: &str = "cphase.tomography";
        let counts = t.counts_per_setting.unwrap_or(10_000);
        ck.check(counts > 0, T, "counts_per_setting", || {
            "must be positive".into()
        });
        let replicates = t.replicates.unwrap_or(50);
        ck.check(replicates >= MIN_REPLICATES, T, "replicates", || {
            format!("must be at least {MIN_REPLICATES} (got {replicates})")
        });
        let estimator = match t.estimator.as_deref().unwrap_or("poisson") {
            "poisson" => UncertaintyEstimator::PoissonResample,
            "repeated" => UncertaintyEstimator::RepeatedRuns,
            other => {
                ck.push(
                    Some(T),
                    "estimator",
                    format!("unknown estimator {other:?}, expected poisson or repeated"),
                );
                UncertaintyEstimator::PoissonResample
            }
        };
        let mle = mle_options(ck, T, t.tol, t.max_iter);
        TomographySettings {
            counts_per_setting: counts,
            replicates,
            estimator,
            mle,
            seed: 0,
        }
    });

    CPhaseRun {
        sweep: CPhaseConfig {
            phis: phis_over_pi.iter().map(|p| p * PI).collect(),
            input_state,
            white_noise_weight: w,
            tomography,
        },
        curve_points,
    }
}

fn mle_options(
    ck: &mut Checker,
    section: &str,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> MleOptions {
    let defaults = MleOptions::default();
    let tol = tol.unwrap_or(defaults.tol);
    ck.check(tol > 0.0 && tol.is_finite(), section, "tol", || {
        format!("must be positive (got {tol})")
    });
    let max_iter = max_iter.unwrap_or(defaults.max_iter);
    ck.check(max_iter >= 1, section, "max_iter", || {
        "must be at least 1".into()
    });
    MleOptions {
        tol,
        max_iter,
        ..defaults
    }
}

fn spdc_block(ck: &mut Checker, b: RawSpdc) -> SpdcRun {
    const S: &str = "spdc";
    let base = SpdcConfig::default();
    let mut cfg = SpdcConfig {
        displacements_um: DEFAULT_DISPLACEMENTS_UM.to_vec(),
        fit_offset: b.fit_offset.unwrap_or(base.fit_offset),
        fit_amplitude: b.fit_amplitude.unwrap_or(base.fit_amplitude),
        fwhm_um: b.fwhm_um.unwrap_or(base.fwhm_um),
        triplet_visibility: b.triplet_visibility.unwrap_or(base.triplet_visibility),
        bias_um: b.bias_um.unwrap_or(base.bias_um),
    };
    match (b.displacements_um, b.raw_delays_um) {
        (Some(_), Some(_)) => ck.push(
            Some(S),
            "raw_delays_um",
            "give either displacements_um or raw_delays_um, not both".into(),
        ),
        (Some(d), None) => cfg.displacements_um = d,
        (None, Some(raw)) => cfg = SpdcConfig::from_raw_delays(&raw, cfg),
        (None, None) => {}
    }
    ck.check(
        cfg.fwhm_um > 0.0 && cfg.fwhm_um.is_finite(),
        S,
        "fwhm_um",
        || format!("must be positive (got {})", cfg.fwhm_um),
    );
    ck.check(cfg.fit_offset >= 0.0, S, "fit_offset", || {
        format!("must be non-negative (got {})", cfg.fit_offset)
    });
    ck.check(cfg.fit_amplitude >= 0.0, S, "fit_amplitude", || {
        format!("must be non-negative (got {})", cfg.fit_amplitude)
    });
    ck.check(
        cfg.fit_offset + cfg.fit_amplitude <= 1.0 + 1e-6,
        S,
        "fit_amplitude",
        || {
            format!(
                "fit_offset + fit_amplitude must not exceed 1 (got {})",
                cfg.fit_offset + cfg.fit_amplitude
            )
        },
    );
    ck.check(
        cfg.triplet_visibility > 0.0 && cfg.triplet_visibility <= 1.0,
        S,
        "triplet_visibility",
        || format!("must lie in (0, 1] (got {})", cfg.triplet_visibility),
    );
    ck.check(
        cfg.displacements_um.iter().all(|d| d.is_finite()),
        S,
        "displacements_um",
        || "displacements must be finite".into(),
    );
    let s2_in_band = b.s2_in_band.unwrap_or(0.010);
    ck.check(s2_in_band >= 0.0, S, "s2_in_band", || {
        format!("must be non-negative (got {s2_in_band})")
    });
    let curve_points = b.curve_points.unwrap_or(171);
    ck.check(curve_points >= 2, S, "curve_points", || {
        format!("must be at least 2 (got {curve_points})")
    });
    let curve_max_um = b.curve_max_um.unwrap_or(170.0);
    ck.check(curve_max_um > 0.0, S, "curve_max_um", || {
        format!("must be positive (got {curve_max_um})")
    });
    SpdcRun {
        sweep: cfg,
        s2_in_band,
        curve_points,
        curve_max_um,
    }
}

fn conservation_block(ck: &mut Checker, b: RawConservation) -> ConservationRun {
    const S: &str = "conservation";
    let samples = b.samples.unwrap_or(10_000);
    ck.check(samples >= 1, S, "samples", || "must be at least 1".into());
    let tolerance = b.tolerance.unwrap_or(1e-10);
    ck.check(tolerance > 0.0, S, "tolerance", || {
        format!("must be positive (got {tolerance})")
    });
    ConservationRun { samples, tolerance }
}

fn tomo_block(ck: &mut Checker, b: RawTomoRoundtrip) -> TomoRoundtripRun {
    const S: &str = "tomo-roundtrip";
    let states = b.states.unwrap_or(50);
    ck.check(states >= 1, S, "states", || "must be at least 1".into());
    let state_kind = match b.state_kind.as_deref().unwrap_or("pure") {
        "pure" => StateKind::Pure,
        "mixed" => StateKind::Mixed,
        "any-rank" => StateKind::AnyRank,
        other => {
            ck.push(
                Some(S),
                "state_kind",
                format!("unknown state kind {other:?}, expected pure, mixed or any-rank"),
            );
            StateKind::Pure
        }
    };
    let counts = b.counts_per_setting.unwrap_or(10_000);
    ck.check(counts > 0, S, "counts_per_setting", || {
        "must be positive".into()
    });
    let mle = mle_options(ck, S, b.tol, b.max_iter);
    let replicates = b.replicates.unwrap_or(0);
    ck.check(
        replicates == 0 || replicates >= MIN_REPLICATES,
        S,
        "replicates",
        || format!("must be 0 or at least {MIN_REPLICATES} (got {replicates})"),
    );
    TomoRoundtripRun {
        states,
        state_kind,
        counts_per_setting: counts,
        mle,
        replicates,
        counts_file: b.counts_file.map(PathBuf::from),
    }
}

/// Diagnostics for a config text without running it; empty means valid.
pub fn validate_text(text: &str) -> Vec<Diagnostic> {
    match parse_config(text) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

pub fn validate_file(path: &Path) -> std::io::Result<Vec<Diagnostic>> {
    Ok(validate_text(&std::fs::read_to_string(path)?))
}
