//! Executes a [`RunConfig`] and writes its CSV tables.
//!
//! | scenario | table | curves |
//! |---|---|---|
//! | cphase | `cphase_table.csv` | `cphase_curves.csv` |
//! | spdc | `spdc_table.csv` | `spdc_curves.csv` |
//! | conservation | `conservation.csv` | `conservation_summary.csv` |
//! | tomo-roundtrip | `tomography.csv` (+ `counts/`) | `tomography_summary.csv` |
//!
//! Numbers are written with six decimals. Output depends only on the config
//! and seed.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{
    CPhaseRun, ConservationRun, RunConfig, ScenarioConfig, SpdcRun, StateKind, TomoRoundtripRun,
};
use crate::cphase::{run_sweep, CPhaseConfig};
use crate::measures::{accessible_coherence_s2, correlation_t2, CoherenceSummary};
use crate::random::{
    derive_seed, haar_pure_state, haar_unitary4, random_mixed_state, random_state_any_rank, rng_for,
};
use crate::scenario::ScenarioResult;
use crate::spdc::{pump_coherence_s2in, run_spdc_sweep, visibility, SpdcConfig};
use crate::state::TwoQubitState;
use crate::tomography::{
    mle_reconstruct_with, read_counts_csv, resample_uncertainty, simulate_counts_with,
    write_counts_csv, ProjectorSet, Uncertainties,
};

pub const CPHASE_TABLE_HEADER: [&str; 11] = [
    "phi_over_pi",
    "D_A",
    "dD_A",
    "D_B",
    "dD_B",
    "T2",
    "dT2",
    "S2",
    "dS2",
    "D2_norm",
    "T2_norm",
];

pub const SPDC_TABLE_HEADER: [&str; 7] =
    ["d_um", "D_A", "D_B", "T2", "S2_out", "S2_in", "abs_diff"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] crate::error::Error),
    #[error("{0}")]
    Check(String),
}

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
    /// Non-fatal issues such as unconverged reconstructions.
    pub warnings: Vec<String>,
}

pub fn fmt6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(dir: &Path, name: &str, header: &[&str]) -> Result<Self, RunError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Ok(Self {
            path: dir.join(name),
            writer,
        })
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        self.writer
            .write_record(fields.into_iter().collect::<Vec<_>>())
            .expect("in-memory write");
    }

    fn finish(self, report: &mut RunReport) -> Result<(), RunError> {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        fs::write(&self.path, bytes).map_err(|source| RunError::Io {
            path: self.path.clone(),
            source,
        })?;
        report.files.push(self.path);
        Ok(())
    }
}

fn create_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Runs the configured scenario, writing into `cfg.output_path`.
pub fn run(cfg: &RunConfig) -> Result<RunReport, RunError> {
    create_dir(&cfg.output_path)?;
    let mut report = RunReport::default();
    match &cfg.scenario {
        ScenarioConfig::CPhase(run) => run_cphase(cfg, run, &mut report)?,
        ScenarioConfig::Spdc(run) => run_spdc(cfg, run, &mut report)?,
        ScenarioConfig::Conservation(run) => run_conservation(cfg, run, &mut report)?,
        ScenarioConfig::TomoRoundtrip(run) => run_tomography(cfg, run, &mut report)?,
    }
    Ok(report)
}

fn linspace(start: f64, end: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| start + (end - start) * k as f64 / (n - 1) as f64)
}

fn run_cphase(cfg: &RunConfig, run: &CPhaseRun, report: &mut RunReport) -> Result<(), RunError> {
    let mut sweep = run.sweep.clone();
    if let Some(t) = &mut sweep.tomography {
        t.seed = cfg.seed;
    }
    let rows = run_sweep(&sweep)?;

    let mut table = Table::new(&cfg.output_path, "cphase_table.csv", &CPHASE_TABLE_HEADER)?;
    for r in &rows {
        let u = r.uncertainty;
        table.row(
            [
                r.x, r.d_a, u.d_a, r.d_b, u.d_b, r.t2, u.t2, r.s2, u.s2, r.d2_norm, r.t2_norm,
            ]
            .map(fmt6),
        );
    }
    table.finish(report)?;

    // Theory curves use the exact gate output of the same input and noise.
    let dense = CPhaseConfig {
        phis: linspace(0.0, std::f64::consts::PI, run.curve_points).collect(),
        tomography: None,
        ..run.sweep.clone()
    };
    let curve = run_sweep(&dense)?;
    let d2_start = curve[0].d2_norm;
    let mut curves = Table::new(
        &cfg.output_path,
        "cphase_curves.csv",
        &[
            "phi_over_pi",
            "D",
            "T",
            "D2_norm",
            "T2_norm",
            "migrated_fraction",
        ],
    )?;
    for r in &curve {
        let migrated = if d2_start > 0.0 {
            (d2_start - r.d2_norm) / d2_start
        } else {
            0.0
        };
        curves.row(
            [
                r.x,
                r.d2_norm.max(0.0).sqrt(),
                r.t2_norm.sqrt(),
                r.d2_norm,
                r.t2_norm,
                migrated,
            ]
            .map(fmt6),
        );
    }
    curves.finish(report)?;

    report.summary.push(format!(
        "cphase: {} phases, S2 range [{}, {}]",
        rows.len(),
        fmt6(rows.iter().map(|r| r.s2).fold(f64::INFINITY, f64::min)),
        fmt6(rows.iter().map(|r| r.s2).fold(f64::NEG_INFINITY, f64::max)),
    ));
    Ok(())
}

fn run_spdc(cfg: &RunConfig, run: &SpdcRun, report: &mut RunReport) -> Result<(), RunError> {
    let rows = run_spdc_sweep(&run.sweep)?;
    let mut table = Table::new(&cfg.output_path, "spdc_table.csv", &SPDC_TABLE_HEADER)?;
    for r in &rows {
        let s: &ScenarioResult = &r.result;
        table.row([s.x, s.d_a, s.d_b, s.t2, s.s2, r.s2_in, r.abs_diff()].map(fmt6));
    }
    table.finish(report)?;

    let dense = SpdcConfig {
        displacements_um: linspace(0.0, run.curve_max_um, run.curve_points).collect(),
        ..run.sweep.clone()
    };
    let curve = run_spdc_sweep(&dense)?;
    let mut curves = Table::new(
        &cfg.output_path,
        "spdc_curves.csv",
        &[
            "d_um",
            "visibility",
            "S2_in",
            "S2_in_low",
            "S2_in_high",
            "S2_out",
        ],
    )?;
    for r in &curve {
        let d = r.result.x;
        let s2_in = pump_coherence_s2in(visibility(d, &run.sweep));
        curves.row(
            [
                d,
                r.visibility,
                s2_in,
                s2_in - run.s2_in_band,
                s2_in + run.s2_in_band,
                r.s2_out(),
            ]
            .map(fmt6),
        );
    }
    curves.finish(report)?;

    let worst = rows.iter().map(|r| r.abs_diff()).fold(0.0, f64::max);
    report.summary.push(format!(
        "spdc: {} displacements, max |S2_out - S2_in| = {worst:e}",
        rows.len()
    ));
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct ConservationSample {
    rank: usize,
    before: f64,
    after: f64,
}

fn conservation_sample(seed: u64, index: u64) -> ConservationSample {
    let mut rng = rng_for(derive_seed(seed, index), 0);
    let rho = random_state_any_rank(&mut rng);
    let u = haar_unitary4(&mut rng);
    let rank = rho.eigenvalues().iter().filter(|v| **v > 1e-12).count();
    ConservationSample {
        rank,
        before: accessible_coherence_s2(&rho),
        after: accessible_coherence_s2(&rho.evolve(&u)),
    }
}

/// S² before and after a Haar-random global unitary for `samples` random
/// states of rank 1–4, in sample order.
pub fn conservation_samples(seed: u64, samples: usize) -> Vec<(usize, f64, f64)> {
    #[cfg(feature = "parallel")]
    let out: Vec<ConservationSample> = {
        use rayon::prelude::*;
        (0..samples as u64)
            .into_par_iter()
            .map(|i| conservation_sample(seed, i))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let out: Vec<ConservationSample> = (0..samples as u64)
        .map(|i| conservation_sample(seed, i))
        .collect();
    out.into_iter()
        .map(|s| (s.rank, s.before, s.after))
        .collect()
}

fn run_conservation(
    cfg: &RunConfig,
    run: &ConservationRun,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let samples = conservation_samples(cfg.seed, run.samples);
    let mut table = Table::new(
        &cfg.output_path,
        "conservation.csv",
        &["sample", "rank", "S2_before", "S2_after", "abs_diff"],
    )?;
    let mut worst = 0.0_f64;
    let mut total = 0.0;
    for (i, (rank, before, after)) in samples.iter().enumerate() {
        let diff = (after - before).abs();
        worst = worst.max(diff);
        total += diff;
        table.row([
            i.to_string(),
            rank.to_string(),
            fmt6(*before),
            fmt6(*after),
            format!("{diff:.3e}"),
        ]);
    }
    table.finish(report)?;

    let passed = worst < run.tolerance;
    let mut summary = Table::new(
        &cfg.output_path,
        "conservation_summary.csv",
        &[
            "samples",
            "max_abs_diff",
            "mean_abs_diff",
            "tolerance",
            "passed",
        ],
    )?;
    summary.row([
        samples.len().to_string(),
        format!("{worst:.3e}"),
        format!("{:.3e}", total / samples.len() as f64),
        format!("{:.3e}", run.tolerance),
        passed.to_string(),
    ]);
    summary.finish(report)?;

    report.summary.push(format!(
        "conservation: {} pairs, max |dS2| = {worst:.3e} (tolerance {:.1e})",
        samples.len(),
        run.tolerance
    ));
    if !passed {
        return Err(RunError::Check(format!(
            "conservation violated: max |dS2| = {worst:e} exceeds {:e}",
            run.tolerance
        )));
    }
    Ok(())
}

fn run_tomography(
    cfg: &RunConfig,
    run: &TomoRoundtripRun,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let set = ProjectorSet::standard();
    if let Some(path) = &run.counts_file {
        return reconstruct_counts_file(cfg, run, path, &set, report);
    }

    let counts_dir = cfg.output_path.join("counts");
    create_dir(&counts_dir)?;
    let mut table = Table::new(
        &cfg.output_path,
        "tomography.csv",
        &[
            "sample",
            "fidelity",
            "T2_true",
            "T2_est",
            "S2_true",
            "S2_est",
            "iterations",
            "converged",
        ],
    )?;
    let mut fidelities = Vec::with_capacity(run.states);
    for i in 0..run.states {
        let mut rng = rng_for(derive_seed(cfg.seed, i as u64), 0);
        let (rho, pure) = match run.state_kind {
            StateKind::Pure => {
                let psi = haar_pure_state(&mut rng);
                (psi.density(), Some(psi))
            }
            StateKind::Mixed => (random_mixed_state(&mut rng), None),
            StateKind::AnyRank => (random_state_any_rank(&mut rng), None),
        };
        let records = simulate_counts_with(&rho, &set, run.counts_per_setting, &mut rng);
        let counts_path = counts_dir.join(format!("sample_{i:04}.csv"));
        let mut buf = Vec::new();
        write_counts_csv(&mut buf, &records)?;
        fs::write(&counts_path, buf).map_err(|source| RunError::Io {
            path: counts_path.clone(),
            source,
        })?;

        let fit = mle_reconstruct_with(&records, &set, &run.mle)?;
        if !fit.converged {
            report.warnings.push(format!(
                "sample {i}: reconstruction stopped after {} iterations without converging",
                fit.iterations
            ));
        }
        let fidelity = match &pure {
            Some(psi) => fit.state.fidelity_with_pure(psi),
            None => rho.fidelity(&fit.state),
        };
        fidelities.push(fidelity);
        table.row([
            i.to_string(),
            fmt6(fidelity),
            fmt6(correlation_t2(&rho)),
            fmt6(correlation_t2(&fit.state)),
            fmt6(accessible_coherence_s2(&rho)),
            fmt6(accessible_coherence_s2(&fit.state)),
            fit.iterations.to_string(),
            fit.converged.to_string(),
        ]);
    }
    table.finish(report)?;

    let min = fidelities.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = fidelities.iter().sum::<f64>() / fidelities.len() as f64;
    let mut summary = Table::new(
        &cfg.output_path,
        "tomography_summary.csv",
        &[
            "states",
            "counts_per_setting",
            "min_fidelity",
            "mean_fidelity",
        ],
    )?;
    summary.row([
        run.states.to_string(),
        run.counts_per_setting.to_string(),
        fmt6(min),
        fmt6(mean),
    ]);
    summary.finish(report)?;
    report.summary.push(format!(
        "tomo-roundtrip: {} states at N = {}, fidelity min {} mean {}",
        run.states,
        run.counts_per_setting,
        fmt6(min),
        fmt6(mean)
    ));
    Ok(())
}

fn reconstruct_counts_file(
    cfg: &RunConfig,
    run: &TomoRoundtripRun,
    path: &Path,
    set: &ProjectorSet,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let file = fs::File::open(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let records = read_counts_csv(file)?;
    let fit = mle_reconstruct_with(&records, set, &run.mle)?;
    if !fit.converged {
        report.warnings.push(format!(
            "reconstruction stopped after {} iterations without converging",
            fit.iterations
        ));
    }
    let s = CoherenceSummary::of(&fit.state);
    let u = if run.replicates > 0 {
        resample_uncertainty(&records, set, run.replicates, cfg.seed, &run.mle)?
    } else {
        Uncertainties::default()
    };
    let mut table = Table::new(
        &cfg.output_path,
        "reconstruction.csv",
        &[
            "D_A",
            "dD_A",
            "D_B",
            "dD_B",
            "T2",
            "dT2",
            "S2",
            "dS2",
            "purity",
            "iterations",
            "converged",
        ],
    )?;
    let mut fields: Vec<String> = [
        s.d_a(),
        u.d_a,
        s.d_b(),
        u.d_b,
        s.t2,
        u.t2,
        s.s2(),
        u.s2,
        s.purity,
    ]
    .map(fmt6)
    .to_vec();
    fields.push(fit.iterations.to_string());
    fields.push(fit.converged.to_string());
    table.row(fields);
    table.finish(report)?;

    let mut m = Table::new(
        &cfg.output_path,
        "reconstruction_matrix.csv",
        &["row", "col", "re", "im"],
    )?;
    let rho: &TwoQubitState = &fit.state;
    for r in 0..4 {
        for c in 0..4 {
            let z = rho.matrix()[(r, c)];
            m.row([r.to_string(), c.to_string(), fmt6(z.re), fmt6(z.im)]);
        }
    }
    m.finish(report)?;

    report.summary.push(format!(
        "reconstructed {}: T2 = {}, S2 = {}, purity = {}",
        path.display(),
        fmt6(s.t2),
        fmt6(s.s2()),
        fmt6(s.purity)
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn config_in(dir: &Path, body: &str) -> RunConfig {
        let mut cfg = parse_config(body).unwrap();
        cfg.output_path = dir.to_path_buf();
        cfg
    }

    fn read(path: &Path) -> String {
        fs::read_to_string(path).unwrap()
    }

    #[test]
    fn fmt6_is_fixed_and_signless_at_zero() {
        assert_eq!(fmt6(0.123456789), "0.123457");
        assert_eq!(fmt6(-1e-12), "0.000000");
        assert_eq!(fmt6(158.0), "158.000000");
        assert_eq!(fmt6(f64::NAN), "nan");
    }

    #[test]
    fn cphase_table_first_row() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_in(dir.path(), "scenario = \"cphase\"\n[cphase]\n");
        let report = run(&cfg).unwrap();
        assert_eq!(report.files.len(), 2);
        let text = read(&dir.path().join("cphase_table.csv"));
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CPHASE_TABLE_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "0.000000,0.707107,0.000000,0.707107,0.000000,0.500000,0.000000,1.000000,0.000000,0.500000,0.500000"
        );
        assert_eq!(lines.count(), 6);
        let curves = read(&dir.path().join("cphase_curves.csv"));
        assert_eq!(curves.lines().count(), 202);
        assert!(curves
            .lines()
            .last()
            .unwrap()
            .starts_with("1.000000,0.000000,1.000000"));
    }

    #[test]
    fn spdc_table_header_and_s2_in() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_in(dir.path(), "scenario = \"spdc\"\n[spdc]\n");
        run(&cfg).unwrap();
        let text = read(&dir.path().join("spdc_table.csv"));
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "d_um,D_A,D_B,T2,S2_out,S2_in,abs_diff"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "0.000000");
        assert_eq!(first[6], "0.000000");
        let s2_in: f64 = first[5].parse().unwrap();
        assert!((s2_in - 0.974).abs() < 0.005);
    }

    #[test]
    fn conservation_small_run() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_in(
            dir.path(),
            "scenario = \"conservation\"\n[conservation]\nsamples = 200\n",
        );
        let report = run(&cfg).unwrap();
        let summary = read(&dir.path().join("conservation_summary.csv"));
        assert!(summary.lines().nth(1).unwrap().ends_with(",true"));
        assert!(report.summary[0].starts_with("conservation: 200 pairs"));
    }

    #[test]
    fn conservation_failure_is_a_check_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_in(
            dir.path(),
            "scenario = \"conservation\"\n[conservation]\nsamples = 20\ntolerance = 1e-30\n",
        );
        assert!(matches!(run(&cfg), Err(RunError::Check(_))));
    }

    #[test]
    fn tomography_round_trip_through_counts_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_in(
            dir.path(),
            "scenario = \"tomo-roundtrip\"\n[tomo-roundtrip]\nstates = 2\ncounts_per_setting = 5000\n",
        );
        run(&cfg).unwrap();
        let table = read(&dir.path().join("tomography.csv"));
        assert_eq!(table.lines().count(), 3);
        let counts = dir.path().join("counts").join("sample_0001.csv");
        assert!(counts.exists());

        let out2 = dir.path().join("again");
        let body = format!(
            "scenario = \"tomo-roundtrip\"\n[tomo-roundtrip]\ncounts_file = {:?}\nreplicates = 10\n",
            counts.display().to_string()
        );
        let cfg2 = config_in(&out2, &body);
        let report = run(&cfg2).unwrap();
        let rec = read(&out2.join("reconstruction.csv"));
        let row: Vec<&str> = rec.lines().nth(1).unwrap().split(',').collect();
        let t2_est: f64 = row[4].parse().unwrap();
        let line = table.lines().nth(2).unwrap();
        let t2_first: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((t2_est - t2_first).abs() < 1e-6, "{t2_est} vs {t2_first}");
        assert!(report
            .files
            .iter()
            .any(|f| f.ends_with("reconstruction_matrix.csv")));
    }

    #[test]
    fn missing_counts_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_in(
            dir.path(),
            "scenario = \"tomo-roundtrip\"\n[tomo-roundtrip]\ncounts_file = \"/nonexistent/x.csv\"\n",
        );
        assert!(matches!(run(&cfg), Err(RunError::Io { .. })));
    }
}
