//! Simulated two-photon polarization tomography and maximum-likelihood
//! reconstruction.
//!
//! The measurement set is the overcomplete product of {H, V, D, A, R, L} on
//! each photon: 36 rank-1 projectors grouped into 9 settings (one per pair of
//! analyzer bases), each setting resolving the identity. Observed counts are
//! normalized per setting before reconstruction.
//!
//! Reconstruction iterates ρ ← N[R ρ R] with R = Σ_k (f_k / p_k) Π_k. A step
//! that would lower the log-likelihood is replaced by the diluted step
//! ρ ← (1 − ε) ρ + ε N[R ρ R], halving ε until the likelihood does not drop,
//! so the likelihood sequence is non-decreasing.

use std::fmt;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::linalg::{c, kron_vec, max_abs_diff, Mat4, Vec4};
use crate::measures::CoherenceSummary;
use crate::random::rng_for;
use crate::state::{Polarization, TwoQubitState};

/// Two-photon projector label, e.g. `HV` for |H⟩_A|V⟩_B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectorLabel(pub Polarization, pub Polarization);

impl ProjectorLabel {
    /// Index of the analyzer-basis pair (0..9) this projector belongs to.
    pub fn setting(self) -> usize {
        basis_index(self.0) * 3 + basis_index(self.1)
    }
}

fn basis_index(p: Polarization) -> usize {
    match p {
        Polarization::H | Polarization::V => 0,
        Polarization::D | Polarization::A => 1,
        Polarization::R | Polarization::L => 2,
    }
}

impl fmt::Display for ProjectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0.symbol(), self.1.symbol())
    }
}

impl std::str::FromStr for ProjectorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (
            chars.next().and_then(Polarization::from_symbol),
            chars.next().and_then(Polarization::from_symbol),
            chars.next(),
        ) {
            (Some(a), Some(b), None) => Ok(ProjectorLabel(a, b)),
            _ => Err(Error::Invalid(format!("bad projector label {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Projector {
    pub label: ProjectorLabel,
    pub ket: Vec4,
    pub matrix: Mat4,
}

impl Projector {
    pub fn new(label: ProjectorLabel) -> Self {
        let ket = kron_vec(&label.0.ket(), &label.1.ket());
        let matrix = ket * ket.adjoint();
        Self { label, ket, matrix }
    }

    /// ⟨v|ρ|v⟩.
    pub fn probability(&self, rho: &Mat4) -> f64 {
        let v = &self.ket;
        let mut acc = c(0.0, 0.0);
        for i in 0..4 {
            let mut row = c(0.0, 0.0);
            for j in 0..4 {
                row += rho[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }
}

#[derive(Debug, Clone)]
pub struct ProjectorSet {
    projectors: Vec<Projector>,
}

impl ProjectorSet {
    /// All 36 products of {H, V, D, A, R, L}, photon A outer.
    pub fn standard() -> Self {
        let projectors = Polarization::ALL
            .iter()
            .flat_map(|&a| Polarization::ALL.iter().map(move |&b| ProjectorLabel(a, b)))
            .map(Projector::new)
            .collect();
        Self { projectors }
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn position(&self, label: ProjectorLabel) -> Option<usize> {
        self.projectors.iter().position(|p| p.label == label)
    }

    /// Born-rule probabilities Tr[ρ Π_k] in set order.
    pub fn probabilities(&self, rho: &TwoQubitState) -> Vec<f64> {
        self.projectors
            .iter()
            .map(|p| p.probability(rho.matrix()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub label: ProjectorLabel,
    pub counts: u64,
    /// Nominal number of detected pairs per measurement setting.
    pub total_per_setting: u64,
}

fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}

/// Poisson-distributed counts with means N·Tr[ρΠ] for every projector.
pub fn simulate_counts(
    rho: &TwoQubitState,
    set: &ProjectorSet,
    counts_per_setting: u64,
    seed: u64,
) -> Vec<MeasurementRecord> {
    let mut rng = rng_for(seed, 0);
    simulate_counts_with(rho, set, counts_per_setting, &mut rng)
}

pub fn simulate_counts_with<R: Rng + ?Sized>(
    rho: &TwoQubitState,
    set: &ProjectorSet,
    counts_per_setting: u64,
    rng: &mut R,
) -> Vec<MeasurementRecord> {
    let n = counts_per_setting as f64;
    set.projectors
        .iter()
        .map(|p| MeasurementRecord {
            label: p.label,
            counts: poisson_draw(rng, n * p.probability(rho.matrix()).max(0.0)),
            total_per_setting: counts_per_setting,
        })
        .collect()
}

/// Counts equal to the rounded Born-rule expectations, no shot noise.
pub fn expected_counts(
    rho: &TwoQubitState,
    set: &ProjectorSet,
    counts_per_setting: u64,
) -> Vec<MeasurementRecord> {
    let n = counts_per_setting as f64;
    set.projectors
        .iter()
        .map(|p| MeasurementRecord {
            label: p.label,
            counts: (n * p.probability(rho.matrix()).max(0.0)).round() as u64,
            total_per_setting: counts_per_setting,
        })
        .collect()
}

/// Counts normalized per measurement setting, in set order.
pub fn frequencies(records: &[MeasurementRecord], set: &ProjectorSet) -> Result<Vec<f64>> {
    let mut counts = vec![None; set.len()];
    for r in records {
        if let Some(k) = set.position(r.label) {
            counts[k] = Some(r.counts as f64);
        }
    }
    let counts: Vec<f64> = counts
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| Error::MissingProjector(set.projectors[k].label.to_string())))
        .collect::<Result<_>>()?;

    let mut totals = [0.0; 9];
    for (p, n) in set.projectors.iter().zip(&counts) {
        totals[p.label.setting()] += n;
    }
    set.projectors
        .iter()
        .zip(&counts)
        .map(|(p, n)| {
            let total = totals[p.label.setting()];
            if total > 0.0 {
                Ok(n / total)
            } else {
                Err(Error::Invalid(format!(
                    "measurement setting of {} recorded no events",
                    p.label
                )))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Stop once no matrix entry changes by more than this in one step.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial dilution used when a plain step lowers the likelihood.
    pub dilution: f64,
    /// Keep the log-likelihood of every iterate.
    pub record_likelihood: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            dilution: 0.1,
            record_likelihood: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub state: TwoQubitState,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Number of steps that needed dilution.
    pub diluted_steps: usize,
    /// Log-likelihood per iterate, starting at I/4 (empty unless requested).
    pub likelihood_trace: Vec<f64>,
}

/// Smallest probability used inside R; projectors with positive frequency and
/// vanishing model probability are handled by the diluted step.
const PROBABILITY_FLOOR: f64 = 1e-300;

fn log_likelihood(freqs: &[f64], set: &ProjectorSet, rho: &Mat4) -> f64 {
    set.projectors
        .iter()
        .zip(freqs)
        .filter(|(_, f)| **f > 0.0)
        .map(|(p, f)| f * p.probability(rho).max(PROBABILITY_FLOOR).ln())
        .sum()
}

fn normalize_trace(m: &Mat4) -> Mat4 {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let tr = h.trace().re;
    h / c(tr, 0.0)
}

/// Maximum-likelihood state for per-setting frequencies `freqs` (set order).
pub fn mle_from_frequencies(
    freqs: &[f64],
    set: &ProjectorSet,
    opts: &MleOptions,
) -> Result<MleResult> {
    if freqs.len() != set.len() {
        return Err(Error::Invalid(format!(
            "expected {} frequencies, got {}",
            set.len(),
            freqs.len()
        )));
    }
    if freqs.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(Error::Invalid(
            "frequencies must be finite and non-negative".into(),
        ));
    }

    let mut rho = *TwoQubitState::maximally_mixed().matrix();
    let mut ll = log_likelihood(freqs, set, &rho);
    let mut trace = Vec::new();
    if opts.record_likelihood {
        trace.push(ll);
    }
    let mut converged = false;
    let mut diluted_steps = 0;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut r = Mat4::zeros();
        for (p, f) in set.projectors.iter().zip(freqs) {
            if *f > 0.0 {
                let prob = p.probability(&rho).max(PROBABILITY_FLOOR);
                r += p.matrix * c(f / prob, 0.0);
            }
        }
        let rrr = normalize_trace(&(r * rho * r));

        let mut next = rrr;
        let mut next_ll = log_likelihood(freqs, set, &next);
        if next_ll.is_nan() || next_ll < ll {
            diluted_steps += 1;
            let mut eps = opts.dilution;
            loop {
                next = normalize_trace(&(rho * c(1.0 - eps, 0.0) + rrr * c(eps, 0.0)));
                next_ll = log_likelihood(freqs, set, &next);
                if next_ll >= ll {
                    break;
                }
                eps /= 2.0;
                if eps < 1e-12 {
                    // No ascent direction left at working precision.
                    next = rho;
                    next_ll = ll;
                    break;
                }
            }
        }

        let change = max_abs_diff(&next, &rho);
        rho = next;
        ll = next_ll;
        if opts.record_likelihood {
            trace.push(ll);
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    Ok(MleResult {
        state: TwoQubitState::projected(&rho),
        converged,
        iterations,
        log_likelihood: ll,
        diluted_steps,
        likelihood_trace: trace,
    })
}

/// Maximum-likelihood reconstruction from counts covering all projectors.
pub fn mle_reconstruct(
    records: &[MeasurementRecord],
    set: &ProjectorSet,
    tol: f64,
    max_iter: usize,
) -> Result<MleResult> {
    let opts = MleOptions {
        tol,
        max_iter,
        ..MleOptions::default()
    };
    mle_from_frequencies(&frequencies(records, set)?, set, &opts)
}

pub fn mle_reconstruct_with(
    records: &[MeasurementRecord],
    set: &ProjectorSet,
    opts: &MleOptions,
) -> Result<MleResult> {
    mle_from_frequencies(&frequencies(records, set)?, set, opts)
}

/// Sample standard deviations of the coherence quantities over replicates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Uncertainties {
    pub d_a: f64,
    pub d_b: f64,
    pub t2: f64,
    pub s2: f64,
}

impl Uncertainties {
    pub fn from_summaries(samples: &[CoherenceSummary]) -> Self {
        let sd = |f: &dyn Fn(&CoherenceSummary) -> f64| sample_std(samples.iter().map(f));
        Self {
            d_a: sd(&|s| s.d_a()),
            d_b: sd(&|s| s.d_b()),
            t2: sd(&|s| s.t2),
            s2: sd(&|s| s.s2()),
        }
    }
}

fn sample_std(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return 0.0;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub const MIN_REPLICATES: usize = 10;

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < MIN_REPLICATES {
        return Err(Error::OutOfRange {
            field: "replicates",
            value: replicates as f64,
            reason: "at least 10 replicates are required",
        });
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn map_replicates<F>(replicates: usize, f: F) -> Result<Vec<CoherenceSummary>>
where
    F: Fn(u64) -> Result<CoherenceSummary> + Sync + Send,
{
    use rayon::prelude::*;
    (0..replicates as u64).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_replicates<F>(replicates: usize, f: F) -> Result<Vec<CoherenceSummary>>
where
    F: Fn(u64) -> Result<CoherenceSummary>,
{
    (0..replicates as u64).map(f).collect()
}

/// Parametric bootstrap: every replicate redraws each count from a Poisson
/// distribution centred on the observed value and reruns the reconstruction.
pub fn resample_uncertainty(
    records: &[MeasurementRecord],
    set: &ProjectorSet,
    replicates: usize,
    seed: u64,
    opts: &MleOptions,
) -> Result<Uncertainties> {
    check_replicates(replicates)?;
    let summaries = map_replicates(replicates, |r| {
        let mut rng = rng_for(seed, r);
        let redrawn: Vec<MeasurementRecord> = records
            .iter()
            .map(|rec| MeasurementRecord {
                counts: poisson_draw(&mut rng, rec.counts as f64),
                ..*rec
            })
            .collect();
        let fit = mle_reconstruct_with(&redrawn, set, opts)?;
        Ok(CoherenceSummary::of(&fit.state))
    })?;
    Ok(Uncertainties::from_summaries(&summaries))
}

/// Spread over independent simulated runs of the whole experiment on the
/// known source state.
pub fn repeated_run_uncertainty(
    rho: &TwoQubitState,
    set: &ProjectorSet,
    counts_per_setting: u64,
    replicates: usize,
    seed: u64,
    opts: &MleOptions,
) -> Result<Uncertainties> {
    check_replicates(replicates)?;
    let summaries = map_replicates(replicates, |r| {
        let mut rng = rng_for(seed, r);
        let records = simulate_counts_with(rho, set, counts_per_setting, &mut rng);
        let fit = mle_reconstruct_with(&records, set, opts)?;
        Ok(CoherenceSummary::of(&fit.state))
    })?;
    Ok(Uncertainties::from_summaries(&summaries))
}

/// Writes records as `projector,counts,total_per_setting` CSV.
pub fn write_counts_csv<W: Write>(out: W, records: &[MeasurementRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Invalid(format!("counts CSV: {e}"));
    w.write_record(["projector", "counts", "total_per_setting"])
        .map_err(io)?;
    for r in records {
        w.write_record([
            r.label.to_string(),
            r.counts.to_string(),
            r.total_per_setting.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Invalid(format!("counts CSV: {e}")))
}

pub fn read_counts_csv<R: Read>(input: R) -> Result<Vec<MeasurementRecord>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rd
        .headers()
        .map_err(|e| Error::Invalid(format!("counts CSV: {e}")))?
        .clone();
    let expected = ["projector", "counts", "total_per_setting"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Invalid(format!(
            "counts CSV header must be {}",
            expected.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(|e| Error::Invalid(format!("counts CSV: {e}")))?;
        let field = |k: usize, name: &str| -> Result<u64> {
            row[k].parse().map_err(|_| {
                Error::Invalid(format!(
                    "counts CSV line {}: {name} {:?} is not a non-negative integer",
                    line + 2,
                    &row[k]
                ))
            })
        };
        out.push(MeasurementRecord {
            label: row[0].parse()?,
            counts: field(1, "counts")?,
            total_per_setting: field(2, "total_per_setting")?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{trace_product4, Mat4};
    use crate::measures::correlation_t2;
    use crate::state::{DensityMatrix, PureState2Q};

    #[test]
    fn projector_set_structure() {
        let set = ProjectorSet::standard();
        assert_eq!(set.len(), 36);
        for p in set.projectors() {
            assert!(max_abs_diff(&(p.matrix * p.matrix), &p.matrix) < 1e-12);
            assert!(max_abs_diff(&p.matrix, &p.matrix.adjoint()) < 1e-12);
        }
        // each setting resolves the identity
        for s in 0..9 {
            let sum = set
                .projectors()
                .iter()
                .filter(|p| p.label.setting() == s)
                .fold(Mat4::zeros(), |acc, p| acc + p.matrix);
            assert!(max_abs_diff(&sum, &Mat4::identity()) < 1e-12);
        }
    }

    #[test]
    fn single_photon_bases_are_mutually_unbiased() {
        use Polarization::*;
        let bases = [[H, V], [D, A], [R, L]];
        for (i, bi) in bases.iter().enumerate() {
            for bj in bases.iter().skip(i + 1) {
                for a in bi {
                    for b in bj {
                        let overlap = (a.ket().adjoint() * b.ket())[(0, 0)].norm_sqr();
                        assert!((overlap - 0.5).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn probabilities_match_trace_formula() {
        let rho = crate::random::random_mixed_state(&mut rng_for(5, 0));
        let set = ProjectorSet::standard();
        for p in set.projectors() {
            let direct = trace_product4(rho.matrix(), &p.matrix);
            assert!((p.probability(rho.matrix()) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn simulated_count_means() {
        let set = ProjectorSet::standard();
        let hh = PureState2Q::from_polarizations(Polarization::H, Polarization::H).density();
        let recs = simulate_counts(&hh, &set, 10_000, 1);
        let get = |l: &str| {
            let label: ProjectorLabel = l.parse().unwrap();
            recs.iter().find(|r| r.label == label).unwrap().counts
        };
        // Poisson(10⁴): 5σ = 500
        assert!((get("HH") as f64 - 10_000.0).abs() < 500.0);
        assert_eq!(get("VV"), 0);

        let bell = PureState2Q::phi_plus().density();
        let probs = set.probabilities(&bell);
        let dd = set.position("DD".parse().unwrap()).unwrap();
        assert!((probs[dd] - 0.5).abs() < 1e-12);
        let mean: f64 = (0..200)
            .map(|s| {
                let r = simulate_counts(&bell, &set, 10_000, s);
                r[dd].counts as f64
            })
            .sum::<f64>()
            / 200.0;
        // standard error √5000/√200 ≈ 5
        assert!((mean - 5_000.0).abs() < 25.0, "mean DD counts {mean}");
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let set = ProjectorSet::standard();
        let rho = PureState2Q::plus_plus().density();
        assert_eq!(
            simulate_counts(&rho, &set, 1000, 9),
            simulate_counts(&rho, &set, 1000, 9)
        );
    }

    #[test]
    fn noiseless_bell_reconstruction() {
        let set = ProjectorSet::standard();
        let psi = PureState2Q::phi_plus();
        let freqs = set.probabilities(&psi.density());
        let fit = mle_from_frequencies(&freqs, &set, &MleOptions::default()).unwrap();
        assert!(fit.state.fidelity_with_pure(&psi) > 0.999);
    }

    #[test]
    fn noiseless_maximally_mixed_reconstruction() {
        let set = ProjectorSet::standard();
        let freqs = set.probabilities(&TwoQubitState::maximally_mixed());
        let fit = mle_from_frequencies(&freqs, &set, &MleOptions::default()).unwrap();
        assert!((fit.state.purity() - 0.25).abs() < 1e-3);
        assert!(fit.converged);
    }

    #[test]
    fn likelihood_is_monotone() {
        let set = ProjectorSet::standard();
        let rho = crate::random::haar_pure_state(&mut rng_for(11, 0)).density();
        let recs = simulate_counts(&rho, &set, 2_000, 3);
        let opts = MleOptions {
            max_iter: 2_000,
            record_likelihood: true,
            ..MleOptions::default()
        };
        let fit = mle_reconstruct_with(&recs, &set, &opts).unwrap();
        for w in fit.likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn zero_probability_with_counts_still_reconstructs() {
        // Counts in a projector that the true state never populates.
        let set = ProjectorSet::standard();
        let hh = PureState2Q::from_polarizations(Polarization::H, Polarization::H).density();
        let mut recs = expected_counts(&hh, &set, 1_000);
        let vv = set.position("VV".parse().unwrap()).unwrap();
        recs[vv].counts = 3;
        let opts = MleOptions {
            max_iter: 5_000,
            record_likelihood: true,
            ..MleOptions::default()
        };
        let fit = mle_reconstruct_with(&recs, &set, &opts).unwrap();
        assert!(
            fit.state
                .fidelity_with_pure(&PureState2Q::from_polarizations(
                    Polarization::H,
                    Polarization::H
                ))
                > 0.99
        );
        for w in fit.likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn output_is_a_valid_state() {
        let set = ProjectorSet::standard();
        let rho = crate::random::haar_pure_state(&mut rng_for(12, 0)).density();
        let recs = simulate_counts(&rho, &set, 500, 4);
        let fit = mle_reconstruct(&recs, &set, 1e-10, 3_000).unwrap();
        let m = *fit.state.matrix();
        assert!(TwoQubitState::new(m).is_ok());
        assert!(fit.state.eigenvalues()[0] >= 0.0);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let set = ProjectorSet::standard();
        let psi = PureState2Q::phi_plus();
        let freqs = set.probabilities(&psi.density());
        let opts = MleOptions {
            max_iter: 3,
            ..MleOptions::default()
        };
        let fit = mle_from_frequencies(&freqs, &set, &opts).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 3);
    }

    #[test]
    fn missing_projector_is_rejected() {
        let set = ProjectorSet::standard();
        let recs = expected_counts(&TwoQubitState::maximally_mixed(), &set, 100);
        let err = mle_reconstruct(&recs[1..], &set, 1e-10, 10).unwrap_err();
        assert_eq!(err, Error::MissingProjector("HH".into()));
    }

    #[test]
    fn cphase_half_pi_t2_within_bound() {
        // Oracle run over 100 seeds at N = 10⁴ gave max |ΔT²| = 0.0055; bound 0.02.
        let set = ProjectorSet::standard();
        let u = crate::cphase::cphase_unitary(std::f64::consts::FRAC_PI_2);
        let rho = PureState2Q::plus_plus().density().evolve(&u);
        let truth = correlation_t2(&rho);
        let opts = MleOptions {
            tol: 1e-8,
            max_iter: 5_000,
            ..MleOptions::default()
        };
        for seed in 0..20 {
            let recs = simulate_counts(&rho, &set, 10_000, seed);
            let fit = mle_reconstruct_with(&recs, &set, &opts).unwrap();
            let est = correlation_t2(&fit.state);
            assert!((est - truth).abs() < 0.02, "seed {seed}: {est} vs {truth}");
        }
    }

    #[test]
    fn replicates_below_minimum_rejected() {
        let set = ProjectorSet::standard();
        let recs = expected_counts(&TwoQubitState::maximally_mixed(), &set, 100);
        assert!(matches!(
            resample_uncertainty(&recs, &set, 5, 0, &MleOptions::default()),
            Err(Error::OutOfRange {
                field: "replicates",
                ..
            })
        ));
    }

    #[test]
    fn bootstrap_spread_vanishes_for_huge_counts() {
        // Exact expectations at N = 10¹⁴ leave only ~1e-7 Poisson jitter.
        let set = ProjectorSet::standard();
        let rho = PureState2Q::phi_plus()
            .density()
            .with_white_noise(0.3)
            .unwrap();
        let recs = expected_counts(&rho, &set, 100_000_000_000_000);
        let u = resample_uncertainty(&recs, &set, 10, 1, &MleOptions::default()).unwrap();
        for v in [u.d_a, u.d_b, u.t2, u.s2] {
            assert!(v < 1e-6, "{u:?}");
        }
    }

    #[test]
    fn counts_csv_round_trip() {
        let set = ProjectorSet::standard();
        let recs = simulate_counts(&PureState2Q::psi_minus().density(), &set, 1234, 2);
        let mut buf = Vec::new();
        write_counts_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("projector,counts,total_per_setting\nHH,"));
        assert_eq!(read_counts_csv(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn counts_csv_rejects_garbage() {
        let bad = "projector,counts,total_per_setting\nHX,3,10\n";
        assert!(read_counts_csv(bad.as_bytes()).is_err());
        let bad = "projector,counts,total_per_setting\nHH,-3,10\n";
        assert!(read_counts_csv(bad.as_bytes()).is_err());
        let bad = "label,n\nHH,3\n";
        assert!(read_counts_csv(bad.as_bytes()).is_err());
    }
}
