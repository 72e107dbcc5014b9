//! Maximum-likelihood fit of [`UtilityParams`] from binary channel choices.
//!
//! Records are aggregated into cells keyed by treatment and grid decision, so
//! a likelihood evaluation costs one logit per distinct cell regardless of
//! how many subjects were observed. Cells are kept in a sorted map, which
//! makes the likelihood independent of record order and subject labels.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::choice::{
    logistic, utility_difference, ChannelA, ChannelB, TreatmentConfig, UtilityParams,
};
use crate::design::{mix_seed, resolve_decision, stream_rng, ChoiceRecord};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::optim::NelderMead;

/// Probability clamp applied inside the likelihood only.
const P_MIN: f64 = 1e-300;
const P_MAX: f64 = 1.0 - 1e-16;

/// Which components of θ are estimated. Fixed components take their value
/// from [`FitOptions::fixed`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeParams {
    pub c_line: bool,
    pub c_agent: bool,
    pub c_bot: bool,
    pub c_nt: bool,
    pub beta_base: bool,
    pub beta_nudge: bool,
}

impl Default for FreeParams {
    fn default() -> Self {
        FreeParams {
            c_line: true,
            c_agent: true,
            c_bot: true,
            c_nt: true,
            beta_base: true,
            beta_nudge: true,
        }
    }
}

impl FreeParams {
    fn mask(&self) -> [bool; 6] {
        [
            self.c_line,
            self.c_agent,
            self.c_bot,
            self.c_nt,
            self.beta_base,
            self.beta_nudge,
        ]
    }

    /// The parameters that `records` can identify.
    pub fn identifiable(records: &[ChoiceRecord]) -> Self {
        FreeParams {
            c_nt: records.iter().any(|r| !r.treatment.transparency),
            beta_base: records.iter().any(|r| !r.treatment.nudge),
            beta_nudge: records.iter().any(|r| r.treatment.nudge),
            ..FreeParams::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub n_starts: usize,
    pub max_iterations: usize,
    /// Relative change in the objective that counts as converged.
    pub tolerance: f64,
    /// Standard deviation of the log-scale perturbation of random starts.
    pub start_dispersion: f64,
    pub seed: u64,
    pub free: FreeParams,
    /// Values of fixed components, and the heuristic start for free ones.
    pub fixed: UtilityParams,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            n_starts: 8,
            max_iterations: 20_000,
            tolerance: 1e-8,
            start_dispersion: 0.5,
            seed: 0,
            free: FreeParams::default(),
            fixed: heuristic_start(),
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidParameter(
                "n_starts must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance = {}",
                self.tolerance
            )));
        }
        if !(self.start_dispersion >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "start_dispersion = {}",
                self.start_dispersion
            )));
        }
        self.fixed.validate()
    }
}

/// 0.01 for every cost and 1 for both multipliers.
pub fn heuristic_start() -> UtilityParams {
    UtilityParams {
        c_line: 0.01,
        c_agent: 0.01,
        c_bot: 0.01,
        c_nt: 0.01,
        beta_base: 1.0,
        beta_nudge: 1.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta_hat: UtilityParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub n_function_evals: usize,
    pub start_index_of_best: usize,
    /// Log-likelihood at each start point, in start order.
    pub start_log_likelihoods: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Standard deviation of replicate estimates; zero for fixed components
    /// and when fewer than two replicates succeeded.
    pub standard_errors: [f64; 6],
    pub replicate_estimates: Vec<[f64; 6]>,
    pub n_replicates: usize,
    /// Replicates dropped because their fit hit the iteration cap.
    pub n_skipped: usize,
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    a: ChannelA,
    b: ChannelB,
    treatment: TreatmentConfig,
}

/// Choice data aggregated by (treatment, set, position).
#[derive(Clone, Debug)]
pub struct ChoiceData {
    cells: Vec<Cell>,
    trials: Vec<f64>,
    chose_b: Vec<f64>,
    /// Per subject (sorted by id): `(cell, trials, chose_b)` triples.
    subjects: Vec<Vec<(usize, f64, f64)>>,
}

type CellKey = (TreatmentConfig, u8, u8);

impl ChoiceData {
    pub fn from_records(records: &[ChoiceRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("choice records"));
        }
        let mut keys: BTreeMap<CellKey, usize> = BTreeMap::new();
        for r in records {
            keys.insert((r.treatment, r.set_index, r.position), 0);
        }
        let mut cells = Vec::with_capacity(keys.len());
        for (i, ((t, set, pos), idx)) in keys.iter_mut().enumerate() {
            let d = resolve_decision(*set, *pos, t)?;
            cells.push(Cell {
                a: d.a,
                b: d.b,
                treatment: *t,
            });
            *idx = i;
        }
        let mut per_subject: BTreeMap<u64, BTreeMap<usize, (f64, f64)>> = BTreeMap::new();
        let mut trials = vec![0.0; cells.len()];
        let mut chose_b = vec![0.0; cells.len()];
        for r in records {
            let c = keys[&(r.treatment, r.set_index, r.position)];
            let y = if r.chose_b { 1.0 } else { 0.0 };
            trials[c] += 1.0;
            chose_b[c] += y;
            let e = per_subject
                .entry(r.subject_id)
                .or_default()
                .entry(c)
                .or_insert((0.0, 0.0));
            e.0 += 1.0;
            e.1 += y;
        }
        let subjects = per_subject
            .into_values()
            .map(|m| m.into_iter().map(|(c, (n, k))| (c, n, k)).collect())
            .collect();
        Ok(ChoiceData {
            cells,
            trials,
            chose_b,
            subjects,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn log_likelihood(&self, theta: &UtilityParams) -> f64 {
        weighted_log_likelihood(&self.cells, &self.trials, &self.chose_b, theta)
    }

    /// Data set made of `multiplicity[i]` copies of subject `i`.
    fn resampled(&self, multiplicity: &[u32]) -> (Vec<f64>, Vec<f64>) {
        let mut trials = vec![0.0; self.cells.len()];
        let mut chose_b = vec![0.0; self.cells.len()];
        for (subject, &m) in self.subjects.iter().zip(multiplicity) {
            if m == 0 {
                continue;
            }
            let m = f64::from(m);
            for &(c, n, k) in subject {
                trials[c] += m * n;
                chose_b[c] += m * k;
            }
        }
        (trials, chose_b)
    }

    fn check_identification(&self, free: &FreeParams) -> Result<()> {
        check_identification(&self.cells, &self.trials, free)
    }
}

fn check_identification(cells: &[Cell], trials: &[f64], free: &FreeParams) -> Result<()> {
    let any = |pred: &dyn Fn(&TreatmentConfig) -> bool| {
        cells
            .iter()
            .zip(trials)
            .any(|(c, &n)| n > 0.0 && pred(&c.treatment))
    };
    if free.c_nt && !any(&|t| !t.transparency) {
        return Err(Error::Identification("c_nt"));
    }
    if free.beta_nudge && !any(&|t| t.nudge) {
        return Err(Error::Identification("beta_nudge"));
    }
    if free.beta_base && !any(&|t| !t.nudge) {
        return Err(Error::Identification("beta_base"));
    }
    Ok(())
}

fn weighted_log_likelihood(
    cells: &[Cell],
    trials: &[f64],
    chose_b: &[f64],
    theta: &UtilityParams,
) -> f64 {
    let mut ll = 0.0;
    for ((cell, &n), &k) in cells.iter().zip(trials).zip(chose_b) {
        if n == 0.0 {
            continue;
        }
        let p = logistic(utility_difference(theta, &cell.a, &cell.b, &cell.treatment))
            .clamp(P_MIN, P_MAX);
        if k > 0.0 {
            ll += k * p.ln();
        }
        if n > k {
            ll += (n - k) * (1.0 - p).ln();
        }
    }
    ll
}

/// Total log-likelihood of `records` under `theta`.
pub fn log_likelihood(theta: &UtilityParams, records: &[ChoiceRecord]) -> Result<f64> {
    Ok(ChoiceData::from_records(records)?.log_likelihood(theta))
}

struct Problem<'a> {
    cells: &'a [Cell],
    trials: &'a [f64],
    chose_b: &'a [f64],
    options: &'a FitOptions,
}

impl Problem<'_> {
    fn theta(&self, free_values: &[f64]) -> UtilityParams {
        let mut v = self.options.fixed.to_array();
        let mut it = free_values.iter();
        for (slot, on) in v.iter_mut().zip(self.options.free.mask()) {
            if on {
                *slot = *it.next().expect("one value per free parameter");
            }
        }
        UtilityParams::from_array(v)
    }

    fn free_values(&self, theta: &UtilityParams) -> Vec<f64> {
        theta
            .to_array()
            .into_iter()
            .zip(self.options.free.mask())
            .filter(|(_, on)| *on)
            .map(|(v, _)| v)
            .collect()
    }

    fn ll(&self, theta: &UtilityParams) -> f64 {
        weighted_log_likelihood(self.cells, self.trials, self.chose_b, theta)
    }

    /// Start 0 is `first` (the heuristic unless a warm start is given);
    /// later starts scale every free component of the heuristic by
    /// `exp(dispersion * z)`, `z` standard normal.
    fn starts(&self, first: Option<&UtilityParams>) -> Vec<UtilityParams> {
        let base = self.options.fixed;
        let mut out = vec![first.copied().unwrap_or(base)];
        for k in 1..self.options.n_starts {
            let mut rng = stream_rng(mix_seed(self.options.seed, 0x5747), k as u64);
            let mut v = base.to_array();
            for (slot, on) in v.iter_mut().zip(self.options.free.mask()) {
                let z: f64 = rng.sample(StandardNormal);
                if on {
                    *slot *= (self.options.start_dispersion * z).exp();
                }
            }
            out.push(UtilityParams::from_array(v));
        }
        out
    }

    fn fit(&self, first: Option<&UtilityParams>) -> FitResult {
        let nm = NelderMead {
            max_iterations: self.options.max_iterations,
            tolerance: self.options.tolerance,
            ..NelderMead::default()
        };
        let starts = self.starts(first);
        let mut evals = 0;
        let mut best: Option<(usize, f64, UtilityParams, bool)> = None;
        let mut start_lls = Vec::with_capacity(starts.len());
        for (i, start) in starts.iter().enumerate() {
            start_lls.push(self.ll(start));
            let m = nm.minimize(|x| -self.ll(&self.theta(x)), &self.free_values(start));
            evals += m.evaluations;
            let ll = -m.value;
            if best.as_ref().is_none_or(|b| ll > b.1) {
                best = Some((i, ll, self.theta(&m.x), m.converged));
            }
        }
        let (idx, ll, theta_hat, converged) = best.expect("at least one start");
        let warnings = theta_hat.cost_warnings();
        for w in &warnings {
            log::warn!("estimate: {w}");
        }
        FitResult {
            theta_hat,
            log_likelihood: ll,
            converged,
            n_function_evals: evals,
            start_index_of_best: idx,
            start_log_likelihoods: start_lls,
            warnings,
        }
    }
}

pub fn fit_mle(records: &[ChoiceRecord], options: &FitOptions) -> Result<FitResult> {
    fit_data(&ChoiceData::from_records(records)?, options)
}

/// Fits already-aggregated data.
pub fn fit_data(data: &ChoiceData, options: &FitOptions) -> Result<FitResult> {
    options.validate()?;
    data.check_identification(&options.free)?;
    let problem = Problem {
        cells: &data.cells,
        trials: &data.trials,
        chose_b: &data.chose_b,
        options,
    };
    Ok(problem.fit(None))
}

pub fn bootstrap_se(
    records: &[ChoiceRecord],
    options: &FitOptions,
    n_replicates: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    let data = ChoiceData::from_records(records)?;
    let full = fit_data(&data, options)?;
    bootstrap_data(
        &data,
        options,
        &full.theta_hat,
        n_replicates,
        seed,
        Execution::default(),
    )
}

/// Subject-level nonparametric bootstrap. Replicate `r` draws its resample
/// from stream `r` of `seed` and refits with `warm_start` as its first
/// start, so results do not depend on `exec`.
pub fn bootstrap_data(
    data: &ChoiceData,
    options: &FitOptions,
    warm_start: &UtilityParams,
    n_replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<BootstrapResult> {
    options.validate()?;
    let n = data.n_subjects();
    if n < 2 {
        return Err(Error::DegenerateSample(format!(
            "bootstrap needs at least 2 subjects, found {n}"
        )));
    }
    data.check_identification(&options.free)?;
    let fits: Vec<Result<FitResult>> = exec.map_range(n_replicates, |r| {
        let mut rng = stream_rng(mix_seed(seed, 0xB007), r as u64);
        let mut multiplicity = vec![0u32; n];
        for _ in 0..n {
            multiplicity[rng.random_range(0..n)] += 1;
        }
        let (trials, chose_b) = data.resampled(&multiplicity);
        check_identification(&data.cells, &trials, &options.free)?;
        let problem = Problem {
            cells: &data.cells,
            trials: &trials,
            chose_b: &chose_b,
            options,
        };
        Ok(problem.fit(Some(warm_start)))
    });
    let mut estimates = Vec::new();
    let mut skipped = 0;
    for fit in fits {
        let fit = fit?;
        if fit.converged {
            estimates.push(fit.theta_hat.to_array());
        } else {
            skipped += 1;
        }
    }
    let mask = options.free.mask();
    let mut se = [0.0; 6];
    if estimates.len() >= 2 {
        let m = estimates.len() as f64;
        for j in 0..6 {
            if !mask[j] {
                continue;
            }
            let mean = estimates.iter().map(|e| e[j]).sum::<f64>() / m;
            let var = estimates.iter().map(|e| (e[j] - mean).powi(2)).sum::<f64>() / (m - 1.0);
            se[j] = var.sqrt();
        }
    }
    Ok(BootstrapResult {
        standard_errors: se,
        n_replicates: estimates.len(),
        replicate_estimates: estimates,
        n_skipped: skipped,
    })
}
