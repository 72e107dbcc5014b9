use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;
use gatekeeper_core::des::{run_replications, simulate, write_trace_csv, DesConfig, DesStats};
use gatekeeper_core::design::{
    build_experiment, simulate_study, write_grid_csv, ChoiceRecord, INDIFFERENCE_POSITION,
};
use gatekeeper_core::equilibrium::{
    peak_savings, solve, sweep_with, verify_solution, write_sweep_csv, EquilibriumSolution,
    PeakSavings, ScenarioFlags, SweepFailure,
};
use gatekeeper_core::estimation::{bootstrap_data, fit_data, ChoiceData, FitResult};
use gatekeeper_core::queueing::mdl_queue_wait;
use gatekeeper_core::report::{read_choices_csv, write_choices_csv};
use gatekeeper_core::stats::{holm_adjust, one_sample_t, proportion_test, uptake_counts, TTest};
use gatekeeper_core::{Execution, TreatmentConfig, UtilityParams};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::Output;

pub fn design(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let grid = build_experiment(cfg.design.scale);
    out.write("design.csv", |w| Ok(write_grid_csv(w, &grid)?))
}

fn synthetic(cfg: &RunConfig) -> Vec<ChoiceRecord> {
    simulate_study(
        &cfg.simulate.arms,
        &cfg.simulate.policy,
        cfg.seed,
        Execution::default(),
    )
}

fn load_or_simulate(input: Option<&Path>, cfg: &RunConfig) -> anyhow::Result<Vec<ChoiceRecord>> {
    match input {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            Ok(read_choices_csv(BufReader::new(f))?)
        }
        None => Ok(synthetic(cfg)),
    }
}

pub fn simulate_cmd(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    for arm in &cfg.simulate.arms {
        arm.treatment.validate()?;
    }
    let records = synthetic(cfg);
    out.write("simulate.csv", |w| Ok(write_choices_csv(w, &records)?))
}

#[derive(Serialize)]
struct Estimate {
    name: &'static str,
    estimate: f64,
    /// Bootstrap standard error; absent without replicates.
    se: Option<f64>,
    free: bool,
}

#[derive(Serialize)]
struct FitReport {
    n_records: usize,
    n_subjects: usize,
    n_cells: usize,
    estimates: Vec<Estimate>,
    fit: FitResult,
    bootstrap_replicates: usize,
    bootstrap_skipped: usize,
}

pub fn fit(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let records = load_or_simulate(cfg.fit.input.as_deref(), cfg)?;
    let data = ChoiceData::from_records(&records)?;
    let options = gatekeeper_core::estimation::FitOptions {
        seed: cfg.seed,
        ..cfg.fit.options
    };
    let result = fit_data(&data, &options)?;
    let boot = if cfg.fit.bootstrap_replicates > 0 {
        Some(bootstrap_data(
            &data,
            &options,
            &result.theta_hat,
            cfg.fit.bootstrap_replicates,
            cfg.seed,
            Execution::default(),
        )?)
    } else {
        None
    };
    let free = [
        options.free.c_line,
        options.free.c_agent,
        options.free.c_bot,
        options.free.c_nt,
        options.free.beta_base,
        options.free.beta_nudge,
    ];
    let estimates = UtilityParams::NAMES
        .iter()
        .zip(result.theta_hat.to_array())
        .enumerate()
        .map(|(j, (name, estimate))| Estimate {
            name,
            estimate,
            se: boot
                .as_ref()
                .filter(|_| free[j])
                .map(|b| b.standard_errors[j]),
            free: free[j],
        })
        .collect();
    let report = FitReport {
        n_records: records.len(),
        n_subjects: data.n_subjects(),
        n_cells: data.n_cells(),
        estimates,
        bootstrap_replicates: boot.as_ref().map_or(0, |b| b.n_replicates),
        bootstrap_skipped: boot.as_ref().map_or(0, |b| b.n_skipped),
        fit: result,
    };
    out.json("fit.json", &report)
}

#[derive(Serialize)]
struct EquilibriumReport {
    scenario: String,
    flags: ScenarioFlags,
    solution: EquilibriumSolution,
    baseline: EquilibriumSolution,
    savings_vs_baseline: f64,
    lambda_a_relative_error: f64,
    weighted_wait_relative_error: f64,
    inversion_relative_error: f64,
}

pub fn equilibrium(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let b = &cfg.equilibrium;
    let solution = solve(
        &b.system,
        &b.theta,
        &b.scenario,
        b.t_bar_line,
        &b.fixed_point,
    )?;
    let baseline = solve(
        &b.system,
        &b.theta,
        &ScenarioFlags::BASELINE,
        b.t_bar_line,
        &b.fixed_point,
    )?;
    let (l, w, i) = verify_solution(&b.system, &b.theta, &b.scenario, &solution)?;
    let report = EquilibriumReport {
        scenario: b.scenario.label(),
        flags: b.scenario,
        savings_vs_baseline: 1.0 - solution.staffing_cost / baseline.staffing_cost,
        solution,
        baseline,
        lambda_a_relative_error: l,
        weighted_wait_relative_error: w,
        inversion_relative_error: i,
    };
    out.json("equilibrium.json", &report)
}

#[derive(Serialize)]
struct SweepSummary {
    n_rows: usize,
    peaks: Vec<PeakSavings>,
    failures: Vec<SweepFailure>,
}

pub fn sweep(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let b = &cfg.sweep;
    b.system.validate()?;
    let outcome = sweep_with(
        &b.system,
        &b.theta,
        &b.scenarios,
        &b.t_bar_grid,
        &b.p_b_values,
        &b.fixed_point,
        Execution::default(),
    );
    for f in &outcome.failures {
        log::warn!(
            "sweep cell t_bar={} p_B={} {}: {}",
            f.t_bar_line,
            f.p_b,
            f.scenario.label(),
            f.error
        );
    }
    out.write("sweep.csv", |w| Ok(write_sweep_csv(w, &outcome.rows)?))?;
    let summary = SweepSummary {
        n_rows: outcome.rows.len(),
        peaks: peak_savings(&outcome.rows),
        failures: outcome.failures,
    };
    out.json("sweep.json", &summary)
}

#[derive(Serialize)]
struct DesReport {
    config: DesConfig,
    lambda_a: f64,
    /// M/D/1 formula wait at the simulated live-agent load.
    formula_wait: Option<f64>,
    replications: Vec<DesStats>,
    mean_queue_wait: f64,
    relative_error: Option<f64>,
    within_half_width: Option<bool>,
}

pub fn des(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let b = &cfg.des;
    if b.replications == 0 {
        anyhow::bail!("des.replications must be at least 1");
    }
    let config = DesConfig {
        system: b.system,
        rho_b: b.rho_b,
        mu: b.mu,
        discipline: b.discipline,
        n_arrivals: b.n_arrivals,
        warmup_fraction: b.warmup_fraction,
        seed: cfg.seed,
        record_trace: false,
    };
    let replications = run_replications(&config, b.replications, Execution::default())?;
    let lambda_a = config.lambda_a();
    let formula_wait = mdl_queue_wait(lambda_a, config.mu).ok();
    let mean = replications
        .iter()
        .map(|s| s.mean_queue_wait_overall)
        .sum::<f64>()
        / replications.len() as f64;
    let first = &replications[0];
    let report = DesReport {
        config,
        lambda_a,
        formula_wait,
        relative_error: formula_wait.map(|w| (mean - w).abs() / w),
        within_half_width: formula_wait
            .filter(|_| first.half_width_95.is_finite())
            .map(|w| (first.mean_queue_wait_overall - w).abs() <= first.half_width_95),
        mean_queue_wait: mean,
        replications,
    };
    if b.trace {
        let run = simulate(&DesConfig {
            record_trace: true,
            seed: gatekeeper_core::des::replication_seed(cfg.seed, 0),
            ..config
        })?;
        out.write("des.csv", |w| Ok(write_trace_csv(w, &run.trace)?))?;
    }
    out.json("des.json", &report)
}

#[derive(Serialize)]
struct GroupReport {
    treatment: String,
    n_subjects: usize,
    mean_uptake: f64,
    t_test: Option<TTest>,
    p_holm: Option<f64>,
    /// Channel B share at the indifference decision, tested against 1/2.
    indifference_share_b: f64,
    indifference_proportion_p: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    mu0: f64,
    overall_mean_uptake: f64,
    n_subjects: usize,
    groups: Vec<GroupReport>,
}

pub fn analyze(cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let records = load_or_simulate(cfg.analyze.input.as_deref(), cfg)?;
    let overall = uptake_counts(&records)?;
    let mut by_treatment: BTreeMap<TreatmentConfig, Vec<ChoiceRecord>> = BTreeMap::new();
    for r in &records {
        by_treatment.entry(r.treatment).or_default().push(*r);
    }
    let mut groups = Vec::new();
    for (treatment, recs) in &by_treatment {
        let summary = uptake_counts(recs)?;
        let mut per_subject: BTreeMap<u64, (u32, u32)> = BTreeMap::new();
        for r in recs {
            let e = per_subject.entry(r.subject_id).or_default();
            e.0 += u32::from(r.chose_b);
            e.1 += 1;
        }
        let per_set = f64::from(gatekeeper_core::design::POSITIONS_PER_SET);
        let values: Vec<f64> = per_subject
            .values()
            .map(|&(b, n)| per_set * f64::from(b) / f64::from(n))
            .collect();
        let t_test = match one_sample_t(&values, cfg.analyze.mu0, cfg.analyze.sidedness) {
            Ok(t) => Some(t),
            Err(e) => {
                log::warn!("{}: {e}", treatment.label());
                None
            }
        };
        let at_indifference: Vec<&ChoiceRecord> = recs
            .iter()
            .filter(|r| r.position == INDIFFERENCE_POSITION)
            .collect();
        let k = at_indifference.iter().filter(|r| r.chose_b).count() as u64;
        let n = at_indifference.len() as u64;
        groups.push(GroupReport {
            treatment: treatment.label(),
            n_subjects: summary.n_subjects,
            mean_uptake: summary.mean_uptake,
            t_test,
            p_holm: None,
            indifference_share_b: k as f64 / n as f64,
            indifference_proportion_p: proportion_test(k, n, 0.5)?,
        });
    }
    let tested: Vec<usize> = (0..groups.len())
        .filter(|&i| groups[i].t_test.is_some())
        .collect();
    let raw: Vec<f64> = tested
        .iter()
        .filter_map(|&i| groups[i].t_test.map(|t| t.p))
        .collect();
    for (&i, p) in tested.iter().zip(holm_adjust(&raw)?) {
        groups[i].p_holm = Some(p);
    }
    let report = AnalyzeReport {
        mu0: cfg.analyze.mu0,
        overall_mean_uptake: overall.mean_uptake,
        n_subjects: overall.n_subjects,
        groups,
    };
    out.json("analyze.json", &report)
}
