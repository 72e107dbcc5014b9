//! Endogenous-demand staffing: announced live-agent waits drive channel
//! choice, channel choice drives live-agent demand, and the M/D/1 inversion
//! gives the service rate that delivers the announced waits.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::choice::{
    choice_prob_b_channels, ChannelA, ChannelB, Scale, TreatmentConfig, UtilityParams,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::queueing::{channel_demands, mdl_queue_wait, required_service_rate};
use crate::report::format_num;

/// Fixed parameters of the service system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub lambda_total: f64,
    pub p_b: f64,
    pub t_serve_a: f64,
    pub t_serve1_b: f64,
    pub t_serve2_b: f64,
    pub unit_staffing_cost: f64,
    /// Ratio of the bot-failure wait to the direct wait under priority.
    pub priority_factor: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            lambda_total: 0.1,
            p_b: 0.5,
            t_serve_a: 20.0,
            t_serve1_b: 20.0,
            t_serve2_b: 20.0,
            unit_staffing_cost: 1.0,
            priority_factor: 0.9,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_total > 0.0 && self.lambda_total.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda_total = {}",
                self.lambda_total
            )));
        }
        if !(0.0..=1.0).contains(&self.p_b) {
            return Err(Error::InvalidParameter(format!("p_B = {}", self.p_b)));
        }
        if !(self.priority_factor > 0.0 && self.priority_factor <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "priority_factor = {}",
                self.priority_factor
            )));
        }
        ChannelA::new(0.0, self.t_serve_a)?;
        ChannelB::new(self.t_serve1_b, self.p_b, 0.0, self.t_serve2_b)?;
        if !self.unit_staffing_cost.is_finite() {
            return Err(Error::InvalidParameter("unit_staffing_cost".into()));
        }
        Ok(())
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFlags {
    pub transparency: bool,
    pub nudge: bool,
    pub priority: bool,
}

impl ScenarioFlags {
    /// Opaque chatbot, no nudge, pooled live-agent queue.
    pub const BASELINE: ScenarioFlags = ScenarioFlags {
        transparency: false,
        nudge: false,
        priority: false,
    };
    pub const TRANSPARENCY: ScenarioFlags = ScenarioFlags {
        transparency: true,
        nudge: false,
        priority: false,
    };
    pub const NUDGE: ScenarioFlags = ScenarioFlags {
        transparency: false,
        nudge: true,
        priority: false,
    };
    pub const PRIORITY: ScenarioFlags = ScenarioFlags {
        transparency: false,
        nudge: false,
        priority: true,
    };
    pub const COMBINED: ScenarioFlags = ScenarioFlags {
        transparency: true,
        nudge: true,
        priority: true,
    };

    pub fn standard() -> Vec<ScenarioFlags> {
        vec![
            Self::BASELINE,
            Self::TRANSPARENCY,
            Self::NUDGE,
            Self::PRIORITY,
            Self::COMBINED,
        ]
    }

    pub fn is_baseline(&self) -> bool {
        *self == Self::BASELINE
    }

    pub fn label(&self) -> String {
        let parts: Vec<&str> = [
            (self.transparency, "transparency"),
            (self.nudge, "nudge"),
            (self.priority, "priority"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if parts.is_empty() {
            "baseline".into()
        } else {
            parts.join("+")
        }
    }

    fn treatment(&self) -> TreatmentConfig {
        TreatmentConfig {
            context: true,
            transparency: self.transparency,
            nudge: self.nudge,
            deterministic: false,
            scale: Scale::Short,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointOptions {
    pub max_iterations: usize,
    pub damping: f64,
    /// Relative tolerance on the weighted-average wait.
    pub tolerance: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            max_iterations: 10_000,
            damping: 0.5,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub t_bar_line: f64,
    pub t_line_a: f64,
    pub t_line_b: f64,
    pub rho_a: f64,
    pub rho_b: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    /// Live-agent sojourn target `t_bar_line + t_serve_A` fed to the inversion.
    pub sojourn_target: f64,
    pub mu: f64,
    pub utilization: f64,
    pub staffing_cost: f64,
    pub fixed_point_iterations: usize,
}

struct Split {
    rho_b: f64,
    lambda_a: f64,
    lambda_b: f64,
    w_direct: f64,
    w_failures: f64,
}

/// Choice split and live-agent demand for a pair of announced waits.
fn split(
    system: &SystemConfig,
    theta: &UtilityParams,
    flags: &ScenarioFlags,
    t_line_a: f64,
    t_line_b: f64,
) -> Split {
    let a = ChannelA {
        t_line: t_line_a,
        t_serve: system.t_serve_a,
    };
    let b = ChannelB {
        t_serve1: system.t_serve1_b,
        p_success: system.p_b,
        t_line: t_line_b,
        t_serve2: system.t_serve2_b,
    };
    let rho_b = choice_prob_b_channels(theta, &a, &b, &flags.treatment());
    let (lambda_a, lambda_b) = channel_demands(system.lambda_total, rho_b, system.p_b);
    let direct = system.lambda_total * (1.0 - rho_b);
    let failures = lambda_b * (1.0 - system.p_b);
    let (w_direct, w_failures) = if lambda_a > 0.0 {
        (direct / lambda_a, failures / lambda_a)
    } else {
        (1.0, 0.0)
    };
    Split {
        rho_b,
        lambda_a,
        lambda_b,
        w_direct,
        w_failures,
    }
}

fn finish(
    system: &SystemConfig,
    theta: &UtilityParams,
    flags: &ScenarioFlags,
    t_bar_line: f64,
    t_line_a: f64,
    t_line_b: f64,
    iterations: usize,
) -> Result<EquilibriumSolution> {
    let s = split(system, theta, flags, t_line_a, t_line_b);
    let sojourn_target = t_bar_line + system.t_serve_a;
    let mu = required_service_rate(s.lambda_a, sojourn_target)?;
    Ok(EquilibriumSolution {
        t_bar_line,
        t_line_a,
        t_line_b,
        rho_a: 1.0 - s.rho_b,
        rho_b: s.rho_b,
        lambda_a: s.lambda_a,
        lambda_b: s.lambda_b,
        sojourn_target,
        mu,
        utilization: s.lambda_a / mu,
        staffing_cost: system.unit_staffing_cost * mu,
        fixed_point_iterations: iterations,
    })
}

fn check_inputs(system: &SystemConfig, theta: &UtilityParams, t_bar_line: f64) -> Result<()> {
    system.validate()?;
    theta.validate()?;
    if !(t_bar_line > 0.0 && t_bar_line.is_finite()) {
        return Err(Error::DegenerateInput(format!("t_bar_line = {t_bar_line}")));
    }
    Ok(())
}

/// Pooled live-agent queue: both classes are announced `t_bar_line`.
pub fn solve_pooled(
    system: &SystemConfig,
    theta: &UtilityParams,
    flags: &ScenarioFlags,
    t_bar_line: f64,
) -> Result<EquilibriumSolution> {
    if flags.priority {
        return Err(Error::InvalidParameter(
            "solve_pooled called with priority flag".into(),
        ));
    }
    check_inputs(system, theta, t_bar_line)?;
    finish(system, theta, flags, t_bar_line, t_bar_line, t_bar_line, 0)
}

/// Priority for chatbot failures: `t_line_B = priority_factor * t_line_A`,
/// with the demand-weighted average wait held at `t_bar_line`. The split
/// depends on the announced waits, so `t_line_A` is found by damped
/// fixed-point iteration on `t_A <- t_bar / (w_A + f * w_B)`.
pub fn solve_priority(
    system: &SystemConfig,
    theta: &UtilityParams,
    flags: &ScenarioFlags,
    t_bar_line: f64,
    options: &FixedPointOptions,
) -> Result<EquilibriumSolution> {
    if !flags.priority {
        return Err(Error::InvalidParameter(
            "solve_priority called without priority flag".into(),
        ));
    }
    check_inputs(system, theta, t_bar_line)?;
    let f = system.priority_factor;
    let mut t_a = t_bar_line;
    let mut residual = f64::INFINITY;
    for it in 0..=options.max_iterations {
        let t_b = f * t_a;
        let s = split(system, theta, flags, t_a, t_b);
        residual = s.w_direct * t_a + s.w_failures * t_b - t_bar_line;
        if residual.abs() <= options.tolerance * t_bar_line {
            return finish(system, theta, flags, t_bar_line, t_a, t_b, it);
        }
        let target = t_bar_line / (s.w_direct + f * s.w_failures);
        t_a = (1.0 - options.damping) * t_a + options.damping * target;
    }
    Err(Error::FixedPointDivergence {
        iterations: options.max_iterations,
        residual,
    })
}

/// Dispatches on `flags.priority`.
pub fn solve(
    system: &SystemConfig,
    theta: &UtilityParams,
    flags: &ScenarioFlags,
    t_bar_line: f64,
    options: &FixedPointOptions,
) -> Result<EquilibriumSolution> {
    if flags.priority {
        solve_priority(system, theta, flags, t_bar_line, options)
    } else {
        solve_pooled(system, theta, flags, t_bar_line)
    }
}

/// Independent re-check of a solution: recomputes the split from the stored
/// announced waits and returns `(relative λ_A error, relative weighted-wait
/// residual, relative inversion residual)`.
pub fn verify_solution(
    system: &SystemConfig,
    theta: &UtilityParams,
    flags: &ScenarioFlags,
    sol: &EquilibriumSolution,
) -> Result<(f64, f64, f64)> {
    let s = split(system, theta, flags, sol.t_line_a, sol.t_line_b);
    let lambda_err = (s.lambda_a - sol.lambda_a).abs() / sol.lambda_a;
    let avg = s.w_direct * sol.t_line_a + s.w_failures * sol.t_line_b;
    let wait_err = (avg - sol.t_bar_line).abs() / sol.t_bar_line;
    let achieved = mdl_queue_wait(sol.lambda_a, sol.mu)?;
    let inversion_err = (achieved - sol.sojourn_target).abs() / sol.sojourn_target;
    Ok((lambda_err, wait_err, inversion_err))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t_bar_line: f64,
    pub p_b: f64,
    pub scenario: ScenarioFlags,
    pub rho_b: f64,
    pub lambda_a: f64,
    pub mu: f64,
    pub cost: f64,
    /// `1 - cost / baseline_cost`; NaN when the baseline cell failed.
    pub savings_vs_baseline: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub t_bar_line: f64,
    pub p_b: f64,
    pub scenario: ScenarioFlags,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

/// `1, 2, ..., 200` seconds.
pub fn default_t_bar_grid() -> Vec<f64> {
    (1..=200).map(f64::from).collect()
}

pub fn default_p_b_values() -> Vec<f64> {
    vec![0.4, 0.5, 0.6]
}

pub fn sweep(
    system: &SystemConfig,
    theta: &UtilityParams,
    scenarios: &[ScenarioFlags],
    t_bar_grid: &[f64],
    p_b_values: &[f64],
) -> SweepOutcome {
    sweep_with(
        system,
        theta,
        scenarios,
        t_bar_grid,
        p_b_values,
        &FixedPointOptions::default(),
        Execution::default(),
    )
}

/// Evaluates every `(p_B, t_bar, scenario)` cell. Rows are ordered by
/// `p_B`, then `t_bar`, then scenario (baseline first); failed cells are
/// collected, not fatal.
pub fn sweep_with(
    system: &SystemConfig,
    theta: &UtilityParams,
    scenarios: &[ScenarioFlags],
    t_bar_grid: &[f64],
    p_b_values: &[f64],
    options: &FixedPointOptions,
    exec: Execution,
) -> SweepOutcome {
    let mut scen: Vec<ScenarioFlags> = vec![ScenarioFlags::BASELINE];
    scen.extend(scenarios.iter().filter(|s| !s.is_baseline()));

    let cells: Vec<(f64, f64)> = p_b_values
        .iter()
        .flat_map(|&p| t_bar_grid.iter().map(move |&t| (p, t)))
        .collect();
    let per_cell = exec.map(&cells, |&(p_b, t_bar)| {
        let sys = SystemConfig { p_b, ..*system };
        let results: Vec<Result<EquilibriumSolution>> = scen
            .iter()
            .map(|flags| solve(&sys, theta, flags, t_bar, options))
            .collect();
        let base_cost = results[0]
            .as_ref()
            .map(|s| s.staffing_cost)
            .unwrap_or(f64::NAN);
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (flags, res) in scen.iter().zip(results) {
            match res {
                Ok(sol) => rows.push(SweepRow {
                    t_bar_line: t_bar,
                    p_b,
                    scenario: *flags,
                    rho_b: sol.rho_b,
                    lambda_a: sol.lambda_a,
                    mu: sol.mu,
                    cost: sol.staffing_cost,
                    savings_vs_baseline: 1.0 - sol.staffing_cost / base_cost,
                }),
                Err(e) => failures.push(SweepFailure {
                    t_bar_line: t_bar,
                    p_b,
                    scenario: *flags,
                    error: e.to_string(),
                }),
            }
        }
        (rows, failures)
    });
    let mut out = SweepOutcome::default();
    for (rows, failures) in per_cell {
        out.rows.extend(rows);
        out.failures.extend(failures);
    }
    out
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "t_bar_line",
    "p_B",
    "transparency",
    "nudge",
    "priority",
    "rho_B",
    "lambda_A",
    "mu",
    "cost",
    "savings",
];

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_COLUMNS)?;
    let b = |x: bool| if x { "1".to_string() } else { "0".to_string() };
    for r in rows {
        out.write_record([
            format_num(r.t_bar_line),
            format_num(r.p_b),
            b(r.scenario.transparency),
            b(r.scenario.nudge),
            b(r.scenario.priority),
            format_num(r.rho_b),
            format_num(r.lambda_a),
            format_num(r.mu),
            format_num(r.cost),
            format_num(r.savings_vs_baseline),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSavings {
    pub scenario: String,
    pub flags: ScenarioFlags,
    pub p_b: f64,
    pub peak_savings: f64,
    pub argmax_t_bar_line: f64,
}

/// Largest savings per (scenario, p_B); the first grid point wins ties.
pub fn peak_savings(rows: &[SweepRow]) -> Vec<PeakSavings> {
    let mut best: BTreeMap<(ScenarioFlags, u64), (f64, PeakSavings)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.savings_vs_baseline.is_finite()) {
        let key = (r.scenario, r.p_b.to_bits());
        let cand = PeakSavings {
            scenario: r.scenario.label(),
            flags: r.scenario,
            p_b: r.p_b,
            peak_savings: r.savings_vs_baseline,
            argmax_t_bar_line: r.t_bar_line,
        };
        match best.get(&key) {
            Some((v, _)) if *v >= r.savings_vs_baseline => {}
            _ => {
                best.insert(key, (r.savings_vs_baseline, cand));
            }
        }
    }
    let mut out: Vec<PeakSavings> = best.into_values().map(|(_, p)| p).collect();
    out.sort_by(|a, b| a.p_b.total_cmp(&b.p_b).then(a.flags.cmp(&b.flags)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rho_half_theta() -> UtilityParams {
        // with p_B = 0.5 and beta = 2 the failure path costs exactly the
        // live-agent path, so U_B == U_A for every common wait
        UtilityParams {
            c_line: 0.05,
            c_agent: 0.03,
            c_bot: 0.0,
            c_nt: 0.0,
            beta_base: 2.0,
            beta_nudge: 2.0,
        }
    }

    #[test]
    fn pooled_composition() {
        let sys = SystemConfig::default();
        let th = rho_half_theta();
        for t in [1.0, 30.0, 150.0] {
            let sol = solve_pooled(&sys, &th, &ScenarioFlags::TRANSPARENCY, t).unwrap();
            assert_relative_eq!(sol.rho_b, 0.5, max_relative = 1e-12);
            assert_relative_eq!(sol.lambda_a, 0.075, max_relative = 1e-12);
            assert_eq!(
                sol.mu,
                required_service_rate(sol.lambda_a, t + 20.0).unwrap()
            );
            assert_eq!(sol.t_line_a, sol.t_line_b);
            assert_eq!(sol.rho_a + sol.rho_b, 1.0);
            assert!(sol.utilization < 1.0);
        }
    }

    #[test]
    fn hopeless_bot_gives_single_channel_cost() {
        let sys = SystemConfig::default();
        let th = UtilityParams {
            c_bot: 1e3,
            ..UtilityParams::default()
        };
        let sol = solve_pooled(&sys, &th, &ScenarioFlags::BASELINE, 50.0).unwrap();
        assert!(sol.rho_b < 1e-300);
        assert_eq!(sol.staffing_cost, required_service_rate(0.1, 70.0).unwrap());
        let pr = solve_priority(
            &sys,
            &th,
            &ScenarioFlags::PRIORITY,
            50.0,
            &FixedPointOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(pr.t_line_a, 50.0, max_relative = 1e-9);
    }

    #[test]
    fn transparency_is_inert_without_lump_sum() {
        let sys = SystemConfig::default();
        let th = UtilityParams {
            c_nt: 0.0,
            ..UtilityParams::default()
        };
        let a = solve_pooled(&sys, &th, &ScenarioFlags::BASELINE, 40.0).unwrap();
        let b = solve_pooled(&sys, &th, &ScenarioFlags::TRANSPARENCY, 40.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_priority_factor_matches_pooled() {
        let sys = SystemConfig {
            priority_factor: 1.0,
            ..SystemConfig::default()
        };
        let th = UtilityParams::default();
        for t in [1.0, 17.0, 90.0, 200.0] {
            let pooled = solve_pooled(&sys, &th, &ScenarioFlags::BASELINE, t).unwrap();
            let prio = solve_priority(
                &sys,
                &th,
                &ScenarioFlags::PRIORITY,
                t,
                &FixedPointOptions::default(),
            )
            .unwrap();
            assert_eq!(pooled.staffing_cost.to_bits(), prio.staffing_cost.to_bits());
            assert_eq!(pooled, EquilibriumSolution { ..prio });
        }
    }

    #[test]
    fn priority_postconditions() {
        let sys = SystemConfig::default();
        let th = UtilityParams::default();
        for t in [1.0, 10.0, 60.0, 200.0] {
            for flags in [ScenarioFlags::PRIORITY, ScenarioFlags::COMBINED] {
                let sol =
                    solve_priority(&sys, &th, &flags, t, &FixedPointOptions::default()).unwrap();
                assert_eq!(sol.t_line_b, 0.9 * sol.t_line_a);
                assert!(sol.t_line_a > t);
                let (lam, wait, inv) = verify_solution(&sys, &th, &flags, &sol).unwrap();
                assert_eq!(lam, 0.0);
                assert!(wait <= 1e-9, "{wait}");
                assert!(inv <= 1e-9, "{inv}");
            }
        }
    }

    #[test]
    fn divergence_is_reported() {
        let sys = SystemConfig::default();
        let opts = FixedPointOptions {
            max_iterations: 1,
            damping: 0.01,
            tolerance: 1e-15,
        };
        let err = solve_priority(
            &sys,
            &UtilityParams::default(),
            &ScenarioFlags::PRIORITY,
            80.0,
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, Error::FixedPointDivergence { .. }));
    }

    #[test]
    fn wrong_solver_for_flags() {
        let sys = SystemConfig::default();
        let th = UtilityParams::default();
        assert!(solve_pooled(&sys, &th, &ScenarioFlags::PRIORITY, 5.0).is_err());
        assert!(solve_priority(
            &sys,
            &th,
            &ScenarioFlags::BASELINE,
            5.0,
            &FixedPointOptions::default()
        )
        .is_err());
        assert!(solve_pooled(&sys, &th, &ScenarioFlags::BASELINE, 0.0).is_err());
    }

    #[test]
    fn demand_shifts_to_bot_as_waits_grow() {
        let th = UtilityParams::default();
        for p_b in default_p_b_values() {
            let sys = SystemConfig {
                p_b,
                ..SystemConfig::default()
            };
            for flags in ScenarioFlags::standard() {
                let mut prev = 0.0;
                for t in default_t_bar_grid() {
                    let sol = solve(&sys, &th, &flags, t, &FixedPointOptions::default()).unwrap();
                    assert!(sol.rho_b >= prev, "{flags:?} p={p_b} t={t}");
                    prev = sol.rho_b;
                }
            }
        }
    }

    #[test]
    fn sweep_layout_and_baseline() {
        let grid = [5.0, 50.0];
        let out = sweep(
            &SystemConfig::default(),
            &UtilityParams::default(),
            &[ScenarioFlags::PRIORITY],
            &grid,
            &[0.5],
        );
        assert!(out.failures.is_empty());
        assert_eq!(out.rows.len(), 4);
        assert!(out.rows[0].scenario.is_baseline());
        assert_eq!(out.rows[0].savings_vs_baseline, 0.0);
        assert!(out.rows[1].scenario.priority && out.rows[1].savings_vs_baseline > 0.0);
        assert_eq!(out.rows[2].t_bar_line, 50.0);
    }

    #[test]
    fn sweep_records_failed_cells() {
        let out = sweep(
            &SystemConfig::default(),
            &UtilityParams::default(),
            &ScenarioFlags::standard(),
            &[-1.0, 10.0],
            &[0.5],
        );
        assert_eq!(out.failures.len(), 5);
        assert_eq!(out.rows.len(), 5);
    }

    #[test]
    fn sweep_is_deterministic_across_execution() {
        let grid: Vec<f64> = (1..=40).map(|t| f64::from(t) * 5.0).collect();
        let run = |exec| {
            let out = sweep_with(
                &SystemConfig::default(),
                &UtilityParams::default(),
                &ScenarioFlags::standard(),
                &grid,
                &default_p_b_values(),
                &FixedPointOptions::default(),
                exec,
            );
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &out.rows).unwrap();
            buf
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }

    #[test]
    fn peaks_pick_first_maximum() {
        let out = sweep(
            &SystemConfig::default(),
            &UtilityParams::default(),
            &ScenarioFlags::standard(),
            &default_t_bar_grid(),
            &[0.5],
        );
        let peaks = peak_savings(&out.rows);
        assert_eq!(peaks.len(), 5);
        let base = peaks.iter().find(|p| p.flags.is_baseline()).unwrap();
        assert_eq!((base.peak_savings, base.argmax_t_bar_line), (0.0, 1.0));
    }
}
