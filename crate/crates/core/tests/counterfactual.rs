use gatekeeper_core::equilibrium::*;
use gatekeeper_core::{Execution, UtilityParams};

fn default_sweep(exec: Execution) -> SweepOutcome {
    sweep_with(
        &SystemConfig::default(),
        &UtilityParams::default(),
        &ScenarioFlags::standard(),
        &default_t_bar_grid(),
        &default_p_b_values(),
        &FixedPointOptions::default(),
        exec,
    )
}

fn savings(rows: &[SweepRow], flags: ScenarioFlags, p_b: f64) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.scenario == flags && r.p_b == p_b)
        .map(|r| (r.t_bar_line, r.savings_vs_baseline))
        .collect()
}

#[test]
fn default_sweep_is_complete_and_ordered() {
    let out = default_sweep(Execution::Parallel);
    assert!(out.failures.is_empty(), "{:?}", out.failures.first());
    assert_eq!(out.rows.len(), 200 * 3 * 5);
    assert!(out.rows[0].scenario.is_baseline());
    for r in out.rows.iter().filter(|r| r.scenario.is_baseline()) {
        assert_eq!(r.savings_vs_baseline, 0.0);
    }
    for w in out.rows.windows(2) {
        let key = |r: &SweepRow| (r.p_b, r.t_bar_line);
        assert!(key(&w[0]) <= key(&w[1]));
    }
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    assert_eq!(
        default_sweep(Execution::Sequential),
        default_sweep(Execution::Parallel)
    );
}

#[test]
fn combined_savings_peak_in_the_interior() {
    let out = default_sweep(Execution::default());
    let curve = savings(&out.rows, ScenarioFlags::COMBINED, 0.5);
    let (arg, peak) =
        curve.iter().copied().fold(
            (0.0, f64::NEG_INFINITY),
            |b, c| if c.1 > b.1 { c } else { b },
        );
    assert!(arg > 1.0 && arg < 200.0, "peak at {arg}");
    assert!(peak > curve[0].1 && peak > curve[curve.len() - 1].1);
    assert!(curve
        .iter()
        .filter(|(t, _)| (50.0..=150.0).contains(t))
        .all(|(_, s)| *s >= 0.0));
    let priority = savings(&out.rows, ScenarioFlags::PRIORITY, 0.5);
    assert!(priority.iter().any(|(_, s)| *s > 0.0));
}

#[test]
fn every_cell_verifies() {
    let sys = SystemConfig::default();
    let theta = UtilityParams::default();
    for flags in ScenarioFlags::standard() {
        for t in [1.0, 7.0, 60.0, 199.0] {
            let sol = solve(&sys, &theta, &flags, t, &FixedPointOptions::default()).unwrap();
            let (l, w, i) = verify_solution(&sys, &theta, &flags, &sol).unwrap();
            assert!(
                l < 1e-9 && w < 1e-9 && i < 1e-9,
                "{flags:?} {t}: {l} {w} {i}"
            );
        }
    }
}

#[test]
fn peak_table_has_one_row_per_scenario_and_p() {
    let out = default_sweep(Execution::default());
    let peaks = peak_savings(&out.rows);
    assert_eq!(peaks.len(), 15);
    let combined = peaks
        .iter()
        .find(|p| p.flags == ScenarioFlags::COMBINED && p.p_b == 0.5)
        .unwrap();
    assert!(combined.peak_savings > 0.0);
}
