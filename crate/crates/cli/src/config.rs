//! JSON run configuration. Every block is optional and unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use anyhow::Context;
use gatekeeper_core::choice::{Scale, TreatmentConfig, UtilityParams};
use gatekeeper_core::des::Discipline;
use gatekeeper_core::design::{PolicySpec, StudyArm};
use gatekeeper_core::equilibrium::{
    default_p_b_values, default_t_bar_grid, FixedPointOptions, ScenarioFlags, SystemConfig,
};
use gatekeeper_core::estimation::FitOptions;
use gatekeeper_core::stats::Sidedness;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub design: DesignBlock,
    pub simulate: SimulateBlock,
    pub fit: FitBlock,
    pub equilibrium: EquilibriumBlock,
    pub sweep: SweepBlock,
    pub des: DesBlock,
    pub analyze: AnalyzeBlock,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignBlock {
    pub scale: Scale,
}

impl Default for DesignBlock {
    fn default() -> Self {
        DesignBlock {
            scale: Scale::Short,
        }
    }
}

/// Synthetic study used by `simulate`, and by `fit` and `analyze` when no
/// input file is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateBlock {
    pub arms: Vec<StudyArm>,
    pub policy: PolicySpec,
}

impl Default for SimulateBlock {
    fn default() -> Self {
        let mut arms = Vec::new();
        for scale in [Scale::Short, Scale::Long] {
            for treatment in [
                TreatmentConfig::context(scale),
                TreatmentConfig::context_nudge(scale),
                TreatmentConfig::context_no_transparency(scale),
            ] {
                arms.push(StudyArm {
                    treatment,
                    n_subjects: 100,
                });
            }
        }
        SimulateBlock {
            arms,
            policy: PolicySpec::logit(UtilityParams::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitBlock {
    /// Choice CSV to fit; the configured synthetic study otherwise.
    pub input: Option<PathBuf>,
    pub options: FitOptions,
    pub bootstrap_replicates: usize,
}

impl Default for FitBlock {
    fn default() -> Self {
        FitBlock {
            input: None,
            options: FitOptions::default(),
            bootstrap_replicates: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumBlock {
    pub system: SystemConfig,
    pub theta: UtilityParams,
    pub scenario: ScenarioFlags,
    pub t_bar_line: f64,
    pub fixed_point: FixedPointOptions,
}

impl Default for EquilibriumBlock {
    fn default() -> Self {
        EquilibriumBlock {
            system: SystemConfig::default(),
            theta: UtilityParams::default(),
            scenario: ScenarioFlags::COMBINED,
            t_bar_line: 60.0,
            fixed_point: FixedPointOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub system: SystemConfig,
    pub theta: UtilityParams,
    pub scenarios: Vec<ScenarioFlags>,
    pub t_bar_grid: Vec<f64>,
    pub p_b_values: Vec<f64>,
    pub fixed_point: FixedPointOptions,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock {
            system: SystemConfig::default(),
            theta: UtilityParams::default(),
            scenarios: ScenarioFlags::standard(),
            t_bar_grid: default_t_bar_grid(),
            p_b_values: default_p_b_values(),
            fixed_point: FixedPointOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesBlock {
    pub system: SystemConfig,
    pub rho_b: f64,
    pub mu: f64,
    pub discipline: Discipline,
    pub n_arrivals: usize,
    pub warmup_fraction: f64,
    pub replications: usize,
    /// Also write the per-customer trace of the first replication.
    pub trace: bool,
}

impl Default for DesBlock {
    fn default() -> Self {
        DesBlock {
            system: SystemConfig::default(),
            rho_b: 0.0,
            mu: 0.2,
            discipline: Discipline::PooledFifo,
            n_arrivals: 1_000_000,
            warmup_fraction: 0.1,
            replications: 1,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeBlock {
    pub input: Option<PathBuf>,
    /// Benchmark uptake per decision set.
    pub mu0: f64,
    pub sidedness: Sidedness,
}

impl Default for AnalyzeBlock {
    fn default() -> Self {
        AnalyzeBlock {
            input: None,
            mu0: 5.5,
            sidedness: Sidedness::Two,
        }
    }
}
