//! Decision grids and synthetic choice data.
//!
//! Each time scale has three sets of 11 decisions. Every fixed duration is
//! `20 * scale` seconds and the fixed chatbot success rate is 0.5; one
//! Channel B parameter moves along each set so that `E[T_A] - E[T_B]` equals
//! `(2 * position - 12) * scale` seconds in every set, with the sixth decision
//! the point of indifference.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::choice::{
    choice_prob_b, ChannelA, ChannelB, DecisionProblem, Scale, TreatmentConfig, UtilityParams,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::report::format_num;

pub const POSITIONS_PER_SET: u8 = 11;
pub const INDIFFERENCE_POSITION: u8 = 6;
/// Expected-time gaps below this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariedParameter {
    PB,
    TServe1B,
    TLineB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecisionSetSpec {
    pub set_index: u8,
    pub scale: Scale,
}

impl DecisionSetSpec {
    pub fn new(set_index: u8, scale: Scale) -> Result<Self> {
        if !(1..=3).contains(&set_index) {
            return Err(Error::InvalidSetIndex(set_index));
        }
        Ok(DecisionSetSpec { set_index, scale })
    }

    pub fn varied_parameter(&self) -> VariedParameter {
        match self.set_index {
            1 => VariedParameter::PB,
            2 => VariedParameter::TServe1B,
            _ => VariedParameter::TLineB,
        }
    }
}

/// Builds one decision of the grid.
pub fn decision(set_index: u8, position: u8, scale: Scale) -> Result<DecisionProblem> {
    if !(1..=3).contains(&set_index) || !(1..=POSITIONS_PER_SET).contains(&position) {
        return Err(Error::UnknownDecision {
            set_index,
            position,
            scale: scale.factor(),
        });
    }
    let s = f64::from(scale.factor());
    let k = f64::from(position);
    let base = 20.0 * s;
    let mut b = ChannelB {
        t_serve1: base,
        p_success: 0.5,
        t_line: base,
        t_serve2: base,
    };
    match set_index {
        // 0.25 .. 0.75 in steps of 0.05
        1 => b.p_success = (4.0 + k) / 20.0,
        // 30s .. 10s in steps of 2s
        2 => b.t_serve1 = (32.0 - 2.0 * k) * s,
        // 40s .. 0s in steps of 4s
        _ => b.t_line = (44.0 - 4.0 * k) * s,
    }
    Ok(DecisionProblem {
        set_index,
        position,
        a: ChannelA {
            t_line: base,
            t_serve: base,
        },
        b,
        scale,
    })
}

pub fn build_decision_set(spec: DecisionSetSpec) -> Result<Vec<DecisionProblem>> {
    DecisionSetSpec::new(spec.set_index, spec.scale)?;
    (1..=POSITIONS_PER_SET)
        .map(|k| decision(spec.set_index, k, spec.scale))
        .collect()
}

/// All 33 decisions of one scale, set by set.
pub fn build_experiment(scale: Scale) -> Vec<DecisionProblem> {
    (1..=3)
        .flat_map(|set| {
            build_decision_set(DecisionSetSpec {
                set_index: set,
                scale,
            })
            .expect("valid set index")
        })
        .collect()
}

/// Replaces the lottery in Channel B by a certain two-stage path with the
/// same expected duration.
pub fn to_deterministic(d: &DecisionProblem) -> DecisionProblem {
    let q = 1.0 - d.b.p_success;
    DecisionProblem {
        b: ChannelB {
            t_serve1: d.b.t_serve1,
            p_success: 0.0,
            t_line: q * d.b.t_line,
            t_serve2: q * d.b.t_serve2,
        },
        ..*d
    }
}

/// The decision a subject in `treatment` actually faces for a grid cell.
pub fn resolve_decision(
    set_index: u8,
    position: u8,
    treatment: &TreatmentConfig,
) -> Result<DecisionProblem> {
    let d = decision(set_index, position, treatment.scale)?;
    Ok(if treatment.deterministic {
        to_deterministic(&d)
    } else {
        d
    })
}

pub const GRID_COLUMNS: [&str; 11] = [
    "scale",
    "set_index",
    "position",
    "t_line_A",
    "t_serve_A",
    "t_serve1_B",
    "p_B",
    "t_line_B",
    "t_serve2_B",
    "exp_time_A",
    "exp_time_B",
];

pub fn write_grid_csv<W: Write>(w: W, decisions: &[DecisionProblem]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(GRID_COLUMNS)?;
    for d in decisions {
        out.write_record([
            d.scale.factor().to_string(),
            d.set_index.to_string(),
            d.position.to_string(),
            format_num(d.a.t_line),
            format_num(d.a.t_serve),
            format_num(d.b.t_serve1),
            format_num(d.b.p_success),
            format_num(d.b.t_line),
            format_num(d.b.t_serve2),
            format_num(d.a.expected_time()),
            format_num(d.b.expected_time()),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

/// One subject's choice on one grid decision. The decision scale is the
/// treatment scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub subject_id: u64,
    pub set_index: u8,
    pub position: u8,
    pub treatment: TreatmentConfig,
    pub chose_b: bool,
}

impl ChoiceRecord {
    pub fn scale(&self) -> Scale {
        self.treatment.scale
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    Random,
    AlwaysA,
    AlwaysB,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyKind {
    /// Picks the channel with the smaller expected time.
    TimeMinimizer { tie_break: TieBreak },
    /// Draws the choice from the logit probabilities under `theta`.
    Logit { theta: UtilityParams },
}

/// A synthetic decision-maker. `seed` is mixed into the run seed, so two
/// policies with different seeds draw independent data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default)]
    pub seed: u64,
}

impl PolicySpec {
    pub fn time_minimizer(tie_break: TieBreak) -> Self {
        PolicySpec {
            kind: PolicyKind::TimeMinimizer { tie_break },
            seed: 0,
        }
    }

    pub fn logit(theta: UtilityParams) -> Self {
        PolicySpec {
            kind: PolicyKind::Logit { theta },
            seed: 0,
        }
    }
}

/// SplitMix64 finalizer, used to combine seeds.
pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for stream `stream` of `seed`.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn choose_b<R: Rng>(
    rng: &mut R,
    d: &DecisionProblem,
    treatment: &TreatmentConfig,
    policy: &PolicyKind,
) -> bool {
    match policy {
        PolicyKind::TimeMinimizer { tie_break } => {
            let diff = d.expected_time_difference();
            if diff > TIE_TOLERANCE {
                true
            } else if diff < -TIE_TOLERANCE {
                false
            } else {
                match tie_break {
                    TieBreak::Random => rng.random_bool(0.5),
                    TieBreak::AlwaysA => false,
                    TieBreak::AlwaysB => true,
                }
            }
        }
        PolicyKind::Logit { theta } => rng.random::<f64>() < choice_prob_b(theta, d, treatment),
    }
}

/// Simulates `n_subjects` subjects with ids `0..n_subjects`.
pub fn simulate_choices(
    decisions: &[DecisionProblem],
    treatment: &TreatmentConfig,
    policy: &PolicySpec,
    n_subjects: usize,
    seed: u64,
) -> Vec<ChoiceRecord> {
    simulate_choices_from(
        decisions,
        treatment,
        policy,
        0,
        n_subjects,
        seed,
        Execution::default(),
    )
}

/// Simulates subjects `first_subject_id ..`. Each subject draws from its own
/// stream keyed by its id, so output does not depend on `exec` or on how
/// subjects are split across calls.
pub fn simulate_choices_from(
    decisions: &[DecisionProblem],
    treatment: &TreatmentConfig,
    policy: &PolicySpec,
    first_subject_id: u64,
    n_subjects: usize,
    seed: u64,
    exec: Execution,
) -> Vec<ChoiceRecord> {
    let run_seed = mix_seed(seed, policy.seed);
    let faced: Vec<DecisionProblem> = decisions
        .iter()
        .map(|d| {
            if treatment.deterministic {
                to_deterministic(d)
            } else {
                *d
            }
        })
        .collect();
    let per_subject = exec.map_range(n_subjects, |i| {
        let subject_id = first_subject_id + i as u64;
        let mut rng = stream_rng(run_seed, subject_id);
        faced
            .iter()
            .map(|d| ChoiceRecord {
                subject_id,
                set_index: d.set_index,
                position: d.position,
                treatment: *treatment,
                chose_b: choose_b(&mut rng, d, treatment, &policy.kind),
            })
            .collect::<Vec<_>>()
    });
    per_subject.into_iter().flatten().collect()
}

/// One between-subjects arm of a synthetic study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyArm {
    pub treatment: TreatmentConfig,
    pub n_subjects: usize,
}

/// Simulates every arm on the full 33-decision grid of its scale. Subject
/// ids run consecutively across arms.
pub fn simulate_study(
    arms: &[StudyArm],
    policy: &PolicySpec,
    seed: u64,
    exec: Execution,
) -> Vec<ChoiceRecord> {
    let mut next_id = 0u64;
    let mut out = Vec::new();
    for arm in arms {
        let grid = build_experiment(arm.treatment.scale);
        out.extend(simulate_choices_from(
            &grid,
            &arm.treatment,
            policy,
            next_id,
            arm.n_subjects,
            seed,
            exec,
        ));
        next_id += arm.n_subjects as u64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Expected-time difference in twentieths of a second, computed with
    /// integers only; `p_B` on the grid is always a multiple of 1/20.
    fn exact_diff_twentieths(d: &DecisionProblem) -> i64 {
        let p20 = (d.b.p_success * 20.0).round() as i64;
        assert!((d.b.p_success * 20.0 - p20 as f64).abs() < 1e-12);
        let int = |x: f64| {
            assert_eq!(x.fract(), 0.0);
            x as i64
        };
        let ea = 20 * (int(d.a.t_line) + int(d.a.t_serve));
        let eb = 20 * int(d.b.t_serve1) + (20 - p20) * (int(d.b.t_line) + int(d.b.t_serve2));
        ea - eb
    }

    #[test]
    fn set_one_first_position() {
        let d = decision(1, 1, Scale::Short).unwrap();
        assert_eq!(
            d.a,
            ChannelA {
                t_line: 20.0,
                t_serve: 20.0
            }
        );
        assert_eq!(
            d.b,
            ChannelB {
                t_serve1: 20.0,
                p_success: 0.25,
                t_line: 20.0,
                t_serve2: 20.0
            }
        );
        assert_eq!(exact_diff_twentieths(&d), -10 * 20);
    }

    #[test]
    fn set_three_long_last_position() {
        let d = decision(3, 11, Scale::Long).unwrap();
        assert_eq!(d.b.t_line, 0.0);
        assert_eq!(exact_diff_twentieths(&d), 20 * 20);
        assert_eq!(d.expected_time_difference(), 20.0);
    }

    #[test]
    fn grid_differences_match_rational_oracle() {
        for scale in [Scale::Short, Scale::Long] {
            let s = i64::from(scale.factor());
            let grid = build_experiment(scale);
            assert_eq!(grid.len(), 33);
            for d in &grid {
                let want = (2 * i64::from(d.position) - 12) * s;
                assert_eq!(exact_diff_twentieths(d), want * 20, "{d:?}");
                assert!((d.expected_time_difference() - want as f64).abs() < 1e-12);
                match d.position {
                    1..=5 => assert!(d.a.expected_time() < d.b.expected_time()),
                    6 => assert_eq!(d.a.expected_time(), d.b.expected_time()),
                    _ => assert!(d.a.expected_time() > d.b.expected_time()),
                }
            }
            for set in 1..=3u8 {
                assert_eq!(grid.iter().filter(|d| d.set_index == set).count(), 11);
            }
        }
    }

    #[test]
    fn varied_parameter_ranges() {
        let set = |i| build_decision_set(DecisionSetSpec::new(i, Scale::Short).unwrap()).unwrap();
        let ps: Vec<i64> = set(1)
            .iter()
            .map(|d| (d.b.p_success * 100.0).round() as i64)
            .collect();
        assert_eq!(ps, (25..=75).step_by(5).collect::<Vec<_>>());
        let t1: Vec<f64> = set(2).iter().map(|d| d.b.t_serve1).collect();
        assert_eq!(
            t1,
            (0..11).map(|i| 30.0 - 2.0 * i as f64).collect::<Vec<_>>()
        );
        let tl: Vec<f64> = set(3).iter().map(|d| d.b.t_line).collect();
        assert_eq!(
            tl,
            (0..11).map(|i| 40.0 - 4.0 * i as f64).collect::<Vec<_>>()
        );
        let long2: Vec<f64> = build_decision_set(DecisionSetSpec::new(2, Scale::Long).unwrap())
            .unwrap()
            .iter()
            .map(|d| d.b.t_serve1)
            .collect();
        assert_eq!((long2[0], long2[10]), (60.0, 20.0));
        assert_eq!(
            DecisionSetSpec::new(3, Scale::Short)
                .unwrap()
                .varied_parameter(),
            VariedParameter::TLineB
        );
    }

    #[test]
    fn invalid_set_and_position() {
        assert_eq!(
            DecisionSetSpec::new(4, Scale::Short),
            Err(Error::InvalidSetIndex(4))
        );
        assert!(build_decision_set(DecisionSetSpec {
            set_index: 0,
            scale: Scale::Short
        })
        .is_err());
        assert!(decision(1, 12, Scale::Short).is_err());
        assert!(decision(1, 0, Scale::Short).is_err());
    }

    #[test]
    fn deterministic_transform_examples() {
        let d = decision(1, 6, Scale::Short).unwrap();
        let t = to_deterministic(&d);
        assert_eq!(
            t.b,
            ChannelB {
                t_serve1: 20.0,
                p_success: 0.0,
                t_line: 10.0,
                t_serve2: 10.0
            }
        );
        assert_eq!(t.b.expected_time(), 40.0);

        let sure_fail = DecisionProblem {
            b: ChannelB {
                p_success: 0.0,
                ..d.b
            },
            ..d
        };
        assert_eq!(to_deterministic(&sure_fail), sure_fail);

        let odd = DecisionProblem {
            b: ChannelB {
                t_serve1: 20.0,
                p_success: 0.75,
                t_line: 40.0,
                t_serve2: 20.0,
            },
            ..d
        };
        assert_eq!(
            to_deterministic(&odd).b,
            ChannelB {
                t_serve1: 20.0,
                p_success: 0.0,
                t_line: 10.0,
                t_serve2: 5.0
            }
        );
    }

    #[test]
    fn deterministic_transform_preserves_expectation() {
        for scale in [Scale::Short, Scale::Long] {
            for d in build_experiment(scale) {
                let t = to_deterministic(&d);
                assert!((t.b.expected_time() - d.b.expected_time()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn grid_csv_header_and_indifference_rows() {
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &build_experiment(Scale::Short)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "scale,set_index,position,t_line_A,t_serve_A,t_serve1_B,p_B,t_line_B,t_serve2_B,exp_time_A,exp_time_B"
        );
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 33);
        for r in rows.iter().filter(|r| r[2] == "6") {
            assert_eq!(r[9], r[10]);
        }
        assert_eq!(rows[1][6], "0.3");
    }

    #[test]
    fn time_minimizer_benchmark() {
        let grid = build_experiment(Scale::Short);
        let t = TreatmentConfig::context(Scale::Short);
        let recs = simulate_choices(
            &grid,
            &t,
            &PolicySpec::time_minimizer(TieBreak::Random),
            2000,
            3,
        );
        assert_eq!(recs.len(), 2000 * 33);
        let mean = recs.iter().filter(|r| r.chose_b).count() as f64 / (2000.0 * 3.0);
        assert!((mean - 5.5).abs() < 0.05, "{mean}");

        let a = simulate_choices(
            &grid,
            &t,
            &PolicySpec::time_minimizer(TieBreak::AlwaysA),
            5,
            3,
        );
        assert_eq!(a.iter().filter(|r| r.chose_b).count(), 5 * 3 * 5);
        let b = simulate_choices(
            &grid,
            &t,
            &PolicySpec::time_minimizer(TieBreak::AlwaysB),
            5,
            3,
        );
        assert_eq!(b.iter().filter(|r| r.chose_b).count(), 5 * 3 * 6);
        for r in &a {
            assert_eq!(r.chose_b, r.position >= 7);
        }
    }

    #[test]
    fn no_subjects_no_records() {
        let grid = build_experiment(Scale::Short);
        let t = TreatmentConfig::context(Scale::Short);
        assert!(simulate_choices(
            &grid,
            &t,
            &PolicySpec::logit(UtilityParams::default()),
            0,
            1
        )
        .is_empty());
    }

    #[test]
    fn logit_indifference_share() {
        // c_nt = 0 and beta = 1 make position 6 of the transparent context
        // treatment an exact utility tie.
        let theta = UtilityParams {
            c_line: 0.05,
            c_agent: 0.03,
            c_bot: 0.04,
            c_nt: 0.0,
            beta_base: 1.0,
            beta_nudge: 1.0,
        };
        let t = TreatmentConfig::context(Scale::Short);
        let grid: Vec<_> = build_experiment(Scale::Short)
            .into_iter()
            .filter(|d| d.position == 6)
            .collect();
        let n = 4000;
        let recs = simulate_choices(&grid, &t, &PolicySpec::logit(theta), n, 11);
        let share = recs.iter().filter(|r| r.chose_b).count() as f64 / recs.len() as f64;
        let se = (0.25 / recs.len() as f64).sqrt();
        assert!((share - 0.5).abs() < 3.0 * se, "{share}");
    }

    #[test]
    fn simulation_is_reproducible_and_order_free() {
        let grid = build_experiment(Scale::Long);
        let t = TreatmentConfig::no_context_deterministic(Scale::Long);
        let p = PolicySpec::logit(UtilityParams::default());
        let seq = simulate_choices_from(&grid, &t, &p, 0, 50, 9, Execution::Sequential);
        let par = simulate_choices_from(&grid, &t, &p, 0, 50, 9, Execution::Parallel);
        assert_eq!(seq, par);
        // splitting the subject range changes nothing
        let mut split = simulate_choices_from(&grid, &t, &p, 0, 20, 9, Execution::Sequential);
        split.extend(simulate_choices_from(
            &grid,
            &t,
            &p,
            20,
            30,
            9,
            Execution::Sequential,
        ));
        assert_eq!(seq, split);
        let other = simulate_choices_from(&grid, &t, &p, 0, 50, 10, Execution::Sequential);
        assert_ne!(seq, other);
        let reseeded = PolicySpec { seed: 1, ..p };
        assert_ne!(
            seq,
            simulate_choices_from(&grid, &t, &reseeded, 0, 50, 9, Execution::Sequential)
        );
    }

    #[test]
    fn study_ids_are_unique() {
        let arms = [
            StudyArm {
                treatment: TreatmentConfig::context(Scale::Short),
                n_subjects: 3,
            },
            StudyArm {
                treatment: TreatmentConfig::context_nudge(Scale::Short),
                n_subjects: 2,
            },
        ];
        let recs = simulate_study(
            &arms,
            &PolicySpec::logit(UtilityParams::default()),
            1,
            Execution::default(),
        );
        assert_eq!(recs.len(), 5 * 33);
        let mut keys: Vec<_> = recs
            .iter()
            .map(|r| (r.subject_id, r.set_index, r.position))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), recs.len());
        assert!(recs
            .iter()
            .filter(|r| r.treatment.nudge)
            .all(|r| r.subject_id >= 3));
    }
}
