//! Uptake counts and the hypothesis tests applied to them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::design::{ChoiceRecord, POSITIONS_PER_SET};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UptakeSummary {
    /// Channel B count for every (subject, set), ordered by subject then set.
    pub per_subject_per_set_b_count: Vec<u32>,
    pub mean_uptake: f64,
    pub n_subjects: usize,
}

/// Counts Channel B choices per subject and decision set.
pub fn uptake_counts(records: &[ChoiceRecord]) -> Result<UptakeSummary> {
    if records.is_empty() {
        return Err(Error::Empty("choice records"));
    }
    let mut groups: BTreeMap<(u64, u8), (usize, u32, u16)> = BTreeMap::new();
    for r in records {
        let g = groups
            .entry((r.subject_id, r.set_index))
            .or_insert((0, 0, 0));
        let bit = 1u16 << r.position.min(15);
        if g.2 & bit != 0 {
            return Err(Error::DuplicateRecord {
                subject_id: r.subject_id,
                set_index: r.set_index,
                position: r.position,
            });
        }
        g.2 |= bit;
        g.0 += 1;
        g.1 += u32::from(r.chose_b);
    }
    for (&(subject_id, set_index), &(count, _, _)) in &groups {
        if count != usize::from(POSITIONS_PER_SET) {
            return Err(Error::IncompleteSet {
                subject_id,
                set_index,
                count,
            });
        }
    }
    let counts: Vec<u32> = groups.values().map(|g| g.1).collect();
    let mut subjects: Vec<u64> = groups.keys().map(|k| k.0).collect();
    subjects.dedup();
    let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / counts.len() as f64;
    Ok(UptakeSummary {
        per_subject_per_set_b_count: counts,
        mean_uptake: mean,
        n_subjects: subjects.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    Two,
    /// Alternative: mean below `mu0`.
    Lower,
    /// Alternative: mean above `mu0`.
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    pub p: f64,
}

pub fn one_sample_t(values: &[f64], mu0: f64, sidedness: Sidedness) -> Result<TTest> {
    let n = values.len();
    if n < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 values, found {n}"
        )));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateSample("zero variance".into()));
    }
    let t = (mean - mu0) / (var / nf).sqrt();
    let df = n - 1;
    let dist =
        StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::DegenerateSample(e.to_string()))?;
    let lower = dist.cdf(t);
    let upper = dist.sf(t);
    let p = match sidedness {
        Sidedness::Lower => lower,
        Sidedness::Upper => upper,
        Sidedness::Two => (2.0 * lower.min(upper)).min(1.0),
    };
    Ok(TTest { t, df, p })
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Two-sided normal-approximation test of `k` successes in `n` trials
/// against `p0`, with continuity correction.
pub fn proportion_test(k: u64, n: u64, p0: f64) -> Result<f64> {
    if n == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k}, n = {n}")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidParameter(format!("p0 = {p0}")));
    }
    let nf = n as f64;
    let numerator = ((k as f64 - nf * p0).abs() - 0.5).max(0.0);
    let z = numerator / (nf * p0 * (1.0 - p0)).sqrt();
    Ok((2.0 * standard_normal().sf(z)).min(1.0))
}

/// Holm step-down adjustment; output order matches input order.
pub fn holm_adjust(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!(
            "p-value {bad} outside [0, 1]"
        )));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p_values[i]).min(1.0);
        running = running.max(scaled);
        adjusted[i] = running;
    }
    Ok(adjusted)
}
