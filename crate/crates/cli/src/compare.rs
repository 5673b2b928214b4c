//! Pairwise comparison of two sets of run records.

use std::path::Path;

use ogl_core::metrics::{compare_outcomes, performance_profile, Comparison, Outcome, PerformanceProfile, ProfileEntry};
use ogl_core::outer::{OuterOption, TerminalStatus};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::run::RunSummary;

/// Reads run summaries from `dir`: its `summaries.json` if present, else its
/// own `summary.json`, else the `summary.json` of each subdirectory.
pub fn load_summaries(dir: &Path) -> Result<Vec<RunSummary>> {
    let all = dir.join("summaries.json");
    if all.exists() {
        return Ok(serde_json::from_slice(&std::fs::read(all)?)?);
    }
    let single = dir.join("summary.json");
    if single.exists() {
        return Ok(vec![serde_json::from_slice(&std::fs::read(single)?)?]);
    }
    let mut out = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let p = entry.path().join("summary.json");
        if p.exists() {
            out.push(serde_json::from_slice(&std::fs::read(p)?)?);
        }
    }
    if out.is_empty() {
        return Err(Error::NoRecords(dir.display().to_string()));
    }
    Ok(out)
}

/// Runs of one side of a comparison, optionally restricted to one option.
pub fn select(summaries: Vec<RunSummary>, option: Option<OuterOption>) -> Vec<RunSummary> {
    summaries
        .into_iter()
        .filter(|s| option.is_none_or(|o| s.option == o))
        .collect()
}

/// Runs of the two sides matched by instance name.
pub fn pair_up(left: &[RunSummary], right: &[RunSummary]) -> Vec<(RunSummary, RunSummary)> {
    left.iter()
        .filter_map(|l| {
            right
                .iter()
                .find(|r| r.instance == l.instance)
                .map(|r| (l.clone(), r.clone()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub instances: usize,
    /// Counts from the left side's point of view, over instances both sides solved.
    pub comparison: Comparison,
    pub profile: PerformanceProfile,
}

pub fn profile_of(pairs: &[(RunSummary, RunSummary)]) -> Result<PerformanceProfile> {
    let entries: Vec<ProfileEntry> = pairs
        .iter()
        .map(|(l, r)| ProfileEntry {
            instance: l.instance.clone(),
            time_i: l.time_s.max(f64::MIN_POSITIVE),
            solved_i: l.status == TerminalStatus::Solved,
            time_j: r.time_s.max(f64::MIN_POSITIVE),
            solved_j: r.status == TerminalStatus::Solved,
        })
        .collect();
    Ok(performance_profile(&entries)?)
}

/// Sparsity and objective counts over the instances both sides solved, plus
/// the time profile over all paired instances.
pub fn compare(pairs: &[(RunSummary, RunSummary)]) -> Result<ComparisonReport> {
    let outcome = |s: &RunSummary| Outcome {
        objective: s.objective,
        nonzero_groups: s.nonzero_groups,
    };
    let solved: Vec<(Outcome, Outcome)> = pairs
        .iter()
        .filter(|(l, r)| l.status == TerminalStatus::Solved && r.status == TerminalStatus::Solved)
        .map(|(l, r)| (outcome(l), outcome(r)))
        .collect();
    Ok(ComparisonReport {
        instances: pairs.len(),
        comparison: compare_outcomes(&solved),
        profile: profile_of(pairs)?,
    })
}

impl ComparisonReport {
    pub fn to_text(&self) -> String {
        let c = &self.comparison;
        format!(
            "{:<10} {:>7} {:>5} {:>6}\n{:<10} {:>7} {:>5} {:>6}\n{:<10} {:>7} {:>5} {:>6}\nprofile area: left {:.3}, right {:.3} over {} instances\n",
            "", "better", "same", "worse",
            "sparsity", c.sparsity.better, c.sparsity.same, c.sparsity.worse,
            "objective", c.objective.better, c.objective.same, c.objective.worse,
            self.profile.area_i, self.profile.area_j, self.instances
        )
    }
}
