//! Aggregation of episode results into per-variant tables.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::{Difficulty, EpisodeResult, FailureMode, HarnessError};
use crate::agent::AgentMode;

/// Mean and sample standard deviation over repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn fmt_prec(&self, prec: usize) -> String {
        format!("{:.p$} ± {:.p$}", self.mean, self.std, p = prec)
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_prec(3))
    }
}

/// `None` for an empty slice; a single value has zero spread.
pub fn mean_std(xs: &[f64]) -> Option<Stat> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    Some(Stat { mean, std, n })
}

/// One (variant, distractor level) row. Statistics cover completed
/// episodes; token-limit episodes are only counted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub variant: AgentMode,
    pub distractors: usize,
    pub episodes: usize,
    pub completed: usize,
    pub token_limited: usize,
    pub repetitions: usize,
    pub success: Option<Stat>,
    pub easy_success: Option<f64>,
    pub hard_success: Option<f64>,
    pub step_latency_s: Option<Stat>,
    pub cumulative_tokens: Option<Stat>,
    pub full_graph_requests: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub groups: Vec<GroupSummary>,
    /// Result lines that could not be parsed.
    pub corrupt: usize,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn rate(rs: &[&EpisodeResult]) -> Option<f64> {
    mean(rs.iter().map(|r| if r.success { 1.0 } else { 0.0 }))
}

pub fn summarize(results: &[EpisodeResult]) -> SuiteSummary {
    let mut groups: BTreeMap<(AgentMode, usize), Vec<&EpisodeResult>> = BTreeMap::new();
    for r in results {
        groups.entry((r.variant, r.distractors)).or_default().push(r);
    }
    let groups = groups
        .into_iter()
        .map(|((variant, distractors), rs)| {
            let completed: Vec<&EpisodeResult> = rs
                .iter()
                .copied()
                .filter(|r| r.failure_mode != FailureMode::TokenLimit)
                .collect();
            let mut reps: BTreeMap<u64, Vec<&EpisodeResult>> = BTreeMap::new();
            for r in &completed {
                reps.entry(r.seed).or_default().push(r);
            }
            let per_rep = |f: &dyn Fn(&[&EpisodeResult]) -> Option<f64>| {
                let xs: Vec<f64> = reps.values().filter_map(|v| f(v)).collect();
                mean_std(&xs)
            };
            let by_diff = |d: Difficulty| {
                let v: Vec<&EpisodeResult> =
                    completed.iter().copied().filter(|r| r.difficulty == d).collect();
                rate(&v)
            };
            GroupSummary {
                variant,
                distractors,
                episodes: rs.len(),
                completed: completed.len(),
                token_limited: rs.len() - completed.len(),
                repetitions: reps.len(),
                success: per_rep(&rate),
                easy_success: by_diff(Difficulty::Easy),
                hard_success: by_diff(Difficulty::Hard),
                step_latency_s: per_rep(&|v| mean(v.iter().map(|r| r.avg_step_latency_s))),
                cumulative_tokens: per_rep(&|v| {
                    mean(v.iter().map(|r| r.cumulative_observation_tokens as f64))
                }),
                full_graph_requests: mean(completed.iter().map(|r| r.full_graph_requests as f64)),
            }
        })
        .collect();
    SuiteSummary { groups, corrupt: 0 }
}

/// Parses a results JSONL body; blank lines are ignored and unparseable
/// lines counted.
pub fn read_results(text: &str) -> (Vec<EpisodeResult>, usize) {
    let mut out = Vec::new();
    let mut corrupt = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) => corrupt += 1,
        }
    }
    (out, corrupt)
}

pub fn summarize_files<P: AsRef<Path>>(paths: &[P]) -> Result<SuiteSummary, HarnessError> {
    let mut all = Vec::new();
    let mut corrupt = 0;
    for p in paths {
        let p = p.as_ref();
        let text = std::fs::read_to_string(p)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
        let (rs, bad) = read_results(&text);
        all.extend(rs);
        corrupt += bad;
    }
    let mut s = summarize(&all);
    s.corrupt = corrupt;
    Ok(s)
}

fn opt_stat(s: Option<Stat>, prec: usize) -> String {
    s.map_or_else(|| "-".into(), |s| s.fmt_prec(prec))
}

fn opt_num(x: Option<f64>, prec: usize) -> String {
    x.map_or_else(|| "-".into(), |x| format!("{x:.prec$}"))
}

const HEADERS: [&str; 10] = [
    "variant",
    "distractors",
    "episodes",
    "success",
    "easy",
    "hard",
    "step time (s)",
    "cum. tokens",
    "full-graph",
    "token-limit",
];

impl SuiteSummary {
    fn cells(&self) -> Vec<[String; 10]> {
        self.groups
            .iter()
            .map(|g| {
                [
                    g.variant.to_string(),
                    g.distractors.to_string(),
                    g.episodes.to_string(),
                    opt_stat(g.success, 3),
                    opt_num(g.easy_success, 3),
                    opt_num(g.hard_success, 3),
                    opt_stat(g.step_latency_s, 3),
                    opt_stat(g.cumulative_tokens, 1),
                    opt_num(g.full_graph_requests, 2),
                    g.token_limited.to_string(),
                ]
            })
            .collect()
    }

    /// Fixed-width text table; deterministic for identical input.
    pub fn render(&self) -> String {
        let rows = self.cells();
        let mut widths: Vec<usize> = HEADERS.iter().map(|h| h.chars().count()).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(HEADERS.to_vec());
        out.push('\n');
        for r in &rows {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        if self.corrupt > 0 {
            out.push_str(&format!("skipped {} corrupt record(s)\n", self.corrupt));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = HEADERS.join(",");
        out.push('\n');
        for r in self.cells() {
            let quoted: Vec<String> = r
                .iter()
                .map(|c| if c.contains(',') { format!("\"{c}\"") } else { c.clone() })
                .collect();
            out.push_str(&quoted.join(","));
            out.push('\n');
        }
        out
    }

    pub fn group(&self, variant: AgentMode, distractors: usize) -> Option<&GroupSummary> {
        self.groups
            .iter()
            .find(|g| g.variant == variant && g.distractors == distractors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(variant: AgentMode, seed: u64, success: bool, tokens: usize) -> EpisodeResult {
        EpisodeResult {
            task_id: "t".into(),
            scene_id: "s".into(),
            variant,
            difficulty: Difficulty::Easy,
            seed,
            distractors: 0,
            success,
            steps: 3,
            failure_mode: if success { FailureMode::None } else { FailureMode::StepLimit },
            avg_step_latency_s: 0.5,
            cumulative_observation_tokens: tokens,
            full_graph_requests: 0,
            malformed_steps: 0,
            llm_calls: 3,
        }
    }

    #[test]
    fn empty_results_render_headers_only() {
        let text = summarize(&[]).render();
        assert_eq!(text.lines().count(), 1);
        for h in HEADERS {
            assert!(text.contains(h));
        }
    }

    #[test]
    fn single_success_has_zero_spread() {
        let s = summarize(&[result(AgentMode::EragStrict, 0, true, 10)]);
        assert_eq!(s.groups[0].success.unwrap().to_string(), "1.000 ± 0.000");
        assert!(s.render().contains("1.000 ± 0.000"));
    }

    #[test]
    fn token_limited_episodes_are_reported_apart() {
        let mut tl = result(AgentMode::FullMem, 0, false, 999);
        tl.failure_mode = FailureMode::TokenLimit;
        let s = summarize(&[tl, result(AgentMode::FullMem, 0, true, 10)]);
        let g = &s.groups[0];
        assert_eq!((g.episodes, g.completed, g.token_limited), (2, 1, 1));
        assert_eq!(g.cumulative_tokens.unwrap().mean, 10.0);
        assert_eq!(g.success.unwrap().mean, 1.0);
    }

    #[test]
    fn corrupt_lines_are_counted() {
        let good = serde_json::to_string(&result(AgentMode::React, 1, true, 5)).unwrap();
        let (rs, bad) = read_results(&format!("{good}\n{{not json\n\n{good}\n"));
        assert_eq!((rs.len(), bad), (2, 1));
    }

    #[test]
    fn csv_has_one_line_per_group() {
        let s = summarize(&[
            result(AgentMode::React, 0, true, 1),
            result(AgentMode::FullMem, 0, false, 1),
        ]);
        assert_eq!(s.render_csv().lines().count(), 3);
    }
}
