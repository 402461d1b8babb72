//! Candidate-path parsing, validation, failure classification, and the six
//! aggregate metrics (CR, FR, OR, GM, MSE, RT).
//!
//! Compliance covers format only: non-empty, correct endpoints, unit cardinal
//! steps. Feasibility adds bounds and obstacle avoidance. Optimality requires
//! the generated length to equal the ground-truth shortest length. GM and MSE
//! are computed over feasible routes only; CR/FR/OR keep the full case count
//! as denominator.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Coord, GridWorld, TaskCase};

/// A route parsed from a model reply. May be empty; validity is the
/// validator's verdict, not a type invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePath {
    pub points: Vec<Coord>,
    pub raw_text: String,
}

impl CandidatePath {
    pub fn empty(raw_text: impl Into<String>) -> Self {
        CandidatePath { points: Vec::new(), raw_text: raw_text.into() }
    }
}

/// The five route failure classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorType {
    InvalidStepDistance,
    PathThroughObstacle,
    OutOfBounds,
    EmptyPath,
    StartEndMismatch,
}

impl ErrorType {
    /// Precedence order used to pick `primary_error` for stacked error counts.
    pub const PRECEDENCE: [ErrorType; 5] = [
        ErrorType::EmptyPath,
        ErrorType::StartEndMismatch,
        ErrorType::InvalidStepDistance,
        ErrorType::OutOfBounds,
        ErrorType::PathThroughObstacle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorType::InvalidStepDistance => "invalid_step_distance",
            ErrorType::PathThroughObstacle => "path_through_obstacle",
            ErrorType::OutOfBounds => "out_of_bounds",
            ErrorType::EmptyPath => "empty_path",
            ErrorType::StartEndMismatch => "start_end_mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub compliant: bool,
    pub feasible: bool,
    pub optimal: bool,
    /// Every violated class, in precedence order.
    pub error_flags: Vec<ErrorType>,
    pub primary_error: Option<ErrorType>,
    /// Step count of the candidate; None for an empty candidate.
    pub gen_len: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub verdict: Verdict,
    pub optimal_len: u32,
    pub latency_s: f64,
    pub prompt_kind: String,
    pub model_id: String,
}

/// One row of the report: CR/FR/OR in percent, GM reported ×100, MSE in
/// squared steps, RT in seconds. GM/MSE are None when no feasible case exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub cr: f64,
    pub fr: f64,
    pub or: f64,
    pub gm: Option<f64>,
    pub mse: Option<f64>,
    pub rt: f64,
    pub n_cases: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
}

fn pair_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)").unwrap())
}

fn list_regex() -> &'static Regex {
    // A bracketed list whose content is only coordinate pairs, commas, and
    // whitespace (possibly empty).
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"\[\s*(?:\(\s*-?\d+\s*,\s*-?\d+\s*\)\s*(?:,\s*\(\s*-?\d+\s*,\s*-?\d+\s*\)\s*)*,?\s*)?\]",
        )
        .unwrap()
    })
}

/// Extract the last maximal bracketed list of integer coordinate pairs.
/// "[]" or no match yields an empty candidate; the validator classifies that
/// as EmptyPath. Chain-of-thought preambles before the final list are
/// tolerated by design.
pub fn parse_path(text: &str) -> CandidatePath {
    let Some(m) = list_regex().find_iter(text).last() else {
        return CandidatePath::empty(text);
    };
    let points: Vec<Coord> = pair_regex()
        .captures_iter(m.as_str())
        .map(|cap| Coord::new(cap[1].parse().unwrap(), cap[2].parse().unwrap()))
        .collect();
    CandidatePath { points, raw_text: text.to_string() }
}

/// Validate a candidate against its task: flag every violated class, then
/// derive compliant/feasible/optimal and the primary error under the fixed
/// precedence.
pub fn validate(world: &GridWorld, case: &TaskCase, cand: &CandidatePath) -> Verdict {
    let mut flags: Vec<ErrorType> = Vec::new();
    let pts = &cand.points;
    if pts.is_empty() {
        flags.push(ErrorType::EmptyPath);
    } else {
        if pts[0] != case.start || *pts.last().unwrap() != case.end {
            flags.push(ErrorType::StartEndMismatch);
        }
        if pts.windows(2).any(|w| w[0].manhattan(w[1]) != 1) {
            flags.push(ErrorType::InvalidStepDistance);
        }
        if pts.iter().any(|&c| !world.in_bounds(c)) {
            flags.push(ErrorType::OutOfBounds);
        }
        if pts.iter().any(|&c| world.is_obstacle(c)) {
            flags.push(ErrorType::PathThroughObstacle);
        }
    }
    let flagged = |e: ErrorType| flags.contains(&e);
    let compliant = !pts.is_empty()
        && !flagged(ErrorType::StartEndMismatch)
        && !flagged(ErrorType::InvalidStepDistance);
    let feasible = flags.is_empty();
    let gen_len = if pts.is_empty() { None } else { Some((pts.len() - 1) as u32) };
    let optimal = feasible && gen_len == Some(case.optimal_len);
    let ordered: Vec<ErrorType> =
        ErrorType::PRECEDENCE.iter().copied().filter(|&e| flagged(e)).collect();
    let primary_error = ordered.first().copied();
    Verdict { compliant, feasible, optimal, error_flags: ordered, primary_error, gen_len }
}

/// exp(mean of log(gen/opt)). Both lengths zero contribute a ratio of 1;
/// any other non-positive length is undefined.
pub fn geometric_mean(pairs: &[(u32, u32)]) -> Result<f64, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::Undefined("geometric mean of empty input"));
    }
    let mut sum = 0.0;
    for &(gen, opt) in pairs {
        match (gen, opt) {
            (0, 0) => {} // ratio defined as 1, log term 0
            (_, 0) | (0, _) => {
                return Err(MetricError::Undefined("geometric mean with zero-length route"))
            }
            (g, o) => sum += (g as f64 / o as f64).ln(),
        }
    }
    Ok((sum / pairs.len() as f64).exp())
}

/// Mean of (gen - opt)^2.
pub fn mse(pairs: &[(u32, u32)]) -> Result<f64, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::Undefined("MSE of empty input"));
    }
    let sum: f64 = pairs
        .iter()
        .map(|&(gen, opt)| {
            let d = gen as f64 - opt as f64;
            d * d
        })
        .sum();
    Ok(sum / pairs.len() as f64)
}

/// Aggregate one (model, prompt, size) group. GM/MSE over feasible cases
/// only; RT is the mean latency over all cases including failures.
pub fn aggregate(results: &[CaseResult]) -> AggregateMetrics {
    let n = results.len() as f64;
    let n_comp = results.iter().filter(|r| r.verdict.compliant).count() as f64;
    let n_feas = results.iter().filter(|r| r.verdict.feasible).count() as f64;
    let n_optm = results.iter().filter(|r| r.verdict.optimal).count() as f64;
    let feasible_pairs: Vec<(u32, u32)> = results
        .iter()
        .filter(|r| r.verdict.feasible)
        .map(|r| (r.verdict.gen_len.expect("feasible implies non-empty"), r.optimal_len))
        .collect();
    AggregateMetrics {
        cr: 100.0 * n_comp / n,
        fr: 100.0 * n_feas / n,
        or: 100.0 * n_optm / n,
        gm: geometric_mean(&feasible_pairs).ok().map(|g| g * 100.0),
        mse: mse(&feasible_pairs).ok(),
        rt: results.iter().map(|r| r.latency_s).sum::<f64>() / n,
        n_cases: results.len() as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Obstacle;

    fn example1() -> (GridWorld, TaskCase) {
        let world = GridWorld::new(
            10,
            vec![
                Obstacle::new(Coord::new(1, 2), Coord::new(3, 4)),
                Obstacle::new(Coord::new(2, 5), Coord::new(4, 6)),
            ],
            0,
        );
        let path = crate::solvers::dijkstra_shortest(&world, Coord::new(3, 7), Coord::new(4, 3))
            .unwrap()
            .unwrap();
        let case = TaskCase {
            case_id: "ex1".into(),
            env_index: 0,
            start: Coord::new(3, 7),
            end: Coord::new(4, 3),
            optimal_len: path.len() as u32,
            reference_path: path.points,
        };
        (world, case)
    }

    fn pts(raw: &[(i32, i32)]) -> Vec<Coord> {
        raw.iter().map(|&(x, y)| Coord::new(x, y)).collect()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_path("Path: [(3, 7), (4, 7)]").points, pts(&[(3, 7), (4, 7)]));
        assert!(parse_path("[]").points.is_empty());
        assert!(parse_path("no route exists, sorry").points.is_empty());
        // Last list wins over chain-of-thought preambles.
        let text = "First I consider [(0, 0), (0, 1)].\nFinal: [(1, 1), (1, 2)]";
        assert_eq!(parse_path(text).points, pts(&[(1, 1), (1, 2)]));
        // Bracketed prose is not a coordinate list.
        assert_eq!(parse_path("[see above] [(2, 3)]").points, pts(&[(2, 3)]));
        // Negative coordinates parse; the validator flags them.
        assert_eq!(parse_path("[(-1, 0)]").points, pts(&[(-1, 0)]));
    }

    #[test]
    fn validate_optimal_reference_path() {
        let (world, case) = example1();
        let cand = CandidatePath {
            points: pts(&[(3, 7), (4, 7), (5, 7), (5, 6), (5, 5), (5, 4), (5, 3), (4, 3)]),
            raw_text: String::new(),
        };
        let v = validate(&world, &case, &cand);
        assert!(v.compliant && v.feasible && v.optimal);
        assert!(v.error_flags.is_empty());
        assert_eq!(v.gen_len, Some(7));
    }

    #[test]
    fn validate_non_unit_jump() {
        let (world, case) = example1();
        let cand = CandidatePath { points: pts(&[(3, 7), (4, 3)]), raw_text: String::new() };
        let v = validate(&world, &case, &cand);
        assert!(!v.compliant);
        assert!(v.error_flags.contains(&ErrorType::InvalidStepDistance));
        assert!(!v.error_flags.contains(&ErrorType::StartEndMismatch));
        assert_eq!(v.primary_error, Some(ErrorType::InvalidStepDistance));
    }

    #[test]
    fn validate_empty() {
        let (world, case) = example1();
        let v = validate(&world, &case, &CandidatePath::empty(""));
        assert!(!v.compliant && !v.feasible);
        assert_eq!(v.error_flags, vec![ErrorType::EmptyPath]);
        assert_eq!(v.primary_error, Some(ErrorType::EmptyPath));
        assert_eq!(v.gen_len, None);
    }

    #[test]
    fn validate_obstacle_hit() {
        let (world, case) = example1();
        // Walks straight through (2,5), inside the second obstacle.
        let cand = CandidatePath {
            points: pts(&[
                (3, 7), (2, 7), (2, 6), (2, 5), (2, 4), (2, 3), (2, 2), (3, 2), (4, 2), (4, 3),
            ]),
            raw_text: String::new(),
        };
        let v = validate(&world, &case, &cand);
        assert!(v.compliant && !v.feasible);
        assert_eq!(v.primary_error, Some(ErrorType::PathThroughObstacle));
    }

    #[test]
    fn gm_examples() {
        assert_eq!(geometric_mean(&[(7, 7), (8, 8)]).unwrap(), 1.0);
        let gm = geometric_mean(&[(9, 7), (8, 8)]).unwrap();
        assert!((gm - (0.5 * (9.0f64 / 7.0).ln()).exp()).abs() < 1e-12);
        assert!((gm - 1.13389).abs() < 1e-5);
        assert!((geometric_mean(&[(9, 7)]).unwrap() - 9.0 / 7.0).abs() < 1e-12);
        assert!(geometric_mean(&[]).is_err());
        assert!(geometric_mean(&[(0, 7)]).is_err());
        assert_eq!(geometric_mean(&[(0, 0)]).unwrap(), 1.0);
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[(7, 7), (8, 8)]).unwrap(), 0.0);
        assert_eq!(mse(&[(9, 7), (8, 8)]).unwrap(), 2.0);
        assert_eq!(mse(&[(10, 7)]).unwrap(), 9.0);
        assert!(mse(&[]).is_err());
    }

    fn result(compliant: bool, feasible: bool, optimal: bool, gen: u32, opt: u32) -> CaseResult {
        CaseResult {
            case_id: "c".into(),
            verdict: Verdict {
                compliant,
                feasible,
                optimal,
                error_flags: if feasible { vec![] } else { vec![ErrorType::PathThroughObstacle] },
                primary_error: if feasible { None } else { Some(ErrorType::PathThroughObstacle) },
                gen_len: Some(gen),
            },
            optimal_len: opt,
            latency_s: 0.5,
            prompt_kind: "vanilla".into(),
            model_id: "agent".into(),
        }
    }

    #[test]
    fn aggregate_hand_counts() {
        // 5 cases: 3 compliant, 2 feasible, 1 optimal.
        let results = vec![
            result(true, true, true, 7, 7),
            result(true, true, false, 9, 7),
            result(true, false, false, 9, 7),
            result(false, false, false, 5, 7),
            result(false, false, false, 5, 7),
        ];
        let m = aggregate(&results);
        assert_eq!((m.cr, m.fr, m.or), (60.0, 40.0, 20.0));
        assert_eq!(m.n_cases, 5);
    }

    #[test]
    fn aggregate_feasible_population() {
        let results = vec![result(true, true, false, 9, 7), result(true, true, true, 8, 8)];
        let m = aggregate(&results);
        assert!((m.gm.unwrap() - 113.389).abs() < 1e-3);
        assert_eq!(m.mse.unwrap(), 2.0);
        assert_eq!(m.rt, 0.5);
    }

    #[test]
    fn aggregate_no_feasible_is_undefined() {
        let results = vec![result(false, false, false, 5, 7)];
        let m = aggregate(&results);
        assert!(m.gm.is_none() && m.mse.is_none());
    }

    #[test]
    fn parser_idempotent_on_serialized_paths() {
        let p = crate::solvers::Path::new(pts(&[(3, 7), (4, 7), (4, 6)]));
        assert_eq!(parse_path(&p.to_text()).points, p.points);
    }

    #[test]
    fn error_names_are_fixed() {
        assert_eq!(serde_json::to_string(&ErrorType::InvalidStepDistance).unwrap(),
                   "\"invalid_step_distance\"");
        assert_eq!(ErrorType::OutOfBounds.name(), "out_of_bounds");
    }
}
