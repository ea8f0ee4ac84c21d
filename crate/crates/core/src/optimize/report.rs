use serde::{Deserialize, Serialize};

use super::{OptimizationRun, OptimizeError, Result};

/// A player's score after each of their plays on one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerHistory {
    pub user_id: String,
    pub level_id: String,
    pub scores: Vec<i64>,
}

impl PlayerHistory {
    pub fn high_score(&self) -> Option<i64> {
        self.scores.iter().copied().max()
    }
}

/// Best-so-far of every run and player after `n` evaluations/plays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub runs: Vec<Option<i64>>,
    pub players: Vec<Option<i64>>,
}

/// First `n` at which a run's best-so-far reaches a player's high score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub run: usize,
    pub player: usize,
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub level_id: String,
    pub run_labels: Vec<String>,
    pub player_labels: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    pub crossovers: Vec<Crossover>,
    pub note: String,
}

pub const EQUIVALENCE_NOTE: &str = "one player play is counted as one optimizer fitness evaluation";

fn best_so_far(values: impl Iterator<Item = i64>) -> Vec<i64> {
    let mut best = i64::MIN;
    values
        .map(|v| {
            best = best.max(v);
            best
        })
        .collect()
}

/// A labelled best-so-far curve, one value per evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCurve {
    pub label: String,
    pub best_scores: Vec<i64>,
}

impl RunCurve {
    pub fn from_run(label: impl Into<String>, run: &OptimizationRun) -> Self {
        Self {
            label: label.into(),
            best_scores: run.trace.iter().map(|t| t.best_score).collect(),
        }
    }
}

/// Aligns optimiser traces and player histories on a common index `n`.
///
/// Player and run values are carried forward past the end of their data.
pub fn convergence_report(
    runs: &[OptimizationRun],
    players: &[PlayerHistory],
) -> Result<ConvergenceReport> {
    let mut ids = runs
        .iter()
        .map(|r| r.level_id.as_str())
        .chain(players.iter().map(|p| p.level_id.as_str()));
    let level_id = ids.next().unwrap_or_default().to_string();
    if let Some(other) = ids.find(|id| *id != level_id) {
        return Err(OptimizeError::MixedLevels(level_id, other.to_string()));
    }
    let curves: Vec<RunCurve> = runs
        .iter()
        .enumerate()
        .map(|(i, r)| RunCurve::from_run(format!("{}_{i}", r.config.family.as_str()), r))
        .collect();
    compare_curves(&level_id, &curves, players)
}

/// [`convergence_report`] over bare curves, e.g. traces read back from CSV.
/// Every player history must belong to `level_id`.
pub fn compare_curves(
    level_id: &str,
    runs: &[RunCurve],
    players: &[PlayerHistory],
) -> Result<ConvergenceReport> {
    if let Some(p) = players.iter().find(|p| p.level_id != level_id) {
        return Err(OptimizeError::MixedLevels(
            level_id.to_string(),
            p.level_id.clone(),
        ));
    }
    let run_curves: Vec<&Vec<i64>> = runs.iter().map(|r| &r.best_scores).collect();
    let player_curves: Vec<Vec<i64>> = players
        .iter()
        .map(|p| best_so_far(p.scores.iter().copied()))
        .collect();
    let len = run_curves
        .iter()
        .map(|c| c.len())
        .chain(player_curves.iter().map(Vec::len))
        .max()
        .unwrap_or(0);
    let at = |curve: &[i64], n: usize| -> Option<i64> {
        if curve.is_empty() {
            None
        } else {
            Some(curve[(n - 1).min(curve.len() - 1)])
        }
    };
    let rows = (1..=len)
        .map(|n| ConvergenceRow {
            n,
            runs: run_curves.iter().map(|c| at(c, n)).collect(),
            players: player_curves.iter().map(|c| at(c, n)).collect(),
        })
        .collect();

    let mut crossovers = Vec::new();
    for (ri, curve) in run_curves.iter().enumerate() {
        for (pi, p) in players.iter().enumerate() {
            let index = p
                .high_score()
                .and_then(|hs| curve.iter().position(|&b| b >= hs).map(|i| i + 1));
            crossovers.push(Crossover {
                run: ri,
                player: pi,
                index,
            });
        }
    }

    Ok(ConvergenceReport {
        level_id: level_id.to_string(),
        run_labels: runs.iter().map(|r| r.label.clone()).collect(),
        player_labels: players.iter().map(|p| p.user_id.clone()).collect(),
        rows,
        crossovers,
        note: EQUIVALENCE_NOTE.to_string(),
    })
}

impl ConvergenceReport {
    /// `n,<run labels>,<player labels>`; missing values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n");
        for l in self.run_labels.iter().chain(&self.player_labels) {
            s.push(',');
            s.push_str(l);
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.n.to_string());
            for v in r.runs.iter().chain(&r.players) {
                s.push(',');
                if let Some(v) = v {
                    s.push_str(&v.to_string());
                }
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ControlPath, PathOrigin};
    use crate::level::ScoreReport;
    use crate::optimize::{Family, OptimizerConfig, TraceRow};

    fn run(candidates: &[i64]) -> OptimizationRun {
        let mut best = i64::MIN;
        let trace: Vec<TraceRow> = candidates
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                best = best.max(c);
                TraceRow {
                    index: i + 1,
                    candidate_score: c,
                    candidate_fidelity: c as f64 / 1000.0,
                    best_score: best,
                    best_fidelity: best as f64 / 1000.0,
                }
            })
            .collect();
        OptimizationRun {
            level_id: "lvl".into(),
            config: OptimizerConfig::new(Family::Stochastic, candidates.len()),
            best_path: ControlPath::stationary(0.0, 1.0, 0.1, PathOrigin::StochasticOpt).unwrap(),
            best_report: ScoreReport {
                fidelity: best as f64 / 1000.0,
                time_used: 0.1,
                time_penalty: 0.0,
                bonus_points: 0,
                total_score: best,
                stars: 0,
                death: None,
                feedback_trace: Vec::new(),
            },
            evaluations_used: trace.len(),
            trace,
            seed: None,
        }
    }

    fn player(scores: Vec<i64>) -> PlayerHistory {
        PlayerHistory {
            user_id: "p".into(),
            level_id: "lvl".into(),
            scores,
        }
    }

    #[test]
    fn player_plateau_crossed_late() {
        // players climb fast to 900 of 1000 and stay there; the optimiser
        // gains 10 points per evaluation and first reaches 900 at n = 90
        let mut plays = vec![300, 600, 800, 880, 900, 870];
        plays.extend(std::iter::repeat_n(895, 194));
        let ga: Vec<i64> = (1..=150).map(|n| (10 * n).min(1000)).collect();
        let report = convergence_report(&[run(&ga)], &[player(plays)]).unwrap();
        assert_eq!(report.crossovers[0].index, Some(90));
        assert_eq!(report.rows.len(), 200);
        assert_eq!(report.rows[4].players[0], Some(900));
        assert_eq!(report.rows[5].players[0], Some(900));
        assert_eq!(report.rows[88].runs[0], Some(890));
        // the run is carried forward past its last evaluation
        assert_eq!(report.rows[199].runs[0], Some(1000));
        assert_eq!(report.note, EQUIVALENCE_NOTE);
    }

    #[test]
    fn player_always_ahead_means_no_crossover() {
        let report = convergence_report(&[run(&[100, 200, 300])], &[player(vec![400])]).unwrap();
        assert_eq!(report.crossovers[0].index, None);
        assert_eq!(report.rows[2].players[0], Some(400));
    }

    #[test]
    fn csv_layout() {
        let report =
            convergence_report(&[run(&[5, 3])], &[player(vec![4]), player(vec![])]).unwrap();
        assert_eq!(report.to_csv(), "n,stochastic_0,p,p\n1,5,4,\n2,5,4,\n");
        assert_eq!(report.crossovers[1].index, None);
    }

    #[test]
    fn empty_inputs() {
        let report = convergence_report(&[], &[]).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.to_csv(), "n\n");
    }

    #[test]
    fn curves_match_runs() {
        let r = run(&[5, 3, 9]);
        let from_runs =
            convergence_report(std::slice::from_ref(&r), &[player(vec![4, 8])]).unwrap();
        let curve = RunCurve::from_run("stochastic_0", &r);
        assert_eq!(curve.best_scores, [5, 5, 9]);
        let from_curves = compare_curves("lvl", &[curve], &[player(vec![4, 8])]).unwrap();
        assert_eq!(from_runs, from_curves);
        assert_eq!(from_curves.crossovers[0].index, Some(3));
        let mut other = player(vec![1]);
        other.level_id = "elsewhere".into();
        assert!(matches!(
            compare_curves("lvl", &[], &[other]),
            Err(OptimizeError::MixedLevels(..))
        ));
    }
}
