use crate::control::{ControlPath, PathOrigin};
use crate::level::{PreparedLevel, ScoreReport};

use super::{KnotPath, Result, TraceRow};

/// Lexicographic fitness: total score, then fidelity.
pub(crate) fn better(a: &ScoreReport, b: &ScoreReport) -> bool {
    (a.total_score, a.fidelity) > (b.total_score, b.fidelity)
}

/// Scores candidates against a budget and keeps the trace.
pub(crate) struct Evaluator<'a> {
    pub level: &'a PreparedLevel,
    pub budget: usize,
    pub trace: Vec<TraceRow>,
    pub best: Option<(ControlPath, ScoreReport)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(level: &'a PreparedLevel, budget: usize) -> Self {
        Self {
            level,
            budget,
            trace: Vec::new(),
            best: None,
        }
    }

    pub fn exhausted(&self) -> bool {
        self.trace.len() >= self.budget
    }

    /// Scores `path`; `None` once the budget is spent.
    pub fn eval_path(&mut self, path: &ControlPath) -> Result<Option<ScoreReport>> {
        if self.exhausted() {
            return Ok(None);
        }
        let report = self.level.score(path)?;
        let improved = match &self.best {
            None => true,
            Some((_, b)) => better(&report, b),
        };
        if improved {
            self.best = Some((path.clone(), report.clone()));
        }
        let b = &self.best.as_ref().expect("set above").1;
        self.trace.push(TraceRow {
            index: self.trace.len() + 1,
            candidate_score: report.total_score,
            candidate_fidelity: report.fidelity,
            best_score: b.total_score,
            best_fidelity: b.fidelity,
        });
        Ok(Some(report))
    }

    pub fn eval(
        &mut self,
        candidate: &KnotPath,
        origin: PathOrigin,
    ) -> Result<Option<ScoreReport>> {
        self.eval_path(&candidate.to_path(origin))
    }
}
