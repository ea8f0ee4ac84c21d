use crate::control::ControlPath;
use crate::level::PreparedLevel;

use super::evaluate::{better, Evaluator};
use super::knots::Space;
use super::local::{check_seed, climb, finish};
use super::{Family, OptimizationRun, OptimizeError, OptimizerConfig, Result, SeedChoice};

/// Scores every seed, then hill-climbs from the best one with what is left of
/// the budget.
pub fn hybrid_optimize(
    level: &PreparedLevel,
    seeds: &[ControlPath],
    config: &OptimizerConfig,
) -> Result<OptimizationRun> {
    config.validate()?;
    if seeds.is_empty() {
        return Err(OptimizeError::NoSeeds);
    }
    for s in seeds {
        check_seed(level, s)?;
    }
    let space = Space::new(level.level(), config);
    let mut ev = Evaluator::new(level, config.evaluation_budget);
    let mut chosen: Option<(usize, crate::level::ScoreReport)> = None;
    for (i, seed) in seeds.iter().enumerate() {
        let Some(report) = ev.eval_path(seed)? else {
            break;
        };
        if chosen.as_ref().is_none_or(|(_, b)| better(&report, b)) {
            chosen = Some((i, report));
        }
    }
    let (index, report) = chosen.expect("budget >= 1 scores the first seed");
    let choice = SeedChoice {
        index,
        origin: seeds[index].origin,
        score: report.total_score,
    };
    climb(
        &mut ev,
        &space,
        space.project(&seeds[index]),
        &config.local,
        Family::Hybrid.origin(),
    )?;
    Ok(finish(level, config, ev, Family::Hybrid, Some(choice)))
}
