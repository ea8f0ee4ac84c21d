use crate::control::{ControlPath, PathOrigin};
use crate::level::PreparedLevel;

use super::evaluate::{better, Evaluator};
use super::knots::Space;
use super::{
    Family, KnotPath, LocalConfig, OptimizationRun, OptimizeError, OptimizerConfig, Result,
};

/// Coordinate-wise hill climb from `seed`, resampled onto the knot grid.
///
/// Each coordinate is nudged by ±step; an improving move is repeated in the
/// same direction until it stops paying off, with the step growing after
/// every streak of acceptances. A full cycle without acceptance shrinks all
/// steps.
pub fn local_optimize(
    level: &PreparedLevel,
    seed: &ControlPath,
    config: &OptimizerConfig,
) -> Result<OptimizationRun> {
    config.validate()?;
    check_seed(level, seed)?;
    let space = Space::new(level.level(), config);
    let mut ev = Evaluator::new(level, config.evaluation_budget);
    climb(
        &mut ev,
        &space,
        space.project(seed),
        &config.local,
        Family::Local.origin(),
    )?;
    Ok(finish(level, config, ev, Family::Local, None))
}

pub(crate) fn check_seed(level: &PreparedLevel, seed: &ControlPath) -> Result<()> {
    level
        .check_path(seed)
        .map_err(|e| OptimizeError::InvalidSeed(e.to_string()))
}

pub(crate) fn climb(
    ev: &mut Evaluator<'_>,
    space: &Space,
    start: KnotPath,
    cfg: &LocalConfig,
    origin: PathOrigin,
) -> Result<()> {
    let mut cur = start;
    let Some(mut cur_report) = ev.eval(&cur, origin)? else {
        return Ok(());
    };
    let dims = space.dims();
    let fraction = |i: usize| {
        if i == dims - 1 {
            cfg.duration_step
        } else if i.is_multiple_of(2) {
            cfg.x_step
        } else {
            cfg.depth_step
        }
    };
    let initial: Vec<f64> = (0..dims).map(|i| fraction(i) * space.range(i)).collect();
    let minimum: Vec<f64> = (0..dims).map(|i| cfg.min_step * space.range(i)).collect();
    let mut steps = initial.clone();

    loop {
        let mut accepted_any = false;
        for c in 0..dims {
            for sign in [1.0, -1.0] {
                let mut step = steps[c];
                let mut streak = 0;
                let mut moved = false;
                loop {
                    let mut cand = cur.clone();
                    cand.genes[c] = (cand.genes[c] + sign * step).clamp(space.lo[c], space.hi[c]);
                    if cand.genes[c] == cur.genes[c] {
                        break;
                    }
                    let Some(report) = ev.eval(&cand, origin)? else {
                        return Ok(());
                    };
                    if !better(&report, &cur_report) {
                        break;
                    }
                    cur = cand;
                    cur_report = report;
                    moved = true;
                    streak += 1;
                    if streak % cfg.streak_length == 0 {
                        step = (step * cfg.streak_growth).min(initial[c]);
                    }
                }
                steps[c] = step;
                if moved {
                    accepted_any = true;
                    break;
                }
            }
        }
        if !accepted_any {
            for s in &mut steps {
                *s *= cfg.step_decay;
            }
            if steps.iter().zip(&minimum).all(|(s, m)| s <= m) {
                return Ok(());
            }
        }
    }
}

pub(crate) fn finish(
    level: &PreparedLevel,
    config: &OptimizerConfig,
    ev: Evaluator<'_>,
    family: Family,
    seed: Option<super::SeedChoice>,
) -> OptimizationRun {
    let (path, report) = ev.best.expect("budget >= 1 guarantees one evaluation");
    OptimizationRun {
        level_id: level.level().id.clone(),
        config: *config,
        best_path: path.with_origin(family.origin()),
        best_report: report,
        evaluations_used: ev.trace.len(),
        trace: ev.trace,
        seed,
    }
}
