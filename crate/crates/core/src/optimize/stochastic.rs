use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::control::ControlPath;
use crate::level::{PreparedLevel, ScoreReport};

use super::evaluate::{better, Evaluator};
use super::knots::{default_start, Space};
use super::local::{check_seed, finish};
use super::{Family, KnotPath, OptimizationRun, OptimizerConfig, Result};

/// Generational genetic algorithm from a uniformly random population.
pub fn stochastic_optimize(
    level: &PreparedLevel,
    config: &OptimizerConfig,
) -> Result<OptimizationRun> {
    config.validate()?;
    let space = Space::new(level.level(), config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let (x0, depth) = default_start(level.level());
    let initial = (0..config.stochastic.population)
        .map(|_| KnotPath {
            start_x0: x0,
            start_depth: depth,
            genes: (0..space.dims())
                .map(|i| rng.gen_range(space.lo[i]..=space.hi[i]))
                .collect(),
        })
        .collect();
    evolve(level, config, &space, initial, rng)
}

/// Genetic algorithm whose first generation is `population`, projected onto
/// the knot grid.
pub fn stochastic_optimize_from(
    level: &PreparedLevel,
    population: &[ControlPath],
    config: &OptimizerConfig,
) -> Result<OptimizationRun> {
    config.validate()?;
    for p in population {
        check_seed(level, p)?;
    }
    let space = Space::new(level.level(), config);
    let initial = population.iter().map(|p| space.project(p)).collect();
    evolve(
        level,
        config,
        &space,
        initial,
        ChaCha8Rng::seed_from_u64(config.rng_seed),
    )
}

fn evolve(
    level: &PreparedLevel,
    config: &OptimizerConfig,
    space: &Space,
    initial: Vec<KnotPath>,
    mut rng: ChaCha8Rng,
) -> Result<OptimizationRun> {
    let cfg = &config.stochastic;
    let origin = Family::Stochastic.origin();
    let mut ev = Evaluator::new(level, config.evaluation_budget);
    let mut pop: Vec<(KnotPath, ScoreReport)> = Vec::with_capacity(cfg.population);
    for ind in initial {
        match ev.eval(&ind, origin)? {
            Some(r) => pop.push((ind, r)),
            None => break,
        }
    }
    if pop.is_empty() {
        return Err(super::OptimizeError::InvalidConfig(
            "empty initial population".into(),
        ));
    }

    let mut generation = 0i32;
    'generations: while !ev.exhausted() {
        // stable sort keeps earlier individuals ahead on ties
        pop.sort_by(|a, b| {
            if better(&a.1, &b.1) {
                std::cmp::Ordering::Less
            } else if better(&b.1, &a.1) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        let scale = cfg.mutation_scale * cfg.mutation_decay.powi(generation);
        let target = cfg.population.max(pop.len());
        let mut next: Vec<(KnotPath, ScoreReport)> = pop.iter().take(cfg.elite).cloned().collect();
        while next.len() < target {
            let p1 = tournament(&pop, cfg.tournament, &mut rng);
            let p2 = tournament(&pop, cfg.tournament, &mut rng);
            let mut child = p1.clone();
            if rng.gen::<f64>() < cfg.crossover_probability {
                for (i, g) in child.genes.iter_mut().enumerate() {
                    let u: f64 = rng.gen_range(-cfg.blend_alpha..=1.0 + cfg.blend_alpha);
                    *g = p1.genes[i] + u * (p2.genes[i] - p1.genes[i]);
                }
            }
            if scale > 0.0 {
                for (i, g) in child.genes.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    *g += scale * space.range(i) * z;
                }
            }
            space.clamp(&mut child.genes);
            match ev.eval(&child, origin)? {
                Some(r) => next.push((child, r)),
                None => break 'generations,
            }
        }
        pop = next;
        generation += 1;
    }
    Ok(finish(level, config, ev, Family::Stochastic, None))
}

fn tournament<'p>(
    pop: &'p [(KnotPath, ScoreReport)],
    size: usize,
    rng: &mut ChaCha8Rng,
) -> &'p KnotPath {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..size {
        let other = &pop[rng.gen_range(0..pop.len())];
        if better(&other.1, &best.1) {
            best = other;
        }
    }
    &best.0
}
