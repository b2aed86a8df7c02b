//! Generational evolution of multi-tree individuals.
//!
//! Ramped half-and-half initialisation, tournament selection, subtree
//! crossover and mutation on one randomly chosen tree per parent, and
//! elitism. All random decisions come from a single seeded generator on the
//! calling thread; only fitness evaluation fans out, so a run is fully
//! determined by its configuration and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fitness::{FitnessContext, Normalisation};
use crate::gp::{Individual, InitMethod, Tree, TreeGen};
use crate::neighbors::NeighborIndex;

pub type RunRng = ChaCha8Rng;

/// Deepest tree produced at initialisation, below `max_depth`.
pub const INIT_DEPTH_CAP: usize = 6;
/// Probability that variation picks a function node when one exists.
pub const INTERNAL_NODE_BIAS: f64 = 0.9;
/// Crossover attempts before the parents are copied unchanged.
pub const CROSSOVER_RETRIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub generations: usize,
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism_count: usize,
    pub tournament_size: usize,
    pub min_depth: usize,
    pub max_depth: usize,
    /// Output dimensionality (number of trees).
    pub t: usize,
    /// Neighbour block parameter.
    pub k: usize,
    /// Standard deviation of the agreement Gaussian.
    pub theta: f64,
    pub seed: u64,
    /// Probability that a terminal is a feature rather than a constant.
    pub p_feat: f64,
    pub normalisation: Normalisation,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            generations: 1000,
            population_size: 1024,
            crossover_rate: 0.8,
            mutation_rate: 0.2,
            elitism_count: 10,
            tournament_size: 7,
            min_depth: 2,
            max_depth: 8,
            t: 2,
            k: 10,
            theta: 20.0,
            seed: 0,
            p_feat: 0.9,
            normalisation: Normalisation::SelectedPairs,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        let rates_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rates_ok(self.crossover_rate) || !rates_ok(self.mutation_rate) {
            return fail("operator rates must lie in [0, 1]".into());
        }
        if self.crossover_rate + self.mutation_rate > 1.0 + 1e-12 {
            return fail(format!(
                "crossover_rate + mutation_rate = {} exceeds 1",
                self.crossover_rate + self.mutation_rate
            ));
        }
        if self.population_size == 0 {
            return fail("population_size must be positive".into());
        }
        if self.elitism_count >= self.population_size {
            return fail(format!(
                "elitism_count {} must be below population_size {}",
                self.elitism_count, self.population_size
            ));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return fail(format!(
                "tournament_size {} must be in 1..={}",
                self.tournament_size, self.population_size
            ));
        }
        if self.min_depth < 2 || self.min_depth > self.max_depth {
            return fail(format!(
                "depth bounds must satisfy 2 <= min_depth ({}) <= max_depth ({})",
                self.min_depth, self.max_depth
            ));
        }
        if self.t == 0 {
            return fail("t must be at least 1".into());
        }
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return fail("theta must be positive".into());
        }
        if !rates_ok(self.p_feat) {
            return fail("p_feat must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Checks the configuration against a dataset.
    pub fn validate_for(&self, ds: &Dataset) -> Result<()> {
        self.validate()?;
        if self.t > ds.d() {
            return Err(Error::Config(format!(
                "t = {} exceeds the {} input features",
                self.t,
                ds.d()
            )));
        }
        Ok(())
    }

    fn tree_gen(&self, d: usize) -> TreeGen {
        TreeGen {
            d,
            p_feat: self.p_feat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub population: Vec<Individual>,
    pub generation: usize,
    pub best_ever: Individual,
    pub history: Vec<GenerationStats>,
    pub rng: RunRng,
}

impl EvolutionState {
    pub fn best_fitness(&self) -> f64 {
        self.best_ever.fitness_or_zero()
    }

    fn record(&mut self) {
        let best = best_index(&self.population);
        if self.population[best].fitness_or_zero() > self.best_ever.fitness_or_zero() {
            self.best_ever = self.population[best].clone();
        }
        let mean = self
            .population
            .iter()
            .map(Individual::fitness_or_zero)
            .sum::<f64>()
            / self.population.len() as f64;
        self.history.push(GenerationStats {
            generation: self.generation,
            best: self.population[best].fitness_or_zero(),
            mean,
        });
    }
}

/// Index of the fittest individual; ties go to the lowest index.
fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate().skip(1) {
        if ind.fitness_or_zero() > pop[best].fitness_or_zero() {
            best = i;
        }
    }
    best
}

/// Creates the initial population without evaluating it.
///
/// The first half is built with `full`, the rest with `grow`. Individual `i`
/// uses depth `min_depth + i mod r`, where `r` counts the depths in
/// `[min_depth, min(max_depth, 6)]`.
pub fn initial_population(cfg: &RunConfig, d: usize, rng: &mut RunRng) -> Vec<Individual> {
    let gen = cfg.tree_gen(d);
    let top = cfg.max_depth.min(INIT_DEPTH_CAP).max(cfg.min_depth);
    let ramp = top - cfg.min_depth + 1;
    let half = cfg.population_size / 2;
    (0..cfg.population_size)
        .map(|i| {
            let method = if i < half {
                InitMethod::Full
            } else {
                InitMethod::Grow
            };
            let depth = cfg.min_depth + (i % ramp);
            let min = match method {
                InitMethod::Full => depth,
                InitMethod::Grow => cfg.min_depth,
            };
            Individual::new((0..cfg.t).map(|_| gen.tree(method, min, depth, rng)).collect())
        })
        .collect()
}

/// Builds and evaluates the initial population.
pub fn initialize(
    cfg: &RunConfig,
    ctx: &FitnessContext<'_>,
    exec: Execution,
) -> Result<EvolutionState> {
    cfg.validate_for(ctx.dataset)?;
    let mut rng = RunRng::seed_from_u64(cfg.seed);
    let mut population = initial_population(cfg, ctx.dataset.d(), &mut rng);
    ctx.evaluate_population(&mut population, exec);
    let best_ever = population[best_index(&population)].clone();
    let mut state = EvolutionState {
        population,
        generation: 0,
        best_ever,
        history: Vec::new(),
        rng,
    };
    state.record();
    Ok(state)
}

/// Samples `size` individuals with replacement and returns the index of the
/// fittest, lower index winning ties.
pub fn tournament_select<R: Rng + ?Sized>(pop: &[Individual], size: usize, rng: &mut R) -> usize {
    assert!(!pop.is_empty(), "tournament on an empty population");
    let mut winner = rng.random_range(0..pop.len());
    for _ in 1..size {
        let c = rng.random_range(0..pop.len());
        let (fc, fw) = (pop[c].fitness_or_zero(), pop[winner].fitness_or_zero());
        if fc > fw || (fc == fw && c < winner) {
            winner = c;
        }
    }
    winner
}

/// Picks a node, preferring function nodes with probability 0.9.
pub fn pick_node<R: Rng + ?Sized>(tree: &Tree, rng: &mut R) -> usize {
    let (internal, leaves): (Vec<usize>, Vec<usize>) =
        (0..tree.len()).partition(|&i| !tree.nodes()[i].is_terminal());
    if !internal.is_empty() && rng.random::<f64>() < INTERNAL_NODE_BIAS {
        internal[rng.random_range(0..internal.len())]
    } else {
        leaves[rng.random_range(0..leaves.len())]
    }
}

/// Swaps random subtrees between one random tree of each parent. Children
/// deeper than `max_depth` trigger a retry; after
/// [`CROSSOVER_RETRIES`] failures the parents are returned unchanged.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Individual,
    p2: &Individual,
    max_depth: usize,
    rng: &mut R,
) -> (Individual, Individual) {
    for _ in 0..CROSSOVER_RETRIES {
        let i1 = rng.random_range(0..p1.t());
        let i2 = rng.random_range(0..p2.t());
        let (t1, t2) = (&p1.trees[i1], &p2.trees[i2]);
        let n1 = pick_node(t1, rng);
        let n2 = pick_node(t2, rng);
        let c1 = t1.replace_subtree(n1, t2.subtree(n2));
        let c2 = t2.replace_subtree(n2, t1.subtree(n1));
        if c1.depth() <= max_depth && c2.depth() <= max_depth {
            let mut a = Individual::new(p1.trees.clone());
            let mut b = Individual::new(p2.trees.clone());
            a.trees[i1] = c1;
            b.trees[i2] = c2;
            return (a, b);
        }
    }
    (p1.clone(), p2.clone())
}

/// Replaces a random subtree of one random tree with a fresh `grow` subtree
/// that fits within `max_depth`.
pub fn mutate<R: Rng + ?Sized>(
    p: &Individual,
    gen: &TreeGen,
    max_depth: usize,
    rng: &mut R,
) -> Individual {
    let which = rng.random_range(0..p.t());
    let tree = &p.trees[which];
    let mut child = tree.clone();
    // A replacement identical to what it replaces is redrawn a few times.
    for _ in 0..CROSSOVER_RETRIES {
        let at = pick_node(tree, rng);
        let level = tree.levels()[at];
        let budget = max_depth + 1 - level;
        let fresh = gen.tree(InitMethod::Grow, 1, budget, rng);
        child = tree.replace_subtree(at, fresh.nodes());
        if child != *tree {
            break;
        }
    }
    let mut out = Individual::new(p.trees.clone());
    out.trees[which] = child;
    out
}

/// Builds the next population from the current, evaluated one.
fn breed(cfg: &RunConfig, gen: &TreeGen, pop: &[Individual], rng: &mut RunRng) -> Vec<Individual> {
    let mut ranked: Vec<usize> = (0..pop.len()).collect();
    ranked.sort_by(|&a, &b| {
        pop[b]
            .fitness_or_zero()
            .total_cmp(&pop[a].fitness_or_zero())
            .then(a.cmp(&b))
    });
    let mut next: Vec<Individual> = ranked[..cfg.elitism_count]
        .iter()
        .map(|&i| pop[i].clone())
        .collect();
    while next.len() < cfg.population_size {
        let r: f64 = rng.random();
        if r < cfg.crossover_rate {
            let a = tournament_select(pop, cfg.tournament_size, rng);
            let b = tournament_select(pop, cfg.tournament_size, rng);
            let (c1, c2) = crossover(&pop[a], &pop[b], cfg.max_depth, rng);
            next.push(c1);
            if next.len() < cfg.population_size {
                next.push(c2);
            }
        } else if r < cfg.crossover_rate + cfg.mutation_rate {
            let a = tournament_select(pop, cfg.tournament_size, rng);
            next.push(mutate(&pop[a], gen, cfg.max_depth, rng));
        } else {
            let a = tournament_select(pop, cfg.tournament_size, rng);
            next.push(pop[a].clone());
        }
    }
    next
}

/// Advances the state by one generation.
pub fn step(
    state: &mut EvolutionState,
    cfg: &RunConfig,
    ctx: &FitnessContext<'_>,
    exec: Execution,
) {
    let gen = cfg.tree_gen(ctx.dataset.d());
    let mut next = breed(cfg, &gen, &state.population, &mut state.rng);
    ctx.evaluate_population(&mut next, exec);
    debug_assert!(next.iter().all(|ind| ind.t() == cfg.t
        && ind.trees.iter().all(|t| t.depth() <= cfg.max_depth)
        && ind.check_features(ctx.dataset.d()).is_ok()));
    state.population = next;
    state.generation += 1;
    state.record();
}

/// Runs the full evolution, reporting each generation (including the
/// initial population as generation 0) to `progress`.
pub fn run(
    cfg: &RunConfig,
    ds: &Dataset,
    index: &NeighborIndex,
    exec: Execution,
    mut progress: impl FnMut(&GenerationStats),
) -> Result<EvolutionState> {
    let ctx = FitnessContext::new(ds, index, cfg.theta).with_normalisation(cfg.normalisation);
    let mut state = initialize(cfg, &ctx, exec)?;
    progress(state.history.last().unwrap());
    for _ in 0..cfg.generations {
        step(&mut state, cfg, &ctx, exec);
        progress(state.history.last().unwrap());
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{Node, Op};

    fn with_fitness(values: &[f64]) -> Vec<Individual> {
        values
            .iter()
            .map(|&f| Individual {
                trees: vec![Tree::feature(0)],
                fitness: Some(f),
            })
            .collect()
    }

    fn small_cfg() -> RunConfig {
        RunConfig {
            population_size: 4,
            elitism_count: 1,
            tournament_size: 2,
            t: 2,
            ..RunConfig::default()
        }
    }

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        let bad = [
            RunConfig { crossover_rate: 0.9, ..RunConfig::default() },
            RunConfig { elitism_count: 1024, ..RunConfig::default() },
            RunConfig { tournament_size: 2000, ..RunConfig::default() },
            RunConfig { min_depth: 1, ..RunConfig::default() },
            RunConfig { min_depth: 9, ..RunConfig::default() },
            RunConfig { t: 0, ..RunConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn half_and_half_split() {
        let cfg = small_cfg();
        let mut rng = RunRng::seed_from_u64(1);
        let pop = initial_population(&cfg, 5, &mut rng);
        assert_eq!(pop.len(), 4);
        // full individuals: every leaf at the individual's depth
        for ind in &pop[..2] {
            for t in &ind.trees {
                let depth = t.depth();
                for (n, l) in t.nodes().iter().zip(t.levels()) {
                    assert_eq!(n.is_terminal(), l == depth);
                }
            }
        }
        assert!(pop.iter().all(|ind| ind.t() == 2));
    }

    #[test]
    fn initial_depths_ramp_within_bounds() {
        let cfg = RunConfig { population_size: 200, ..RunConfig::default() };
        let mut rng = RunRng::seed_from_u64(9);
        let pop = initial_population(&cfg, 13, &mut rng);
        let depths: Vec<usize> = pop.iter().flat_map(|i| i.trees.iter().map(Tree::depth)).collect();
        assert!(depths.iter().all(|d| (2..=6).contains(d)));
        for d in 2..=6 {
            assert!(depths.contains(&d), "depth {d} never produced");
        }
    }

    #[test]
    fn tournament_ties_and_dominance() {
        let mut rng = RunRng::seed_from_u64(4);
        let flat = with_fitness(&[0.5; 20]);
        for _ in 0..100 {
            let mut probe = rng.clone();
            let sampled: Vec<usize> = (0..7).map(|_| probe.random_range(0..20)).collect();
            let w = tournament_select(&flat, 7, &mut rng);
            assert_eq!(w, *sampled.iter().min().unwrap());
        }
        let mut spiky = with_fitness(&[0.0; 20]);
        spiky[13].fitness = Some(1.0);
        for _ in 0..100 {
            let mut probe = rng.clone();
            let sampled: Vec<usize> = (0..7).map(|_| probe.random_range(0..20)).collect();
            let w = tournament_select(&spiky, 7, &mut rng);
            assert_eq!(w == 13, sampled.contains(&13));
        }
    }

    #[test]
    fn tournament_selection_pressure() {
        let values: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let pop = with_fitness(&values);
        let mut rng = RunRng::seed_from_u64(5);
        let top = (0..10_000)
            .filter(|_| tournament_select(&pop, 7, &mut rng) >= 90)
            .count();
        // P(max of 7 draws in top decile) = 1 - 0.9^7 ~ 0.52
        assert!(top > 4000, "top-decile picks {top}");
    }

    #[test]
    fn crossover_of_roots_exchanges_trees() {
        let a = Individual::new(vec![Tree::feature(0)]);
        let b = Individual::new(vec![Tree::feature(1)]);
        let mut rng = RunRng::seed_from_u64(2);
        let (c1, c2) = crossover(&a, &b, 8, &mut rng);
        assert_eq!(c1.trees[0], Tree::feature(1));
        assert_eq!(c2.trees[0], Tree::feature(0));
    }

    #[test]
    fn crossover_falls_back_to_parents() {
        // With max depth 1 both children must be single leaves, which would
        // need both picks to be roots and both swapped subtrees to be leaves.
        let deep = Tree::call(Op::Relu, vec![Tree::call(Op::Relu, vec![Tree::feature(0)])]);
        let a = Individual::new(vec![deep.clone()]);
        let b = Individual::new(vec![deep]);
        let mut rng = RunRng::seed_from_u64(3);
        let (c1, c2) = crossover(&a, &b, 1, &mut rng);
        assert_eq!(c1, a);
        assert_eq!(c2, b);
    }

    #[test]
    fn mutation_respects_budget_and_locality() {
        let gen = TreeGen { d: 3, p_feat: 0.9 };
        let mut rng = RunRng::seed_from_u64(8);
        // a single leaf with max depth 1 can only become another terminal
        let leaf = Individual::new(vec![Tree::feature(0), Tree::feature(1)]);
        for _ in 0..50 {
            let m = mutate(&leaf, &gen, 1, &mut rng);
            assert!(m.trees.iter().all(|t| t.len() == 1 && t.nodes()[0].is_terminal()));
        }
        let cfg = RunConfig { population_size: 20, t: 3, ..RunConfig::default() };
        let pop = initial_population(&cfg, 3, &mut rng);
        for ind in &pop {
            let m = mutate(ind, &gen, 8, &mut rng);
            let changed = m.trees.iter().zip(&ind.trees).filter(|(a, b)| a != b).count();
            assert_eq!(changed, 1);
        }
    }

    #[test]
    fn mutation_never_exceeds_max_depth() {
        let gen = TreeGen { d: 4, p_feat: 0.9 };
        let cfg = RunConfig { population_size: 10, t: 1, ..RunConfig::default() };
        let mut rng = RunRng::seed_from_u64(21);
        let mut pop = initial_population(&cfg, 4, &mut rng);
        for i in 0..10_000 {
            let j = i % pop.len();
            pop[j] = mutate(&pop[j], &gen, 8, &mut rng);
            assert!(pop[j].trees[0].depth() <= 8);
        }
    }

    #[test]
    fn breeding_keeps_size_and_elites() {
        let cfg = RunConfig { population_size: 30, elitism_count: 3, t: 2, ..RunConfig::default() };
        let gen = cfg.tree_gen(4);
        let mut rng = RunRng::seed_from_u64(6);
        let mut pop = initial_population(&cfg, 4, &mut rng);
        for (i, ind) in pop.iter_mut().enumerate() {
            ind.fitness = Some((i * 7 % 30) as f64 / 30.0);
        }
        let next = breed(&cfg, &gen, &pop, &mut rng);
        assert_eq!(next.len(), 30);
        let best = pop.iter().max_by(|a, b| a.fitness_or_zero().total_cmp(&b.fitness_or_zero())).unwrap();
        assert_eq!(next[0], *best);
        assert!(next.iter().flat_map(|i| &i.trees).all(|t| t
            .nodes()
            .iter()
            .all(|n| !matches!(n, Node::Feature(j) if *j >= 4))));
    }
}
