use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::niching::niching_select;
use super::refs::reference_points;
use super::sort::non_dominated_sort;
use super::{GaConfig, ObjectiveVector};
use crate::par::Execution;

/// Offspring attempts rejected by the feasibility filter before falling
/// back to a mutated parent.
pub const RETRY_BUDGET: usize = 10;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    Config(String),
    #[error("initializer produced no feasible chromosome")]
    NoFeasibleStart,
}

/// A search space the engine can optimize over.
///
/// `evaluate` must be a pure function of the genome; it may be called
/// from several threads at once.
pub trait Problem: Sync {
    type Genome: Clone + Eq + Hash + Debug + Send + Sync;

    fn objective_count(&self) -> usize;

    /// Up to `n` starting chromosomes. Infeasible ones are discarded.
    fn initialize(&self, n: usize, seed: u64, exec: Execution) -> Vec<Self::Genome>;

    fn is_feasible(&self, genome: &Self::Genome) -> bool;

    fn evaluate(&self, genome: &Self::Genome) -> ObjectiveVector;

    fn crossover(&self, a: &Self::Genome, b: &Self::Genome, rng: &mut ChaCha8Rng) -> Self::Genome;

    fn mutate(&self, x: &Self::Genome, rate: f64, rng: &mut ChaCha8Rng) -> Self::Genome;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual<G> {
    pub genome: G,
    pub objectives: ObjectiveVector,
}

impl<G> Individual<G> {
    pub fn scalar(&self) -> f64 {
        self.objectives.scalar()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    pub best_scalar: f64,
    /// Per-objective minimum over the population.
    pub objective_best: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EvolveResult<G> {
    /// Final population, in survival order.
    pub population: Vec<Individual<G>>,
    /// Non-dominated members of the final population, one per distinct genome.
    pub front: Vec<Individual<G>>,
    /// One row per generation, generation 0 included.
    pub trace: Vec<TraceRow>,
    /// Distinct genomes evaluated.
    pub evaluations: usize,
    /// Offspring replaced by a parent copy after the retry budget ran out.
    pub fallbacks: usize,
}

/// Runs the generational loop for `config.generations` generations.
pub fn evolve<P: Problem>(problem: &P, config: &GaConfig) -> Result<EvolveResult<P::Genome>, GaError> {
    config.validate()?;
    let n = config.population_size;
    let exec = config.execution;
    let refs = reference_points(problem.objective_count(), config.reference_divisions);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut cache: HashMap<P::Genome, ObjectiveVector> = HashMap::new();

    let mut start: Vec<P::Genome> = problem
        .initialize(n, config.rng_seed, exec)
        .into_iter()
        .filter(|g| problem.is_feasible(g))
        .collect();
    if start.is_empty() {
        return Err(GaError::NoFeasibleStart);
    }
    // Pad a short start with mutated copies of what we have.
    let mut k = 0;
    while start.len() < n {
        let donor = start[k % start.len()].clone();
        let m = problem.mutate(&donor, 1.0, &mut rng);
        start.push(if problem.is_feasible(&m) { m } else { donor });
        k += 1;
    }
    start.truncate(n);

    let mut population = evaluate_all(problem, start, &mut cache, exec);
    let mut trace = vec![trace_row(0, &population)];
    let mut fallbacks = 0;

    for generation in 1..=config.generations {
        let ranks = ranks_of(&population);
        let mut offspring = Vec::with_capacity(n);
        for _ in 0..n {
            let (child, fell_back) = make_child(problem, config, &population, &ranks, &mut rng);
            fallbacks += usize::from(fell_back);
            offspring.push(child);
        }
        let offspring = evaluate_all(problem, offspring, &mut cache, exec);

        let mut merged = population;
        merged.extend(offspring);
        let merged = dedup_if_possible(merged, n);
        let points: Vec<ObjectiveVector> = merged.iter().map(|i| i.objectives.clone()).collect();
        let mut chosen = niching_select(&points, n, &refs, &mut rng);
        keep_best(&merged, &mut chosen);
        let keep: HashSet<usize> = chosen.iter().copied().collect();
        population = merged
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep.contains(i))
            .map(|(_, ind)| ind)
            .collect();
        trace.push(trace_row(generation, &population));
    }

    let front = final_front(&population);
    Ok(EvolveResult {
        population,
        front,
        trace,
        evaluations: cache.len(),
        fallbacks,
    })
}

fn evaluate_all<P: Problem>(
    problem: &P,
    genomes: Vec<P::Genome>,
    cache: &mut HashMap<P::Genome, ObjectiveVector>,
    exec: Execution,
) -> Vec<Individual<P::Genome>> {
    let mut fresh: Vec<P::Genome> = Vec::new();
    let mut seen = HashSet::new();
    for g in &genomes {
        if !cache.contains_key(g) && seen.insert(g.clone()) {
            fresh.push(g.clone());
        }
    }
    let values = exec.map(&fresh, |g| problem.evaluate(g));
    for (g, v) in fresh.into_iter().zip(values) {
        debug_assert_eq!(v.len(), problem.objective_count());
        cache.insert(g, v);
    }
    genomes
        .into_iter()
        .map(|g| {
            let objectives = cache[&g].clone();
            Individual { genome: g, objectives }
        })
        .collect()
}

fn ranks_of<G>(population: &[Individual<G>]) -> Vec<usize> {
    let points: Vec<ObjectiveVector> = population.iter().map(|i| i.objectives.clone()).collect();
    let mut ranks = vec![0; population.len()];
    for (r, front) in non_dominated_sort(&points).into_iter().enumerate() {
        for i in front {
            ranks[i] = r;
        }
    }
    ranks
}

fn tournament(ranks: &[usize], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.random_range(0..ranks.len());
    let b = rng.random_range(0..ranks.len());
    match ranks[a].cmp(&ranks[b]) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if rng.random_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

fn make_child<P: Problem>(
    problem: &P,
    config: &GaConfig,
    population: &[Individual<P::Genome>],
    ranks: &[usize],
    rng: &mut ChaCha8Rng,
) -> (P::Genome, bool) {
    let mut first = None;
    for _ in 0..=RETRY_BUDGET {
        let a = tournament(ranks, rng);
        let b = tournament(ranks, rng);
        first.get_or_insert(a);
        let child = if rng.random_bool(config.crossover_rate) {
            problem.crossover(&population[a].genome, &population[b].genome, rng)
        } else {
            population[a].genome.clone()
        };
        let child = problem.mutate(&child, config.mutation_rate, rng);
        if problem.is_feasible(&child) {
            return (child, false);
        }
    }
    let parent = &population[first.expect("at least one attempt")].genome;
    let mutant = problem.mutate(parent, 1.0, rng);
    if problem.is_feasible(&mutant) {
        (mutant, true)
    } else {
        (parent.clone(), true)
    }
}

/// Drops repeated genomes as long as enough distinct ones remain.
fn dedup_if_possible<G: Clone + Eq + Hash>(merged: Vec<Individual<G>>, n: usize) -> Vec<Individual<G>> {
    let mut seen = HashSet::new();
    let (unique, dups): (Vec<_>, Vec<_>) = merged.into_iter().partition(|i| seen.insert(i.genome.clone()));
    if unique.len() >= n {
        return unique;
    }
    let mut out = unique;
    out.extend(dups);
    out
}

/// Makes sure the best scalar score is never lost between generations.
fn keep_best<G>(merged: &[Individual<G>], chosen: &mut [usize]) {
    let best = argmin_scalar(merged.iter());
    if chosen.contains(&best) {
        return;
    }
    let worst = (0..chosen.len())
        .max_by(|&a, &b| merged[chosen[a]].scalar().total_cmp(&merged[chosen[b]].scalar()).then(b.cmp(&a)))
        .expect("nonempty selection");
    chosen[worst] = best;
    chosen.sort_unstable();
}

fn argmin_scalar<'a, G: 'a>(items: impl Iterator<Item = &'a Individual<G>>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, ind) in items.enumerate() {
        let s = ind.scalar();
        if s < best.1 {
            best = (i, s);
        }
    }
    best.0
}

fn trace_row<G>(generation: usize, population: &[Individual<G>]) -> TraceRow {
    let m = population[0].objectives.len();
    let best = argmin_scalar(population.iter());
    let objective_best = (0..m)
        .map(|j| population.iter().map(|i| i.objectives.0[j]).fold(f64::INFINITY, f64::min))
        .collect();
    TraceRow {
        generation,
        best_scalar: population[best].scalar(),
        objective_best,
    }
}

fn final_front<G: Clone + Eq + Hash>(population: &[Individual<G>]) -> Vec<Individual<G>> {
    let points: Vec<ObjectiveVector> = population.iter().map(|i| i.objectives.clone()).collect();
    let first = non_dominated_sort(&points).into_iter().next().unwrap_or_default();
    let mut seen = HashSet::new();
    first
        .into_iter()
        .filter(|&i| seen.insert(population[i].genome.clone()))
        .map(|i| population[i].clone())
        .collect()
}

/// Member with the lowest mean objective. Ties go to the lexicographically
/// smaller objective vector, then to the earliest index.
pub fn knee_point<G>(front: &[Individual<G>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, ind) in front.iter().enumerate() {
        let s = ind.scalar();
        let better = match best {
            None => true,
            Some((j, bs)) => s < bs || (s == bs && lex_less(&ind.objectives.0, &front[j].objectives.0)),
        };
        if better {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

/// CSV with one row per generation: generation, best scalar score and
/// the per-objective minimum.
pub fn trace_to_csv(trace: &[TraceRow], objective_names: &[&str]) -> String {
    let mut out = String::from("generation,best_scalar");
    for name in objective_names {
        out.push_str(",best_");
        out.push_str(name);
    }
    out.push('\n');
    for row in trace {
        out.push_str(&format!("{},{:.6}", row.generation, row.best_scalar));
        for v in &row.objective_best {
            out.push_str(&format!(",{v:.6}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moga::{order_crossover, swap_mutation};

    /// Permutations of 0..n; objectives reward sortedness in both directions
    /// plus a displacement term. Odd first genes are infeasible.
    struct Toy {
        n: usize,
    }

    impl Problem for Toy {
        type Genome = Vec<usize>;

        fn objective_count(&self) -> usize {
            3
        }

        fn initialize(&self, n: usize, seed: u64, _exec: Execution) -> Vec<Vec<usize>> {
            use rand::seq::SliceRandom;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let mut v: Vec<usize> = (0..self.n).collect();
                    v.shuffle(&mut rng);
                    v
                })
                .collect()
        }

        fn is_feasible(&self, g: &Vec<usize>) -> bool {
            g[0].is_multiple_of(2)
        }

        fn evaluate(&self, g: &Vec<usize>) -> ObjectiveVector {
            let n = self.n as f64;
            let inv = g.iter().enumerate().map(|(i, &x)| (i as f64 - x as f64).abs()).sum::<f64>();
            let asc = g.windows(2).filter(|w| w[0] > w[1]).count() as f64 / (n - 1.0);
            let desc = g.windows(2).filter(|w| w[0] < w[1]).count() as f64 / (n - 1.0);
            ObjectiveVector(vec![asc, desc, inv / (n * n)])
        }

        fn crossover(&self, a: &Vec<usize>, b: &Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
            let c1 = rng.random_range(0..self.n);
            let c2 = rng.random_range(c1..=self.n);
            order_crossover(a, b, c1, c2)
        }

        fn mutate(&self, x: &Vec<usize>, rate: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
            swap_mutation(x, rate, rng)
        }
    }

    fn cfg(g: usize, seed: u64) -> GaConfig {
        GaConfig {
            population_size: 16,
            generations: g,
            rng_seed: seed,
            reference_divisions: 3,
            ..GaConfig::default()
        }
    }

    #[test]
    fn zero_generations_returns_start() {
        let r = evolve(&Toy { n: 8 }, &cfg(0, 1)).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.population.len(), 16);
    }

    #[test]
    fn best_never_worsens_and_is_deterministic() {
        let a = evolve(&Toy { n: 10 }, &cfg(25, 3)).unwrap();
        for w in a.trace.windows(2) {
            assert!(w[1].best_scalar <= w[0].best_scalar + 1e-12);
        }
        let b = evolve(&Toy { n: 10 }, &cfg(25, 3)).unwrap();
        assert_eq!(a.trace, b.trace);
        assert!(a.population.iter().all(|i| i.genome[0] % 2 == 0));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let mut c = cfg(10, 9);
        c.execution = Execution::Sequential;
        let s = evolve(&Toy { n: 9 }, &c).unwrap();
        c.execution = Execution::Parallel;
        let p = evolve(&Toy { n: 9 }, &c).unwrap();
        assert_eq!(s.trace, p.trace);
        assert_eq!(s.front, p.front);
    }

    struct Hopeless;

    impl Problem for Hopeless {
        type Genome = u8;
        fn objective_count(&self) -> usize {
            2
        }
        fn initialize(&self, n: usize, _seed: u64, _exec: Execution) -> Vec<u8> {
            vec![1; n]
        }
        fn is_feasible(&self, _g: &u8) -> bool {
            false
        }
        fn evaluate(&self, _g: &u8) -> ObjectiveVector {
            ObjectiveVector(vec![0.0, 0.0])
        }
        fn crossover(&self, a: &u8, _b: &u8, _rng: &mut ChaCha8Rng) -> u8 {
            *a
        }
        fn mutate(&self, x: &u8, _rate: f64, _rng: &mut ChaCha8Rng) -> u8 {
            *x
        }
    }

    #[test]
    fn infeasible_start_is_an_error() {
        assert_eq!(evolve(&Hopeless, &cfg(5, 0)).unwrap_err(), GaError::NoFeasibleStart);
    }

    #[test]
    fn csv_shape() {
        let rows = vec![TraceRow {
            generation: 0,
            best_scalar: 0.5,
            objective_best: vec![0.25, 0.75],
        }];
        assert_eq!(
            trace_to_csv(&rows, &["a", "b"]),
            "generation,best_scalar,best_a,best_b\n0,0.500000,0.250000,0.750000\n"
        );
    }
}
