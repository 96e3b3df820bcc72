//! Black-box solvers for the mask-selection problem: the original-data
//! baseline, random search, and a genetic algorithm with elitist, tournament,
//! or roulette-wheel parent selection, uniform crossover, and bit-flip
//! mutation with early stopping.

use std::sync::OnceLock;
use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::objective::{Mask, ObjectiveSpec};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Objective(#[from] crate::objective::ObjectiveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Original,
    Random,
    Genetic,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Original => "original",
            SolverKind::Random => "random",
            SolverKind::Genetic => "ga",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, SolverError> {
        match name {
            "original" => Ok(SolverKind::Original),
            "random" => Ok(SolverKind::Random),
            "ga" => Ok(SolverKind::Genetic),
            other => Err(SolverError::InvalidConfig(format!(
                "unknown solver `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionKind {
    Elitist,
    Tournament,
    RouletteWheel,
}

impl SelectionKind {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionKind::Elitist => "elitist",
            SelectionKind::Tournament => "tournament",
            SelectionKind::RouletteWheel => "roulette",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, SolverError> {
        match name {
            "elitist" => Ok(SelectionKind::Elitist),
            "tournament" => Ok(SelectionKind::Tournament),
            "roulette" => Ok(SelectionKind::RouletteWheel),
            other => Err(SolverError::InvalidConfig(format!(
                "unknown selection `{other}`"
            ))),
        }
    }
}

/// Solver hyperparameters. Defaults follow the recommended settings:
/// population 100, 500 generations, 5% bit-flip mutation, elitist selection,
/// early stop after 50 generations without improvement.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub pop_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub selection: SelectionKind,
    pub tournament_size: usize,
    /// Generations without strict improvement before the GA stops early.
    pub patience: usize,
    pub seed: u64,
    /// Fitness evaluations for random search; defaults to
    /// `pop_size * generations` for evaluation parity with the GA.
    pub evaluation_budget: Option<usize>,
    /// Inject the all-ones mask into the initial population so the GA never
    /// returns a solution worse than the original data.
    pub seed_all_ones: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kind: SolverKind::Genetic,
            pop_size: 100,
            generations: 500,
            mutation_rate: 0.05,
            selection: SelectionKind::Elitist,
            tournament_size: 2,
            patience: 50,
            seed: 0,
            evaluation_budget: None,
            seed_all_ones: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.kind == SolverKind::Genetic && self.pop_size < 2 {
            return Err(SolverError::InvalidConfig(
                "genetic solver needs pop_size >= 2".into(),
            ));
        }
        if self.patience == 0 {
            return Err(SolverError::InvalidConfig("patience must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(SolverError::InvalidConfig(
                "mutation_rate must lie in [0, 1]".into(),
            ));
        }
        if self.generations == 0 || self.pop_size == 0 {
            return Err(SolverError::InvalidConfig(
                "pop_size and generations must be positive".into(),
            ));
        }
        if self.kind == SolverKind::Genetic && self.tournament_size == 0 {
            return Err(SolverError::InvalidConfig(
                "tournament_size must be positive".into(),
            ));
        }
        if self.kind == SolverKind::Random && self.budget() == 0 {
            return Err(SolverError::InvalidConfig(
                "evaluation budget must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn budget(&self) -> usize {
        self.evaluation_budget
            .unwrap_or(self.pop_size * self.generations)
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone)]
pub struct SolverReport {
    pub best_mask: Mask,
    pub best_score: f64,
    /// Best score found so far, recorded once per generation (or batch).
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub wall_time: f64,
    pub terminated_early: bool,
    pub seed: u64,
}

/// Worker pool sized by the `FAIRMASK_THREADS` environment variable
/// (0 or unset = one worker per core).
fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var("FAIRMASK_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build worker pool")
    })
}

/// Evaluate many masks; order-preserving, so results are independent of the
/// worker count.
fn evaluate_batch(spec: &ObjectiveSpec, masks: &[Mask]) -> Vec<f64> {
    thread_pool().install(|| {
        masks
            .par_iter()
            .map(|m| spec.fitness(m).expect("mask length matches pool"))
            .collect()
    })
}

/// Baseline: keep everything by returning the all-ones mask.
pub fn solve_original(spec: &ObjectiveSpec) -> SolverReport {
    let start = Instant::now();
    let mask = Mask::ones(spec.pool_size());
    let score = spec.fitness(&mask).expect("all-ones mask fits the pool");
    SolverReport {
        best_mask: mask,
        best_score: score,
        trace: vec![score],
        evaluations: 1,
        wall_time: start.elapsed().as_secs_f64(),
        terminated_early: false,
        seed: 0,
    }
}

fn random_mask(rng: &mut impl Rng, len: usize) -> Mask {
    Mask::new((0..len).map(|_| rng.gen_bool(0.5)).collect())
}

/// Random search: sample uniform masks (each bit a fair coin) and keep the
/// best.
pub fn solve_random(
    spec: &ObjectiveSpec,
    config: &SolverConfig,
) -> Result<SolverReport, SolverError> {
    config.validate()?;
    let start = Instant::now();
    let budget = config.budget();
    let len = spec.pool_size();
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut best_mask = None;
    let mut best_score = f64::INFINITY;
    let mut trace = Vec::new();
    let mut evaluated = 0usize;
    let batch_size = config.pop_size.max(1);
    while evaluated < budget {
        let take = batch_size.min(budget - evaluated);
        let masks: Vec<Mask> = (0..take).map(|_| random_mask(&mut rng, len)).collect();
        let scores = evaluate_batch(spec, &masks);
        evaluated += take;
        for (mask, score) in masks.into_iter().zip(scores) {
            if score < best_score {
                best_score = score;
                best_mask = Some(mask);
            }
        }
        trace.push(best_score);
    }

    Ok(SolverReport {
        best_mask: best_mask.expect("budget >= 1"),
        best_score,
        trace,
        evaluations: evaluated,
        wall_time: start.elapsed().as_secs_f64(),
        terminated_early: false,
        seed: config.seed,
    })
}

/// Draw a breeding pool of `count` parent indices from a scored population
/// (lower score = better). The pool is carried into the next generation by
/// [`solve_genetic`]; offspring are bred from uniform pairs of it.
///
/// Elitist truncates to the `count` best individuals; tournament takes the
/// best of `tournament_size` uniform candidates per slot; roulette weighs
/// individuals by `max_score - score + eps` and falls back to uniform draws
/// when all scores are equal.
pub fn select_parents(
    scores: &[f64],
    selection: SelectionKind,
    tournament_size: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    assert!(!scores.is_empty(), "population must be non-empty");
    let n = scores.len();
    match selection {
        SelectionKind::Elitist => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
            order.truncate(count.min(n));
            order
        }
        SelectionKind::Tournament => (0..count)
            .map(|_| {
                let mut best = rng.gen_range(0..n);
                for _ in 1..tournament_size {
                    let challenger = rng.gen_range(0..n);
                    if scores[challenger] < scores[best] {
                        best = challenger;
                    }
                }
                best
            })
            .collect(),
        SelectionKind::RouletteWheel => {
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = scores.iter().map(|&s| max - s + 1e-9).collect();
            let total: f64 = weights.iter().sum();
            let degenerate = scores.windows(2).all(|w| w[0] == w[1]);
            if degenerate {
                return (0..count).map(|_| rng.gen_range(0..n)).collect();
            }
            let mut cumulative = Vec::with_capacity(n);
            let mut acc = 0.0;
            for w in &weights {
                acc += w;
                cumulative.push(acc);
            }
            (0..count)
                .map(|_| {
                    let x = rng.gen_range(0.0..total);
                    cumulative.partition_point(|&c| c <= x).min(n - 1)
                })
                .collect()
        }
    }
}

/// Uniform crossover: each position flips a fair coin for which parent
/// child A inherits from; child B receives the complementary assignment.
pub fn uniform_crossover(
    parent_a: &Mask,
    parent_b: &Mask,
    rng: &mut impl Rng,
) -> (Mask, Mask) {
    assert_eq!(parent_a.len(), parent_b.len(), "parents must match in length");
    let len = parent_a.len();
    let mut a = Vec::with_capacity(len);
    let mut b = Vec::with_capacity(len);
    for i in 0..len {
        if rng.gen_bool(0.5) {
            a.push(parent_a.get(i));
            b.push(parent_b.get(i));
        } else {
            a.push(parent_b.get(i));
            b.push(parent_a.get(i));
        }
    }
    (Mask::new(a), Mask::new(b))
}

/// Bit-flip mutation: toggle exactly `floor(rate * len)` distinct positions
/// drawn uniformly without replacement.
pub fn bitflip_mutation(mask: &Mask, rate: f64, rng: &mut impl Rng) -> Mask {
    assert!((0.0..=1.0).contains(&rate), "rate must lie in [0, 1]");
    let len = mask.len();
    let flips = (rate * len as f64).floor() as usize;
    let mut out = mask.clone();
    if flips == 0 {
        return out;
    }
    for i in sample_indices(rng, len, flips) {
        out.toggle(i);
    }
    out
}

/// Genetic algorithm: random initial population (optionally seeded with the
/// all-ones mask), then repeated selection, uniform crossover, and bit-flip
/// mutation. Each generation the selected parent pool (half the population)
/// survives unchanged and offspring bred from it fill the remaining slots;
/// the incumbent best individual is always kept in the pool. Stops early
/// after `patience` generations without strict improvement.
pub fn solve_genetic(
    spec: &ObjectiveSpec,
    config: &SolverConfig,
) -> Result<SolverReport, SolverError> {
    config.validate()?;
    let start = Instant::now();
    let len = spec.pool_size();
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut population: Vec<Mask> = Vec::with_capacity(config.pop_size);
    if config.seed_all_ones {
        population.push(Mask::ones(len));
    }
    while population.len() < config.pop_size {
        population.push(random_mask(&mut rng, len));
    }
    let mut scores = evaluate_batch(spec, &population);
    let mut evaluations = population.len();

    let best_index = argmin(&scores);
    let mut incumbent = population[best_index].clone();
    let mut incumbent_score = scores[best_index];
    let mut trace = vec![incumbent_score];
    let mut stale = 0usize;
    let mut terminated_early = false;

    let pool_size = config.pop_size.div_ceil(2);
    for _ in 0..config.generations {
        let pool = select_parents(
            &scores,
            config.selection,
            config.tournament_size,
            pool_size,
            &mut rng,
        );
        let mut next_population: Vec<Mask> =
            pool.iter().map(|&i| population[i].clone()).collect();
        let mut next_scores: Vec<f64> = pool.iter().map(|&i| scores[i]).collect();

        // 1-elitism: the incumbent always survives into the parent pool.
        if !next_scores.iter().any(|&s| s <= incumbent_score) {
            let worst = argmax(&next_scores);
            next_population[worst] = incumbent.clone();
            next_scores[worst] = incumbent_score;
        }

        let n_children = config.pop_size - next_population.len();
        let mut children: Vec<Mask> = Vec::with_capacity(n_children);
        while children.len() < n_children {
            let a = rng.gen_range(0..next_population.len());
            let b = rng.gen_range(0..next_population.len());
            let (child_a, child_b) =
                uniform_crossover(&next_population[a], &next_population[b], &mut rng);
            children.push(bitflip_mutation(&child_a, config.mutation_rate, &mut rng));
            if children.len() < n_children {
                children.push(bitflip_mutation(&child_b, config.mutation_rate, &mut rng));
            }
        }
        let child_scores = evaluate_batch(spec, &children);
        evaluations += children.len();
        next_population.extend(children);
        next_scores.extend(child_scores);
        population = next_population;
        scores = next_scores;

        let best = argmin(&scores);
        if scores[best] < incumbent_score {
            incumbent_score = scores[best];
            incumbent = population[best].clone();
            stale = 0;
        } else {
            stale += 1;
        }
        trace.push(incumbent_score);
        if stale >= config.patience {
            terminated_early = true;
            break;
        }
    }

    Ok(SolverReport {
        best_mask: incumbent,
        best_score: incumbent_score,
        trace,
        evaluations,
        wall_time: start.elapsed().as_secs_f64(),
        terminated_early,
        seed: config.seed,
    })
}

/// Run the solver named by `config.kind`.
pub fn solve(spec: &ObjectiveSpec, config: &SolverConfig) -> Result<SolverReport, SolverError> {
    match config.kind {
        SolverKind::Original => Ok(solve_original(spec)),
        SolverKind::Random => solve_random(spec, config),
        SolverKind::Genetic => solve_genetic(spec, config),
    }
}

fn argmin(scores: &[f64]) -> usize {
    scores
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .expect("non-empty scores")
}

fn argmax(scores: &[f64]) -> usize {
    scores
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .expect("non-empty scores")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnRoles, EncodeOptions, EncodedDataset};
    use crate::measures::{evaluate, MeasureKind};
    use crate::objective::{build_pool, PoolMode};
    use std::io::Write as _;
    use std::sync::Arc;

    fn tiny_dataset(rows: &[(&str, u8)]) -> Arc<EncodedDataset> {
        let mut content = String::from("x,z,y\n");
        for (i, (g, y)) in rows.iter().enumerate() {
            content.push_str(&format!("{i},{g},{y}\n"));
        }
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        let roles = ColumnRoles::new("y", "z", vec!["x".into()], None).unwrap();
        Arc::new(crate::dataset::load_csv(f.path(), &roles, &EncodeOptions::default()).unwrap())
    }

    fn biased_spec() -> crate::objective::ObjectiveSpec {
        let real = tiny_dataset(&[
            ("a", 1),
            ("a", 1),
            ("a", 1),
            ("a", 0),
            ("b", 1),
            ("b", 0),
            ("b", 0),
            ("b", 0),
        ]);
        build_pool(PoolMode::Remove, MeasureKind::SdpSum, real, None).unwrap()
    }

    #[test]
    fn original_is_one_evaluation_of_all_ones() {
        let real = tiny_dataset(&[("a", 1), ("a", 0), ("b", 1), ("b", 1)]);
        let spec = build_pool(
            PoolMode::Remove,
            MeasureKind::SdpSum,
            Arc::clone(&real),
            None,
        )
        .unwrap();
        let report = solve_original(&spec);
        assert_eq!(report.evaluations, 1);
        assert_eq!(report.best_mask, Mask::ones(4));
        let direct = evaluate(MeasureKind::SdpSum, &real.full_view()).unwrap();
        assert_eq!(report.best_score, direct);
    }

    #[test]
    fn original_under_add_keeps_everything() {
        let real = tiny_dataset(&[("a", 1), ("a", 0), ("b", 1), ("b", 1)]);
        let synth = tiny_dataset(&[("a", 0), ("b", 0)]);
        let spec = build_pool(PoolMode::Add, MeasureKind::SdpSum, real, Some(synth)).unwrap();
        let report = solve_original(&spec);
        let view = spec.materialize(&report.best_mask).unwrap();
        assert_eq!(view.len(), 6);
    }

    #[test]
    fn random_budget_one_is_deterministic() {
        let spec = biased_spec();
        let config = SolverConfig {
            kind: SolverKind::Random,
            evaluation_budget: Some(1),
            seed: 9,
            ..Default::default()
        };
        let a = solve_random(&spec, &config).unwrap();
        let b = solve_random(&spec, &config).unwrap();
        assert_eq!(a.evaluations, 1);
        assert_eq!(a.best_mask, b.best_mask);
        assert_eq!(a.best_score.to_bits(), b.best_score.to_bits());
    }

    #[test]
    fn random_best_is_minimum_of_samples() {
        let spec = biased_spec();
        let config = SolverConfig {
            kind: SolverKind::Random,
            evaluation_budget: Some(64),
            seed: 4,
            ..Default::default()
        };
        let report = solve_random(&spec, &config).unwrap();
        // replay the same stream and check the min property
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let mut replay_best = f64::INFINITY;
        for _ in 0..64 {
            let mask = random_mask(&mut rng, spec.pool_size());
            replay_best = replay_best.min(spec.fitness(&mask).unwrap());
        }
        assert_eq!(report.best_score, replay_best);
        assert_eq!(report.evaluations, 64);
    }

    #[test]
    fn elitist_truncates_to_the_best() {
        let scores = vec![0.9, 0.1, 0.5, 0.7];
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let pool = select_parents(&scores, SelectionKind::Elitist, 2, 2, &mut rng);
        assert_eq!(pool, vec![1, 2]);
        // a two-individual population keeps both as parents
        let scores = vec![0.9, 0.1];
        let pool = select_parents(&scores, SelectionKind::Elitist, 2, 4, &mut rng);
        assert_eq!(pool, vec![1, 0]);
    }

    #[test]
    fn full_size_tournament_always_selects_best() {
        let scores = vec![0.5, 0.2, 0.9, 0.4];
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for parent in select_parents(&scores, SelectionKind::Tournament, 64, 100, &mut rng) {
            assert_eq!(parent, 1);
        }
    }

    #[test]
    fn roulette_frequencies_match_weights() {
        // weights: max - score + eps = (3, 2, 1, ~0); probabilities 1/2, 1/3, 1/6, ~0
        let scores = vec![1.0, 2.0, 3.0, 4.0];
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let draws = 100_000;
        let pool = select_parents(&scores, SelectionKind::RouletteWheel, 2, draws, &mut rng);
        let mut counts = [0usize; 4];
        for parent in pool {
            counts[parent] += 1;
        }
        let expected = [0.5, 1.0 / 3.0, 1.0 / 6.0, 0.0];
        for (i, &want) in expected.iter().enumerate() {
            let got = counts[i] as f64 / draws as f64;
            assert!(
                (got - want).abs() < 0.02,
                "index {i}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn roulette_uniform_fallback_on_equal_scores() {
        let scores = vec![0.3; 5];
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let pool = select_parents(&scores, SelectionKind::RouletteWheel, 2, 10_000, &mut rng);
        let mut counts = [0usize; 5];
        for parent in pool {
            counts[parent] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / 10_000.0;
            assert!((freq - 0.2).abs() < 0.03);
        }
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let ones = Mask::ones(32);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let (a, b) = uniform_crossover(&ones, &ones, &mut rng);
        assert_eq!(a, ones);
        assert_eq!(b, ones);
    }

    #[test]
    fn crossover_children_partition_parent_bits() {
        let ones = Mask::ones(64);
        let zeros = Mask::zeros(64);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (a, b) = uniform_crossover(&ones, &zeros, &mut rng);
            for i in 0..64 {
                // complementary assignment: one child got the 1, the other the 0
                assert!(a.get(i) ^ b.get(i));
            }
        }
    }

    #[test]
    fn crossover_marginal_is_a_fair_coin() {
        let ones = Mask::ones(16);
        let zeros = Mask::zeros(16);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let trials = 10_000;
        let mut inherited_from_a = vec![0usize; 16];
        for _ in 0..trials {
            let (a, _) = uniform_crossover(&ones, &zeros, &mut rng);
            for (i, count) in inherited_from_a.iter_mut().enumerate() {
                *count += a.get(i) as usize;
            }
        }
        for &count in &inherited_from_a {
            let freq = count as f64 / trials as f64;
            assert!((0.47..=0.53).contains(&freq), "per-position freq {freq}");
        }
    }

    #[test]
    fn mutation_rate_zero_is_identity() {
        let mask = Mask::ones(50);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        assert_eq!(bitflip_mutation(&mask, 0.0, &mut rng), mask);
    }

    #[test]
    fn mutation_hamming_distance_is_floor_of_rate() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mask = Mask::zeros(100);
        for _ in 0..50 {
            let mutated = bitflip_mutation(&mask, 0.05, &mut rng);
            assert_eq!(mask.hamming_distance(&mutated), 5);
        }
        // floor(0.05 * 19) = 0: documented degenerate case
        let short = Mask::zeros(19);
        let mutated = bitflip_mutation(&short, 0.05, &mut rng);
        assert_eq!(short.hamming_distance(&mutated), 0);
    }

    #[test]
    fn genetic_is_deterministic_for_a_seed() {
        let spec = biased_spec();
        let config = SolverConfig {
            pop_size: 10,
            generations: 20,
            seed: 42,
            ..Default::default()
        };
        let a = solve_genetic(&spec, &config).unwrap();
        let b = solve_genetic(&spec, &config).unwrap();
        assert_eq!(a.best_mask, b.best_mask);
        assert_eq!(a.best_score.to_bits(), b.best_score.to_bits());
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn genetic_trace_is_non_increasing() {
        let spec = biased_spec();
        for seed in 0..5 {
            let config = SolverConfig {
                pop_size: 8,
                generations: 30,
                seed,
                ..Default::default()
            };
            let report = solve_genetic(&spec, &config).unwrap();
            assert!(report.trace.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(
                report.best_score,
                spec.fitness(&report.best_mask).unwrap(),
                "report score must equal recomputed fitness"
            );
        }
    }

    #[test]
    fn genetic_with_seeding_never_loses_to_original() {
        let spec = biased_spec();
        let original = solve_original(&spec).best_score;
        for seed in 0..5 {
            let config = SolverConfig {
                pop_size: 6,
                generations: 5,
                seed,
                ..Default::default()
            };
            let report = solve_genetic(&spec, &config).unwrap();
            assert!(report.best_score <= original);
        }
    }

    #[test]
    fn genetic_early_stop_respects_patience() {
        let spec = biased_spec();
        let config = SolverConfig {
            pop_size: 8,
            generations: 500,
            patience: 5,
            seed: 1,
            ..Default::default()
        };
        let report = solve_genetic(&spec, &config).unwrap();
        assert!(report.terminated_early);
        // trace: initial entry plus one per executed generation
        assert!(report.trace.len() < 502);
        let tail = &report.trace[report.trace.len() - 5..];
        assert!(tail.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn evaluation_accounting_is_exact() {
        let spec = biased_spec();
        let config = SolverConfig {
            pop_size: 10,
            generations: 12,
            patience: 1000,
            seed: 3,
            ..Default::default()
        };
        let ga = solve_genetic(&spec, &config).unwrap();
        // init evaluates pop_size masks; each generation evaluates only the
        // offspring half (parents carry over already scored)
        let offspring = config.pop_size - config.pop_size.div_ceil(2);
        assert_eq!(ga.evaluations, config.pop_size + 12 * offspring);
        // random's default budget is an upper bound on the GA's usage
        let random = solve_random(
            &spec,
            &SolverConfig {
                kind: SolverKind::Random,
                ..config
            },
        )
        .unwrap();
        assert_eq!(random.evaluations, config.pop_size * config.generations);
        assert!(ga.evaluations <= random.evaluations + config.pop_size);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_pop = SolverConfig {
            pop_size: 1,
            ..Default::default()
        };
        assert!(bad_pop.validate().is_err());
        let bad_patience = SolverConfig {
            patience: 0,
            ..Default::default()
        };
        assert!(bad_patience.validate().is_err());
        let bad_rate = SolverConfig {
            mutation_rate: 1.5,
            ..Default::default()
        };
        assert!(bad_rate.validate().is_err());
    }
}
