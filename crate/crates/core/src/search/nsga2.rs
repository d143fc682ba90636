use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pareto::{dominates, Direction};
use super::space::{Genome, SearchSpace};
use crate::error::{Error, Result};
use crate::evaluation::Configuration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Options {
    /// Total trials, duplicates included.
    pub trials: usize,
    pub population: usize,
    pub crossover_rate: f64,
    /// Per-gene random-reset probability; defaults to 1 / genes.
    pub mutation_rate: f64,
    pub seed: u64,
    /// Evaluate the members of a generation concurrently.
    pub parallel: bool,
    /// Starting population; random when empty.
    pub initial: Vec<Configuration>,
}

impl Default for Nsga2Options {
    fn default() -> Self {
        Nsga2Options {
            trials: 1000,
            population: 50,
            crossover_rate: 0.9,
            mutation_rate: 0.25,
            seed: 0,
            parallel: false,
            initial: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    /// Trial number of the first evaluation of this configuration.
    pub number: usize,
    pub config: Configuration,
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Distinct configurations that evaluated successfully, in order of
    /// first evaluation.
    pub evaluated: Vec<Trial>,
    pub trials_run: usize,
    pub invalid: usize,
}

/// Deb's fast non-dominated sort; returns fronts of indices, best first.
pub fn non_dominated_sort(points: &[&[f64]], directions: &[Direction]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(points[i], points[j], directions) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(points[j], points[i], directions) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front (same order as `front`).
pub fn crowding_distance(points: &[&[f64]], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = points[front[0]].len();
    for obj in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            points[front[a]][obj]
                .total_cmp(&points[front[b]][obj])
                .then(front[a].cmp(&front[b]))
        });
        let lo = points[front[order[0]]][obj];
        let hi = points[front[order[n - 1]]][obj];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..n - 1 {
                let gap = points[front[order[w + 1]]][obj] - points[front[order[w - 1]]][obj];
                dist[order[w]] += gap / (hi - lo);
            }
        }
    }
    dist
}

struct Member {
    genome: Genome,
    objectives: Vec<f64>,
    rank: usize,
    crowding: f64,
}

fn generation_rng(seed: u64, generation: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(generation);
    rng
}

fn random_genome(rng: &mut ChaCha8Rng, lengths: &Genome) -> Genome {
    let mut g = [0; 4];
    for (gene, &len) in g.iter_mut().zip(lengths) {
        *gene = rng.gen_range(0..len);
    }
    g
}

/// Orders members by rank, then crowding (larger first), then genome, and
/// keeps the first `size`.
fn select_survivors(mut pool: Vec<Member>, size: usize, directions: &[Direction]) -> Vec<Member> {
    let points: Vec<&[f64]> = pool.iter().map(|m| m.objectives.as_slice()).collect();
    let fronts = non_dominated_sort(&points, directions);
    let mut rank = vec![0; pool.len()];
    let mut crowding = vec![0.0; pool.len()];
    for (r, front) in fronts.iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(&points, front)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    for (i, m) in pool.iter_mut().enumerate() {
        m.rank = rank[i];
        m.crowding = crowding[i];
    }
    pool.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(b.crowding.total_cmp(&a.crowding))
            .then(a.genome.cmp(&b.genome))
    });
    pool.truncate(size);
    pool
}

fn better(a: &Member, b: &Member) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

/// NSGA-II over the discrete grid `space`.
///
/// Each generation breeds `population` children by binary tournament,
/// uniform crossover and per-gene random reset, then keeps the best
/// `population` of parents and children by rank and crowding. Every child
/// counts as a trial; a genome already seen is served from cache. A trial
/// whose evaluation fails is marked invalid and dropped.
pub fn nsga2_search<F>(
    space: &SearchSpace,
    evaluator: F,
    directions: &[Direction],
    opts: &Nsga2Options,
) -> Result<SearchOutcome>
where
    F: Fn(&Configuration) -> Result<Vec<f64>> + Sync,
{
    space.validate()?;
    if opts.population < 4 || opts.trials < opts.population {
        return Err(Error::InvalidConfig(format!(
            "need trials >= population >= 4, got trials {} population {}",
            opts.trials, opts.population
        )));
    }
    let lengths = space.axis_lengths();
    let mut cache: HashMap<Genome, Option<Vec<f64>>> = HashMap::new();
    let mut evaluated: Vec<Trial> = Vec::new();
    let mut trials_run = 0usize;
    let mut invalid = 0usize;

    let mut run_batch = |genomes: &[Genome], trials_run: &mut usize| -> Vec<Member> {
        let mut fresh: Vec<Genome> = Vec::new();
        for g in genomes {
            if !cache.contains_key(g) && !fresh.contains(g) {
                fresh.push(*g);
            }
        }
        let outcomes: Vec<Result<Vec<f64>>> = if opts.parallel {
            fresh.par_iter().map(|g| evaluator(&space.decode(g))).collect()
        } else {
            fresh.iter().map(|g| evaluator(&space.decode(g))).collect()
        };
        let first_trial: HashMap<Genome, usize> = genomes
            .iter()
            .enumerate()
            .rev()
            .map(|(i, g)| (*g, *trials_run + i))
            .collect();
        for (g, outcome) in fresh.iter().zip(outcomes) {
            match outcome {
                Ok(objectives) if objectives.len() == directions.len() && objectives.iter().all(|v| v.is_finite()) => {
                    evaluated.push(Trial {
                        number: first_trial[g],
                        config: space.decode(g),
                        objectives: objectives.clone(),
                    });
                    cache.insert(*g, Some(objectives));
                }
                Ok(_) => {
                    log::warn!("trial {} returned malformed objectives", space.decode(g));
                    cache.insert(*g, None);
                }
                Err(e) => {
                    log::warn!("trial {} failed: {e}", space.decode(g));
                    cache.insert(*g, None);
                }
            }
        }
        *trials_run += genomes.len();
        let mut members = Vec::new();
        for g in genomes {
            match &cache[g] {
                Some(obj) => members.push(Member {
                    genome: *g,
                    objectives: obj.clone(),
                    rank: 0,
                    crowding: 0.0,
                }),
                None => invalid += 1,
            }
        }
        members
    };

    let mut rng = generation_rng(opts.seed, 0);
    let mut initial: Vec<Genome> = opts
        .initial
        .iter()
        .map(|c| {
            space
                .encode(c)
                .ok_or_else(|| Error::InvalidConfig(format!("initial member {c} is outside the space")))
        })
        .collect::<Result<_>>()?;
    while initial.len() < opts.population {
        initial.push(random_genome(&mut rng, &lengths));
    }
    initial.truncate(opts.population);
    let members = run_batch(&initial, &mut trials_run);
    let mut parents = select_survivors(dedup(members), opts.population, directions);

    let mut generation = 1u64;
    while trials_run < opts.trials {
        let mut rng = generation_rng(opts.seed, generation);
        let n_children = opts.population.min(opts.trials - trials_run);
        let mut children = Vec::with_capacity(n_children);
        for _ in 0..n_children {
            if parents.is_empty() {
                children.push(random_genome(&mut rng, &lengths));
                continue;
            }
            let tournament = |rng: &mut ChaCha8Rng| {
                let a = &parents[rng.gen_range(0..parents.len())];
                let b = &parents[rng.gen_range(0..parents.len())];
                if better(b, a) {
                    b.genome
                } else {
                    a.genome
                }
            };
            let p1 = tournament(&mut rng);
            let p2 = tournament(&mut rng);
            let mut child = p1;
            if rng.gen::<f64>() < opts.crossover_rate {
                for (gene, other) in child.iter_mut().zip(p2) {
                    if rng.gen::<bool>() {
                        *gene = other;
                    }
                }
            }
            for (gene, &len) in child.iter_mut().zip(&lengths) {
                if rng.gen::<f64>() < opts.mutation_rate {
                    *gene = rng.gen_range(0..len);
                }
            }
            children.push(child);
        }
        let offspring = run_batch(&children, &mut trials_run);
        let mut pool = parents;
        pool.extend(offspring);
        parents = select_survivors(dedup(pool), opts.population, directions);
        generation += 1;
    }

    Ok(SearchOutcome {
        evaluated,
        trials_run,
        invalid,
    })
}

fn dedup(members: Vec<Member>) -> Vec<Member> {
    let mut seen = std::collections::HashSet::new();
    members.into_iter().filter(|m| seen.insert(m.genome)).collect()
}
