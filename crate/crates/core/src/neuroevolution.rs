//! Online neuro-evolution: each agent keeps its own population of networks,
//! picks one per step by a softmax over fitness, credits it with the step's
//! reward, and runs one evolution cycle (tournament, arithmetic crossover,
//! mutation, replace the worst) every step.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::nets::{NetParams, NetShape, ObservationWindow};
use crate::policy::argmax_random_tie;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeConfig {
    pub population_size: usize,
    /// Softmax temperature over fitness. `inf` gives uniform selection.
    pub temperature: f64,
    pub tournament_size: usize,
    /// Per-weight probability of a Gaussian perturbation.
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
}

impl Default for NeConfig {
    fn default() -> Self {
        Self {
            population_size: 30,
            temperature: 1.0,
            tournament_size: 3,
            mutation_rate: 0.1,
            mutation_sigma: 0.1,
        }
    }
}

impl NeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(config_err("population_size must be >= 1"));
        }
        if !(self.temperature > 0.0) {
            return Err(config_err(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(config_err(format!(
                "tournament_size must be in 1..={}, got {}",
                self.population_size, self.tournament_size
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(config_err(format!(
                "mutation_rate must be in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        if !(self.mutation_sigma >= 0.0) {
            return Err(config_err(format!(
                "mutation_sigma must be >= 0, got {}",
                self.mutation_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub params: NetParams,
    /// Running mean of the rewards received while this genome acted.
    pub fitness: f64,
    pub uses: u64,
}

impl Genome {
    pub fn new(params: NetParams) -> Self {
        Self {
            params,
            fitness: 0.0,
            uses: 0,
        }
    }

    /// Fitness as seen by selection: a never-used genome counts as 0.
    pub fn effective_fitness(&self) -> f64 {
        if self.uses == 0 {
            0.0
        } else {
            self.fitness
        }
    }

    pub fn update_fitness(&mut self, reward: f64) {
        self.uses += 1;
        self.fitness += (reward - self.fitness) / self.uses as f64;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub genomes: Vec<Genome>,
    pub temperature: f64,
}

impl Population {
    pub fn random<R: Rng + ?Sized>(
        shape: &NetShape,
        size: usize,
        temperature: f64,
        rng: &mut R,
    ) -> Self {
        Self {
            genomes: (0..size)
                .map(|_| Genome::new(NetParams::init(shape, rng)))
                .collect(),
            temperature,
        }
    }

    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    /// Softmax of effective fitness over the population.
    pub fn selection_probabilities(&self) -> Vec<f64> {
        let logits: Vec<f64> = self
            .genomes
            .iter()
            .map(|g| {
                if self.temperature.is_infinite() {
                    0.0
                } else {
                    g.effective_fitness() / self.temperature
                }
            })
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Draws the genome that acts this step.
    pub fn select_network<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let probs = self.selection_probabilities();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    /// Best of `k` distinct genomes drawn uniformly; ties broken uniformly.
    pub fn tournament_select<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> usize {
        let k = k.clamp(1, self.len());
        let entrants = rand::seq::index::sample(rng, self.len(), k);
        let mut best = Vec::with_capacity(k);
        let mut best_fit = f64::NEG_INFINITY;
        for i in entrants.iter() {
            let f = self.genomes[i].effective_fitness();
            if f > best_fit {
                best_fit = f;
                best.clear();
                best.push(i);
            } else if f == best_fit {
                best.push(i);
            }
        }
        if best.len() == 1 {
            best[0]
        } else {
            best[rng.random_range(0..best.len())]
        }
    }

    /// Lowest effective fitness, lowest index on ties.
    pub fn worst(&self) -> usize {
        let mut worst = 0;
        for (i, g) in self.genomes.iter().enumerate().skip(1) {
            if g.effective_fitness() < self.genomes[worst].effective_fitness() {
                worst = i;
            }
        }
        worst
    }

    /// One evolution cycle. Returns the slot that received the child.
    pub fn evolve_step<R: Rng + ?Sized>(&mut self, config: &NeConfig, rng: &mut R) -> Result<usize> {
        let a = self.tournament_select(config.tournament_size, rng);
        let b = self.tournament_select(config.tournament_size, rng);
        let mut child =
            arithmetic_crossover(&self.genomes[a].params, &self.genomes[b].params, rng)?;
        mutate(&mut child, config.mutation_rate, config.mutation_sigma, rng);
        let slot = self.worst();
        self.genomes[slot] = Genome::new(child);
        Ok(slot)
    }
}

/// `alpha * a + (1 - alpha) * b`, elementwise.
pub fn blend(a: &NetParams, b: &NetParams, alpha: f64) -> Result<NetParams> {
    if !a.compatible(b) {
        return Err(Error::Architecture(format!(
            "cannot cross {:?} ({} params) with {:?} ({} params)",
            a.architecture(),
            a.len(),
            b.architecture(),
            b.len()
        )));
    }
    let mut child = a.clone();
    for (c, (&x, &y)) in child.data_mut().iter_mut().zip(a.data().iter().zip(b.data())) {
        *c = alpha * x + (1.0 - alpha) * y;
    }
    Ok(child)
}

/// Arithmetic crossover with a single `alpha ~ U(0, 1)`.
pub fn arithmetic_crossover<R: Rng + ?Sized>(
    a: &NetParams,
    b: &NetParams,
    rng: &mut R,
) -> Result<NetParams> {
    let alpha: f64 = rng.random();
    blend(a, b, alpha)
}

/// Perturbs each parameter with probability `rate` by `N(0, sigma^2)`.
/// Returns how many were touched.
pub fn mutate<R: Rng + ?Sized>(params: &mut NetParams, rate: f64, sigma: f64, rng: &mut R) -> usize {
    let mut touched = 0;
    for w in params.data_mut() {
        if rng.random::<f64>() < rate {
            let z: f64 = rng.sample(StandardNormal);
            *w += sigma * z;
            touched += 1;
        }
    }
    touched
}

/// A neuro-evolution learner for one agent.
#[derive(Clone, Debug)]
pub struct NeLearner {
    config: NeConfig,
    population: Population,
    window: ObservationWindow,
    acting: Option<usize>,
}

impl NeLearner {
    pub fn new<R: Rng + ?Sized>(shape: &NetShape, config: NeConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            population: Population::random(shape, config.population_size, config.temperature, rng),
            window: ObservationWindow::new(shape.window),
            config,
            acting: None,
        })
    }

    pub fn from_population(population: Population, config: NeConfig, window: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            population,
            window: ObservationWindow::new(window),
            config,
            acting: None,
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn acting(&self) -> Option<usize> {
        self.acting
    }

    /// Picks a network by softmax over fitness and returns the argmax of its
    /// outputs for the current observation (or window).
    pub fn decide<R: Rng + ?Sized>(&mut self, observation: Vec<f64>, rng: &mut R) -> Result<usize> {
        self.window.push(observation);
        let idx = self.population.select_network(rng);
        let scores = self.population.genomes[idx].params.scores(&self.window)?;
        self.acting = Some(idx);
        Ok(argmax_random_tie(&scores, rng))
    }

    /// Credits the acting network, then evolves unless the agent just died.
    pub fn reward<R: Rng + ?Sized>(&mut self, reward: f64, terminal: bool, rng: &mut R) -> Result<()> {
        if let Some(idx) = self.acting.take() {
            self.population.genomes[idx].update_fitness(reward);
        }
        if !terminal {
            self.population.evolve_step(&self.config, rng)?;
        }
        Ok(())
    }
}
