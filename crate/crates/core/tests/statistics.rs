use forage_core::drqn::epsilon_greedy;
use forage_core::nets::{Activation, Architecture, FfnParams, NetParams, NetShape};
use forage_core::neuroevolution::{
    arithmetic_crossover, mutate, Genome, NeConfig, NeLearner, Population,
};
use forage_core::rng::stream;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn choose(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn population_with_fitness(fitness: &[f64], temperature: f64) -> Population {
    let mut rng = stream(0, 0);
    let mut pop = Population::random(
        &NetShape::standard(Architecture::Ffn, 2),
        fitness.len(),
        temperature,
        &mut rng,
    );
    for (g, &f) in pop.genomes.iter_mut().zip(fitness) {
        g.update_fitness(f);
    }
    pop
}

fn chi_square_p(counts: &[u64], expected: &[f64]) -> f64 {
    let stat: f64 = counts
        .iter()
        .zip(expected)
        .map(|(&c, &e)| (c as f64 - e).powi(2) / e)
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn tournament_of_three_picks_best_one_time_in_ten() {
    let fitness: Vec<f64> = (0..30).map(f64::from).collect();
    let pop = population_with_fitness(&fitness, 1.0);
    let expected = 1.0 - choose(29, 3) / choose(30, 3);
    assert!((expected - 0.1).abs() < 1e-12);
    let mut rng = stream(1, 0);
    let trials = 100_000;
    let wins = (0..trials).filter(|_| pop.tournament_select(3, &mut rng) == 29).count();
    let freq = wins as f64 / trials as f64;
    assert!((freq - expected).abs() <= 0.01, "{freq}");
}

#[test]
fn tournament_winner_distribution_matches_order_statistics() {
    // P(winner = rank r of 30) = C(r, 2) / C(30, 3) for ranks 0..29.
    let fitness: Vec<f64> = (0..30).map(f64::from).collect();
    let pop = population_with_fitness(&fitness, 1.0);
    let mut rng = stream(2, 0);
    let trials = 100_000u64;
    let mut counts = vec![0u64; 30];
    for _ in 0..trials {
        counts[pop.tournament_select(3, &mut rng)] += 1;
    }
    // Ranks 0 and 1 can never win; test the rest.
    let expected: Vec<f64> = (2..30).map(|r| trials as f64 * choose(r, 2) / choose(30, 3)).collect();
    assert_eq!(counts[0] + counts[1], 0);
    assert!(chi_square_p(&counts[2..], &expected) > 0.001);
}

#[test]
fn infinite_temperature_selection_is_uniform() {
    let fitness: Vec<f64> = (0..30).map(|i| f64::from(i) * 0.3).collect();
    let pop = population_with_fitness(&fitness, f64::INFINITY);
    let mut rng = stream(3, 0);
    let trials = 100_000u64;
    let mut counts = vec![0u64; 30];
    for _ in 0..trials {
        counts[pop.select_network(&mut rng)] += 1;
    }
    let expected = vec![trials as f64 / 30.0; 30];
    assert!(chi_square_p(&counts, &expected) > 0.001);
}

#[test]
fn selection_frequencies_follow_softmax() {
    let fitness: Vec<f64> = (0..30).map(|i| (i % 5) as f64 * 0.5).collect();
    let pop = population_with_fitness(&fitness, 1.0);
    let weights: Vec<f64> = fitness.iter().map(|f| f.exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut rng = stream(4, 0);
    let trials = 100_000u64;
    let mut counts = vec![0u64; 30];
    for _ in 0..trials {
        counts[pop.select_network(&mut rng)] += 1;
    }
    let expected: Vec<f64> = weights.iter().map(|w| trials as f64 * w / total).collect();
    assert!(chi_square_p(&counts, &expected) > 0.001);
}

#[test]
fn mutation_rate_and_scale() {
    let shape = NetShape {
        architecture: Architecture::Ffn,
        input_dim: 2500,
        hidden: 4,
        outputs: 1,
        activation: Activation::Tanh,
        window: 1,
    };
    let mut net = NetParams::zeros(&shape);
    let n = net.len();
    assert!(n >= 10_000);
    let mut rng = stream(5, 0);
    let touched = mutate(&mut net, 0.1, 0.1, &mut rng);
    let changed: Vec<f64> = net.data().iter().copied().filter(|v| *v != 0.0).collect();
    assert_eq!(changed.len(), touched);
    let rate = touched as f64 / n as f64;
    assert!((rate - 0.1).abs() <= 0.01, "rate {rate}");
    let mean = changed.iter().sum::<f64>() / changed.len() as f64;
    let var = changed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (changed.len() - 1) as f64;
    assert!((var.sqrt() - 0.1).abs() <= 0.01, "std {}", var.sqrt());
}

#[test]
fn crossover_children_lie_between_parents() {
    let shape = NetShape::standard(Architecture::Lstm, 4);
    let mut rng = stream(6, 0);
    for _ in 0..1000 {
        let a = NetParams::init(&shape, &mut rng);
        let b = NetParams::init(&shape, &mut rng);
        let c = arithmetic_crossover(&a, &b, &mut rng).unwrap();
        for ((x, y), z) in a.data().iter().zip(b.data()).zip(c.data()) {
            assert!(*z >= x.min(*y) - 1e-15 && *z <= x.max(*y) + 1e-15);
        }
    }
}

#[test]
fn epsilon_one_is_uniform() {
    let mut rng = stream(7, 0);
    let q = [0.3, 2.0, -1.0, 0.5];
    let trials = 100_000u64;
    let mut counts = [0u64; 4];
    for _ in 0..trials {
        counts[epsilon_greedy(&q, 1.0, &mut rng)] += 1;
    }
    let p = 0.25;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - trials as f64 * p).abs() <= 3.0 * sd, "{counts:?}");
    }
}

#[test]
fn epsilon_tenth_mostly_exploits() {
    let mut rng = stream(8, 0);
    let q = [0.3, 2.0, -1.0, 0.5];
    let trials = 100_000u64;
    let hits = (0..trials).filter(|_| epsilon_greedy(&q, 0.1, &mut rng) == 1).count();
    let p = 0.9 + 0.1 / 4.0;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((hits as f64 - trials as f64 * p).abs() <= 4.0 * sd, "{hits}");
}

#[test]
fn fresh_populations_act_uniformly() {
    let shape = NetShape::standard(Architecture::Ffn, 4);
    let obs = vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut counts = [0u64; 4];
    let seeds = 1000u64;
    for seed in 0..seeds {
        let mut rng = stream(seed, 1);
        let mut learner = NeLearner::new(&shape, NeConfig::default(), &mut rng).unwrap();
        counts[learner.decide(obs.clone(), &mut rng).unwrap()] += 1;
    }
    for c in counts {
        assert!((c as f64 / seeds as f64 - 0.25).abs() <= 0.05, "{counts:?}");
    }
}

#[test]
fn favoured_greedy_genome_acts_with_its_softmax_weight() {
    let constant = |action: usize| {
        let mut p = FfnParams::zeros(5, 3, 2, Activation::Tanh);
        p.b2_mut()[action] = 1.0;
        NetParams::Ffn(p)
    };
    let mut genomes: Vec<Genome> = (0..30).map(|_| Genome::new(constant(0))).collect();
    genomes[0] = Genome::new(constant(1));
    genomes[0].update_fitness(3.0);
    let pop = Population { genomes, temperature: 1.0 };
    let mut learner = NeLearner::from_population(pop, NeConfig::default(), 1).unwrap();
    let mut rng = stream(9, 0);
    let trials = 100_000u64;
    let greedy = (0..trials)
        .filter(|_| learner.decide(vec![0.5; 5], &mut rng).unwrap() == 1)
        .count();
    let p = 3f64.exp() / (3f64.exp() + 29.0);
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((greedy as f64 - trials as f64 * p).abs() <= 4.0 * sd, "{greedy} vs {}", trials as f64 * p);
}
