//! Invariant suite run by `forage validate`.

use rand::Rng;

use crate::agents::AgentRegistry;
use crate::environment::{EnvConfig, Environment};
use crate::error::Result;
use crate::harness::{find_scenario, run_batch, run_simulation};
use crate::nets::{Architecture, NetParams, NetShape, ObservationWindow};
use crate::rng::{env_rng, stream};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Largest relative deviation between the simulated stock and
/// `R <- (R - c) * g`, over the steps before the stock runs short of `c`.
pub fn recurrence_error(consumption: f64, steps: usize) -> Result<f64> {
    let g = 1.005;
    let (cfg, mut env) = if consumption == 0.0 {
        let cfg = EnvConfig { num_agents: 0, ..EnvConfig::default() };
        let mut env = Environment::new(cfg.clone(), 0)?;
        env.set_resource(500.0);
        (cfg, env)
    } else {
        let cfg = EnvConfig {
            max_gather: consumption,
            thresholds: vec![f64::MAX],
            survival_cost: 0.0,
            ..EnvConfig::default()
        };
        (cfg.clone(), Environment::new(cfg, 0)?)
    };
    let choices = vec![Some(0); cfg.num_agents];
    let mut rng = env_rng(0);
    let mut expected = 500.0f64;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        if expected < consumption {
            break;
        }
        env.step(&choices, &mut rng)?;
        expected = (expected - consumption) * g;
        let got = env.state().resource;
        let rel = (got - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Norm-relative error between an analytic gradient and central differences.
pub fn gradient_check_error(net: &NetParams, window: &ObservationWindow, output_grad: &[f64], h: f64) -> Result<f64> {
    let analytic = net.gradient(window, output_grad)?;
    let objective = |p: &NetParams| -> Result<f64> {
        Ok(p.scores(window)?.iter().zip(output_grad).map(|(s, g)| s * g).sum())
    };
    let mut numeric = vec![0.0; net.len()];
    let mut probe = net.clone();
    for i in 0..net.len() {
        let w = net.data()[i];
        probe.data_mut()[i] = w + h;
        let up = objective(&probe)?;
        probe.data_mut()[i] = w - h;
        let down = objective(&probe)?;
        probe.data_mut()[i] = w;
        numeric[i] = (up - down) / (2.0 * h);
    }
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    let scale = na.max(nn);
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

fn random_gradient_case<R: Rng>(arch: Architecture, rng: &mut R) -> (NetParams, ObservationWindow, Vec<f64>) {
    let shape = NetShape::standard(arch, 4);
    let net = NetParams::init(&shape, rng);
    let len = match arch {
        Architecture::Ffn => 1,
        Architecture::Lstm => rng.random_range(1..=shape.window),
    };
    let mut window = ObservationWindow::new(shape.window);
    for _ in 0..len {
        window.push((0..shape.input_dim).map(|_| rng.random_range(0.0..1.5)).collect());
    }
    let og = (0..shape.outputs).map(|_| rng.random_range(-1.0..1.0)).collect();
    (net, window, og)
}

pub fn run_all() -> Result<Vec<Check>> {
    let agents = AgentRegistry::default();
    let mut out = Vec::new();

    for c in [0.0, 2.0, 5.0, 20.0, 50.0] {
        let err = recurrence_error(c, 1000)?;
        out.push(check(
            &format!("stock recurrence, consumption {c}"),
            err <= 1e-9,
            format!("max relative error {err:.3e}"),
        ));
    }

    // Conservation, monotone death and energy bound under random choices.
    let cfg = EnvConfig::range(10, 1000);
    let mut env = Environment::new(cfg.clone(), 1)?;
    let mut rng = env_rng(1);
    let mut choice_rng = stream(1, 99);
    let (mut conserved, mut monotone, mut bounded) = (true, true, true);
    let mut alive = env.state().alive_count();
    let mut deaths = 0;
    for t in 1..=cfg.horizon {
        let before: f64 = env.state().agents.iter().map(|a| a.energy).sum();
        let stock = env.state().resource;
        let choices: Vec<Option<usize>> = env
            .state()
            .agents
            .iter()
            .map(|a| a.alive.then(|| choice_rng.random_range(0..4)))
            .collect();
        let live_before = env.state().alive_count() as f64;
        let report = env.step(&choices, &mut rng)?;
        let after: f64 = env.state().agents.iter().map(|a| a.energy).sum();
        let gained = after - before + cfg.survival_cost * live_before;
        let removed = stock - env.state().resource / cfg.growth_rate;
        conserved &= (gained - removed).abs() <= 1e-9 * stock.max(1.0)
            && (report.removed - report.gathered.iter().sum::<f64>()).abs() <= 1e-9;
        let now = env.state().alive_count();
        monotone &= now <= alive;
        alive = now;
        deaths += report.deaths.len();
        let bound = cfg.initial_energy + (cfg.max_gather - cfg.survival_cost) * t as f64;
        bounded &= env.state().agents.iter().all(|a| a.energy <= bound);
    }
    out.push(check("energy gained equals stock removed", conserved, String::new()));
    out.push(check("alive count never increases", monotone, String::new()));
    out.push(check(
        "deaths sum to agents lost",
        deaths == cfg.num_agents - alive,
        format!("{deaths} deaths, {alive} alive"),
    ));
    out.push(check("energy within gather bound", bounded, String::new()));

    let mut rng = stream(2024, 0);
    for arch in [Architecture::Ffn, Architecture::Lstm] {
        let mut worst = 0.0f64;
        for _ in 0..25 {
            let (net, window, og) = random_gradient_case(arch, &mut rng);
            worst = worst.max(gradient_check_error(&net, &window, &og, 1e-6)?);
        }
        out.push(check(
            &format!("{arch:?} gradient vs finite differences"),
            worst <= 1e-4,
            format!("max relative error {worst:.3e}"),
        ));
    }

    let moderate = run_simulation(&find_scenario("baseline-moderate-1")?, 0, &agents)?;
    let greedy = run_simulation(&find_scenario("baseline-greedy-1")?, 0, &agents)?;
    out.push(check(
        "moderate baseline survives, greedy baseline collapses",
        moderate.survived()
            && moderate.last().is_some_and(|r| r.resource > 500.0)
            && !greedy.survived()
            && greedy.depletion_step().is_some(),
        String::new(),
    ));

    let ne = find_scenario("NE-1-binary")?.with_horizon(200).with_runs(4);
    let a = run_simulation(&ne, 3, &agents)?;
    let b = run_simulation(&ne, 3, &agents)?;
    out.push(check("same seed, same run", a == b, String::new()));
    let p1 = run_batch(&ne, 1, &agents)?;
    let p4 = run_batch(&ne, 4, &agents)?;
    out.push(check(
        "aggregate independent of worker count",
        p1.aggregate == p4.aggregate,
        String::new(),
    ));
    Ok(out)
}
