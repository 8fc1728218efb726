use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand};
use forage_core::harness::{
    apply_overrides, builtin_scenarios, figure_bundles, find_figure, find_scenario, run_batch,
    run_simulation, write_aggregate, write_series, ConfigFile, Scenario,
};
use forage_core::{validation, AgentRegistry, Error};

#[derive(Parser)]
#[command(name = "forage", version, about = "Sustainable foraging simulator")]
struct Cli {
    /// JSON config file merged into the selected scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a scenario field, e.g. `env.growth_rate=1.01`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scenario registry, figure bundles and agent kinds.
    List,
    /// Run a single seed and write its time series.
    Run {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run many seeds and write the aggregate.
    Batch {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value_t = default_parallelism())]
        parallel: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write every run's series.
        #[arg(long)]
        keep_runs: bool,
    },
    /// Run every scenario of a figure bundle and write aggregate CSVs.
    Reproduce {
        #[arg(long)]
        figure: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = default_parallelism())]
        parallel: usize,
    },
    /// Run the invariant suite.
    Validate,
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load_scenario(cli: &Cli, name: &str) -> anyhow::Result<Scenario> {
    resolve(cli, find_scenario(name)?)
}

fn resolve(cli: &Cli, base: Scenario) -> anyhow::Result<Scenario> {
    let config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            Some(ConfigFile::parse(&text).with_context(|| format!("in {}", path.display()))?)
        }
        None => None,
    };
    Ok(apply_overrides(&base, config.as_ref(), &cli.sets)?)
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn summary(name: &str, survival: f64, runs: usize) {
    println!("{name}: {runs} runs, survival fraction {survival}");
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let agents = AgentRegistry::default();
    match &cli.command {
        Command::List => {
            println!("scenarios:");
            for s in builtin_scenarios() {
                println!(
                    "  {:<22} {:>3} runs x {:>4} steps  {}",
                    s.name, s.num_runs, s.env.horizon, s.description
                );
            }
            println!("figures:");
            for f in figure_bundles() {
                let names: Vec<_> = f.entries.iter().map(|e| e.scenario.as_str()).collect();
                println!("  {:<6} {} [{}]", f.id, f.title, names.join(", "));
            }
            println!("agent kinds:");
            for (kind, desc) in agents.kinds() {
                println!("  {kind:<18} {desc}");
            }
        }
        Command::Run { scenario, seed, out } => {
            let s = load_scenario(cli, scenario)?;
            let series = run_simulation(&s, *seed, &agents)?;
            let last = series.last();
            println!(
                "{} seed {seed}: {} steps, {} alive, resource {}",
                s.name,
                series.len(),
                series.final_alive(),
                last.map_or(0.0, |r| r.resource)
            );
            if let Some(dir) = out {
                fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}.seed{seed}.csv", s.name));
                write_series(&series, &path)?;
                println!("wrote {}", path.display());
            }
        }
        Command::Batch {
            scenario,
            runs,
            parallel,
            out,
            keep_runs,
        } => {
            let mut s = load_scenario(cli, scenario)?;
            if let Some(r) = runs {
                s.num_runs = *r;
            }
            let result = run_batch(&s, *parallel, &agents)?;
            summary(&s.name, result.survival_fraction(), result.runs.len());
            if let Some(dir) = out {
                fs::create_dir_all(dir)?;
                write_aggregate(&result.aggregate, &dir.join(format!("{}.aggregate.csv", s.name)))?;
                write_json(&dir.join(format!("{}.scenario.json", s.name)), &serde_json::to_value(&s)?)?;
                if *keep_runs {
                    for (i, run) in result.runs.iter().enumerate() {
                        let seed = s.base_seed.wrapping_add(i as u64);
                        write_series(run, &dir.join(format!("{}.seed{seed}.csv", s.name)))?;
                    }
                }
                println!("wrote {}", dir.display());
            }
        }
        Command::Reproduce {
            figure,
            out,
            parallel,
        } => {
            let bundle = find_figure(figure)?;
            let dir = out.join(&bundle.id);
            fs::create_dir_all(&dir)?;
            let mut manifest = Vec::new();
            for entry in &bundle.entries {
                let s = resolve(cli, entry.resolve()?)?;
                let result = run_batch(&s, *parallel, &agents)?;
                summary(&s.name, result.survival_fraction(), result.runs.len());
                let file = format!("{}.aggregate.csv", s.name);
                write_aggregate(&result.aggregate, &dir.join(&file))?;
                manifest.push(serde_json::json!({
                    "file": file,
                    "scenario": s,
                    "survival_fraction": result.survival_fraction(),
                }));
            }
            write_json(
                &dir.join("manifest.json"),
                &serde_json::json!({ "figure": bundle.id, "title": bundle.title, "series": manifest }),
            )?;
            println!("wrote {}", dir.display());
        }
        Command::Validate => {
            let checks = validation::run_all()?;
            let mut ok = true;
            for c in &checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("{mark} {}", c.name);
                } else {
                    println!("{mark} {} ({})", c.name, c.detail);
                }
                ok &= c.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn is_usage_error(err: &anyhow::Error) -> bool {
    matches!(
        err.downcast_ref::<Error>(),
        Some(Error::UnknownScenario(_) | Error::UnknownFigure(_) | Error::UnknownAgent(_) | Error::Config(_))
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_usage_error(&err) {
                eprintln!();
                eprintln!("{}", Cli::command().render_usage());
                eprintln!("Run `forage list` to see the available scenarios and figures.");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
