use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rlvqc::exec::{self, ExecMode};
use rlvqc::harness::{
    gen_instances, hpo_random_search, load_instance, load_records, report, run_experiment, ExperimentConfig,
    Method, RunPaths, DEFAULT_BUDGET, OUTPUT_ENV,
};
use rlvqc::problems::{ProblemKind, TopologyClass};

/// Reinforcement-learning construction of variational circuits for QUBO
/// problems, with a QAOA baseline.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Output root holding instances/, records/, reports/ and hpo/.
    #[arg(long, global = true, env = OUTPUT_ENV, default_value = rlvqc::harness::DEFAULT_OUTPUT)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the 24 graphs and 72 QUBO instances of the benchmark grid.
    GenInstances,
    /// Train or optimize one method over a selection of instances and seeds.
    Run(RunArgs),
    /// Random hyperparameter search on the n = 8 instances.
    Hpo(HpoArgs),
    /// Aggregate run records into CSV tables and SVG plots.
    Report(ReportArgs),
}

#[derive(Args)]
struct Selection {
    /// Problems, comma separated (maxcut, mvc, maxclique). Default: all.
    #[arg(long, value_delimiter = ',')]
    problem: Vec<ProblemKind>,
    /// Topology keys, comma separated (e.g. 2d-grid-4, star). Default: all.
    #[arg(long, value_delimiter = ',')]
    topology: Vec<TopologyClass>,
    /// Problem sizes, comma separated. Default: 8.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    method: Option<Method>,
    #[command(flatten)]
    selection: Selection,
    /// Master seeds, comma separated. Default: 0..5.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// TOML experiment config; command-line options override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct HpoArgs {
    /// rlvqc_global or qaoa.
    #[arg(long)]
    method: Method,
    #[command(flatten)]
    selection: Selection,
    /// Number of sampled configurations.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML base config for the fields not searched.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Methods to include, comma separated. Default: all.
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    /// Records directory. Default: <out>/records.
    #[arg(long)]
    records: Option<PathBuf>,
}

fn base_config(path: Option<&PathBuf>) -> Result<ExperimentConfig> {
    Ok(match path {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    })
}

fn apply_selection(cfg: &mut ExperimentConfig, sel: &Selection) {
    if !sel.problem.is_empty() {
        cfg.problems = sel.problem.clone();
    }
    if !sel.topology.is_empty() {
        cfg.topologies = sel.topology.clone();
    }
    if !sel.n.is_empty() {
        cfg.sizes = sel.n.clone();
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        exec::set_workers(w);
    }
    let mode = if cli.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let instances_dir = cli.out.join("instances");
    match cli.command {
        Command::GenInstances => {
            let g = gen_instances(&instances_dir)?;
            println!(
                "wrote {} graphs and {} QUBO instances to {}",
                g.graphs.len(),
                g.qubos.len(),
                instances_dir.display()
            );
        }
        Command::Run(args) => {
            let mut cfg = base_config(args.config.as_ref())?;
            if let Some(m) = args.method {
                if args.config.is_some() && m != cfg.method {
                    cfg.ppo = None;
                }
                cfg.method = m;
            }
            apply_selection(&mut cfg, &args.selection);
            if !args.seeds.is_empty() {
                cfg.seeds = args.seeds;
            }
            cfg.validate()?;
            if !instances_dir.exists() {
                bail!("{} not found; run `rlvqc gen-instances` first", instances_dir.display());
            }
            let records_dir = cli.out.join("records");
            let start = Instant::now();
            let records = run_experiment(
                &cfg,
                &RunPaths {
                    instances: Some(instances_dir),
                    records: Some(records_dir.clone()),
                },
                mode,
            )?;
            for r in &records {
                println!(
                    "{} {} seed {}: A.R. {:.4} (raw {:.4}), depth {}, gates {}, {:.1}s",
                    r.spec.method,
                    r.spec.instance,
                    r.spec.seed,
                    r.metrics.approximation_ratio,
                    r.metrics.approximation_ratio_raw,
                    r.metrics.composition.depth,
                    r.metrics.composition.gate_count,
                    r.wall_time_s
                );
            }
            println!(
                "{} runs in {:.1}s; records under {}",
                records.len(),
                start.elapsed().as_secs_f64(),
                records_dir.display()
            );
        }
        Command::Hpo(args) => {
            let mut cfg = base_config(args.config.as_ref())?;
            cfg.method = args.method;
            cfg.sizes = vec![8];
            apply_selection(&mut cfg, &args.selection);
            let mut instances = vec![];
            for id in cfg.instances() {
                let q = if instances_dir.exists() {
                    load_instance(&instances_dir, id)?
                } else {
                    rlvqc::harness::build_instance(id)?
                };
                instances.push((id, q));
            }
            let hpo = hpo_random_search(&cfg, &instances, args.budget, args.seed, mode)?;
            let dir = cli.out.join("hpo");
            std::fs::create_dir_all(&dir)?;
            let report_path = dir.join(format!("{}-seed{}.json", args.method, args.seed));
            std::fs::write(&report_path, serde_json::to_string_pretty(&hpo)?)?;
            let config_path = dir.join(format!("{}-best.toml", args.method));
            let header = format!("# {}\n", hpo.note);
            std::fs::write(&config_path, header + &hpo.best_config.to_toml())?;
            println!("note: {}", hpo.note);
            println!(
                "best of {} trials: #{} score {:.4}",
                hpo.trials.len(),
                hpo.best_trial,
                hpo.trials[hpo.best_trial].score
            );
            println!("wrote {} and {}", report_path.display(), config_path.display());
        }
        Command::Report(args) => {
            let records_dir = args.records.unwrap_or_else(|| cli.out.join("records"));
            let records = load_records(&records_dir)?;
            let filter = (!args.method.is_empty()).then_some(args.method.as_slice());
            let files = report(&records, filter, &cli.out.join("reports"))?;
            println!("wrote {}", files.ar_table.display());
            println!("wrote {}", files.composition.display());
            println!("wrote {}", files.runs.display());
            for p in &files.plots {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

