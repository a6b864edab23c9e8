use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavechar::dataset::{self, EmbeddingTable};
use wavechar::embedding::ErrorPolicy;
use wavechar::eval::{self, EvalConfig, SweepAxis};
use wavechar::{EmbeddingParams, Error, Result};

/// Whole-graph embeddings from wavelet-weighted characteristic functions.
#[derive(Debug, Parser)]
#[command(name = "wavechar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Embed every graph of a dataset directory and write the embedding CSV.
    Embed {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
        #[command(flatten)]
        embedding: EmbeddingFlags,
        #[command(flatten)]
        runtime: RuntimeFlags,
    },
    /// Evaluate an embedding CSV against binary labels.
    Evaluate {
        #[arg(long, value_name = "FILE")]
        embeddings: PathBuf,
        #[arg(long, value_name = "FILE")]
        target: PathBuf,
        #[command(flatten)]
        eval: EvalFlags,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Embed and evaluate a labeled dataset in one go.
    Run {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        /// Also write the embeddings here.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
        #[command(flatten)]
        embedding: EmbeddingFlags,
        #[command(flatten)]
        eval: EvalFlags,
        #[command(flatten)]
        runtime: RuntimeFlags,
    },
    /// Vary one embedding parameter at a time and report the mean AUC for each value.
    Sensitivity {
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        /// Sensitivity CSV destination; standard output when omitted.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
        /// Axis as `name=v1,v2,...` with name one of kmax, d, tau, tmax. Repeatable.
        #[arg(long = "grid", value_name = "SPEC", required = true)]
        grid: Vec<String>,
        #[command(flatten)]
        embedding: EmbeddingFlags,
        #[command(flatten)]
        eval: EvalFlags,
        #[command(flatten)]
        runtime: RuntimeFlags,
    },
}

#[derive(Debug, Args)]
struct EmbeddingFlags {
    #[arg(long = "kmax", default_value_t = 5)]
    k_max: usize,
    #[arg(long, default_value_t = 25)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long = "tmax", default_value_t = 2.5)]
    t_max: f64,
}

impl EmbeddingFlags {
    fn params(&self) -> Result<EmbeddingParams> {
        let params = EmbeddingParams {
            k_max: self.k_max,
            d: self.d,
            tau: self.tau,
            t_max: self.t_max,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Args)]
struct EvalFlags {
    /// Comma-separated split seeds.
    #[arg(long, default_value = "0,1,2,3,4,5,6,7,8,9")]
    seeds: String,
    #[arg(long = "test-ratio", default_value_t = 0.2)]
    test_ratio: f64,
    /// Inverse L2 regularization strength.
    #[arg(long = "l2-strength", default_value_t = 1.0)]
    l2_strength: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iterations: usize,
    /// Print per-seed AUCs as CSV after the summary line.
    #[arg(long = "per-seed")]
    per_seed: bool,
}

impl EvalFlags {
    fn config(&self) -> Result<EvalConfig> {
        let seeds = self
            .seeds
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Input(format!("--seeds: \"{s}\" is not a non-negative integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        let config = EvalConfig {
            seeds,
            test_ratio: self.test_ratio,
            l2_strength: self.l2_strength,
            max_iterations: self.max_iterations,
            ..EvalConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct RuntimeFlags {
    /// Worker threads for embedding (0 = all cores). Never changes the output.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Log and leave out graphs that fail to embed instead of aborting.
    #[arg(long = "skip-bad-graphs")]
    skip_bad_graphs: bool,
}

impl RuntimeFlags {
    fn policy(&self) -> ErrorPolicy {
        if self.skip_bad_graphs {
            ErrorPolicy::Skip
        } else {
            ErrorPolicy::Abort
        }
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Input(format!("cannot start {threads} worker threads: {e}")))
}

fn load_labeled(input: &Path) -> Result<dataset::GraphCollection> {
    let collection = dataset::load_dataset(input)?;
    if collection.labels.is_none() {
        return Err(Error::Input(format!(
            "{} not found",
            input.join(dataset::TARGET_FILE).display()
        )));
    }
    Ok(collection)
}

fn embed(input: &Path, params: &EmbeddingParams, runtime: &RuntimeFlags) -> Result<(dataset::GraphCollection, EmbeddingTable)> {
    let collection = dataset::load_dataset(input)?;
    log::info!("loaded {} graphs from {}", collection.len(), input.display());
    let table = thread_pool(runtime.threads)?.install(|| dataset::embed_dataset(&collection, params, runtime.policy()))?;
    log::info!("embedded {} graphs into {} dimensions", table.rows.len(), table.rows[0].len());
    Ok((collection, table))
}

fn report(rows: &[Vec<f64>], labels: &[u8], flags: &EvalFlags, config: &EvalConfig, threads: usize) -> Result<()> {
    let report = thread_pool(threads)?.install(|| eval::evaluate(rows, labels, config))?;
    let mut out = io::stdout().lock();
    let write = |out: &mut dyn Write| -> io::Result<()> {
        writeln!(out, "{report}")?;
        if flags.per_seed {
            report.write_per_seed_csv(&mut *out)?;
        }
        Ok(())
    };
    write(&mut out).map_err(|e| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed {
            input,
            output,
            embedding,
            runtime,
        } => {
            let params = embedding.params()?;
            let (_, table) = embed(&input, &params, &runtime)?;
            dataset::write_embeddings(&output, &table.ids, &table.rows)
        }
        Command::Evaluate {
            embeddings,
            target,
            eval,
            threads,
        } => {
            let config = eval.config()?;
            let table = dataset::read_embeddings(&embeddings)?;
            let labels = dataset::read_labels(&target)?;
            let y = eval::align_labels(&table.ids, &labels).map_err(|e| e.context(target.display()))?;
            if labels.len() > y.len() {
                log::warn!("{} labels have no embedding", labels.len() - y.len());
            }
            report(&table.rows, &y, &eval, &config, threads)
        }
        Command::Run {
            input,
            output,
            embedding,
            eval,
            runtime,
        } => {
            let params = embedding.params()?;
            let config = eval.config()?;
            load_labeled(&input)?;
            let (collection, table) = embed(&input, &params, &runtime)?;
            if let Some(path) = output {
                dataset::write_embeddings(&path, &table.ids, &table.rows)?;
            }
            let labels = collection.labels.as_ref().expect("checked above");
            let y = eval::align_labels(&table.ids, labels)?;
            report(&table.rows, &y, &eval, &config, runtime.threads)
        }
        Command::Sensitivity {
            input,
            output,
            grid,
            embedding,
            eval,
            runtime,
        } => {
            let params = embedding.params()?;
            let config = eval.config()?;
            let grid = grid.iter().map(|g| g.parse::<SweepAxis>()).collect::<Result<Vec<_>>>()?;
            let collection = load_labeled(&input)?;
            let rows = thread_pool(runtime.threads)?
                .install(|| eval::sensitivity_sweep(&collection, &params, &grid, &config, runtime.policy()))?;
            match output {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                    eval::write_sensitivity_csv(file, &rows).map_err(|e| Error::Io { path, source: e })
                }
                None => eval::write_sensitivity_csv(io::stdout().lock(), &rows).map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
