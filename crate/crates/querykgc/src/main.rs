use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use querykgc::commands::{self, Context, PipelineInputs};
use querykgc::{Failure, Settings};
use querykgc_core::predict::Method;

/// Query-guided knowledge graph completion.
#[derive(Parser)]
#[command(name = "querykgc", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline directory holding all artifacts.
    #[arg(long, global = true, default_value = ".")]
    dir: PathBuf,
    /// Settings file with one `key=value` per line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any setting, e.g. `--set dim=64`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rs,
    Qg,
    Topk,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Rs => Method::Rs,
            MethodArg::Qg => Method::Qg,
            MethodArg::Topk => Method::TopK,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load, sanitize and split a graph.
    Ingest {
        /// Graph file (.nt or .tsv).
        #[arg(long)]
        kg: PathBuf,
        /// SPARQL query log, one query per line.
        #[arg(long)]
        log: PathBuf,
    },
    /// Mine entity-predicate pairs from a query log.
    Mine {
        #[arg(long)]
        log: PathBuf,
    },
    /// Train the embedding model.
    Train {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Predict missing triplets.
    Predict {
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Number of predictions (rs, qg).
        #[arg(short = 'n', long)]
        predictions: Option<usize>,
    },
    /// Partition predicted pairs by metadata (--km) or score bins (--es).
    Guide {
        #[arg(long)]
        km: bool,
        #[arg(long)]
        es: bool,
        #[arg(long, value_enum, default_value = "rs")]
        method: MethodArg,
        /// `entity<TAB>type` rows; required with --km.
        #[arg(long)]
        entity_types: Option<PathBuf>,
        /// `predicate<TAB>domain<TAB>range` rows; required with --km.
        #[arg(long)]
        domain_range: Option<PathBuf>,
    },
    /// Evaluate predictions against the test split.
    Eval {
        #[arg(long, value_enum)]
        method: MethodArg,
    },
    /// Write an annotation sheet of sampled predicted pairs.
    Export {
        #[arg(long, value_enum)]
        method: MethodArg,
    },
    /// Compute the relevant-among-correct ratio of a filled sheet.
    RcRatio { sheet: PathBuf },
    /// Generate the synthetic benchmark files.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage for RS and QG.
    Run {
        #[arg(long)]
        kg: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, requires = "domain_range")]
        entity_types: Option<PathBuf>,
        #[arg(long, requires = "entity_types")]
        domain_range: Option<PathBuf>,
    },
}

fn settings(common: &Common, extra: &[(&str, Option<String>)]) -> Result<Settings, Failure> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        s.apply_file(path)?;
    }
    for o in &common.overrides {
        s.set_pair(o)?;
    }
    if let Some(seed) = common.seed {
        s.set("seed", &seed.to_string())?;
    }
    if let Some(t) = common.threads {
        s.set("threads", &t.to_string())?;
    }
    for (k, v) in extra {
        if let Some(v) = v {
            s.set(k, v)?;
        }
    }
    Ok(s)
}

fn text<T: ToString>(v: Option<T>) -> Option<String> {
    v.map(|v| v.to_string())
}

fn run(cli: Cli) -> Result<Vec<String>, Failure> {
    let common = &cli.common;
    let context =
        |extra: &[(&str, Option<String>)]| Context::new(&common.dir, settings(common, extra)?);
    let one = |r: Result<String, Failure>| r.map(|s| vec![s]);
    match cli.command {
        Command::Ingest { kg, log } => one(context(&[])?.ingest(&kg, &log)),
        Command::Mine { log } => one(context(&[])?.mine(&log)),
        Command::Train {
            dim,
            epochs,
            learning_rate,
            gamma,
        } => one(context(&[
            ("dim", text(dim)),
            ("epochs", text(epochs)),
            ("learning_rate", text(learning_rate)),
            ("gamma", text(gamma)),
        ])?
        .train()),
        Command::Predict {
            method,
            predictions,
        } => one(context(&[("predictions", text(predictions))])?.predict(method.into())),
        Command::Guide {
            km,
            es,
            method,
            entity_types,
            domain_range,
        } => {
            if !km && !es {
                return Err(Failure::Usage("guide needs --km, --es or both".into()));
            }
            let ctx = context(&[])?;
            let mut out = Vec::new();
            if km {
                let (Some(types), Some(dr)) = (entity_types, domain_range) else {
                    return Err(Failure::Usage(
                        "--km needs --entity-types and --domain-range".into(),
                    ));
                };
                out.push(ctx.guide_km(method.into(), &types, &dr)?);
            }
            if es {
                out.push(ctx.guide_es(method.into())?);
            }
            Ok(out)
        }
        Command::Eval { method } => one(context(&[])?.eval(method.into())),
        Command::Export { method } => one(context(&[])?.export(method.into())),
        Command::RcRatio { sheet } => one(commands::rc_ratio(&sheet)),
        Command::Synth { out } => {
            let seed = settings(common, &[])?.seed()?;
            one(commands::synth(&out, seed))
        }
        Command::Run {
            kg,
            log,
            entity_types,
            domain_range,
        } => context(&[])?.run(&PipelineInputs {
            kg,
            log,
            metadata: entity_types.zip(domain_range),
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}
