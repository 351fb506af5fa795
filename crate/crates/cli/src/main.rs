mod config;
mod error;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{PipelineConfig, RawConfig};
use error::CliError;
use stages::EntitySet;

/// Entity-saliency analysis of multilingual image captions.
#[derive(Debug, Parser)]
#[command(name = "saliency", version)]
struct Cli {
    /// Pipeline config file.
    #[arg(short, long, global = true, default_value = "pipeline.conf")]
    config: PathBuf,

    /// Override a config value, `KEY=VALUE`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Permutation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Mantel permutations.
    #[arg(long, global = true)]
    permutations: Option<usize>,

    /// Artifact directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// `fallback` or the scoring service URL.
    #[arg(long, global = true)]
    scorer: Option<String>,

    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse WordNet and apply the edit script.
    BuildOntology,
    /// Count instantiations and choose the synset inventory.
    SelectInventory,
    /// Map caption noun phrases to inventory synsets.
    Extract,
    /// Drop synsets whose root is absent from the image.
    Filter,
    /// Score filtered synsets against the gold annotations.
    Validate,
    /// Saliency analyses over the filtered synsets.
    #[command(subcommand)]
    Analyze(Analysis),
    /// Verify all manifests and summarise the results.
    Report,
}

#[derive(Debug, Subcommand)]
enum Analysis {
    /// Saliency tensor, language distances, global saliency and spread.
    Saliency,
    /// Mantel tests against each typology matrix.
    Mantel,
    /// Per-entity comparison of two languages.
    Compare {
        l: String,
        k: String,
        /// `roots`, `all` or `under:<synset>`.
        #[arg(long, default_value = "roots")]
        entities: EntitySet,
    },
    /// Depth distribution of mentioned synsets.
    Granularity,
    /// Entity counts per language and locale.
    Counts,
}

fn load(cli: &Cli) -> Result<(PipelineConfig, Option<usize>), CliError> {
    let mut raw = RawConfig::read(&cli.config)?;
    for o in &cli.overrides {
        raw.set(o);
    }
    if let Some(s) = cli.seed {
        raw.set(&format!("seed={s}"));
    }
    if let Some(p) = cli.permutations {
        raw.set(&format!("permutations={p}"));
    }
    if let Some(d) = &cli.output_dir {
        raw.set(&format!("output_dir={}", d.display()));
    }
    if let Some(s) = &cli.scorer {
        raw.set(&format!("scorer={s}"));
    }
    if let Some(j) = cli.jobs {
        raw.set(&format!("jobs={j}"));
    }
    let jobs = raw.jobs();
    Ok((raw.resolve()?, jobs))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (config, jobs) = load(cli)?;
    if let Some(n) = jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match &cli.command {
        Command::BuildOntology => stages::build_ontology(&config),
        Command::SelectInventory => stages::select(&config),
        Command::Extract => stages::extract(&config),
        Command::Filter => stages::filter_stage(&config),
        Command::Validate => stages::validate_stage(&config),
        Command::Analyze(a) => match a {
            Analysis::Saliency => stages::analyze_saliency(&config),
            Analysis::Mantel => stages::analyze_mantel(&config),
            Analysis::Compare { l, k, entities } => stages::analyze_compare(&config, l, k, entities),
            Analysis::Granularity => stages::analyze_granularity(&config),
            Analysis::Counts => stages::analyze_counts(&config),
        },
        Command::Report => stages::report(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
