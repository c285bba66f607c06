use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use emnist_core::bench::{
    cmd_bench, cmd_build, cmd_convert, cmd_fetch, cmd_verify, configure_workers, CommandError, RunConfig,
    EXIT_FAILURE,
};
use emnist_core::verify::write_report;
use emnist_core::Error;

/// Build EMNIST-style datasets from NIST SD19 glyphs and benchmark them
/// with online pseudo-inverse classifiers.
#[derive(Debug, Parser)]
#[command(name = "emnist-forge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key = value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Dataset names, comma or space separated.
    #[arg(long, global = true, num_args = 1.., value_delimiter = ',')]
    datasets: Vec<String>,

    /// Hidden layer sizes; 0 is the linear classifier.
    #[arg(long, global = true, num_args = 1.., value_delimiter = ',')]
    hidden: Vec<usize>,

    #[arg(long, global = true)]
    trials: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Transpose images on read (needed for the published EMNIST files).
    #[arg(long, global = true)]
    transpose: bool,

    /// Write the conversion stages of the first glyphs as PNGs here.
    #[arg(long, global = true)]
    dump_stages: Option<PathBuf>,

    #[arg(long, global = true)]
    corpus: Option<PathBuf>,

    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true)]
    layout: Option<PathBuf>,

    #[arg(long, global = true)]
    data_root: Option<PathBuf>,

    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    settings: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert the source corpus into the 28x28 glyph store.
    Convert,
    /// Build IDX datasets from the glyph store.
    Build,
    /// Train and evaluate classifiers on built or downloaded datasets.
    Bench,
    /// Run the invariant suite.
    Verify,
    /// Download the files listed in `fetch_urls`.
    Fetch,
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.datasets.is_empty() {
            c.set("datasets", &self.datasets.join(","))?;
        }
        if !self.hidden.is_empty() {
            c.hidden_sizes = self.hidden.clone();
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.master_seed = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        if self.transpose {
            c.transpose = true;
        }
        for (slot, value) in [
            (&mut c.dump_stages, &self.dump_stages),
            (&mut c.layout, &self.layout),
            (&mut c.data_root, &self.data_root),
        ] {
            if value.is_some() {
                slot.clone_from(value);
            }
        }
        if let Some(v) = &self.corpus {
            c.corpus_root.clone_from(v);
        }
        if let Some(v) = &self.output {
            c.output_root.clone_from(v);
        }
        for setting in &self.settings {
            let (key, value) = setting
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set {setting:?}: expected KEY=VALUE")))?;
            c.set(key.trim(), value.trim())?;
        }
        Ok(c)
    }
}

fn run(cli: &Cli) -> Result<(), CommandError> {
    let config = cli.run_config()?;
    configure_workers(config.workers);
    match cli.command {
        Command::Convert => {
            let index = cmd_convert(&config)?;
            println!("stored {} glyphs in {} class packs", index.total, index.packs.len());
        }
        Command::Build => {
            for m in cmd_build(&config)? {
                println!(
                    "{}: {} classes, {} train ({} validation), {} test",
                    m.name, m.class_count, m.counts.train, m.counts.validation, m.counts.test
                );
            }
        }
        Command::Bench => {
            let results = cmd_bench(&config)?;
            for a in &results.aggregates {
                println!(
                    "{} {} h={}: {:.2}% ± {:.2} over {} trial(s)",
                    a.dataset,
                    a.classifier,
                    a.hidden,
                    100.0 * a.mean,
                    100.0 * a.stddev,
                    a.trials
                );
            }
        }
        Command::Verify => {
            let report = cmd_verify(&config)?;
            write_report(&report, std::io::stdout()).map_err(Error::from)?;
            if !report.passed() {
                let failed: Vec<String> = report
                    .failures()
                    .map(|c| format!("{}: {}", c.module, c.invariant))
                    .collect();
                return Err(CommandError::new(
                    EXIT_FAILURE,
                    Error::Invalid(format!("{} check(s) failed: {}", failed.len(), failed.join("; "))),
                ));
            }
        }
        Command::Fetch => {
            for path in cmd_fetch(&config)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
