use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use haemoscreen::commands::{self, parse_combos, Outcome};
use haemoscreen::disease::DiseaseKind;
use haemoscreen::learners::Method;
use haemoscreen::persistence::{ImportDescriptor, RunConfig};
use haemoscreen::sites::Measurement;
use haemoscreen::{Error, Result};

/// Virtual-patient generation and waveform-based disease screening.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory holding cohorts and reports; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the healthy cohort and its diseased twins.
    Generate {
        #[arg(long, value_delimiter = ',')]
        disease: Vec<DiseaseKind>,
    },
    /// Convert an external table into a cohort file.
    ImportVpd {
        input: PathBuf,
        /// JSON column mapping.
        #[arg(long)]
        descriptor: PathBuf,
    },
    /// Write a cohort as a table plus the descriptor that reads it back.
    ExportVpd {
        cohort: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        descriptor: PathBuf,
    },
    /// Grid search of RF, GB or MLP hyperparameters.
    Gridsearch {
        #[arg(long, default_value = "aaa")]
        disease: DiseaseKind,
        #[arg(long, default_value = "GB")]
        methods: Method,
        /// Measurement combination, e.g. q1+p1.
        #[arg(long, default_value = "q1+q2+q3+p1+p2+p3")]
        combos: String,
    },
    /// Combination search over methods and measurement combinations.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        disease: Vec<DiseaseKind>,
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, default_value = "all")]
        combos: Vec<String>,
    },
    /// Measurement-count summary and Q1 histograms of a finished sweep.
    Summarize {
        #[arg(long, default_value = "aaa")]
        disease: DiseaseKind,
        /// Methods pooled in the Q1 histograms.
        #[arg(long, default_value = "all")]
        methods: String,
    },
    /// F1 ratio of the low-severity aneurysm sweep to the AAA sweep.
    RatioStudy,
    /// Right-only, left-only and bilateral inputs per measurement.
    Unilateral {
        #[arg(long, default_value = "aaa")]
        disease: DiseaseKind,
        #[arg(long, default_value = "GB")]
        methods: Method,
        #[arg(long, value_delimiter = ',', default_value = "Q1,P3")]
        measurements: Vec<Measurement>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match (&cli.config, cli.seed) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(seed)) => RunConfig::with_seed(seed),
        (None, None) => {
            return Err(Error::InvalidConfig(
                "a seed is required: pass --seed or --config".into(),
            ))
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("--jobs: {e}")))?;
    }
    let out_dir = || cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match &cli.command {
        Command::ImportVpd { input, descriptor } => {
            commands::import_vpd(input, &ImportDescriptor::load(descriptor)?, &out_dir())
        }
        Command::ExportVpd {
            cohort,
            table,
            descriptor,
        } => commands::export_vpd(cohort, table, descriptor),
        Command::RatioStudy => commands::ratio_study(&load_config(cli)?.output_dir),
        command => {
            let config = load_config(cli)?;
            let dir = &config.output_dir;
            match command {
                Command::Generate { disease } => commands::generate(&config, dir, disease),
                Command::Gridsearch {
                    disease,
                    methods,
                    combos,
                } => {
                    let (outcome, best) =
                        commands::gridsearch(&config, dir, *disease, *methods, &combos.parse()?)?;
                    println!(
                        "best: {}  F1 {:.4}",
                        best.hyperparams.summary(),
                        best.mean_f1
                    );
                    Ok(outcome)
                }
                Command::Sweep {
                    disease,
                    methods,
                    combos,
                } => commands::sweep(
                    &config,
                    dir,
                    disease,
                    &Method::parse_list(methods)?,
                    &parse_combos(combos)?,
                ),
                Command::Summarize { disease, methods } => {
                    commands::summarize(&config, dir, *disease, &Method::parse_list(methods)?)
                }
                Command::Unilateral {
                    disease,
                    methods,
                    measurements,
                } => commands::unilateral(&config, dir, *disease, *methods, measurements),
                Command::ImportVpd { .. } | Command::ExportVpd { .. } | Command::RatioStudy => {
                    unreachable!("handled above")
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.skipped {
                println!("up to date");
            }
            if outcome.flagged {
                eprintln!("some cells failed; see the per-fold tables");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::ImportRows(rows) = &e {
                for r in rows {
                    eprintln!("  {r}");
                }
            }
            ExitCode::from(1)
        }
    }
}
