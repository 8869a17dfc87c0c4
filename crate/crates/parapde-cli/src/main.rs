//! `parapde`: seeded, replayable experiments for the singular-SPDE toolkit.
//!
//! Exit codes: 0 on success, 1 on usage/configuration errors, 2 when an
//! experiment's tolerance gate fails (a diff table goes to stderr).

use clap::{Args, Parser, Subcommand};
use parapde::config::{ExperimentConfig, ReportFormat};
use parapde::experiments::run_experiment;
use parapde::renorm::constants_table;
use parapde::wick::enumerate_trees;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "parapde", version, about = "Pseudospectral experiments for singular stochastic PDEs on the torus")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// Flat key = value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; every replica derives its stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte-Carlo replica count.
    #[arg(long, global = true)]
    replicas: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format: csv or json.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Include wall-clock time in the JSON metadata (breaks byte-for-byte
    /// reproducibility of the report, hence opt-in).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Partition-of-unity and Bony decomposition checks.
    PartitionCheck {
        /// Also export the multiplier table as CSV rows (j, k_index, value).
        #[arg(long)]
        multipliers_out: Option<PathBuf>,
        /// Grid size for the exported multipliers.
        #[arg(long, default_value_t = 64)]
        m: usize,
    },
    /// Space white-noise moment checks (or raw dumps with --dump).
    Noise {
        #[arg(long, default_value_t = 32)]
        m: usize,
        /// Per-mode variance convention: half or unit.
        #[arg(long, default_value = "half")]
        normalization: String,
        /// Emit raw (replica, k, re, im) rows instead of moments.
        #[arg(long)]
        dump: bool,
    },
    /// Ornstein-Uhlenbeck transition moments against the closed form.
    Ou {
        #[arg(long, default_value_t = 64)]
        m: usize,
    },
    /// Galerkin stochastic-Burgers experiments.
    Burgers {
        #[arg(long, default_value_t = 16)]
        n_modes: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value_t = true)]
        stationary_init: bool,
        /// One of: energy, mode-moments, drift-moments, modes.
        #[arg(long, default_value = "mode-moments")]
        observable: String,
    },
    /// Parabolic Anderson model solvers and diagnostics.
    Pam {
        /// Mollification levels, colon-separated (first one is used by the
        /// single-method runs).
        #[arg(long, default_value = "8", alias = "n-level")]
        n_levels: String,
        #[arg(long, default_value_t = 0.75)]
        gamma: f64,
        /// Nonlinearity: linear, zero, or sine:<amplitude>.
        #[arg(long, default_value = "linear", alias = "F")]
        f: String,
        #[arg(long, default_value_t = 0.25)]
        t_final: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// on or off.
        #[arg(long, default_value = "on")]
        renormalize: String,
        /// direct, transform, paracontrolled, cross, necessity, or
        /// counterterm-mc.
        #[arg(long, default_value = "direct")]
        method: String,
        #[arg(long, default_value_t = 64)]
        m: usize,
    },
    /// Stochastic Burgers: paracontrolled vs Galerkin and tree expansions.
    Sbe {
        #[arg(long, default_value_t = 0.4)]
        gamma: f64,
        #[arg(long, default_value_t = 8)]
        n_level: usize,
        #[arg(long, default_value_t = 0.25)]
        t_final: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// galerkin, paracontrolled, tree:<order>, or cross.
        #[arg(long, default_value = "paracontrolled")]
        method: String,
        #[arg(long, default_value_t = 128)]
        m: usize,
    },
    /// Renormalization constants against fixtures and certified tails.
    Renorm,
    /// Wick algebra and binary-tree tables.
    Wick {
        /// Export the tree table (shape, degree, count) as JSON.
        #[arg(long)]
        trees_out: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        max_degree: usize,
    },
    /// Manage the committed oracle fixtures.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Subcommand)]
enum OracleAction {
    /// Regenerate fixtures/renorm_constants.json from the summation oracle.
    Regen {
        #[arg(long, default_value = "fixtures/renorm_constants.json")]
        fixtures: PathBuf,
    },
    /// Verify the committed fixtures match a fresh evaluation exactly.
    Check {
        #[arg(long, default_value = "fixtures/renorm_constants.json")]
        fixtures: PathBuf,
    },
}

fn build_config(global: &GlobalArgs, experiment: &str) -> Result<ExperimentConfig, parapde::Error> {
    let mut config = match &global.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::new(experiment),
    };
    // The subcommand decides the experiment unless the file set one and no
    // subcommand-specific override applies.
    config.experiment = experiment.to_string();
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(replicas) = global.replicas {
        config.replicas = replicas;
    }
    if let Some(out) = &global.out {
        config.out = Some(out.display().to_string());
    }
    if let Some(format) = &global.format {
        config.format = ReportFormat::parse(format)?;
    }
    Ok(config)
}

fn emit(
    config: &ExperimentConfig,
    outcome: &parapde::experiments::ExperimentOutcome,
    timing: Option<u64>,
) -> Result<(), parapde::Error> {
    let mut report = outcome.report.clone();
    report.metadata.wall_ms = timing;
    let text = report.emit(config.format);
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, parapde::Error> {
    let global = cli.global;
    let (experiment, extra): (String, Vec<(String, String)>) = match &cli.command {
        Command::PartitionCheck { multipliers_out, m } => {
            if let Some(path) = multipliers_out {
                let grid = parapde::spectral::TorusGrid::new(1, *m)?;
                let part = parapde::besov::DyadicPartition::new(grid)?;
                std::fs::write(path, part.multipliers_csv())?;
            }
            ("partition-check".into(), vec![])
        }
        Command::Noise {
            m,
            normalization,
            dump,
        } => (
            if *dump { "noise-dump" } else { "noise-moments" }.into(),
            vec![
                ("m".into(), m.to_string()),
                ("normalization".into(), normalization.clone()),
            ],
        ),
        Command::Ou { m } => ("ou-moments".into(), vec![("m".into(), m.to_string())]),
        Command::Burgers {
            n_modes,
            dt,
            t_final,
            stationary_init,
            observable,
        } => {
            let experiment = match observable.as_str() {
                "energy" => "burgers-energy",
                "mode-moments" => "burgers-invariance",
                "drift-moments" => "burgers-drift-moments",
                "modes" => "burgers-modes",
                other => {
                    return Err(parapde::Error::Config(format!(
                        "unknown observable '{other}'"
                    )))
                }
            };
            (
                experiment.into(),
                vec![
                    ("n-modes".into(), n_modes.to_string()),
                    ("dt".into(), dt.to_string()),
                    ("t-final".into(), t_final.to_string()),
                    ("stationary-init".into(), stationary_init.to_string()),
                ],
            )
        }
        Command::Pam {
            n_levels,
            gamma,
            f,
            t_final,
            dt,
            renormalize,
            method,
            m,
        } => {
            let first_level = n_levels
                .split(':')
                .next()
                .unwrap_or("8")
                .trim()
                .to_string();
            let experiment = match method.as_str() {
                "direct" | "transform" | "paracontrolled" => "pam-run",
                "cross" => "pam-cross-method",
                "necessity" => "pam-renorm-necessity",
                "counterterm-mc" => "pam-counterterm-mc",
                other => {
                    return Err(parapde::Error::Config(format!("unknown pam method '{other}'")))
                }
            };
            (
                experiment.into(),
                vec![
                    ("n-level".into(), first_level),
                    ("gamma".into(), gamma.to_string()),
                    ("f".into(), f.clone()),
                    ("t-final".into(), t_final.to_string()),
                    ("dt".into(), dt.to_string()),
                    ("renormalize".into(), renormalize.clone()),
                    ("method".into(), method.clone()),
                    ("m".into(), m.to_string()),
                ],
            )
        }
        Command::Sbe {
            gamma,
            n_level,
            t_final,
            dt,
            method,
            m,
        } => {
            let experiment = if method == "cross" {
                "sbe-cross-method"
            } else {
                "sbe-run"
            };
            (
                experiment.into(),
                vec![
                    ("gamma".into(), gamma.to_string()),
                    ("n-level".into(), n_level.to_string()),
                    ("t-final".into(), t_final.to_string()),
                    ("dt".into(), dt.to_string()),
                    ("method".into(), method.clone()),
                    ("m".into(), m.to_string()),
                ],
            )
        }
        Command::Renorm => ("renorm-constants".into(), vec![]),
        Command::Wick {
            trees_out,
            max_degree,
        } => {
            if let Some(path) = trees_out {
                let classes = enumerate_trees(*max_degree)?;
                std::fs::write(path, serde_json::to_string_pretty(&classes)?)?;
            }
            ("wick-tables".into(), vec![])
        }
        Command::Oracle { action } => {
            return match action {
                OracleAction::Regen { fixtures } => {
                    let table = constants_table()?;
                    if let Some(parent) = fixtures.parent() {
                        if !parent.as_os_str().is_empty() {
                            std::fs::create_dir_all(parent)?;
                        }
                    }
                    std::fs::write(fixtures, serde_json::to_string_pretty(&table)?)?;
                    eprintln!("wrote {} constants to {}", table.len(), fixtures.display());
                    Ok(true)
                }
                OracleAction::Check { fixtures } => {
                    let fresh = constants_table()?;
                    let committed: Vec<parapde::renorm::ConstantRow> =
                        serde_json::from_str(&std::fs::read_to_string(fixtures)?)?;
                    let mut ok = true;
                    if fresh.len() != committed.len() {
                        eprintln!(
                            "fixture count mismatch: committed {}, fresh {}",
                            committed.len(),
                            fresh.len()
                        );
                        ok = false;
                    }
                    for (a, b) in committed.iter().zip(&fresh) {
                        if a != b {
                            eprintln!(
                                "fixture drift: {} [{}] committed {} vs fresh {}",
                                a.name, a.params, a.value, b.value
                            );
                            ok = false;
                        }
                    }
                    if ok {
                        eprintln!("fixtures match ({} constants)", fresh.len());
                    }
                    Ok(ok)
                }
            };
        }
    };

    let mut config = build_config(&global, &experiment)?;
    for (k, v) in extra {
        config.set(&k, v);
    }
    let start = Instant::now();
    let outcome = run_experiment(&config)?;
    let timing = global
        .timing
        .then(|| start.elapsed().as_millis() as u64);
    emit(&config, &outcome, timing)?;
    if !outcome.passed() {
        eprintln!("tolerance failures:");
        for f in &outcome.failures {
            eprintln!("  {f}");
        }
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help/version requests exit cleanly; anything else is usage.
            if err.use_stderr() {
                eprint!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
