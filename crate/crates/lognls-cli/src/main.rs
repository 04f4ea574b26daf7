//! Experiment runner for the log-NLS control laboratory.
//!
//! `lognls-lab run <config>` executes a scenario described by a flat
//! key-value config file, prints its pass/fail summary and optionally
//! writes CSV (and a gnuplot script). Exit codes: 0 pass, 1 fail,
//! 2 config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lognls::config::{parse_config, ScenarioConfig};
use lognls::scenarios::{describe, list_scenarios, run_scenario, ScenarioOutcome};

#[derive(Parser)]
#[command(
    name = "lognls-lab",
    about = "Simulation and control-synthesis laboratory for the controlled logarithmic NLS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file (or a bare scenario name with defaults).
    Run {
        /// Path to a key-value config file, or a registered scenario name.
        config: String,
        /// Override the random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sweep points (0 = rayon default).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Record wall times in the CSV (breaks byte-identical output).
        #[arg(long)]
        timings: bool,
        /// Also emit a gnuplot script next to the CSV.
        #[arg(long)]
        plot: bool,
    },
    /// List registered scenarios.
    List,
    /// Describe one scenario.
    Describe { scenario: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for s in list_scenarios() {
                println!("{:22} {}", s.name, s.description.split('.').next().unwrap_or(""));
            }
            ExitCode::SUCCESS
        }
        Command::Describe { scenario } => match describe(&scenario) {
            Ok(text) => {
                println!("{scenario}: {text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run { config, seed, out, threads, timings, plot } => match load_config(&config) {
            Err(e) => {
                eprintln!("config error: {e}");
                ExitCode::from(2)
            }
            Ok(mut cfg) => {
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                if let Some(o) = out {
                    cfg.out = Some(o);
                }
                cfg.timings |= timings;
                if threads > 0 {
                    if let Err(e) =
                        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()
                    {
                        eprintln!("thread pool: {e}");
                    }
                }
                match run_scenario(&cfg) {
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::from(2)
                    }
                    Ok(outcome) => {
                        report(&outcome);
                        if plot {
                            if let Some(csv) = &cfg.out {
                                if let Err(e) = write_gnuplot(&outcome, csv) {
                                    eprintln!("plot script: {e}");
                                }
                            }
                        }
                        if outcome.pass {
                            ExitCode::SUCCESS
                        } else {
                            ExitCode::from(1)
                        }
                    }
                }
            }
        },
    }
}

fn load_config(arg: &str) -> lognls::Result<ScenarioConfig> {
    let path = PathBuf::from(arg);
    if path.exists() {
        parse_config(&std::fs::read_to_string(path)?)
    } else if list_scenarios().iter().any(|s| s.name == arg) {
        Ok(ScenarioConfig::new(arg))
    } else {
        Err(lognls::Error::Config(format!(
            "`{arg}` is neither a config file nor a registered scenario"
        )))
    }
}

fn report(outcome: &ScenarioOutcome) {
    let status = if outcome.pass { "PASS" } else { "FAIL" };
    println!("[{status}] {}: {}", outcome.name, outcome.summary);
    if let Some(rate) = &outcome.rate {
        println!(
            "       fitted slope {:.4}, intercept {:.4}, residual {:.2e}",
            rate.slope, rate.intercept, rate.residual
        );
    }
}

fn write_gnuplot(outcome: &ScenarioOutcome, csv: &std::path::Path) -> std::io::Result<()> {
    let script = csv.with_extension("gp");
    let log_scale = outcome.rate.is_some();
    let mut text = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    if log_scale {
        text.push_str("set logscale xy\n");
    }
    text.push_str(&format!(
        "set title '{}'\nplot '{}' using 2:3 with linespoints\n",
        outcome.name,
        csv.display()
    ));
    std::fs::write(script, text)
}
