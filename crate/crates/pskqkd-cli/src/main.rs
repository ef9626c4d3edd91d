use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pskqkd::analytic::{find_optimal_alpha, lossonly_rate};
use pskqkd::channel::{ChannelParams, DEFAULT_LOSS_EXPONENT};
use pskqkd_cli::ber::emit_ber_grid;
use pskqkd_cli::report::{write_summary, DEFAULT_GROUP_BY};
use pskqkd_cli::{fmt_g, load_config, read_rows, report_best, run_sweep, run_sweep_to_files, write_rows, CliError};

#[derive(Parser)]
#[command(name = "pskqkd", version, about = "Key-rate bounds for PSK CV-QKD with postselection")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a single grid point and print its CSV row.
    Rate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every point of the configured grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// CSV output; defaults to output.csv from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Write the bit-error-rate map of the QPSK constellation.
    Ber {
        #[arg(long)]
        amplitude: f64,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Loss-only reference rate, optionally optimized over the amplitude.
    Analytic {
        #[arg(long, default_value_t = 4)]
        n_states: usize,
        #[arg(long = "distance", value_name = "KM", num_args = 1..)]
        distances: Vec<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.95)]
        beta: f64,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
    },
    /// Best rate and break-even p_pass per group of a result CSV.
    Summarize {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated column names.
        #[arg(long, value_delimiter = ',')]
        group_by: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.cmd {
        Cmd::Rate {
            config,
            overrides,
            out,
        } => {
            let cfg = load_config(&config, &overrides)?;
            if cfg.grid_len()? != 1 {
                return Err(CliError::Config(format!(
                    "rate needs a single grid point, the config has {}",
                    cfg.grid_len()?
                )));
            }
            let outcome = run_sweep(&cfg, &[], |_, _| {})?;
            match out {
                Some(p) => {
                    let f = std::fs::File::create(&p).map_err(|source| CliError::Io { path: p.clone(), source })?;
                    write_rows(f, &outcome.rows)?;
                }
                None => write_rows(std::io::stdout().lock(), &outcome.rows)?,
            }
            Ok(outcome.all_optimal())
        }
        Cmd::Sweep {
            config,
            mut overrides,
            out,
            workers,
        } => {
            if let Some(w) = workers {
                overrides.push(format!("workers={w}"));
            }
            let cfg = load_config(&config, &overrides)?;
            let csv = out
                .or_else(|| cfg.output.csv.clone())
                .ok_or_else(|| CliError::Config("no output path: pass --out or set output.csv".into()))?;
            let outcome = run_sweep_to_files(&cfg, &csv, cfg.output.jsonl.as_deref())?;
            eprintln!(
                "{} points: {} computed, {} resumed; wrote {}",
                outcome.rows.len(),
                outcome.computed,
                outcome.skipped,
                csv.display()
            );
            Ok(outcome.all_optimal())
        }
        Cmd::Ber {
            amplitude,
            resolution,
            out,
        } => {
            emit_ber_grid(amplitude, resolution, &out)?;
            Ok(true)
        }
        Cmd::Analytic {
            n_states,
            distances,
            alpha,
            beta,
            step,
        } => {
            println!("n_states,L_km,eta,alpha,beta,mutual_information,holevo,rate");
            for l in distances {
                let eta = ChannelParams {
                    distance_km: l,
                    loss_exponent: DEFAULT_LOSS_EXPONENT,
                    excess_noise: 0.0,
                }
                .eta();
                let a = match alpha {
                    Some(a) => a,
                    None => find_optimal_alpha(n_states, eta, beta, step)?.0,
                };
                let r = lossonly_rate(n_states, a, eta, beta)?;
                println!(
                    "{n_states},{},{},{},{},{},{},{}",
                    fmt_g(l),
                    fmt_g(eta),
                    fmt_g(a),
                    fmt_g(beta),
                    fmt_g(r.mutual_information),
                    fmt_g(r.holevo),
                    fmt_g(r.rate)
                );
            }
            Ok(true)
        }
        Cmd::Summarize {
            input,
            group_by,
            out,
        } => {
            let rows = read_rows(&input)?;
            let keys: Vec<&str> = if group_by.is_empty() {
                DEFAULT_GROUP_BY.to_vec()
            } else {
                group_by.iter().map(String::as_str).collect()
            };
            let summary = report_best(&rows, &keys)?;
            match out {
                Some(p) => {
                    let f = std::fs::File::create(&p).map_err(|source| CliError::Io { path: p.clone(), source })?;
                    write_summary(f, &summary)?;
                }
                None => write_summary(std::io::stdout().lock(), &summary)?,
            }
            Ok(summary.iter().all(|s| s.status == "ok"))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
