use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use viscoplate::scenario::{
    parse_axis, parse_scenario, pool_size, preset, run_scenario, sweep, RunOptions, Scenario, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "viscoplate", version, about = "Viscoelastic plate simulator and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a TOML file or `preset:NAME`).
    Run {
        config: String,
        /// Run N step sizes dt, dt/2, ... and report the convergence slope.
        #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(2..))]
        refine: Option<u16>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Steps between timeseries rows.
        #[arg(long, value_name = "K")]
        stride: Option<usize>,
        /// Also write the Gram matrices.
        #[arg(long)]
        dump_grams: bool,
    },
    /// Run the Cartesian product of one or more axes.
    Sweep {
        config: String,
        /// `key=v1,v2,...`; repeat for more axes.
        #[arg(long, required = true)]
        axis: Vec<String>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "K")]
        stride: Option<usize>,
    },
    /// Print a built-in scenario as TOML, or list them.
    Preset { name: Option<String> },
}

fn load(config: &str, out: Option<PathBuf>, stride: Option<usize>) -> viscoplate::Result<Scenario> {
    let mut s = match config.strip_prefix("preset:") {
        Some(name) => preset(name).ok_or_else(|| viscoplate::Error::Config {
            key: Some("preset".into()),
            message: format!("no preset named `{name}`"),
        })?,
        None => parse_scenario(config.as_ref())?,
    };
    if let Some(dir) = out {
        s.output.dir = dir;
    }
    if let Some(k) = stride {
        s.diagnostics.stride = k;
    }
    s.validate()?;
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            refine,
            out,
            stride,
            dump_grams,
        } => match load(&config, out, stride) {
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
            Ok(s) => {
                let opts = RunOptions {
                    refine: refine.map_or(0, usize::from),
                    dump_grams,
                    write: true,
                };
                let outcome = run_scenario(&s, &opts);
                for (name, check) in outcome.report.checks() {
                    println!("{name:<14} {:<5} {}", check.verdict.to_string(), check.detail);
                }
                if let Some(e) = &outcome.report.error {
                    eprintln!("error: {e}");
                }
                println!("artifacts in {}", s.output.dir.display());
                outcome.exit_code
            }
        },
        Command::Sweep {
            config,
            axis,
            out,
            stride,
        } => {
            let setup = load(&config, None, stride).and_then(|s| {
                let axes = axis
                    .iter()
                    .map(|a| parse_axis(a))
                    .collect::<viscoplate::Result<Vec<_>>>()?;
                Ok((s, axes, pool_size()?))
            });
            match setup {
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
                Ok((s, axes, threads)) => {
                    let out = out.unwrap_or_else(|| s.output.dir.clone());
                    let opts = RunOptions {
                        write: true,
                        ..Default::default()
                    };
                    match sweep(&s, &axes, &out, threads, &opts) {
                        Err(e) => {
                            eprintln!("error: {e}");
                            2
                        }
                        Ok(o) => {
                            for c in &o.cells {
                                let vals: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
                                println!("cell {:03} exit {} {}", c.index, c.exit_code, vals.join(" "));
                            }
                            println!("summary in {}", out.join("summary.csv").display());
                            o.exit_code
                        }
                    }
                }
            }
        }
        Command::Preset { name: None } => {
            for n in PRESET_NAMES {
                println!("{n}");
            }
            0
        }
        Command::Preset { name: Some(n) } => match preset(&n).map(|s| s.effective_config()) {
            Some(Ok(text)) => {
                print!("{text}");
                0
            }
            Some(Err(e)) => {
                eprintln!("error: {e}");
                2
            }
            None => {
                eprintln!("error: no preset named `{n}`; try `viscoplate preset`");
                2
            }
        },
    };
    ExitCode::from(code as u8)
}
