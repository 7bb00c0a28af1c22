use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zeno_soliton::exec::with_threads;
use zeno_soliton::experiments::{
    figure_preset, figure_preset_full, run_scenario_with, run_sweep_with, Preset, ScenarioConfig, SweepSpec,
    FIGURE_NAMES,
};
use zeno_soliton::io::{read_config, write_outputs, ConfigFile, OutputBundle};
use zeno_soliton::{Error, Exec, StopReason};

#[derive(Parser)]
#[command(
    name = "zeno",
    version,
    about = "Bright-soliton reflection by a dissipative electron beam"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario from a TOML config.
    Run { config: PathBuf },
    /// Run a parameter sweep from a TOML config with a [sweep] table.
    Sweep { config: PathBuf },
    /// Run a built-in figure preset and write its dataset.
    Figure {
        name: String,
        /// Full-resolution contour grids for fig2d-f.
        #[arg(long)]
        full: bool,
    },
    /// List the built-in figure presets.
    ListFigures,
}

#[derive(Args)]
struct Opts {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the time step.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Override the number of grid points.
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Steps between density snapshots (0 disables).
    #[arg(long = "snapshot-stride", global = true)]
    snapshot_stride: Option<usize>,
    /// Suppress the result summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_NOT_QUIESCENT: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::BlowUp { .. } => EXIT_BLOW_UP,
        Error::NotQuiescent { .. } => EXIT_NOT_QUIESCENT,
        Error::Io { .. } => EXIT_FAILURE,
        _ => EXIT_CONFIG,
    }
}

impl Opts {
    fn apply(&self, c: &mut ScenarioConfig) {
        if let Some(dt) = self.dt {
            c.time.dt = dt;
        }
        if let Some(n) = self.grid_n {
            c.grid.n = n;
        }
        if let Some(s) = self.snapshot_stride {
            c.observe.snapshot_stride = s;
        }
    }

    fn exec(&self) -> Exec {
        match self.threads {
            Some(k) if k <= 1 => Exec::Sequential,
            _ => Exec::default(),
        }
    }
}

fn slug(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    s.truncate(60);
    s.trim_matches('_').to_string()
}

/// Runs one scenario and writes its bundle. A run that hit `t_max` without
/// settling is still written, then reported as an error.
fn run_one(config: &ScenarioConfig, dir: &Path, opts: &Opts) -> Result<(), Error> {
    config.validate()?;
    let summary = with_threads(opts.threads, || run_scenario_with(config, opts.exec()))?;
    write_outputs(
        &OutputBundle::Run {
            config,
            summary: &summary,
        },
        dir,
    )?;
    if !opts.quiet {
        println!(
            "{}: P_refl = {:.6}  surviving = {:.6}  t_final = {:.2} ({:?})",
            summary.label,
            summary.p_refl,
            summary.final_surviving(),
            summary.t_final_used,
            summary.stop
        );
        if let Some(v) = summary.fitted_out_velocity {
            println!("  outgoing COM velocity = {v:.6}");
        }
        println!("  wrote {}", dir.display());
    }
    if summary.stop == StopReason::TimeLimit {
        return Err(Error::NotQuiescent {
            t_max: config.time.stop.horizon(),
        });
    }
    Ok(())
}

fn sweep_one(spec: &SweepSpec, dir: &Path, opts: &Opts) -> Result<(), Error> {
    spec.base.validate()?;
    let table = run_sweep_with(spec, opts.exec(), opts.threads)?;
    write_outputs(&OutputBundle::Sweep { spec, table: &table }, dir)?;
    if !opts.quiet {
        println!("{}: {} cells", table.label, table.cells.len());
        for cell in &table.cells {
            match &cell.outcome {
                Ok(r) => println!("  {:?} -> P_refl = {:.6}", cell.values, r.p_refl),
                Err(e) => println!("  {:?} -> failed: {e}", cell.values),
            }
        }
        println!("  wrote {}", dir.display());
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    let opts = &cli.opts;
    match &cli.command {
        Command::ListFigures => {
            for name in FIGURE_NAMES {
                println!("{name}");
            }
            Ok(())
        }
        Command::Run { config } => {
            let mut c = match read_config(config)? {
                ConfigFile::Scenario(c) => c,
                ConfigFile::Sweep(_) => {
                    return Err(Error::Parse(format!(
                        "{} is a sweep config; use `sweep`",
                        config.display()
                    )))
                }
            };
            opts.apply(&mut c);
            run_one(&c, &opts.out, opts)
        }
        Command::Sweep { config } => {
            let mut s = match read_config(config)? {
                ConfigFile::Sweep(s) => s,
                ConfigFile::Scenario(_) => {
                    return Err(Error::Parse(format!("{} has no [sweep] table", config.display())))
                }
            };
            opts.apply(&mut s.base);
            sweep_one(&s, &opts.out, opts)
        }
        Command::Figure { name, full } => {
            let presets = if *full {
                figure_preset_full(name)?
            } else {
                figure_preset(name)?
            };
            let root = opts.out.join(name);
            let mut first_err = None;
            for (i, preset) in presets.into_iter().enumerate() {
                let result = match preset {
                    Preset::Scenario(mut c) => {
                        opts.apply(&mut c);
                        let dir = root.join(format!("{i}_{}", slug(&c.label)));
                        run_one(&c, &dir, opts)
                    }
                    Preset::Sweep(mut s) => {
                        opts.apply(&mut s.base);
                        let dir = root.join(format!("{i}_{}", slug(&s.base.label)));
                        sweep_one(&s, &dir, opts)
                    }
                };
                if let Err(e) = result {
                    log::error!("{e}");
                    first_err.get_or_insert(e);
                }
            }
            first_err.map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
