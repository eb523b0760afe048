//! Batch driver: runs one named task from a config (plus flag overrides),
//! writes a JSON result envelope and CSV tables, exits 0/1/2.

mod config;
mod tasks;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ahlab::{Error, Result};
use config::{emit_plot_data, input_hash, ResultEnvelope, RunConfig};

#[derive(Parser)]
#[command(name = "ahlab", version, about = "Radial spectral geometry toolkit")]
struct Cli {
    /// JSON run configuration; flags override individual fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the envelope and CSV tables.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    /// Metric file (JSON).
    #[arg(long)]
    metric: Option<PathBuf>,
    /// Truncation radii or parameter schedule (increasing).
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    schedule: Option<Vec<f64>>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Indicial roots of s(n-s) + kappa = 0 and admissibility.
    Indicial {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        kappa: Option<f64>,
        /// Optional exponent to test for admissibility.
        #[arg(long, allow_negative_numbers = true)]
        s: Option<f64>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Bottom of the spectrum for quotient models, d(n-d) above n/2.
    Sullivan {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<f64>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Bottom-of-spectrum estimate with eigenvalue scan.
    Lambda0 {
        #[command(flatten)]
        common: Overrides,
    },
    /// Growth eigenfunction, boundary limits, subharmonicity identity.
    Eigenfunction {
        #[command(flatten)]
        common: Overrides,
    },
    /// Spectral lower-bound certificate from the growth eigenfunction.
    Certify {
        #[arg(long)]
        s: Option<f64>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Shoot one biaxial Einstein profile from the pole.
    EinsteinShoot {
        /// Pole asymmetry (0 = hyperbolic space).
        #[arg(long, allow_negative_numbers = true)]
        param: Option<f64>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Survey the Einstein family over a parameter schedule.
    Sweep {
        #[command(flatten)]
        common: Overrides,
    },
    /// Hölder continuity of the linearized flow of a vector field.
    FlowCheck {
        /// Vector field file (JSON, expression components).
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Flow time.
        #[arg(long)]
        t: Option<f64>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Extract one CSV series from a stored envelope.
    PlotData {
        #[arg(long)]
        envelope: PathBuf,
        #[arg(long)]
        quantity: String,
    },
}

impl Command {
    fn task_name(&self) -> &'static str {
        match self {
            Command::Indicial { .. } => "indicial",
            Command::Sullivan { .. } => "sullivan",
            Command::Lambda0 { .. } => "lambda0",
            Command::Eigenfunction { .. } => "eigenfunction",
            Command::Certify { .. } => "certify",
            Command::EinsteinShoot { .. } => "einstein-shoot",
            Command::Sweep { .. } => "sweep",
            Command::FlowCheck { .. } => "flow-check",
            Command::PlotData { .. } => "plot-data",
        }
    }

    fn apply(&self, cfg: &mut RunConfig) {
        let common = match self {
            Command::Indicial { n, kappa, s, common } => {
                if n.is_some() {
                    cfg.n = *n;
                }
                if kappa.is_some() {
                    cfg.kappa = *kappa;
                }
                if s.is_some() {
                    cfg.s = *s;
                }
                common
            }
            Command::Sullivan { n, d, common } => {
                if n.is_some() {
                    cfg.n = *n;
                }
                if d.is_some() {
                    cfg.d = *d;
                }
                common
            }
            Command::Lambda0 { common } | Command::Eigenfunction { common } => common,
            Command::Certify { s, common } => {
                if s.is_some() {
                    cfg.s = *s;
                }
                common
            }
            Command::EinsteinShoot { param, common } => {
                if param.is_some() {
                    cfg.parameter = *param;
                }
                common
            }
            Command::Sweep { common } => common,
            Command::FlowCheck {
                field,
                alpha,
                t,
                common,
            } => {
                if field.is_some() {
                    cfg.field = field.clone();
                }
                if alpha.is_some() {
                    cfg.alpha = *alpha;
                }
                if t.is_some() {
                    cfg.time = *t;
                }
                common
            }
            Command::PlotData { .. } => return,
        };
        if common.metric.is_some() {
            cfg.metric = common.metric.clone();
        }
        if common.schedule.is_some() {
            cfg.schedule = common.schedule.clone();
        }
        if let Some(v) = common.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = common.points {
            cfg.points = v;
        }
        if let Some(v) = common.tol {
            cfg.tol = v;
        }
        if let Some(v) = common.seed {
            cfg.seed = v;
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("AHSPEC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Command::PlotData { envelope, quantity } = &cli.command {
        let text = fs::read_to_string(envelope)
            .map_err(|e| Error::invalid(format!("{}: {e}", envelope.display())))?;
        let env: ResultEnvelope = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("envelope {}: {e}", envelope.display())))?;
        print!("{}", emit_plot_data(&env, quantity)?);
        return Ok(());
    }

    let mut cfg = match &cli.config {
        Some(path) => {
            let loaded = RunConfig::from_file(path)?;
            if loaded.task != cli.command.task_name() {
                return Err(Error::invalid(format!(
                    "config names task `{}` but the subcommand is `{}`",
                    loaded.task,
                    cli.command.task_name()
                )));
            }
            loaded
        }
        None => RunConfig::new(cli.command.task_name()),
    };
    cli.command.apply(&mut cfg);
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    cfg.validate()?;

    let hash = input_hash(&cfg.input_paths())?;
    let task = tasks::find(&cfg.task)?;
    let started = Instant::now();
    let out = task.run(&cfg)?;
    let wall = started.elapsed().as_millis();

    let envelope = ResultEnvelope {
        task: cfg.task.clone(),
        input_hash: hash,
        output: out.json,
        tables: out.tables,
        warnings: out.warnings,
        wall_clock_ms: wall,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
    };

    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::invalid(format!("{}: {e}", cfg.out_dir.display())))?;
    let env_path = cfg.out_dir.join(format!("{}-envelope.json", cfg.task));
    let env_text = serde_json::to_string_pretty(&envelope).expect("envelope serializes");
    fs::write(&env_path, env_text.clone() + "\n")
        .map_err(|e| Error::invalid(format!("{}: {e}", env_path.display())))?;
    for (name, table) in &envelope.tables {
        let path = cfg.out_dir.join(format!("{}-{name}.csv", cfg.task));
        fs::write(&path, table)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    }
    println!("{env_text}");
    Ok(())
}

fn main() -> ExitCode {
    init_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not errors; malformed invocations are input
            // errors (exit 1).
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::InvalidInput(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(1)
        }
        Err(Error::Diagnostic(msg)) => {
            eprintln!("numeric diagnostic: {msg}");
            ExitCode::from(2)
        }
    }
}
