use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gcs_cli::commands::run;
use gcs_cli::config::{load_config, Command, FSpec, Format, GridConfig, RangeConfig, RunConfig, ScanConfig, TimeConfig};
use gcs_cli::CliError;
use gcs_core::coherent::Definition;
use gcs_core::{Branch, LayerKind};

/// Coherent states of monolayer and bilayer graphene in a constant magnetic field.
#[derive(Debug, Parser)]
#[command(name = "gcs", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Landau-level energies E_0..E_n
    Spectrum {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Probability density on an x-grid
    Density {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Current density components J_x, J_y on an x-grid
    Current {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Mean energy
    Energy {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Position-momentum moments and uncertainty product
    Uncertainty {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fidelity trace and quasiperiods
    Fidelity {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = 25.0)]
        t_max: f64,
        #[arg(long, default_value_t = 2501)]
        samples: usize,
        #[arg(long, default_value_t = gcs_core::dynamics::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Superpotential and partner potentials on an x-grid
    Potentials {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Bilayer factorization energy (default 0)
        #[arg(long)]
        eps1: Option<f64>,
        /// Bilayer factorization energy (default omega)
        #[arg(long)]
        eps2: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Coherent-state coefficients
    Coefficients {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the self-test suite; exit code 2 on failure
    Check {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run one or more configurations from a JSON file
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory for relative output paths (default: current directory)
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct StateArgs {
    #[arg(long, default_value = "monolayer")]
    kind: LayerKind,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// electron or hole
    #[arg(long, default_value = "electron")]
    branch: Branch,
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    /// BG, GP or MU
    #[arg(long, default_value = "BG")]
    definition: Definition,
    /// Two-column weight table `n f(n)`; f = 1 when omitted
    #[arg(long)]
    f_table: Option<PathBuf>,
    /// Extremal state for GP (0 or a root of f)
    #[arg(long, default_value_t = 0)]
    extremal: usize,
    /// Truncation tolerance on the neglected norm
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = GridConfig::default().x_min, allow_negative_numbers = true)]
    x_min: f64,
    #[arg(long, default_value_t = GridConfig::default().x_max, allow_negative_numbers = true)]
    x_max: f64,
    #[arg(long, default_value_t = GridConfig::default().points)]
    points: usize,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Sweep r as MIN:MAX:POINTS
    #[arg(long, value_parser = parse_range)]
    r_scan: Option<RangeConfig>,
    /// Sweep theta as MIN:MAX:POINTS
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    theta_scan: Option<RangeConfig>,
    /// Comma-separated evolution times (density and current)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    times: Vec<f64>,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output file; stdout when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
}

fn parse_range(s: &str) -> Result<RangeConfig, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected MIN:MAX:POINTS, got '{s}'"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}'"));
    let points = parts[2].trim().parse::<usize>().map_err(|_| format!("bad point count '{}'", parts[2]))?;
    Ok(RangeConfig { min: num(parts[0])?, max: num(parts[1])?, points })
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(format!("unknown format '{other}' (expected csv or json)")),
    }
}

impl StateArgs {
    fn apply(self, c: &mut RunConfig) {
        c.kind = self.kind;
        c.omega = self.omega;
        c.k = self.k;
        c.branch = self.branch;
        c.alpha.r = self.r;
        c.alpha.theta = self.theta;
        c.definition = self.definition;
        c.f_spec = self.f_table.map(FSpec::Table).unwrap_or(FSpec::One);
        c.extremal = self.extremal;
        c.tol = self.tol;
    }
}

impl ScanArgs {
    fn apply(self, c: &mut RunConfig) {
        c.scan = ScanConfig { r: self.r_scan, theta: self.theta_scan };
        c.times = self.times;
    }
}

impl OutArgs {
    fn apply(self, c: &mut RunConfig) {
        c.output = self.output;
        c.format = self.format;
    }
}

fn grid(g: GridArgs) -> GridConfig {
    GridConfig { x_min: g.x_min, x_max: g.x_max, points: g.points }
}

fn config_from(cmd: Cmd) -> RunConfig {
    match cmd {
        Cmd::Spectrum { state, n_max, out } => {
            let mut c = RunConfig::new(Command::Spectrum);
            state.apply(&mut c);
            out.apply(&mut c);
            c.n_max = n_max;
            c
        }
        Cmd::Density { state, grid: g, scan, out } => gridded(Command::Density, state, g, scan, out),
        Cmd::Current { state, grid: g, scan, out } => gridded(Command::Current, state, g, scan, out),
        Cmd::Energy { state, scan, out } => {
            let mut c = RunConfig::new(Command::Energy);
            state.apply(&mut c);
            scan.apply(&mut c);
            out.apply(&mut c);
            c
        }
        Cmd::Uncertainty { state, scan, out } => {
            let mut c = RunConfig::new(Command::Uncertainty);
            state.apply(&mut c);
            scan.apply(&mut c);
            out.apply(&mut c);
            c
        }
        Cmd::Fidelity { state, t_max, samples, threshold, scan, out } => {
            let mut c = RunConfig::new(Command::Fidelity);
            state.apply(&mut c);
            scan.apply(&mut c);
            out.apply(&mut c);
            c.time = TimeConfig { t_max, samples };
            c.threshold = threshold;
            c
        }
        Cmd::Potentials { state, grid: g, eps1, eps2, out } => {
            let mut c = RunConfig::new(Command::Potentials);
            state.apply(&mut c);
            out.apply(&mut c);
            c.grid = grid(g);
            c.eps1 = eps1;
            c.eps2 = eps2;
            c
        }
        Cmd::Coefficients { state, out } => {
            let mut c = RunConfig::new(Command::Coefficients);
            state.apply(&mut c);
            out.apply(&mut c);
            c
        }
        Cmd::Check { tol, out } => {
            let mut c = RunConfig::new(Command::Check);
            out.apply(&mut c);
            c.check_tol = tol;
            c
        }
        Cmd::Run { .. } => unreachable!("handled by caller"),
    }
}

fn gridded(command: Command, state: StateArgs, g: GridArgs, scan: ScanArgs, out: OutArgs) -> RunConfig {
    let mut c = RunConfig::new(command);
    state.apply(&mut c);
    scan.apply(&mut c);
    out.apply(&mut c);
    c.grid = grid(g);
    c
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GCS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("GCS_THREADS: expected a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("GCS_THREADS: {e}")))
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    configure_threads()?;
    match cmd {
        Cmd::Run { config, out_dir } => {
            let runs = load_config(&config)?;
            let inputs = config.parent().map(PathBuf::from).unwrap_or_default();
            let outputs = out_dir.unwrap_or_default();
            for mut r in runs {
                r.resolve_paths(&inputs, &outputs);
                run(&r)?;
            }
            Ok(())
        }
        other => run(&config_from(other)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
