//! Command-line front end: batch experiments, LP export, plot-data
//! aggregation, and generators for codes and test images.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ugm_map::experiment::{
    parse_p_grid, parse_restore_method, plot_data, run_experiment, Application, ConfigError,
    ExperimentConfig,
};
use ugm_map::ldpc::{build_decoder, gallager_parity_check, DecodeMethod};
use ugm_map::lp::write_lp_text;
use ugm_map::relax::build_relaxation;
use ugm_map::restore::{
    apply_bit_flip_noise, build_restoration_objective, generate_synthetic_image, BitImage,
    PatternPotentials, RestoreMethod, SyntheticKind,
};

#[derive(Parser)]
#[command(name = "ugm-map", version, about = "MAP inference via LP relaxations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an image-restoration experiment over a noise grid.
    Restore(RunArgs),
    /// Run an LDPC-decoding experiment over a channel-noise grid.
    Decode(RunArgs),
    /// Write one instance's linear program in LP text format.
    ExportLp(ExportArgs),
    /// Aggregate an experiment CSV into `method,p,mean,stderr` rows.
    PlotData(PlotArgs),
    /// Generate a Gallager parity-check matrix and print it as text.
    GenCode(GenCodeArgs),
    /// Generate a synthetic binary image as PBM, optionally with noise.
    GenImage(GenImageArgs),
}

/// Shared flags for the two experiment subcommands. Flags override
/// values from `--config` when both are given.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` experiment config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Synthetic image kind: TL, CEN, or CROSS.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Data-term weight for restoration.
    #[arg(long)]
    alpha: Option<f64>,
    /// Four comma-separated pattern potentials.
    #[arg(long)]
    phi: Option<String>,
    /// Comma-separated PBM files to learn the potentials from
    /// (overrides --phi).
    #[arg(long)]
    phi_learn: Option<String>,
    /// Ground-truth image loaded from a PBM file instead of --kind.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Code length (decode only).
    #[arg(long)]
    n: Option<usize>,
    /// Row weight (decode only).
    #[arg(long)]
    beta: Option<usize>,
    /// Column weight (decode only).
    #[arg(long)]
    gamma: Option<usize>,
    /// Noise grid `[start:step:stop]` or a single probability.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial seeds are base XOR trial index.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated method names.
    #[arg(long)]
    methods: Option<String>,
    /// Branch-and-bound node budget for the IP method.
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Where to write the per-trial CSV (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the per-(method, p) summary table.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Which pipeline the instance comes from: restore or decode.
    #[arg(long)]
    application: String,
    /// Method whose constraint system to export.
    #[arg(long)]
    method: String,
    /// Noise probability applied to the instance.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "TL")]
    kind: String,
    #[arg(long, default_value_t = 15)]
    width: usize,
    #[arg(long, default_value_t = 15)]
    height: usize,
    #[arg(long, default_value_t = 25.0)]
    alpha: f64,
    #[arg(long, default_value = "-10,-20,-30,-40")]
    phi: String,
    #[arg(long, default_value_t = 9)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    beta: usize,
    #[arg(long, default_value_t = 2)]
    gamma: usize,
    /// Output path for the LP text (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Experiment CSV produced by the restore or decode subcommand.
    #[arg(long)]
    csv: PathBuf,
    /// One of: r_g, tightness, recovery, time.
    #[arg(long)]
    metric: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenCodeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    beta: usize,
    #[arg(long)]
    gamma: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenImageArgs {
    /// TL, CEN, or CROSS.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    /// Bit-flip probability; 0 writes the clean image.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Solver(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Solver(_) => ExitCode::from(3),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Solver(msg) => CliError::Solver(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_phi(text: &str) -> Result<PatternPotentials, CliError> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse()).collect();
    let parts = parts.map_err(|_| CliError::Config(format!("bad phi `{text}`")))?;
    let arr: [f64; 4] = parts
        .try_into()
        .map_err(|_| CliError::Config(format!("phi needs exactly four values: `{text}`")))?;
    Ok(PatternPotentials::new(arr))
}

fn parse_kind(text: &str) -> Result<SyntheticKind, CliError> {
    SyntheticKind::parse(text).ok_or_else(|| CliError::Config(format!("unknown kind `{text}`")))
}

fn build_config(args: &RunArgs, application: Application) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            ExperimentConfig::from_text(&text)?
        }
        None => ExperimentConfig {
            application,
            ..Default::default()
        },
    };
    cfg.application = application;
    if let Some(kind) = &args.kind {
        cfg.image_kind = parse_kind(kind)?;
    }
    if let Some(w) = args.width {
        cfg.image_width = w;
    }
    if let Some(h) = args.height {
        cfg.image_height = h;
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if let Some(phi) = &args.phi {
        cfg.phi = parse_phi(phi)?;
    }
    if let Some(paths) = &args.phi_learn {
        let mut images = Vec::new();
        for path in paths.split(',').map(|t| t.trim()) {
            let text = fs::read_to_string(path)?;
            images.push(BitImage::from_pbm(&text).map_err(|e| CliError::Config(e.to_string()))?);
        }
        cfg.phi_learn = Some(images);
    }
    if let Some(path) = &args.image {
        let text = fs::read_to_string(path)?;
        cfg.image = Some(BitImage::from_pbm(&text).map_err(|e| CliError::Config(e.to_string()))?);
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(b) = args.beta {
        cfg.beta = b;
    }
    if let Some(g) = args.gamma {
        cfg.gamma = g;
    }
    if let Some(p) = &args.p {
        cfg.p_grid = parse_p_grid(p)?;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed_base = s;
    }
    if let Some(m) = args.max_nodes {
        cfg.ip_max_nodes = m;
    }
    if let Some(methods) = &args.methods {
        match application {
            Application::Restore => {
                cfg.restore_methods = methods
                    .split(',')
                    .map(|m| parse_restore_method(m.trim()))
                    .collect::<Result<_, _>>()?;
            }
            Application::Decode => {
                cfg.decode_methods = methods
                    .split(',')
                    .map(|m| {
                        DecodeMethod::parse(m.trim())
                            .ok_or_else(|| CliError::Config(format!("unknown method `{m}`")))
                    })
                    .collect::<Result<_, _>>()?;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs, application: Application) -> Result<(), CliError> {
    let cfg = build_config(args, application)?;
    let out = run_experiment(&cfg)?;
    emit(&args.output, &out.csv)?;
    match &args.summary {
        Some(path) => fs::write(path, &out.summary)?,
        None => {
            if args.output.is_some() {
                print!("{}", out.summary);
            }
        }
    }
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> Result<(), CliError> {
    let lp = match args.application.as_str() {
        "restore" => {
            let kind = parse_kind(&args.kind)?;
            let phi = parse_phi(&args.phi)?;
            let truth = generate_synthetic_image(kind, args.width, args.height);
            let noisy = apply_bit_flip_noise(&truth, args.p, args.seed);
            let (h, obj) = build_restoration_objective(&noisy, args.alpha, &phi);
            let method = parse_restore_method(&args.method)?;
            let relax = match method {
                RestoreMethod::Lp(k) => k,
                RestoreMethod::Ip => ugm_map::relax::RelaxationKind::Clique,
            };
            build_relaxation(&h, relax, &obj)
        }
        "decode" => {
            let method = DecodeMethod::parse(&args.method)
                .ok_or_else(|| CliError::Config(format!("unknown method `{}`", args.method)))?;
            let code = gallager_parity_check(args.n, args.beta, args.gamma, args.seed)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let zero = BitImage::new(args.n, 1);
            let y: Vec<bool> = apply_bit_flip_noise(&zero, args.p, args.seed)
                .pixels()
                .to_vec();
            build_decoder(&code, &y, method).map_err(|e| CliError::Solver(e.to_string()))?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown application `{other}`: expected restore or decode"
            )))
        }
    };
    emit(&args.output, &write_lp_text(&lp))
}

fn cmd_plot(args: &PlotArgs) -> Result<(), CliError> {
    let csv = fs::read_to_string(&args.csv)?;
    let table = plot_data(&csv, &args.metric)?;
    emit(&args.output, &table)
}

fn cmd_gen_code(args: &GenCodeArgs) -> Result<(), CliError> {
    let code = gallager_parity_check(args.n, args.beta, args.gamma, args.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    emit(&args.output, &code.to_text())
}

fn cmd_gen_image(args: &GenImageArgs) -> Result<(), CliError> {
    let kind = parse_kind(&args.kind)?;
    if !(0.0..=0.5).contains(&args.p) {
        return Err(CliError::Config(format!("p {} outside [0, 0.5]", args.p)));
    }
    let image = generate_synthetic_image(kind, args.width, args.height);
    let image = if args.p > 0.0 {
        apply_bit_flip_noise(&image, args.p, args.seed)
    } else {
        image
    };
    emit(&args.output, &image.to_pbm())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Restore(args) => cmd_run(args, Application::Restore),
        Command::Decode(args) => cmd_run(args, Application::Decode),
        Command::ExportLp(args) => cmd_export(args),
        Command::PlotData(args) => cmd_plot(args),
        Command::GenCode(args) => cmd_gen_code(args),
        Command::GenImage(args) => cmd_gen_image(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                CliError::Config(m) | CliError::Solver(m) => m,
            };
            eprintln!("error: {msg}");
            e.exit_code()
        }
    }
}
