use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pencil_core::arma::Form;
use pencil_core::Tolerances;

mod commands;

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "pencil", version, about = "Laurent expansions of linear pencils at z = 1 and unit-root ARMA representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Laurent coefficients, projections, singularity class and separation for a pencil.
    Analyze {
        #[arg(long, value_name = "PATH")]
        pencil: PathBuf,
        /// Largest singular index reported; defaults to the pole order plus one.
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 8)]
        l_max: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct an ARMA(1,1) path through one of the four representation forms.
    Represent {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long)]
        form: Form,
        #[command(flatten)]
        run: RunArgs,
        /// Residual summary as JSON.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the recursion from a model file.
    Simulate {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification battery of a worked example.
    Demo {
        name: DemoName,
        #[command(flatten)]
        params: ExampleParams,
        #[command(flatten)]
        common: Common,
    },
    /// Export a worked example as pencil JSON with its expected values.
    Corpus {
        name: DemoName,
        #[command(flatten)]
        params: ExampleParams,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Linearize a polynomial pencil and recover its Laurent coefficients.
    Augment {
        #[arg(long, value_name = "PATH")]
        pencil: PathBuf,
        /// Number of augmented coefficients on each side of zero.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Horizon T.
    #[arg(long = "T", default_value_t = 100)]
    t_end: i64,
    /// Presample length B, or "auto" to size it from coefficient decay.
    #[arg(long)]
    burn_in: Option<String>,
    /// Overrides the seed in the model's noise specification.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct ExampleParams {
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.25)]
    lambda: f64,
    /// Truncation size; defaults to 10 (c0), 64 (volterra) or 8 (hierarchy).
    #[arg(long)]
    n: Option<usize>,
    /// Explicit hierarchy weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    #[arg(long)]
    tol_fund: Option<f64>,
    #[arg(long)]
    tol_solve: Option<f64>,
    #[arg(long)]
    tol_contour: Option<f64>,
    #[arg(long)]
    tol_tail: Option<f64>,
    #[arg(long)]
    tol_rep: Option<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DemoName {
    Matrix,
    C0,
    Volterra,
    Hierarchy,
}

/// Validated settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol: Tolerances,
    pub radius: Option<f64>,
    pub nodes: usize,
    pub out: Option<PathBuf>,
    pub csv: bool,
}

impl Common {
    fn config(&self) -> Result<RunConfig, Failure> {
        let mut tol = Tolerances::default();
        for (name, value, slot) in [
            ("tol-fund", self.tol_fund, &mut tol.fund),
            ("tol-solve", self.tol_solve, &mut tol.solve),
            ("tol-contour", self.tol_contour, &mut tol.contour),
            ("tol-tail", self.tol_tail, &mut tol.tail),
            ("tol-rep", self.tol_rep, &mut tol.rep),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Failure::input(format!("--{name} must be positive, got {v}")));
                }
                *slot = v;
            }
        }
        if self.nodes < 16 || !self.nodes.is_power_of_two() {
            return Err(Failure::input(format!("--nodes must be a power of two >= 16, got {}", self.nodes)));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Failure::input(format!("--radius must be positive, got {r}")));
            }
        }
        Ok(RunConfig { tol, radius: self.radius, nodes: self.nodes, out: self.out.clone(), csv: self.format == Format::Csv })
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { pencil, k_max, l_max, common } => commands::analyze(&pencil, k_max, l_max, &common.config()?),
        Command::Represent { model, form, run, report, common } => {
            commands::represent(&model, form, &run.settings()?, report.as_deref(), &common.config()?)
        }
        Command::Simulate { model, run, common } => commands::simulate(&model, &run.settings()?, &common.config()?),
        Command::Demo { name, params, common } => commands::demo(&params.kind(name)?, &common.config()?),
        Command::Corpus { name, params, out } => commands::corpus(&params.kind(name)?, out.as_deref()),
        Command::Augment { pencil, depth, common } => commands::augment(&pencil, depth, &common.config()?),
    }
}

impl RunArgs {
    fn settings(&self) -> Result<commands::RunSettings, Failure> {
        let burn_in = match self.burn_in.as_deref() {
            None => commands::BurnIn::FromModel,
            Some("auto") => commands::BurnIn::Auto,
            Some(s) => commands::BurnIn::Fixed(
                s.parse().map_err(|_| Failure::input(format!("--burn-in must be a count or \"auto\", got {s:?}")))?,
            ),
        };
        if self.t_end < 0 {
            return Err(Failure::input(format!("--T must be nonnegative, got {}", self.t_end)));
        }
        Ok(commands::RunSettings { t_end: self.t_end, burn_in, seed: self.seed })
    }
}

impl ExampleParams {
    fn kind(&self, name: DemoName) -> Result<pencil_core::corpus::CorpusKind, Failure> {
        use pencil_core::corpus::{hierarchy_geometric, CorpusKind};
        Ok(match name {
            DemoName::Matrix => CorpusKind::Matrix { eps: self.eps },
            DemoName::C0 => CorpusKind::C0 { lambda: self.lambda, n: self.n.unwrap_or(10) },
            DemoName::Volterra => CorpusKind::Volterra { n: self.n.unwrap_or(64) },
            DemoName::Hierarchy => CorpusKind::Hierarchy {
                lambdas: match &self.lambdas {
                    Some(l) => l.clone(),
                    None => hierarchy_geometric(self.n.unwrap_or(8)),
                },
            },
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
