//! Command-line interface.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use andrews_core::render::{self, CurveSet, StyleOptions, DEFAULT_SAMPLES};
use andrews_core::{operator, ColumnRef, ConvergeOptions, LabelSpec, SpectralBasis};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compute::{self, AppError, ComputeRequest, ComputeResponse, Mode, SpectrumMemo};
use crate::server::{self, AppState};
use crate::verify;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "andrews", version, about = "Classic and smoothed Andrews plots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plot one curve per data point.
    Plot(PlotArgs),
    /// Plot per-class envelope bands.
    Bands(PlotArgs),
    /// Print the lowest smoothed eigenvalues and their convergence history.
    Spectrum(SpectrumArgs),
    /// Check the pipeline's invariants on a dataset.
    Verify(VerifyArgs),
    /// Run the JSON HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Column holding class labels (name or zero-based index).
    #[arg(long, conflicts_with = "quartile_col")]
    pub label_col: Option<String>,
    /// Numeric column binned into quartile labels Q1..Q4.
    #[arg(long)]
    pub quartile_col: Option<String>,
    /// Skip mean-centering before the SVD.
    #[arg(long)]
    pub no_center: bool,
    /// Divide each feature by its standard deviation.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long, value_enum, default_value_t = Mode::Classic)]
    pub mode: Mode,
    /// Smoothing weight, required for --mode ssqv.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Eigenvalue convergence tolerance.
    #[arg(long, default_value_t = ConvergeOptions::DEFAULT_TOL)]
    pub tol: f64,
    /// Initial truncation size.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Largest truncation size.
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Svg,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub basis: BasisArgs,
    /// Grid points on [0, 1].
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; defaults to the --out extension, else svg.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Number of eigenpairs.
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = ConvergeOptions::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub basis: BasisArgs,
    #[arg(long, default_value_t = 128)]
    pub samples: usize,
    /// Corrupt the basis before checking; for exercising failure paths.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long, default_value = "data")]
    pub datasets_dir: PathBuf,
    /// Accept inline CSV in compute requests.
    #[arg(long)]
    pub allow_upload: bool,
}

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Plot(args) => plot(&args, false),
        Command::Bands(args) => plot(&args, true),
        Command::Spectrum(args) => spectrum(&args),
        Command::Verify(args) => return verify_cmd(&args),
        Command::Serve(args) => serve(&args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &AppError) -> u8 {
    match e {
        AppError::Numerical { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn label_spec(data: &DataArgs) -> Option<LabelSpec> {
    match (&data.label_col, &data.quartile_col) {
        (Some(c), _) => Some(LabelSpec::Column(ColumnRef::from(c.as_str()))),
        (None, Some(c)) => Some(LabelSpec::Quartile(ColumnRef::from(c.as_str()))),
        (None, None) => None,
    }
}

/// Dataset id used in responses: the file stem.
fn dataset_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn request(data: &DataArgs, basis: &BasisArgs, samples: usize, want_bands: bool) -> ComputeRequest {
    let mut req = ComputeRequest::new(dataset_id(&data.dataset), basis.mode);
    req.alpha = basis.alpha;
    req.samples = samples;
    req.center = !data.no_center;
    req.standardize = data.standardize;
    req.label = label_spec(data);
    req.tol = basis.tol;
    req.want_bands = want_bands;
    req.n0 = basis.n0;
    req.n_max = basis.n_max;
    req
}

fn plot(args: &PlotArgs, bands_only: bool) -> Result<(), AppError> {
    let req = request(&args.data, &args.basis, args.samples, true);
    req.validate()?;
    let ds = compute::load_dataset(&args.data.dataset, req.label.as_ref())?;
    let computed = compute::compute(&ds, &req.dataset, &req, &SpectrumMemo::default())?;
    for w in &computed.response.warnings {
        eprintln!("warning: {w}");
    }
    let format = args.format.or_else(|| format_from_extension(args.out.as_deref())).unwrap_or(Format::Svg);
    let bytes = render_output(&computed.response, format, bands_only, args.title.clone());
    write_output(args.out.as_deref(), &bytes)
}

fn format_from_extension(path: Option<&Path>) -> Option<Format> {
    match path?.extension()?.to_str()? {
        "svg" => Some(Format::Svg),
        "json" => Some(Format::Json),
        "csv" => Some(Format::Csv),
        _ => None,
    }
}

/// `plot` draws curves and `bands` draws envelopes; `plot` JSON carries the
/// full response.
pub fn render_output(response: &ComputeResponse, format: Format, bands_only: bool, title: Option<String>) -> Vec<u8> {
    let cs = response.plot.curve_set();
    match format {
        Format::Svg => {
            let style = StyleOptions { title, draw_curves: !bands_only, ..StyleOptions::default() };
            let bands = bands_only.then_some(response.plot.bands.as_slice());
            render::emit_svg(&cs, bands, &style)
        }
        Format::Json if bands_only => {
            let mut only = response.clone();
            only.plot.curves.clear();
            compute::to_json(&only)
        }
        Format::Json => compute::to_json(response),
        Format::Csv if bands_only => render::emit_csv(&bands_as_curves(response, &cs)),
        Format::Csv => render::emit_csv(&cs),
    }
}

/// Band edges as curves named `label:upper` and `label:lower`.
fn bands_as_curves(response: &ComputeResponse, cs: &CurveSet) -> CurveSet {
    let mut curves = Vec::new();
    let mut ids = Vec::new();
    for b in &response.plot.bands {
        curves.push(b.upper.clone());
        ids.push(format!("{}:upper", b.label));
        curves.push(b.lower.clone());
        ids.push(format!("{}:lower", b.label));
    }
    CurveSet { t: cs.t.clone(), curves, labels: None, point_ids: ids }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), AppError> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| AppError::Input(format!("cannot write {}: {e}", path.display())))
        }
        None => match std::io::stdout().write_all(bytes) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(AppError::Internal(e.to_string())),
            _ => Ok(()),
        },
    }
}

fn spectrum(args: &SpectrumArgs) -> Result<(), AppError> {
    let mut opts = ConvergeOptions::for_dim(args.d).with_tol(args.tol);
    if let Some(n0) = args.n0 {
        opts.n0 = n0;
    }
    if let Some(n_max) = args.n_max {
        opts.n_max = n_max;
    }
    let basis = operator::converge(args.alpha, args.d, &opts)?;
    print!("{}", spectrum_table(&basis));
    if basis.report.converged {
        Ok(())
    } else {
        Err(AppError::Numerical {
            message: format!("eigenvalues did not converge by N = {}", basis.report.n_final),
            report: Some(basis.report.clone()),
        })
    }
}

pub fn spectrum_table(basis: &SpectralBasis) -> String {
    use std::fmt::Write as _;
    let r = &basis.report;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "alpha = {}  d = {}  N_final = {}  converged = {}  tail_bound = {}",
        basis.alpha,
        basis.dim(),
        r.n_final,
        r.converged,
        if r.tail_bound_ok { "ok" } else { "violated" }
    );
    if let Some(delta) = r.max_last_delta {
        let _ = writeln!(s, "max_last_delta = {delta:e}");
    }
    let _ = writeln!(s, "\n{:>4} {:>6} {:>24}", "k", "parity", "lambda");
    for (k, p) in basis.pairs.iter().enumerate() {
        let parity = p.parity.map_or('?', |p| p.symbol());
        let _ = writeln!(s, "{:>4} {:>6} {:>24.15}", k + 1, parity, p.value);
    }
    let _ = writeln!(s, "\nhistory");
    let _ = write!(s, "{:>6}", "N");
    for k in 1..=basis.dim() {
        let _ = write!(s, " {:>24}", format!("lambda_{k}"));
    }
    s.push('\n');
    for row in &r.history {
        let _ = write!(s, "{:>6}", row.n);
        for v in &row.values {
            let _ = write!(s, " {v:>24.15}");
        }
        s.push('\n');
    }
    s
}

fn verify_cmd(args: &VerifyArgs) -> u8 {
    let req = request(&args.data, &args.basis, args.samples, true);
    let report = req
        .validate()
        .and_then(|()| Ok(compute::load_dataset(&args.data.dataset, req.label.as_ref())?))
        .and_then(|ds| verify::verify(&ds, &req, args.inject_fault));
    match report {
        Ok(report) => {
            print!("{report}");
            if report.passed() {
                EXIT_OK
            } else {
                let names: Vec<&str> = report.failures().map(|c| c.name).collect();
                eprintln!("error: failed checks: {}", names.join(", "));
                EXIT_VERIFY
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn serve(args: &ServeArgs) -> Result<(), AppError> {
    let state = AppState::from_dir(&args.datasets_dir, args.allow_upload)?;
    let addr = SocketAddr::new(args.host, args.port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| AppError::Internal(e.to_string()))?;
    rt.block_on(server::serve(state, addr)).map_err(|e| AppError::Input(format!("cannot serve on {addr}: {e}")))
}
