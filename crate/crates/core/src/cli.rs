//! Command-line front end.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for data or
//! feasibility errors, 3 for I/O errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::bench::{self, DEFAULT_DIMS, DEFAULT_SPARSENESS_LEVELS, DEFAULT_TRIALS};
use crate::error::Error;
use crate::io::{
    read_dense_matrix, read_matrix, render_basis_grid, write_matrix, ImageGridSpec, MatrixFile,
    Normalization,
};
use crate::projection::{l1_l2, project_nonneg, ProjectionTarget};
use crate::solver::fit;
use crate::sparseness::sparseness;
use crate::types::{ConstraintSpec, FitReport, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sparse-nmf",
    version,
    about = "Non-negative matrix factorization with sparseness constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Factorize a non-negative data matrix.
    Fit(FitArgs),
    /// Project each row of a file onto a sparseness level.
    Project(ProjectArgs),
    /// Print the sparseness of each row of a file.
    Sparseness(SparsenessArgs),
    /// Render the columns of a basis matrix as a PGM image grid.
    ExportBasis(ExportArgs),
    /// Count projection iterations over a grid of dimensions and sparseness levels.
    BenchProjection(BenchArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Data matrix (.csv or whitespace text), one row per variable.
    #[arg(long)]
    data: PathBuf,
    /// Number of components M.
    #[arg(long)]
    components: usize,
    /// Sparseness of every basis vector (column of W).
    #[arg(long)]
    sw: Option<f64>,
    /// Sparseness of every coefficient row of H.
    #[arg(long)]
    sh: Option<f64>,
    #[arg(long, default_value_t = SolverConfig::default().max_iterations)]
    max_iter: usize,
    /// Relative objective decrease below which the fit is considered converged.
    #[arg(long, default_value_t = SolverConfig::default().objective_rel_tolerance)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_w: PathBuf,
    #[arg(long)]
    out_h: PathBuf,
    /// Objective trace CSV; per-component sparseness goes next to it in
    /// `<stem>.components.csv`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    sparseness: f64,
    /// L2 norm of the result; defaults to each row's own L2 norm.
    #[arg(long)]
    l2: Option<f64>,
}

#[derive(Debug, Args)]
struct SparsenessArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Basis matrix W, one basis vector per column.
    #[arg(long)]
    w: PathBuf,
    #[arg(long)]
    patch_h: usize,
    #[arg(long)]
    patch_w: usize,
    /// Patches per grid row.
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated vector dimensions.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DIMS)]
    dims: Vec<usize>,
    /// Comma-separated sparseness levels, used for both initial and target.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SPARSENESS_LEVELS)]
    sparseness_grid: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

/// Attaches a flag or file name to a library error.
fn context(what: impl std::fmt::Display) -> impl FnOnce(Error) -> Failure {
    move |err| {
        let code = match err {
            Error::Io { .. } => EXIT_IO,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: format!("{what}: {err}"),
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{}", e.render());
                    return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        EXIT_OK
                    };
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Fit(a) => run_fit(a, out),
        Command::Project(a) => run_project(a, out),
        Command::Sparseness(a) => run_sparseness(a, out),
        Command::ExportBasis(a) => run_export(a),
        Command::BenchProjection(a) => run_bench(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn check_level(flag: &str, value: Option<f64>) -> Result<(), Failure> {
    match value {
        Some(s) if !(0.0..=1.0).contains(&s) => Err(Failure {
            code: EXIT_DATA,
            message: format!("{flag}: sparseness {s} is outside [0, 1]"),
        }),
        _ => Ok(()),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("stdout: {e}"),
    })
}

fn run_fit(a: FitArgs, out: &mut dyn Write) -> Result<(), Failure> {
    check_level("--sw", a.sw)?;
    check_level("--sh", a.sh)?;
    if a.components == 0 {
        return Err(Failure::usage("--components: must be at least 1"));
    }
    let data = read_matrix(&MatrixFile::infer(&a.data)).map_err(context("--data"))?;
    let spec = ConstraintSpec {
        components: a.components,
        basis_sparseness: a.sw,
        coeff_sparseness: a.sh,
    };
    let config = SolverConfig::default()
        .with_max_iterations(a.max_iter)
        .with_tolerance(a.tol)
        .with_seed(a.seed);
    let (model, report) = fit(&data, &spec, &config)
        .map_err(context("fit (--components/--sw/--sh/--tol)"))?;

    write_matrix(model.basis(), &MatrixFile::infer(&a.out_w)).map_err(context("--out-w"))?;
    write_matrix(model.coefficients(), &MatrixFile::infer(&a.out_h))
        .map_err(context("--out-h"))?;
    if let Some(path) = &a.report {
        write_report(&report, path)?;
    }
    write_out(
        out,
        &format!(
            "iterations {}, objective {}, converged {}\n",
            report.iterations_run,
            report.final_objective(),
            report.converged
        ),
    )
}

/// Path of the per-component sparseness table written next to a report.
pub fn components_report_path(report: &Path) -> PathBuf {
    report.with_extension("components.csv")
}

fn write_report(report: &FitReport, path: &Path) -> Result<(), Failure> {
    let mut trace = String::from("iteration,objective,stepsize_w,stepsize_h\n");
    let (mu_w0, mu_h0) = (
        SolverConfig::default().initial_stepsize,
        SolverConfig::default().initial_stepsize,
    );
    writeln!(trace, "0,{},{mu_w0},{mu_h0}", report.initial_objective).unwrap();
    for (i, (obj, (mu_w, mu_h))) in report
        .objective_trace
        .iter()
        .zip(&report.stepsize_trace)
        .enumerate()
    {
        writeln!(trace, "{},{obj},{mu_w},{mu_h}", i + 1).unwrap();
    }
    fs::write(path, trace).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("--report {}: {e}", path.display()),
    })?;

    let mut table = String::from("component,basis_sparseness,coeff_sparseness\n");
    for (i, (sw, sh)) in report
        .final_basis_sparseness
        .iter()
        .zip(&report.final_coeff_sparseness)
        .enumerate()
    {
        writeln!(table, "{},{sw},{sh}", i + 1).unwrap();
    }
    let components = components_report_path(path);
    fs::write(&components, table).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("--report {}: {e}", components.display()),
    })
}

fn format_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn run_project(a: ProjectArgs, out: &mut dyn Write) -> Result<(), Failure> {
    check_level("--sparseness", Some(a.sparseness))?;
    if let Some(l2) = a.l2 {
        if !(l2 > 0.0 && l2.is_finite()) {
            return Err(Failure {
                code: EXIT_DATA,
                message: format!("--l2: must be positive, got {l2}"),
            });
        }
    }
    let input = read_dense_matrix(&MatrixFile::infer(&a.input)).map_err(context("--in"))?;
    let mut text = String::new();
    for (i, row) in input.rows().into_iter().enumerate() {
        let x = row.to_vec();
        let l2 = match a.l2 {
            Some(l2) => l2,
            None => {
                let (_, own) = l1_l2(&x);
                if own == 0.0 {
                    return Err(Failure {
                        code: EXIT_DATA,
                        message: format!("--in: row {} is the zero vector; pass --l2", i + 1),
                    });
                }
                own
            }
        };
        let target = ProjectionTarget::from_sparseness(a.sparseness, l2, x.len())
            .map_err(context(format_args!("--in row {}", i + 1)))?;
        let (s, trace) =
            project_nonneg(&x, &target).map_err(context(format_args!("--in row {}", i + 1)))?;
        writeln!(text, "{}", format_row(&s)).unwrap();
        writeln!(text, "iterations: {}", trace.iterations).unwrap();
    }
    write_out(out, &text)
}

fn run_sparseness(a: SparsenessArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let input = read_dense_matrix(&MatrixFile::infer(&a.input)).map_err(context("--in"))?;
    let mut text = String::new();
    for (i, row) in input.rows().into_iter().enumerate() {
        let value =
            sparseness(&row.to_vec()).map_err(context(format_args!("--in row {}", i + 1)))?;
        writeln!(text, "{value:?}").unwrap();
    }
    write_out(out, &text)
}

fn run_export(a: ExportArgs) -> Result<(), Failure> {
    let w = read_matrix(&MatrixFile::infer(&a.w)).map_err(context("--w"))?;
    let spec = ImageGridSpec {
        patch_height: a.patch_h,
        patch_width: a.patch_w,
        grid_cols: a.cols,
        normalization: Normalization::PerImage,
    };
    let bytes =
        render_basis_grid(w.view(), &spec).map_err(context("--patch-h/--patch-w/--cols"))?;
    fs::write(&a.out, bytes).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("--out {}: {e}", a.out.display()),
    })
}

fn run_bench(a: BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.trials == 0 {
        return Err(Failure::usage("--trials: must be at least 1"));
    }
    let outcome = bench::run_grid(&a.dims, &a.sparseness_grid, a.trials, a.seed)
        .map_err(context("bench-projection"))?;
    bench::write_csv(&outcome.results, &a.out).map_err(context("--out"))?;
    let mut text = String::new();
    for s in &outcome.skipped {
        writeln!(
            text,
            "skipped dim {} s_init {} s_target {}: {}",
            s.dimension, s.initial_sparseness, s.target_sparseness, s.reason
        )
        .unwrap();
    }
    writeln!(text, "wrote {} cells to {}", outcome.results.len(), a.out.display()).unwrap();
    write_out(out, &text)
}
