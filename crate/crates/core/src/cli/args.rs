use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use slosh::admissible::Geometry;
use slosh::bond::BondNumber;
use slosh::eigensolver::{DEFAULT_GRID, DEFAULT_MAX_ITER, DEFAULT_TOL};
use slosh::verify::DEFAULT_EPSILON;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 2 invalid arguments or input file, 3 I/O failure,
4 solver failure, 5 verification failure.
CSV output uses 17 significant digits. Set RUST_LOG=debug for diagnostics.";

/// Optimal shallow containers for sloshing: closed-form maximal frequencies and
/// shapes, a finite-difference eigensolver, and checks of the isoperimetric
/// inequalities.
#[derive(Debug, Parser)]
#[command(name = "slosh", version, after_help = AFTER_HELP)]
pub struct Cli {
    /// Directory that relative --output paths are resolved against.
    #[arg(long, global = true, env = "SLOSH_OUTPUT_DIR", value_name = "DIR")]
    pub output_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Canal,
    Radial,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Canal => Geometry::Canal,
            GeometryArg::Radial => Geometry::Radial,
        }
    }
}

/// Family and constraint of a closed-form case.
#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    /// Canal (free surface -1 <= x <= 1) or radially symmetric container (0 <= r <= 1).
    #[arg(long, value_enum)]
    pub geometry: GeometryArg,
    /// Canal wavenumber alpha >= 0.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Radial azimuthal index m (closed forms exist for 0 and 1).
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Bond number Bo > 0, or "inf" for no surface tension.
    #[arg(long, default_value = "1")]
    pub bond: BondNumber,
    /// Canal cross-sectional area A = int h dx.
    #[arg(long, default_value_t = 1.0)]
    pub area: f64,
    /// Radial volume V = 2 pi int h r dr.
    #[arg(long, default_value_t = 1.0)]
    pub volume: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArg {
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the squared maximal frequency lambda* of a case.
    ///
    /// Canal, Bo = inf: 3A/2 (alpha = 0), alpha^2 A/2 (alpha > 0).
    /// Canal, alpha = 0: (3A/2) [1 - 3 (sqrt(Bo) - tanh sqrt(Bo)) / (Bo tanh sqrt(Bo))]^-1.
    /// Canal, alpha > 0: (alpha^2 A/2) (k^2/Bo) [1 - tanh(k)/k]^-1 with k = sqrt(alpha^2 + Bo).
    /// Radial, Bo = inf: 4V/pi (m = 1), 18V/pi (m = 0).
    /// Radial, m = 1: (4V/pi) [1 - 4 I_2(k) / (k I_1(k))]^-1 with k = sqrt(Bo).
    /// Radial, m = 0: (18V/pi) / B with
    ///   B = 6 d_0 - 3 + 18 (1 - d_0) pi Y / (Bo I_0) + 3 2F3(1, 2; 3/2, 5/2, 3; Bo/4) - 9 pi^2 L_0 Y / (Bo^{3/2} I_0),
    ///   Y = I_1 L_0 - I_0 L_1, d_0 = (3 pi Y + 2 Bo I_0 - 6 sqrt(Bo) I_1) / (3 Bo I_2).
    /// Also printed: kappa, d_0 (m = 0), and ratio = lambda* / lambda*(Bo = inf).
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    LambdaStar {
        #[command(flatten)]
        case: CaseArgs,
    },

    /// Write the optimal depth h* as CSV `x,h` or `r,h`.
    ///
    /// Canal, Bo = inf: 3A(1 - x^2)/4 (alpha = 0), the rectangle A/2 (alpha > 0).
    /// Canal, alpha = 0: (lambda*/2)(1 - x^2) - lambda* (cosh k - cosh kx) / (k sinh k).
    /// Canal, alpha > 0: lambda* Bo / (alpha^2 k^2) [1 - cosh(kx)/cosh k].
    /// Radial, Bo = inf: 2V(1 - r^2)/pi (m = 1), 6V(r - r^2)/pi (m = 0).
    /// Radial, m = 1: (lambda*/2)(1 - r^2) - lambda* [I_0(k) - I_0(kr)] / (k I_1(k)).
    /// Radial, m = 0: (lambda*/3)(3 d_0 r/2 - r^2) + lambda* (1 - d_0) I_1(kr) / (k I_0(k)) + (pi lambda* / 2Bo) S
    ///   with S = L_1(kr) - L_0(k) I_1(kr) / I_0(k).
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Shape {
        #[command(flatten)]
        case: CaseArgs,
        /// Number of uniform samples over the free surface.
        #[arg(long, default_value_t = 201)]
        n: usize,
        #[command(flatten)]
        out: OutputArg,
    },

    /// Solve for the fundamental sloshing mode of a depth profile read from CSV.
    ///
    /// Finite Bo: -(h psi')' + alpha^2 h psi = Omega zeta, (1 + alpha^2/Bo) zeta - zeta''/Bo = Omega psi,
    /// with (h psi')(+-1) = 0 and zeta(+-1) = 0 (radial: r-weighted operators, m^2/r^2 terms,
    /// zeta(1) = 0). Bo = inf: -(h psi')' + alpha^2 h psi = lambda psi.
    /// Prints Omega_1, lambda_1 = Omega_1^2 and the backward-error residual; the CSV holds
    /// a metadata row `omega1,lambda1,residual,n`, then rows `x,psi,zeta` normalized to
    /// int psi zeta = 1 (int psi^2 = 1 without surface tension).
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Solve {
        /// Depth profile with header `x,h` (canal) or `r,h` (radial) on a uniform grid.
        #[arg(long)]
        shape: PathBuf,
        /// Canal wavenumber alpha.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Radial azimuthal index m.
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Bond number, or "inf".
        #[arg(long, default_value = "1")]
        bond: BondNumber,
        /// Convergence tolerance.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Iteration cap.
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[command(flatten)]
        out: OutputArg,
    },

    /// Tabulate lambda*(Bo) and the ratio C(Bo) = lambda*(Bo) / lambda*(inf) as CSV.
    ///
    /// Columns `bond,lambda_star,ratio`; the ratio curves of the canal and radial families.
    /// Exits 5 unless lambda* strictly decreases and C > 1 along the table.
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = 0.1)]
        bo_min: f64,
        #[arg(long, default_value_t = 1e4)]
        bo_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Log)]
        spacing: Spacing,
        #[command(flatten)]
        out: OutputArg,
    },

    /// Least-squares slope of ln lambda* against ln Bo over a window.
    ///
    /// The fit uses 1000 uniformly spaced Bond numbers across the window.
    /// With --expect, exits 5 when the slope is further than --expect-tol from it.
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Fit {
        #[command(flatten)]
        case: CaseArgs,
        /// Window [MIN, MAX] of Bond numbers.
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [0.1, 10.0])]
        window: Vec<f64>,
        #[arg(long)]
        expect: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        expect_tol: f64,
    },

    /// Property checks; each exits 5 on failure.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

/// Trial settings shared by the randomized checks.
#[derive(Debug, Clone, Args)]
pub struct TrialArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Grid size of every solve.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArg {
    /// Per-trial CSV; a JSON summary is written next to it with extension `.json`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// lambda_1(h) <= lambda* (1 + 5e-3) for random admissible shapes h.
    ///
    /// Shapes are squares of random cosine polynomials normalized to the area or volume.
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Isoperimetric {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        trial: TrialArgs,
        #[command(flatten)]
        report: ReportArg,
    },

    /// lambda_1(h* + eps h* v) <= lambda* (1 + 5e-3) for random zero-mean directions v.
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Perturbation {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[command(flatten)]
        trial: TrialArgs,
        #[command(flatten)]
        report: ReportArg,
    },

    /// |lambda_1(h*; n) - lambda*| / lambda* on refined grids: order >= 1.8, finest error < 1e-3.
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Attainment {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [250usize, 500, 1000, 2000])]
        grids: Vec<usize>,
        #[command(flatten)]
        report: ReportArg,
    },

    /// Omega_1((h_1 + h_2)/2) >= (Omega_1(h_1) + Omega_1(h_2))/2 - 5e-4 Omega* on random pairs;
    /// canal frequencies are also checked to be invariant under x -> -x.
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Concavity {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        #[command(flatten)]
        trial: TrialArgs,
        #[command(flatten)]
        report: ReportArg,
    },

    /// lambda*(Bo) decreases towards lambda*(inf) and h*(Bo) converges to the limit shape.
    ///
    /// Passes when lambda* strictly decreases, sup-norm shape gaps on |x| <= 0.9
    /// (r <= 0.9) decrease, the final ratio is within 5e-3 (canal) or 1e-2 (radial)
    /// of 1, and the final gap is below 1e-2 of the limit depth.
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Limits {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [1e2, 1e3, 1e4, 1e6])]
        bonds: Vec<f64>,
        #[command(flatten)]
        report: ReportArg,
    },

    /// (psi')^2 + alpha^2 psi^2 (canal) or (psi')^2 + m^2 psi^2 / r^2 (radial) is constant at h*.
    ///
    /// Measured on the discrete eigenfunction at |x| <= 0.9 (r <= 0.9); passes when the
    /// largest deviation from the median is below 1e-2 of it.
    #[command(verbatim_doc_comment, allow_negative_numbers = true)]
    Optimality {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        n: usize,
        #[command(flatten)]
        report: ReportArg,
    },
}
