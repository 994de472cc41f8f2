//! Command-line front end for `circwass`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 data or validation error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use circwass::bench::{run_bench, BenchConfig};
use circwass::io::{
    format_real, histogram_to_csv, histogram_to_json, matrix_to_csv, read_features_file, read_histogram_file,
    read_matrix_file,
};
use circwass::oracle::mincost_exact;
use circwass::verify::{run_verification, VerifyConfig};
use circwass::{
    blend_ground_matrix, build_ground_matrix, build_line_matrix, centroid_l1_distances, class_centroids, fast_loss,
    CircularHistogram, ClassFeatureSet, Error, GaussianNormalization, Geometry, GroundMatrix, GroundMetricSpec,
    SmoothingSpec, UnimodalFamily, DEFAULT_RESOLUTION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "circwass", version, about = "Exact Wasserstein losses on circular and line histograms")]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Loss between two histogram files.
    Dist {
        /// arc | power:R | huber:T | chord | step | custom:PATH
        #[arg(long, default_value = "arc")]
        metric: String,
        #[arg(long, value_enum, default_value_t = GeometryArg::Circle)]
        geometry: GeometryArg,
        /// Search resolution of the convex solver and oracle quantization.
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        m: u64,
        a: PathBuf,
        b: PathBuf,
    },
    /// Conservative smoothed target around a true class.
    Smooth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        jstar: usize,
        #[arg(long, value_enum)]
        dist: Family,
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long, value_enum, default_value_t = GaussianNorm::Softmax)]
        gaussian_norm: GaussianNorm,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// N×N cost matrix as CSV.
    Groundmatrix {
        #[arg(long, default_value = "arc")]
        metric: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = GeometryArg::Circle)]
        geometry: GeometryArg,
    },
    /// Randomized comparison of the fast solvers against the min-cost flow oracle.
    Verify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        min_n: usize,
        #[arg(long, default_value_t = 16)]
        max_n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        m: u64,
    },
    /// Per-call timings as CSV rows `n,solver,mean_ns`.
    Bench {
        #[arg(long, default_value = "arc")]
        metric: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also time Sinkhorn up to this size.
        #[arg(long, default_value_t = 512)]
        sinkhorn_max_n: usize,
    },
    /// Ground matrix blended from class feature centroids and arc length.
    Adapt {
        /// Rows `class, v_0, ..., v_{dim-1}`.
        #[arg(long)]
        features: PathBuf,
        #[arg(long, visible_alias = "metric", default_value = "arc")]
        spec: String,
        #[arg(long)]
        alpha: f64,
        /// Number of classes; defaults to the largest class index plus one.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        l2_normalize: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GeometryArg {
    Circle,
    Line,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Binomial,
    Poisson,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GaussianNorm {
    Softmax,
    Plain,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = Result<(String, i32), Failure>;

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = dispatch(cli.command).and_then(|(text, code)| {
        match &cli.out {
            Some(path) => fs::write(path, &text).map_err(|e| Failure {
                code: EXIT_DATA,
                message: format!("{}: {e}", path.display()),
            })?,
            None => stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure { code: EXIT_DATA, message: e.to_string() })?,
        }
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Dist { metric, geometry, m, a, b } => dist(&metric, geometry, m, &a, &b),
        Command::Smooth { n, jstar, dist, k, p, lambda, sigma2, xi, eta, gaussian_norm, format } => {
            let family = match dist {
                Family::Binomial => UnimodalFamily::Binomial { k, p: required(p, "--p")? },
                Family::Poisson => UnimodalFamily::Poisson { k, lambda: required(lambda, "--lambda")? },
                Family::Gaussian => UnimodalFamily::Gaussian {
                    k,
                    sigma2: required(sigma2, "--sigma2")?,
                    normalization: match gaussian_norm {
                        GaussianNorm::Softmax => GaussianNormalization::Softmax,
                        GaussianNorm::Plain => GaussianNormalization::Plain,
                    },
                },
            };
            let target = SmoothingSpec { xi, eta, family }.target(n, jstar)?;
            let text = match format {
                Format::Csv => histogram_to_csv(target.mass()),
                Format::Json => histogram_to_json(target.mass()),
            };
            Ok((text, EXIT_OK))
        }
        Command::Groundmatrix { metric, n, geometry } => {
            let spec = parse_metric(&metric)?;
            let d = match geometry {
                GeometryArg::Circle => build_ground_matrix(&spec, n)?,
                GeometryArg::Line => build_line_matrix(&spec, n)?,
            };
            Ok((matrix_to_csv(d.rows()), EXIT_OK))
        }
        Command::Verify { trials, min_n, max_n, seed, m } => {
            if min_n < 2 || max_n < min_n {
                return Err(Failure::usage(format!("need 2 <= --min-n <= --max-n, got {min_n} and {max_n}")));
            }
            let cfg = VerifyConfig { trials, min_n, max_n, seed, m, ..VerifyConfig::default() };
            let reports = run_verification(&cfg)?;
            let mut text = String::from("suite,instances,failures,max_gap,worst_ratio,status\n");
            for r in &reports {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.name,
                    r.instances,
                    r.failures,
                    format_real(r.max_gap),
                    format_real(r.worst_ratio),
                    if r.passed() { "pass" } else { "fail" }
                ));
            }
            let code = if reports.iter().all(|r| r.passed()) { EXIT_OK } else { EXIT_VERIFY_FAILED };
            Ok((text, code))
        }
        Command::Bench { metric, sizes, seed, sinkhorn_max_n } => {
            let spec = parse_metric(&metric)?;
            let cfg = BenchConfig { seed, sinkhorn_max_n, ..BenchConfig::new(spec, sizes) };
            let mut text = String::from("n,solver,mean_ns\n");
            for row in run_bench(&cfg)? {
                text.push_str(&format!("{},{},{}\n", row.n, row.solver, format_real(row.mean_ns)));
            }
            Ok((text, EXIT_OK))
        }
        Command::Adapt { features, spec, alpha, n, l2_normalize } => {
            let spec = parse_metric(&spec)?;
            let rows = read_features_file(&features)?;
            let n = match n {
                Some(n) => n,
                None => rows.iter().map(|(c, _)| c + 1).max().ok_or(Error::Empty)?,
            };
            let mut set = ClassFeatureSet::from_rows(n, rows)?;
            if l2_normalize {
                set = set.l2_normalized();
            }
            let d_bar = centroid_l1_distances(&class_centroids(&set)?)?;
            let blended = blend_ground_matrix(&d_bar, n, &spec, alpha)?;
            Ok((matrix_to_csv(blended.rows()), EXIT_OK))
        }
    }
}

fn required(value: Option<f64>, flag: &str) -> Result<f64, Failure> {
    value.ok_or_else(|| Failure::usage(format!("{flag} is required for this distribution")))
}

/// Malformed specs are usage errors; an unreadable or invalid custom matrix
/// file is a data error.
fn parse_metric(text: &str) -> Result<GroundMetricSpec, Failure> {
    if let Some(path) = text.strip_prefix("custom:") {
        let m = GroundMatrix::from_rows(read_matrix_file(path)?)?;
        return Ok(GroundMetricSpec::Custom(m));
    }
    GroundMetricSpec::parse(text).map_err(|e| Failure::usage(format!("--metric {text}: {e}")))
}

fn read_histogram(path: &Path) -> Result<CircularHistogram, Failure> {
    let values = read_histogram_file(path)?;
    CircularHistogram::new(values).map_err(|e| Failure { code: EXIT_DATA, message: format!("{}: {e}", path.display()) })
}

fn dist(metric: &str, geometry: GeometryArg, m: u64, a: &Path, b: &Path) -> Outcome {
    let spec = parse_metric(metric)?;
    let (s, t) = (read_histogram(a)?, read_histogram(b)?);
    if s.n_bins() != t.n_bins() {
        return Err(Failure {
            code: EXIT_DATA,
            message: format!(
                "histograms differ in length: {} has {} bins, {} has {}",
                a.display(),
                s.n_bins(),
                b.display(),
                t.n_bins()
            ),
        });
    }
    let geometry = match geometry {
        GeometryArg::Circle => Geometry::Circle,
        GeometryArg::Line => Geometry::Line,
    };
    let mut text = String::new();
    match fast_loss(&s, &t, &spec, geometry, m)? {
        Some(r) => {
            text.push_str(&format_real(r.value));
            text.push('\n');
            if let Some(alpha) = r.shift {
                text.push_str(&format!("alpha {}\n", format_real(alpha)));
            }
        }
        None => {
            let d = match geometry {
                Geometry::Circle => build_ground_matrix(&spec, s.n_bins())?,
                Geometry::Line => build_line_matrix(&spec, s.n_bins())?,
            };
            let cost = mincost_exact(&s, &t, &d, m)?.cost;
            text.push_str(&format_real(cost));
            text.push('\n');
        }
    }
    Ok((text, EXIT_OK))
}
