//! `hermite-qmc`: weighted Hermite norms, QMC error reports, tractability
//! diagnostics and orthogonal transforms of Hermite coefficients.
//!
//! Exit status is 0 on success, 2 for usage errors (bad flags, unreadable or
//! malformed input files) and 1 when a computation fails.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hermite_qmc::experiment::{experiment_to_csv, ExperimentConfig};
use hermite_qmc::{
    analytic_coeffs_exp, apply_transform, construction_matrix, estimate_coeffs, eval_expansion,
    householder_from_linear, norm, orthogonal_from_construction, pointset_gaussian_iid,
    pointset_halton_mapped, qmc_integrate, rms_error, run_forward_vs_bb_experiment,
    tractability_report, CoeffMap, ConstructionKind, ErrorReport, Exec, Family, GammaRule,
    KernelMode, MultiIndex, OrthoMatrix, PointSet, WeightSpec, CSV_VERSION_LINE,
};

#[derive(Parser, Debug)]
#[command(
    name = "hermite-qmc",
    version,
    about = "QMC error analysis in weighted Hermite spaces"
)]
struct Cli {
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for generated point sets and random matrices.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest total degree for generated or transformed coefficients.
    #[arg(long, global = true)]
    max_degree: Option<u32>,
    /// Gauss–Hermite nodes per coordinate for quadrature estimates.
    #[arg(long, global = true, default_value_t = 32)]
    quad_order: usize,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, env = "HERMITE_QMC_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted norm of a coefficient file.
    Norm {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
    },
    /// Worst-case error report for a point set.
    Wce {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        points: PathBuf,
        /// `mehler` or `series:<m>`; defaults to Mehler for exponential weights.
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Root-mean-square worst-case error over i.i.d. Gaussian point sets.
    Rms {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Finite-horizon tractability diagnostics.
    Bounds {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// `α` for polynomial weights, `ω` for exponential ones.
        #[arg(long)]
        shape: f64,
        /// `power:<p>`, `const:<c>` or `geom:<q>`.
        #[arg(long, default_value = "power:2")]
        gamma: String,
        #[arg(long, default_value_t = 1024)]
        horizon: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Coefficients of `x ↦ f(Ux)` from those of `f`.
    Transform {
        /// `identity`, `bb`, `pca`, `householder`, `random` or `file:<path>`.
        #[arg(long)]
        transform: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        coeffs: PathBuf,
        /// Drop output entries with absolute value at most this.
        #[arg(long)]
        prune: Option<f64>,
    },
    /// Hermite coefficients of a built-in function.
    Coeffs {
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long)]
        dim: usize,
        /// Estimate by tensor Gauss–Hermite quadrature instead of the closed form.
        #[arg(long)]
        quadrature: bool,
    },
    /// Generate a point set.
    Points {
        #[command(flatten)]
        points: PointArgs,
    },
    /// Equal-weight QMC estimate of a function's Gaussian integral.
    Integrate {
        #[command(flatten)]
        function: FunctionArgs,
        /// Coefficient file to integrate instead of a built-in function.
        #[arg(long, conflicts_with = "function")]
        coeffs: Option<PathBuf>,
        /// Integrate `x ↦ f(Ux)` for this transform.
        #[arg(long)]
        transform: Option<String>,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Forward method versus Brownian bridge for `exp(Σ x_j/√d)`.
    PaperExample {
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<usize>>,
        #[arg(long)]
        alpha: Option<u32>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        skip: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct FunctionArgs {
    /// `exp1` (exp(x_1)), `expsum` (exp(Σ x_j/√d)) or `exp:<w_1>,…,<w_d>`.
    #[arg(long)]
    function: Option<String>,
}

#[derive(Args, Debug)]
struct PointArgs {
    /// `halton`, `iid` or `file:<path>`.
    #[arg(long, default_value = "halton")]
    generator: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Halton sequence offset.
    #[arg(long, default_value_t = 0)]
    skip: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Polynomial,
    Exponential,
}

/// An error caused by the invocation rather than the computation.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

/// Runs `f` and reclassifies any failure as a usage error.
fn input<T>(what: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| Usage(format!("{what}: {e:#}")).into())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_spec(path: &Path) -> Result<WeightSpec> {
    input("weight spec", || Ok(WeightSpec::from_json(&read(path)?)?))
}

fn load_coeffs(path: &Path, dim: Option<usize>) -> Result<CoeffMap> {
    input("coefficients", || {
        Ok(CoeffMap::from_csv(&read(path)?, dim)?)
    })
}

fn load_points(path: &Path) -> Result<PointSet> {
    input("points", || {
        let text = read(path)?;
        if text
            .lines()
            .all(|l| l.trim().is_empty() || l.starts_with('#'))
        {
            bail!("{} contains no points", path.display());
        }
        Ok(PointSet::from_csv(&text)?)
    })
}

fn parse_kernel(s: &str) -> Result<KernelMode> {
    if s == "mehler" {
        return Ok(KernelMode::Mehler);
    }
    match s.strip_prefix("series:").map(str::parse::<u32>) {
        Some(Ok(m)) => Ok(KernelMode::Series(m)),
        _ => usage(format!("kernel {s:?}: expected mehler or series:<m>")),
    }
}

fn parse_gamma(s: &str) -> Result<GammaRule> {
    input("gamma rule", || Ok(GammaRule::parse(s)?))
}

/// An integrand that may be called from several threads.
type Integrand = Box<dyn Fn(&[f64]) -> f64 + Sync + Send>;

/// A built-in test function together with its Gaussian mean.
struct Builtin {
    w: Vec<f64>,
}

impl Builtin {
    fn parse(id: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return usage("--dim must be at least 1");
        }
        let w = match id {
            "exp1" => (0..dim).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect(),
            "expsum" => vec![1.0 / (dim as f64).sqrt(); dim],
            _ => match id.strip_prefix("exp:") {
                Some(list) => {
                    let w: Vec<f64> = list
                        .split(',')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Usage(format!("function {id:?}: bad weight list")))?;
                    if w.len() != dim {
                        return usage(format!(
                            "function {id:?} has {} weights, --dim is {dim}",
                            w.len()
                        ));
                    }
                    w
                }
                None => {
                    return usage(format!(
                        "unknown function {id:?}; try exp1, expsum or exp:<w,...>"
                    ))
                }
            },
        };
        Ok(Builtin { w })
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>().exp()
    }

    /// `E[exp(wᵀX)] = exp(wᵀw/2)`.
    fn mean(&self) -> f64 {
        (0.5 * self.w.iter().map(|w| w * w).sum::<f64>()).exp()
    }
}

/// Resolves a `--transform` value. Householder needs the linear
/// coefficients of the function being transformed.
fn load_transform(
    spec: &str,
    dim: usize,
    linear: Option<&[f64]>,
    seed: u64,
) -> Result<OrthoMatrix> {
    if dim == 0 {
        return usage("--dim must be at least 1");
    }
    let construction = |kind| -> Result<OrthoMatrix> {
        Ok(orthogonal_from_construction(&construction_matrix(
            kind, dim,
        )?)?)
    };
    match spec {
        "identity" => Ok(OrthoMatrix::identity(dim)),
        "bb" => construction(ConstructionKind::BrownianBridge),
        "pca" => construction(ConstructionKind::Pca),
        "random" => Ok(hermite_qmc::random_orthogonal(dim, seed)?),
        "householder" => match linear {
            Some(v) => Ok(householder_from_linear(v)?),
            None => usage("householder needs coefficients to read the linear part from"),
        },
        _ => match spec.strip_prefix("file:") {
            Some(path) => {
                let u = input("transform matrix", || {
                    Ok(OrthoMatrix::from_csv(&read(Path::new(path))?)?)
                })?;
                if u.dim() != dim {
                    return usage(format!(
                        "transform matrix is {0}x{0}, --dim is {dim}",
                        u.dim()
                    ));
                }
                Ok(u)
            }
            None => usage(format!(
                "transform {spec:?}: expected identity, bb, pca, householder, random or file:<path>"
            )),
        },
    }
}

/// `f̂(e_j)` for `j = 1..d`.
fn linear_part(c: &CoeffMap) -> Vec<f64> {
    (0..c.dim())
        .map(|j| c.get(&MultiIndex::unit(c.dim(), j)))
        .collect()
}

fn make_points(args: &PointArgs, seed: u64) -> Result<PointSet> {
    if let Some(path) = args.generator.strip_prefix("file:") {
        let p = load_points(Path::new(path))?;
        if let Some(d) = args.dim.filter(|&d| d != p.dim()) {
            return usage(format!(
                "point file has dimension {}, --dim is {d}",
                p.dim()
            ));
        }
        return Ok(p);
    }
    let (Some(n), Some(d)) = (args.n, args.dim) else {
        return usage("generated point sets need --n and --dim");
    };
    if n == 0 || d == 0 {
        return usage("--n and --dim must be at least 1");
    }
    match args.generator.as_str() {
        "halton" => Ok(pointset_halton_mapped(n, d, args.skip)?),
        "iid" => Ok(pointset_gaussian_iid(n, d, seed)?),
        g => usage(format!(
            "generator {g:?}: expected halton, iid or file:<path>"
        )),
    }
}

fn run(cli: &Cli) -> Result<String> {
    let exec = Exec::Parallel;
    match &cli.command {
        Command::Norm { spec, coeffs } => {
            let spec = load_spec(spec)?;
            let c = load_coeffs(coeffs, Some(spec.dim()))?;
            let n = norm(&spec, &c)?;
            match &n.overflow_at {
                Some(k) => {
                    eprintln!("norm overflows at index {:?}", k.entries());
                    Ok("inf\n".into())
                }
                None => Ok(format!("{}\n", n.value)),
            }
        }
        Command::Wce {
            spec,
            points,
            kernel,
            format,
        } => {
            let spec = load_spec(spec)?;
            let p = load_points(points)?;
            if p.dim() != spec.dim() {
                return usage(format!(
                    "points have dimension {}, spec has {}",
                    p.dim(),
                    spec.dim()
                ));
            }
            let mode = match kernel {
                Some(k) => parse_kernel(k)?,
                None => KernelMode::default_for(&spec),
            };
            if mode == KernelMode::Mehler && spec.family() != Family::Exponential {
                return usage("the mehler kernel needs exponential weights");
            }
            let report = ErrorReport::compute(&spec, &p, mode, exec)?;
            if report.wce_clamped {
                eprintln!(
                    "warning: squared worst-case error was negative from rounding and clamped to 0"
                );
            }
            Ok(match format {
                Format::Json => report.to_json() + "\n",
                _ => report.to_csv(),
            })
        }
        Command::Rms { spec, n } => {
            let spec = load_spec(spec)?;
            if *n == 0 {
                return usage("--n must be at least 1");
            }
            Ok(format!("{}\n", rms_error(&spec, *n)?))
        }
        Command::Bounds {
            family,
            shape,
            gamma,
            horizon,
            epsilon,
            format,
        } => {
            let family = match family {
                FamilyArg::Polynomial => Family::Polynomial,
                FamilyArg::Exponential => Family::Exponential,
            };
            let rule = parse_gamma(gamma)?;
            let report = input("bounds", || {
                Ok(tractability_report(
                    family, *shape, rule, *horizon, *epsilon,
                )?)
            })?;
            Ok(match format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Csv => {
                    let mut s =
                        format!("{CSV_VERSION_LINE}\nd,gamma_sum,ln_n_min_upper,ln_n_min_lower\n");
                    for c in &report.checkpoints {
                        let lower = c
                            .ln_n_min_lower
                            .map(|v| format!("{v:e}"))
                            .unwrap_or_default();
                        writeln!(
                            s,
                            "{},{:e},{:e},{}",
                            c.d, c.gamma_sum, c.ln_n_min_upper, lower
                        )?;
                    }
                    s
                }
                Format::Text => report.to_text(),
            })
        }
        Command::Transform {
            transform,
            dim,
            coeffs,
            prune,
        } => {
            let c = load_coeffs(coeffs, Some(*dim))?;
            let lin = linear_part(&c);
            let u = load_transform(transform, *dim, Some(&lin), cli.seed)?;
            if transform == "householder" {
                eprintln!(
                    "householder from the linear coefficients of {}",
                    coeffs.display()
                );
            }
            let m = cli.max_degree.unwrap_or(c.max_degree());
            let mut t = apply_transform(&u, &c, m, exec)?;
            if let Some(tol) = prune {
                t = t.pruned(*tol);
            }
            Ok(t.to_csv())
        }
        Command::Coeffs {
            function,
            dim,
            quadrature,
        } => {
            let Some(id) = &function.function else {
                return usage("--function is required");
            };
            let f = Builtin::parse(id, *dim)?;
            let m = cli.max_degree.unwrap_or(8);
            let c = if *quadrature {
                estimate_coeffs(|x| f.eval(x), *dim, m, cli.quad_order, exec)?
            } else {
                analytic_coeffs_exp(&f.w, m)?
            };
            Ok(c.to_csv())
        }
        Command::Points { points } => Ok(make_points(points, cli.seed)?.to_csv()),
        Command::Integrate {
            function,
            coeffs,
            transform,
            points,
        } => {
            let p = make_points(points, cli.seed)?;
            let d = p.dim();
            let (f, mean): (Integrand, f64) = match (&function.function, coeffs) {
                (Some(id), None) => {
                    let b = Builtin::parse(id, d)?;
                    let mean = b.mean();
                    (Box::new(move |x| b.eval(x)), mean)
                }
                (None, Some(path)) => {
                    let c = load_coeffs(path, Some(d))?;
                    let mean = c.get(&MultiIndex::zeros(d));
                    (
                        Box::new(move |x| eval_expansion(&c, x).unwrap_or(f64::NAN)),
                        mean,
                    )
                }
                _ => return usage("give either --function or --coeffs"),
            };
            let estimate = match transform {
                Some(t) => {
                    if t == "householder" {
                        return usage("integrate does not support the householder transform");
                    }
                    let u = load_transform(t, d, None, cli.seed)?;
                    qmc_integrate(|x| f(&u.apply(x)), &p, exec)?
                }
                None => qmc_integrate(&f, &p, exec)?,
            };
            Ok(format!(
                "{CSV_VERSION_LINE}\nn,d,estimate,exact,abs_error\n{},{},{:e},{:e},{:e}\n",
                p.len(),
                d,
                estimate,
                mean,
                (estimate - mean).abs()
            ))
        }
        Command::PaperExample {
            dims,
            points,
            alpha,
            gamma,
            skip,
        } => {
            let mut config = ExperimentConfig::default();
            if let Some(v) = dims {
                config.dims = v.clone();
            }
            if let Some(v) = points {
                config.points = v.clone();
            }
            if let Some(a) = alpha {
                config.alpha = *a;
            }
            if let Some(g) = gamma {
                config.gamma = parse_gamma(g)?;
            }
            if let Some(s) = skip {
                config.skip = *s;
            }
            Ok(experiment_to_csv(&run_forward_vs_bb_experiment(
                &config, exec,
            )?))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli).and_then(|text| emit(cli.out.as_deref(), &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
