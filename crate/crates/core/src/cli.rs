//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or numerical
//! failure, 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{corpus_source, run_corpus, TolerancePolicy};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::growth::{
    convergence_exponent, hyper_order_estimate, order_estimate, GrowthProfile, OrderEstimate,
    ZERO_RADIUS_CAP,
};
use crate::indicator::{lemma2_check, Lemma2Report};
use crate::numeric::log_grid;
use crate::odelab::{
    classify, gundersen_check, kwon_check, residual_sweep, wang_laine_check, GundersenReport,
    HypothesisReport, KwonReport, LemmaCheckConfig, OdeInstance, ResidualSweep, WangLaineReport,
};
use crate::radialsets::{DensityProfile, RadialSet};
use crate::report::{emit_report, to_json, Artifact};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "growthlab",
    version,
    about = "Growth of entire functions and second-order linear ODE checks"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of standard output.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Order, hyper-order and zero exponent of one function.
    Analyze {
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Residual sweep and hypothesis report for one equation.
    Verify {
        /// Instance JSON; a shipped corpus label (e.g. eg2.json) also works.
        #[arg(long)]
        instance: PathBuf,
        /// Residual radii.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        residual_tol: f64,
    },
    /// Runs the shipped corpus.
    Corpus {
        #[arg(long, default_value_t = 1e-9)]
        residual_tol: f64,
    },
    /// Logarithmic-derivative, minimum-ratio, large-modulus and indicator checks.
    Lemmas {
        /// Function under test (defaults to the instance's solution).
        #[arg(long)]
        expr: Option<String>,
        /// Instance whose `A` factorization drives the indicator check.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Order used by the derivative bound; estimated when omitted.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        rmin: f64,
        #[arg(long, default_value_t = 1e4)]
        rmax: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Radial-set calculator: sets are written `a:b,c:d`.
    Sets {
        #[arg(long)]
        set: String,
        #[arg(long)]
        with: Option<String>,
        #[arg(long, value_enum, default_value_t = SetOp::Identity)]
        op: SetOp,
        /// Bounds for `complement`.
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        /// Radii for the log-density profile.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, default_value_t = 10.0)]
    rmin: f64,
    #[arg(long, default_value_t = 1e6)]
    rmax: f64,
    #[arg(long, default_value_t = 24)]
    points: usize,
    /// Explicit radii, overriding rmin/rmax/points.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
}

impl GridArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        make_grid(self.radii.as_deref(), self.rmin, self.rmax, self.points)
    }
}

fn make_grid(radii: Option<&[f64]>, rmin: f64, rmax: f64, points: usize) -> Result<Vec<f64>> {
    if let Some(r) = radii {
        return Ok(r.to_vec());
    }
    if !(rmin > 0.0 && rmax > rmin && points >= 2) {
        return Err(Error::Invalid(format!(
            "grid needs 0 < rmin < rmax and points >= 2 (got {rmin}, {rmax}, {points})"
        )));
    }
    Ok(log_grid(rmin, rmax, points))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SetOp {
    Identity,
    Union,
    Intersect,
    Complement,
}

/// Parses argv (program name first), runs, and prints to the process streams.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`cli_main`] with explicit output streams.
pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_PASS
            };
            return code;
        }
    };
    let pool = match cli.jobs {
        Some(0) => {
            let _ = writeln!(err, "error: --jobs must be at least 1");
            return EXIT_USAGE;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAIL;
        }
    };
    let outcome = pool.install(|| dispatch(&cli));
    match outcome {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            if let Some(dir) = &cli.out {
                if let Err(e) = emit_report(dir, &o.artifacts) {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_USAGE;
                }
            }
            if o.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Parse(_)
                | Error::Invalid(_)
                | Error::Json(_)
                | Error::Io { .. }
                | Error::Precondition(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            }
        }
    }
}

struct Outcome {
    stdout: String,
    artifacts: Vec<Artifact>,
    pass: bool,
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Analyze { expr, grid } => analyze(cli, expr, grid),
        Command::Verify {
            instance,
            radii,
            samples,
            residual_tol,
        } => verify(cli, instance, radii, *samples, *residual_tol),
        Command::Corpus { residual_tol } => corpus(cli, *residual_tol),
        Command::Lemmas {
            expr,
            instance,
            rho,
            epsilon,
            theta,
            rmin,
            rmax,
            points,
            radii,
        } => {
            let grid = make_grid(radii.as_deref(), *rmin, *rmax, *points)?;
            lemmas(
                cli,
                expr.as_deref(),
                instance.as_deref(),
                *rho,
                *epsilon,
                *theta,
                &grid,
            )
        }
        Command::Sets {
            set,
            with,
            op,
            lo,
            hi,
            radii,
        } => sets(cli, set, with.as_deref(), *op, *lo, *hi, radii.as_deref()),
    }
}

#[derive(Serialize)]
struct Analysis {
    expr: String,
    order: OrderEstimate,
    hyper_order: OrderEstimate,
    convergence_exponent: Option<OrderEstimate>,
}

fn analyze(cli: &Cli, text: &str, grid: &GridArgs) -> Result<Outcome> {
    let f = parse(text)?;
    let radii = grid.grid()?;
    let order = order_estimate(&f, &radii)?;
    let want_profile = cli.format == Some(Format::Csv) || cli.out.is_some();
    let profile = if want_profile {
        Some(GrowthProfile::compute(&f, &radii, 256)?)
    } else {
        None
    };
    let mut artifacts = Vec::new();
    if cli.out.is_some() {
        let hyper_order = hyper_order_estimate(&f, &radii)?;
        let zero_grid: Vec<f64> = radii
            .iter()
            .copied()
            .filter(|&r| r <= ZERO_RADIUS_CAP)
            .collect();
        let convergence_exponent = if zero_grid.len() >= 3 {
            convergence_exponent(&f, &zero_grid).ok()
        } else {
            None
        };
        let analysis = Analysis {
            expr: f.to_string(),
            order: order.clone(),
            hyper_order,
            convergence_exponent,
        };
        artifacts.push(Artifact::json("analysis.json", &analysis)?);
    }
    if let Some(p) = &profile {
        artifacts.push(Artifact::new("profile.csv", p.to_csv()));
        artifacts.push(Artifact::new("plot.csv", p.plot_csv()));
    }
    let stdout = match (cli.format, &profile) {
        (Some(Format::Csv), Some(p)) => p.to_csv(),
        _ => to_json(&order)?,
    };
    Ok(Outcome {
        stdout,
        artifacts,
        pass: true,
    })
}

fn load_instance(path: &Path) -> Result<OdeInstance> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(source) => {
            let builtin = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(corpus_source)
                .filter(|_| source.kind() == std::io::ErrorKind::NotFound);
            match builtin {
                Some(t) => t.to_string(),
                None => {
                    return Err(Error::Io {
                        path: path.to_path_buf(),
                        source,
                    })
                }
            }
        }
    };
    OdeInstance::from_json(&text)
}

#[derive(Serialize)]
struct Verification {
    residual: ResidualSweep,
    residual_tol: f64,
    residual_pass: bool,
    hypotheses: HypothesisReport,
}

fn verify(cli: &Cli, path: &Path, radii: &[f64], samples: usize, tol: f64) -> Result<Outcome> {
    let inst = load_instance(path)?;
    let sweep = residual_sweep(&inst, radii, samples)?;
    let hypotheses = classify(&inst, &TolerancePolicy::default().order_grid)?;
    let pass = sweep.max_rel() <= tol;
    let csv = sweep.to_csv();
    let v = Verification {
        residual: sweep,
        residual_tol: tol,
        residual_pass: pass,
        hypotheses,
    };
    let json = to_json(&v)?;
    let stdout = match cli.format {
        Some(Format::Csv) => csv.clone(),
        Some(Format::Json) => json.clone(),
        None => format!("{csv}\n{json}"),
    };
    Ok(Outcome {
        stdout,
        artifacts: vec![
            Artifact::new("residual.csv", csv),
            Artifact::json("hypotheses.json", &v.hypotheses)?,
            Artifact::new("verify.json", json),
        ],
        pass,
    })
}

fn corpus(cli: &Cli, residual_tol: f64) -> Result<Outcome> {
    let policy = TolerancePolicy {
        residual_tol,
        ..TolerancePolicy::default()
    };
    let summary = run_corpus(&policy)?;
    let json = to_json(&summary)?;
    let csv = summary.to_csv();
    let stdout = match cli.format {
        Some(Format::Json) => json.clone(),
        Some(Format::Csv) => csv.clone(),
        None => summary.to_table(),
    };
    Ok(Outcome {
        stdout,
        artifacts: vec![
            Artifact::new("corpus.json", json),
            Artifact::new("corpus.csv", csv),
        ],
        pass: summary.all_pass(),
    })
}

#[derive(Serialize)]
struct LemmaSuite {
    expr: String,
    rho: Option<f64>,
    gundersen: GundersenReport,
    kwon: KwonReport,
    wang_laine: WangLaineReport,
    lemma2: Option<Lemma2Report>,
}

fn lemmas(
    cli: &Cli,
    expr: Option<&str>,
    instance: Option<&Path>,
    rho: Option<f64>,
    epsilon: f64,
    theta: f64,
    grid: &[f64],
) -> Result<Outcome> {
    let inst = instance.map(load_instance).transpose()?;
    let f: Expr = match (expr, &inst) {
        (Some(t), _) => parse(t)?,
        (None, Some(i)) => {
            i.f.clone()
                .ok_or_else(|| Error::Invalid(format!("{}: no solution to test", i.label)))?
        }
        (None, None) => return Err(Error::Invalid("lemmas needs --expr or --instance".into())),
    };
    let rho = match rho {
        Some(r) => Some(r),
        None => order_estimate(&f, &TolerancePolicy::default().order_grid)?.value,
    };
    let cfg = LemmaCheckConfig {
        epsilon,
        ..LemmaCheckConfig::default()
    };
    let gundersen = gundersen_check(&f, &cfg, rho, grid)?;
    let kwon = kwon_check(&f, grid)?;
    let wang_laine = wang_laine_check(&f, &cfg, grid)?;
    let lemma2 = match inst.as_ref().and_then(|i| i.factorization.as_ref()) {
        Some(fac) => Some(lemma2_check(fac, theta, epsilon, grid)?),
        None => None,
    };
    let pass = kwon.missing.is_empty()
        && !wang_laine.pass_set.is_empty()
        && lemma2.as_ref().is_none_or(|l| l.pass_radius.is_some());
    let suite = LemmaSuite {
        expr: f.to_string(),
        rho,
        gundersen,
        kwon,
        wang_laine,
        lemma2,
    };
    let json = to_json(&suite)?;
    let mut artifacts = vec![Artifact::new("lemmas.json", json.clone())];
    let density_csv = suite
        .wang_laine
        .density
        .as_ref()
        .map(DensityProfile::to_csv);
    if let Some(csv) = &density_csv {
        artifacts.push(Artifact::new("large_modulus_density.csv", csv.clone()));
    }
    let stdout = match (cli.format, density_csv) {
        (Some(Format::Csv), Some(csv)) => csv,
        _ => json,
    };
    Ok(Outcome {
        stdout,
        artifacts,
        pass,
    })
}

fn parse_set(text: &str) -> Result<RadialSet> {
    let mut list = Vec::new();
    for piece in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = piece
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("interval `{piece}` is not of the form a:b")))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad number `{s}` in `{piece}`")))
        };
        list.push([num(a)?, num(b)?]);
    }
    RadialSet::from_intervals(list)
}

#[derive(Serialize)]
struct SetResult {
    set: RadialSet,
    log_measure: f64,
    density: Option<DensityProfile>,
}

fn sets(
    cli: &Cli,
    set: &str,
    with: Option<&str>,
    op: SetOp,
    lo: Option<f64>,
    hi: Option<f64>,
    radii: Option<&[f64]>,
) -> Result<Outcome> {
    let a = parse_set(set)?;
    let other = || -> Result<RadialSet> {
        parse_set(with.ok_or_else(|| Error::Invalid("this operation needs --with".into()))?)
    };
    let s = match op {
        SetOp::Identity => a,
        SetOp::Union => a.union(&other()?),
        SetOp::Intersect => a.intersect(&other()?),
        SetOp::Complement => match (lo, hi) {
            (Some(lo), Some(hi)) => a.complement_within(lo, hi)?,
            _ => return Err(Error::Invalid("complement needs --lo and --hi".into())),
        },
    };
    let density = radii.map(|r| s.log_density_profile(r)).transpose()?;
    let result = SetResult {
        log_measure: s.log_measure(),
        set: s,
        density,
    };
    let json = to_json(&result)?;
    let stdout = match (cli.format, &result.density) {
        (Some(Format::Csv), Some(d)) => d.to_csv(),
        _ => json.clone(),
    };
    Ok(Outcome {
        stdout,
        artifacts: vec![Artifact::new("sets.json", json)],
        pass: true,
    })
}
