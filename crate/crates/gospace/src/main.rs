use std::io::Write;
use std::path::PathBuf;
use std::process::exit;

use clap::{Args, Parser, Subcommand};

use gospace::catalog::{self, CatalogId, Params};
use gospace::homspace::{metric_operator, MetricSpec, Submodule};
use gospace::report::{self, AnalyzeOptions};
use gospace::{flow, Error, Tolerances};

/// Numerical certification of geodesic-orbit homogeneous spaces and the
/// integrability invariants of their invariant-function algebras.
#[derive(Parser)]
#[command(name = "gospace", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the machine-readable catalog manifest.
    List(ListArgs),
    /// Run the full verification report for one catalog entry.
    Analyze(AnalyzeArgs),
    /// Verdict summary over the supported classification rows.
    Table1(Table1Args),
    /// Export a homogeneous geodesic trajectory as CSV.
    Trajectory(TrajectoryArgs),
}

#[derive(Args)]
struct ListArgs {
    /// Emit the manifest as JSON.
    #[arg(long)]
    json: bool,
    /// Show a single classification row.
    #[arg(long)]
    row: Option<u8>,
}

#[derive(Args)]
struct SpaceArgs {
    /// Classification row id (row1 .. row15).
    #[arg(long, value_name = "ID", conflicts_with = "pair")]
    row: Option<String>,
    /// Pair id (sphere, sp_sphere, su_sphere, cp_odd, flag, flag_su, so_triv).
    #[arg(long, value_name = "ID")]
    pair: Option<String>,
    /// Parameter n (defaults to the entry's minimal value).
    #[arg(long)]
    n: Option<usize>,
    /// Parameter r (rows 10 and 11 only).
    #[arg(long)]
    r: Option<usize>,
}

impl SpaceArgs {
    fn resolve(&self) -> Result<(CatalogId, Params), Error> {
        let text = match (&self.row, &self.pair) {
            (Some(r), None) => r,
            (None, Some(p)) => p,
            _ => {
                return Err(Error::InvalidInput(
                    "pass exactly one of --row or --pair".into(),
                ))
            }
        };
        let id: CatalogId = text.parse()?;
        let entry = catalog::manifest_entry(id)
            .ok_or_else(|| Error::UnknownCatalog(text.clone()))?;
        if !entry.supported {
            return Err(Error::UnsupportedAlgebra(format!(
                "{text} is listed but unsupported: {}",
                entry.unsupported_reason.unwrap_or("")
            )));
        }
        let params = Params {
            n: self.n.unwrap_or(entry.minimal.n),
            r: self.r.unwrap_or(entry.minimal.r),
        };
        Ok((id, params))
    }
}

#[derive(Args)]
struct MetricArgs {
    /// Fiber scaling of the lambda-deformation (default: normal metric).
    #[arg(long, conflicts_with = "fiber")]
    lambda: Option<f64>,
    /// Fiber operator, e.g. diag:1,2,3 or diag:1,2,3:0.5 for lambda_m.
    #[arg(long, value_name = "SPEC")]
    fiber: Option<String>,
}

impl MetricArgs {
    fn resolve(&self) -> Result<MetricSpec, Error> {
        match (&self.lambda, &self.fiber) {
            (Some(l), None) => Ok(MetricSpec::Lambda(*l)),
            (None, Some(f)) => report::parse_fiber_spec(f),
            (None, None) => Ok(MetricSpec::Normal),
            _ => unreachable!("clap enforces the conflict"),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    metric: MetricArgs,
    /// Random directions per sampled quantifier.
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, env = "GOSPACE_SEED", default_value_t = 1729)]
    seed: u64,
    /// Emit the full JSON report instead of the summary.
    #[arg(long)]
    json: bool,
    #[arg(long, value_name = "TOL", default_value_t = 1e-8)]
    tol_accept: f64,
    #[arg(long, value_name = "TOL", default_value_t = 1e-4)]
    tol_reject: f64,
    /// Skip the trajectory section.
    #[arg(long)]
    no_flow: bool,
    /// Write the JSON report to a file (UTF-8).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Table1Args {
    /// Run every supported row (the default).
    #[arg(long, default_value_t = true)]
    all: bool,
    #[arg(long, env = "GOSPACE_SEED", default_value_t = 1729)]
    seed: u64,
    /// Emit CSV.
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    /// Emit JSON.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long, default_value_t = 200.0)]
    t_max: f64,
    #[arg(long, default_value_t = 4096)]
    steps: usize,
    #[arg(long, env = "GOSPACE_SEED", default_value_t = 1729)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::UnknownCatalog(_)
        | Error::ParamOutOfRange(_)
        | Error::UnsupportedAlgebra(_)
        | Error::InvalidInput(_)
        | Error::InvalidMetric(_)
        | Error::IndefiniteForm(_)
        | Error::InapplicableRecipe(_)
        | Error::MissingBasePoint(_)
        | Error::NotGeodesicOrbit(_) => 64,
        _ => 1,
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
        }
    }
}

fn cmd_list(args: &ListArgs) -> Result<i32, Error> {
    let mut entries = catalog::manifest();
    if let Some(row) = args.row {
        entries.retain(|e| e.id == format!("row{row}"));
        if entries.is_empty() {
            return Err(Error::UnknownCatalog(format!("row{row}")));
        }
    }
    if args.json {
        #[derive(serde::Serialize)]
        struct Manifest<'a> {
            tool_version: &'a str,
            schema_version: u32,
            entries: &'a [catalog::ManifestEntry],
        }
        let doc = Manifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            schema_version: report::SCHEMA_VERSION,
            entries: &entries,
        };
        println!("{}", report::to_json(&doc));
    } else {
        for e in &entries {
            let status = if e.supported {
                format!("supported, minimal n={} r={}", e.minimal.n, e.minimal.r)
            } else {
                format!("UNSUPPORTED ({})", e.unsupported_reason.unwrap_or(""))
            };
            let base = if e.has_base_point { ", base point" } else { "" };
            println!("{:<9} {:<6} {:<44} {:<14} {}{}", e.id, e.kind, e.chain, e.constraints, status, base);
        }
    }
    Ok(0)
}

fn verdict_str(v: gospace::goverify::Verdict) -> &'static str {
    match v {
        gospace::goverify::Verdict::Go => "GO",
        gospace::goverify::Verdict::NotGo => "NOT_GO",
        gospace::goverify::Verdict::Indeterminate => "INDETERMINATE",
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32, Error> {
    let (id, params) = args.space.resolve()?;
    let spec = args.metric.resolve()?;
    let tol = Tolerances {
        accept_tol: args.tol_accept,
        reject_tol: args.tol_reject,
        ..Tolerances::default()
    };
    let opts = AnalyzeOptions {
        n_samples: args.samples,
        seed: args.seed,
        tol,
        with_flow: !args.no_flow,
    };
    let rep = report::analyze(id, &params, &spec, &opts)?;
    let json = report::to_json(&rep);
    if let Some(out) = &args.out {
        std::fs::write(out, &json).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    if args.json {
        println!("{json}");
    } else {
        println!("{} (n={}, r={})", rep.label, rep.params.n, rep.params.r);
        let d = &rep.structural.dims;
        println!(
            "  dims: g={} h={} l={} m={}   metric {}   natural-reductivity residual {:.3e}",
            d.g, d.h, d.l, d.m, rep.metric, rep.structural.natural_reductivity_residual
        );
        let go = &rep.go;
        let gordon = go
            .gordon
            .as_ref()
            .map(|g| format!(", gordon {:.3e}", g.max_residual))
            .unwrap_or_default();
        println!(
            "  go: {} (lemma {:.3e}, centrality {:.3e}{})   criteria agree: {}",
            verdict_str(go.verdict),
            go.lemma.max_residual,
            go.centrality.max_residual,
            gordon,
            go.agree
        );
        let c = &rep.complexity;
        println!(
            "  invariants: ddim={} dind={} complexity={} (g_x={}, h_x={})   consistent: {}",
            c.ddim, c.dind, c.complexity, c.generic.g_x, c.generic.h_x, c.consistent
        );
        for fam in &rep.poisson {
            let completeness = match (&fam.completeness, &fam.completeness_note) {
                (Some(c), _) => format!(
                    "ddim_B={} target={} complete={}",
                    c.ddim_b, c.target, c.complete
                ),
                (None, Some(note)) => note.clone(),
                _ => String::new(),
            };
            println!(
                "  family {}: [{}]   commutativity {:.3e}   {}",
                fam.recipe,
                fam.members.join(", "),
                fam.commutativity.max_residual,
                completeness
            );
        }
        if let Some(f) = &rep.flow {
            let planarity: Vec<String> = f.planarity.iter().map(|p| format!("{p:.3e}")).collect();
            println!(
                "  flow: {} directions, unit-norm drift {:.3e}, planarity [{}], closure dims {:?}",
                f.n_directions,
                f.max_unit_norm_drift,
                planarity.join(", "),
                f.closure_dims
            );
        }
        println!(
            "  verdict: consistent={} indeterminate={}",
            rep.consistent, rep.indeterminate
        );
    }
    Ok(report::exit_code(&rep))
}

fn cmd_table1(args: &Table1Args) -> Result<i32, Error> {
    let _ = args.all;
    let tol = Tolerances::default();
    let rep = report::table1(args.seed, &tol)?;
    let text = if args.csv {
        rep.to_csv()
    } else if args.json {
        report::to_json(&rep)
    } else {
        let mut t = String::new();
        for row in &rep.rows {
            let verdicts: Vec<String> = row
                .verdicts
                .iter()
                .map(|(l, v)| format!("l={l}:{}", verdict_str(*v)))
                .collect();
            t.push_str(&format!(
                "{:<6} {:<28} {}  lambda-independent={} agree={} ddim={} dind={} c={}\n",
                row.row,
                row.label,
                verdicts.join(" "),
                row.lambda_independent,
                row.criteria_agree,
                row.ddim,
                row.dind,
                row.complexity
            ));
        }
        t
    };
    write_output(&args.out, &text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    if args.out.is_some() {
        println!("wrote {} rows", rep.rows.len());
    }
    Ok(rep.exit_code())
}

fn cmd_trajectory(args: &TrajectoryArgs) -> Result<i32, Error> {
    let (id, params) = args.space.resolve()?;
    let spec = args.metric.resolve()?;
    let tol = Tolerances::default();
    let space = catalog::build_space_with(id, &params, &tol)?;
    let metric = metric_operator(&space, &spec)?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(args.seed);
    let x = space.random_unit_in(Submodule::V, &mut rng);
    let traj = flow::orbit_trajectory(&space, &metric, &x, args.t_max, args.steps, &tol)?;
    let mut buf = Vec::new();
    traj.to_csv(&mut buf)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let text = String::from_utf8(buf).expect("csv is utf-8");
    write_output(&args.out, &text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    if args.out.is_some() {
        let est = flow::closure_dim_estimate(&space, &traj.generator)?;
        println!(
            "wrote {} points; closure dimension estimate {}",
            traj.points.len(),
            est.dim
        );
    }
    Ok(0)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            exit(code);
        }
    };
    let result = match &cli.cmd {
        Cmd::List(args) => cmd_list(args),
        Cmd::Analyze(args) => cmd_analyze(args),
        Cmd::Table1(args) => cmd_table1(args),
        Cmd::Trajectory(args) => cmd_trajectory(args),
    };
    match result {
        Ok(code) => exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            exit(error_exit_code(&err));
        }
    }
}
