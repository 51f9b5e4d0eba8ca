use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cluster_quake::earthquake::{dquake, inverse_quake, limit_g, limit_l, quake, DerivativeMethod};
use cluster_quake::grid::{plot_grid, write_csv, GridSpec};
use cluster_quake::horocycle::{conjugacy_residual, horocycle_flow, lift};
use cluster_quake::pattern::{default_cap, fan};
use cluster_quake::points::{PositivePoint, TropicalPoint, DEFAULT_TOL};
use cluster_quake::verify::{verify, Suite, VerifyOptions};
use cluster_quake::{
    build_cartan_seed, enumerate, enumerate_type, DynkinType, EnumerateOptions, Error,
    ExchangeMatrix, ExchangePattern, Orientation, VertexId,
};

#[derive(Parser, Debug)]
#[command(name = "cluster-quake", version, about = "Cluster mutation patterns and cluster earthquake maps")]
struct Cli {
    /// Finite Dynkin type, e.g. A2, G2, A1xA2. Comma-separated lists are accepted by `verify`.
    #[arg(long = "type", global = true)]
    ty: Option<String>,

    /// Exchange matrix as JSON `{"n":..,"entries":[[..]],"d":[..]}`, or a path to such a file.
    #[arg(long, global = true, conflicts_with = "ty")]
    matrix: Option<String>,

    #[arg(long, global = true, default_value = "linear")]
    orientation: String,

    /// Leave relabeling edges out of the exchange graph.
    #[arg(long, global = true)]
    no_permutations: bool,

    /// Chart (vertex id) in which input coordinates are given.
    #[arg(long, global = true, default_value_t = 0)]
    chart: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LimitMode {
    #[value(name = "L")]
    L,
    #[value(name = "g")]
    G,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the initial exchange matrix.
    Cartan,
    /// Enumerate the exchange graph.
    Enumerate {
        /// Full JSON dump instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Maximal cones of the fan, generators as columns.
    Fan,
    /// E(g0, L).
    Quake {
        /// Positive coordinates; all ones if omitted.
        #[arg(long, allow_hyphen_values = true)]
        g0: Option<String>,
        #[arg(long = "L", allow_hyphen_values = true)]
        l: String,
    },
    /// The tropical point L with E(g0, L) = g.
    Inverse {
        /// Positive coordinates; all ones if omitted.
        #[arg(long, allow_hyphen_values = true)]
        g0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Derivative of t -> E(g, tL) at t = 0+.
    Dquake {
        /// Positive coordinates; all ones if omitted.
        #[arg(long, allow_hyphen_values = true)]
        g: Option<String>,
        #[arg(long = "L", allow_hyphen_values = true)]
        l: String,
        #[arg(long, default_value = "analytic")]
        method: String,
    },
    /// Asymptotic limits over every maximal cone.
    Limits {
        #[arg(long, value_enum)]
        mode: LimitMode,
        /// Positive coordinates; all ones if omitted.
        #[arg(long, allow_hyphen_values = true)]
        g0: Option<String>,
        #[arg(long, default_value_t = 1000.0)]
        t: f64,
        /// log X(g) = (M, ..., M) for mode g.
        #[arg(long = "M", default_value_t = 30.0)]
        m: f64,
    },
    /// Horocycle flow conjugacy residual for one (g, L, t).
    Horocycle {
        /// Positive coordinates; all ones if omitted.
        #[arg(long, allow_hyphen_values = true)]
        g: Option<String>,
        #[arg(long = "L", allow_hyphen_values = true)]
        l: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Rank-2 grid sweep of E(g0, -): columns x1,x2,cone,logX1,logX2,u1,u2.
    PlotGrid {
        /// Positive coordinates; all ones if omitted.
        #[arg(long, allow_hyphen_values = true)]
        g0: Option<String>,
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["A", "B"], default_values_t = [-6.0, 6.0])]
        range: Vec<f64>,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
    },
    /// Seeded invariant suites. Exit status 1 if any check fails.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

fn parse_coords(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad coordinate {t:?} in {s:?}"))
        })
        .collect()
}

fn options(cli: &Cli) -> EnumerateOptions {
    EnumerateOptions {
        cap: default_cap(),
        include_permutations: !cli.no_permutations,
    }
}

fn orientation(cli: &Cli) -> Result<Orientation> {
    Ok(cli.orientation.parse::<Orientation>()?)
}

fn read_matrix(arg: &str) -> Result<ExchangeMatrix> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    Ok(ExchangeMatrix::from_json(&text)?)
}

fn seed_matrix(cli: &Cli) -> Result<ExchangeMatrix> {
    match &cli.matrix {
        Some(m) => read_matrix(m),
        None => {
            let ty: DynkinType = cli.ty.as_deref().unwrap_or("A2").parse()?;
            Ok(build_cartan_seed(&ty, orientation(cli)?)?)
        }
    }
}

fn explain(e: Error) -> anyhow::Error {
    match e {
        Error::CapExceeded { cap, partial } => anyhow!(
            "enumeration budget of {cap} vertices exceeded ({} seen); is the type finite? \
             raise CLUSTER_QUAKE_CAP to continue",
            partial.len()
        ),
        other => other.into(),
    }
}

fn pattern_of(cli: &Cli, ty: Option<&str>) -> Result<ExchangePattern> {
    match (&cli.matrix, ty) {
        (Some(m), _) => enumerate(&read_matrix(m)?, options(cli)).map_err(explain),
        (None, ty) => {
            let ty: DynkinType = ty.unwrap_or("A2").parse()?;
            enumerate_type(&ty, orientation(cli)?, options(cli)).map_err(explain)
        }
    }
}

fn pattern(cli: &Cli) -> Result<ExchangePattern> {
    pattern_of(cli, cli.ty.as_deref())
}

fn chart(cli: &Cli, p: &ExchangePattern) -> Result<VertexId> {
    let v = VertexId(cli.chart);
    p.vertex(v)?;
    Ok(v)
}

fn positive(cli: &Cli, p: &ExchangePattern, s: Option<&String>) -> Result<PositivePoint> {
    let x = match s {
        Some(s) => parse_coords(s)?,
        None => vec![1.0; p.rank()],
    };
    check_rank(p, &x)?;
    Ok(PositivePoint::from_values(chart(cli, p)?, &x)?)
}

fn tropical(cli: &Cli, p: &ExchangePattern, s: &str) -> Result<TropicalPoint> {
    let x = parse_coords(s)?;
    check_rank(p, &x)?;
    Ok(TropicalPoint::new(chart(cli, p)?, x)?)
}

fn check_rank(p: &ExchangePattern, x: &[f64]) -> Result<()> {
    if x.len() != p.rank() {
        bail!("expected {} coordinates, got {}", p.rank(), x.len());
    }
    Ok(())
}

#[derive(Serialize)]
struct PointOut {
    chart: VertexId,
    coords: Vec<f64>,
    logs: Vec<f64>,
}

impl From<&PositivePoint> for PointOut {
    fn from(g: &PositivePoint) -> Self {
        Self {
            chart: g.chart,
            coords: g.values(),
            logs: g.logs(),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn require_json(cli: &Cli) -> Result<()> {
    if cli.format != Format::Json {
        bail!("this command only emits JSON");
    }
    Ok(())
}

/// Output text and exit status.
fn run(cli: &Cli) -> Result<(String, bool)> {
    let text = match &cli.command {
        Command::Cartan => {
            require_json(cli)?;
            let eps = seed_matrix(cli)?;
            to_json(&eps)?
        }
        Command::Enumerate { json } => {
            require_json(cli)?;
            let p = pattern(cli)?;
            if *json {
                to_json(&p)?
            } else {
                to_json(&json!({
                    "type": p.type_tag,
                    "rank": p.rank(),
                    "vertices": p.len(),
                    "edges": p.edges.len(),
                    "cones": fan(&p).len(),
                }))?
            }
        }
        Command::Fan => {
            require_json(cli)?;
            to_json(&fan(&pattern(cli)?))?
        }
        Command::Quake { g0, l } => {
            require_json(cli)?;
            let p = pattern(cli)?;
            let g0 = positive(cli, &p, g0.as_ref())?;
            let r = quake(&p, &g0, &tropical(cli, &p, l)?)?;
            to_json(&json!({ "cone": r.cone_vertex, "g": PointOut::from(&r.g) }))?
        }
        Command::Inverse { g0, g, tol } => {
            require_json(cli)?;
            let p = pattern(cli)?;
            let l = inverse_quake(&p, &positive(cli, &p, g0.as_ref())?, &positive(cli, &p, Some(g))?, *tol)?;
            to_json(&l)?
        }
        Command::Dquake { g, l, method } => {
            require_json(cli)?;
            let p = pattern(cli)?;
            let method: DerivativeMethod = method.parse()?;
            let d = dquake(&p, &positive(cli, &p, g.as_ref())?, &tropical(cli, &p, l)?, method)?;
            to_json(&json!({
                "base": PointOut::from(&d.base),
                "chart": d.chart,
                "delta": d.delta,
            }))?
        }
        Command::Limits { mode, g0, t, m } => {
            require_json(cli)?;
            let p = pattern(cli)?;
            let mut rows = Vec::new();
            match mode {
                LimitMode::L => {
                    let g0 = positive(cli, &p, g0.as_ref())?;
                    for c in fan(&p) {
                        for k in 0..p.rank() {
                            let e = limit_l(&p, &g0, c.vertex_id, k, *t)?;
                            rows.push(json!({
                                "vertex": c.vertex_id, "k": k, "t": t,
                                "estimate": e.estimate, "target": e.target, "residual": e.error,
                            }));
                        }
                    }
                }
                LimitMode::G => {
                    let g = PositivePoint::from_logs(p.base, &vec![*m; p.rank()])?;
                    for c in fan(&p) {
                        let e = limit_g(&p, &g, c.vertex_id)?;
                        rows.push(json!({
                            "vertex": c.vertex_id, "M": m,
                            "estimate": e.u, "target": e.target, "residual": e.error,
                        }));
                    }
                }
            }
            to_json(&rows)?
        }
        Command::Horocycle { g, l, t } => {
            require_json(cli)?;
            let p = pattern(cli)?;
            let g = positive(cli, &p, g.as_ref())?;
            let l = tropical(cli, &p, l)?;
            let z = lift(&p, &g, &l)?;
            let residual = conjugacy_residual(&p, &g, &l, *t)?;
            to_json(&json!({
                "lift": z,
                "flowed": horocycle_flow(&z, *t),
                "t": t,
                "residual": residual,
            }))?
        }
        Command::PlotGrid { g0, range, step } => {
            let p = pattern(cli)?;
            if p.rank() != 2 {
                return Err(Error::UnsupportedPlot(p.rank()).into());
            }
            let g0 = positive(cli, &p, g0.as_ref())?;
            let rows = plot_grid(&p, &g0, &GridSpec::new(range[0], range[1], *step)?)?;
            match cli.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&rows, &mut buf)?;
                    String::from_utf8(buf)?
                }
                Format::Json => to_json(&rows)?,
            }
        }
        Command::Verify { suite, samples } => {
            let suite: Suite = suite.parse()?;
            let tys = cli.ty.clone().unwrap_or_else(|| "A2,B2,G2,A3".into());
            let patterns = if cli.matrix.is_some() {
                vec![pattern(cli)?]
            } else {
                tys.split(',')
                    .map(|t| pattern_of(cli, Some(t.trim())))
                    .collect::<Result<Vec<_>>>()?
            };
            let report = verify(suite, &patterns, VerifyOptions { seed: cli.seed, samples: *samples });
            let text = match cli.format {
                Format::Json => to_json(&report)?,
                Format::Csv => bail!("verify emits text or JSON"),
            };
            let ok = report.passed();
            if cli.out.is_none() && cli.format == Format::Json {
                eprintln!("{report}");
            }
            return Ok((text, ok));
        }
    };
    Ok((text, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, ok)) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
                None => io::stdout().write_all(text.as_bytes()).map_err(Into::into),
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
