//! `negrate`: price American options, dump exercise boundaries, classify
//! regimes and run the benchmark grids.
//!
//! Rates, yields and volatilities are decimals: `-r -0.005` is -0.5%.

use clap::{Args, Parser, Subcommand, ValueEnum};
use negrate::bench::{
    reproduce_table, run_grid, write_records_csv, BenchMethod, Reference, RunMode, TableName, TestGrid,
};
use negrate::bounds::{boundary_bound, BoundKind};
use negrate::fdm::{fd_boundary, fd_price, LcpSolverKind};
use negrate::kim::{kim_boundary, kim_price, KimConfig, KimMethod};
use negrate::qdplus::{juzhong_price, qdplus_double_boundary};
use negrate::region::{classify, classify_params, maturity_limits};
use negrate::{european_price, BoundarySamples, Error, MarketParams, OptionKind, PriceResult};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "negrate", version, about = "American options under negative rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Price one option.
    Price(PriceArgs),
    /// Exercise boundaries as (t, upper, lower) rows.
    Boundary(BoundaryArgs),
    /// Exercise regime for a pair of rates.
    Region(RegionArgs),
    /// Benchmark grids and table reproduction.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    European,
    Qdplus,
    Juzhong,
    KimFpb,
    KimFpa,
    KimFpbprime,
    KimGn,
    Fdm,
    Bounds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Contract {
    #[arg(short = 'S', long, default_value_t = 100.0)]
    spot: f64,
    #[arg(short = 'K', long, default_value_t = 100.0)]
    strike: f64,
    /// Interest rate (decimal).
    #[arg(short = 'r', long, allow_negative_numbers = true)]
    rate: f64,
    /// Dividend yield (decimal).
    #[arg(short = 'q', long, allow_negative_numbers = true)]
    dividend: f64,
    /// Volatility (decimal).
    #[arg(short = 'v', long, allow_negative_numbers = true)]
    vol: f64,
    /// Maturity in years.
    #[arg(short = 'T', long, allow_negative_numbers = true)]
    maturity: f64,
    #[arg(long, conflicts_with = "call")]
    put: bool,
    #[arg(long)]
    call: bool,
}

impl Contract {
    fn params(&self) -> Result<MarketParams, Error> {
        let kind = if self.call { OptionKind::Call } else { OptionKind::Put };
        MarketParams::new(self.spot, self.strike, self.rate, self.dividend, self.vol, self.maturity, kind)
    }
}

#[derive(Args, Debug)]
struct Solver {
    /// Default: kim-fpbprime when the put-side rate is negative, kim-fpb otherwise.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Collocation intervals (Kim) or time steps (fdm).
    #[arg(short = 'm', long)]
    m: Option<usize>,
    /// Fixed-point iterations.
    #[arg(short = 'n', long)]
    n: Option<usize>,
    /// Quadrature points inside the boundary equations.
    #[arg(short = 'l', long)]
    l: Option<usize>,
    /// Quadrature points for the price integral.
    #[arg(short = 'p', long)]
    p: Option<usize>,
    /// Report breakdowns instead of retrying with GN-B and fdm.
    #[arg(long)]
    no_fallback: bool,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

#[derive(Args, Debug)]
struct PriceArgs {
    #[command(flatten)]
    contract: Contract,
    #[command(flatten)]
    solver: Solver,
}

#[derive(Args, Debug)]
struct BoundaryArgs {
    #[command(flatten)]
    contract: Contract,
    #[command(flatten)]
    solver: Solver,
    /// Sample times for the curve methods.
    #[arg(long, default_value_t = 41)]
    points: usize,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[arg(short = 'r', long, allow_negative_numbers = true)]
    rate: f64,
    #[arg(short = 'q', long, allow_negative_numbers = true)]
    dividend: f64,
    /// Optional volatility, for the sufficient two-boundary condition.
    #[arg(short = 'v', long)]
    vol: Option<f64>,
    #[arg(short = 'K', long, default_value_t = 100.0)]
    strike: f64,
    #[arg(long, conflicts_with = "call")]
    put: bool,
    #[arg(long)]
    call: bool,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(subcommand)]
    action: BenchAction,
}

#[derive(Subcommand, Debug)]
enum BenchAction {
    /// Recompute a published table and compare cell by cell.
    Table {
        /// qd_iter, jz_misprice_8, jz_misprice_22, fpa_instability,
        /// al_summary, al_summary_neg or al_summary_neg_long.
        name: String,
        #[arg(long, value_enum, default_value_t = Output::Csv)]
        output: Output,
    },
    /// Error statistics of a method over a parameter grid.
    Grid {
        /// positive, negative-short or negative-long.
        name: String,
        #[command(flatten)]
        solver: Solver,
        /// Stored reference file; default is fdm with 400 steps.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value = "batch")]
        mode: String,
        /// Write one CSV row per option here.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

/// Argument and configuration errors exit with 2, solver failures with 3.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Config(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("negrate: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Price(a) => price(&a),
        Command::Boundary(a) => boundary(&a),
        Command::Region(a) => region(&a),
        Command::Bench(a) => bench(a),
    }
}

fn put_side_rate(p: &MarketParams) -> f64 {
    match p.kind {
        OptionKind::Put => p.rate,
        OptionKind::Call => p.dividend,
    }
}

fn resolve_method(p: &MarketParams, s: &Solver) -> Result<Method, Error> {
    let r = put_side_rate(p);
    let method = s.method.unwrap_or(if r < 0.0 { Method::KimFpbprime } else { Method::KimFpb });
    if method == Method::KimFpa && r < 0.0 {
        return Err(Error::Config("kim-fpa handles a single boundary and is rejected for negative rates".into()));
    }
    Ok(method)
}

fn kim_config(method: Method, s: &Solver) -> KimConfig {
    let km = match method {
        Method::KimFpb => KimMethod::FpB,
        Method::KimFpa => KimMethod::FpA,
        Method::KimGn => KimMethod::GaussNewtonB,
        _ => KimMethod::FpBPrime,
    };
    let d = KimConfig::default();
    let mut c = KimConfig::new(
        km,
        s.m.unwrap_or(d.m),
        s.n.unwrap_or(d.n),
        s.l.unwrap_or(d.quad.inner_points),
        s.p.unwrap_or(d.quad.pricing_points),
    );
    if method == Method::Qdplus {
        c.n = 0;
    }
    c.fallback = !s.no_fallback;
    c
}

fn fdm_steps(s: &Solver) -> usize {
    s.m.unwrap_or(200)
}

fn price(a: &PriceArgs) -> Result<String, Error> {
    let p = a.contract.params()?;
    let method = resolve_method(&p, &a.solver)?;
    let mut r = match method {
        Method::European => {
            let e = european_price(&p)?;
            PriceResult::new("european", e, e)
        }
        Method::Juzhong => juzhong_price(&p)?,
        Method::Fdm => fd_price(&p, fdm_steps(&a.solver), LcpSolverKind::PolicyIteration)?,
        Method::Bounds => return Err(Error::Config("bounds give boundary estimates, not prices".into())),
        Method::Qdplus => {
            let mut r = kim_price(&p, &kim_config(method, &a.solver))?;
            r.method = "qdplus".into();
            r
        }
        _ => kim_price(&p, &kim_config(method, &a.solver))?,
    };
    r.boundary = None;
    Ok(match a.solver.output {
        Output::Json => json(&r)?,
        Output::Text => format!(
            "method: {}\nprice: {:.8}\neuropean: {:.8}\npremium: {:.8}\niterations: {}\nresidual: {:.3e}\ndegraded: {}\n",
            r.method, r.price, r.european, r.premium, r.iterations, r.residual, r.degraded
        ),
        Output::Csv => {
            let head = ["method", "price", "european", "premium", "iterations", "residual", "degraded"];
            let row = [
                r.method.clone(),
                r.price.to_string(),
                r.european.to_string(),
                r.premium.to_string(),
                r.iterations.to_string(),
                r.residual.to_string(),
                r.degraded.to_string(),
            ];
            csv_text(&head, &[row.to_vec()])?
        }
    })
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))? + "\n")
}

fn csv_text(head: &[&str], rows: &[Vec<String>]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(head).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Put with the same boundaries as `p`, up to the map `B -> K^2 / B` for calls.
fn boundary_put(p: &MarketParams) -> Result<MarketParams, Error> {
    match p.kind {
        OptionKind::Put => Ok(*p),
        OptionKind::Call => MarketParams::put(p.strike, p.strike, p.dividend, p.rate, p.vol, p.maturity),
    }
}

fn mirror(p: &MarketParams, mut s: BoundarySamples) -> BoundarySamples {
    if p.kind == OptionKind::Call {
        let k2 = p.strike * p.strike;
        for v in s.upper.iter_mut().chain(s.lower.iter_mut()) {
            *v = v.map(|b| k2 / b);
        }
    }
    s
}

fn sample_times(t: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| t * i as f64 / (n - 1) as f64).collect()
}

fn boundary(a: &BoundaryArgs) -> Result<String, Error> {
    let p = a.contract.params()?;
    let method = resolve_method(&p, &a.solver)?;
    let put = boundary_put(&p)?;
    let region = classify(OptionKind::Put, put.rate, put.dividend);
    if region.never_optimal {
        return Err(Error::Domain("early exercise is never optimal: no boundary".into()));
    }
    let samples = match method {
        Method::European => return Err(Error::Config("the European price has no exercise boundary".into())),
        Method::Fdm => fd_boundary(&put, fdm_steps(&a.solver))?.samples,
        Method::Qdplus | Method::Juzhong => {
            let times = sample_times(put.maturity, a.points);
            let (before, at) = times.split_at(times.len() - 1);
            let mut s = qdplus_double_boundary(&put, before)?;
            let lim = maturity_limits(&put)?;
            s.times.push(at[0]);
            s.upper.push(Some(lim.u_limit));
            s.lower.push(lim.l_limit);
            s
        }
        Method::Bounds => {
            let times = sample_times(put.maturity, a.points);
            let upper = boundary_bound(&put, BoundKind::PutUpper, &times)?.values;
            let lower = if region.double_boundary_possible {
                boundary_bound(&put, BoundKind::PutLower, &times)?.values
            } else {
                vec![None; times.len()]
            };
            BoundarySamples { times, upper, lower }
        }
        _ => kim_boundary(&put, &kim_config(method, &a.solver))?.boundary.samples(a.points),
    };
    let s = mirror(&p, samples);
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    Ok(match a.solver.output {
        Output::Json => json(&s)?,
        Output::Csv => {
            let rows: Vec<Vec<String>> =
                (0..s.len()).map(|i| vec![format!("{:.6}", s.times[i]), cell(s.upper[i]), cell(s.lower[i])]).collect();
            csv_text(&["t", "upper", "lower"], &rows)?
        }
        Output::Text => {
            let mut out = String::from("t\tupper\tlower\n");
            for i in 0..s.len() {
                let show = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
                out += &format!("{:.6}\t{}\t{}\n", s.times[i], show(s.upper[i]), show(s.lower[i]));
            }
            out
        }
    })
}

fn region(a: &RegionArgs) -> Result<String, Error> {
    let kind = if a.call { OptionKind::Call } else { OptionKind::Put };
    let c = match a.vol {
        Some(v) => classify_params(&MarketParams::new(a.strike, a.strike, a.rate, a.dividend, v, 1.0, kind)?),
        None => classify(kind, a.rate, a.dividend),
    };
    Ok(match a.output {
        Output::Json => json(&c)?,
        Output::Csv => csv_text(
            &["never_optimal", "double_boundary_possible", "battauz_holds"],
            &[vec![c.never_optimal.to_string(), c.double_boundary_possible.to_string(), c.battauz_holds.to_string()]],
        )?,
        Output::Text => {
            let mut s = format!(
                "never optimal: {}\ndouble boundary possible: {}\n",
                c.never_optimal, c.double_boundary_possible
            );
            if a.vol.is_some() {
                s += &format!("two boundaries guaranteed: {}\n", c.battauz_holds);
            }
            s
        }
    })
}

fn bench(a: BenchArgs) -> Result<String, Error> {
    match a.action {
        BenchAction::Table { name, output } => {
            let t = reproduce_table(name.parse::<TableName>()?)?;
            match output {
                Output::Json => json(&t),
                _ => {
                    let mut buf = Vec::new();
                    t.write_csv(&mut buf)?;
                    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
                }
            }
        }
        BenchAction::Grid { name, solver, reference, mode, records } => {
            let grid = TestGrid::by_name(&name)?;
            let first = grid.option(&grid.cells()[0], grid.spots[0])?;
            let method = match resolve_method(&first, &solver)? {
                Method::Fdm => BenchMethod::Fdm {
                    time_steps: solver.m.unwrap_or(40),
                    solver: if grid.rates.iter().all(|&r| r >= 0.0) {
                        LcpSolverKind::BrennanSchwartz
                    } else {
                        LcpSolverKind::PolicyIteration
                    },
                },
                Method::Juzhong => BenchMethod::JuZhong,
                Method::European => BenchMethod::European,
                Method::Bounds => return Err(Error::Config("bounds give boundary estimates, not prices".into())),
                m => BenchMethod::Kim(kim_config(m, &solver)),
            };
            let mode = match mode.as_str() {
                "batch" => RunMode::Batch,
                "individual" => RunMode::Individual,
                "both" => RunMode::Both,
                other => return Err(Error::Config(format!("unknown mode '{other}'"))),
            };
            let reference = reference.map(Reference::Stored).unwrap_or(Reference::Fdm { time_steps: 400 });
            let run = run_grid(&grid, &method, &reference, mode)?;
            if let Some(path) = records {
                write_records_csv(&run.records, std::fs::File::create(path)?)?;
            }
            let r = &run.report;
            match solver.output {
                Output::Json => json(r),
                Output::Csv => csv_text(
                    &["method", "grid", "options", "failures", "rmse", "mae", "rrmse", "throughput", "throughput_batch"],
                    &[vec![
                        r.method.clone(),
                        r.grid.clone(),
                        r.options.to_string(),
                        r.failures.to_string(),
                        r.rmse.to_string(),
                        r.mae.to_string(),
                        r.rrmse.to_string(),
                        r.throughput.map(|x| x.to_string()).unwrap_or_default(),
                        r.throughput_batch.map(|x| x.to_string()).unwrap_or_default(),
                    ]],
                ),
                Output::Text => Ok(format!(
                    "method: {}\ngrid: {}\noptions: {}\nfailures: {}\nrmse: {:.3e}\nmae: {:.3e}\nrrmse: {:.3e}\n",
                    r.method, r.grid, r.options, r.failures, r.rmse, r.mae, r.rrmse
                )),
            }
        }
    }
}
