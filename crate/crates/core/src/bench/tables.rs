use super::{run_grid_with, reference_prices, BenchMethod, Reference, RunMode, TestGrid};
use crate::blackscholes::{european_price, MarketParams};
use crate::error::{Error, Result};
use crate::fdm::{fd_price, LcpSolverKind};
use crate::kim::{kim_price, KimConfig, KimMethod};
use crate::qdplus::{juzhong_price, mean_boundary_iterations, RootSolverKind, DEFAULT_TOLERANCE};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableName {
    QdIter,
    JzMisprice8,
    JzMisprice22,
    FpaInstability,
    AlSummary,
    AlSummaryNeg,
    AlSummaryNegLong,
}

impl TableName {
    pub const ALL: [TableName; 7] = [
        TableName::QdIter,
        TableName::JzMisprice8,
        TableName::JzMisprice22,
        TableName::FpaInstability,
        TableName::AlSummary,
        TableName::AlSummaryNeg,
        TableName::AlSummaryNegLong,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TableName::QdIter => "qd_iter",
            TableName::JzMisprice8 => "jz_misprice_8",
            TableName::JzMisprice22 => "jz_misprice_22",
            TableName::FpaInstability => "fpa_instability",
            TableName::AlSummary => "al_summary",
            TableName::AlSummaryNeg => "al_summary_neg",
            TableName::AlSummaryNegLong => "al_summary_neg_long",
        }
    }
}

impl FromStr for TableName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TableName::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown table '{s}'")))
    }
}

/// How a cell is judged against its published value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CellCheck {
    /// `|value - expected| <= tol`.
    Within { tol: f64 },
    /// `value <= factor * expected`.
    AtMost { factor: f64 },
    /// The method must miss `reference` by more than `gap`.
    Diverged { reference: f64, gap: f64 },
    /// Reported only.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub row: String,
    pub column: String,
    pub value: f64,
    pub expected: f64,
    pub deviation: f64,
    pub check: CellCheck,
    pub pass: bool,
    /// Set on cells where the published value is itself a wrong price.
    pub note: Option<String>,
}

impl TableCell {
    fn new(row: impl Into<String>, column: impl Into<String>, value: f64, expected: f64, check: CellCheck) -> Self {
        let pass = match check {
            CellCheck::Within { tol } => (value - expected).abs() <= tol,
            CellCheck::AtMost { factor } => value <= factor * expected,
            CellCheck::Diverged { reference, gap } => (value - reference).abs() > gap,
            CellCheck::Info => true,
        };
        Self {
            row: row.into(),
            column: column.into(),
            value,
            expected,
            deviation: value - expected,
            check,
            pass: pass && value.is_finite(),
            note: None,
        }
    }

    fn noted(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub cells: Vec<TableCell>,
}

impl Table {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["table", "row", "column", "value", "expected", "deviation", "pass", "note"])?;
        for c in &self.cells {
            w.write_record([
                self.name.as_str(),
                &c.row,
                &c.column,
                &format!("{:.10}", c.value),
                &format!("{}", c.expected),
                &format!("{:.3e}", c.deviation),
                if c.pass { "true" } else { "false" },
                c.note.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Recomputes a published table and compares cell by cell. The grid tables
/// use finite-difference references with 400 time steps, cached under
/// `NEGRATE_CACHE_DIR` when set.
pub fn reproduce_table(name: TableName) -> Result<Table> {
    let cells = match name {
        TableName::QdIter => qd_iter()?,
        TableName::JzMisprice8 => misprice(0.08, -0.005, -0.01, &JZ8)?,
        TableName::JzMisprice22 => misprice(0.22, -0.01, -0.03, &JZ22)?,
        TableName::FpaInstability => fpa_instability()?,
        TableName::AlSummary => summary(TestGrid::positive(), &AL_POSITIVE)?,
        TableName::AlSummaryNeg => summary(TestGrid::negative_short(), &AL_NEG_SHORT)?,
        TableName::AlSummaryNegLong => summary(TestGrid::negative_long(), &AL_NEG_LONG)?,
    };
    Ok(Table { name: name.as_str().into(), cells })
}

fn qd_iter() -> Result<Vec<TableCell>> {
    let solvers = [
        ("halley", RootSolverKind::Halley, [2.43, 2.74, 2.80]),
        ("super-halley", RootSolverKind::SuperHalley, [2.43, 2.48, 2.41]),
        ("inverse-quadratic", RootSolverKind::InverseQuadratic, [2.60, 2.88, 2.91]),
        ("c-method-2", RootSolverKind::CMethod(2.0), [2.79, 3.08, 3.08]),
        ("c-method-0.5", RootSolverKind::CMethod(0.5), [2.43, 2.46, 2.48]),
    ];
    let rates = [(0.02, 0.04), (0.02, 0.02), (0.02, 0.0)];
    let mut out = Vec::new();
    for (label, solver, expected) in solvers {
        for ((r, q), want) in rates.iter().zip(expected) {
            let p = MarketParams::put(100.0, 100.0, *r, *q, 0.4, 5.0)?;
            let mean = mean_boundary_iterations(&p, 100, solver, DEFAULT_TOLERANCE)?;
            out.push(TableCell::new(label, format!("r={r} q={q}"), mean, want, CellCheck::Within { tol: 0.15 }));
        }
    }
    Ok(out)
}

/// `(T, S, european, fdm, ju-zhong, kim)` rows.
type MispriceRow = (f64, f64, f64, f64, f64, f64);

const JZ8: [MispriceRow; 6] = [
    (10.0, 100.0, 8.368, 8.598, 8.618, 8.608),
    (10.0, 120.0, 2.886, 2.952, 2.954, 2.955),
    (15.0, 100.0, 9.988, 10.287, 11.442, 10.303),
    (15.0, 120.0, 4.295, 4.410, 15.453, 4.416),
    (20.0, 100.0, 11.337, 11.684, 11.337, 11.702),
    (20.0, 120.0, 5.527, 5.687, 5.527, 5.695),
];

const JZ22: [MispriceRow; 6] = [
    (3.0, 100.0, 13.062, 13.321, 13.352, 13.334),
    (3.0, 120.0, 6.979, 7.102, 7.108, 7.109),
    (5.0, 100.0, 16.405, 16.763, 16.035, 16.782),
    (5.0, 120.0, 10.312, 10.525, 10.157, 10.537),
    (7.0, 100.0, 19.082, 19.494, 19.082, 19.517),
    (7.0, 120.0, 13.035, 13.315, 13.035, 13.330),
];

/// Kim premium on the QD+ boundaries, without fixed-point refinement.
pub(crate) fn kim_on_qdplus() -> KimConfig {
    KimConfig { fallback: false, ..KimConfig::new(KimMethod::FpBPrime, 7, 0, 15, 31) }
}

fn misprice(vol: f64, r: f64, q: f64, rows: &[MispriceRow]) -> Result<Vec<TableCell>> {
    const TOL: f64 = 5e-3;
    let mut out = Vec::new();
    for &(t, s, eu, fd, jz, kim) in rows {
        let p = MarketParams::put(s, 100.0, r, q, vol, t)?;
        let row = format!("T={t} S={s}");
        out.push(TableCell::new(&row, "european", european_price(&p)?, eu, CellCheck::Within { tol: TOL }));
        let fdv = fd_price(&p, 400, LcpSolverKind::PolicyIteration)?.price;
        out.push(TableCell::new(&row, "tr-bdf2", fdv, fd, CellCheck::Within { tol: TOL }));
        let jzv = juzhong_price(&p)?.price;
        let wrong = (jz - fd).abs() > 0.1;
        let tol = if !wrong {
            TOL
        } else if jz < eu {
            // the negative-premium cell
            0.01
        } else {
            0.05
        };
        let mut cell = TableCell::new(&row, "ju-zhong", jzv, jz, CellCheck::Within { tol });
        if wrong {
            cell = cell.noted("published value is a mispricing; reproducing it is the expected outcome");
        }
        out.push(cell);
        let kv = kim_price(&p, &kim_on_qdplus())?.price;
        out.push(TableCell::new(&row, "kim-qd+", kv, kim, CellCheck::Within { tol: TOL }));
    }
    Ok(out)
}

fn fpa_instability() -> Result<Vec<TableCell>> {
    // third column: the published prices correspond to r = 10%
    let cases = [(3.0, 0.10, 1.94358), (3.0, 0.01, 6.73805), (10.0, 0.10, 1.97729)];
    let methods = [
        ("fp-b", KimMethod::FpB, 32),
        ("gn-b", KimMethod::GaussNewtonB, 0),
        ("fp-a", KimMethod::FpA, 32),
        ("gn-a", KimMethod::GaussNewtonA, 0),
    ];
    let mut out = Vec::new();
    for (label, method, n) in methods {
        for &(t, r, reference) in &cases {
            let p = MarketParams::put(100.0, 100.0, r, 0.01, 0.10, t)?;
            let cfg = KimConfig { fallback: false, ..KimConfig::new(method, 10, n, 31, 63) };
            let v = kim_price(&p, &cfg).map(|x| x.price).unwrap_or(f64::NAN);
            let column = format!("T={t} r={r}");
            let unstable = method == KimMethod::FpA && r > 0.05;
            let cell = if unstable {
                TableCell::new(label, column, v, reference, CellCheck::Diverged { reference, gap: 0.1 })
                    .noted("diverged")
            } else {
                TableCell::new(label, column, v, reference, CellCheck::Within { tol: 2e-4 })
            };
            out.push(cell);
        }
    }
    Ok(out)
}

/// `(label, method, rmse, mae, rrmse)` rows.
type SummaryRow = (&'static str, fn() -> BenchMethod, f64, f64, f64);

fn kim(method: KimMethod, m: usize, n: usize, l: usize, p: usize) -> BenchMethod {
    BenchMethod::Kim(KimConfig { fallback: true, ..KimConfig::new(method, m, n, l, p) })
}

const AL_POSITIVE: [SummaryRow; 4] = [
    ("fp-b m=5 n=4 l=11 p=21", || kim(KimMethod::FpB, 5, 4, 11, 21), 4.1e-5, 6.8e-4, 1.6e-4),
    ("fp-b m=7 n=8 l=15 p=31", || kim(KimMethod::FpB, 7, 8, 15, 31), 4.9e-6, 8.1e-5, 2.9e-5),
    (
        "tr-bdf2 m=20",
        || BenchMethod::Fdm { time_steps: 20, solver: LcpSolverKind::BrennanSchwartz },
        7.1e-4,
        4.9e-3,
        1.9e-3,
    ),
    (
        "tr-bdf2 m=40",
        || BenchMethod::Fdm { time_steps: 40, solver: LcpSolverKind::BrennanSchwartz },
        1.8e-4,
        1.1e-3,
        5.9e-4,
    ),
];

const AL_NEG_SHORT: [SummaryRow; 7] = [
    ("fp-b' m=5 n=4 l=11 p=21", || kim(KimMethod::FpBPrime, 5, 4, 11, 21), 6.1e-5, 1.6e-3, 5.7e-5),
    ("fp-b' m=5 n=8 l=11 p=21", || kim(KimMethod::FpBPrime, 5, 8, 11, 21), 2.4e-5, 6.8e-4, 2.2e-5),
    ("gn-b m=5 l=11 p=21", || kim(KimMethod::GaussNewtonB, 5, 0, 11, 21), 1.8e-5, 2.6e-4, 5.5e-5),
    ("fp-b' m=7 n=8 l=15 p=31", || kim(KimMethod::FpBPrime, 7, 8, 15, 31), 2.1e-5, 6.8e-4, 9.0e-6),
    ("fp-b' m=7 n=16 l=15 p=31", || kim(KimMethod::FpBPrime, 7, 16, 15, 31), 6.2e-6, 1.4e-4, 7.1e-6),
    ("gn-b m=7 l=15 p=31", || kim(KimMethod::GaussNewtonB, 7, 0, 15, 31), 1.4e-5, 2.1e-4, 2.1e-5),
    (
        "tr-bdf2 m=40",
        || BenchMethod::Fdm { time_steps: 40, solver: LcpSolverKind::PolicyIteration },
        2.0e-4,
        8.4e-4,
        4.1e-4,
    ),
];

const AL_NEG_LONG: [SummaryRow; 6] = [
    ("fp-b' m=5 n=4 l=11 p=21", || kim(KimMethod::FpBPrime, 5, 4, 11, 21), 1.4e-3, 4.2e-2, 7.1e-4),
    ("fp-b' m=5 n=8 l=11 p=21", || kim(KimMethod::FpBPrime, 5, 8, 11, 21), 7.6e-4, 2.0e-2, 3.6e-4),
    ("fp-b' m=5 n=16 l=11 p=21", || kim(KimMethod::FpBPrime, 5, 16, 11, 21), 4.2e-4, 8.0e-3, 4.0e-4),
    ("fp-b' m=7 n=8 l=15 p=31", || kim(KimMethod::FpBPrime, 7, 8, 15, 31), 4.1e-4, 1.1e-2, 1.5e-4),
    ("fp-b' m=7 n=16 l=15 p=31", || kim(KimMethod::FpBPrime, 7, 16, 15, 31), 1.4e-4, 3.3e-3, 5.9e-5),
    (
        "tr-bdf2 m=40",
        || BenchMethod::Fdm { time_steps: 40, solver: LcpSolverKind::PolicyIteration },
        3.3e-3,
        3.4e-2,
        4.6e-4,
    ),
];

/// Error statistics may exceed the published ones by this factor.
pub const SUMMARY_SLACK: f64 = 2.5;

fn summary(grid: TestGrid, rows: &[SummaryRow]) -> Result<Vec<TableCell>> {
    let refs = reference_prices(&grid, &Reference::Fdm { time_steps: 400 })?;
    let check = CellCheck::AtMost { factor: SUMMARY_SLACK };
    let mut out = Vec::new();
    for &(label, method, rmse, mae, rrmse) in rows {
        let run = run_grid_with(&refs, &method(), RunMode::Batch)?;
        let r = &run.report;
        out.push(TableCell::new(label, "rmse", r.rmse, rmse, check));
        out.push(TableCell::new(label, "mae", r.mae, mae, check));
        out.push(TableCell::new(label, "rrmse", r.rrmse, rrmse, check));
        out.push(
            TableCell::new(label, "options/s (batch)", r.throughput_batch.unwrap_or(0.0), 0.0, CellCheck::Info)
                .noted("hardware dependent, not compared"),
        );
    }
    Ok(out)
}
