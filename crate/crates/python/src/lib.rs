//! Python bindings: market parameters, prices, boundaries and regime
//! classification.

use negrate::bounds::{barrier_price as core_barrier_price, boundary_bound as core_bound, BarrierStyle, BoundKind};
use negrate::fdm::{fd_boundary, fd_price, LcpSolverKind};
use negrate::kim::{kim_boundary, kim_price, KimConfig, KimMethod};
use negrate::qdplus::juzhong_price;
use negrate::region::classify;
use negrate::{BoundarySamples, Error, OptionKind};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_kind(kind: &str) -> PyResult<OptionKind> {
    match kind {
        "put" => Ok(OptionKind::Put),
        "call" => Ok(OptionKind::Call),
        _ => Err(PyValueError::new_err(format!("kind must be 'put' or 'call', got '{kind}'"))),
    }
}

/// Contract and model state; rates, yields and volatility are decimals.
#[pyclass(name = "MarketParams", frozen)]
struct PyMarketParams {
    inner: negrate::MarketParams,
}

#[pymethods]
impl PyMarketParams {
    #[new]
    #[pyo3(signature = (spot, strike, rate, dividend, vol, maturity, kind = "put"))]
    fn new(spot: f64, strike: f64, rate: f64, dividend: f64, vol: f64, maturity: f64, kind: &str) -> PyResult<Self> {
        let inner = negrate::MarketParams::new(spot, strike, rate, dividend, vol, maturity, parse_kind(kind)?)
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn spot(&self) -> f64 {
        self.inner.spot
    }
    #[getter]
    fn strike(&self) -> f64 {
        self.inner.strike
    }
    #[getter]
    fn rate(&self) -> f64 {
        self.inner.rate
    }
    #[getter]
    fn dividend(&self) -> f64 {
        self.inner.dividend
    }
    #[getter]
    fn vol(&self) -> f64 {
        self.inner.vol
    }
    #[getter]
    fn maturity(&self) -> f64 {
        self.inner.maturity
    }
    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind {
            OptionKind::Put => "put",
            OptionKind::Call => "call",
        }
    }

    fn with_spot(&self, spot: f64) -> PyResult<Self> {
        let inner = self.inner.with_spot(spot);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "MarketParams(spot={}, strike={}, rate={}, dividend={}, vol={}, maturity={}, kind='{}')",
            p.spot,
            p.strike,
            p.rate,
            p.dividend,
            p.vol,
            p.maturity,
            self.kind()
        )
    }
}

#[pyclass(name = "PriceResult", frozen)]
struct PyPriceResult {
    inner: negrate::PriceResult,
}

#[pymethods]
impl PyPriceResult {
    #[getter]
    fn price(&self) -> f64 {
        self.inner.price
    }
    #[getter]
    fn european(&self) -> f64 {
        self.inner.european
    }
    #[getter]
    fn premium(&self) -> f64 {
        self.inner.premium
    }
    #[getter]
    fn method(&self) -> String {
        self.inner.method.clone()
    }
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }
    #[getter]
    fn degraded(&self) -> bool {
        self.inner.degraded
    }

    fn __repr__(&self) -> String {
        format!("PriceResult(method='{}', price={})", self.inner.method, self.inner.price)
    }
}

fn kim_method(name: &str) -> PyResult<KimMethod> {
    Ok(match name {
        "kim-fpb" => KimMethod::FpB,
        "kim-fpa" => KimMethod::FpA,
        "kim-fpbprime" | "qdplus" => KimMethod::FpBPrime,
        "kim-gn" | "kim-gn-b" => KimMethod::GaussNewtonB,
        "kim-gn-a" => KimMethod::GaussNewtonA,
        _ => return Err(PyValueError::new_err(format!("unknown method '{name}'"))),
    })
}

fn put_side_rate(p: &negrate::MarketParams) -> f64 {
    match p.kind {
        OptionKind::Put => p.rate,
        OptionKind::Call => p.dividend,
    }
}

fn kim_config(p: &negrate::MarketParams, method: &str, m: Option<usize>, n: Option<usize>, l: Option<usize>, points: Option<usize>) -> PyResult<KimConfig> {
    let km = if method == "auto" { KimConfig::method_for(put_side_rate(p)) } else { kim_method(method)? };
    let d = KimConfig::default();
    let mut c = KimConfig::new(
        km,
        m.unwrap_or(d.m),
        n.unwrap_or(d.n),
        l.unwrap_or(d.quad.inner_points),
        points.unwrap_or(d.quad.pricing_points),
    );
    if method == "qdplus" {
        c.n = 0;
    }
    Ok(c)
}

/// Black-Scholes price of the European option.
#[pyfunction]
fn european_price(p: &PyMarketParams) -> PyResult<f64> {
    negrate::european_price(&p.inner).map_err(to_py)
}

/// American price. `method` is one of auto, european, qdplus, juzhong,
/// kim-fpb, kim-fpa, kim-fpbprime, kim-gn, fdm. For fdm, `m` is the number
/// of time steps.
#[pyfunction]
#[pyo3(signature = (p, method = "auto", m = None, n = None, l = None, points = None))]
fn price(
    p: &PyMarketParams,
    method: &str,
    m: Option<usize>,
    n: Option<usize>,
    l: Option<usize>,
    points: Option<usize>,
) -> PyResult<PyPriceResult> {
    let p = &p.inner;
    let mut r = match method {
        "european" => {
            let e = negrate::european_price(p).map_err(to_py)?;
            negrate::PriceResult::new("european", e, e)
        }
        "juzhong" => juzhong_price(p).map_err(to_py)?,
        "fdm" => fd_price(p, m.unwrap_or(200), LcpSolverKind::PolicyIteration).map_err(to_py)?,
        _ => kim_price(p, &kim_config(p, method, m, n, l, points)?).map_err(to_py)?,
    };
    r.boundary = None;
    Ok(PyPriceResult { inner: r })
}

fn samples_dict<'py>(py: Python<'py>, s: &BoundarySamples) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", s.times.clone())?;
    d.set_item("upper", s.upper.clone())?;
    d.set_item("lower", s.lower.clone())?;
    Ok(d)
}

/// Put exercise boundaries as a dict of lists `t`, `upper`, `lower`
/// (None where there is no boundary). Calls are not supported here; use
/// the symmetric put.
#[pyfunction]
#[pyo3(signature = (p, method = "auto", points = 41, m = None, n = None))]
fn boundary<'py>(
    py: Python<'py>,
    p: &PyMarketParams,
    method: &str,
    points: usize,
    m: Option<usize>,
    n: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = &p.inner;
    if p.kind != OptionKind::Put {
        return Err(PyValueError::new_err("boundaries are reported for puts"));
    }
    let s = if method == "fdm" {
        fd_boundary(p, m.unwrap_or(200)).map_err(to_py)?.samples
    } else {
        kim_boundary(p, &kim_config(p, method, m, n, None, None)?).map_err(to_py)?.boundary.samples(points)
    };
    samples_dict(py, &s)
}

/// Regime flags for a put or call with rates `rate` and `dividend`.
#[pyfunction]
#[pyo3(signature = (rate, dividend, kind = "put"))]
fn region<'py>(py: Python<'py>, rate: f64, dividend: f64, kind: &str) -> PyResult<Bound<'py, PyDict>> {
    let c = classify(parse_kind(kind)?, rate, dividend);
    let d = PyDict::new(py);
    d.set_item("never_optimal", c.never_optimal)?;
    d.set_item("double_boundary_possible", c.double_boundary_possible)?;
    Ok(d)
}

/// Knock-out price with rebate `|L - K|` paid at the hit; `style` is
/// "up_out" or "down_out".
#[pyfunction]
fn barrier_price(p: &PyMarketParams, barrier: f64, style: &str) -> PyResult<f64> {
    let style = match style {
        "up_out" => BarrierStyle::UpOut,
        "down_out" => BarrierStyle::DownOut,
        _ => return Err(PyValueError::new_err("style must be 'up_out' or 'down_out'")),
    };
    core_barrier_price(&negrate::bounds::CapOptionParams::new(p.inner, barrier), style).map_err(to_py)
}

/// Boundary estimate from the barrier-level optimality condition; `which`
/// is call_lower, put_upper, put_lower or call_upper_lowerbound.
#[pyfunction]
fn boundary_bound(p: &PyMarketParams, which: &str, times: Vec<f64>) -> PyResult<Vec<Option<f64>>> {
    let which = match which {
        "call_lower" => BoundKind::CallLower,
        "put_upper" => BoundKind::PutUpper,
        "put_lower" => BoundKind::PutLower,
        "call_upper_lowerbound" => BoundKind::CallUpperLowerbound,
        _ => return Err(PyValueError::new_err(format!("unknown bound '{which}'"))),
    };
    Ok(core_bound(&p.inner, which, &times).map_err(to_py)?.values)
}

#[pymodule]
fn pynegrate(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMarketParams>()?;
    m.add_class::<PyPriceResult>()?;
    m.add_function(wrap_pyfunction!(european_price, m)?)?;
    m.add_function(wrap_pyfunction!(price, m)?)?;
    m.add_function(wrap_pyfunction!(boundary, m)?)?;
    m.add_function(wrap_pyfunction!(region, m)?)?;
    m.add_function(wrap_pyfunction!(barrier_price, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_bound, m)?)?;
    Ok(())
}
