//! Multistep integration of scalar initial-value problems on `[0, 1]`.
//!
//! An optimal formula computed on the anchor window `[0, hk]` is applied at
//! every window `[x_(n-k), x_n]`:
//!
//! ```text
//! y_n = y_(n-1) + h sum_{b<k} C1_b f(x_(n-k+b), y_(n-k+b)),   n = k..N
//! ```
//!
//! Shifting the window keeps the formula exact on polynomials of degree
//! `<= m - 2`, and `l(e^-(x+c)) = e^-c l(e^-x) = 0`, so reusing one set of
//! coefficients is legitimate. Classical Adams-Bashforth weights serve as
//! the baseline.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::direct_solver::{optimal_adams, OptimalFormula};
use crate::error::{Error, Result};
use crate::functional::FormulaParams;
use crate::precision::{PrecisionContext, Real};

/// Errors at or below this size count as exact reproduction.
pub const EXACT_ERROR_FLOOR: f64 = 1e-12;
/// Largest supported Adams-Bashforth step count.
pub const MAX_AB_STEPS: u32 = 5;

type Rhs = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Exact = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type RhsMp = Arc<dyn Fn(&Real, &Real, &PrecisionContext) -> Real + Send + Sync>;
type ExactMp = Arc<dyn Fn(&Real, &PrecisionContext) -> Real + Send + Sync>;

/// `y' = f(x, y)`, `y(0) = y0` on `[0, 1]`.
#[derive(Clone)]
pub struct IvpProblem {
    name: String,
    rhs: Rhs,
    y0: f64,
    exact: Option<Exact>,
    rhs_mp: Option<RhsMp>,
    exact_mp: Option<ExactMp>,
}

impl fmt::Debug for IvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IvpProblem")
            .field("name", &self.name)
            .field("y0", &self.y0)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// Names accepted by [`IvpProblem::builtin`].
pub const BUILTIN_PROBLEMS: [&str; 4] = ["exp-decay", "exp-growth", "poly", "logistic"];

impl IvpProblem {
    pub fn new<F>(name: impl Into<String>, rhs: F, y0: f64) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            rhs: Arc::new(rhs),
            y0,
            exact: None,
            rhs_mp: None,
            exact_mp: None,
        }
    }

    pub fn with_exact<E>(mut self, exact: E) -> Self
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    /// Multiprecision versions of the right-hand side and solution, used by
    /// [`integrate_optimal_mp`].
    pub fn with_multiprecision<F, E>(mut self, rhs: F, exact: E) -> Self
    where
        F: Fn(&Real, &Real, &PrecisionContext) -> Real + Send + Sync + 'static,
        E: Fn(&Real, &PrecisionContext) -> Real + Send + Sync + 'static,
    {
        self.rhs_mp = Some(Arc::new(rhs));
        self.exact_mp = Some(Arc::new(exact));
        self
    }

    /// One of `exp-decay` (`y' = -y`), `exp-growth` (`y' = y`), `poly`
    /// (`y' = 3x^2`) or `logistic` (`y' = y(1 - y)`, `y0 = 0.5`).
    pub fn builtin(name: &str) -> Result<Self> {
        let p = match name {
            "exp-decay" => Self::new(name, |_, y| -y, 1.0)
                .with_exact(|x| (-x).exp())
                .with_multiprecision(
                    |_, y, c| c.real(-y),
                    |x, c| c.real(-x).exp(),
                ),
            "exp-growth" => Self::new(name, |_, y| y, 1.0)
                .with_exact(f64::exp)
                .with_multiprecision(|_, y, c| c.real(y), |x, c| c.real(x.exp_ref())),
            "poly" => Self::new(name, |x, _| 3.0 * x * x, 0.0)
                .with_exact(|x| x * x * x)
                .with_multiprecision(
                    |x, _, c| c.real(x.square_ref()) * 3u32,
                    |x, c| c.real(x.square_ref()) * x,
                ),
            "logistic" => Self::new(name, |_, y| y * (1.0 - y), 0.5)
                .with_exact(|x| 1.0 / (1.0 + (-x).exp()))
                .with_multiprecision(
                    |_, y, c| c.real(y * &c.real(1 - y)),
                    |x, c| c.one() / (c.one() + c.real(-x).exp()),
                ),
            _ => {
                return Err(Error::InvalidParams(format!(
                    "unknown problem {name:?}; expected one of {}",
                    BUILTIN_PROBLEMS.join(", ")
                )))
            }
        };
        Ok(p)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn rhs(&self, x: f64, y: f64) -> f64 {
        (self.rhs)(x, y)
    }

    pub fn exact(&self, x: f64) -> Option<f64> {
        self.exact.as_ref().map(|e| e(x))
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// How the first `k` values are supplied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Startup {
    Exact,
    #[default]
    Rk4,
}

impl FromStr for Startup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Startup::Exact),
            "rk4" => Ok(Startup::Rk4),
            _ => Err(Error::InvalidParams(format!(
                "unknown startup {s:?}; expected exact or rk4"
            ))),
        }
    }
}

impl fmt::Display for Startup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Startup::Exact => "exact",
            Startup::Rk4 => "rk4",
        })
    }
}

/// Nodes, computed values and (when the solution is known) pointwise
/// errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub method: String,
    pub problem: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub error: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn max_error(&self) -> Option<f64> {
        self.error
            .as_ref()
            .map(|e| e.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }

    /// CSV with header `x,y,error`; the error column is empty when the
    /// exact solution is unknown.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "y", "error"])?;
        for i in 0..self.x.len() {
            let err = self
                .error
                .as_ref()
                .map(|e| format!("{:e}", e[i]))
                .unwrap_or_default();
            out.write_record([format!("{:e}", self.x[i]), format!("{:e}", self.y[i]), err])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn startup_values(problem: &IvpProblem, k: usize, n: u32, startup: Startup) -> Result<Vec<f64>> {
    let h = 1.0 / f64::from(n);
    let mut y = vec![problem.y0];
    match startup {
        Startup::Exact => {
            let exact = problem.exact.as_ref().ok_or(Error::StartupUnavailable)?;
            for i in 1..k {
                y.push(exact(i as f64 * h));
            }
        }
        Startup::Rk4 => {
            for i in 1..k {
                let x = (i - 1) as f64 * h;
                y.push(rk4_step(problem, x, y[i - 1], h));
            }
        }
    }
    Ok(y)
}

/// One classical four-stage Runge-Kutta step.
pub fn rk4_step(problem: &IvpProblem, x: f64, y: f64, h: f64) -> f64 {
    let k1 = problem.rhs(x, y);
    let k2 = problem.rhs(x + h / 2.0, y + h / 2.0 * k1);
    let k3 = problem.rhs(x + h / 2.0, y + h / 2.0 * k2);
    let k4 = problem.rhs(x + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Runs the sliding-window rule with the given weights (`weights[b]`
/// multiplies `f_(n-k+b)`).
pub fn integrate_with_weights(
    problem: &IvpProblem,
    weights: &[f64],
    n: u32,
    startup: Startup,
    method: &str,
) -> Result<Trajectory> {
    let k = weights.len();
    if k == 0 {
        return Err(Error::InvalidParams("at least one weight is required".into()));
    }
    if n == 0 || (n as usize) < k {
        return Err(Error::InvalidParams(format!(
            "N = {n} leaves no room for a {k}-step method"
        )));
    }
    let h = 1.0 / f64::from(n);
    let x: Vec<f64> = (0..=n).map(|i| f64::from(i) * h).collect();
    let mut y = startup_values(problem, k, n, startup)?;
    let mut f: Vec<f64> = y.iter().enumerate().map(|(i, &v)| problem.rhs(x[i], v)).collect();
    for i in k..=n as usize {
        let incr: f64 = weights.iter().zip(&f[i - k..i]).map(|(w, fv)| w * fv).sum();
        let yi = y[i - 1] + h * incr;
        y.push(yi);
        f.push(problem.rhs(x[i], yi));
    }
    let error = problem
        .exact
        .as_ref()
        .map(|e| x.iter().zip(&y).map(|(&xi, &yi)| yi - e(xi)).collect());
    Ok(Trajectory {
        method: method.to_string(),
        problem: problem.name.clone(),
        n,
        x,
        y,
        error,
    })
}

/// Integrates with an optimal Adams-type formula; the grid is the one the
/// formula was built on.
pub fn integrate_optimal(problem: &IvpProblem, opt: &OptimalFormula, startup: Startup) -> Result<Trajectory> {
    let params = opt.params();
    let k = params.k() as usize;
    let weights: Vec<f64> = opt.formula.c1()[..k].iter().map(|v| v.to_f64()).collect();
    let method = format!("optimal-m{}-k{}", params.m(), params.k());
    integrate_with_weights(problem, &weights, params.n(), startup, &method)
}

/// Same recursion carried out entirely at working precision with exact
/// startup. Needs the multiprecision right-hand side and solution.
pub fn integrate_optimal_mp(problem: &IvpProblem, opt: &OptimalFormula, ctx: &PrecisionContext) -> Result<Trajectory> {
    let (rhs, exact) = match (&problem.rhs_mp, &problem.exact_mp) {
        (Some(r), Some(e)) => (r, e),
        _ => return Err(Error::StartupUnavailable),
    };
    let params = opt.params();
    let (n, k) = (params.n(), params.k() as usize);
    let h = params.h(ctx);
    let x: Vec<Real> = (0..=n as i64).map(|i| params.node(i, ctx)).collect();
    let mut y: Vec<Real> = vec![ctx.real(problem.y0)];
    for xi in x.iter().take(k).skip(1) {
        y.push(exact(xi, ctx));
    }
    let mut f: Vec<Real> = y.iter().zip(&x).map(|(yi, xi)| rhs(xi, yi, ctx)).collect();
    let c1 = &opt.formula.c1()[..k];
    for i in k..=n as usize {
        let mut incr = ctx.zero();
        for (w, fv) in c1.iter().zip(&f[i - k..i]) {
            incr += ctx.real(w * fv);
        }
        let yi = ctx.real(&y[i - 1] + ctx.real(&h * &incr));
        f.push(rhs(&x[i], &yi, ctx));
        y.push(yi);
    }
    let error = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| ctx.real(yi - &exact(xi, ctx)).to_f64())
        .collect();
    Ok(Trajectory {
        method: format!("optimal-m{}-k{}-mp", params.m(), params.k()),
        problem: problem.name.clone(),
        n,
        x: x.iter().map(Real::to_f64).collect(),
        y: y.iter().map(Real::to_f64).collect(),
        error: Some(error),
    })
}

/// Exact Adams-Bashforth weights for `k` steps: the `b_j` with
/// `sum_j b_j t_j^q = 1/(q+1)`, `t_j = j - k + 1`, `q = 0..k-1`, so that
/// `weights[j]` multiplies `f_(n-k+j)`.
pub fn adams_bashforth_weights(k: u32) -> Result<Vec<Rational>> {
    if k == 0 || k > MAX_AB_STEPS {
        return Err(Error::InvalidParams(format!(
            "Adams-Bashforth needs 1 <= k <= {MAX_AB_STEPS}, got {k}"
        )));
    }
    let k = k as usize;
    let mut a: Vec<Vec<Rational>> = (0..k)
        .map(|q| {
            let mut row: Vec<Rational> = (0..k)
                .map(|j| {
                    let t = j as i64 - k as i64 + 1;
                    Rational::from(t.pow(q as u32))
                })
                .collect();
            row.push(Rational::from((1, q as u32 + 1)));
            row
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| a[r][col] != 0)
            .ok_or(Error::SingularSystem { column: col, pivot: 0.0 })?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..k {
            if r == col || a[r][col] == 0 {
                continue;
            }
            let f = a[r][col].clone();
            let pivot = a[col].clone();
            for (dst, src) in a[r].iter_mut().zip(&pivot) {
                *dst -= Rational::from(&f * src);
            }
        }
    }
    Ok(a.into_iter().map(|row| row[k].clone()).collect())
}

/// Integrates with the `k`-step Adams-Bashforth method.
pub fn integrate_adams_bashforth(problem: &IvpProblem, k: u32, n: u32, startup: Startup) -> Result<Trajectory> {
    let weights: Vec<f64> = adams_bashforth_weights(k)?.iter().map(Rational::to_f64).collect();
    integrate_with_weights(problem, &weights, n, startup, &format!("adams-bashforth-{k}"))
}

/// Integration method for a convergence sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    /// Optimal formula rebuilt for each `N`.
    Optimal { m: u32, k: u32 },
    AdamsBashforth { k: u32 },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Optimal { m, k } => write!(f, "optimal-m{m}-k{k}"),
            Method::AdamsBashforth { k } => write!(f, "adams-bashforth-{k}"),
        }
    }
}

/// Runs `method` on `problem` with `N` subintervals.
pub fn run_method(
    method: Method,
    problem: &IvpProblem,
    n: u32,
    startup: Startup,
    ctx: &PrecisionContext,
) -> Result<Trajectory> {
    match method {
        Method::Optimal { m, k } => {
            let opt = optimal_adams(FormulaParams::new(m, n, k)?, ctx)?;
            integrate_optimal(problem, &opt, startup)
        }
        Method::AdamsBashforth { k } => integrate_adams_bashforth(problem, k, n, startup),
    }
}

/// One row of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: u32,
    pub max_abs_error: f64,
}

/// Errors per grid and the least-squares order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: String,
    pub problem: String,
    pub rows: Vec<ConvergenceRow>,
    pub fitted_order: f64,
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_reports_csv(std::slice::from_ref(self), w)
    }
}

/// Rows of several reports in one table with columns
/// `method, problem, N, max_abs_error`.
pub fn write_reports_csv<W: Write>(reports: &[ConvergenceReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["method", "problem", "N", "max_abs_error"])?;
    for rep in reports {
        for r in &rep.rows {
            out.write_record([
                rep.method.clone(),
                rep.problem.clone(),
                r.n.to_string(),
                format!("{:e}", r.max_abs_error),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Maximum errors for each `N` (computed in parallel) and the slope of
/// `-log(error)` against `log N`.
pub fn measure_order(
    method: Method,
    problem: &IvpProblem,
    n_list: &[u32],
    startup: Startup,
    ctx: &PrecisionContext,
) -> Result<ConvergenceReport> {
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(
            "N list needs at least three strictly increasing entries".into(),
        ));
    }
    if !problem.has_exact() {
        return Err(Error::InvalidParams(format!(
            "problem {} has no exact solution to measure errors against",
            problem.name
        )));
    }
    let rows: Vec<ConvergenceRow> = n_list
        .par_iter()
        .map(|&n| {
            let t = run_method(method, problem, n, startup, ctx)?;
            Ok(ConvergenceRow {
                n,
                max_abs_error: t.max_error().unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<_>>()?;
    if let Some(bad) = rows.iter().find(|r| !r.max_abs_error.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "non-finite error at N = {}",
            bad.n
        )));
    }
    let worst = rows.iter().map(|r| r.max_abs_error).fold(0.0, f64::max);
    if rows.iter().any(|r| r.max_abs_error <= EXACT_ERROR_FLOOR) {
        return Err(Error::DegenerateFit { max_error: worst });
    }
    let xs: Vec<f64> = rows.iter().map(|r| f64::from(r.n).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| -r.max_abs_error.ln()).collect();
    let fitted_order = least_squares_slope(&xs, &ys);
    Ok(ConvergenceReport {
        method: method.to_string(),
        problem: problem.name.clone(),
        rows,
        fitted_order,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
