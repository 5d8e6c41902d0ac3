use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;

use optimal_fd::direct_solver::{
    babuska_node_check, optimal_adams, perturbation_margin, recover_multipliers, OptimalFormula, BABUSKA_TOL,
};
use optimal_fd::error::Error;
use optimal_fd::functional::{constraint_residuals, norm_squared, relative_constraint_residuals, FdFormula, FormulaParams};
use optimal_fd::integrator::{
    integrate_optimal, integrate_optimal_mp, measure_order, run_method, write_reports_csv, ConvergenceReport,
    ConvergenceRow, IvpProblem, Method, Startup, MAX_AB_STEPS,
};
use optimal_fd::precision::{interpolate_tolerance, to_decimal, PrecisionContext};
use optimal_fd::spectral::{cross_validate, BOUNDARY_TOL};
use serde_json::{json, Value};

use crate::output::{emit, json_bytes};
use crate::{Failure, Format, Grid, Io};

/// Condition estimates above this trigger a warning on stderr.
const CONDITION_WARNING: f64 = 1e20;
const PERTURBATION_EPS: f64 = 1e-3;

fn context(io: &Io) -> Result<PrecisionContext, Failure> {
    PrecisionContext::with_bits(io.precision_bits).map_err(|e| Failure::Config(e.to_string()))
}

fn params(m: u32, n: u32, k: u32) -> Result<FormulaParams, Failure> {
    FormulaParams::new(m, n, k).map_err(|e| Failure::Config(e.to_string()))
}

fn json_only(io: &Io, command: &str) -> Result<(), Failure> {
    if io.format == Format::Csv {
        return Err(Failure::Config(format!("{command} output is JSON only")));
    }
    Ok(())
}

fn write(io: &Io, bytes: &[u8]) -> Result<(), Failure> {
    emit(io.out.as_deref(), bytes).map_err(|e| Failure::Core(Error::Io(e)))
}

fn solve(p: FormulaParams, ctx: &PrecisionContext) -> Result<OptimalFormula, Failure> {
    let opt = optimal_adams(p, ctx)?;
    let cond = opt.condition_estimate.to_f64();
    if cond > CONDITION_WARNING {
        eprintln!("optfd: warning: condition estimate {cond:.3e} exceeds {CONDITION_WARNING:.0e}");
    }
    Ok(opt)
}

pub fn coeffs(grid: &Grid, io: &Io) -> Result<(), Failure> {
    let ctx = context(io)?;
    let p = params(grid.m, grid.n, grid.k)?;
    let opt = solve(p, &ctx)?;
    let bytes = match io.format {
        Format::Json => {
            let mut v = serde_json::to_value(opt.formula.to_json()).map_err(Error::from)?;
            v["precision_bits"] = json!(ctx.mantissa_bits());
            v["diagnostics"] = serde_json::to_value(opt.diagnostics(&ctx)?).map_err(Error::from)?;
            json_bytes(&v)
        }
        Format::Csv => {
            let mut s = String::from("beta,C,C1\n");
            for (b, (c, c1)) in opt.formula.c().iter().zip(opt.formula.c1()).enumerate() {
                let _ = writeln!(s, "{b},{},{}", to_decimal(c), to_decimal(c1));
            }
            s.into_bytes()
        }
    };
    write(io, &bytes)
}

/// Where `verify` takes its formula from.
pub enum FormulaSource {
    File(PathBuf),
    Stdin,
    Solve { m: u32, n: u32, k: u32 },
}

impl FormulaSource {
    pub fn from_args(file: Option<PathBuf>, m: Option<u32>, n: Option<u32>, k: Option<u32>) -> Result<Self, Failure> {
        match (file, m, n, k) {
            (Some(f), None, None, None) if f.as_os_str() == "-" => Ok(FormulaSource::Stdin),
            (Some(f), None, None, None) => Ok(FormulaSource::File(f)),
            (Some(_), ..) => Err(Failure::Config(
                "give either a formula file or --m/--N/--k, not both".into(),
            )),
            (None, Some(m), Some(n), Some(k)) => Ok(FormulaSource::Solve { m, n, k }),
            (None, ..) => Err(Failure::Config(
                "verify needs a formula file (or - for stdin) or all of --m, --N, --k".into(),
            )),
        }
    }

    fn load(&self, ctx: &PrecisionContext) -> Result<FdFormula, Failure> {
        let text = match self {
            FormulaSource::Solve { m, n, k } => return Ok(solve(params(*m, *n, *k)?, ctx)?.formula),
            FormulaSource::File(path) => std::fs::read_to_string(path).map_err(Error::from)?,
            FormulaSource::Stdin => {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).map_err(Error::from)?;
                s
            }
        };
        FdFormula::from_json_str(&text, ctx).map_err(|e| Failure::Config(format!("cannot read formula: {e}")))
    }
}

struct Check {
    name: &'static str,
    passed: bool,
    value: Option<f64>,
    tolerance: f64,
    detail: Option<String>,
}

impl Check {
    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        })
    }
}

pub fn verify(
    source: FormulaSource,
    tolerance: Option<f64>,
    seed: u64,
    samples: usize,
    io: &Io,
) -> Result<(), Failure> {
    json_only(io, "verify")?;
    let ctx = context(io)?;
    let formula = source.load(&ctx)?;
    let bits = ctx.mantissa_bits();
    let constraint_tol = tolerance.unwrap_or_else(|| interpolate_tolerance(bits, 1e-10, 1e-30));
    let norm_tol = interpolate_tolerance(bits, 1e-14, 1e-35);
    let margin_tol = interpolate_tolerance(bits, 1e-12, 1e-25);
    let babuska_tol = interpolate_tolerance(bits, 1e-8, BABUSKA_TOL);

    let residuals = constraint_residuals(&formula, &ctx);
    let relative = relative_constraint_residuals(&formula, &ctx);
    let worst = relative.iter().map(|r| r.to_f64()).fold(0.0, f64::max);
    let mut checks = vec![Check {
        name: "constraints",
        passed: worst <= constraint_tol,
        value: Some(worst),
        tolerance: constraint_tol,
        detail: None,
    }];

    let norm = norm_squared(&formula, &ctx);
    checks.push(match &norm {
        Ok(v) => Check {
            name: "norm",
            passed: v.to_f64() >= -norm_tol,
            value: Some(v.to_f64()),
            tolerance: norm_tol,
            detail: None,
        },
        Err(e) => Check {
            name: "norm",
            passed: false,
            value: None,
            tolerance: norm_tol,
            detail: Some(e.to_string()),
        },
    });

    let recovered = recover_multipliers(&formula, &ctx);
    checks.push(match &recovered {
        Ok(opt) => match perturbation_margin(opt, samples, PERTURBATION_EPS, seed, &ctx) {
            Ok(rep) => Check {
                name: "optimality_margin",
                passed: rep.min_increase.to_f64() >= -margin_tol,
                value: Some(rep.min_increase.to_f64()),
                tolerance: margin_tol,
                detail: Some(format!("{} samples in a {}-dimensional null space", rep.samples, rep.null_dim)),
            },
            Err(e) => failed_check("optimality_margin", margin_tol, &e),
        },
        Err(e) => failed_check("optimality_margin", margin_tol, e),
    });
    let node_residuals = recovered.as_ref().ok().map(|opt| babuska_node_check(opt, &ctx));
    checks.push(match &node_residuals {
        Some(Ok(res)) => {
            let max = res.max_relative();
            Check {
                name: "babuska",
                passed: max <= babuska_tol,
                value: Some(max),
                tolerance: babuska_tol,
                detail: None,
            }
        }
        Some(Err(e)) => failed_check("babuska", babuska_tol, e),
        None => failed_check("babuska", babuska_tol, recovered.as_ref().unwrap_err()),
    });

    let failing: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
    let p = formula.params();
    let report = json!({
        "m": p.m(),
        "N": p.n(),
        "k": p.k(),
        "precision_bits": bits,
        "passed": failing.is_empty(),
        "constraint_residuals": residuals.iter().map(to_decimal).collect::<Vec<_>>(),
        "relative_constraint_residuals": relative.iter().map(|r| r.to_f64()).collect::<Vec<_>>(),
        "norm_squared": norm.as_ref().ok().map(to_decimal),
        "node_residuals": match &node_residuals {
            Some(Ok(res)) => json!(res.relative()),
            _ => Value::Null,
        },
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
    });
    write(io, &json_bytes(&report))?;
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failing))
    }
}

fn failed_check(name: &'static str, tolerance: f64, e: &Error) -> Check {
    Check {
        name,
        passed: false,
        value: None,
        tolerance,
        detail: Some(e.to_string()),
    }
}

pub fn spectral(grid: &Grid, io: &Io) -> Result<(), Failure> {
    let ctx = context(io)?;
    let p = params(grid.m, grid.n, grid.k)?;
    let (rep, cv) = cross_validate(p, &ctx)?;
    let boundary_tol = interpolate_tolerance(ctx.mantissa_bits(), 1e-6, BOUNDARY_TOL);
    let boundary = cv.c0_discrepancy.max(cv.ck1_discrepancy);
    if boundary > boundary_tol {
        return Err(Error::FitFailure {
            residual: boundary,
            tolerance: boundary_tol,
        }
        .into());
    }
    let bytes = match io.format {
        Format::Json => {
            let mut v = serde_json::to_value(rep.to_json()).map_err(Error::from)?;
            v["cross_validation"] = serde_json::to_value(&cv).map_err(Error::from)?;
            json_bytes(&v)
        }
        Format::Csv => {
            let mut s = String::from("j,lambda_re,lambda_im,M_re,M_im,N_re,N_im\n");
            for (j, ((l, mj), nj)) in rep.roots.iter().zip(&rep.m_amp).zip(&rep.n_amp).enumerate() {
                let _ = writeln!(
                    s,
                    "{j},{},{},{},{},{},{}",
                    to_decimal(&l.re),
                    to_decimal(&l.im),
                    to_decimal(&mj.re),
                    to_decimal(&mj.im),
                    to_decimal(&nj.re),
                    to_decimal(&nj.im)
                );
            }
            s.into_bytes()
        }
    };
    write(io, &bytes)
}

fn problem(name: &str) -> Result<IvpProblem, Failure> {
    IvpProblem::builtin(name).map_err(|e| Failure::Config(e.to_string()))
}

pub fn integrate(name: &str, grid: &Grid, startup: Startup, multiprecision: bool, io: &Io) -> Result<(), Failure> {
    let ctx = context(io)?;
    let prob = problem(name)?;
    let p = params(grid.m, grid.n, grid.k)?;
    let opt = solve(p, &ctx)?;
    let traj = if multiprecision {
        integrate_optimal_mp(&prob, &opt, &ctx)?
    } else {
        integrate_optimal(&prob, &opt, startup)?
    };
    let max_error = traj.max_error();
    let bytes = match io.format {
        Format::Json => {
            let mut v = serde_json::to_value(&traj).map_err(Error::from)?;
            v["startup"] = json!(if multiprecision { Startup::Exact } else { startup }.to_string());
            v["max_abs_error"] = json!(max_error);
            json_bytes(&v)
        }
        Format::Csv => {
            if let Some(e) = max_error {
                eprintln!("optfd: max abs error {e:.6e}");
            }
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)?;
            buf
        }
    };
    write(io, &bytes)
}

/// Report plus a flag telling whether the errors sat at roundoff.
fn sweep(
    method: Method,
    prob: &IvpProblem,
    n_list: &[u32],
    startup: Startup,
    ctx: &PrecisionContext,
) -> Result<(ConvergenceReport, bool), Failure> {
    match measure_order(method, prob, n_list, startup, ctx) {
        Ok(r) => Ok((r, false)),
        Err(Error::DegenerateFit { .. }) => {
            let rows = n_list
                .iter()
                .map(|&n| {
                    let t = run_method(method, prob, n, startup, ctx)?;
                    Ok(ConvergenceRow {
                        n,
                        max_abs_error: t.max_error().unwrap_or(f64::NAN),
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let report = ConvergenceReport {
                method: method.to_string(),
                problem: prob.name().to_string(),
                rows,
                fitted_order: f64::NAN,
            };
            Ok((report, true))
        }
        Err(Error::InvalidParams(s)) => Err(Failure::Config(s)),
        Err(e) => Err(e.into()),
    }
}

pub fn convergence(name: &str, m: u32, k: u32, n_list: &[u32], startup: Startup, io: &Io) -> Result<(), Failure> {
    let ctx = context(io)?;
    let prob = problem(name)?;
    for &n in n_list {
        params(m, n, k)?;
    }
    let ab_k = k.min(MAX_AB_STEPS);
    let methods = [Method::Optimal { m, k }, Method::AdamsBashforth { k: ab_k }];
    let mut reports = Vec::new();
    let mut exact = Vec::new();
    for method in methods {
        let (r, degenerate) = sweep(method, &prob, n_list, startup, &ctx)?;
        reports.push(r);
        exact.push(degenerate);
    }
    let bytes = match io.format {
        Format::Json => {
            let items: Vec<Value> = reports
                .iter()
                .zip(&exact)
                .map(|(r, &ex)| {
                    json!({
                        "method": r.method,
                        "problem": r.problem,
                        "rows": r.rows,
                        "fitted_order": if ex { json!("exact") } else { json!(r.fitted_order) },
                    })
                })
                .collect();
            json_bytes(&json!({
                "problem": prob.name(),
                "startup": startup.to_string(),
                "reports": items,
            }))
        }
        Format::Csv => {
            for (r, ex) in reports.iter().zip(&exact) {
                if *ex {
                    eprintln!("optfd: {}: exact", r.method);
                } else {
                    eprintln!("optfd: {}: fitted order {:.4}", r.method, r.fitted_order);
                }
            }
            let mut buf = Vec::new();
            write_reports_csv(&reports, &mut buf)?;
            buf
        }
    };
    write(io, &bytes)
}
