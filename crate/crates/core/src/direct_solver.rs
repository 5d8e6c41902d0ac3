//! Optimality system for the derivative coefficients `C1` and its solution.
//!
//! For fixed left coefficients `C` and a support `Omega` of `C1` the
//! minimizer of the error norm satisfies
//!
//! ```text
//! h sum_{g in Omega} C1_g G''(h b - h g) + P(h b) + lambda e^(-h b) = f(h b),   b in Omega
//! h sum_{g in Omega} C1_g (h g)^(a-1) = g_a,                                   a = 1..m-2
//! h sum_{g in Omega} C1_g e^(-h g)    = g_exp
//! ```
//!
//! with `f(h b) = -sum_g C_g G'(h b - h g)`, `g_a = (1/a) sum_g C_g (h g)^a`,
//! `g_exp = -sum_g C_g e^(-h g)` and `P` a polynomial of degree `m - 3`.
//! The `a = 0` constraint involves only `C` and is satisfied by
//! construction, so there are `m - 1` multipliers.
//!
//! The Adams case `C = (0, ..., 0, -1, 1)`, `Omega = {0, ..., k-1}` gives the
//! explicit formula `phi(hk) - phi(hk - h) ~ h sum_{b<k} C1_b phi'(hb)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discrete::DiscreteFunction;
use crate::error::{Error, Result};
use crate::functional::{norm_squared, FdFormula, FormulaParams, NormEvaluator};
use crate::kernel::{factorial, KernelFamily};
use crate::linalg::{least_squares, null_space, solve_refined, vec_norm_2, vec_norm_inf, Matrix};
use crate::precision::{abs_f64, pow_u, PrecisionContext, Real};

/// Required relative residual of the refined solve at 256 bits.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-25;
/// Required relative residual of the node re-evaluation at 256 bits.
pub const BABUSKA_TOL: f64 = 1e-24;

/// Left coefficients of the explicit Adams formula: `C_k = 1`,
/// `C_{k-1} = -1`, zero elsewhere.
pub fn adams_left_coeffs(k: u32, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    if k < 2 {
        return Err(Error::InvalidParams(format!(
            "Adams formulas need k >= 2, got k = {k}"
        )));
    }
    let mut c = vec![ctx.zero(); k as usize + 1];
    c[k as usize] = ctx.one();
    c[k as usize - 1] = ctx.real(-1);
    Ok(c)
}

/// Explicit Adams-type problem: fixed `C`, `C1` supported on `0..k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdamsSpec {
    params: FormulaParams,
}

impl AdamsSpec {
    pub fn new(params: FormulaParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &FormulaParams {
        &self.params
    }

    pub fn left_coeffs(&self, ctx: &PrecisionContext) -> Vec<Real> {
        adams_left_coeffs(self.params.k(), ctx).expect("FormulaParams guarantees k >= 3")
    }

    /// `Omega = {0, ..., k-1}`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.params.k() as usize).collect()
    }
}

/// What to assemble: the Adams specialization or arbitrary `C` with an
/// explicit support for `C1`.
#[derive(Clone, Debug)]
pub enum SystemSpec {
    Adams(AdamsSpec),
    Generic {
        params: FormulaParams,
        c: Vec<Real>,
        support: Vec<usize>,
    },
}

impl SystemSpec {
    pub fn adams(params: FormulaParams) -> Self {
        SystemSpec::Adams(AdamsSpec::new(params))
    }

    pub fn params(&self) -> &FormulaParams {
        match self {
            SystemSpec::Adams(a) => a.params(),
            SystemSpec::Generic { params, .. } => params,
        }
    }
}

/// `-sum_g C_g G'(h beta - h g)` at one node, from freshly evaluated kernels.
pub fn rhs_f_at(params: &FormulaParams, c: &[Real], beta: i64, ctx: &PrecisionContext) -> Result<Real> {
    check_len(params, c)?;
    let kernels = KernelFamily::new(params.m(), *ctx)?;
    let mut acc = ctx.zero();
    for (g, cg) in c.iter().enumerate() {
        if cg.is_zero() {
            continue;
        }
        let x = params.node(beta - g as i64, ctx);
        acc -= ctx.real(cg * &kernels.g1(&x));
    }
    Ok(acc)
}

/// `f(h beta)` for every `beta` in `support`.
pub fn rhs_f(params: &FormulaParams, c: &[Real], support: &[usize], ctx: &PrecisionContext) -> Result<Vec<Real>> {
    support
        .iter()
        .map(|&b| rhs_f_at(params, c, b as i64, ctx))
        .collect()
}

/// Closed form of `f(h beta)` for Adams `C`, `0 <= beta <= k`.
pub fn adams_rhs_f(params: &FormulaParams, beta: u32, ctx: &PrecisionContext) -> Result<Real> {
    let (m, k) = (params.m(), params.k());
    if beta > k {
        return Err(Error::InvalidParams(format!(
            "node index {beta} outside 0..={k}"
        )));
    }
    let h = params.h(ctx);
    let eh = ctx.real(h.exp_ref());
    if beta == k {
        // (cosh h - sum_{j=1}^{m-1} h^(2j-2)/(2j-2)!) / 2
        let mut s = ctx.real(h.cosh_ref());
        for j in 1..m {
            s -= pow_u(&h, 2 * j - 2, ctx) / factorial(2 * j - 2, ctx);
        }
        return Ok(s / 2u32);
    }
    let a = params.node(i64::from(beta) - i64::from(k), ctx);
    let b = ctx.real(&a + &h);
    let ea = ctx.real(a.exp_ref());
    let ema = ctx.real((-a.clone()).exp_ref());
    let emh = ctx.one() / &eh;
    let mut s = ctx.real(&ea * ctx.real(1 - &eh)) / 2u32 + ctx.real(&ema * ctx.real(1 - &emh)) / 2u32;
    for j in 2..m {
        let p = 2 * j - 2;
        s -= (pow_u(&a, p, ctx) - pow_u(&b, p, ctx)) / factorial(p, ctx);
    }
    Ok(s / 2u32)
}

/// `g_a = (1/a) sum_g C_g (h g)^a`, `1 <= a <= m - 2`.
pub fn rhs_g_alpha(params: &FormulaParams, c: &[Real], alpha: u32, ctx: &PrecisionContext) -> Result<Real> {
    check_len(params, c)?;
    check_alpha(params, alpha)?;
    let mut acc = ctx.zero();
    for (g, cg) in c.iter().enumerate() {
        if cg.is_zero() {
            continue;
        }
        acc += ctx.real(cg * &pow_u(&params.node(g as i64, ctx), alpha, ctx));
    }
    Ok(acc / alpha)
}

/// Closed form `g_a = h^a (k^a - (k-1)^a) / a` for Adams `C`.
pub fn adams_rhs_g_alpha(params: &FormulaParams, alpha: u32, ctx: &PrecisionContext) -> Result<Real> {
    check_alpha(params, alpha)?;
    let k = ctx.real(params.k());
    let km1 = ctx.real(params.k() - 1);
    let diff = pow_u(&k, alpha, ctx) - pow_u(&km1, alpha, ctx);
    Ok(pow_u(&params.h(ctx), alpha, ctx) * diff / alpha)
}

/// `g_exp = -sum_g C_g e^(-h g)`.
pub fn rhs_g_exp(params: &FormulaParams, c: &[Real], ctx: &PrecisionContext) -> Result<Real> {
    check_len(params, c)?;
    let mut acc = ctx.zero();
    for (g, cg) in c.iter().enumerate() {
        if cg.is_zero() {
            continue;
        }
        acc -= ctx.real(cg * &exp_neg_node(params, g, ctx));
    }
    Ok(acc)
}

/// Closed form `g_exp = e^(-hk + h) - e^(-hk)` for Adams `C`.
pub fn adams_rhs_g_exp(params: &FormulaParams, ctx: &PrecisionContext) -> Real {
    let k = params.k() as usize;
    exp_neg_node(params, k - 1, ctx) - exp_neg_node(params, k, ctx)
}

fn exp_neg_node(params: &FormulaParams, g: usize, ctx: &PrecisionContext) -> Real {
    ctx.real(-params.node(g as i64, ctx)).exp()
}

fn check_len(params: &FormulaParams, c: &[Real]) -> Result<()> {
    if c.len() != params.node_count() {
        return Err(Error::Dimension(format!(
            "C must have k + 1 = {} entries, got {}",
            params.node_count(),
            c.len()
        )));
    }
    Ok(())
}

fn check_alpha(params: &FormulaParams, alpha: u32) -> Result<()> {
    if alpha < 1 || alpha > params.m() - 2 {
        return Err(Error::InvalidParams(format!(
            "moment index must satisfy 1 <= alpha <= m - 2 = {}, got {alpha}",
            params.m() - 2
        )));
    }
    Ok(())
}

/// Meaning of one column of the assembled system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unknown {
    /// `C1[beta]`.
    C1(usize),
    /// Coefficient of `(h beta)^alpha` in the multiplier polynomial.
    Poly(u32),
    /// Coefficient of `e^(-h beta)`.
    Exp,
}

/// Square system `matrix x = rhs` for `(C1 on Omega, multipliers)`.
#[derive(Clone, Debug)]
pub struct SlaeSystem {
    pub params: FormulaParams,
    pub c: Vec<Real>,
    pub support: Vec<usize>,
    pub matrix: Matrix,
    pub rhs: Vec<Real>,
    pub unknown_labels: Vec<Unknown>,
}

impl SlaeSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

/// Rows `h (h g)^(a-1)`, `a = 1..m-2`, then `h e^(-h g)`, over `g` in
/// `support`. Null vectors of this matrix are the admissible perturbations
/// of `C1`.
pub fn constraint_matrix(params: &FormulaParams, support: &[usize], ctx: &PrecisionContext) -> Matrix {
    let m = params.m();
    let h = params.h(ctx);
    let mut a = Matrix::zeros(m as usize - 1, support.len(), ctx);
    for (j, &g) in support.iter().enumerate() {
        let x = params.node(g as i64, ctx);
        for alpha in 1..=m - 2 {
            a[(alpha as usize - 1, j)] = ctx.real(&h * &pow_u(&x, alpha - 1, ctx));
        }
        a[(m as usize - 2, j)] = ctx.real(&h * &exp_neg_node(params, g, ctx));
    }
    a
}

/// Builds the optimality system. The Adams right-hand sides use the
/// closed forms; the generic ones use the kernel sums.
pub fn assemble(spec: &SystemSpec, ctx: &PrecisionContext) -> Result<SlaeSystem> {
    let params = *spec.params();
    let (c, support, adams) = match spec {
        SystemSpec::Adams(a) => (a.left_coeffs(ctx), a.support(), true),
        SystemSpec::Generic { c, support, .. } => {
            check_len(&params, c)?;
            check_support(&params, support)?;
            check_zero_sum(c, ctx)?;
            (c.clone(), support.clone(), false)
        }
    };
    let m = params.m();
    let s = support.len();
    let n = s + m as usize - 1;
    let h = params.h(ctx);
    let kernels = KernelFamily::new(m, *ctx)?;
    let mut a = Matrix::zeros(n, n, ctx);
    let mut rhs = Vec::with_capacity(n);

    for (i, &b) in support.iter().enumerate() {
        for (j, &g) in support.iter().enumerate() {
            let x = params.node(b as i64 - g as i64, ctx);
            a[(i, j)] = ctx.real(&h * &kernels.g2(&x));
        }
        let xb = params.node(b as i64, ctx);
        for p in 0..m - 2 {
            a[(i, s + p as usize)] = pow_u(&xb, p, ctx);
        }
        a[(i, n - 1)] = exp_neg_node(&params, b, ctx);
        rhs.push(if adams {
            adams_rhs_f(&params, b as u32, ctx)?
        } else {
            rhs_f_at(&params, &c, b as i64, ctx)?
        });
    }

    let constraints = constraint_matrix(&params, &support, ctx);
    for r in 0..m as usize - 1 {
        for j in 0..s {
            a[(s + r, j)] = constraints[(r, j)].clone();
        }
    }
    for alpha in 1..=m - 2 {
        rhs.push(if adams {
            adams_rhs_g_alpha(&params, alpha, ctx)?
        } else {
            rhs_g_alpha(&params, &c, alpha, ctx)?
        });
    }
    rhs.push(if adams {
        adams_rhs_g_exp(&params, ctx)
    } else {
        rhs_g_exp(&params, &c, ctx)?
    });

    let mut unknown_labels: Vec<Unknown> = support.iter().map(|&b| Unknown::C1(b)).collect();
    unknown_labels.extend((0..m - 2).map(Unknown::Poly));
    unknown_labels.push(Unknown::Exp);

    Ok(SlaeSystem {
        params,
        c,
        support,
        matrix: a,
        rhs,
        unknown_labels,
    })
}

fn check_support(params: &FormulaParams, support: &[usize]) -> Result<()> {
    let k = params.k() as usize;
    if let Some(b) = support.iter().find(|&&b| b > k) {
        return Err(Error::Dimension(format!(
            "support index {b} outside 0..={k}"
        )));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != support.len() {
        return Err(Error::Dimension("support indices must be distinct".into()));
    }
    let need = params.m() as usize - 1;
    if support.len() < need {
        return Err(Error::Dimension(format!(
            "support has {} nodes but the {need} constraints need at least {need}",
            support.len()
        )));
    }
    Ok(())
}

fn check_zero_sum(c: &[Real], ctx: &PrecisionContext) -> Result<()> {
    let sum = c.iter().fold(ctx.zero(), |acc, v| acc + v);
    let scale = c.iter().fold(ctx.zero(), |acc, v| acc + ctx.real(v.abs_ref()));
    let tol = ctx.real(&scale * &ctx.epsilon()) * (c.len() as u32) * 4u32;
    if ctx.real(sum.abs_ref()) > tol {
        return Err(Error::InvalidParams(format!(
            "left coefficients must sum to zero (exactness on constants), got {:.3e}",
            sum.to_f64()
        )));
    }
    Ok(())
}

/// Solution of the optimality system.
#[derive(Clone, Debug)]
pub struct OptimalFormula {
    /// `C` as given and `C1` from the solve, zero off the support.
    pub formula: FdFormula,
    /// Polynomial coefficients `(h beta)^0 .. (h beta)^(m-3)` then the
    /// exponential multiplier.
    pub multipliers: Vec<Real>,
    pub support: Vec<usize>,
    pub residual_norm: Real,
    pub condition_estimate: Real,
}

impl OptimalFormula {
    pub fn params(&self) -> &FormulaParams {
        self.formula.params()
    }

    pub fn diagnostics(&self, ctx: &PrecisionContext) -> Result<SolverDiagnostics> {
        Ok(SolverDiagnostics {
            condition_estimate: self.condition_estimate.to_f64(),
            residual_norm: self.residual_norm.to_f64(),
            babuska_max_residual: babuska_node_check(self, ctx)?.max_relative(),
        })
    }
}

/// Diagnostics emitted alongside a solved formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub condition_estimate: f64,
    pub residual_norm: f64,
    pub babuska_max_residual: f64,
}

/// Solves an assembled system by pivoted LU with one refinement step.
pub fn solve(system: &SlaeSystem, ctx: &PrecisionContext) -> Result<OptimalFormula> {
    let sol = solve_refined(&system.matrix, &system.rhs, ctx)?;
    let s = system.support.len();
    let mut c1 = vec![ctx.zero(); system.params.node_count()];
    for (i, &b) in system.support.iter().enumerate() {
        c1[b] = sol.x[i].clone();
    }
    let formula = FdFormula::new(system.params, system.c.clone(), c1)?;
    Ok(OptimalFormula {
        formula,
        multipliers: sol.x[s..].to_vec(),
        support: system.support.clone(),
        residual_norm: sol.residual_norm,
        condition_estimate: sol.condition_estimate,
    })
}

/// Assembles and solves the explicit Adams problem.
pub fn optimal_adams(params: FormulaParams, ctx: &PrecisionContext) -> Result<OptimalFormula> {
    solve(&assemble(&SystemSpec::adams(params), ctx)?, ctx)
}

/// Rebuilds the optimality data of a formula known only by its
/// coefficients. The multipliers are the least-squares fit of the
/// variational equations on the support (`0..k` for Adams-type formulas,
/// `0..=k` otherwise); at an optimum the fit is exact.
///
/// `residual_norm` holds the relative residual of that fit and
/// `condition_estimate` is not computed (zero).
pub fn recover_multipliers(formula: &FdFormula, ctx: &PrecisionContext) -> Result<OptimalFormula> {
    let params = *formula.params();
    let k = params.k() as usize;
    let spec = if formula.is_adams_type() {
        SystemSpec::adams(params)
    } else {
        SystemSpec::Generic {
            params,
            c: formula.c().to_vec(),
            support: (0..=k).collect(),
        }
    };
    let sys = assemble(&spec, ctx)?;
    let s = sys.support.len();
    let q = params.m() as usize - 1;
    let mut lhs = Matrix::zeros(s, q, ctx);
    let mut target = Vec::with_capacity(s);
    for i in 0..s {
        let mut t = sys.rhs[i].clone();
        for (j, &g) in sys.support.iter().enumerate() {
            t -= ctx.real(&sys.matrix[(i, j)] * &formula.c1()[g]);
        }
        for j in 0..q {
            lhs[(i, j)] = sys.matrix[(i, s + j)].clone();
        }
        target.push(t);
    }
    let multipliers = least_squares(&lhs, &target, ctx)?;
    let fit = lhs.mul_vec(&multipliers, ctx);
    let defect: Vec<Real> = fit.iter().zip(&target).map(|(a, b)| ctx.real(a - b)).collect();
    let scale = vec_norm_inf(&sys.rhs, ctx);
    let residual_norm = if scale.is_zero() {
        vec_norm_inf(&defect, ctx)
    } else {
        vec_norm_inf(&defect, ctx) / scale
    };
    Ok(OptimalFormula {
        formula: formula.clone(),
        multipliers,
        support: sys.support,
        residual_norm,
        condition_estimate: ctx.zero(),
    })
}

/// Residuals of the variational equations at the support nodes together
/// with the scale they are measured against.
#[derive(Clone, Debug)]
pub struct NodeResiduals {
    pub nodes: Vec<usize>,
    /// `h (G'' * C1)(h b) + P(h b) + lambda e^(-h b) - f(h b)`.
    pub residuals: Vec<Real>,
    /// Largest magnitude of any single term over all nodes, at least
    /// `max |f|`.
    pub scale: Real,
}

impl NodeResiduals {
    pub fn relative(&self) -> Vec<f64> {
        self.residuals
            .iter()
            .map(|r| {
                if self.scale.is_zero() {
                    abs_f64(r)
                } else {
                    abs_f64(&Real::with_val(r.prec(), r / &self.scale))
                }
            })
            .collect()
    }

    pub fn max_relative(&self) -> f64 {
        self.relative().into_iter().fold(0.0, f64::max)
    }
}

/// Re-evaluates the variational equations at every support node through
/// discrete convolution with freshly computed kernels, independently of the
/// assembled matrix. At the optimum all residuals vanish, which is the
/// statement `psi'(h beta) = 0` for the extremal function.
pub fn babuska_node_check(opt: &OptimalFormula, ctx: &PrecisionContext) -> Result<NodeResiduals> {
    let params = *opt.params();
    let m = params.m();
    if opt.multipliers.len() != m as usize - 1 {
        return Err(Error::Dimension(format!(
            "expected {} multipliers, got {}",
            m - 1,
            opt.multipliers.len()
        )));
    }
    let k = params.k() as i64;
    let h = params.h(ctx);
    let kernels = KernelFamily::new(m, *ctx)?;
    let g2 = DiscreteFunction::from_fn(-k..=k, |d| ctx.real(&h * &kernels.g2(&params.node(d, ctx))));
    let c1 = DiscreteFunction::from_fn(opt.support.iter().map(|&b| b as i64), |b| {
        opt.formula.c1()[b as usize].clone()
    });
    let (poly, lambda) = opt.multipliers.split_at(m as usize - 2);
    let lambda = &lambda[0];

    let mut residuals = Vec::with_capacity(opt.support.len());
    let mut scale = ctx.zero();
    for &b in &opt.support {
        let bi = b as i64;
        let conv = g2.convolve_at(&c1, bi, ctx);
        for (g, v) in c1.iter() {
            if let Some(w) = g2.get(bi - g) {
                scale = scale.max(&ctx.real(v * w).abs());
            }
        }
        let x = params.node(bi, ctx);
        let mut p = ctx.zero();
        for (alpha, coef) in poly.iter().enumerate() {
            let t = ctx.real(coef * &pow_u(&x, alpha as u32, ctx));
            scale = scale.max(&ctx.real(t.abs_ref()));
            p += t;
        }
        let e = ctx.real(lambda * &ctx.real(-&x).exp());
        scale = scale.max(&ctx.real(e.abs_ref()));
        let f = rhs_f_at(&params, opt.formula.c(), bi, ctx)?;
        scale = scale.max(&ctx.real(f.abs_ref()));
        residuals.push(conv + p + e - f);
    }
    Ok(NodeResiduals {
        nodes: opt.support.clone(),
        residuals,
        scale,
    })
}

/// Outcome of random constraint-preserving perturbations of `C1`.
#[derive(Clone, Debug)]
pub struct PerturbationReport {
    pub baseline: Real,
    /// `min_z (norm^2(C1 + eps z) - norm^2(C1))`.
    pub min_increase: Real,
    pub samples: usize,
    pub null_dim: usize,
}

/// Perturbs the optimal `C1` along `samples` seeded random unit directions
/// in the null space of the constraint matrix and records the smallest
/// change of the squared norm. At a minimum it is nonnegative up to
/// rounding.
pub fn perturbation_margin(
    opt: &OptimalFormula,
    samples: usize,
    eps: f64,
    seed: u64,
    ctx: &PrecisionContext,
) -> Result<PerturbationReport> {
    let params = *opt.params();
    let a = constraint_matrix(&params, &opt.support, ctx);
    let basis = null_space(&a, ctx);
    let baseline = norm_squared(&opt.formula, ctx)?;
    let evaluator = NormEvaluator::new(params, ctx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_increase: Option<Real> = None;
    if basis.is_empty() {
        return Ok(PerturbationReport {
            baseline,
            min_increase: ctx.zero(),
            samples: 0,
            null_dim: 0,
        });
    }
    let eps = ctx.real(eps);
    for _ in 0..samples {
        let mut z = vec![ctx.zero(); opt.support.len()];
        for v in &basis {
            let w: f64 = rng.gen_range(-1.0..1.0);
            for (zi, vi) in z.iter_mut().zip(v) {
                *zi += ctx.real(vi * w);
            }
        }
        let norm = vec_norm_2(&z, ctx);
        if norm.is_zero() {
            continue;
        }
        let mut c1 = opt.formula.c1().to_vec();
        for (zi, &b) in z.iter().zip(&opt.support) {
            c1[b] += ctx.real(zi / &norm) * &eps;
        }
        let value = evaluator.norm_squared_unchecked(opt.formula.c(), &c1);
        let inc = value - &baseline;
        min_increase = Some(match min_increase {
            Some(cur) if cur <= inc => cur,
            _ => inc,
        });
    }
    Ok(PerturbationReport {
        baseline,
        min_increase: min_increase.unwrap_or_else(|| ctx.zero()),
        samples,
        null_dim: basis.len(),
    })
}
