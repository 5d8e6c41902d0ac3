//! Finite-difference formulas and their error functional on `W2^(m,m-1)(0,1)`.
//!
//! A formula on the grid `h beta`, `beta = 0..=k`, `h = 1/N` is the pair of
//! coefficient vectors `C` and `C1`; its error functional is
//!
//! ```text
//! l(phi) = sum_b C_b phi(h b) - h sum_b C1_b phi'(h b)
//! ```
//!
//! The functional is admissible when it annihilates the seminorm kernel
//! `{1, x, ..., x^(m-2), e^(-x)}`. For admissible formulas the squared norm
//! has the closed form implemented by [`NormEvaluator`]:
//!
//! ```text
//! (-1)^m [ sum C_g C_b G(h(g-b)) - 2h sum C1_g C_b G'(h(g-b)) - h^2 sum C1_g C1_b G''(h(g-b)) ]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelFamily;
use crate::precision::{abs_f64, pow_u, to_decimal, PrecisionContext, Real};
use crate::quadrature::integrate_adaptive;

/// Relative agreement required between successive quadrature refinements.
pub const W_NORM_REL_TOL: f64 = 1e-25;

/// Smoothness order `m`, grid density `N` (so `h = 1/N`) and node count
/// `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormulaParams {
    m: u32,
    #[serde(rename = "N")]
    n: u32,
    k: u32,
}

impl FormulaParams {
    /// Validates `m >= 3`, `N >= 1`, `k >= max(m, 3)` and `h k <= 1`.
    pub fn new(m: u32, n: u32, k: u32) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParams(format!(
                "m >= 3 is required, got m = {m}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if k < m {
            return Err(Error::InvalidParams(format!(
                "k >= m is required, got k = {k}, m = {m}"
            )));
        }
        if k < 3 {
            return Err(Error::InvalidParams(format!(
                "k >= 3 is required, got k = {k}"
            )));
        }
        if k > n {
            return Err(Error::InvalidParams(format!(
                "h k <= 1 is required (nodes must lie in [0, 1]), got k = {k}, N = {n}"
            )));
        }
        Ok(Self { m, n, k })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Grid density `N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of nodes, `k + 1`.
    pub fn node_count(&self) -> usize {
        self.k as usize + 1
    }

    /// Step `h = 1/N`.
    pub fn h(&self, ctx: &PrecisionContext) -> Real {
        ctx.one() / self.n
    }

    /// Node `h beta`; `beta` may be negative or beyond `k`.
    pub fn node(&self, beta: i64, ctx: &PrecisionContext) -> Real {
        ctx.real(beta) / self.n
    }

    /// All nodes `h beta`, `beta = 0..=k`.
    pub fn nodes(&self, ctx: &PrecisionContext) -> Vec<Real> {
        (0..=self.k as i64).map(|b| self.node(b, ctx)).collect()
    }
}

/// Left coefficients `C` and derivative coefficients `C1` on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FdFormula {
    params: FormulaParams,
    c: Vec<Real>,
    c1: Vec<Real>,
}

impl FdFormula {
    pub fn new(params: FormulaParams, c: Vec<Real>, c1: Vec<Real>) -> Result<Self> {
        let len = params.node_count();
        if c.len() != len || c1.len() != len {
            return Err(Error::Dimension(format!(
                "C and C1 must have k + 1 = {len} entries, got {} and {}",
                c.len(),
                c1.len()
            )));
        }
        Ok(Self { params, c, c1 })
    }

    /// Formula with both coefficient vectors zero.
    pub fn zero(params: FormulaParams, ctx: &PrecisionContext) -> Self {
        let len = params.node_count();
        Self {
            params,
            c: vec![ctx.zero(); len],
            c1: vec![ctx.zero(); len],
        }
    }

    pub fn params(&self) -> &FormulaParams {
        &self.params
    }

    pub fn c(&self) -> &[Real] {
        &self.c
    }

    pub fn c1(&self) -> &[Real] {
        &self.c1
    }

    pub fn c1_mut(&mut self) -> &mut [Real] {
        &mut self.c1
    }

    pub fn c_mut(&mut self) -> &mut [Real] {
        &mut self.c
    }

    /// Replaces `C1`, keeping `C`.
    pub fn with_c1(&self, c1: Vec<Real>) -> Result<Self> {
        Self::new(self.params, self.c.clone(), c1)
    }

    /// Multiplies both coefficient vectors by `s`.
    pub fn scaled(&self, s: &Real) -> Self {
        Self {
            params: self.params,
            c: self.c.iter().map(|v| Real::with_val(v.prec(), v * s)).collect(),
            c1: self.c1.iter().map(|v| Real::with_val(v.prec(), v * s)).collect(),
        }
    }

    /// `C_k = 1`, `C_{k-1} = -1`, other `C` zero, and `C1_k = 0`.
    pub fn is_adams_type(&self) -> bool {
        let k = self.params.k as usize;
        self.c[k] == 1
            && self.c[k - 1] == -1
            && self.c[..k - 1].iter().all(|v| v.is_zero())
            && self.c1[k].is_zero()
    }

    /// JSON interchange object `{m, N, k, C[], C1[]}` with decimal strings.
    pub fn to_json(&self) -> FdFormulaJson {
        FdFormulaJson {
            m: self.params.m,
            n: self.params.n,
            k: self.params.k,
            c: self.c.iter().map(to_decimal).collect(),
            c1: self.c1.iter().map(to_decimal).collect(),
        }
    }

    pub fn from_json(json: &FdFormulaJson, ctx: &PrecisionContext) -> Result<Self> {
        let params = FormulaParams::new(json.m, json.n, json.k)?;
        let parse = |v: &[String]| -> Result<Vec<Real>> { v.iter().map(|s| ctx.parse(s)).collect() };
        Self::new(params, parse(&json.c)?, parse(&json.c1)?)
    }

    pub fn from_json_str(s: &str, ctx: &PrecisionContext) -> Result<Self> {
        let json: FdFormulaJson = serde_json::from_str(s)?;
        Self::from_json(&json, ctx)
    }
}

/// Serialized form of [`FdFormula`]. Unknown fields are ignored on input so
/// diagnostics may travel alongside the coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdFormulaJson {
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub k: u32,
    #[serde(rename = "C")]
    pub c: Vec<String>,
    #[serde(rename = "C1")]
    pub c1: Vec<String>,
}

/// A function with an analytic first derivative, used to probe the error
/// functional.
pub trait TestFunction {
    fn value(&self, x: &Real, ctx: &PrecisionContext) -> Real;

    /// Exact derivative; never a numerical approximation.
    fn derivative(&self, x: &Real, ctx: &PrecisionContext) -> Real;

    /// Known value of the squared seminorm, if any.
    fn w_norm_hint(&self, _m: u32, _ctx: &PrecisionContext) -> Option<Real> {
        None
    }
}

/// Test function whose derivatives of every order are available, as
/// needed by [`w_norm_sq`].
pub trait SmoothTestFunction: TestFunction {
    fn nth_derivative(&self, n: u32, x: &Real, ctx: &PrecisionContext) -> Real;
}

/// Closed-form test functions with derivatives of all orders.
#[derive(Clone, Debug, PartialEq)]
pub enum Analytic {
    /// `e^(rate x)`
    Exp { rate: f64 },
    /// `sin(freq x)`
    Sin { freq: f64 },
    /// `cos(freq x)`
    Cos { freq: f64 },
    /// `x^exponent`
    Power { exponent: u32 },
    /// `sum coef_i f_i(x)`
    Sum(Vec<(f64, Analytic)>),
}

impl Analytic {
    pub fn exp(rate: f64) -> Self {
        Analytic::Exp { rate }
    }

    pub fn sin(freq: f64) -> Self {
        Analytic::Sin { freq }
    }

    pub fn cos(freq: f64) -> Self {
        Analytic::Cos { freq }
    }

    pub fn power(exponent: u32) -> Self {
        Analytic::Power { exponent }
    }

    fn eval_derivative(&self, n: u32, x: &Real, ctx: &PrecisionContext) -> Real {
        match self {
            Analytic::Exp { rate } => {
                let r = ctx.real(*rate);
                let e = ctx.real(&r * x).exp();
                (pow_u(&r, n, ctx)) * e
            }
            Analytic::Sin { freq } | Analytic::Cos { freq } => {
                let w = ctx.real(*freq);
                let arg = ctx.real(&w * x);
                let shift = if matches!(self, Analytic::Cos { .. }) { n + 1 } else { n };
                // d^n sin(wx) = w^n sin(wx + n pi/2)
                let base = match shift % 4 {
                    0 => arg.sin(),
                    1 => arg.cos(),
                    2 => -arg.sin(),
                    _ => -arg.cos(),
                };
                (pow_u(&w, n, ctx)) * base
            }
            Analytic::Power { exponent } => {
                let p = *exponent;
                if n > p {
                    return ctx.zero();
                }
                let mut coef = ctx.one();
                for i in 0..n {
                    coef *= p - i;
                }
                coef * (pow_u(x, p - n, ctx))
            }
            Analytic::Sum(terms) => terms.iter().fold(ctx.zero(), |acc, (c, f)| {
                acc + ctx.real(*c) * f.eval_derivative(n, x, ctx)
            }),
        }
    }
}

impl TestFunction for Analytic {
    fn value(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        self.eval_derivative(0, x, ctx)
    }

    fn derivative(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        self.eval_derivative(1, x, ctx)
    }
}

impl SmoothTestFunction for Analytic {
    fn nth_derivative(&self, n: u32, x: &Real, ctx: &PrecisionContext) -> Real {
        self.eval_derivative(n, x, ctx)
    }
}

/// Test function assembled from closures.
pub struct FnTestFunction<V, D> {
    value: V,
    derivative: D,
    w_norm: Option<f64>,
}

impl<V, D> FnTestFunction<V, D>
where
    V: Fn(&Real, &PrecisionContext) -> Real,
    D: Fn(&Real, &PrecisionContext) -> Real,
{
    pub fn new(value: V, derivative: D) -> Self {
        Self {
            value,
            derivative,
            w_norm: None,
        }
    }

    pub fn with_w_norm_hint(mut self, hint: f64) -> Self {
        self.w_norm = Some(hint);
        self
    }
}

impl<V, D> TestFunction for FnTestFunction<V, D>
where
    V: Fn(&Real, &PrecisionContext) -> Real,
    D: Fn(&Real, &PrecisionContext) -> Real,
{
    fn value(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        (self.value)(x, ctx)
    }

    fn derivative(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        (self.derivative)(x, ctx)
    }

    fn w_norm_hint(&self, _m: u32, ctx: &PrecisionContext) -> Option<Real> {
        self.w_norm.map(|v| ctx.real(v))
    }
}

/// `l(phi) = sum C_b phi(h b) - h sum C1_b phi'(h b)`.
pub fn apply_functional<F>(f: &FdFormula, phi: &F, ctx: &PrecisionContext) -> Real
where
    F: TestFunction + ?Sized,
{
    let (value_sum, deriv_sum) = functional_parts(f, phi, ctx);
    value_sum - ctx.real(&f.params.h(ctx) * &deriv_sum)
}

/// `(sum C_b phi(h b), sum C1_b phi'(h b))`.
fn functional_parts<F>(f: &FdFormula, phi: &F, ctx: &PrecisionContext) -> (Real, Real)
where
    F: TestFunction + ?Sized,
{
    let mut value_sum = ctx.zero();
    let mut deriv_sum = ctx.zero();
    for (beta, x) in f.params.nodes(ctx).iter().enumerate() {
        if !f.c[beta].is_zero() {
            value_sum += ctx.real(&f.c[beta] * &phi.value(x, ctx));
        }
        if !f.c1[beta].is_zero() {
            deriv_sum += ctx.real(&f.c1[beta] * &phi.derivative(x, ctx));
        }
    }
    (value_sum, deriv_sum)
}

/// Sum of the absolute values of the terms of `l(phi)`.
pub fn functional_scale<F>(f: &FdFormula, phi: &F, ctx: &PrecisionContext) -> Real
where
    F: TestFunction + ?Sized,
{
    let h = f.params.h(ctx);
    let mut s = ctx.zero();
    for (beta, x) in f.params.nodes(ctx).iter().enumerate() {
        s += ctx.real(&f.c[beta] * &phi.value(x, ctx)).abs();
        s += ctx.real(&f.c1[beta] * &phi.derivative(x, ctx)).abs() * &h;
    }
    s
}

/// The seminorm kernel `[1, x, ..., x^(m-2), e^(-x)]`.
pub fn kernel_basis(m: u32) -> Vec<Analytic> {
    let mut basis: Vec<Analytic> = (0..=m - 2).map(Analytic::power).collect();
    basis.push(Analytic::exp(-1.0));
    basis
}

/// `[l(1), l(x), ..., l(x^(m-2)), l(e^(-x))]`; all vanish exactly when the
/// formula is admissible.
pub fn constraint_residuals(f: &FdFormula, ctx: &PrecisionContext) -> Vec<Real> {
    kernel_basis(f.params.m)
        .iter()
        .map(|phi| apply_functional(f, phi, ctx))
        .collect()
}

/// Constraint residuals divided by the absolute size of their terms. A
/// residual whose terms are all zero counts as zero.
pub fn relative_constraint_residuals(f: &FdFormula, ctx: &PrecisionContext) -> Vec<Real> {
    kernel_basis(f.params.m)
        .iter()
        .map(|phi| {
            let r = apply_functional(f, phi, ctx);
            let s = functional_scale(f, phi, ctx);
            if s.is_zero() {
                ctx.zero()
            } else {
                r.abs() / s
            }
        })
        .collect()
}

/// Fails with [`Error::Admissibility`] when some relative constraint
/// residual exceeds `tolerance`.
pub fn check_admissible(f: &FdFormula, tolerance: f64, ctx: &PrecisionContext) -> Result<()> {
    for (row, r) in relative_constraint_residuals(f, ctx).iter().enumerate() {
        if *r > tolerance {
            return Err(Error::Admissibility {
                row,
                residual: abs_f64(r),
                tolerance,
            });
        }
    }
    Ok(())
}

/// Squared norm of the error functional. Guarded: the closed form holds only
/// for admissible formulas, so the constraints are checked first at the
/// context's admissibility tolerance.
pub fn norm_squared(f: &FdFormula, ctx: &PrecisionContext) -> Result<Real> {
    check_admissible(f, ctx.admissibility_tolerance(), ctx)?;
    Ok(NormEvaluator::new(*f.params(), ctx)?.norm_squared_unchecked(f.c(), f.c1()))
}

/// Kernel tables `G(hd)`, `G'(hd)`, `G''(hd)` for `|d| <= k` and the
/// quadratic form built from them.
#[derive(Clone, Debug)]
pub struct NormEvaluator {
    params: FormulaParams,
    ctx: PrecisionContext,
    g: Vec<Real>,
    g1: Vec<Real>,
    g2: Vec<Real>,
}

impl NormEvaluator {
    pub fn new(params: FormulaParams, ctx: &PrecisionContext) -> Result<Self> {
        let kernels = KernelFamily::new(params.m, *ctx)?;
        let k = params.k as i64;
        let mut g = Vec::with_capacity(2 * k as usize + 1);
        let mut g1 = Vec::with_capacity(2 * k as usize + 1);
        let mut g2 = Vec::with_capacity(2 * k as usize + 1);
        for d in -k..=k {
            let x = params.node(d, ctx);
            g.push(kernels.g(&x));
            g1.push(kernels.g1(&x));
            g2.push(kernels.g2(&x));
        }
        Ok(Self {
            params,
            ctx: *ctx,
            g,
            g1,
            g2,
        })
    }

    fn idx(&self, gamma: usize, beta: usize) -> usize {
        (gamma as i64 - beta as i64 + self.params.k as i64) as usize
    }

    /// The closed-form squared norm without the admissibility guard. Only
    /// meaningful when `(C, C1)` annihilates the seminorm kernel.
    pub fn norm_squared_unchecked(&self, c: &[Real], c1: &[Real]) -> Real {
        let ctx = &self.ctx;
        let len = self.params.node_count();
        assert!(c.len() == len && c1.len() == len, "coefficient length mismatch");
        let h = self.params.h(ctx);
        let mut cc = ctx.zero();
        let mut c1c = ctx.zero();
        let mut c1c1 = ctx.zero();
        for gamma in 0..len {
            for beta in 0..len {
                let i = self.idx(gamma, beta);
                if !c[gamma].is_zero() && !c[beta].is_zero() {
                    cc += ctx.real(&c[gamma] * &c[beta]) * &self.g[i];
                }
                if !c1[gamma].is_zero() && !c[beta].is_zero() {
                    c1c += ctx.real(&c1[gamma] * &c[beta]) * &self.g1[i];
                }
                if !c1[gamma].is_zero() && !c1[beta].is_zero() {
                    c1c1 += ctx.real(&c1[gamma] * &c1[beta]) * &self.g2[i];
                }
            }
        }
        let h2 = ctx.real(h.square_ref());
        let bracket = cc - ctx.real(&h * &c1c) * 2u32 - h2 * c1c1;
        if self.params.m.is_multiple_of(2) {
            bracket
        } else {
            -bracket
        }
    }
}

/// Squared seminorm `int_0^1 (phi^(m) + phi^(m-1))^2 dx` by composite
/// Gauss-Legendre quadrature with panel doubling.
///
/// The refinement target is `1e-25` relative, loosened to a small multiple
/// of the unit roundoff when the working precision cannot reach it.
pub fn w_norm_sq<F>(phi: &F, m: u32, ctx: &PrecisionContext) -> Result<Real>
where
    F: SmoothTestFunction + ?Sized,
{
    if m < 1 {
        return Err(Error::InvalidParams("m must be positive".into()));
    }
    let integrand = |x: &Real| {
        let s = phi.nth_derivative(m, x, ctx) + phi.nth_derivative(m - 1, x, ctx);
        ctx.real(s.square_ref())
    };
    let tol = W_NORM_REL_TOL.max(abs_f64(&ctx.epsilon()) * 1e3);
    integrate_adaptive(&integrand, &ctx.zero(), &ctx.one(), tol, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn adams(params: FormulaParams, c: &PrecisionContext) -> FdFormula {
        let mut f = FdFormula::zero(params, c);
        let k = params.k() as usize;
        f.c_mut()[k] = c.real(1);
        f.c_mut()[k - 1] = c.real(-1);
        f
    }

    #[test]
    fn params_guards() {
        assert!(FormulaParams::new(2, 10, 5).is_err());
        assert!(FormulaParams::new(3, 4, 5).is_err());
        assert!(FormulaParams::new(3, 10, 2).is_err());
        assert!(FormulaParams::new(4, 10, 3).is_err());
        assert!(FormulaParams::new(3, 0, 3).is_err());
        let p = FormulaParams::new(3, 10, 5).unwrap();
        assert_eq!(p.node_count(), 6);
        assert!(FormulaParams::new(3, 5, 5).is_ok());
    }

    #[test]
    fn formula_length_mismatch_rejected() {
        let c = ctx();
        let p = FormulaParams::new(3, 10, 5).unwrap();
        assert!(FdFormula::new(p, vec![c.zero(); 6], vec![c.zero(); 5]).is_err());
    }

    #[test]
    fn adams_left_side_on_constants_and_linear() {
        let c = ctx();
        let p = FormulaParams::new(3, 10, 5).unwrap();
        let mut f = adams(p, &c);
        for v in f.c1_mut() {
            *v = c.real(0.37);
        }
        f.c1_mut()[5] = c.zero();
        assert!(apply_functional(&f, &Analytic::power(0), &c).is_zero());

        let g = adams(p, &c);
        let lx = apply_functional(&g, &Analytic::power(1), &c);
        assert!(c.real(&lx - p.h(&c)).abs() < 1e-70);
    }

    #[test]
    fn constraint_residuals_of_plain_difference() {
        let c = ctx();
        let p = FormulaParams::new(3, 10, 5).unwrap();
        let f = adams(p, &c);
        let r = constraint_residuals(&f, &c);
        assert_eq!(r.len(), 3);
        assert!(r[0].is_zero());
        assert!(c.real(&r[1] - p.h(&c)).abs() < 1e-70);
        // l(e^-x) = e^(-hk) - e^(-hk + h)
        let h = p.h(&c);
        let expected = (-c.real(&h * 5u32)).exp() - (-c.real(&h * 4u32)).exp();
        assert!(c.real(&r[2] - &expected).abs() < 1e-70);
        assert!(!r[2].is_zero());
    }

    #[test]
    fn residuals_scale_linearly() {
        let c = ctx();
        let p = FormulaParams::new(4, 10, 6).unwrap();
        let mut f = adams(p, &c);
        for (i, v) in f.c1_mut().iter_mut().enumerate().take(6) {
            *v = c.real(0.1 * i as f64 - 0.2);
        }
        let s = c.real(-2.5);
        let r = constraint_residuals(&f, &c);
        let rs = constraint_residuals(&f.scaled(&s), &c);
        for (a, b) in r.iter().zip(&rs) {
            let diff = c.real(b - c.real(a * &s)).abs();
            assert!(diff < 1e-70);
        }
    }

    #[test]
    fn norm_of_zero_formula_is_zero() {
        let c = ctx();
        let p = FormulaParams::new(3, 10, 5).unwrap();
        assert!(norm_squared(&FdFormula::zero(p, &c), &c).unwrap().is_zero());
    }

    #[test]
    fn norm_guard_rejects_inadmissible() {
        let c = ctx();
        let p = FormulaParams::new(3, 10, 5).unwrap();
        let f = adams(p, &c);
        assert!(matches!(
            norm_squared(&f, &c),
            Err(Error::Admissibility { row: 1, .. })
        ));
    }

    #[test]
    fn w_norm_of_kernel_functions_vanishes() {
        let c = ctx();
        for m in 3..=6 {
            assert!(w_norm_sq(&Analytic::power(m - 2), m, &c).unwrap().is_zero());
            assert!(w_norm_sq(&Analytic::exp(-1.0), m, &c).unwrap().is_zero());
        }
    }

    #[test]
    fn w_norm_of_exp() {
        let c = ctx();
        // int_0^1 (2 e^x)^2 dx = 2 (e^2 - 1)
        let expected = c.parse("12.7781121978613004544608549211500156263606311").unwrap();
        for m in [3, 5] {
            let v = w_norm_sq(&Analytic::exp(1.0), m, &c).unwrap();
            assert!(c.real(&v - &expected).abs() < 1e-40);
        }
    }

    #[test]
    fn analytic_derivatives() {
        let c = ctx();
        let x = c.parse("0.3").unwrap();
        let s = Analytic::sin(3.0);
        // d/dx sin 3x = 3 cos 3x
        let expect = c.real(c.real(&x * 3u32).cos() * 3u32);
        assert!(c.real(&s.derivative(&x, &c) - &expect).abs() < 1e-70);
        // d^4 cos 2x = 16 cos 2x
        let cs = Analytic::cos(2.0);
        let expect = c.real(c.real(&x * 2u32).cos() * 16u32);
        assert!(c.real(&cs.nth_derivative(4, &x, &c) - &expect).abs() < 1e-70);
        // d^2 x^5 = 20 x^3
        let p = Analytic::power(5);
        let expect = pow_u(&x, 3, &c) * 20u32;
        assert!(c.real(&p.nth_derivative(2, &x, &c) - &expect).abs() < 1e-70);
        assert!(p.nth_derivative(6, &x, &c).is_zero());
    }

    #[test]
    fn json_round_trip() {
        let c = ctx();
        let p = FormulaParams::new(3, 10, 5).unwrap();
        let mut f = adams(p, &c);
        f.c1_mut()[2] = c.one() / 7u32;
        let text = serde_json::to_string(&f.to_json()).unwrap();
        assert!(text.contains("\"N\":10"));
        let back = FdFormula::from_json_str(&text, &c).unwrap();
        assert_eq!(back, f);
    }
}
