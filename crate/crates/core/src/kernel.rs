//! Green's function family of the operator `d^2m/dx^2m - d^(2m-2)/dx^(2m-2)`
//! and the Euler-Frobenius polynomials.
//!
//! With `S_p(a) = sum_{n >= p, n = p mod 2} a^n / n!` (the Taylor tail of
//! `sinh` or `cosh` starting at power `p`) the kernels are
//!
//! ```text
//! G_m(x)   =  S_{2m-1}(|x|) / 2
//! G'_m(x)  =  sign(x) S_{2m-2}(|x|) / 2
//! G''_m(x) =  S_{2m-3}(|x|) / 2
//! ```
//!
//! Evaluating on `|x|` and applying the sign last makes the parity
//! identities hold exactly. For `|x| <= 0.5` the tail is summed directly;
//! beyond that `sinh`/`cosh` minus the leading partial sum is used.

use std::fmt;

use rug::Integer;

use crate::error::{Error, Result};
use crate::precision::{pow_u, PrecisionContext, Real};

/// Radius below which kernels are summed from the Taylor tail.
pub const SERIES_RADIUS: f64 = 0.5;

/// Evaluators for `G_m`, `G'_m`, `G''_m` at a fixed order and precision.
#[derive(Clone, Copy, Debug)]
pub struct KernelFamily {
    m: u32,
    ctx: PrecisionContext,
}

impl KernelFamily {
    pub fn new(m: u32, ctx: PrecisionContext) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParams(format!(
                "kernel order m must be at least 3, got {m}"
            )));
        }
        Ok(Self { m, ctx })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    /// `G_m(x)`.
    pub fn g(&self, x: &Real) -> Real {
        let a = self.ctx.real(x.abs_ref());
        let mut t = sinh_cosh_tail(&a, 2 * self.m - 1, &self.ctx);
        t /= 2;
        t
    }

    /// `G'_m(x)`, odd in `x`.
    pub fn g1(&self, x: &Real) -> Real {
        let a = self.ctx.real(x.abs_ref());
        let mut t = sinh_cosh_tail(&a, 2 * self.m - 2, &self.ctx);
        t /= 2;
        if x.is_sign_negative() && !x.is_zero() {
            -t
        } else if x.is_zero() {
            self.ctx.zero()
        } else {
            t
        }
    }

    /// `G''_m(x)`, even in `x`. Note the truncated sum stops at `j = m - 2`.
    pub fn g2(&self, x: &Real) -> Real {
        let a = self.ctx.real(x.abs_ref());
        let mut t = sinh_cosh_tail(&a, 2 * self.m - 3, &self.ctx);
        t /= 2;
        t
    }
}

/// `G_m(x)`; rejects `m < 3`.
pub fn green_g(m: u32, x: &Real, ctx: &PrecisionContext) -> Result<Real> {
    Ok(KernelFamily::new(m, *ctx)?.g(x))
}

/// `G'_m(x)`; rejects `m < 3`.
pub fn green_g1(m: u32, x: &Real, ctx: &PrecisionContext) -> Result<Real> {
    Ok(KernelFamily::new(m, *ctx)?.g1(x))
}

/// `G''_m(x)`; rejects `m < 3`.
pub fn green_g2(m: u32, x: &Real, ctx: &PrecisionContext) -> Result<Real> {
    Ok(KernelFamily::new(m, *ctx)?.g2(x))
}

/// `sum_{n >= p, n = p (mod 2)} a^n / n!` for `a >= 0`.
fn sinh_cosh_tail(a: &Real, p: u32, ctx: &PrecisionContext) -> Real {
    if a.is_zero() {
        return ctx.zero();
    }
    if *a <= SERIES_RADIUS {
        series_tail(a, p, ctx)
    } else {
        closed_form_tail(a, p, ctx)
    }
}

fn series_tail(a: &Real, p: u32, ctx: &PrecisionContext) -> Real {
    let a2 = ctx.real(a.square_ref());
    // a^p / p!
    let mut term = pow_u(a, p, ctx);
    term /= ctx.real(Integer::from(Integer::factorial(p)));
    let mut sum = term.clone();
    let eps = ctx.epsilon();
    let mut n = p;
    loop {
        term *= &a2;
        term /= (n + 1) * (n + 2);
        n += 2;
        sum += &term;
        if ctx.real(term.abs_ref()) <= ctx.real(&eps * &sum).abs() {
            break;
        }
    }
    sum
}

fn closed_form_tail(a: &Real, p: u32, ctx: &PrecisionContext) -> Real {
    let mut full = if p % 2 == 1 {
        ctx.real(a.sinh_ref())
    } else {
        ctx.real(a.cosh_ref())
    };
    let mut term = if p % 2 == 1 { a.clone() } else { ctx.one() };
    let a2 = ctx.real(a.square_ref());
    let mut n = p % 2;
    while n < p {
        full -= &term;
        term *= &a2;
        term /= (n + 1) * (n + 2);
        n += 2;
    }
    full
}

/// Polynomial with exact integer coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPolynomial {
    coefficients: Vec<Integer>,
}

impl IntPolynomial {
    pub fn new(mut coefficients: Vec<Integer>) -> Self {
        while coefficients.len() > 1 && coefficients.last().is_some_and(|c| *c == 0) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(Integer::new());
        }
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[Integer] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient_sum(&self) -> Integer {
        self.coefficients.iter().sum()
    }

    pub fn is_palindromic(&self) -> bool {
        self.coefficients
            .iter()
            .eq(self.coefficients.iter().rev())
    }

    /// Horner evaluation at `x`.
    pub fn eval(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        let mut acc = ctx.zero();
        for c in self.coefficients.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Coefficients converted to reals at the given precision.
    pub fn to_reals(&self, ctx: &PrecisionContext) -> Vec<Real> {
        self.coefficients.iter().map(|c| ctx.real(c)).collect()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Euler-Frobenius polynomial `E_n` of degree `n`:
/// `E_0 = 1`, `E_n(x) = (n x + 1) E_{n-1}(x) + x (1 - x) E'_{n-1}(x)`.
///
/// The coefficients are the Eulerian numbers, e.g. `E_2 = 1 + 4x + x^2`.
pub fn euler_frobenius(n: usize) -> IntPolynomial {
    let mut e: Vec<Integer> = vec![Integer::from(1)];
    for deg in 1..=n {
        let mut next = vec![Integer::new(); deg + 1];
        for (i, c) in e.iter().enumerate() {
            // (deg x + 1) E
            next[i] += c;
            next[i + 1] += Integer::from(c * deg as u32);
            // x (1 - x) E', where E' contributes i c x^(i-1)
            let ic = Integer::from(c * i as u32);
            next[i] += &ic;
            next[i + 1] -= &ic;
        }
        e = next;
    }
    IntPolynomial::new(e)
}

/// `n!` as a real at the given precision.
pub(crate) fn factorial(n: u32, ctx: &PrecisionContext) -> Real {
    ctx.real(Integer::from(Integer::factorial(n)))
}
