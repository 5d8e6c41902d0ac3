//! Real polynomials at working precision and their complex roots.
//!
//! Roots are seeded from the eigenvalues of the double-precision companion
//! matrix and then polished by Newton's method on the multiprecision
//! polynomial.

use nalgebra::DMatrix;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::kernel::IntPolynomial;
use crate::precision::{abs_f64, pow_u, PrecisionContext, Real};

const MAX_NEWTON_STEPS: usize = 400;

/// Polynomial with real coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coefficients: Vec<Real>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<Real>, ctx: &PrecisionContext) -> Self {
        let mut coefficients = coefficients;
        if coefficients.is_empty() {
            coefficients.push(ctx.zero());
        }
        Self { coefficients }
    }

    pub fn constant(c: Real, ctx: &PrecisionContext) -> Self {
        Self::new(vec![c], ctx)
    }

    pub fn from_int(p: &IntPolynomial, ctx: &PrecisionContext) -> Self {
        Self::new(p.to_reals(ctx), ctx)
    }

    /// `(1 - x)^n`.
    pub fn one_minus_x_pow(n: u32, ctx: &PrecisionContext) -> Self {
        let base = Self::new(vec![ctx.one(), ctx.real(-1)], ctx);
        let mut acc = Self::constant(ctx.one(), ctx);
        for _ in 0..n {
            acc = acc.mul(&base, ctx);
        }
        acc
    }

    pub fn coefficients(&self) -> &[Real] {
        &self.coefficients
    }

    /// Index of the last stored coefficient; leading zeros are kept so
    /// degrees stay predictable after cancellation.
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn add(&self, o: &Self, ctx: &PrecisionContext) -> Self {
        let n = self.coefficients.len().max(o.coefficients.len());
        let get = |p: &Self, i: usize| p.coefficients.get(i).cloned().unwrap_or_else(|| ctx.zero());
        Self::new((0..n).map(|i| get(self, i) + get(o, i)).collect(), ctx)
    }

    pub fn mul(&self, o: &Self, ctx: &PrecisionContext) -> Self {
        let mut out = vec![ctx.zero(); self.coefficients.len() + o.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in o.coefficients.iter().enumerate() {
                out[i + j] += ctx.real(a * b);
            }
        }
        Self::new(out, ctx)
    }

    pub fn scale(&self, s: &Real, ctx: &PrecisionContext) -> Self {
        Self::new(self.coefficients.iter().map(|c| ctx.real(c * s)).collect(), ctx)
    }

    pub fn derivative(&self, ctx: &PrecisionContext) -> Self {
        if self.coefficients.len() == 1 {
            return Self::constant(ctx.zero(), ctx);
        }
        Self::new(
            self.coefficients[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| ctx.real(c * (i as u32 + 1)))
                .collect(),
            ctx,
        )
    }

    pub fn eval(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        let mut acc = ctx.zero();
        for c in self.coefficients.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_complex(&self, z: &Complex, ctx: &PrecisionContext) -> Complex {
        let mut acc = Complex::zero(ctx);
        for c in self.coefficients.iter().rev() {
            acc = acc.mul(z, ctx);
            acc.re += c;
        }
        acc
    }

    /// `max_s |p_s - p_(n-s)| / max_s |p_s|`; zero for a palindromic
    /// polynomial.
    pub fn palindromy_defect(&self, ctx: &PrecisionContext) -> f64 {
        let n = self.coefficients.len();
        let scale = self
            .coefficients
            .iter()
            .map(|c| ctx.real(c.abs_ref()))
            .fold(ctx.zero(), |a, b| a.max(&b));
        if scale.is_zero() {
            return 0.0;
        }
        (0..n)
            .map(|s| abs_f64(&(ctx.real(&self.coefficients[s] - &self.coefficients[n - 1 - s]) / &scale)))
            .fold(0.0, f64::max)
    }

    /// All complex roots, ordered by ascending modulus and then by
    /// ascending argument.
    pub fn roots(&self, ctx: &PrecisionContext) -> Result<Vec<Complex>> {
        let n = self.degree();
        let lead = &self.coefficients[n];
        if n == 0 || lead.is_zero() {
            return Err(Error::RootFinding(
                "polynomial must have positive degree and nonzero leading coefficient".into(),
            ));
        }
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -(ctx.real(&self.coefficients[i] / lead)).to_f64();
        }
        let seeds = companion.complex_eigenvalues();
        let dp = self.derivative(ctx);
        let mut roots: Vec<Complex> = seeds
            .iter()
            .map(|z| self.polish(&Complex::from_f64(z.re, z.im, ctx), &dp, ctx))
            .collect::<Result<_>>()?;

        let sep = ctx.real(ctx.epsilon().sqrt());
        for i in 0..n {
            for j in i + 1..n {
                let d = roots[i].sub(&roots[j], ctx).abs(ctx);
                let s = roots[i].abs(ctx).max(&ctx.one());
                if d <= ctx.real(&sep * &s) {
                    return Err(Error::RootFinding(format!(
                        "roots {i} and {j} collapsed during polishing"
                    )));
                }
            }
        }
        roots.sort_by(|a, b| {
            let (ma, mb) = (a.abs(ctx), b.abs(ctx));
            ma.partial_cmp(&mb)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.arg(ctx).partial_cmp(&b.arg(ctx)).unwrap_or(std::cmp::Ordering::Equal))
        });
        Ok(roots)
    }

    fn polish(&self, seed: &Complex, dp: &Self, ctx: &PrecisionContext) -> Result<Complex> {
        let eps = ctx.epsilon();
        let mut z = seed.clone();
        for _ in 0..MAX_NEWTON_STEPS {
            let d = dp.eval_complex(&z, ctx);
            if d.is_zero() {
                break;
            }
            let step = self.eval_complex(&z, ctx).div(&d, ctx);
            z = z.sub(&step, ctx);
            let tol = ctx.real(&eps * &z.abs(ctx).max(&ctx.one())) * 4u32;
            if step.abs(ctx) <= tol {
                return Ok(z);
            }
        }
        // Accept a root whose value is at rounding level even if the last
        // step did not shrink below tolerance.
        let value = self.eval_complex(&z, ctx).abs(ctx);
        let scale = self
            .coefficients
            .iter()
            .fold(ctx.zero(), |a, c| a + ctx.real(c.abs_ref()))
            * pow_u(&z.abs(ctx).max(&ctx.one()), self.degree() as u32, ctx);
        if value <= ctx.real(&scale * &eps) * 1024u32 {
            Ok(z)
        } else {
            Err(Error::RootFinding(format!(
                "Newton polishing did not converge from seed {:.6e}{:+.6e}i",
                seed.re.to_f64(),
                seed.im.to_f64()
            )))
        }
    }
}
