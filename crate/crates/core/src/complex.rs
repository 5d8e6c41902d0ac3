//! Minimal multiprecision complex numbers for root polishing and the
//! spectral representation.

use serde::{Deserialize, Serialize};

use crate::precision::{to_decimal, PrecisionContext, Real};

/// `re + i im` at a fixed working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: Real, ctx: &PrecisionContext) -> Self {
        Self { re, im: ctx.zero() }
    }

    pub fn from_f64(re: f64, im: f64, ctx: &PrecisionContext) -> Self {
        Self {
            re: ctx.real(re),
            im: ctx.real(im),
        }
    }

    pub fn zero(ctx: &PrecisionContext) -> Self {
        Self::from_f64(0.0, 0.0, ctx)
    }

    pub fn one(ctx: &PrecisionContext) -> Self {
        Self::from_f64(1.0, 0.0, ctx)
    }

    pub fn add(&self, o: &Self, ctx: &PrecisionContext) -> Self {
        Self {
            re: ctx.real(&self.re + &o.re),
            im: ctx.real(&self.im + &o.im),
        }
    }

    pub fn sub(&self, o: &Self, ctx: &PrecisionContext) -> Self {
        Self {
            re: ctx.real(&self.re - &o.re),
            im: ctx.real(&self.im - &o.im),
        }
    }

    pub fn mul(&self, o: &Self, ctx: &PrecisionContext) -> Self {
        let re = ctx.real(&self.re * &o.re) - ctx.real(&self.im * &o.im);
        let im = ctx.real(&self.re * &o.im) + ctx.real(&self.im * &o.re);
        Self { re, im }
    }

    pub fn scale(&self, s: &Real, ctx: &PrecisionContext) -> Self {
        Self {
            re: ctx.real(&self.re * s),
            im: ctx.real(&self.im * s),
        }
    }

    pub fn norm_sqr(&self, ctx: &PrecisionContext) -> Real {
        ctx.real(self.re.square_ref()) + ctx.real(self.im.square_ref())
    }

    /// Modulus, via `hypot`.
    pub fn abs(&self, ctx: &PrecisionContext) -> Real {
        ctx.real(self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self, ctx: &PrecisionContext) -> Real {
        ctx.real(self.im.atan2_ref(&self.re))
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn recip(&self, ctx: &PrecisionContext) -> Self {
        let d = self.norm_sqr(ctx);
        Self {
            re: ctx.real(&self.re / &d),
            im: ctx.real(-&self.im) / &d,
        }
    }

    pub fn div(&self, o: &Self, ctx: &PrecisionContext) -> Self {
        self.mul(&o.recip(ctx), ctx)
    }

    pub fn pow_u(&self, n: u32, ctx: &PrecisionContext) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(ctx);
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, ctx);
            }
            base = base.mul(&base, ctx);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            re: to_decimal(&self.re),
            im: to_decimal(&self.im),
        }
    }
}

/// `{re, im}` with decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: String,
    pub im: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_operations() {
        let c = PrecisionContext::default();
        let a = Complex::from_f64(1.0, 2.0, &c);
        let b = Complex::from_f64(3.0, -1.0, &c);
        let p = a.mul(&b, &c);
        assert_eq!((p.re.to_f64(), p.im.to_f64()), (5.0, 5.0));
        let q = p.div(&b, &c).sub(&a, &c);
        assert!(q.abs(&c) < 1e-70);
        let cube = a.pow_u(3, &c);
        assert_eq!((cube.re.to_f64(), cube.im.to_f64()), (-11.0, -2.0));
        assert_eq!(Complex::from_f64(3.0, 4.0, &c).abs(&c), 5);
    }
}
