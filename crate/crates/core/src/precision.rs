//! Working-precision context and decimal conversion helpers.

use rug::float::Round;
use rug::Float;

use crate::error::{Error, Result};

/// Multiprecision real used throughout the crate.
pub type Real = Float;

/// Default mantissa width.
pub const DEFAULT_MANTISSA_BITS: u32 = 256;
/// Default Gauss-Legendre points per panel for W-norm integrals.
pub const DEFAULT_QUADRATURE_ORDER: usize = 24;

/// Precision of all real arithmetic plus the quadrature order used for
/// seminorm integrals.
///
/// Every evaluation is a pure function of its arguments and this context,
/// so results are reproducible bit for bit at a fixed context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    mantissa_bits: u32,
    quadrature_order: usize,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            mantissa_bits: DEFAULT_MANTISSA_BITS,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }
}

impl PrecisionContext {
    pub fn new(mantissa_bits: u32, quadrature_order: usize) -> Result<Self> {
        if mantissa_bits < 53 {
            return Err(Error::InvalidParams(format!(
                "mantissa_bits must be at least 53, got {mantissa_bits}"
            )));
        }
        if quadrature_order == 0 {
            return Err(Error::InvalidParams(
                "quadrature_order must be positive".into(),
            ));
        }
        Ok(Self {
            mantissa_bits,
            quadrature_order,
        })
    }

    pub fn with_bits(mantissa_bits: u32) -> Result<Self> {
        Self::new(mantissa_bits, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    /// A context with `extra` more mantissa bits, used for residual
    /// accumulation.
    pub fn widened(&self, extra: u32) -> Self {
        Self {
            mantissa_bits: self.mantissa_bits + extra,
            ..*self
        }
    }

    /// Creates a real at this precision.
    pub fn real<T>(&self, value: T) -> Real
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.mantissa_bits, value)
    }

    pub fn zero(&self) -> Real {
        Float::new(self.mantissa_bits)
    }

    pub fn one(&self) -> Real {
        self.real(1)
    }

    /// Unit roundoff `2^(1 - bits)`.
    pub fn epsilon(&self) -> Real {
        let mut e = self.one();
        e >>= self.mantissa_bits - 1;
        e
    }

    /// Relative tolerance used to decide admissibility of a formula before
    /// evaluating its norm: 1e-20 at 256 bits and above, 1e-8 at 53 bits,
    /// geometric interpolation in between.
    pub fn admissibility_tolerance(&self) -> f64 {
        interpolate_tolerance(self.mantissa_bits, 1e-8, 1e-20)
    }

    /// Number of significant decimal digits that makes decimal output
    /// round-trip at this precision.
    pub fn decimal_digits(&self) -> usize {
        decimal_digits_for(self.mantissa_bits)
    }

    pub fn to_decimal(&self, x: &Real) -> String {
        to_decimal(x)
    }

    /// Parses a decimal string into a real at this precision.
    pub fn parse(&self, s: &str) -> Result<Real> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::Parse(format!("invalid decimal {s:?}: {e}")))?;
        Ok(Float::with_val(self.mantissa_bits, parsed))
    }
}

/// `1e-8 -> 1e-20` style interpolation between the 53-bit and 256-bit
/// anchors, log-linear in the mantissa width.
pub fn interpolate_tolerance(bits: u32, at_53: f64, at_256: f64) -> f64 {
    if bits >= 256 {
        return at_256;
    }
    if bits <= 53 {
        return at_53;
    }
    let t = f64::from(bits - 53) / f64::from(256 - 53);
    (at_53.ln() * (1.0 - t) + at_256.ln() * t).exp()
}

fn decimal_digits_for(bits: u32) -> usize {
    2 + (f64::from(bits) * std::f64::consts::LOG10_2).ceil() as usize
}

/// Lossless decimal rendering of `x` at its own precision.
pub fn to_decimal(x: &Real) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(decimal_digits_for(x.prec())))
}

/// `x^n` at the precision of `ctx`.
pub fn pow_u(x: &Real, n: u32, ctx: &PrecisionContext) -> Real {
    use rug::ops::Pow;
    ctx.real(x.pow(n))
}

/// Absolute value as `f64`, rounding to nearest.
pub fn abs_f64(x: &Real) -> f64 {
    x.to_f64_round(Round::Nearest).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_narrow_mantissa() {
        assert!(PrecisionContext::with_bits(52).is_err());
        assert!(PrecisionContext::with_bits(53).is_ok());
        assert!(PrecisionContext::new(256, 0).is_err());
    }

    #[test]
    fn admissibility_tolerance_anchors() {
        let lo = PrecisionContext::with_bits(53).unwrap();
        let hi = PrecisionContext::default();
        assert_eq!(lo.admissibility_tolerance(), 1e-8);
        assert_eq!(hi.admissibility_tolerance(), 1e-20);
        let mid = PrecisionContext::with_bits(128).unwrap().admissibility_tolerance();
        assert!(mid < 1e-8 && mid > 1e-20);
    }

    #[test]
    fn decimal_round_trip_is_lossless() {
        let ctx = PrecisionContext::default();
        let third = ctx.one() / ctx.real(3);
        let x = ctx.real(third.exp_ref());
        let back = ctx.parse(&to_decimal(&x)).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn epsilon_matches_bits() {
        let ctx = PrecisionContext::with_bits(53).unwrap();
        assert_eq!(ctx.epsilon().to_f64(), f64::EPSILON);
    }
}
