//! Functions of a discrete argument `phi(h beta)` with finite support, their
//! scalar product and convolution.
//!
//! ```text
//! [phi, psi]        = sum_b phi(h b) psi(h b)
//! (phi * psi)(h b)  = sum_g phi(h g) psi(h b - h g)
//! ```
//!
//! The optimality system is a convolution equation of this kind restricted
//! to the support of `C1`; [`crate::direct_solver::babuska_node_check`]
//! evaluates it through these operations rather than through the assembled
//! matrix.

use std::collections::BTreeMap;

use crate::precision::{PrecisionContext, Real};

/// Finitely supported function on the integers. Missing indices are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiscreteFunction {
    values: BTreeMap<i64, Real>,
}

impl DiscreteFunction {
    pub fn new() -> Self {
        Self::default()
    }

    /// Samples `f` at every index in `support`.
    pub fn from_fn<I, F>(support: I, f: F) -> Self
    where
        I: IntoIterator<Item = i64>,
        F: Fn(i64) -> Real,
    {
        let values = support.into_iter().map(|b| (b, f(b))).collect();
        Self { values }
    }

    /// Values at `offset, offset + 1, ...`.
    pub fn from_slice(offset: i64, values: &[Real]) -> Self {
        Self::from_fn(offset..offset + values.len() as i64, |b| {
            values[(b - offset) as usize].clone()
        })
    }

    pub fn set(&mut self, beta: i64, value: Real) {
        self.values.insert(beta, value);
    }

    /// `phi(h beta)`, or `None` off the support.
    pub fn get(&self, beta: i64) -> Option<&Real> {
        self.values.get(&beta)
    }

    pub fn value(&self, beta: i64, ctx: &PrecisionContext) -> Real {
        self.values.get(&beta).cloned().unwrap_or_else(|| ctx.zero())
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.values.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Real)> {
        self.values.iter().map(|(b, v)| (*b, v))
    }

    /// `[self, other]`.
    pub fn scalar_product(&self, other: &Self, ctx: &PrecisionContext) -> Real {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = ctx.zero();
        for (b, v) in small.iter() {
            if let Some(w) = large.get(b) {
                acc += ctx.real(v * w);
            }
        }
        acc
    }

    /// `(self * other)(h beta)` at a single node.
    pub fn convolve_at(&self, other: &Self, beta: i64, ctx: &PrecisionContext) -> Real {
        let mut acc = ctx.zero();
        for (g, v) in self.iter() {
            if let Some(w) = other.get(beta - g) {
                acc += ctx.real(v * w);
            }
        }
        acc
    }

    /// Full convolution; its support is the Minkowski sum of the supports.
    pub fn convolve(&self, other: &Self, ctx: &PrecisionContext) -> Self {
        let mut out = DiscreteFunction::new();
        for (g, v) in self.iter() {
            for (d, w) in other.iter() {
                let term = ctx.real(v * w);
                out.values
                    .entry(g + d)
                    .and_modify(|acc| *acc += &term)
                    .or_insert(term);
            }
        }
        out
    }

    /// Pointwise `a self + b other`.
    pub fn linear_combination(&self, a: &Real, other: &Self, b: &Real, ctx: &PrecisionContext) -> Self {
        let mut out = DiscreteFunction::new();
        for idx in self.support().chain(other.support()) {
            if out.values.contains_key(&idx) {
                continue;
            }
            let v = ctx.real(a * &self.value(idx, ctx)) + ctx.real(b * &other.value(idx, ctx));
            out.values.insert(idx, v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_product_ignores_disjoint_points() {
        let c = PrecisionContext::default();
        let a = DiscreteFunction::from_fn(0..4, |b| c.real(b + 1));
        let b = DiscreteFunction::from_fn(2..8, |_| c.real(2));
        // (3 + 4) * 2
        assert_eq!(a.scalar_product(&b, &c), 14);
    }

    #[test]
    fn convolution_with_unit_impulse_is_shift() {
        let c = PrecisionContext::default();
        let phi = DiscreteFunction::from_fn(-2..3, |b| c.real(b * b));
        let mut delta = DiscreteFunction::new();
        delta.set(3, c.one());
        let out = phi.convolve(&delta, &c);
        for b in -2..3 {
            assert_eq!(out.value(b + 3, &c), phi.value(b, &c));
        }
        assert_eq!(out.len(), phi.len());
    }

    #[test]
    fn convolve_at_matches_full_convolution() {
        let c = PrecisionContext::default();
        let phi = DiscreteFunction::from_fn(0..5, |b| c.real(b) / 7u32);
        let psi = DiscreteFunction::from_fn(-3..2, |b| c.real(b - 1) * 3u32);
        let full = phi.convolve(&psi, &c);
        for b in -4..8 {
            assert_eq!(phi.convolve_at(&psi, b, &c), full.value(b, &c));
        }
    }
}
