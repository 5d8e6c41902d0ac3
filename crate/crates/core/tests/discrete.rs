mod common;

use common::ctx;
use optimal_fd::discrete::DiscreteFunction;
use optimal_fd::precision::PrecisionContext;
use proptest::prelude::*;

fn build(c: &PrecisionContext, offset: i64, vals: &[i32]) -> DiscreteFunction {
    let reals: Vec<_> = vals.iter().map(|&v| c.real(v)).collect();
    DiscreteFunction::from_slice(offset, &reals)
}

fn small_fn() -> impl Strategy<Value = (i64, Vec<i32>)> {
    (-6i64..6, prop::collection::vec(-50i32..50, 1..7))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn convolution_commutes((oa, va) in small_fn(), (ob, vb) in small_fn()) {
        let c = ctx();
        let a = build(&c, oa, &va);
        let b = build(&c, ob, &vb);
        let ab = a.convolve(&b, &c);
        let ba = b.convolve(&a, &c);
        for beta in -20..20 {
            prop_assert_eq!(ab.value(beta, &c), ba.value(beta, &c));
            prop_assert_eq!(a.convolve_at(&b, beta, &c), b.convolve_at(&a, beta, &c));
        }
    }

    #[test]
    fn scalar_product_bilinear(
        (oa, va) in small_fn(),
        (ob, vb) in small_fn(),
        (oc, vc) in small_fn(),
        s in -7i32..7,
        t in -7i32..7,
    ) {
        let c = ctx();
        let a = build(&c, oa, &va);
        let b = build(&c, ob, &vb);
        let d = build(&c, oc, &vc);
        let (s, t) = (c.real(s), c.real(t));
        let combo = a.linear_combination(&s, &b, &t, &c);
        let lhs = combo.scalar_product(&d, &c);
        let rhs = c.real(&s * &a.scalar_product(&d, &c)) + c.real(&t * &b.scalar_product(&d, &c));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.scalar_product(&b, &c), b.scalar_product(&a, &c));
    }

    #[test]
    fn convolution_bilinear((oa, va) in small_fn(), (ob, vb) in small_fn(), (oc, vc) in small_fn(), s in -7i32..7) {
        let c = ctx();
        let a = build(&c, oa, &va);
        let b = build(&c, ob, &vb);
        let d = build(&c, oc, &vc);
        let s = c.real(s);
        let one = c.one();
        let combo = a.linear_combination(&s, &b, &one, &c);
        for beta in -20..20 {
            let lhs = combo.convolve_at(&d, beta, &c);
            let rhs = c.real(&s * &a.convolve_at(&d, beta, &c)) + b.convolve_at(&d, beta, &c);
            prop_assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn delta_is_identity() {
    let c = ctx();
    let mut delta = DiscreteFunction::new();
    delta.set(0, c.one());
    let f = build(&c, -2, &[3, -1, 4, 1, -5]);
    let g = f.convolve(&delta, &c);
    for beta in -4..5 {
        assert_eq!(g.value(beta, &c), f.value(beta, &c));
    }
}

#[test]
fn missing_values_are_zero() {
    let c = ctx();
    let f = build(&c, 3, &[1, 2]);
    assert!(f.get(0).is_none());
    assert!(f.value(0, &c).is_zero());
    assert_eq!(f.len(), 2);
    assert_eq!(f.support().collect::<Vec<_>>(), vec![3, 4]);
}
