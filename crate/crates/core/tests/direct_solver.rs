mod common;

use common::{adams_c, ctx, desk_grid, formula_on_support, oracle_minimizer, rel};
use optimal_fd::direct_solver::{
    adams_left_coeffs, adams_rhs_f, adams_rhs_g_alpha, adams_rhs_g_exp, assemble, babuska_node_check,
    optimal_adams, rhs_f, rhs_f_at, rhs_g_alpha, rhs_g_exp, solve, OptimalFormula, SystemSpec, Unknown,
};
use optimal_fd::error::Error;
use optimal_fd::functional::{relative_constraint_residuals, FdFormula, FormulaParams};
use optimal_fd::precision::{PrecisionContext, Real};

fn params(m: u32, n: u32, k: u32) -> FormulaParams {
    FormulaParams::new(m, n, k).unwrap()
}

#[test]
fn adams_left_side() {
    let c = ctx();
    let v = adams_left_coeffs(2, &c).unwrap();
    assert_eq!(v, vec![c.zero(), c.real(-1), c.one()]);
    let v = adams_left_coeffs(5, &c).unwrap();
    assert_eq!(v.len(), 6);
    assert!(v[..4].iter().all(|x| x.is_zero()));
    for k in 2..12 {
        let s = adams_left_coeffs(k, &c).unwrap().iter().fold(c.zero(), |a, x| a + x);
        assert!(s.is_zero());
    }
    assert!(adams_left_coeffs(1, &c).is_err());
}

#[test]
fn rhs_examples() {
    let c = ctx();
    let p = params(3, 10, 5);
    let f = adams_rhs_f(&p, 5, &c).unwrap();
    let expect = c.parse("0.00000208402790179949398922148417082235481313892948").unwrap();
    assert!(rel(&f, &expect, &c) < 1e-40);
    let h4 = c.parse("0.0001").unwrap() / 48u32;
    assert!(rel(&f, &h4, &c) < 1e-2);

    let g2 = adams_rhs_g_alpha(&params(4, 10, 5), 2, &c).unwrap();
    assert!(rel(&g2, &c.parse("0.045").unwrap(), &c) < 1e-70);
    for k in 3..=8 {
        let p = params(3, 10, k);
        assert!(rel(&adams_rhs_g_alpha(&p, 1, &c).unwrap(), &p.h(&c), &c) < 1e-70);
    }

    let p = params(3, 5, 5);
    let expect = c.parse("-0.8").unwrap().exp() - c.real(-1).exp();
    assert!(rel(&adams_rhs_g_exp(&p, &c), &expect, &c) < 1e-70);
}

#[test]
fn zero_left_side_gives_zero_rhs() {
    let c = ctx();
    let p = params(4, 10, 6);
    let zero = vec![c.zero(); 7];
    let support: Vec<usize> = (0..=6).collect();
    assert!(rhs_f(&p, &zero, &support, &c).unwrap().iter().all(|v| v.is_zero()));
    assert!(rhs_g_alpha(&p, &zero, 1, &c).unwrap().is_zero());
    assert!(rhs_g_alpha(&p, &zero, 2, &c).unwrap().is_zero());
    assert!(rhs_g_exp(&p, &zero, &c).unwrap().is_zero());
}

#[test]
fn dual_path_rhs() {
    let c = ctx();
    for (m, n, k) in desk_grid() {
        let p = params(m, n, k);
        let left = adams_c(k, &c);
        for beta in 0..=k {
            let g = rhs_f_at(&p, &left, beta as i64, &c).unwrap();
            let a = adams_rhs_f(&p, beta, &c).unwrap();
            assert!(rel(&a, &g, &c) <= 1e-30, "f ({m},{n},{k}) beta={beta}");
        }
        for alpha in 1..=m - 2 {
            let g = rhs_g_alpha(&p, &left, alpha, &c).unwrap();
            assert!(rel(&adams_rhs_g_alpha(&p, alpha, &c).unwrap(), &g, &c) <= 1e-30);
        }
        let g = rhs_g_exp(&p, &left, &c).unwrap();
        assert!(rel(&adams_rhs_g_exp(&p, &c), &g, &c) <= 1e-35);
    }
}

#[test]
fn assembled_system_shape() {
    let c = ctx();
    let sys = assemble(&SystemSpec::adams(params(3, 10, 5)), &c).unwrap();
    assert_eq!(sys.dim(), 7);
    assert_eq!((sys.matrix.rows(), sys.matrix.cols()), (7, 7));
    assert_eq!(sys.unknown_labels[..5], [0, 1, 2, 3, 4].map(Unknown::C1));
    assert_eq!(sys.unknown_labels[5..], [Unknown::Poly(0), Unknown::Exp]);
    for i in 0..5 {
        assert!(sys.matrix[(i, i)].is_zero());
        for j in 0..5 {
            assert_eq!(sys.matrix[(i, j)], sys.matrix[(j, i)]);
        }
    }
}

#[test]
fn counting_rule() {
    let c = ctx();
    for (m, n, k) in desk_grid() {
        let sys = assemble(&SystemSpec::adams(params(m, n, k)), &c).unwrap();
        assert_eq!(sys.dim(), (k + m - 1) as usize);
        assert_eq!(sys.matrix.rows(), sys.matrix.cols());
        let p = params(m, n, k);
        let generic = SystemSpec::Generic {
            params: p,
            c: adams_c(k, &c),
            support: (0..=k as usize).collect(),
        };
        assert_eq!(assemble(&generic, &c).unwrap().dim(), (k + m) as usize);
    }
}

#[test]
fn generic_assembly_guards() {
    let c = ctx();
    let p = params(4, 10, 5);
    let too_small = SystemSpec::Generic {
        params: p,
        c: adams_c(5, &c),
        support: vec![3, 4],
    };
    assert!(matches!(assemble(&too_small, &c), Err(Error::Dimension(_))));
    let unbalanced = SystemSpec::Generic {
        params: p,
        c: vec![c.one(); 6],
        support: (0..5).collect(),
    };
    assert!(matches!(assemble(&unbalanced, &c), Err(Error::InvalidParams(_))));
    let out_of_range = SystemSpec::Generic {
        params: p,
        c: adams_c(5, &c),
        support: vec![0, 1, 7],
    };
    assert!(assemble(&out_of_range, &c).is_err());
}

#[test]
fn weights_are_consistent() {
    let c = ctx();
    let opt = optimal_adams(params(3, 10, 5), &c).unwrap();
    let sum = opt.formula.c1().iter().fold(c.zero(), |a, v| a + v);
    assert!(c.real(&sum - 1u32).abs() < 1e-60);
    assert!(opt.formula.c1()[5].is_zero());
    assert!(opt.residual_norm < 1e-25);
    for r in relative_constraint_residuals(&opt.formula, &c) {
        assert!(r < 1e-30);
    }
}

#[test]
fn matches_oracle() {
    let c = ctx();
    for (m, n, k) in [(3, 10, 5), (4, 20, 9), (5, 10, 10)] {
        let p = params(m, n, k);
        let opt = optimal_adams(p, &c).unwrap();
        let support: Vec<usize> = (0..k as usize).collect();
        let oracle = oracle_minimizer(p, &adams_c(k, &c), &support, &c);
        for (b, o) in oracle.iter().enumerate() {
            assert!(rel(&opt.formula.c1()[b], o, &c) <= 1e-20, "({m},{n},{k}) b={b}");
        }
    }
}

#[test]
fn generic_left_side_matches_oracle() {
    let c = ctx();
    let p = params(3, 10, 4);
    // backward second difference
    let left: Vec<Real> = [0, 0, 1, -2, 1].iter().map(|&v| c.real(v)).collect();
    let support: Vec<usize> = (0..=4).collect();
    let spec = SystemSpec::Generic {
        params: p,
        c: left.clone(),
        support: support.clone(),
    };
    let opt = solve(&assemble(&spec, &c).unwrap(), &c).unwrap();
    let oracle = oracle_minimizer(p, &left, &support, &c);
    for (b, o) in oracle.iter().enumerate() {
        assert!(rel(&opt.formula.c1()[b], o, &c) <= 1e-20, "b={b}");
    }
    assert!(babuska_node_check(&opt, &c).unwrap().max_relative() <= 1e-24);
}

#[test]
fn minimal_support_is_fixed_by_constraints() {
    let c = ctx();
    for m in 3..=5 {
        let p = params(m, 10, m);
        let support: Vec<usize> = (1..m as usize).collect();
        let spec = SystemSpec::Generic {
            params: p,
            c: adams_c(m, &c),
            support: support.clone(),
        };
        let opt = solve(&assemble(&spec, &c).unwrap(), &c).unwrap();
        let pure = oracle_minimizer(p, &adams_c(m, &c), &support, &c);
        let expect = formula_on_support(p, &pure, &support, &c);
        for b in 0..p.node_count() {
            assert!(rel(&opt.formula.c1()[b], &expect.c1()[b], &c) <= 1e-40, "m={m} b={b}");
        }
    }
}

fn zero_optimum(p: FormulaParams, c: &PrecisionContext) -> OptimalFormula {
    let mut formula = FdFormula::zero(p, c);
    formula.c_mut().clone_from_slice(&adams_c(p.k(), c));
    OptimalFormula {
        formula,
        multipliers: vec![c.zero(); p.m() as usize - 1],
        support: (0..p.k() as usize).collect(),
        residual_norm: c.zero(),
        condition_estimate: c.one(),
    }
}

#[test]
fn babuska_residuals_of_zero_solution_are_minus_f() {
    let c = ctx();
    let p = params(4, 10, 6);
    let res = babuska_node_check(&zero_optimum(p, &c), &c).unwrap();
    for (b, r) in res.nodes.iter().zip(&res.residuals) {
        let f = adams_rhs_f(&p, *b as u32, &c).unwrap();
        assert!(c.real(r + &f).abs() <= c.real(f.abs_ref()) * 1e-60, "b={b}");
    }
}

#[test]
fn babuska_detects_perturbation() {
    let c = ctx();
    for (m, n, k) in [(3, 10, 5), (4, 20, 8)] {
        let mut opt = optimal_adams(params(m, n, k), &c).unwrap();
        assert!(babuska_node_check(&opt, &c).unwrap().max_relative() <= 1e-24);
        opt.formula.c1_mut()[1] += 1e-6;
        assert!(babuska_node_check(&opt, &c).unwrap().max_relative() >= 1e-8);
    }
}

#[test]
fn diagnostics_are_reported() {
    let c = ctx();
    let opt = optimal_adams(params(5, 20, 10), &c).unwrap();
    let d = opt.diagnostics(&c).unwrap();
    assert!(d.condition_estimate >= 1.0);
    assert!(d.residual_norm <= 1e-25);
    assert!(d.babuska_max_residual <= 1e-24);
}

#[test]
fn recovered_multipliers_match_solve() {
    let c = ctx();
    for (m, n, k) in [(3, 10, 5), (5, 20, 9)] {
        let opt = optimal_adams(params(m, n, k), &c).unwrap();
        let rec = optimal_fd::direct_solver::recover_multipliers(&opt.formula, &c).unwrap();
        assert_eq!(rec.support, opt.support);
        for (a, b) in rec.multipliers.iter().zip(&opt.multipliers) {
            assert!(rel(a, b, &c) < 1e-40);
        }
        assert!(rec.residual_norm < 1e-40);
        assert!(babuska_node_check(&rec, &c).unwrap().max_relative() <= 1e-24);
    }
}
