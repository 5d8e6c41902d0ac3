//! Independent reference computations shared by the integration tests.
//!
//! The constrained minimizer of the error norm is recomputed here without
//! touching the optimality system: the quadratic form is recovered from
//! norm evaluations by polarization, the constraints from the kernel test
//! functions, the null space from a Householder QR factorization, and the
//! reduced problem is solved by Cholesky.

#![allow(dead_code, clippy::needless_range_loop)]

use optimal_fd::functional::{Analytic, FdFormula, FormulaParams, NormEvaluator, TestFunction};
use optimal_fd::precision::{PrecisionContext, Real};

pub fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

/// `(m, N, k)` for `m in {3,4,5}`, `N in {5,10,20}`, `m <= k <= min(N,10)`.
pub fn desk_grid() -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for m in 3..=5 {
        for n in [5, 10, 20] {
            for k in m..=n.min(10) {
                out.push((m, n, k));
            }
        }
    }
    out
}

pub fn adams_c(k: u32, c: &PrecisionContext) -> Vec<Real> {
    let mut v = vec![c.zero(); k as usize + 1];
    v[k as usize] = c.one();
    v[k as usize - 1] = c.real(-1);
    v
}

/// Relative difference `|a - b| / |b|` (absolute when `b = 0`).
pub fn rel(a: &Real, b: &Real, c: &PrecisionContext) -> f64 {
    let d = c.real(a - b).abs();
    if b.is_zero() {
        d.to_f64()
    } else {
        (d / c.real(b.abs_ref())).to_f64()
    }
}

fn householder_qr(a: &[Vec<Real>], c: &PrecisionContext) -> (Vec<Vec<Real>>, Vec<Vec<Real>>) {
    // a is rows x cols with rows >= cols; returns full Q (rows x rows) and R.
    let rows = a.len();
    let cols = a[0].len();
    let mut r: Vec<Vec<Real>> = a.to_vec();
    let mut q: Vec<Vec<Real>> = (0..rows)
        .map(|i| (0..rows).map(|j| if i == j { c.one() } else { c.zero() }).collect())
        .collect();
    for j in 0..cols {
        let mut norm = c.zero();
        for row in r.iter().skip(j) {
            norm += c.real(row[j].square_ref());
        }
        let norm = norm.sqrt();
        if norm.is_zero() {
            continue;
        }
        let alpha = if r[j][j].is_sign_negative() { norm } else { -norm };
        let mut v: Vec<Real> = (0..rows)
            .map(|i| if i < j { c.zero() } else { r[i][j].clone() })
            .collect();
        v[j] -= &alpha;
        let vv = v.iter().fold(c.zero(), |s, x| s + c.real(x.square_ref()));
        if vv.is_zero() {
            continue;
        }
        for col in 0..cols {
            let dot = (j..rows).fold(c.zero(), |s, i| s + c.real(&v[i] * &r[i][col]));
            let f = c.real(&dot * 2u32) / &vv;
            for i in j..rows {
                r[i][col] -= c.real(&f * &v[i]);
            }
        }
        // Q <- Q H
        for row in q.iter_mut() {
            let dot = (j..rows).fold(c.zero(), |s, i| s + c.real(&row[i] * &v[i]));
            let f = c.real(&dot * 2u32) / &vv;
            for i in j..rows {
                row[i] -= c.real(&f * &v[i]);
            }
        }
    }
    (q, r)
}

fn cholesky_solve(a: &[Vec<Real>], b: &[Real], c: &PrecisionContext) -> Vec<Real> {
    let n = b.len();
    let mut l = vec![vec![c.zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j].clone();
            for p in 0..j {
                s -= c.real(&l[i][p] * &l[j][p]);
            }
            if i == j {
                assert!(s > 0, "reduced Hessian is not positive definite");
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / &l[j][j];
            }
        }
    }
    let mut y = vec![c.zero(); n];
    for i in 0..n {
        let mut s = b[i].clone();
        for p in 0..i {
            s -= c.real(&l[i][p] * &y[p]);
        }
        y[i] = s / &l[i][i];
    }
    let mut x = vec![c.zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i].clone();
        for p in i + 1..n {
            s -= c.real(&l[p][i] * &x[p]);
        }
        x[i] = s / &l[i][i];
    }
    x
}

/// Constraint rows `h sum C1_b phi'(h b) = sum C_b phi(h b)` for every
/// `phi` in the seminorm kernel, restricted to `support`.
fn kernel_constraints(
    params: &FormulaParams,
    c_left: &[Real],
    support: &[usize],
    c: &PrecisionContext,
) -> (Vec<Vec<Real>>, Vec<Real>) {
    let h = c.one() / params.n();
    let mut funcs: Vec<Analytic> = (1..=params.m() - 2).map(Analytic::power).collect();
    funcs.push(Analytic::exp(-1.0));
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for phi in &funcs {
        let row: Vec<Real> = support
            .iter()
            .map(|&b| c.real(&h * &phi.derivative(&(c.real(b) / params.n()), c)))
            .collect();
        let mut r = c.zero();
        for (b, cb) in c_left.iter().enumerate() {
            r += c.real(cb * &phi.value(&(c.real(b) / params.n()), c));
        }
        rows.push(row);
        rhs.push(r);
    }
    (rows, rhs)
}

/// Minimizer of the squared norm over `C1` supported on `support`,
/// subject to exactness on the seminorm kernel.
pub fn oracle_minimizer(params: FormulaParams, c_left: &[Real], support: &[usize], c: &PrecisionContext) -> Vec<Real> {
    let s = support.len();
    let len = params.node_count();
    let eval = NormEvaluator::new(params, c).unwrap();
    let q = |x: &[Real]| -> Real {
        let mut c1 = vec![c.zero(); len];
        for (v, &b) in x.iter().zip(support) {
            c1[b] = v.clone();
        }
        eval.norm_squared_unchecked(c_left, &c1)
    };
    let zero = vec![c.zero(); s];
    let q0 = q(&zero);
    let unit = |i: usize, sign: i32| -> Vec<Real> {
        let mut v = zero.clone();
        v[i] = c.real(sign);
        v
    };
    let qp: Vec<Real> = (0..s).map(|i| q(&unit(i, 1))).collect();
    let qm: Vec<Real> = (0..s).map(|i| q(&unit(i, -1))).collect();
    // Q(x) = x^T H x + 2 g^T x + q0
    let g: Vec<Real> = (0..s).map(|i| c.real(&qp[i] - &qm[i]) / 4u32).collect();
    let mut hess = vec![vec![c.zero(); s]; s];
    for i in 0..s {
        hess[i][i] = (c.real(&qp[i] + &qm[i]) - c.real(&q0 * 2u32)) / 2u32;
        for j in 0..i {
            let mut v = zero.clone();
            v[i] = c.one();
            v[j] = c.one();
            let hij = (q(&v) - &qp[i] - &qp[j] + &q0) / 2u32;
            hess[i][j] = hij.clone();
            hess[j][i] = hij;
        }
    }

    let (a, b) = kernel_constraints(&params, c_left, support, c);
    let r_count = a.len();
    // QR of A^T (s x r)
    let at: Vec<Vec<Real>> = (0..s).map(|i| (0..r_count).map(|j| a[j][i].clone()).collect()).collect();
    let (qf, rf) = householder_qr(&at, c);
    // particular solution x_p = Q1 R^{-T} b
    let mut w = vec![c.zero(); r_count];
    for i in 0..r_count {
        let mut acc = b[i].clone();
        for p in 0..i {
            acc -= c.real(&rf[p][i] * &w[p]);
        }
        w[i] = acc / &rf[i][i];
    }
    let xp: Vec<Real> = (0..s)
        .map(|i| (0..r_count).fold(c.zero(), |acc, j| acc + c.real(&qf[i][j] * &w[j])))
        .collect();
    let nz = s - r_count;
    if nz == 0 {
        return xp;
    }
    let z: Vec<Vec<Real>> = (0..s).map(|i| qf[i][r_count..].to_vec()).collect();
    // reduced system (Z^T H Z) y = -Z^T (H x_p + g)
    let hxp: Vec<Real> = (0..s)
        .map(|i| (0..s).fold(c.zero(), |acc, j| acc + c.real(&hess[i][j] * &xp[j])) + &g[i])
        .collect();
    let hz: Vec<Vec<Real>> = (0..s)
        .map(|i| {
            (0..nz)
                .map(|col| (0..s).fold(c.zero(), |acc, j| acc + c.real(&hess[i][j] * &z[j][col])))
                .collect()
        })
        .collect();
    let red: Vec<Vec<Real>> = (0..nz)
        .map(|r| {
            (0..nz)
                .map(|col| (0..s).fold(c.zero(), |acc, i| acc + c.real(&z[i][r] * &hz[i][col])))
                .collect()
        })
        .collect();
    let rhs: Vec<Real> = (0..nz)
        .map(|r| -(0..s).fold(c.zero(), |acc, i| acc + c.real(&z[i][r] * &hxp[i])))
        .collect();
    let y = cholesky_solve(&red, &rhs, c);
    (0..s)
        .map(|i| (0..nz).fold(xp[i].clone(), |acc, col| acc + c.real(&z[i][col] * &y[col])))
        .collect()
}

/// Builds a formula from Adams `C` and a `C1` given on `support`.
pub fn formula_on_support(params: FormulaParams, values: &[Real], support: &[usize], c: &PrecisionContext) -> FdFormula {
    let mut c1 = vec![c.zero(); params.node_count()];
    for (v, &b) in values.iter().zip(support) {
        c1[b] = v.clone();
    }
    FdFormula::new(params, adams_c(params.k(), c), c1).unwrap()
}
