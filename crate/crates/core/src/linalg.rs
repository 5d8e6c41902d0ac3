//! Dense multiprecision linear algebra: partial-pivoted LU with iterative
//! refinement, a 1-norm condition estimate, row-echelon null spaces and
//! normal-equation least squares.
//!
//! Sizes here are desk scale (tens of unknowns), so everything is dense and
//! row-major.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::precision::{abs_f64, PrecisionContext, Real};

/// Row-major dense matrix of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Real>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, ctx: &PrecisionContext) -> Self {
        Self {
            rows,
            cols,
            data: vec![ctx.zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Real>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Real] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Real> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.push(self[(i, j)].clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data: t,
        }
    }

    /// `A x` accumulated at the precision of `ctx`.
    pub fn mul_vec(&self, x: &[Real], ctx: &PrecisionContext) -> Vec<Real> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = ctx.zero();
                for (a, b) in self.row(i).iter().zip(x) {
                    acc += ctx.real(a * b);
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, other: &Matrix, ctx: &PrecisionContext) -> Matrix {
        assert_eq!(self.cols, other.rows, "mul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols, ctx);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = ctx.zero();
                for l in 0..self.cols {
                    acc += ctx.real(&self[(i, l)] * &other[(l, j)]);
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self, ctx: &PrecisionContext) -> Real {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(ctx.zero(), |s, v| s + v.clone().abs()))
            .fold(ctx.zero(), |m, v| if v > m { v } else { m })
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self, ctx: &PrecisionContext) -> Real {
        self.transpose().norm_inf(ctx)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Real;
    fn index(&self, (i, j): (usize, usize)) -> &Real {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Real {
        &mut self.data[i * self.cols + j]
    }
}

/// Infinity norm of a vector.
pub fn vec_norm_inf(v: &[Real], ctx: &PrecisionContext) -> Real {
    v.iter()
        .map(|x| ctx.real(x.abs_ref()))
        .fold(ctx.zero(), |m, x| if x > m { x } else { m })
}

/// Euclidean norm of a vector.
pub fn vec_norm_2(v: &[Real], ctx: &PrecisionContext) -> Real {
    let mut s = ctx.zero();
    for x in v {
        s += ctx.real(x.square_ref());
    }
    s.sqrt()
}

/// LU factorization `P A = L U` with partial pivoting by absolute value.
///
/// Ties in the pivot search go to the lowest row index, so the
/// factorization is deterministic.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    ctx: PrecisionContext,
}

impl Lu {
    pub fn factor(a: &Matrix, ctx: &PrecisionContext) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        // A pivot is treated as zero when it falls below working precision
        // relative to the largest entry of its original column.
        let col_scale: Vec<Real> = (0..n)
            .map(|j| vec_norm_inf(&a.column(j), ctx))
            .collect();
        let eps = ctx.epsilon();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut best = col;
            let mut best_abs = ctx.real(lu[(col, col)].abs_ref());
            for r in col + 1..n {
                let v = ctx.real(lu[(r, col)].abs_ref());
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            let threshold = ctx.real(&col_scale[col] * &eps) * (n as u32);
            if best_abs.is_zero() || best_abs <= threshold {
                return Err(Error::SingularSystem {
                    column: col,
                    pivot: best_abs.to_f64(),
                });
            }
            if best != col {
                for j in 0..n {
                    let tmp = lu[(col, j)].clone();
                    lu[(col, j)] = lu[(best, j)].clone();
                    lu[(best, j)] = tmp;
                }
                perm.swap(col, best);
            }
            let pivot = lu[(col, col)].clone();
            for r in col + 1..n {
                let factor = ctx.real(&lu[(r, col)] / &pivot);
                if factor.is_zero() {
                    lu[(r, col)] = factor;
                    continue;
                }
                for j in col + 1..n {
                    let delta = ctx.real(&factor * &lu[(col, j)]);
                    lu[(r, j)] -= delta;
                }
                lu[(r, col)] = factor;
            }
        }
        Ok(Self {
            lu,
            perm,
            ctx: *ctx,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve(&self, b: &[Real]) -> Vec<Real> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let ctx = &self.ctx;
        let mut y: Vec<Real> = self.perm.iter().map(|&p| ctx.real(&b[p])).collect();
        for i in 0..n {
            for j in 0..i {
                let d = ctx.real(&self.lu[(i, j)] * &y[j]);
                y[i] -= d;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let d = ctx.real(&self.lu[(i, j)] * &y[j]);
                y[i] -= d;
            }
            y[i] /= &self.lu[(i, i)];
        }
        y
    }

    /// Explicit inverse, column by column.
    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let ctx = &self.ctx;
        let mut inv = Matrix::zeros(n, n, ctx);
        for j in 0..n {
            let mut e = vec![ctx.zero(); n];
            e[j] = ctx.one();
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// Solution of a square system together with its quality diagnostics.
#[derive(Clone, Debug)]
pub struct RefinedSolution {
    pub x: Vec<Real>,
    /// `||b - A x||_inf / (||A||_inf ||x||_inf + ||b||_inf)` after refinement.
    pub residual_norm: Real,
    /// `||A||_1 ||A^-1||_1`.
    pub condition_estimate: Real,
}

/// Partial-pivoted elimination followed by one step of iterative
/// refinement with the residual accumulated at twice the working precision.
pub fn solve_refined(a: &Matrix, b: &[Real], ctx: &PrecisionContext) -> Result<RefinedSolution> {
    if a.rows != b.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but rhs has {} entries",
            a.rows,
            b.len()
        )));
    }
    let lu = Lu::factor(a, ctx)?;
    let mut x = lu.solve(b);
    let wide = ctx.widened(ctx.mantissa_bits());
    let r = residual(a, &x, b, &wide);
    let r_work: Vec<Real> = r.iter().map(|v| ctx.real(v)).collect();
    let dx = lu.solve(&r_work);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    let r = residual(a, &x, b, &wide);
    let denom = ctx.real(&a.norm_inf(ctx) * &vec_norm_inf(&x, ctx)) + vec_norm_inf(b, ctx);
    let residual_norm = if denom.is_zero() {
        ctx.zero()
    } else {
        ctx.real(&vec_norm_inf(&r, &wide) / &denom)
    };
    let condition_estimate = ctx.real(&a.norm_1(ctx) * &lu.inverse().norm_1(ctx));
    Ok(RefinedSolution {
        x,
        residual_norm,
        condition_estimate,
    })
}

/// `b - A x` evaluated at the precision of `ctx`.
pub fn residual(a: &Matrix, x: &[Real], b: &[Real], ctx: &PrecisionContext) -> Vec<Real> {
    (0..a.rows)
        .map(|i| {
            let mut acc = ctx.real(&b[i]);
            for (aij, xj) in a.row(i).iter().zip(x) {
                acc -= ctx.real(aij * xj);
            }
            acc
        })
        .collect()
}

/// Basis of the null space of `A` from its reduced row-echelon form.
///
/// Entries below `eps * ||A||_inf * cols` are treated as zero when picking
/// pivots.
pub fn null_space(a: &Matrix, ctx: &PrecisionContext) -> Vec<Vec<Real>> {
    let (rows, cols) = (a.rows, a.cols);
    let mut m = a.clone();
    let tol = ctx.real(&a.norm_inf(ctx) * &ctx.epsilon()) * (cols.max(1) as u32) * 16u32;
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut best = r;
        let mut best_abs = ctx.real(m[(r, c)].abs_ref());
        for i in r + 1..rows {
            let v = ctx.real(m[(i, c)].abs_ref());
            if v > best_abs {
                best = i;
                best_abs = v;
            }
        }
        if best_abs <= tol {
            continue;
        }
        if best != r {
            for j in 0..cols {
                let tmp = m[(r, j)].clone();
                m[(r, j)] = m[(best, j)].clone();
                m[(best, j)] = tmp;
            }
        }
        let p = m[(r, c)].clone();
        for j in 0..cols {
            m[(r, j)] /= &p;
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = m[(i, c)].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..cols {
                let d = ctx.real(&f * &m[(r, j)]);
                m[(i, j)] -= d;
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![ctx.zero(); cols];
            v[f] = ctx.one();
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = ctx.real(-&m[(row, f)]);
            }
            v
        })
        .collect()
}

/// Least-squares solution of an overdetermined system through the normal
/// equations `A^T A x = A^T b`.
pub fn least_squares(a: &Matrix, b: &[Real], ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let at = a.transpose();
    let ata = at.mul(a, ctx);
    let atb = at.mul_vec(b, ctx);
    Ok(Lu::factor(&ata, ctx)?.solve(&atb))
}

/// Largest absolute value as `f64`; convenience for reporting.
pub fn max_abs_f64(v: &[Real]) -> f64 {
    v.iter().map(abs_f64).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn mat(rows: &[&[i32]]) -> Matrix {
        let c = ctx();
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| c.real(v)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn solves_small_system() {
        let c = ctx();
        let a = mat(&[&[2, 1, 1], &[1, 3, 2], &[1, 0, 0]]);
        let b: Vec<Real> = [4, 5, 6].iter().map(|&v| c.real(v)).collect();
        let sol = solve_refined(&a, &b, &c).unwrap();
        assert_eq!(sol.x[0], 6);
        assert_eq!(sol.x[1], 15);
        assert_eq!(sol.x[2], -23);
        assert!(sol.residual_norm.is_zero() || sol.residual_norm < 1e-70);
        assert!(sol.condition_estimate >= 1);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let c = ctx();
        let a = mat(&[&[1, 2], &[2, 4]]);
        let b = vec![c.one(), c.one()];
        assert!(matches!(
            solve_refined(&a, &b, &c),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let c = ctx();
        let a = mat(&[&[4, -2, 1], &[3, 6, -4], &[2, 1, 8]]);
        let inv = Lu::factor(&a, &c).unwrap().inverse();
        let id = a.mul(&inv, &c);
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1 } else { 0 };
                let err = c.real(&id[(i, j)] - target).abs();
                assert!(err < 1e-70);
            }
        }
    }

    #[test]
    fn null_space_is_annihilated() {
        let c = ctx();
        let a = mat(&[&[1, 2, 3, 4], &[2, 4, 7, 9]]);
        let basis = null_space(&a, &c);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            let av = a.mul_vec(v, &c);
            assert!(max_abs_f64(&av) < 1e-70);
        }
    }

    #[test]
    fn least_squares_recovers_exact_fit() {
        let c = ctx();
        let a = mat(&[&[1, 0], &[1, 1], &[1, 2], &[1, 3]]);
        let b: Vec<Real> = [1, 3, 5, 7].iter().map(|&v| c.real(v)).collect();
        let x = least_squares(&a, &b, &c).unwrap();
        assert!(c.real(&x[0] - 1).abs() < 1e-70);
        assert!(c.real(&x[1] - 2).abs() < 1e-70);
    }
}
