//! Root-based representation of the optimal Adams coefficients.
//!
//! The interior coefficients are combinations of powers of the roots of
//!
//! ```text
//! P(l) = (1 - e^(2h)) (1 - l)^(2m-4)
//!        - 2 (l (e^(2h) + 1) - e^h (l^2 + 1))
//!          * sum_{s=0}^{m-3} h^(2s+1) (1 - l)^(2m-6-2s) E_2s(l) / (2s+1)!
//! ```
//!
//! that lie inside the unit disk:
//! `C1_b = sum_j (M_j l_j^b + N_j l_j^(k-b))` for `b = 1..k-2`. The
//! amplitudes `M_j`, `N_j` are fitted at the interior nodes nearest to the
//! two ends and then checked at every interior node. The two boundary
//! coefficients `C1_0` and `C1_(k-1)` follow in closed form from the
//! amplitudes.

use serde::{Deserialize, Serialize};

use crate::complex::{Complex, ComplexJson};
use crate::direct_solver::{optimal_adams, OptimalFormula};
use crate::error::{Error, Result};
use crate::functional::FormulaParams;
use crate::kernel::{euler_frobenius, factorial};
use crate::linalg::{solve_refined, Matrix};
use crate::poly::Polynomial;
use crate::precision::{abs_f64, interpolate_tolerance, pow_u, to_decimal, PrecisionContext, Real};

/// Roots closer than this to the unit circle are rejected.
pub const ROOT_MARGIN: f64 = 1e-10;
/// Reconstruction tolerance at interior nodes (256 bits).
pub const FIT_TOL: f64 = 1e-20;
/// Boundary closed forms against the direct solve (256 bits).
pub const BOUNDARY_TOL: f64 = 1e-18;
/// Palindromy of the characteristic polynomial (256 bits).
pub const PALINDROMY_TOL: f64 = 1e-30;

/// Characteristic polynomial of degree `2m - 4` for step `h`.
#[derive(Clone, Debug)]
pub struct CharPolynomial {
    m: u32,
    h: Real,
    poly: Polynomial,
}

impl CharPolynomial {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn h(&self) -> &Real {
        &self.h
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    /// `p_0 .. p_(2m-4)`.
    pub fn coefficients(&self) -> &[Real] {
        self.poly.coefficients()
    }

    pub fn palindromy_defect(&self, ctx: &PrecisionContext) -> f64 {
        self.poly.palindromy_defect(ctx)
    }
}

/// Expands the characteristic polynomial exactly in multiprecision
/// arithmetic.
pub fn build_char_poly(m: u32, h: &Real, ctx: &PrecisionContext) -> Result<CharPolynomial> {
    if m < 3 {
        return Err(Error::InvalidParams(format!(
            "characteristic polynomial needs m >= 3, got {m}"
        )));
    }
    if *h <= 0 || *h > 1 {
        return Err(Error::InvalidParams(format!(
            "step must satisfy 0 < h <= 1, got {}",
            h.to_f64()
        )));
    }
    let eh = ctx.real(h.exp_ref());
    let e2h = ctx.real(eh.square_ref());
    let lead = Polynomial::one_minus_x_pow(2 * m - 4, ctx).scale(&(ctx.one() - &e2h), ctx);
    // l (e^2h + 1) - e^h (l^2 + 1)
    let q = Polynomial::new(vec![ctx.real(-&eh), ctx.real(&e2h + 1u32), ctx.real(-&eh)], ctx);
    let mut bracket = Polynomial::constant(ctx.zero(), ctx);
    for s in 0..=m - 3 {
        let w = pow_u(h, 2 * s + 1, ctx) / factorial(2 * s + 1, ctx);
        let term = Polynomial::one_minus_x_pow(2 * m - 6 - 2 * s, ctx)
            .mul(&Polynomial::from_int(&euler_frobenius(2 * s as usize), ctx), ctx)
            .scale(&w, ctx);
        bracket = bracket.add(&term, ctx);
    }
    let poly = lead.add(&q.mul(&bracket, ctx).scale(&ctx.real(-2), ctx), ctx);
    Ok(CharPolynomial {
        m,
        h: h.clone(),
        poly,
    })
}

/// The `m - 2` roots strictly inside the unit disk, ordered by modulus
/// then argument. Every one of them must pair with a root `1/l` outside.
pub fn unit_disk_roots(p: &CharPolynomial, ctx: &PrecisionContext) -> Result<Vec<Complex>> {
    let all = p.poly.roots(ctx)?;
    let lo = ctx.real(1.0 - ROOT_MARGIN);
    let hi = ctx.real(1.0 + ROOT_MARGIN);
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for r in all {
        let modulus = r.abs(ctx);
        if modulus > lo && modulus < hi {
            return Err(Error::RootOnCircle {
                modulus: modulus.to_f64(),
            });
        }
        if modulus <= lo {
            inside.push(r);
        } else {
            outside.push(r);
        }
    }
    let want = p.m as usize - 2;
    if inside.len() != want {
        return Err(Error::RootFinding(format!(
            "expected {want} roots inside the unit disk, found {}",
            inside.len()
        )));
    }
    let tol = interpolate_tolerance(ctx.mantissa_bits(), 1e-6, 1e-25);
    for r in &inside {
        let best = outside
            .iter()
            .map(|o| abs_f64(&r.mul(o, ctx).sub(&Complex::one(ctx), ctx).abs(ctx)))
            .fold(f64::INFINITY, f64::min);
        if best > tol {
            return Err(Error::RootFinding(format!(
                "root {:.6e}{:+.6e}i has no reciprocal partner (defect {best:.3e})",
                r.re.to_f64(),
                r.im.to_f64()
            )));
        }
    }
    Ok(inside)
}

/// Roots, amplitudes and boundary coefficients of one optimal formula.
#[derive(Clone, Debug)]
pub struct SpectralRep {
    pub params: FormulaParams,
    pub roots: Vec<Complex>,
    pub m_amp: Vec<Complex>,
    pub n_amp: Vec<Complex>,
    pub c0: Real,
    pub ck1: Real,
    /// Largest `|sum_j (...) - C1_b|` over interior nodes, relative to the
    /// largest interior coefficient.
    pub reconstruction_residual: f64,
    /// Largest imaginary part of the reconstruction, same scale.
    pub imaginary_residual: f64,
}

impl SpectralRep {
    /// `sum_j (M_j l_j^b + N_j l_j^(k-b))`.
    pub fn reconstruct(&self, beta: u32, ctx: &PrecisionContext) -> Complex {
        let k = self.params.k();
        let mut acc = Complex::zero(ctx);
        for ((l, mj), nj) in self.roots.iter().zip(&self.m_amp).zip(&self.n_amp) {
            acc = acc.add(&mj.mul(&l.pow_u(beta, ctx), ctx), ctx);
            acc = acc.add(&nj.mul(&l.pow_u(k - beta, ctx), ctx), ctx);
        }
        acc
    }

    pub fn to_json(&self) -> SpectralRepJson {
        SpectralRepJson {
            params: self.params,
            lambda: self.roots.iter().map(Complex::to_json).collect(),
            m: self.m_amp.iter().map(Complex::to_json).collect(),
            n: self.n_amp.iter().map(Complex::to_json).collect(),
            c0: to_decimal(&self.c0),
            ck1: to_decimal(&self.ck1),
            max_reconstruction_residual: self.reconstruction_residual,
        }
    }
}

/// Serialized [`SpectralRep`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRepJson {
    pub params: FormulaParams,
    pub lambda: Vec<ComplexJson>,
    #[serde(rename = "M")]
    pub m: Vec<ComplexJson>,
    #[serde(rename = "N")]
    pub n: Vec<ComplexJson>,
    #[serde(rename = "C0")]
    pub c0: String,
    #[serde(rename = "Ck1")]
    pub ck1: String,
    pub max_reconstruction_residual: f64,
}

/// Interior nodes used for the fit: `1..=m-2` and `k-1-(m-2)..=k-2`.
pub fn fit_nodes(params: &FormulaParams) -> Vec<u32> {
    let (m, k) = (params.m(), params.k());
    (1..=m - 2).chain(k - 1 - (m - 2)..=k - 2).collect()
}

/// Fits `M_j`, `N_j` to the interior coefficients of an optimal Adams
/// formula, verifies the representation at every interior node and
/// evaluates the boundary closed forms.
pub fn fit_amplitudes(opt: &OptimalFormula, roots: &[Complex], ctx: &PrecisionContext) -> Result<SpectralRep> {
    let params = *opt.params();
    let (m, k) = (params.m(), params.k());
    if !opt.formula.is_adams_type() {
        return Err(Error::Precondition(
            "the spectral representation applies to Adams-type formulas only".into(),
        ));
    }
    if k < 2 + 2 * (m - 2) {
        return Err(Error::Precondition(format!(
            "need k - 2 >= 2(m - 2) interior nodes to fit the amplitudes, got k = {k}, m = {m}"
        )));
    }
    let n = roots.len();
    if n != m as usize - 2 {
        return Err(Error::Dimension(format!(
            "expected {} roots, got {n}",
            m - 2
        )));
    }
    let c1 = opt.formula.c1();
    let nodes = fit_nodes(&params);
    // Unknowns (Re u, Im u) with u = (M_1..M_n, N_1..N_n); one real and one
    // imaginary equation per node.
    let dim = 4 * n;
    let mut a = Matrix::zeros(dim, dim, ctx);
    let mut b = vec![ctx.zero(); dim];
    for (row, &beta) in nodes.iter().enumerate() {
        for (j, l) in roots.iter().enumerate() {
            for (col, e) in [(j, beta), (j + n, k - beta)] {
                let p = l.pow_u(e, ctx);
                a[(row, col)] = p.re.clone();
                a[(row, col + 2 * n)] = ctx.real(-&p.im);
                a[(row + 2 * n, col)] = p.im.clone();
                a[(row + 2 * n, col + 2 * n)] = p.re.clone();
            }
        }
        b[row] = c1[beta as usize].clone();
    }
    let x = solve_refined(&a, &b, ctx)?.x;
    let amp = |j: usize| Complex::new(x[j].clone(), x[j + 2 * n].clone());
    let m_amp: Vec<Complex> = (0..n).map(amp).collect();
    let n_amp: Vec<Complex> = (n..2 * n).map(amp).collect();

    let mut rep = SpectralRep {
        params,
        roots: roots.to_vec(),
        m_amp,
        n_amp,
        c0: ctx.zero(),
        ck1: ctx.zero(),
        reconstruction_residual: 0.0,
        imaginary_residual: 0.0,
    };
    let scale = (1..=k - 2)
        .map(|b| ctx.real(c1[b as usize].abs_ref()))
        .fold(ctx.zero(), |a, v| a.max(&v));
    let mut worst = ctx.zero();
    let mut worst_im = ctx.zero();
    for beta in 1..=k - 2 {
        let r = rep.reconstruct(beta, ctx);
        worst = worst.max(&ctx.real(&r.re - &c1[beta as usize]).abs());
        worst_im = worst_im.max(&r.im.abs());
    }
    if !scale.is_zero() {
        worst /= &scale;
        worst_im /= &scale;
    }
    rep.reconstruction_residual = worst.to_f64();
    rep.imaginary_residual = worst_im.to_f64();
    let tol = fit_tolerance(ctx);
    let residual = rep.reconstruction_residual.max(rep.imaginary_residual);
    if residual.is_nan() || residual > tol {
        return Err(Error::FitFailure {
            residual,
            tolerance: tol,
        });
    }
    let (c0, ck1) = boundary_coeffs(&rep, ctx);
    rep.c0 = c0;
    rep.ck1 = ck1;
    Ok(rep)
}

/// Fit tolerance at the working precision: `1e-20` at 256 bits.
pub fn fit_tolerance(ctx: &PrecisionContext) -> f64 {
    interpolate_tolerance(ctx.mantissa_bits(), 1e-6, FIT_TOL)
}

/// Closed forms for `C1_0` and `C1_(k-1)` in terms of the roots and
/// amplitudes, evaluated in complex arithmetic; the real parts are
/// returned.
pub fn boundary_coeffs(rep: &SpectralRep, ctx: &PrecisionContext) -> (Real, Real) {
    let params = rep.params;
    let k = params.k();
    let h = params.h(ctx);
    let eh = ctx.real(h.exp_ref());
    let ekh = ctx.real(ctx.real(&h * (k - 1)).exp_ref());
    let ek2 = ctx.real(ctx.real(&h * (k - 2)).exp_ref());
    let ehk = ctx.real(ctx.real(&h * k).exp_ref());
    let one = Complex::one(ctx);
    let ehc = Complex::from_real(eh.clone(), ctx);
    let ek2c = Complex::from_real(ek2.clone(), ctx);

    let mut s0 = Complex::zero(ctx);
    let mut s1 = Complex::zero(ctx);
    for ((l, mj), nj) in rep.roots.iter().zip(&rep.m_amp).zip(&rep.n_amp) {
        let lk2 = l.pow_u(k - 2, ctx);
        let l2 = l.mul(l, ctx);
        // (M + N l)(1 - l^(k-2)) l / (1 - l)
        let t = mj
            .add(&nj.mul(l, ctx), ctx)
            .mul(&one.sub(&lk2, ctx), ctx)
            .mul(l, ctx)
            .div(&one.sub(l, ctx), ctx);
        let a = ek2c.sub(&lk2, ctx); // e^(hk-2h) - l^(k-2)
        let le1 = l.mul(&ehc, ctx).sub(&one, ctx); // l e^h - 1
        let b = lk2.mul(&ek2c, ctx).sub(&one, ctx); // l^(k-2) e^(hk-2h) - 1
        let el = ehc.sub(l, ctx); // e^h - l
        let denom = el.mul(&le1, ctx);
        let m_part = mj.mul(&a, ctx).mul(&le1, ctx).mul(l, ctx);
        let n_part = nj.mul(&b, ctx).mul(&el, ctx).mul(&l2, ctx);
        let u0 = m_part
            .mul(&ehc, ctx)
            .add(&n_part.mul(&ehc, ctx), ctx)
            .div(&denom, ctx);
        let u1 = m_part.add(&n_part, ctx).div(&denom.mul(&ek2c, ctx), ctx);
        s0 = s0.add(&t.sub(&u0, ctx), ctx);
        s1 = s1.add(&t.sub(&u1, ctx), ctx);
    }
    let ekh_m1 = ctx.real(&ekh - 1u32);
    let base = ctx.real(&h * &eh) * &ekh_m1;
    let c0 = (ctx.real(&eh - ctx.real(&h * &eh)) - 1u32) / &base + ctx.real(&s0.re / &ekh_m1);
    let ck1 = (ctx.real(&h * &ehk) - &eh + 1u32) / &base - ctx.real(&ekh / &ekh_m1) * &s1.re;
    (c0, ck1)
}

/// Discrepancies between the direct solve and the spectral representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossValidation {
    pub params: FormulaParams,
    pub palindromy_defect: f64,
    pub roots_inside: usize,
    pub reconstruction_residual: f64,
    pub imaginary_residual: f64,
    /// `|C0 - C1_0| / |C1_0|`.
    pub c0_discrepancy: f64,
    /// `|Ck1 - C1_(k-1)| / |C1_(k-1)|`.
    pub ck1_discrepancy: f64,
    /// `|C0 + Ck1 + sum_interior C1 - 1|`.
    pub sum_check: f64,
    /// Relative defect of `sum_b C1_b e^(-hb) = (e^(-hk+h) - e^(-hk)) / h`
    /// with the closed-form boundary values.
    pub exp_check: f64,
}

impl CrossValidation {
    pub fn max_discrepancy(&self) -> f64 {
        [
            self.reconstruction_residual,
            self.imaginary_residual,
            self.c0_discrepancy,
            self.ck1_discrepancy,
            self.sum_check,
            self.exp_check,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Direct solve, root extraction, amplitude fit and boundary evaluation
/// for one parameter set.
pub fn cross_validate(params: FormulaParams, ctx: &PrecisionContext) -> Result<(SpectralRep, CrossValidation)> {
    let opt = optimal_adams(params, ctx)?;
    let h = params.h(ctx);
    let cp = build_char_poly(params.m(), &h, ctx)?;
    let roots = unit_disk_roots(&cp, ctx)?;
    let rep = fit_amplitudes(&opt, &roots, ctx)?;
    let report = compare(&opt, &rep, &cp, ctx);
    Ok((rep, report))
}

fn compare(opt: &OptimalFormula, rep: &SpectralRep, cp: &CharPolynomial, ctx: &PrecisionContext) -> CrossValidation {
    let params = rep.params;
    let k = params.k() as usize;
    let c1 = opt.formula.c1();
    let rel = |a: &Real, b: &Real| -> f64 {
        let d = ctx.real(a - b).abs();
        if b.is_zero() {
            abs_f64(&d)
        } else {
            abs_f64(&(d / ctx.real(b.abs_ref())))
        }
    };
    let h = params.h(ctx);
    let mut sum = ctx.real(&rep.c0 + &rep.ck1);
    let mut exp_sum = ctx.real(&rep.c0 + ctx.real(&rep.ck1 * ctx.real(-ctx.real(&h * (k as u32 - 1))).exp()));
    for (b, v) in c1.iter().enumerate().take(k - 1).skip(1) {
        sum += v;
        exp_sum += ctx.real(v * &ctx.real(-ctx.real(&h * b as u32)).exp());
    }
    let emhk = ctx.real(-ctx.real(&h * k as u32)).exp();
    let target = (ctx.real(&emhk * ctx.real(h.exp_ref())) - &emhk) / &h;
    CrossValidation {
        params,
        palindromy_defect: cp.palindromy_defect(ctx),
        roots_inside: rep.roots.len(),
        reconstruction_residual: rep.reconstruction_residual,
        imaginary_residual: rep.imaginary_residual,
        c0_discrepancy: rel(&rep.c0, &c1[0]),
        ck1_discrepancy: rel(&rep.ck1, &c1[k - 1]),
        sum_check: abs_f64(&(sum - 1u32)),
        exp_check: rel(&exp_sum, &target),
    }
}
