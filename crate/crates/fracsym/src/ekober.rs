//! Erdelyi-Kober fractional operators.
//!
//! The integral operator is
//! `(K^{c,a}_b f)(y) = 1/Gamma(a) int_1^inf (eta-1)^(a-1) eta^-(a+c) f(y eta^(1/b)) deta`
//! and the differential operator of order `a >= 0` is
//! `(D^{c,a}_b f)(y) = prod_{j=0..[a]} (j + c - (y/b) d/dy) K^{c+a,[a]+1-a}_b f(y)`.
//!
//! On power terms both act diagonally: `y^mu` picks up a ratio of Gamma
//! values in `c - mu/b`. The quadrature path substitutes `eta = 1/(1-s)`,
//! turning the kernel into a two-sided Jacobi weight on [0, 1), and serves
//! as the independent check of the Gamma-ratio rules.

use crate::error::{FracError, Result};
use crate::fraccore::{Axis, BivariatePowerSum, GeneralizedPolynomial, PowerTerm};
use crate::gamma::{gamma, is_nonpositive_integer, rgamma};
use crate::quadrature::GaussJacobi;

/// Parameters `(c, a, b)` of the Erdelyi-Kober operators; `a >= 0` is the
/// operator order and `b != 0` the scaling weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EKParams {
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl EKParams {
    pub fn new(c: f64, a: f64, b: f64) -> Result<Self> {
        if !c.is_finite() || !a.is_finite() || !b.is_finite() {
            return Err(FracError::domain("EK parameters must be finite".to_string()));
        }
        if a < 0.0 {
            return Err(FracError::domain(format!("EK order a must be >= 0, got {a}")));
        }
        if b == 0.0 {
            return Err(FracError::domain("EK weight b must be nonzero".to_string()));
        }
        Ok(EKParams { c, a, b })
    }

    fn floor_a(&self) -> usize {
        self.a.floor() as usize
    }
}

/// Exact image of a single power `y^mu` under the integral operator:
/// `Gamma(c - mu/b) / Gamma(a + c - mu/b)`.
fn integral_factor(params: &EKParams, mu: f64) -> f64 {
    let w = params.c - mu / params.b;
    gamma(w) * rgamma(params.a + w)
}

/// Exact image of a single power under the differential operator: the
/// product factors `(j + c - mu/b)` over `j = 0..[a]` times the inner
/// integral factor of `K^{c+a,[a]+1-a}_b`.
fn diff_factor(params: &EKParams, mu: f64) -> f64 {
    let w = params.c - mu / params.b;
    let mut fac = 1.0;
    for j in 0..=params.floor_a() {
        fac *= j as f64 + w;
    }
    // inner K^{C,A} with C = c + a, A = [a] + 1 - a
    fac * gamma(params.a + w) * rgamma(params.floor_a() as f64 + 1.0 + w)
}

/// Whether the defining integral for `y^mu` converges strictly
/// (`c - mu/b > 0` for the integral; the inner operator shifts c by a).
fn strictly_convergent(c_eff: f64, mu: f64, b: f64) -> bool {
    c_eff - mu / b > 0.0
}

fn gp_map(
    f: &GeneralizedPolynomial,
    factor: impl Fn(f64) -> f64,
) -> Result<GeneralizedPolynomial> {
    let terms = f
        .terms()
        .iter()
        .map(|t| PowerTerm {
            coeff: t.coeff * factor(t.exponent),
            exponent: t.exponent,
        })
        .collect();
    GeneralizedPolynomial::new(f.var().to_string(), terms)
}

/// Exact EK integral on a generalized polynomial. Strict: every term must
/// satisfy the convergence condition `c - mu/b > 0`, and `a > 0`.
pub fn ek_integral_gp(f: &GeneralizedPolynomial, params: &EKParams) -> Result<GeneralizedPolynomial> {
    if params.a <= 0.0 {
        return Err(FracError::domain(format!(
            "EK integral needs order a > 0, got {}",
            params.a
        )));
    }
    for t in f.terms() {
        if !strictly_convergent(params.c, t.exponent, params.b) {
            return Err(FracError::domain(format!(
                "EK integral diverges on term with exponent {}: need c - mu/b > 0, got {}",
                t.exponent,
                params.c - t.exponent / params.b
            )));
        }
    }
    gp_map(f, |mu| integral_factor(params, mu))
}

/// Exact EK integral extended by analytic continuation of the Gamma-ratio
/// rule outside the strict convergence strip (poles of the reciprocal
/// produce exact zeros). The flag reports whether continuation was used.
pub fn ek_integral_gp_continued(
    f: &GeneralizedPolynomial,
    params: &EKParams,
) -> Result<(GeneralizedPolynomial, bool)> {
    if params.a <= 0.0 {
        return Err(FracError::domain(format!(
            "EK integral needs order a > 0, got {}",
            params.a
        )));
    }
    let continued = f
        .terms()
        .iter()
        .any(|t| !strictly_convergent(params.c, t.exponent, params.b));
    for t in f.terms() {
        let w = params.c - t.exponent / params.b;
        if is_nonpositive_integer(w) && !is_nonpositive_integer(params.a + w) {
            return Err(FracError::domain(format!(
                "EK integral continuation hits a Gamma pole on exponent {}",
                t.exponent
            )));
        }
    }
    Ok((gp_map(f, |mu| integral_factor(params, mu))?, continued))
}

/// Exact EK differential operator on a generalized polynomial; strict on
/// the inner integral operator (`c + a - mu/b > 0`).
pub fn ek_diff_gp(f: &GeneralizedPolynomial, params: &EKParams) -> Result<GeneralizedPolynomial> {
    for t in f.terms() {
        if !strictly_convergent(params.c + params.a, t.exponent, params.b) {
            return Err(FracError::domain(format!(
                "inner EK integral diverges on term with exponent {}: need c + a - mu/b > 0",
                t.exponent
            )));
        }
    }
    gp_map(f, |mu| diff_factor(params, mu))
}

/// EK differential operator extended by analytic continuation.
pub fn ek_diff_gp_continued(
    f: &GeneralizedPolynomial,
    params: &EKParams,
) -> Result<(GeneralizedPolynomial, bool)> {
    let continued = f
        .terms()
        .iter()
        .any(|t| !strictly_convergent(params.c + params.a, t.exponent, params.b));
    for t in f.terms() {
        let w = params.c + params.a - t.exponent / params.b;
        if is_nonpositive_integer(w) {
            return Err(FracError::domain(format!(
                "EK differential continuation hits a Gamma pole on exponent {}",
                t.exponent
            )));
        }
    }
    Ok((gp_map(f, |mu| diff_factor(params, mu))?, continued))
}

// ---------------------------------------------------------------------------
// quadrature path
// ---------------------------------------------------------------------------

/// Default node count of the EK quadrature.
pub const EK_QUAD_NODES: usize = 128;

/// EK integral of a callable by Gauss-Jacobi quadrature.
///
/// `tail_exponent` is the declared growth rate kappa of the integrand:
/// `f(y eta^(1/b)) ~ eta^kappa` as `eta -> inf` (for a power sum, the
/// dominant `mu/b`). Absolute integrability requires `c - kappa > 0`.
/// Substituting `eta = 1/(1-s)` gives
/// `1/Gamma(a) int_0^1 s^(a-1) (1-s)^(c-1-kappa) [f(y (1-s)^(-1/b)) (1-s)^kappa] ds`,
/// handled by a rule with the two endpoint weights built in.
pub fn ek_integral_fn(
    f: &dyn Fn(f64) -> f64,
    tail_exponent: f64,
    params: &EKParams,
    ys: &[f64],
    nodes: usize,
) -> Result<Vec<f64>> {
    if params.a <= 0.0 {
        return Err(FracError::domain(format!(
            "EK integral needs order a > 0, got {}",
            params.a
        )));
    }
    if params.c - tail_exponent <= 0.0 {
        return Err(FracError::domain(format!(
            "EK quadrature requires c - tail_exponent > 0, got {}",
            params.c - tail_exponent
        )));
    }
    let rule = GaussJacobi::new(nodes, params.c - 1.0 - tail_exponent, params.a - 1.0)?;
    let inv_gamma_a = rgamma(params.a);
    Ok(ys
        .iter()
        .map(|&y| {
            inv_gamma_a
                * rule.apply(|s| {
                    let arg = y * (1.0 - s).powf(-1.0 / params.b);
                    f(arg) * (1.0 - s).powf(tail_exponent)
                })
        })
        .collect())
}

/// EK differential operator of a callable: quadrature for the inner
/// integral operator, then the product factors applied through fourth-order
/// central differences on a local stencil.
pub fn ek_diff_fn(
    f: &dyn Fn(f64) -> f64,
    tail_exponent: f64,
    params: &EKParams,
    ys: &[f64],
    nodes: usize,
) -> Result<Vec<f64>> {
    let inner = EKParams {
        c: params.c + params.a,
        a: params.floor_a() as f64 + 1.0 - params.a,
        b: params.b,
    };
    let levels = params.floor_a() + 1;
    let mut out = Vec::with_capacity(ys.len());
    for &y in ys {
        let h = 1e-2 * y.abs().max(1e-2);
        // wide enough stencil for `levels` nested five-point derivatives
        let half = 2 * levels;
        let pts: Vec<f64> = (-(half as isize)..=half as isize)
            .map(|j| y + j as f64 * h)
            .collect();
        let mut cur = ek_integral_fn(f, tail_exponent, &inner, &pts, nodes)?;
        let mut xs = pts;
        for j in 0..levels {
            // derivative of cur by the five-point stencil, interior only
            let m = cur.len();
            let mut next = Vec::with_capacity(m - 4);
            let mut nxs = Vec::with_capacity(m - 4);
            for i in 2..m - 2 {
                let d = (-cur[i + 2] + 8.0 * cur[i + 1] - 8.0 * cur[i - 1] + cur[i - 2]) / (12.0 * h);
                next.push((j as f64 + params.c) * cur[i] - xs[i] / params.b * d);
                nxs.push(xs[i]);
            }
            cur = next;
            xs = nxs;
        }
        debug_assert_eq!(cur.len(), 1);
        out.push(cur[0]);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// the two reduction identities
// ---------------------------------------------------------------------------

/// Maximum relative deviation between the two sides of
/// `D^p_{0,x2} v(x1 x2^-alpha) = x2^-p (D^{1-p,p}_{1/alpha} v)(x1 x2^-alpha)`,
/// both evaluated exactly, at the given points away from the axes.
pub fn ek_reduction_identity_check(
    v: &GeneralizedPolynomial,
    p: f64,
    alpha: f64,
    points: &[(f64, f64)],
) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(FracError::domain(format!("identity stated for 0 < p < 1, got {p}")));
    }
    if alpha <= 0.0 {
        return Err(FracError::domain(format!("alpha must be > 0, got {alpha}")));
    }
    // left side: compose v(x1 x2^-alpha) as a bivariate power sum, then the
    // partial RL derivative in x2
    let composed = BivariatePowerSum::new(
        v.terms()
            .iter()
            .map(|t| crate::fraccore::BiTerm {
                coeff: t.coeff,
                e1: t.exponent,
                e2: -alpha * t.exponent,
            })
            .collect(),
    )?;
    let lhs = composed.partial_rl_deriv(Axis::X2, p)?;

    // right side: EK differential operator in the similarity variable
    let ek = EKParams::new(1.0 - p, p, 1.0 / alpha)?;
    let (dv, _) = ek_diff_gp_continued(v, &ek)?;

    let mut scale = 0.0f64;
    let mut lhs_vals = Vec::with_capacity(points.len());
    for &(x1, x2) in points {
        let l = lhs.eval(x1, x2)?;
        scale = scale.max(l.abs());
        lhs_vals.push(l);
    }
    let floor = (1e-12 * scale).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (&(x1, x2), &l) in points.iter().zip(&lhs_vals) {
        let z = x1 * x2.powf(-alpha);
        let r = x2.powf(-p) * dv.eval(z)?;
        if l == 0.0 && r == 0.0 {
            continue;
        }
        let denom = l.abs().max(r.abs()).max(floor);
        worst = worst.max((l - r).abs() / denom);
    }
    Ok(worst)
}

/// Maximum relative deviation between the two sides of the scaling
/// relation `D^p_{0,x} f(lambda x) = lambda^p (D^p f)(lambda x)`, both by
/// exact power rules.
pub fn scale_relation_check(
    f: &GeneralizedPolynomial,
    p: f64,
    lambda: f64,
    points: &[f64],
) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(FracError::domain(format!("lambda must be > 0, got {lambda}")));
    }
    // left: derivative of the rescaled polynomial x -> f(lambda x)
    let rescaled = GeneralizedPolynomial::new(
        f.var().to_string(),
        f.terms()
            .iter()
            .map(|t| PowerTerm {
                coeff: t.coeff * lambda.powf(t.exponent),
                exponent: t.exponent,
            })
            .collect(),
    )?;
    let lhs = rescaled.rl_deriv(p)?;
    // right: lambda^p times the derivative of f, evaluated at lambda x
    let df = f.rl_deriv(p)?;
    let lp = lambda.powf(p);

    let mut worst = 0.0f64;
    for &x in points {
        let l = lhs.eval(x)?;
        let r = lp * df.eval(lambda * x)?;
        let denom = l.abs().max(r.abs());
        if denom == 0.0 {
            continue;
        }
        worst = worst.max((l - r).abs() / denom);
    }
    Ok(worst)
}
