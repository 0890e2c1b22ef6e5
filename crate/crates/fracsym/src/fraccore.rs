//! Exact "generalized polynomial" engine and grid primitives.
//!
//! A generalized polynomial is a finite sum of power terms `c * t^mu` with
//! real exponents. The Riemann-Liouville operators with lower terminal 0
//! act on this class in closed form through Gamma-function ratios, which
//! makes it the ground-truth oracle currency for every numerical scheme in
//! the crate. Exponents are kept strictly increasing and merged on
//! construction; zero-coefficient terms are dropped.

use crate::error::{FracError, Result};
use crate::gamma::{gamma, rgamma};

/// Relative tolerance under which two exponents are considered equal.
pub const MERGE_REL_TOL: f64 = 1e-12;

/// Operators reject input exponents at or below this floor; the RL kernel
/// stops being integrable at the lower terminal at mu = -1.
pub const EXPONENT_FLOOR: f64 = -1.0 + 1e-9;

fn exponents_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_REL_TOL * a.abs().max(1.0)
}

/// Grid axis selector for bivariate data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X1 => Axis::X2,
            Axis::X2 => Axis::X1,
        }
    }
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 1,
            Axis::X2 => 2,
        }
    }
}

/// One power term `coeff * t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

/// Finite sum of power terms in one variable, exponents strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPolynomial {
    terms: Vec<PowerTerm>,
    var: String,
}

impl GeneralizedPolynomial {
    /// Normalizing constructor: merges near-equal exponents, drops zero
    /// coefficients, sorts ascending. Rejects non-finite data.
    pub fn new(var: impl Into<String>, terms: Vec<PowerTerm>) -> Result<Self> {
        for t in &terms {
            if !t.coeff.is_finite() || !t.exponent.is_finite() {
                return Err(FracError::domain(format!(
                    "non-finite power term ({} * t^{})",
                    t.coeff, t.exponent
                )));
            }
        }
        let mut terms = terms;
        terms.sort_by(|a, b| a.exponent.partial_cmp(&b.exponent).unwrap());
        let mut merged: Vec<PowerTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if exponents_equal(last.exponent, t.exponent) => {
                    last.coeff += t.coeff;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Ok(Self {
            terms: merged,
            var: var.into(),
        })
    }

    pub fn zero(var: impl Into<String>) -> Self {
        Self {
            terms: Vec::new(),
            var: var.into(),
        }
    }

    pub fn constant(var: impl Into<String>, c: f64) -> Result<Self> {
        Self::new(var, vec![PowerTerm { coeff: c, exponent: 0.0 }])
    }

    pub fn single(var: impl Into<String>, coeff: f64, exponent: f64) -> Result<Self> {
        Self::new(var, vec![PowerTerm { coeff, exponent }])
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_same_var(&self, other: &Self) -> Result<()> {
        if self.var != other.var {
            return Err(FracError::domain(format!(
                "variable mismatch: {} vs {}",
                self.var, other.var
            )));
        }
        Ok(())
    }

    /// Riemann-Liouville fractional derivative of order `p >= 0`, lower
    /// terminal 0: `c t^mu -> c Gamma(mu+1)/Gamma(mu+1-p) t^(mu-p)`,
    /// with 1/Gamma = 0 at the poles.
    pub fn rl_deriv(&self, p: f64) -> Result<Self> {
        if !p.is_finite() || p < 0.0 {
            return Err(FracError::domain(format!(
                "derivative order must be >= 0 (got {p}); use rl_integral for negative orders"
            )));
        }
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.exponent <= EXPONENT_FLOOR {
                return Err(FracError::domain(format!(
                    "term exponent {} <= -1 not admissible for the RL derivative",
                    t.exponent
                )));
            }
            let coeff = t.coeff * gamma(t.exponent + 1.0) * rgamma(t.exponent + 1.0 - p);
            out.push(PowerTerm {
                coeff,
                exponent: t.exponent - p,
            });
        }
        Self::new(self.var.clone(), out)
    }

    /// Riemann-Liouville fractional integral of order `p > 0`, lower
    /// terminal 0: `c t^mu -> c Gamma(mu+1)/Gamma(mu+1+p) t^(mu+p)`.
    pub fn rl_integral(&self, p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 {
            return Err(FracError::domain(format!(
                "integral order must be > 0 (got {p})"
            )));
        }
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.exponent <= EXPONENT_FLOOR {
                return Err(FracError::domain(format!(
                    "term exponent {} <= -1 not admissible for the RL integral",
                    t.exponent
                )));
            }
            let coeff = t.coeff * gamma(t.exponent + 1.0) * rgamma(t.exponent + 1.0 + p);
            out.push(PowerTerm {
                coeff,
                exponent: t.exponent + p,
            });
        }
        Self::new(self.var.clone(), out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_var(other)?;
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::new(self.var.clone(), terms)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PowerTerm {
                coeff: c * t.coeff,
                exponent: t.exponent,
            })
            .filter(|t| t.coeff != 0.0)
            .collect();
        Self {
            terms,
            var: self.var.clone(),
        }
    }

    /// Product of two generalized polynomials (exponents add).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_var(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(PowerTerm {
                    coeff: a.coeff * b.coeff,
                    exponent: a.exponent + b.exponent,
                });
            }
        }
        Self::new(self.var.clone(), terms)
    }

    /// Multiply by `t^delta`.
    pub fn shift_exponents(&self, delta: f64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| PowerTerm {
                coeff: t.coeff,
                exponent: t.exponent + delta,
            })
            .collect();
        Self::new(self.var.clone(), terms)
    }

    /// Evaluate at `t`. Negative `t` is outside the engine's domain;
    /// `t = 0` is admissible only when no negative exponents are present.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(FracError::domain(format!(
                "evaluation point {t} outside domain (t >= 0 required)"
            )));
        }
        let mut acc = 0.0;
        for term in &self.terms {
            acc += term.coeff * pow_at(t, term.exponent)?;
        }
        Ok(acc)
    }

    /// Sample on a uniform grid.
    pub fn sample(&self, grid: &UniformGrid1D) -> Result<GridFunction1D> {
        let values: Result<Vec<f64>> = grid.nodes().map(|t| self.eval(t)).collect();
        GridFunction1D::new(grid.clone(), values?)
    }
}

fn pow_at(x: f64, e: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x.powf(e))
    } else if e > 0.0 {
        Ok(0.0)
    } else if e == 0.0 {
        Ok(1.0)
    } else {
        Err(FracError::domain(format!(
            "cannot evaluate x^{e} at x = {x}"
        )))
    }
}

impl std::fmt::Display for GeneralizedPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}^{}", t.coeff, self.var, t.exponent)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// expression parsing
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { s: s.as_bytes(), pos: 0 }
    }
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }
    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.s.get(self.pos).map(|&b| b as char)
    }
    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }
    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        if matches!(self.s.get(self.pos), Some(b'e') | Some(b'E')) {
            self.pos += 1;
            if matches!(self.s.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map_err(|_| FracError::parse(format!("expected a number at '{}'", text)))
    }
    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && ((self.s[self.pos] as char).is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(FracError::parse("expected a variable name".to_string()));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string())
    }
    fn done(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// One parsed term: coefficient and (variable, exponent) factors.
fn parse_term(cur: &mut Cursor) -> Result<(f64, Vec<(String, f64)>)> {
    let coeff = cur.number()?;
    let mut factors = Vec::new();
    while cur.peek() == Some('*') {
        cur.bump();
        let var = cur.ident()?;
        let exp = if cur.peek() == Some('^') {
            cur.bump();
            cur.number()?
        } else {
            1.0
        };
        factors.push((var, exp));
    }
    Ok((coeff, factors))
}

fn parse_terms(text: &str) -> Result<Vec<(f64, Vec<(String, f64)>)>> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    if cur.done() {
        return Err(FracError::parse("empty expression".to_string()));
    }
    let mut negate = false;
    loop {
        let (coeff, factors) = parse_term(&mut cur)?;
        out.push((if negate { -coeff } else { coeff }, factors));
        match cur.peek() {
            None => break,
            Some('+') => {
                cur.bump();
                negate = false;
            }
            Some('-') => {
                cur.bump();
                negate = true;
            }
            Some(c) => {
                return Err(FracError::parse(format!("unexpected character '{c}'")));
            }
        }
    }
    Ok(out)
}

impl std::str::FromStr for GeneralizedPolynomial {
    type Err = FracError;

    /// Parse text of the form `1.0*t^0.5 + -2.0*t^1.25`; whitespace is
    /// ignored, `c` and `c*t` are accepted as shorthands for `c*t^0` and
    /// `c*t^1`.
    fn from_str(s: &str) -> Result<Self> {
        let raw = parse_terms(s)?;
        let mut var: Option<String> = None;
        let mut terms = Vec::new();
        for (coeff, factors) in raw {
            if factors.len() > 1 {
                return Err(FracError::parse(
                    "a univariate expression may mention only one variable per term".to_string(),
                ));
            }
            let exponent = match factors.first() {
                None => 0.0,
                Some((v, e)) => {
                    match &var {
                        None => var = Some(v.clone()),
                        Some(prev) if prev == v => {}
                        Some(prev) => {
                            return Err(FracError::parse(format!(
                                "mixed variables '{prev}' and '{v}'"
                            )));
                        }
                    }
                    *e
                }
            };
            terms.push(PowerTerm { coeff, exponent });
        }
        GeneralizedPolynomial::new(var.unwrap_or_else(|| "t".to_string()), terms)
    }
}

// ---------------------------------------------------------------------------
// bivariate power sums
// ---------------------------------------------------------------------------

/// One term `coeff * x1^e1 * x2^e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiTerm {
    pub coeff: f64,
    pub e1: f64,
    pub e2: f64,
}

/// Finite sum of bivariate power terms; the exact test-function class for
/// the partial fractional derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BivariatePowerSum {
    terms: Vec<BiTerm>,
}

impl BivariatePowerSum {
    pub fn new(terms: Vec<BiTerm>) -> Result<Self> {
        for t in &terms {
            if !t.coeff.is_finite() || !t.e1.is_finite() || !t.e2.is_finite() {
                return Err(FracError::domain(format!(
                    "non-finite bivariate term ({} * x1^{} * x2^{})",
                    t.coeff, t.e1, t.e2
                )));
            }
        }
        let mut terms = terms;
        terms.sort_by(|a, b| {
            a.e1.partial_cmp(&b.e1)
                .unwrap()
                .then(a.e2.partial_cmp(&b.e2).unwrap())
        });
        let mut merged: Vec<BiTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if exponents_equal(last.e1, t.e1) && exponents_equal(last.e2, t.e2) => {
                    last.coeff += t.coeff;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Ok(Self { terms: merged })
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn term(coeff: f64, e1: f64, e2: f64) -> Result<Self> {
        Self::new(vec![BiTerm { coeff, e1, e2 }])
    }

    pub fn terms(&self) -> &[BiTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn axis_exp(t: &BiTerm, axis: Axis) -> f64 {
        match axis {
            Axis::X1 => t.e1,
            Axis::X2 => t.e2,
        }
    }

    fn with_axis_exp(t: &BiTerm, axis: Axis, coeff: f64, exp: f64) -> BiTerm {
        match axis {
            Axis::X1 => BiTerm { coeff, e1: exp, e2: t.e2 },
            Axis::X2 => BiTerm { coeff, e1: t.e1, e2: exp },
        }
    }

    /// Partial RL fractional derivative of order `p >= 0` along `axis`,
    /// lower terminal 0, applied termwise through the power rule.
    pub fn partial_rl_deriv(&self, axis: Axis, p: f64) -> Result<Self> {
        if !p.is_finite() || p < 0.0 {
            return Err(FracError::domain(format!(
                "derivative order must be >= 0 (got {p})"
            )));
        }
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mu = Self::axis_exp(t, axis);
            if mu <= EXPONENT_FLOOR {
                return Err(FracError::domain(format!(
                    "axis-{} exponent {} <= -1 not admissible for the RL derivative",
                    axis.index(),
                    mu
                )));
            }
            let coeff = t.coeff * gamma(mu + 1.0) * rgamma(mu + 1.0 - p);
            out.push(Self::with_axis_exp(t, axis, coeff, mu - p));
        }
        Self::new(out)
    }

    /// Classical first partial derivative along `axis`.
    pub fn partial_classical(&self, axis: Axis) -> Self {
        let out = self
            .terms
            .iter()
            .map(|t| {
                let mu = Self::axis_exp(t, axis);
                Self::with_axis_exp(t, axis, t.coeff * mu, mu - 1.0)
            })
            .collect();
        Self::new(out).expect("finite terms stay finite")
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::new(terms).expect("finite terms stay finite")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| BiTerm { coeff: c * t.coeff, ..*t })
            .collect();
        Self::new(terms).expect("finite terms stay finite")
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(BiTerm {
                    coeff: a.coeff * b.coeff,
                    e1: a.e1 + b.e1,
                    e2: a.e2 + b.e2,
                });
            }
        }
        Self::new(terms).expect("finite terms stay finite")
    }

    /// Multiply by `x_axis^delta`.
    pub fn shift_axis(&self, axis: Axis, delta: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mu = Self::axis_exp(t, axis);
                Self::with_axis_exp(t, axis, t.coeff, mu + delta)
            })
            .collect();
        Self::new(terms).expect("finite terms stay finite")
    }

    pub fn eval(&self, x1: f64, x2: f64) -> Result<f64> {
        if !x1.is_finite() || !x2.is_finite() || x1 < 0.0 || x2 < 0.0 {
            return Err(FracError::domain(format!(
                "evaluation point ({x1}, {x2}) outside domain"
            )));
        }
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.coeff * pow_at(x1, t.e1)? * pow_at(x2, t.e2)?;
        }
        Ok(acc)
    }

    /// Sample on a tensor grid, row-major with the x2 index outermost.
    pub fn sample(&self, grid1: &UniformGrid1D, grid2: &UniformGrid1D) -> Result<GridFunction2D> {
        let mut values = Vec::with_capacity(grid1.count * grid2.count);
        for x2 in grid2.nodes() {
            for x1 in grid1.nodes() {
                values.push(self.eval(x1, x2)?);
            }
        }
        GridFunction2D::new(grid1.clone(), grid2.clone(), values)
    }
}

impl std::fmt::Display for BivariatePowerSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*x1^{}*x2^{}", t.coeff, t.e1, t.e2)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BivariatePowerSum {
    type Err = FracError;

    /// Parse text of the form `1*x1^0.5*x2^0.3 + -2*x2^1`; variables are
    /// `x1` and `x2`, each appearing at most once per term.
    fn from_str(s: &str) -> Result<Self> {
        let raw = parse_terms(s)?;
        let mut terms = Vec::new();
        for (coeff, factors) in raw {
            let (mut e1, mut e2) = (0.0, 0.0);
            let (mut seen1, mut seen2) = (false, false);
            for (var, e) in factors {
                match var.as_str() {
                    "x1" if !seen1 => {
                        e1 = e;
                        seen1 = true;
                    }
                    "x2" if !seen2 => {
                        e2 = e;
                        seen2 = true;
                    }
                    "x1" | "x2" => {
                        return Err(FracError::parse(format!("variable {var} repeated in a term")));
                    }
                    other => {
                        return Err(FracError::parse(format!(
                            "unknown variable '{other}' (expected x1, x2)"
                        )));
                    }
                }
            }
            terms.push(BiTerm { coeff, e1, e2 });
        }
        BivariatePowerSum::new(terms)
    }
}

// ---------------------------------------------------------------------------
// grids and sampled functions
// ---------------------------------------------------------------------------

/// Uniform grid `t_k = terminal + k h`, `k = 0..count-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid1D {
    pub terminal: f64,
    pub step: f64,
    pub count: usize,
}

impl UniformGrid1D {
    pub fn new(terminal: f64, step: f64, count: usize) -> Result<Self> {
        if !terminal.is_finite() || !step.is_finite() || step <= 0.0 {
            return Err(FracError::domain(format!(
                "grid needs finite terminal and positive step (terminal={terminal}, step={step})"
            )));
        }
        if count < 2 {
            return Err(FracError::size(format!("grid needs at least 2 nodes, got {count}")));
        }
        Ok(Self { terminal, step, count })
    }

    /// Grid over [terminal, end] with `count` nodes.
    pub fn span(terminal: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(FracError::size(format!("grid needs at least 2 nodes, got {count}")));
        }
        let step = (end - terminal) / (count - 1) as f64;
        Self::new(terminal, step, count)
    }

    pub fn node(&self, k: usize) -> f64 {
        self.terminal + k as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.node(k))
    }

    pub fn last(&self) -> f64 {
        self.node(self.count - 1)
    }
}

/// Samples of a function on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1D {
    pub grid: UniformGrid1D,
    pub values: Vec<f64>,
}

impl GridFunction1D {
    pub fn new(grid: UniformGrid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(FracError::size(format!(
                "sample count {} does not match grid size {}",
                values.len(),
                grid.count
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(FracError::domain(format!("non-finite sample {bad}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: UniformGrid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }
}

/// Samples on a tensor-product grid, row-major with x2 outermost:
/// `values[i2 * n1 + i1] = u(x1_i1, x2_i2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction2D {
    pub grid1: UniformGrid1D,
    pub grid2: UniformGrid1D,
    pub values: Vec<f64>,
}

impl GridFunction2D {
    pub fn new(grid1: UniformGrid1D, grid2: UniformGrid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid1.count * grid2.count {
            return Err(FracError::size(format!(
                "sample count {} does not match {} x {} grid",
                values.len(),
                grid1.count,
                grid2.count
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(FracError::domain(format!("non-finite sample {bad}")));
        }
        Ok(Self { grid1, grid2, values })
    }

    pub fn from_fn(
        grid1: UniformGrid1D,
        grid2: UniformGrid1D,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid1.count * grid2.count);
        for x2 in grid2.nodes() {
            for x1 in grid1.nodes() {
                values.push(f(x1, x2));
            }
        }
        Self::new(grid1, grid2, values)
    }

    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.grid1.count + i1]
    }

    pub fn set(&mut self, i1: usize, i2: usize, v: f64) {
        self.values[i2 * self.grid1.count + i1] = v;
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            grid1: self.grid1.clone(),
            grid2: self.grid2.clone(),
            values: vec![0.0; self.values.len()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gp(s: &str) -> GeneralizedPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn integer_order_reproduces_classical_derivative() {
        // d/dt t^2 = 2t
        let d = gp("1*t^2").rl_deriv(1.0).unwrap();
        assert_eq!(d.terms().len(), 1);
        assert_relative_eq!(d.terms()[0].coeff, 2.0, max_relative = 1e-14);
        assert_relative_eq!(d.terms()[0].exponent, 1.0, max_relative = 1e-14);
        // second and third order on t^3
        let d2 = gp("1*t^3").rl_deriv(2.0).unwrap();
        assert_relative_eq!(d2.terms()[0].coeff, 6.0, max_relative = 1e-13);
        let d3 = gp("1*t^3").rl_deriv(3.0).unwrap();
        assert_relative_eq!(d3.terms()[0].coeff, 6.0, max_relative = 1e-13);
        assert_relative_eq!(d3.terms()[0].exponent, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn half_derivative_of_t() {
        // D^0.5 t = t^0.5 / Gamma(1.5)
        let d = gp("1*t^1").rl_deriv(0.5).unwrap();
        assert_eq!(d.terms().len(), 1);
        assert_relative_eq!(d.terms()[0].coeff, 1.12837916709551257, max_relative = 1e-13);
        assert_relative_eq!(d.terms()[0].exponent, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn half_derivative_of_constant() {
        // D^0.5 1 = t^-0.5 / Gamma(0.5)
        let d = gp("1").rl_deriv(0.5).unwrap();
        assert_relative_eq!(d.terms()[0].coeff, 0.564189583547756287, max_relative = 1e-13);
        assert_relative_eq!(d.terms()[0].exponent, -0.5, max_relative = 1e-14);
    }

    #[test]
    fn derivative_annihilates_pole_exponent() {
        // D^0.5 t^-0.5 = 0 because 1/Gamma(0) = 0
        let d = gp("1*t^-0.5").rl_deriv(0.5).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn non_semigroup_of_derivatives() {
        // D^0.5 D^0.5 t^-0.5 = 0 while D^1 t^-0.5 = -0.5 t^-1.5
        let f = gp("1*t^-0.5");
        let seq = f.rl_deriv(0.5).unwrap().rl_deriv(0.5).unwrap();
        assert!(seq.is_zero());
        let d1 = f.rl_deriv(1.0).unwrap();
        assert_relative_eq!(d1.terms()[0].coeff, -0.5, max_relative = 1e-13);
        assert_relative_eq!(d1.terms()[0].exponent, -1.5, max_relative = 1e-14);
    }

    #[test]
    fn integral_examples() {
        // I^1 1 = t
        let i = gp("1").rl_integral(1.0).unwrap();
        assert_relative_eq!(i.terms()[0].coeff, 1.0, max_relative = 1e-14);
        assert_relative_eq!(i.terms()[0].exponent, 1.0, max_relative = 1e-14);
        // I^0.5 I^0.5 1 = t (semigroup)
        let twice = gp("1").rl_integral(0.5).unwrap().rl_integral(0.5).unwrap();
        assert_relative_eq!(twice.terms()[0].coeff, 1.0, max_relative = 1e-13);
        assert_relative_eq!(twice.terms()[0].exponent, 1.0, max_relative = 1e-14);
        // I^0.5 1 = t^0.5 / Gamma(1.5)
        let half = gp("1").rl_integral(0.5).unwrap();
        assert_relative_eq!(half.terms()[0].coeff, 1.12837916709551257, max_relative = 1e-13);
    }

    #[test]
    fn mul_and_eval() {
        let prod = gp("1*t^0.5").mul(&gp("1*t^0.5")).unwrap();
        assert_eq!(prod.terms().len(), 1);
        assert_relative_eq!(prod.terms()[0].exponent, 1.0, max_relative = 1e-14);
        let f = gp("1*t^0.5").scale(1.12837916709551257);
        assert_relative_eq!(f.eval(1.0).unwrap(), 1.1283791671, max_relative = 1e-9);
    }

    #[test]
    fn sample_constant() {
        let grid = UniformGrid1D::span(0.0, 1.0, 5).unwrap();
        let s = gp("1").sample(&grid).unwrap();
        assert_eq!(s.values, vec![1.0; 5]);
    }

    #[test]
    fn eval_domain_errors() {
        assert!(gp("1*t^-0.5").eval(0.0).is_err());
        assert!(gp("1*t^2").eval(-1.0).is_err());
        assert_eq!(gp("1*t^2").eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_operator_input() {
        assert!(gp("1*t^-1.5").rl_deriv(0.5).is_err());
        assert!(gp("1*t^2").rl_deriv(-0.5).is_err());
        assert!(gp("1*t^2").rl_integral(0.0).is_err());
    }

    #[test]
    fn merge_and_zero_cleanup() {
        let f = GeneralizedPolynomial::new(
            "t",
            vec![
                PowerTerm { coeff: 1.0, exponent: 0.5 },
                PowerTerm { coeff: 2.0, exponent: 0.5 + 1e-14 },
                PowerTerm { coeff: -3.0, exponent: 0.5 },
            ],
        )
        .unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn parse_and_display_roundtrip() {
        let f = gp("1.0*t^0.5 + -2.0*t^1.25");
        assert_eq!(f.terms().len(), 2);
        let text = f.to_string();
        let g: GeneralizedPolynomial = text.parse().unwrap();
        assert_eq!(f, g);
        // shorthand forms
        assert_eq!(gp("3").terms()[0].exponent, 0.0);
        assert_eq!(gp("2*t").terms()[0].exponent, 1.0);
        assert_eq!(gp("1e-3*t^-0.5").terms()[0].coeff, 1e-3);
        // subtraction sugar
        let h = gp("1*t^2 - 2*t");
        assert_eq!(h.terms().len(), 2);
        assert_eq!(h.terms()[0].coeff, -2.0);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<GeneralizedPolynomial>().is_err());
        assert!("1*t^".parse::<GeneralizedPolynomial>().is_err());
        assert!("1*t + 2*s".parse::<GeneralizedPolynomial>().is_err());
        assert!("1*t$2".parse::<GeneralizedPolynomial>().is_err());
    }

    #[test]
    fn bivariate_partial_rules() {
        // D^0.5_x1 (x1 x2) = x2 x1^0.5 / Gamma(1.5)
        let u = BivariatePowerSum::term(1.0, 1.0, 1.0).unwrap();
        let d = u.partial_rl_deriv(Axis::X1, 0.5).unwrap();
        assert_eq!(d.terms().len(), 1);
        assert_relative_eq!(d.terms()[0].coeff, 1.12837916709551257, max_relative = 1e-13);
        assert_relative_eq!(d.terms()[0].e1, 0.5, max_relative = 1e-14);
        assert_relative_eq!(d.terms()[0].e2, 1.0, max_relative = 1e-14);
        // classical partial
        let c = u.partial_classical(Axis::X2);
        assert_relative_eq!(c.terms()[0].e2, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bivariate_parse() {
        let u: BivariatePowerSum = "1*x1^0.5*x2^0.3 + -2*x2".parse().unwrap();
        assert_eq!(u.terms().len(), 2);
        assert!("1*x3^2".parse::<BivariatePowerSum>().is_err());
        assert!("1*x1*x1".parse::<BivariatePowerSum>().is_err());
    }

    #[test]
    fn grid2d_layout() {
        let g1 = UniformGrid1D::span(0.0, 1.0, 3).unwrap();
        let g2 = UniformGrid1D::span(0.0, 2.0, 2).unwrap();
        let u = BivariatePowerSum::term(1.0, 1.0, 1.0).unwrap();
        let s = u.sample(&g1, &g2).unwrap();
        // row-major, x2 outer: values[i2*n1 + i1]
        assert_eq!(s.at(2, 1), 2.0);
        assert_eq!(s.at(1, 0), 0.0);
    }
}
