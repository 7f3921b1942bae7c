//! Charts of base and derived variables and the whole-partial derivative.
//!
//! A [`Chart`] lists independent base variables (momenta, parameters) and
//! derived variables fixed by a constraint, e.g. `E = +-sqrt(m^2 + p^2)`.
//! Each derived variable carries its defining expression, used for on-shell
//! evaluation, and gradients in *mixed form*: `dE/dp1` is stored as `p1/E`
//! with `E` a literal symbol. Differentiating a function of the chart then
//! produces terms in which a subsequent explicit `d/dE` acts on the gradient
//! itself, which is where the non-vanishing commutators come from.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, diff_explicit, eval, parse, Bindings, Expr, ExprError, Sampler, C64};

/// Name of the energy variable in the standard chart.
pub const ENERGY: &str = "E";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("unknown chart variable `{0}`")]
    UnknownVariable(String),
    #[error("axis must be 1, 2 or 3, got {0}")]
    BadAxis(usize),
    #[error("invalid chart: {0}")]
    Invalid(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Base,
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedVar {
    pub name: String,
    /// Defining expression in base symbols, before the branch sign.
    pub def: Expr,
    /// `+1.0` or `-1.0`.
    pub branch: f64,
    /// Mixed-form gradients with respect to base variables.
    pub grad: BTreeMap<String, Expr>,
}

impl DerivedVar {
    /// `branch * def`.
    pub fn defining(&self) -> Expr {
        if self.branch < 0.0 {
            Expr::neg(self.def.clone())
        } else {
            self.def.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    base: Vec<String>,
    derived: Vec<DerivedVar>,
    /// (derived, base) pairs whose chain-rule term is switched off.
    excluded: BTreeSet<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChartFile {
    base: Vec<String>,
    derived: Vec<DerivedFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    exclude: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DerivedFile {
    name: String,
    def: String,
    branch: i32,
    grad: BTreeMap<String, String>,
}

impl Chart {
    pub fn new(base: Vec<String>, derived: Vec<DerivedVar>) -> Result<Self, ChartError> {
        let chart = Self { base, derived, excluded: BTreeSet::new() };
        chart.validate()?;
        Ok(chart)
    }

    /// Momenta `p1, p2, p3`, mass `m`, energy `E = branch * sqrt(m^2 + p^2)`
    /// with gradients `p_i/E` and `m/E`.
    pub fn standard(branch: i32) -> Self {
        let sign = if branch < 0 { -1.0 } else { 1.0 };
        let base: Vec<String> = ["p1", "p2", "p3", "m"].iter().map(|s| s.to_string()).collect();
        let grad = base.iter().map(|b| (b.clone(), Expr::div(Expr::sym(b.clone()), Expr::sym(ENERGY)))).collect();
        let energy = DerivedVar {
            name: ENERGY.to_string(),
            def: parse("sqrt(m^2 + p1^2 + p2^2 + p3^2)").unwrap(),
            branch: sign,
            grad,
        };
        Self::new(base, vec![energy]).expect("standard chart is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ChartError> {
        let file: ChartFile = serde_json::from_str(text).map_err(|e| ChartError::Invalid(e.to_string()))?;
        let mut derived = Vec::with_capacity(file.derived.len());
        for d in file.derived {
            if d.branch != 1 && d.branch != -1 {
                return Err(ChartError::Invalid(format!("branch of `{}` must be 1 or -1", d.name)));
            }
            let grad = d.grad.iter().map(|(k, v)| Ok((k.clone(), parse(v)?))).collect::<Result<_, ExprError>>()?;
            derived.push(DerivedVar { def: parse(&d.def)?, name: d.name, branch: f64::from(d.branch), grad });
        }
        let mut chart = Self::new(file.base, derived)?;
        for (d, b) in file.exclude {
            chart.set_chain(&d, &b, false)?;
        }
        Ok(chart)
    }

    pub fn to_json(&self) -> String {
        let file = ChartFile {
            base: self.base.clone(),
            derived: self
                .derived
                .iter()
                .map(|d| DerivedFile {
                    name: d.name.clone(),
                    def: d.def.to_string(),
                    branch: if d.branch < 0.0 { -1 } else { 1 },
                    grad: d.grad.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
                })
                .collect(),
            exclude: self.excluded.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).unwrap()
    }

    fn validate(&self) -> Result<(), ChartError> {
        let mut seen = BTreeSet::new();
        for name in self.base.iter().chain(self.derived.iter().map(|d| &d.name)) {
            if !seen.insert(name.as_str()) {
                return Err(ChartError::Invalid(format!("duplicate variable `{name}`")));
            }
        }
        for d in &self.derived {
            if let Some(s) = d.def.symbols().into_iter().find(|s| !self.base.contains(s)) {
                return Err(ChartError::Invalid(format!(
                    "definition of `{}` uses `{s}`, which is not a base variable",
                    d.name
                )));
            }
            if let Some(b) = d.grad.keys().find(|b| !self.base.contains(b)) {
                return Err(ChartError::Invalid(format!(
                    "gradient of `{}` is given for `{b}`, which is not a base variable",
                    d.name
                )));
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &[String] {
        &self.base
    }

    pub fn derived(&self) -> &[DerivedVar] {
        &self.derived
    }

    pub fn derived_var(&self, name: &str) -> Option<&DerivedVar> {
        self.derived.iter().find(|d| d.name == name)
    }

    pub fn kind(&self, v: &str) -> Option<VarKind> {
        if self.base.iter().any(|b| b == v) {
            Some(VarKind::Base)
        } else if self.derived_var(v).is_some() {
            Some(VarKind::Derived)
        } else {
            None
        }
    }

    fn require(&self, v: &str) -> Result<VarKind, ChartError> {
        self.kind(v).ok_or_else(|| ChartError::UnknownVariable(v.to_string()))
    }

    /// Turn the chain-rule term of `derived` through `base` on or off.
    pub fn set_chain(&mut self, derived: &str, base: &str, enabled: bool) -> Result<(), ChartError> {
        if self.kind(derived) != Some(VarKind::Derived) {
            return Err(ChartError::UnknownVariable(derived.to_string()));
        }
        if self.kind(base) != Some(VarKind::Base) {
            return Err(ChartError::UnknownVariable(base.to_string()));
        }
        let key = (derived.to_string(), base.to_string());
        if enabled {
            self.excluded.remove(&key);
        } else {
            self.excluded.insert(key);
        }
        Ok(())
    }

    /// The mixed-form gradient used by the chain rule, if the term is active.
    pub fn chain_gradient<'a>(&self, derived: &'a DerivedVar, base: &str) -> Option<&'a Expr> {
        if self.excluded.contains(&(derived.name.clone(), base.to_string())) {
            return None;
        }
        derived.grad.get(base)
    }

    /// Bind every derived variable missing from `point` to its on-shell value.
    pub fn on_shell(&self, point: &Bindings) -> Result<Bindings, ChartError> {
        let mut out = point.clone();
        for d in &self.derived {
            if !out.contains(&d.name) {
                let v = eval(&d.defining(), point)?;
                out.set(d.name.clone(), v);
            }
        }
        Ok(out)
    }

    /// Largest relative mismatch between `d(defining)/d(base)` and the stored
    /// gradient with the derived symbol substituted, over sampled points.
    pub fn consistency_residual(&self, sampler: &mut dyn Sampler, trials: usize) -> Result<f64, ChartError> {
        let mut worst = 0.0f64;
        for d in &self.derived {
            let defining = d.defining();
            for (b, g) in &d.grad {
                let direct = diff_explicit(&defining, b);
                let mixed = g.subst(&d.name, &defining);
                let (r, _) = expr::max_rel_residual(&direct, &mixed, sampler, trials)?;
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }
}

/// Whole-partial derivative of `f` with respect to chart variable `v`.
///
/// For a base variable this is the explicit partial plus, for every derived
/// `d`, `(df/dd) * grad(d, v)` with the gradient left in mixed form. For a
/// derived variable it is the plain explicit partial.
pub fn whole_partial(c: &Chart, f: &Expr, v: &str) -> Result<Expr, ChartError> {
    match c.require(v)? {
        VarKind::Derived => Ok(diff_explicit(f, v)),
        VarKind::Base => {
            let mut terms = vec![diff_explicit(f, v)];
            for d in c.derived() {
                let Some(g) = c.chain_gradient(d, v) else { continue };
                let df = diff_explicit(f, &d.name);
                if !df.is_zero() {
                    terms.push(Expr::mul([df, g.clone()]));
                }
            }
            Ok(Expr::add(terms))
        }
    }
}

/// Ordered composition of whole-partial operators, written left to right as
/// in `D_1 D_2 ... D_n f`; the rightmost acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOp {
    steps: Vec<(String, VarKind)>,
}

impl DiffOp {
    pub fn new(c: &Chart, vars: &[&str]) -> Result<Self, ChartError> {
        let steps = vars.iter().map(|v| Ok((v.to_string(), c.require(v)?))).collect::<Result<_, ChartError>>()?;
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[(String, VarKind)] {
        &self.steps
    }

    pub fn apply(&self, c: &Chart, f: &Expr) -> Result<Expr, ChartError> {
        let mut out = f.clone();
        for (v, _) in self.steps.iter().rev() {
            out = whole_partial(c, &out, v)?;
        }
        Ok(out)
    }
}

/// `[D_v1, D_v2] f = D_v1 D_v2 f - D_v2 D_v1 f`.
pub fn commutator_apply(c: &Chart, v1: &str, v2: &str, f: &Expr) -> Result<Expr, ChartError> {
    let forward = DiffOp::new(c, &[v1, v2])?.apply(c, f)?;
    let backward = DiffOp::new(c, &[v2, v1])?.apply(c, f)?;
    Ok(Expr::sub(forward, backward))
}

pub fn momentum_name(axis: usize) -> Result<String, ChartError> {
    if (1..=3).contains(&axis) {
        Ok(format!("p{axis}"))
    } else {
        Err(ChartError::BadAxis(axis))
    }
}

/// Closed form of `[D_{p_i}, D_E] f`: `(p_i / E^2) * df/dE`.
pub fn commutator_closed_form(axis: usize, f: &Expr) -> Result<Expr, ChartError> {
    let p = Expr::sym(momentum_name(axis)?);
    Ok(Expr::mul([Expr::div(p, Expr::powi(Expr::sym(ENERGY), 2)), diff_explicit(f, ENERGY)]))
}

/// Closed form of `[D_v1, D_v2] f` for any two chart variables, read off the
/// chain-rule structure instead of composing the operators:
///
/// - two base variables: `sum_d df/dd * (D_b1 grad(d, b2) - D_b2 grad(d, b1))`
/// - base `b`, derived `e`: `-sum_d df/dd * d grad(d, b)/de`
/// - two derived variables: `0`
pub fn commutator_closed_form_general(c: &Chart, v1: &str, v2: &str, f: &Expr) -> Result<Expr, ChartError> {
    let grad = |d: &DerivedVar, b: &str| c.chain_gradient(d, b).cloned().unwrap_or_else(Expr::zero);
    match (c.require(v1)?, c.require(v2)?) {
        (VarKind::Derived, VarKind::Derived) => Ok(Expr::zero()),
        (VarKind::Base, VarKind::Base) => {
            let mut terms = Vec::new();
            for d in c.derived() {
                let twist = Expr::sub(whole_partial(c, &grad(d, v2), v1)?, whole_partial(c, &grad(d, v1), v2)?);
                terms.push(Expr::mul([diff_explicit(f, &d.name), twist]));
            }
            Ok(Expr::add(terms))
        }
        (VarKind::Base, VarKind::Derived) => {
            let mut terms = Vec::new();
            for d in c.derived() {
                terms.push(Expr::mul([diff_explicit(f, &d.name), diff_explicit(&grad(d, v1), v2)]));
            }
            Ok(Expr::neg(Expr::add(terms)))
        }
        (VarKind::Derived, VarKind::Base) => Ok(Expr::neg(commutator_closed_form_general(c, v2, v1, f)?)),
    }
}

/// Largest relative residual between `[D_{p_i}, D_E] f` and its closed form
/// over `trials` sampled points. The caller compares against a tolerance.
pub fn commutator_coefficient_residual(
    c: &Chart,
    axis: usize,
    f: &Expr,
    sampler: &mut dyn Sampler,
    trials: usize,
) -> Result<f64, ChartError> {
    let p = momentum_name(axis)?;
    if c.kind(ENERGY) != Some(VarKind::Derived) {
        return Err(ChartError::Invalid("chart has no derived energy `E`".into()));
    }
    let lhs = commutator_apply(c, &p, ENERGY, f)?;
    let rhs = commutator_closed_form(axis, f)?;
    Ok(expr::max_rel_residual(&lhs, &rhs, sampler, trials)?.0)
}

/// `[D_{p_i}, D_{p_j}] f = (1/E^3) (df/dE) [p_i, p_j]`, with the momentum
/// commutator supplied by the caller (`0` for ordinary momenta,
/// `i * eps_ijk * B_k` for the magnetic postulate).
pub fn momentum_commutator_apply(_c: &Chart, i: usize, j: usize, f: &Expr, pcomm: &Expr) -> Result<Expr, ChartError> {
    momentum_name(i)?;
    momentum_name(j)?;
    Ok(Expr::mul([Expr::powi(Expr::sym(ENERGY), -3), diff_explicit(f, ENERGY), pcomm.clone()]))
}

/// `i * eps_ijk * B_k` for axes `i, j`, in terms of symbols `B1, B2, B3`.
pub fn magnetic_pcomm(i: usize, j: usize) -> Result<Expr, ChartError> {
    momentum_name(i)?;
    momentum_name(j)?;
    if i == j {
        return Ok(Expr::zero());
    }
    let k = 6 - i - j;
    let sign = if (i, j) == (1, 2) || (i, j) == (2, 3) || (i, j) == (3, 1) { 1.0 } else { -1.0 };
    Ok(Expr::mul([Expr::Const(C64::new(0.0, sign)), Expr::sym(format!("B{k}"))]))
}

/// Central difference of `f` along chart variable `v`.
///
/// Moving a base variable recomputes the derived variables that chain
/// through it; moving a derived variable shifts only that slot.
pub fn fd_whole_partial(c: &Chart, f: &Expr, v: &str, point: &Bindings, h: f64) -> Result<C64, ChartError> {
    if !(h > 0.0) {
        return Err(ChartError::Invalid(format!("step must be positive, got {h}")));
    }
    let kind = c.require(v)?;
    let full = c.on_shell(point)?;
    let x = full.get(v).ok_or_else(|| ChartError::Expr(ExprError::Unbound(v.to_string())))?;
    let shifted = |delta: f64| -> Result<Bindings, ChartError> {
        let mut b = full.with(v, x + delta);
        if kind == VarKind::Base {
            for d in c.derived() {
                if c.chain_gradient(d, v).is_some() {
                    b.set(d.name.clone(), eval(&d.defining(), &b)?);
                }
            }
        }
        Ok(b)
    };
    // Divide by the step actually taken after rounding x +- h.
    let (up, down) = ((x.re + h) - x.re, x.re - (x.re - h));
    let plus = eval(f, &shifted(up)?)?;
    let minus = eval(f, &shifted(-down)?)?;
    Ok((plus - minus) / (up + down))
}

/// [`fd_whole_partial`] evaluated in 128-bit precision, so that the
/// difference quotient carries truncation error only, down to steps far
/// below where `f64` roundoff takes over. Real functions and points only.
pub fn fd_whole_partial_extended(c: &Chart, f: &Expr, v: &str, point: &Bindings, h: f64) -> Result<f64, ChartError> {
    if !(h > 0.0) {
        return Err(ChartError::Invalid(format!("step must be positive, got {h}")));
    }
    let not_real = || ChartError::Invalid("not evaluable as a real function in extended precision".into());
    let kind = c.require(v)?;
    let mut x = expr::Extended::default();
    let mut full = expr::ExtendedBindings::new();
    for (k, z) in point.iter() {
        if z.im != 0.0 {
            return Err(not_real());
        }
        full.insert(k.to_string(), x.from_f64(z.re));
    }
    for d in &c.derived {
        if !full.contains_key(&d.name) {
            let val = x.eval(&d.defining(), &full).ok_or_else(not_real)?;
            full.insert(d.name.clone(), val);
        }
    }
    let x0 = full.get(v).cloned().ok_or_else(|| ChartError::Expr(ExprError::Unbound(v.to_string())))?;
    let mut value_at = |delta: f64| -> Result<astro_float::BigFloat, ChartError> {
        let mut b = full.clone();
        b.insert(v.to_string(), x.add(&x0, &x.from_f64(delta)));
        if kind == VarKind::Base {
            for d in c.derived() {
                if c.chain_gradient(d, v).is_some() {
                    let val = x.eval(&d.defining(), &b).ok_or_else(not_real)?;
                    b.insert(d.name.clone(), val);
                }
            }
        }
        x.eval(f, &b).ok_or_else(not_real)
    };
    let plus = value_at(h)?;
    let minus = value_at(-h)?;
    let q = x.div(&x.sub(&plus, &minus), &x.from_f64(2.0 * h));
    Ok(x.to_f64(&q))
}

/// Seeded on-shell sampler: `|p_i| in [0.1, 2]` with random sign,
/// `m in [0.5, 2]`, derived variables evaluated on the chart's branch.
#[derive(Debug, Clone)]
pub struct OnShellSampler {
    chart: Chart,
    rng: ChaCha8Rng,
    ranges: BTreeMap<String, (f64, f64, bool)>,
}

impl OnShellSampler {
    pub fn new(chart: &Chart, seed: u64) -> Self {
        Self { chart: chart.clone(), rng: ChaCha8Rng::seed_from_u64(seed), ranges: BTreeMap::new() }
    }

    /// Override the range of a base variable; `signed` draws a random sign.
    pub fn range(mut self, name: &str, lo: f64, hi: f64, signed: bool) -> Self {
        self.ranges.insert(name.to_string(), (lo, hi, signed));
        self
    }

    fn draw(&mut self, name: &str) -> f64 {
        let (lo, hi, signed) = match self.ranges.get(name) {
            Some(r) => *r,
            None if name == "m" => (0.5, 2.0, false),
            None => (0.1, 2.0, true),
        };
        let mag = self.rng.random_range(lo..=hi);
        if signed && self.rng.random_bool(0.5) {
            -mag
        } else {
            mag
        }
    }
}

impl Sampler for OnShellSampler {
    fn sample(&mut self) -> Bindings {
        let names = self.chart.base().to_vec();
        loop {
            let mut b = Bindings::new();
            for n in &names {
                let v = self.draw(n);
                b.set_real(n.clone(), v);
            }
            if let Ok(full) = self.chart.on_shell(&b) {
                return full;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_chart() -> Chart {
        Chart::standard(1)
    }

    fn at(pairs: &[(&str, f64)]) -> Bindings {
        Bindings::from_reals(pairs.iter().copied())
    }

    fn value(c: &Chart, e: &Expr, b: &Bindings) -> C64 {
        eval(e, &c.on_shell(b).unwrap()).unwrap()
    }

    #[test]
    fn energy_gradient_is_mixed_form() {
        let e = whole_partial(&std_chart(), &parse("E").unwrap(), "p1").unwrap();
        assert_eq!(e.to_string(), "p1/E");
    }

    #[test]
    fn independent_momenta() {
        assert!(whole_partial(&std_chart(), &parse("p2").unwrap(), "p1").unwrap().is_zero());
    }

    #[test]
    fn product_rule_through_energy() {
        let c = std_chart();
        let f = parse("E*p1").unwrap();
        let d = whole_partial(&c, &f, "p1").unwrap();
        let point = at(&[("p1", 1.0), ("p2", 0.0), ("p3", 0.0), ("m", 0.0)]);
        assert!((value(&c, &d, &point) - C64::new(2.0, 0.0)).norm() < 1e-14);
        let fd = fd_whole_partial(&c, &f, "p1", &point, 1e-5).unwrap();
        assert!((fd - C64::new(2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn unknown_variable() {
        assert_eq!(
            whole_partial(&std_chart(), &parse("E").unwrap(), "q"),
            Err(ChartError::UnknownVariable("q".into()))
        );
    }

    #[test]
    fn commutator_vanishes_without_energy_dependence() {
        let r = commutator_apply(&std_chart(), "p1", "E", &parse("p1^2").unwrap()).unwrap();
        assert!(r.is_zero(), "{r}");
    }

    #[test]
    fn commutator_of_e_times_p1() {
        let c = std_chart();
        let r = commutator_apply(&c, "p1", "E", &parse("E*p1").unwrap()).unwrap();
        let point = at(&[("p1", 1.0), ("p2", 0.0), ("p3", 0.0), ("m", 0.0)]);
        assert!((value(&c, &r, &point) - C64::new(1.0, 0.0)).norm() < 1e-14);
        // Hand expansion: [D_p1, D_E](E p1) = -(df/dE) d/dE(p1/E) = p1^2/E^2.
        let oracle = parse("p1^2/E^2").unwrap();
        let mut s = OnShellSampler::new(&c, 5);
        assert!(expr::equal_numeric(&r, &oracle, &mut s, 1e-12, 100).unwrap());
    }

    #[test]
    fn classical_momenta_commute() {
        let c = std_chart();
        let mut s = OnShellSampler::new(&c, 9);
        for text in ["E*p1*p2", "exp(E)*sinh(p2)", "p3^2/E", "sqrt(1+E^2)*p1"] {
            let f = parse(text).unwrap();
            let r = commutator_apply(&c, "p1", "p2", &f).unwrap();
            assert!(expr::equal_numeric(&r, &Expr::zero(), &mut s, 1e-12, 50).unwrap(), "{text}");
        }
    }

    #[test]
    fn closed_form_residuals() {
        let c = std_chart();
        let mut s = OnShellSampler::new(&c, 1);
        let r = commutator_coefficient_residual(&c, 1, &parse("E*p1").unwrap(), &mut s, 100).unwrap();
        assert!(r <= 1e-10);
        for axis in 1..=3 {
            let r = commutator_coefficient_residual(&c, axis, &parse("p3^2").unwrap(), &mut s, 10).unwrap();
            assert_eq!(r, 0.0);
        }
        let r = commutator_coefficient_residual(&c, 2, &parse("exp(E)*sinh(p2)").unwrap(), &mut s, 200).unwrap();
        assert!(r <= 1e-9);
        assert_eq!(
            commutator_coefficient_residual(&c, 4, &parse("E").unwrap(), &mut s, 1),
            Err(ChartError::BadAxis(4))
        );
    }

    #[test]
    fn momentum_commutator_cases() {
        let c = std_chart();
        let zero = momentum_commutator_apply(&c, 1, 2, &parse("E*p1").unwrap(), &Expr::zero()).unwrap();
        assert!(zero.is_zero());
        let pcomm = parse("i*B3").unwrap();
        let r = momentum_commutator_apply(&c, 1, 2, &parse("E").unwrap(), &pcomm).unwrap();
        let v = eval(&r, &at(&[("E", 2.0), ("B3", 1.0)])).unwrap();
        assert!((v - C64::new(0.0, 0.125)).norm() < 1e-15);
        let none = momentum_commutator_apply(&c, 1, 3, &parse("p1*p2").unwrap(), &pcomm).unwrap();
        assert!(none.is_zero());
        assert_eq!(magnetic_pcomm(1, 2).unwrap().to_string(), "i*B3");
        assert_eq!(magnetic_pcomm(1, 3).unwrap().to_string(), "-i*B2");
    }

    #[test]
    fn fd_cases() {
        let c = std_chart();
        let point = at(&[("p1", 3.0), ("p2", 0.0), ("p3", 0.0), ("m", 4.0)]);
        let v = fd_whole_partial(&c, &parse("E").unwrap(), "p1", &point, 1e-5).unwrap();
        assert!((v - C64::new(0.6, 0.0)).norm() < 1e-8);

        let point = at(&[("p1", 1.0), ("p2", 0.0), ("p3", 0.0), ("m", 0.0), ("E", 1.0)]);
        let v = fd_whole_partial(&c, &parse("E*p1").unwrap(), "E", &point, 1e-5).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn fd_error_quarters_when_step_halves() {
        let c = std_chart();
        let f = parse("exp(E)*p1").unwrap();
        let point = at(&[("p1", 0.7), ("p2", -0.4), ("p3", 1.2), ("m", 0.9)]);
        let exact = value(&c, &whole_partial(&c, &f, "p1").unwrap(), &point);
        let err = |h: f64| (fd_whole_partial(&c, &f, "p1", &point, h).unwrap() - exact).norm();
        let ratio = err(1e-3) / err(5e-4);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn fd_rejects_bad_step_and_singular_points() {
        let c = std_chart();
        let point = at(&[("p1", 0.0), ("p2", 0.0), ("p3", 0.0), ("m", 0.0)]);
        assert!(matches!(fd_whole_partial(&c, &parse("E").unwrap(), "p1", &point, 0.0), Err(ChartError::Invalid(_))));
        assert!(fd_whole_partial(&c, &parse("1/p1").unwrap(), "p2", &point, 1e-5).is_err());
    }

    #[test]
    fn chart_gradients_are_consistent() {
        for branch in [1, -1] {
            let c = Chart::standard(branch);
            let mut s = OnShellSampler::new(&c, 3);
            assert!(c.consistency_residual(&mut s, 50).unwrap() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_gradient_is_detected() {
        let text =
            r#"{"base":["p1","m"],"derived":[{"name":"E","def":"sqrt(m^2+p1^2)","branch":1,"grad":{"p1":"E/p1"}}]}"#;
        let c = Chart::from_json(text).unwrap();
        let mut s = OnShellSampler::new(&c, 3);
        assert!(c.consistency_residual(&mut s, 20).unwrap() > 1e-3);
    }

    #[test]
    fn json_round_trip() {
        let c = Chart::standard(-1);
        assert_eq!(Chart::from_json(&c.to_json()).unwrap(), c);
        let text = r#"{"base":["p1","p2","p3","m"],"derived":[{"name":"E","def":"sqrt(m^2+p1^2+p2^2+p3^2)","branch":1,"grad":{"p1":"p1/E","p2":"p2/E","p3":"p3/E","m":"m/E"}}]}"#;
        let parsed = Chart::from_json(text).unwrap();
        let b = at(&[("p1", 1.0), ("p2", 2.0), ("p3", 2.0), ("m", 0.0)]);
        assert_eq!(parsed.on_shell(&b).unwrap().get("E"), Some(C64::new(3.0, 0.0)));
    }

    #[test]
    fn invalid_charts() {
        let dup = r#"{"base":["p1","p1"],"derived":[]}"#;
        assert!(matches!(Chart::from_json(dup), Err(ChartError::Invalid(_))));
        let nested = r#"{"base":["p1"],"derived":[{"name":"E","def":"q+p1","branch":1,"grad":{}}]}"#;
        assert!(matches!(Chart::from_json(nested), Err(ChartError::Invalid(_))));
        let branch = r#"{"base":["p1"],"derived":[{"name":"E","def":"p1","branch":2,"grad":{}}]}"#;
        assert!(matches!(Chart::from_json(branch), Err(ChartError::Invalid(_))));
        let syntax = r#"{"base":["p1"],"derived":[{"name":"E","def":"p1+","branch":1,"grad":{}}]}"#;
        assert!(matches!(Chart::from_json(syntax), Err(ChartError::Expr(ExprError::Syntax { .. }))));
    }

    #[test]
    fn mass_chain_toggle() {
        let mut c = std_chart();
        let f = parse("E").unwrap();
        assert_eq!(whole_partial(&c, &f, "m").unwrap().to_string(), "m/E");
        c.set_chain("E", "m", false).unwrap();
        assert!(whole_partial(&c, &f, "m").unwrap().is_zero());
        let point = at(&[("p1", 1.0), ("p2", 0.0), ("p3", 0.0), ("m", 1.0)]);
        assert_eq!(fd_whole_partial(&c, &f, "m", &point, 1e-5).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn diff_op_composition_order() {
        let c = std_chart();
        let f = parse("E*p1").unwrap();
        let op = DiffOp::new(&c, &["p1", "E"]).unwrap();
        // D_p1 (D_E f) = D_p1 p1 = 1
        let r = op.apply(&c, &f).unwrap();
        assert!(r.is_one(), "{r}");
        assert!(DiffOp::new(&c, &["x"]).is_err());
    }
}
