//! Complex-valued expression trees.
//!
//! [`Expr`] is the substrate for everything else in the crate: charts store
//! their defining relations and gradients as expressions, derivative
//! operators rewrite them, and identities are checked by evaluating both
//! sides at sampled points (see [`equal_numeric`]).
//!
//! The smart constructors ([`Expr::add`], [`Expr::mul`], ...) apply a light
//! simplification: constant folding, absorption of `0` and `1`, and
//! flattening of nested sums and products. Nothing beyond that is attempted.

mod diff;
mod eval;
mod extended;
mod parse;
mod print;
mod sample;
mod simplify;

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use diff::diff_explicit;
pub use eval::{eval, eval_real, REAL_TOLERANCE};
pub use extended::{Extended, ExtendedBindings};
pub use parse::parse;
pub use sample::{equal_numeric, max_rel_residual, rel_err, Bindings, Sampler, UniformSampler};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Symbol aliases accepted by the parser.
pub(crate) const ALIASES: [(&str, &str); 3] = [("px", "p1"), ("py", "p2"), ("pz", "p3")];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite value")]
    NonFinite,
    #[error("expected a real value, imaginary part is {0:e}")]
    NotReal(f64),
    #[error("sampler exhausted: no sample point produced finite values")]
    SamplerExhausted,
}

impl ExprError {
    /// True for errors raised while reading text, as opposed to evaluating.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, ExprError::Syntax { .. } | ExprError::UnknownFunction { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Sinh,
    Cosh,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "sinh" => Some(Func::Sinh),
            "cosh" => Some(Func::Cosh),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }

    pub fn apply(self, z: C64) -> C64 {
        match self {
            Func::Sqrt => z.sqrt(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Exp => z.exp(),
        }
    }
}

/// An exponent that is an integer or half an odd integer, stored in halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent(i32);

impl Exponent {
    pub const HALF: Exponent = Exponent(1);

    pub fn int(n: i32) -> Exponent {
        Exponent(2 * n)
    }

    pub fn from_halves(halves: i32) -> Exponent {
        Exponent(halves)
    }

    pub fn halves(self) -> i32 {
        self.0
    }

    pub fn as_integer(self) -> Option<i32> {
        (self.0 % 2 == 0).then_some(self.0 / 2)
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

/// Immutable expression tree.
///
/// `Const` values are always finite; the constructors in this module never
/// fold a constant into `NaN` or an infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Sym(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Exponent),
    Neg(Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(C64::new(0.0, 0.0))
    }

    pub fn one() -> Expr {
        Expr::Const(C64::new(1.0, 0.0))
    }

    pub fn imag_unit() -> Expr {
        Expr::Const(C64::new(0.0, 1.0))
    }

    /// Real constant. Panics on a non-finite value.
    pub fn num(x: f64) -> Expr {
        Expr::constant(C64::new(x, 0.0)).expect("constant must be finite")
    }

    pub fn constant(z: C64) -> Result<Expr, ExprError> {
        if finite(z) {
            Ok(Expr::Const(z))
        } else {
            Err(ExprError::NonFinite)
        }
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::Sym(name.into())
    }

    pub fn as_const(&self) -> Option<C64> {
        match self {
            Expr::Const(z) => Some(*z),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|z| z == C64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|z| z == C64::new(1.0, 0.0))
    }

    pub fn add(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut flat = Vec::new();
        let mut acc = C64::new(0.0, 0.0);
        let mut folded = false;
        for t in terms {
            match t {
                Expr::Add(inner) => {
                    for u in inner {
                        push_term(&mut flat, &mut acc, &mut folded, u);
                    }
                }
                other => push_term(&mut flat, &mut acc, &mut folded, other),
            }
        }
        if folded && acc != C64::new(0.0, 0.0) {
            flat.push(Expr::Const(acc));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::Add(flat),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add([a, Expr::neg(b)])
    }

    pub fn mul(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut flat = Vec::new();
        let mut acc = C64::new(1.0, 0.0);
        for f in factors {
            let items = match f {
                Expr::Mul(inner) => inner,
                other => vec![other],
            };
            for u in items {
                match u {
                    Expr::Const(z) if finite(acc * z) => acc *= z,
                    other => flat.push(other),
                }
            }
        }
        if acc == C64::new(0.0, 0.0) {
            return Expr::zero();
        }
        let negate = acc == C64::new(-1.0, 0.0) && !flat.is_empty();
        if acc != C64::new(1.0, 0.0) && !negate {
            flat.insert(0, Expr::Const(acc));
        }
        let body = match flat.len() {
            0 => Expr::one(),
            1 => flat.pop().unwrap(),
            _ => Expr::Mul(flat),
        };
        if negate {
            Expr::neg(body)
        } else {
            body
        }
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(z) => Expr::Const(-z),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn div(num: Expr, den: Expr) -> Expr {
        if den.is_one() {
            return num;
        }
        if let (Some(a), Some(b)) = (num.as_const(), den.as_const()) {
            let q = a / b;
            if b != C64::new(0.0, 0.0) && finite(q) {
                return Expr::Const(q);
            }
        }
        if num.is_zero() && den.as_const().is_none_or(|b| b != C64::new(0.0, 0.0)) {
            return Expr::zero();
        }
        Expr::Div(Box::new(num), Box::new(den))
    }

    pub fn pow(base: Expr, exp: Exponent) -> Expr {
        if exp.halves() == 0 {
            return Expr::one();
        }
        if exp.halves() == 2 {
            return base;
        }
        if let Some(z) = base.as_const() {
            let v = eval::pow_value(z, exp);
            if z != C64::new(0.0, 0.0) && finite(v) {
                return Expr::Const(v);
            }
        }
        Expr::Pow(Box::new(base), exp)
    }

    pub fn powi(base: Expr, n: i32) -> Expr {
        Expr::pow(base, Exponent::int(n))
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        if let Some(z) = arg.as_const() {
            let v = f.apply(z);
            if finite(v) {
                return Expr::Const(v);
            }
        }
        Expr::Func(f, Box::new(arg))
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::func(Func::Sqrt, arg)
    }

    /// Replace every occurrence of symbol `name` with `replacement`.
    pub fn subst(&self, name: &str, replacement: &Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Sym(s) if s == name => replacement.clone(),
            Expr::Sym(_) => self.clone(),
            Expr::Add(ts) => Expr::Add(ts.iter().map(|t| t.subst(name, replacement)).collect()),
            Expr::Mul(fs) => Expr::Mul(fs.iter().map(|f| f.subst(name, replacement)).collect()),
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.subst(name, replacement)), *e),
            Expr::Neg(x) => Expr::Neg(Box::new(x.subst(name, replacement))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.subst(name, replacement)), Box::new(b.subst(name, replacement))),
            Expr::Func(f, a) => Expr::Func(*f, Box::new(a.subst(name, replacement))),
        }
    }

    /// Free symbols in first-occurrence order, without duplicates.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(s) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Expr::Pow(x, _) | Expr::Neg(x) | Expr::Func(_, x) => x.collect_symbols(out),
            Expr::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Sym(s) => s == name,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(|x| x.contains_symbol(name)),
            Expr::Pow(x, _) | Expr::Neg(x) | Expr::Func(_, x) => x.contains_symbol(name),
            Expr::Div(a, b) => a.contains_symbol(name) || b.contains_symbol(name),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Sym(_) => 0,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().map(Expr::size).sum(),
            Expr::Pow(x, _) | Expr::Neg(x) | Expr::Func(_, x) => x.size(),
            Expr::Div(a, b) => a.size() + b.size(),
        }
    }
}

fn push_term(flat: &mut Vec<Expr>, acc: &mut C64, folded: &mut bool, t: Expr) {
    match t {
        Expr::Const(z) if finite(*acc + z) => {
            *acc += z;
            *folded = true;
        }
        other => flat.push(other),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self, 0)
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_fold_and_absorb() {
        let x = Expr::sym("x");
        assert_eq!(Expr::add([Expr::zero(), x.clone()]), x);
        assert_eq!(Expr::mul([Expr::one(), x.clone()]), x);
        assert!(Expr::mul([Expr::zero(), x.clone()]).is_zero());
        assert_eq!(Expr::add([Expr::num(2.0), Expr::num(3.0)]), Expr::num(5.0));
        assert_eq!(Expr::mul([Expr::num(-1.0), x.clone()]), Expr::neg(x.clone()));
        assert_eq!(Expr::neg(Expr::neg(x.clone())), x);
        assert_eq!(Expr::powi(x.clone(), 1), x);
        assert!(Expr::powi(x.clone(), 0).is_one());
    }

    #[test]
    fn flattening() {
        let a = Expr::sym("a");
        let b = Expr::sym("b");
        let c = Expr::sym("c");
        let nested = Expr::add([a.clone(), Expr::add([b.clone(), c.clone()])]);
        assert_eq!(nested, Expr::Add(vec![a.clone(), b.clone(), c.clone()]));
        let nested = Expr::mul([Expr::mul([a.clone(), b.clone()]), c.clone()]);
        assert_eq!(nested, Expr::Mul(vec![a, b, c]));
    }

    #[test]
    fn folding_never_stores_non_finite() {
        let big = Expr::num(1e300);
        let prod = Expr::mul([big.clone(), big.clone()]);
        assert!(matches!(prod, Expr::Mul(_)));
        assert!(matches!(Expr::div(Expr::one(), Expr::zero()), Expr::Div(..)));
        assert!(Expr::constant(C64::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn subst_absent_symbol_is_identity() {
        let e = parse("p1").unwrap();
        assert_eq!(e.subst("E", &parse("sqrt(m^2+p1^2)").unwrap()), e);
    }

    #[test]
    fn subst_energy_into_square() {
        let e = parse("E^2").unwrap().subst("E", &parse("sqrt(m^2+p1^2)").unwrap());
        let b = Bindings::from_reals([("m", 3.0), ("p1", 4.0)]);
        let v = eval(&e, &b).unwrap();
        assert!((v - C64::new(25.0, 0.0)).norm() < 1e-12);
    }
}
