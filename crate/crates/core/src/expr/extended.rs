//! Real evaluation in extended precision (128-bit mantissa by default).

use std::collections::BTreeMap;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use super::{Expr, Func};

pub type ExtendedBindings = BTreeMap<String, BigFloat>;

const RM: RoundingMode = RoundingMode::ToEven;

/// Evaluation context: working precision and cached constants.
pub struct Extended {
    bits: usize,
    consts: Consts,
}

impl Extended {
    pub fn new(bits: usize) -> Self {
        Self { bits, consts: Consts::new().expect("constant cache") }
    }

    pub fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }

    /// Nearest `f64`.
    pub fn to_f64(&mut self, x: &BigFloat) -> f64 {
        let text = x.format(Radix::Dec, RM, &mut self.consts).expect("decimal rendering");
        text.parse().unwrap_or(f64::NAN)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, RM)
    }

    /// Evaluate a real expression.
    ///
    /// Returns `None` for complex constants, unbound symbols, non-real
    /// results and division by zero.
    pub fn eval(&mut self, e: &Expr, b: &ExtendedBindings) -> Option<BigFloat> {
        let p = self.bits;
        let v = match e {
            Expr::Const(z) => (z.im == 0.0).then(|| self.from_f64(z.re))?,
            Expr::Sym(s) => b.get(s)?.clone(),
            Expr::Add(ts) => {
                let mut acc = self.from_f64(0.0);
                for t in ts {
                    acc = acc.add(&self.eval(t, b)?, p, RM);
                }
                acc
            }
            Expr::Mul(fs) => {
                let mut acc = self.from_f64(1.0);
                for f in fs {
                    acc = acc.mul(&self.eval(f, b)?, p, RM);
                }
                acc
            }
            Expr::Neg(x) => self.eval(x, b)?.neg(),
            Expr::Div(n, d) => {
                let d = self.eval(d, b)?;
                if d.is_zero() {
                    return None;
                }
                self.eval(n, b)?.div(&d, p, RM)
            }
            Expr::Pow(x, exp) => {
                let mut x = self.eval(x, b)?;
                let mut n = exp.halves();
                if n % 2 != 0 {
                    if x.is_negative() {
                        return None;
                    }
                    x = x.sqrt(p, RM);
                } else {
                    n /= 2;
                }
                if n < 0 {
                    if x.is_zero() {
                        return None;
                    }
                    x = x.reciprocal(p, RM);
                }
                x.powi(n.unsigned_abs() as usize, p, RM)
            }
            Expr::Func(f, a) => {
                let x = self.eval(a, b)?;
                match f {
                    Func::Sqrt if x.is_negative() => return None,
                    Func::Sqrt => x.sqrt(p, RM),
                    Func::Exp => x.exp(p, RM, &mut self.consts),
                    Func::Sinh => x.sinh(p, RM, &mut self.consts),
                    Func::Cosh => x.cosh(p, RM, &mut self.consts),
                }
            }
        };
        (!v.is_nan() && !v.is_inf()).then_some(v)
    }
}

impl Default for Extended {
    fn default() -> Self {
        Self::new(128)
    }
}
