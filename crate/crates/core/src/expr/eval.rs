use super::{Bindings, Exponent, Expr, ExprError, C64};

/// Largest imaginary part tolerated by [`eval_real`].
pub const REAL_TOLERANCE: f64 = 1e-10;

pub(crate) fn pow_value(z: C64, exp: Exponent) -> C64 {
    match exp.as_integer() {
        Some(n) => z.powi(n),
        None => z.sqrt().powi(exp.halves()),
    }
}

fn checked(z: C64) -> Result<C64, ExprError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(ExprError::NonFinite)
    }
}

/// Evaluate `e` with every free symbol taken from `b`.
///
/// `sqrt` (and half-integer powers) use the principal branch.
pub fn eval(e: &Expr, b: &Bindings) -> Result<C64, ExprError> {
    let zero = C64::new(0.0, 0.0);
    match e {
        Expr::Const(z) => Ok(*z),
        Expr::Sym(s) => b.get(s).ok_or_else(|| ExprError::Unbound(s.clone())),
        Expr::Add(ts) => {
            let mut acc = zero;
            for t in ts {
                acc += eval(t, b)?;
            }
            checked(acc)
        }
        Expr::Mul(fs) => {
            let mut acc = C64::new(1.0, 0.0);
            for f in fs {
                acc *= eval(f, b)?;
            }
            checked(acc)
        }
        Expr::Pow(base, exp) => {
            let z = eval(base, b)?;
            if z == zero && exp.halves() < 0 {
                return Err(ExprError::DivisionByZero);
            }
            checked(pow_value(z, *exp))
        }
        Expr::Neg(x) => Ok(-eval(x, b)?),
        Expr::Div(n, d) => {
            let num = eval(n, b)?;
            let den = eval(d, b)?;
            if den == zero {
                return Err(ExprError::DivisionByZero);
            }
            checked(num / den)
        }
        Expr::Func(f, a) => checked(f.apply(eval(a, b)?)),
    }
}

/// Evaluate in a real-valued context: the imaginary part must vanish to
/// within [`REAL_TOLERANCE`].
pub fn eval_real(e: &Expr, b: &Bindings) -> Result<f64, ExprError> {
    let z = eval(e, b)?;
    if z.im.abs() > REAL_TOLERANCE {
        return Err(ExprError::NotReal(z.im));
    }
    Ok(z.re)
}
