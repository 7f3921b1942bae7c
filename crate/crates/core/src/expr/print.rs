use std::fmt::{self, Write};

use super::{Exponent, Expr, C64};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 5;

fn real_text(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

fn const_prec(z: C64) -> u8 {
    match (z.re, z.im) {
        (re, 0.0) => {
            if re.is_sign_negative() && re != 0.0 {
                UNARY
            } else {
                ATOM
            }
        }
        (0.0, im) => {
            if im == 1.0 {
                ATOM
            } else if im == -1.0 {
                UNARY
            } else {
                PRODUCT
            }
        }
        _ => ATOM,
    }
}

fn const_text(z: C64) -> String {
    if z.im == 0.0 {
        return real_text(z.re);
    }
    let imag = match z.im {
        1.0 => "i".to_string(),
        -1.0 => "-i".to_string(),
        im => format!("{}*i", real_text(im)),
    };
    if z.re == 0.0 {
        imag
    } else {
        format!("({} + {})", real_text(z.re), imag)
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Const(z) => const_prec(*z),
        Expr::Pow(_, k) if k.halves() < 0 => PRODUCT,
        Expr::Sym(_) | Expr::Func(..) | Expr::Pow(..) => ATOM,
        Expr::Add(ts) if ts.len() == 1 => prec(&ts[0]),
        Expr::Add(ts) if ts.is_empty() => ATOM,
        Expr::Add(_) => SUM,
        Expr::Mul(fs) if fs.len() == 1 => prec(&fs[0]),
        Expr::Mul(fs) if fs.is_empty() => ATOM,
        Expr::Mul(_) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
    }
}

fn child<W: Write>(w: &mut W, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        w.write_char('(')?;
        write_expr(w, e, 0)?;
        w.write_char(')')
    } else {
        write_expr(w, e, min)
    }
}

fn is_reciprocal(e: &Expr) -> bool {
    matches!(e, Expr::Pow(_, k) if k.halves() < 0)
}

/// `b^k` for a reciprocal `b^-k`.
fn positive_power(e: &Expr) -> Expr {
    match e {
        Expr::Pow(b, k) if k.halves() == -2 => (**b).clone(),
        Expr::Pow(b, k) => Expr::Pow(b.clone(), Exponent::from_halves(-k.halves())),
        other => other.clone(),
    }
}

/// Write `e` so that it re-parses to a numerically equal expression.
pub(crate) fn write_expr<W: Write>(w: &mut W, e: &Expr, _min: u8) -> fmt::Result {
    match e {
        Expr::Const(z) => w.write_str(&const_text(*z)),
        Expr::Sym(s) => w.write_str(s),
        Expr::Add(ts) => {
            if ts.is_empty() {
                return w.write_char('0');
            }
            for (k, t) in ts.iter().enumerate() {
                match t {
                    Expr::Neg(x) if k > 0 => {
                        w.write_str(" - ")?;
                        child(w, x, PRODUCT)?;
                    }
                    _ => {
                        if k > 0 {
                            w.write_str(" + ")?;
                        }
                        child(w, t, PRODUCT)?;
                    }
                }
            }
            Ok(())
        }
        Expr::Mul(fs) if fs.iter().any(is_reciprocal) => {
            let (den, num): (Vec<&Expr>, Vec<&Expr>) = fs.iter().partition(|f| is_reciprocal(f));
            match num.len() {
                0 => w.write_char('1')?,
                1 => child(w, num[0], PRODUCT)?,
                _ => write_expr(w, &Expr::Mul(num.into_iter().cloned().collect()), 0)?,
            }
            w.write_char('/')?;
            let den: Vec<Expr> = den.into_iter().map(positive_power).collect();
            if den.len() == 1 {
                child(w, &den[0], ATOM)
            } else {
                w.write_char('(')?;
                write_expr(w, &Expr::Mul(den), 0)?;
                w.write_char(')')
            }
        }
        Expr::Mul(fs) => {
            if fs.is_empty() {
                return w.write_char('1');
            }
            for (k, f) in fs.iter().enumerate() {
                if k > 0 {
                    w.write_char('*')?;
                }
                // Division inside a product must not absorb the following factors.
                let min = if k + 1 < fs.len() && matches!(f, Expr::Div(..)) { ATOM } else { PRODUCT };
                child(w, f, min)?;
            }
            Ok(())
        }
        Expr::Div(n, d) => {
            child(w, n, PRODUCT)?;
            w.write_char('/')?;
            child(w, d, UNARY)
        }
        Expr::Neg(x) => {
            w.write_char('-')?;
            child(w, x, UNARY)
        }
        Expr::Pow(..) if is_reciprocal(e) => {
            w.write_str("1/")?;
            child(w, &positive_power(e), ATOM)
        }
        Expr::Pow(b, exp) => {
            // The grammar has no chained `^`.
            if matches!(**b, Expr::Pow(..)) {
                w.write_char('(')?;
                write_expr(w, b, 0)?;
                w.write_char(')')?;
            } else {
                child(w, b, ATOM)?;
            }
            match exp.as_integer() {
                Some(n) => write!(w, "^{n}"),
                None => write!(w, "^({}/2)", exp.halves()),
            }
        }
        Expr::Func(f, a) => {
            write!(w, "{}(", f.name())?;
            write_expr(w, a, 0)?;
            w.write_char(')')
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn round(text: &str) -> String {
        parse(text).unwrap().to_string()
    }

    #[test]
    fn readable_forms() {
        assert_eq!(round("E*p1"), "E*p1");
        assert_eq!(round("a - b*c"), "a - b*c");
        assert_eq!(round("(a+b)^2"), "(a + b)^2");
        assert_eq!(round("-(a+b)"), "-(a + b)");
        assert_eq!(round("a/(b*c)"), "a/(b*c)");
        assert_eq!(round("x^(1/2) + x^-3"), "x^(1/2) + 1/x^3");
        assert_eq!(round("x^(-1/2)*y"), "y/x^(1/2)");
        assert_eq!(round("a*b^-2*c^-1"), "a/(b^2*c)");
        assert_eq!(round("sqrt(m^2 + p1^2)"), "sqrt(m^2 + p1^2)");
        assert_eq!(round("2.5*i"), "2.5*i");
    }

    #[test]
    fn complex_and_negative_constants() {
        let z = Expr::Const(C64::new(-1.5, 2.0));
        assert_eq!(z.to_string(), "(-1.5 + 2*i)");
        let p = Expr::powi(Expr::Neg(Box::new(Expr::sym("x"))), 2);
        assert_eq!(p.to_string(), "(-x)^2");
        let q = Expr::Pow(Box::new(Expr::num(-3.0)), crate::expr::Exponent::int(2));
        assert_eq!(q.to_string(), "(-3)^2");
        assert_eq!(Expr::num(1e-7).to_string(), "1e-7");
        let nested = Expr::Pow(Box::new(Expr::powi(Expr::sym("x"), 2)), crate::expr::Exponent::int(3));
        assert_eq!(nested.to_string(), "(x^2)^3");
    }

    #[test]
    fn division_inside_product_keeps_grouping() {
        let e = Expr::Mul(vec![Expr::Div(Box::new(Expr::sym("a")), Box::new(Expr::sym("b"))), Expr::sym("c")]);
        // a/b*c parses as (a/b)*c, which is the same value, but keep the grouping explicit.
        assert_eq!(e.to_string(), "(a/b)*c");
    }
}
