use super::{Exponent, Expr, Func, C64};

/// Explicit partial derivative of `e` with respect to symbol `s`.
///
/// Every other symbol is held constant, including symbols a chart may
/// regard as derived; chain-rule terms are the business of
/// [`crate::onshell::whole_partial`].
pub fn diff_explicit(e: &Expr, s: &str) -> Expr {
    if !e.contains_symbol(s) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Sym(name) => {
            if name == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Add(ts) => Expr::add(ts.iter().map(|t| diff_explicit(t, s))),
        Expr::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (k, fk) in fs.iter().enumerate() {
                let dk = diff_explicit(fk, s);
                if dk.is_zero() {
                    continue;
                }
                let factors = fs.iter().enumerate().map(|(j, fj)| if j == k { dk.clone() } else { fj.clone() });
                terms.push(Expr::mul(factors));
            }
            Expr::add(terms)
        }
        Expr::Neg(x) => Expr::neg(diff_explicit(x, s)),
        Expr::Div(u, v) => {
            let du = diff_explicit(u, s);
            let dv = diff_explicit(v, s);
            if dv.is_zero() {
                return Expr::div(du, (**v).clone());
            }
            let num = Expr::sub(Expr::mul([du, (**v).clone()]), Expr::mul([(**u).clone(), dv]));
            Expr::div(num, Expr::powi((**v).clone(), 2))
        }
        Expr::Pow(base, exp) => {
            let db = diff_explicit(base, s);
            let lowered = Exponent::from_halves(exp.halves() - 2);
            Expr::mul([Expr::Const(C64::new(exp.value(), 0.0)), Expr::pow((**base).clone(), lowered), db])
        }
        Expr::Func(f, arg) => {
            let da = diff_explicit(arg, s);
            let a = (**arg).clone();
            match f {
                Func::Sqrt => Expr::div(da, Expr::mul([Expr::num(2.0), Expr::sqrt(a)])),
                Func::Sinh => Expr::mul([Expr::func(Func::Cosh, a), da]),
                Func::Cosh => Expr::mul([Expr::func(Func::Sinh, a), da]),
                Func::Exp => Expr::mul([Expr::func(Func::Exp, a), da]),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, parse, Bindings};

    fn d(text: &str, s: &str) -> Expr {
        diff_explicit(&parse(text).unwrap(), s)
    }

    /// Central difference of `e` along `s` at `b`.
    fn central(e: &Expr, s: &str, b: &Bindings, h: f64) -> C64 {
        let x = b.get(s).unwrap();
        let plus = eval(e, &b.with(s, x + h)).unwrap();
        let minus = eval(e, &b.with(s, x - h)).unwrap();
        (plus - minus) / (2.0 * h)
    }

    #[test]
    fn product_with_constant_factor() {
        assert_eq!(d("E*p1", "E").to_string(), "p1");
    }

    #[test]
    fn quotient_in_energy() {
        let e = d("p1/E", "E");
        assert_eq!(e.to_string(), "-p1/E^2");
    }

    #[test]
    fn unknown_symbol_gives_zero() {
        assert!(d("E*p1", "q").is_zero());
        assert!(d("3", "x").is_zero());
    }

    #[test]
    fn sqrt_derivative_matches_finite_difference() {
        let e = parse("sqrt(m^2+p1^2)").unwrap();
        let b = Bindings::from_reals([("m", 3.0), ("p1", 4.0)]);
        let exact = eval(&diff_explicit(&e, "p1"), &b).unwrap();
        assert!((exact - C64::new(0.8, 0.0)).norm() < 1e-14);
        let fd = central(&e, "p1", &b, 1e-6);
        assert!((exact - fd).norm() < 1e-8);
    }

    #[test]
    fn function_rules() {
        let b = Bindings::from_reals([("x", 0.7)]);
        for text in ["sinh(2*x)", "cosh(x^2)", "exp(-x)/x", "x^(3/2)", "x^-3", "sqrt(1+x^2)*exp(x)"] {
            let e = parse(text).unwrap();
            let exact = eval(&diff_explicit(&e, "x"), &b).unwrap();
            let fd = central(&e, "x", &b, 1e-5);
            assert!((exact - fd).norm() < 1e-8 * (1.0 + exact.norm()), "{text}");
        }
    }

    fn observed_order(e: &Expr, s: &str, b: &Bindings) -> f64 {
        let exact = eval(&diff_explicit(e, s), b).unwrap();
        let hs: [f64; 3] = [1e-3, 1e-4, 1e-5];
        let pts: Vec<(f64, f64)> =
            hs.iter().map(|&h| (h.log10(), (central(e, s, b, h) - exact).norm().log10())).collect();
        crate::numeric::lsq_slope(&pts)
    }

    #[test]
    fn finite_difference_order_is_two() {
        let b = Bindings::from_reals([("x", 1.1), ("y", 0.3)]);
        for text in ["exp(2*x)", "sinh(3*x)*y", "cosh(x)*exp(x)", "x^5/(1+y^2)"] {
            let order = observed_order(&parse(text).unwrap(), "x", &b);
            assert!(order >= 1.9, "{text}: order {order}");
        }
    }
}
