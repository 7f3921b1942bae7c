//! Value-preserving normalization for display.
//!
//! Sums and products are flattened, constants folded, like terms collected
//! and powers of equal bases merged. Merging `sqrt(x)^a * sqrt(x)^b` into
//! `sqrt(x)^(a+b)` is exact for the half-integer exponents used here; the
//! only change in domain is that `x^a * x^-a` cancels to `1`.

use std::collections::BTreeMap;

use super::{Exponent, Expr, C64};

impl Expr {
    pub fn simplify(&self) -> Expr {
        simplify(self)
    }
}

fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Sym(_) => e.clone(),
        Expr::Neg(x) => product(vec![Expr::Const(C64::new(-1.0, 0.0)), simplify(x)]),
        Expr::Add(ts) => sum(ts.iter().map(simplify).collect()),
        Expr::Mul(fs) => product(fs.iter().map(simplify).collect()),
        Expr::Div(n, d) => product(vec![simplify(n), power(simplify(d), Exponent::int(-1))]),
        Expr::Pow(b, k) => power(simplify(b), *k),
        Expr::Func(f, a) => Expr::func(*f, simplify(a)),
    }
}

fn power(base: Expr, k: Exponent) -> Expr {
    match (base, k.as_integer()) {
        (Expr::Pow(b, inner), Some(n)) => power(*b, Exponent::from_halves(inner.halves() * n)),
        (Expr::Mul(fs), Some(n)) => product(fs.into_iter().map(|f| power(f, Exponent::int(n))).collect()),
        (base, _) => Expr::pow(base, k),
    }
}

/// Split a factor into base and exponent (in halves).
fn base_exp(f: Expr) -> (Expr, i32) {
    match f {
        Expr::Pow(b, k) => (*b, k.halves()),
        other => (other, 2),
    }
}

fn product(factors: Vec<Expr>) -> Expr {
    let mut coef = C64::new(1.0, 0.0);
    let mut order: Vec<String> = Vec::new();
    let mut bases: BTreeMap<String, (Expr, i32)> = BTreeMap::new();
    let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
    while let Some(f) = stack.pop() {
        match f {
            Expr::Mul(fs) => stack.extend(fs.into_iter().rev()),
            Expr::Neg(x) => {
                coef = -coef;
                stack.push(*x);
            }
            Expr::Const(z) => coef *= z,
            other => {
                let (b, h) = base_exp(other);
                let key = b.to_string();
                match bases.get_mut(&key) {
                    Some((_, acc)) => *acc += h,
                    None => {
                        order.push(key.clone());
                        bases.insert(key, (b, h));
                    }
                }
            }
        }
    }
    if coef == C64::new(0.0, 0.0) {
        return Expr::zero();
    }
    order.sort();
    let mut out = Vec::new();
    for key in order {
        let (b, h) = bases.remove(&key).expect("base recorded");
        match h {
            0 => {}
            2 => out.push(b),
            h => out.push(Expr::pow(b, Exponent::from_halves(h))),
        }
    }
    let body = match out.len() {
        0 => return Expr::Const(coef),
        1 => out.pop().unwrap(),
        _ => Expr::Mul(out),
    };
    if coef == C64::new(1.0, 0.0) {
        body
    } else if coef == C64::new(-1.0, 0.0) {
        Expr::Neg(Box::new(body))
    } else {
        let mut fs = vec![Expr::Const(coef)];
        match body {
            Expr::Mul(rest) => fs.extend(rest),
            other => fs.push(other),
        }
        Expr::Mul(fs)
    }
}

/// Coefficient and the remaining product of a normalized term.
fn split_term(t: Expr) -> (C64, Expr) {
    match t {
        Expr::Const(z) => (z, Expr::one()),
        Expr::Neg(x) => {
            let (c, rest) = split_term(*x);
            (-c, rest)
        }
        Expr::Mul(mut fs) if matches!(fs.first(), Some(Expr::Const(_))) => {
            let Expr::Const(c) = fs.remove(0) else { unreachable!() };
            let rest = if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Mul(fs) };
            (c, rest)
        }
        other => (C64::new(1.0, 0.0), other),
    }
}

fn sum(terms: Vec<Expr>) -> Expr {
    let mut constant = C64::new(0.0, 0.0);
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, (C64, Expr)> = BTreeMap::new();
    let mut stack: Vec<Expr> = terms.into_iter().rev().collect();
    while let Some(t) = stack.pop() {
        match t {
            Expr::Add(ts) => stack.extend(ts.into_iter().rev()),
            Expr::Const(z) => constant += z,
            other => {
                let (c, rest) = split_term(other);
                if let Expr::Add(inner) = rest {
                    stack.extend(inner.into_iter().rev().map(|t| product(vec![Expr::Const(c), t])));
                    continue;
                }
                if rest.is_one() {
                    constant += c;
                    continue;
                }
                let key = rest.to_string();
                match groups.get_mut(&key) {
                    Some((acc, _)) => *acc += c,
                    None => {
                        order.push(key.clone());
                        groups.insert(key, (c, rest));
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for key in order {
        let (c, rest) = groups.remove(&key).expect("term recorded");
        if c != C64::new(0.0, 0.0) {
            out.push(product(vec![Expr::Const(c), rest]));
        }
    }
    if constant != C64::new(0.0, 0.0) {
        out.push(Expr::Const(constant));
    }
    // Lead with a positive term when there is one.
    if let Some(pos) = out.iter().position(|t| !matches!(t, Expr::Neg(_))) {
        let t = out.remove(pos);
        out.insert(0, t);
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn s(text: &str) -> String {
        parse(text).unwrap().simplify().to_string()
    }

    #[test]
    fn collects_and_cancels() {
        assert_eq!(s("-(p1*-p1/E^2 + 1) + 1"), "p1^2/E^2");
        assert_eq!(s("E + p1*p1/E"), "E + p1^2/E");
        assert_eq!(s("x - x"), "0");
        assert_eq!(s("2*x + 3*x"), "5*x");
        assert_eq!(s("x*y - y*x"), "0");
        assert_eq!(s("-(a) + b"), "b - a");
    }

    #[test]
    fn merges_powers() {
        assert_eq!(s("E^-3*E*p1"), "p1/E^2");
        assert_eq!(s("sqrt(x)*sqrt(x)"), "sqrt(x)^2");
        assert_eq!(s("x^(1/2)*x^(1/2)"), "x");
        assert_eq!(s("(x^2)^3"), "x^6");
        assert_eq!(s("(x*y)^2"), "x^2*y^2");
        assert_eq!(s("x/x"), "1");
    }

    #[test]
    fn keeps_non_integer_nesting() {
        assert_eq!(s("(x^2)^(1/2)"), "(x^2)^(1/2)");
    }
}
