//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ['^' power]
//! power  := signed-int | '(' signed-int ['/' '2'] ')'
//! atom   := number | 'i' | ident | func '(' expr ')' | '(' expr ')'
//! ```

use super::{Exponent, Expr, ExprError, Func, ALIASES, C64};

pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Expr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Add(terms) })
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                acc = match acc {
                    Expr::Mul(mut fs) => {
                        fs.push(rhs);
                        Expr::Mul(fs)
                    }
                    other => Expr::Mul(vec![other, rhs]),
                };
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                acc = Expr::Div(Box::new(acc), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.power()?;
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn power(&mut self) -> Result<Exponent, ExprError> {
        if self.eat(b'(') {
            let n = self.signed_int()?;
            let exp = if self.eat(b'/') {
                if self.peek() != Some(b'2') {
                    return Err(self.error("only halves are supported as fractional exponents"));
                }
                self.pos += 1;
                if n % 2 == 0 {
                    return Err(self.error("fractional exponent must have an odd numerator"));
                }
                Exponent::from_halves(n)
            } else {
                Exponent::int(n)
            };
            self.expect(b')')?;
            Ok(exp)
        } else {
            Ok(Exponent::int(self.signed_int()?))
        }
    }

    fn signed_int(&mut self) -> Result<i32, ExprError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.error("expected an integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<i32>().map_err(|_| {
            self.pos = start;
            self.error("exponent out of range")
        })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.src.get(p.pos).is_some_and(u8::is_ascii_digit) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // not an exponent after all
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| {
            self.pos = start;
            self.error("malformed number")
        })?;
        if !value.is_finite() {
            self.pos = start;
            return Err(self.error("number out of range"));
        }
        Ok(Expr::Const(C64::new(value, 0.0)))
    }

    fn ident(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let call = self.peek() == Some(b'(');
        if let Some(f) = Func::from_name(name) {
            if !call {
                return Err(self.error(format!("expected `(` after `{name}`")));
            }
            self.pos += 1;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::Func(f, Box::new(arg)));
        }
        if call {
            return Err(ExprError::UnknownFunction { offset: start, name: name.to_string() });
        }
        if name == "i" {
            return Ok(Expr::imag_unit());
        }
        let canonical = ALIASES.iter().find(|(alias, _)| *alias == name).map_or(name, |(_, target)| *target);
        Ok(Expr::Sym(canonical.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, Bindings};

    #[test]
    fn literal_zero() {
        assert_eq!(parse("0").unwrap(), Expr::zero());
    }

    #[test]
    fn product_of_symbols() {
        let e = parse("E*p1").unwrap();
        assert_eq!(e, Expr::Mul(vec![Expr::sym("E"), Expr::sym("p1")]));
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn transverse_component_structure() {
        let e = parse("(p1*p3 - i*p2*p)/sqrt(p1^2+p2^2)").unwrap();
        let Expr::Div(num, den) = &e else { panic!("expected a quotient, got {e:?}") };
        assert!(matches!(**den, Expr::Func(Func::Sqrt, _)));
        let Expr::Add(terms) = &**num else { panic!("expected a sum") };
        assert_eq!(terms.len(), 2);
        assert!(matches!(&terms[1], Expr::Neg(_)));
        let b = Bindings::from_reals([("p1", 1.0), ("p2", 2.0), ("p3", 3.0), ("p", 14f64.sqrt())]);
        let v = eval(&e, &b).unwrap();
        let expect = C64::new(3.0, -2.0 * 14f64.sqrt()) / 5f64.sqrt();
        assert!((v - expect).norm() < 1e-12);
    }

    #[test]
    fn aliases_map_to_numbered_components() {
        assert_eq!(parse("px+py+pz").unwrap(), parse("p1+p2+p3").unwrap());
    }

    #[test]
    fn numbers_with_exponents() {
        assert_eq!(parse("1.6e-35").unwrap(), Expr::num(1.6e-35));
        assert_eq!(parse("2E3").unwrap(), Expr::num(2000.0));
        assert_eq!(parse(".5").unwrap(), Expr::num(0.5));
    }

    #[test]
    fn precedence() {
        let b = Bindings::from_reals([("a", 2.0), ("b", 3.0), ("c", 5.0)]);
        let v = |t: &str| eval(&parse(t).unwrap(), &b).unwrap().re;
        assert_eq!(v("a+b*c"), 17.0);
        assert_eq!(v("a-b-c"), -6.0);
        assert_eq!(v("a/b/c"), 2.0 / 15.0);
        assert_eq!(v("-a^2"), -4.0);
        assert_eq!(v("a^-1"), 0.5);
        assert_eq!(v("c^(1/2)"), 5f64.sqrt());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("E*(p1+") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        match parse("E p1") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x^(2/3)"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("1e999"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse(""), Err(ExprError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn unknown_function() {
        assert_eq!(parse("1 + sin(x)"), Err(ExprError::UnknownFunction { offset: 4, name: "sin".into() }));
    }
}
