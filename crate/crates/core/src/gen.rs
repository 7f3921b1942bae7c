//! Seeded random smooth expressions for the randomized oracles.
//!
//! Generated expressions stay finite and smooth wherever every symbol is
//! bounded away from infinity and the denominators used here (`1 + s^2` and
//! symbols listed as `nonzero`) stay away from zero.

use rand::Rng;

use crate::expr::{Expr, Func};

#[derive(Debug, Clone)]
pub struct ExprGen {
    symbols: Vec<String>,
    nonzero: Vec<String>,
    depth: u32,
}

impl ExprGen {
    pub fn new(symbols: &[&str]) -> Self {
        Self { symbols: symbols.iter().map(|s| s.to_string()).collect(), nonzero: Vec::new(), depth: 3 }
    }

    /// Symbols that may appear as bare denominators.
    pub fn nonzero(mut self, symbols: &[&str]) -> Self {
        self.nonzero = symbols.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn depth(mut self, depth: u32) -> Self {
        self.depth = depth;
        self
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        self.node(rng, self.depth)
    }

    fn symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        Expr::sym(self.symbols[rng.random_range(0..self.symbols.len())].clone())
    }

    fn coefficient<R: Rng + ?Sized>(&self, rng: &mut R, bound: f64) -> Expr {
        // two decimals keep printed forms short
        let c = (rng.random_range(-bound..bound) * 100.0).round() / 100.0;
        Expr::num(if c == 0.0 { 0.5 } else { c })
    }

    fn leaf<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        if rng.random_bool(0.8) {
            self.symbol(rng)
        } else {
            self.coefficient(rng, 2.0)
        }
    }

    fn node<R: Rng + ?Sized>(&self, rng: &mut R, depth: u32) -> Expr {
        if depth == 0 {
            return self.leaf(rng);
        }
        let d = depth - 1;
        match rng.random_range(0..9) {
            0 | 1 => Expr::Add(vec![self.node(rng, d), self.node(rng, d)]),
            2 | 3 => Expr::Mul(vec![self.node(rng, d), self.node(rng, d)]),
            4 => Expr::Pow(Box::new(self.node(rng, d)), crate::expr::Exponent::int(rng.random_range(2..=3))),
            5 => {
                let f = [Func::Exp, Func::Sinh, Func::Cosh][rng.random_range(0..3)];
                let arg = Expr::Mul(vec![self.coefficient(rng, 0.8), self.symbol(rng)]);
                Expr::Mul(vec![Expr::Func(f, Box::new(arg)), self.node(rng, d)])
            }
            6 => {
                let s = self.symbol(rng);
                let radicand = Expr::Add(vec![Expr::one(), Expr::Pow(Box::new(s), crate::expr::Exponent::int(2))]);
                Expr::Mul(vec![Expr::Func(Func::Sqrt, Box::new(radicand)), self.node(rng, d)])
            }
            7 => {
                let s = self.symbol(rng);
                let den = Expr::Add(vec![Expr::one(), Expr::Pow(Box::new(s), crate::expr::Exponent::int(2))]);
                Expr::Div(Box::new(self.node(rng, d)), Box::new(den))
            }
            _ => {
                if self.nonzero.is_empty() {
                    Expr::Neg(Box::new(self.node(rng, d)))
                } else {
                    let s = &self.nonzero[rng.random_range(0..self.nonzero.len())];
                    Expr::Div(Box::new(self.node(rng, d)), Box::new(Expr::sym(s.clone())))
                }
            }
        }
    }
}
