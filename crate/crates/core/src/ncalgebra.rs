//! Noncommutative coordinate algebras: canonical `[x_mu, x_nu] = i theta_{mu nu}`
//! and Lie type `[x_mu, x_nu] = i C^beta_{mu nu} x_beta`, including
//! kappa-Minkowski.
//!
//! Structure data is stored real; the factor `i` enters when a bracket is
//! evaluated. Brackets of both families close on scalars plus linear terms
//! in the generators, which is all [`AlgebraElement`] represents.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("kappa must be non-zero")]
    ZeroKappa,
    #[error("invalid algebra: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraKind {
    /// Antisymmetric `theta[mu][nu]`.
    Canonical { theta: Vec<Vec<f64>> },
    /// `c[beta][mu][nu] = C^beta_{mu nu}`, antisymmetric in `mu, nu`.
    Lie { c: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordAlgebra {
    generators: Vec<String>,
    kind: AlgebraKind,
}

/// Scalar plus linear combination of generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub scalar: C64,
    pub coeffs: Vec<C64>,
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        Self { scalar: C64::new(0.0, 0.0), coeffs: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn generator(n: usize, k: usize) -> Self {
        let mut e = Self::zero(n);
        e.coeffs[k] = C64::new(1.0, 0.0);
        e
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { scalar: self.scalar * s, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            scalar: self.scalar + other.scalar,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    /// Euclidean norm over the scalar and all coefficients.
    pub fn norm(&self) -> f64 {
        (self.scalar.norm_sqr() + self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.norm() == 0.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum AlgebraFile {
    Canonical {
        generators: Vec<String>,
        theta: Vec<Vec<f64>>,
    },
    Lie {
        generators: Vec<String>,
        #[serde(rename = "C")]
        c: Vec<ConstantEntry>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConstantEntry {
    out: String,
    pair: [String; 2],
    val: f64,
}

impl CoordAlgebra {
    pub fn canonical(generators: &[&str], theta: Vec<Vec<f64>>) -> Result<Self, AlgebraError> {
        let n = generators.len();
        if theta.len() != n || theta.iter().any(|r| r.len() != n) {
            return Err(AlgebraError::Invalid(format!("theta must be {n}x{n}")));
        }
        for mu in 0..n {
            for nu in 0..n {
                if theta[mu][nu] != -theta[nu][mu] {
                    return Err(AlgebraError::Invalid(format!("theta is not antisymmetric at ({mu}, {nu})")));
                }
            }
        }
        Ok(Self { generators: names(generators), kind: AlgebraKind::Canonical { theta } })
    }

    /// Lie-type algebra from constants `C^out_{a b} = val`; the antisymmetric
    /// partner `C^out_{b a} = -val` is filled in.
    pub fn lie(generators: &[&str], constants: &[(&str, (&str, &str), f64)]) -> Result<Self, AlgebraError> {
        let n = generators.len();
        let gens = names(generators);
        let index =
            |g: &str| gens.iter().position(|x| x == g).ok_or_else(|| AlgebraError::UnknownGenerator(g.to_string()));
        let mut c = vec![vec![vec![0.0; n]; n]; n];
        let mut set = vec![vec![vec![false; n]; n]; n];
        for &(out, (a, b), val) in constants {
            let (o, a, b) = (index(out)?, index(a)?, index(b)?);
            if a == b && val != 0.0 {
                return Err(AlgebraError::Invalid(format!("C^{out}_({0},{0}) must vanish", gens[a])));
            }
            for (x, y, v) in [(a, b, val), (b, a, -val)] {
                if set[o][x][y] && c[o][x][y] != v {
                    return Err(AlgebraError::Invalid(format!(
                        "inconsistent constants for C^{out}_({}, {})",
                        gens[x], gens[y]
                    )));
                }
                c[o][x][y] = v;
                set[o][x][y] = true;
            }
        }
        Ok(Self { generators: gens, kind: AlgebraKind::Lie { c } })
    }

    /// `[x_m, t] = (i/kappa) x_m`, `[x_m, x_l] = 0` on generators `t, x1, x2, x3`.
    pub fn kappa_minkowski(kappa: f64) -> Result<Self, AlgebraError> {
        if kappa == 0.0 || !kappa.is_finite() {
            return Err(AlgebraError::ZeroKappa);
        }
        let constants: Vec<(&str, (&str, &str), f64)> =
            ["x1", "x2", "x3"].iter().map(|&x| (x, (x, "t"), 1.0 / kappa)).collect();
        Self::lie(&["t", "x1", "x2", "x3"], &constants)
    }

    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        let file: AlgebraFile = serde_json::from_str(text).map_err(|e| AlgebraError::Invalid(e.to_string()))?;
        match file {
            AlgebraFile::Canonical { generators, theta } => {
                let g: Vec<&str> = generators.iter().map(String::as_str).collect();
                Self::canonical(&g, theta)
            }
            AlgebraFile::Lie { generators, c } => {
                let g: Vec<&str> = generators.iter().map(String::as_str).collect();
                let constants: Vec<(&str, (&str, &str), f64)> =
                    c.iter().map(|e| (e.out.as_str(), (e.pair[0].as_str(), e.pair[1].as_str()), e.val)).collect();
                Self::lie(&g, &constants)
            }
        }
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn index(&self, g: &str) -> Result<usize, AlgebraError> {
        self.generators.iter().position(|x| x == g).ok_or_else(|| AlgebraError::UnknownGenerator(g.to_string()))
    }

    fn bracket_generators(&self, mu: usize, nu: usize) -> AlgebraElement {
        let n = self.dim();
        let i = C64::new(0.0, 1.0);
        let mut out = AlgebraElement::zero(n);
        match &self.kind {
            AlgebraKind::Canonical { theta } => out.scalar = i * theta[mu][nu],
            AlgebraKind::Lie { c } => {
                for beta in 0..n {
                    out.coeffs[beta] = i * c[beta][mu][nu];
                }
            }
        }
        out
    }

    /// `[x_mu, x_nu]` by generator name.
    pub fn commutator(&self, mu: &str, nu: &str) -> Result<AlgebraElement, AlgebraError> {
        Ok(self.bracket_generators(self.index(mu)?, self.index(nu)?))
    }

    /// Bilinear extension of the bracket; scalars are central.
    pub fn bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        let n = self.dim();
        let mut out = AlgebraElement::zero(n);
        for mu in 0..n {
            if a.coeffs[mu] == C64::new(0.0, 0.0) {
                continue;
            }
            for nu in 0..n {
                let w = a.coeffs[mu] * b.coeffs[nu];
                if w != C64::new(0.0, 0.0) {
                    out = out.add(&self.bracket_generators(mu, nu).scale(w));
                }
            }
        }
        out
    }

    /// Largest norm of `[[a, b], c] + [[b, c], a] + [[c, a], b]` over all
    /// generator triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let g = |k: usize| AlgebraElement::generator(n, k);
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let t1 = self.bracket(&self.bracket(&g(a), &g(b)), &g(c));
                    let t2 = self.bracket(&self.bracket(&g(b), &g(c)), &g(a));
                    let t3 = self.bracket(&self.bracket(&g(c), &g(a)), &g(b));
                    worst = worst.max(t1.add(&t2).add(&t3).norm());
                }
            }
        }
        worst
    }

    /// Render an element such as `(i/kappa) x1` as text, e.g. `0.25i*x1`.
    pub fn format_element(&self, e: &AlgebraElement) -> String {
        let mut terms: Vec<(C64, Option<&str>)> = Vec::new();
        if e.scalar != C64::new(0.0, 0.0) {
            terms.push((e.scalar, None));
        }
        for (g, c) in self.generators.iter().zip(&e.coeffs) {
            if *c != C64::new(0.0, 0.0) {
                terms.push((*c, Some(g.as_str())));
            }
        }
        let mut out = String::new();
        for (k, (c, g)) in terms.into_iter().enumerate() {
            let (negative, mag) = match (c.re, c.im) {
                (re, 0.0) if re < 0.0 => (true, -c),
                (0.0, im) if im < 0.0 => (true, -c),
                _ => (false, c),
            };
            out.push_str(match (k, negative) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            });
            let coef = match (mag.re, mag.im) {
                (1.0, 0.0) if g.is_some() => String::new(),
                (0.0, 1.0) => "i".to_string(),
                (re, 0.0) => format!("{re}"),
                (0.0, im) => format!("{im}i"),
                (re, im) => format!("({re}{im:+}i)"),
            };
            match g {
                Some(g) if coef.is_empty() => out.push_str(g),
                Some(g) => out.push_str(&format!("{coef}*{g}")),
                None => out.push_str(&coef),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

fn names(g: &[&str]) -> Vec<String> {
    g.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(x: f64) -> C64 {
        C64::new(0.0, x)
    }

    #[test]
    fn kappa_brackets() {
        let kappa = 4.0;
        let a = CoordAlgebra::kappa_minkowski(kappa).unwrap();
        let x1t = a.commutator("x1", "t").unwrap();
        assert_eq!(x1t.coeffs, vec![C64::new(0.0, 0.0), i(1.0 / kappa), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(x1t.scalar, C64::new(0.0, 0.0));
        assert!(a.commutator("x1", "x2").unwrap().is_zero());
        let tx1 = a.commutator("t", "x1").unwrap();
        assert_eq!(tx1.coeffs[1], i(-1.0 / kappa));
        assert_eq!(a.format_element(&x1t), "0.25i*x1");
        let mixed = AlgebraElement {
            scalar: C64::new(0.0, -1.0),
            coeffs: vec![C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, 0.5)],
        };
        assert_eq!(a.format_element(&mixed), "-i + t - 2*x1 + i*x2 + (0.5+0.5i)*x3");
    }

    #[test]
    fn commutative_limit() {
        let mut last = f64::INFINITY;
        for kappa in [1.0, 1e3, 1e6, 1e12] {
            let n = CoordAlgebra::kappa_minkowski(kappa).unwrap().commutator("x2", "t").unwrap().norm();
            assert!(n < last);
            last = n;
        }
        assert!(last <= 1e-12);
    }

    #[test]
    fn zero_kappa_rejected() {
        assert_eq!(CoordAlgebra::kappa_minkowski(0.0), Err(AlgebraError::ZeroKappa));
    }

    #[test]
    fn canonical_read_off() {
        let mut theta = vec![vec![0.0; 4]; 4];
        theta[0][1] = 1.0;
        theta[1][0] = -1.0;
        let a = CoordAlgebra::canonical(&["x0", "x1", "x2", "x3"], theta).unwrap();
        let c = a.commutator("x0", "x1").unwrap();
        assert_eq!(c.scalar, i(1.0));
        assert!(c.coeffs.iter().all(|z| *z == C64::new(0.0, 0.0)));
        for g in a.generators() {
            assert!(a.commutator(g, g).unwrap().is_zero());
        }
        assert_eq!(a.jacobi_residual(), 0.0);
        assert!(matches!(a.commutator("x0", "y"), Err(AlgebraError::UnknownGenerator(_))));
    }

    #[test]
    fn non_antisymmetric_theta_rejected() {
        let theta = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(matches!(CoordAlgebra::canonical(&["a", "b"], theta), Err(AlgebraError::Invalid(_))));
    }

    #[test]
    fn jacobi_for_kappa_minkowski() {
        for kappa in [0.1, 1.0, 10.0] {
            assert!(CoordAlgebra::kappa_minkowski(kappa).unwrap().jacobi_residual() <= 1e-12);
        }
    }

    #[test]
    fn corrupted_constants_break_jacobi() {
        let kappa = 1.0;
        let a = CoordAlgebra::lie(
            &["t", "x1", "x2", "x3"],
            &[("x1", ("x1", "t"), 1.0 / kappa), ("x2", ("x2", "t"), 2.0 / kappa), ("t", ("x1", "x2"), 1.0)],
        )
        .unwrap();
        // [[x2,t],x1] + [[t,x1],x2] = (2/kappa) t + (1/kappa) t, [[x1,x2],t] = 0
        let r = a.jacobi_residual();
        assert!((r - 3.0 / kappa).abs() <= 1e-12, "{r}");
    }

    #[test]
    fn inconsistent_constants_rejected() {
        let r = CoordAlgebra::lie(&["a", "b"], &[("a", ("a", "b"), 1.0), ("a", ("b", "a"), 1.0)]);
        assert!(matches!(r, Err(AlgebraError::Invalid(_))));
        let r = CoordAlgebra::lie(&["a", "b"], &[("a", ("a", "b"), 1.0), ("a", ("b", "a"), -1.0)]);
        assert!(r.is_ok());
    }

    #[test]
    fn json_files() {
        let lie = r#"{"kind":"lie","generators":["t","x1","x2","x3"],"C":[{"out":"x1","pair":["x1","t"],"val":1.0}]}"#;
        let a = CoordAlgebra::from_json(lie).unwrap();
        assert_eq!(a.commutator("x1", "t").unwrap().coeffs[1], i(1.0));
        assert_eq!(a.commutator("t", "x1").unwrap().coeffs[1], i(-1.0));
        let can = r#"{"kind":"canonical","generators":["a","b"],"theta":[[0,2],[-2,0]]}"#;
        let a = CoordAlgebra::from_json(can).unwrap();
        assert_eq!(a.commutator("b", "a").unwrap().scalar, i(-2.0));
        assert!(CoordAlgebra::from_json(r#"{"kind":"weird"}"#).is_err());
    }
}
