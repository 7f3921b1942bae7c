use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{eval, Expr, ExprError, C64};

/// Symbol values for evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Bindings(BTreeMap<String, C64>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_reals<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.to_string(), C64::new(v, 0.0))).collect())
    }

    pub fn get(&self, name: &str) -> Option<C64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: impl Into<String>, value: C64) {
        self.0.insert(name.into(), value);
    }

    pub fn set_real(&mut self, name: impl Into<String>, value: f64) {
        self.set(name, C64::new(value, 0.0));
    }

    /// Copy with one symbol rebound.
    pub fn with(&self, name: &str, value: C64) -> Self {
        let mut out = self.clone();
        out.set(name, value);
        out
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, C64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Source of evaluation points for randomized identity checks.
pub trait Sampler {
    fn sample(&mut self) -> Bindings;
}

/// Independent uniform draws per symbol, each in `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    ranges: Vec<(String, f64, f64)>,
    rng: ChaCha8Rng,
}

impl UniformSampler {
    pub fn new(seed: u64) -> Self {
        Self { ranges: Vec::new(), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn range(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.ranges.push((name.to_string(), lo, hi));
        self
    }
}

impl Sampler for UniformSampler {
    fn sample(&mut self) -> Bindings {
        let mut b = Bindings::new();
        for (name, lo, hi) in &self.ranges {
            b.set_real(name.clone(), self.rng.random_range(*lo..=*hi));
        }
        b
    }
}

/// Mixed relative error `|a-b| / (1 + max(|a|, |b|))`.
pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

/// Largest [`rel_err`] between `a` and `b` over `trials` usable sample points.
///
/// Points where either side fails to evaluate are skipped; at most
/// `10 * trials` draws are made. Errors only if no point was usable.
pub fn max_rel_residual(
    a: &Expr,
    b: &Expr,
    sampler: &mut dyn Sampler,
    trials: usize,
) -> Result<(f64, usize), ExprError> {
    let mut worst = 0.0f64;
    let mut used = 0;
    for _ in 0..trials.max(1) * 10 {
        if used == trials.max(1) {
            break;
        }
        let point = sampler.sample();
        let (Ok(x), Ok(y)) = (eval(a, &point), eval(b, &point)) else { continue };
        worst = worst.max(rel_err(x, y));
        used += 1;
    }
    if used == 0 {
        return Err(ExprError::SamplerExhausted);
    }
    Ok((worst, used))
}

/// Decide `a == b` as functions by randomized evaluation.
pub fn equal_numeric(
    a: &Expr,
    b: &Expr,
    sampler: &mut dyn Sampler,
    tol: f64,
    trials: usize,
) -> Result<bool, ExprError> {
    let (worst, _) = max_rel_residual(a, b, sampler, trials)?;
    Ok(worst <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn sampler() -> UniformSampler {
        UniformSampler::new(7).range("E", 0.5, 3.0).range("p1", -2.0, 2.0)
    }

    #[test]
    fn difference_of_squares() {
        let a = parse("E^2-p1^2").unwrap();
        let b = parse("(E-p1)*(E+p1)").unwrap();
        assert!(equal_numeric(&a, &b, &mut sampler(), 1e-12, 50).unwrap());
    }

    #[test]
    fn offset_detected() {
        let a = parse("p1/E").unwrap();
        let b = parse("p1/E + 1").unwrap();
        assert!(!equal_numeric(&a, &b, &mut sampler(), 1e-9, 10).unwrap());
    }

    #[test]
    fn exhaustion_when_every_point_is_singular() {
        let a = parse("1/(E-E)").unwrap();
        let b = parse("1").unwrap();
        assert_eq!(equal_numeric(&a, &b, &mut sampler(), 1e-9, 5), Err(ExprError::SamplerExhausted));
    }

    #[test]
    fn sampler_is_seeded() {
        let a: Vec<Bindings> = (0..3)
            .map({
                let mut s = sampler();
                move |_| s.sample()
            })
            .collect();
        let b: Vec<Bindings> = (0..3)
            .map({
                let mut s = sampler();
                move |_| s.sample()
            })
            .collect();
        assert_eq!(a, b);
    }
}
