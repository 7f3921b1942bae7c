//! Dispersion-relation residuals and the eight-component spinor operators.
//!
//! Units are `c = hbar = 1`. Residuals are signed: zero means on the shell.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Matrix4, SMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::C64;

/// Planck length in metres, the default deformation scale.
pub const PLANCK_LENGTH: f64 = 1.6e-35;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShellError {
    #[error("unknown deformation `{0}`")]
    UnknownDeformation(String),
    #[error("unknown shell `{0}`")]
    UnknownShell(String),
    #[error("invalid shell parameters: {0}")]
    Invalid(String),
    #[error("shell `{name}` expects {expected}")]
    WrongPoint { name: String, expected: &'static str },
}

pub type Mat4 = Matrix4<C64>;

/// `branch * sqrt(m^2 + |p|^2)`.
pub fn shell_energy(p: [f64; 3], m: f64, branch: i32) -> f64 {
    let e = (m * m + p_squared(p)).sqrt();
    if branch < 0 {
        -e
    } else {
        e
    }
}

fn p_squared(p: [f64; 3]) -> f64 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
}

/// `E^2 - |p|^2 - m^2`.
pub fn standard_residual(e: f64, p: [f64; 3], m: f64) -> f64 {
    e * e - p_squared(p) - m * m
}

/// `p0^2 - p1^2 - p2^2 - p3^2 - M^2 p4^2 + M^2`.
pub fn desitter_residual(p: [f64; 5], big_m: f64) -> f64 {
    let m2 = big_m * big_m;
    p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3] - m2 * p[4] * p[4] + m2
}

/// The same residual parametrized by the fundamental length `ell = 1/M`.
pub fn desitter_residual_ell(p: [f64; 5], ell: f64) -> f64 {
    desitter_residual(p, 1.0 / ell)
}

/// A deformation term `f(E, |p|^2, m, L_p, alpha)`.
pub type DeformationFn = Arc<dyn Fn(f64, f64, f64, f64, f64) -> f64 + Send + Sync>;

/// Named deformation functions. Seeded with `none`, `linear-E`
/// (`alpha L_p E |p|^2`) and `quadratic-E` (`alpha L_p^2 E^2 |p|^2`).
#[derive(Clone)]
pub struct DeformationRegistry {
    entries: BTreeMap<String, DeformationFn>,
}

impl std::fmt::Debug for DeformationRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl Default for DeformationRegistry {
    fn default() -> Self {
        let mut r = Self { entries: BTreeMap::new() };
        r.register("none", Arc::new(|_, _, _, _, _| 0.0));
        r.register("linear-E", Arc::new(|e, p2, _, lp, alpha| alpha * lp * e * p2));
        r.register("quadratic-E", Arc::new(|e, p2, _, lp, alpha| alpha * lp * lp * e * e * p2));
        r
    }
}

impl DeformationRegistry {
    pub fn register(&mut self, name: &str, f: DeformationFn) {
        self.entries.insert(name.to_string(), f);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// The deformation term alone.
    pub fn term(&self, choice: &str, e: f64, p: [f64; 3], m: f64, lp: f64, alpha: f64) -> Result<f64, ShellError> {
        let f = self.entries.get(choice).ok_or_else(|| ShellError::UnknownDeformation(choice.to_string()))?;
        Ok(f(e, p_squared(p), m, lp, alpha))
    }

    /// `E^2 - |p|^2 - m^2 + f`. With `choice = "none"` this is exactly the
    /// standard residual.
    pub fn residual(&self, choice: &str, e: f64, p: [f64; 3], m: f64, lp: f64, alpha: f64) -> Result<f64, ShellError> {
        let f = self.term(choice, e, p, m, lp, alpha)?;
        let standard = standard_residual(e, p, m);
        if choice == "none" {
            return Ok(standard);
        }
        Ok(standard + f)
    }
}

/// Residual with the default registry.
pub fn deformed_residual(choice: &str, e: f64, p: [f64; 3], m: f64, lp: f64, alpha: f64) -> Result<f64, ShellError> {
    DeformationRegistry::default().residual(choice, e, p, m, lp, alpha)
}

/// A named dispersion relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShellDef {
    Standard {
        m: f64,
        #[serde(default = "default_branch")]
        branch: i32,
    },
    Desitter {
        #[serde(rename = "M")]
        big_m: f64,
    },
    Deformed {
        m: f64,
        #[serde(default = "default_lp")]
        lp: f64,
        choice: String,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

fn default_branch() -> i32 {
    1
}

fn default_lp() -> f64 {
    PLANCK_LENGTH
}

fn default_alpha() -> f64 {
    1.0
}

/// Point at which a shell is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShellPoint {
    /// Energy and 3-momentum.
    EnergyMomentum { e: f64, p: [f64; 3] },
    /// Five-dimensional momentum `(p0, p1, p2, p3, p4)`.
    Five([f64; 5]),
}

impl ShellDef {
    /// de Sitter shell from the fundamental length `ell`.
    pub fn desitter_from_ell(ell: f64) -> Result<Self, ShellError> {
        let s = ShellDef::Desitter { big_m: 1.0 / ell };
        s.validate()?;
        Ok(s)
    }

    /// Fundamental length `1/M` of a de Sitter shell.
    pub fn ell(&self) -> Option<f64> {
        match self {
            ShellDef::Desitter { big_m } => Some(1.0 / big_m),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ShellError> {
        let bad = |msg: String| Err(ShellError::Invalid(msg));
        match self {
            ShellDef::Standard { m, branch } => {
                if !(*m >= 0.0) {
                    return bad(format!("mass must be non-negative, got {m}"));
                }
                if *branch != 1 && *branch != -1 {
                    return bad(format!("branch must be 1 or -1, got {branch}"));
                }
            }
            ShellDef::Desitter { big_m } => {
                if !(*big_m > 0.0) || !big_m.is_finite() {
                    return bad(format!("M must be positive, got {big_m}"));
                }
            }
            ShellDef::Deformed { m, lp, choice, .. } => {
                if !(*m >= 0.0) {
                    return bad(format!("mass must be non-negative, got {m}"));
                }
                if !(*lp > 0.0) {
                    return bad(format!("L_p must be positive, got {lp}"));
                }
                if !DeformationRegistry::default().names().any(|n| n == choice) {
                    return Err(ShellError::UnknownDeformation(choice.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn residual(&self, name: &str, point: ShellPoint) -> Result<f64, ShellError> {
        self.validate()?;
        match (self, point) {
            (ShellDef::Standard { m, .. }, ShellPoint::EnergyMomentum { e, p }) => Ok(standard_residual(e, p, *m)),
            (ShellDef::Desitter { big_m }, ShellPoint::Five(p)) => Ok(desitter_residual(p, *big_m)),
            (ShellDef::Deformed { m, lp, choice, alpha }, ShellPoint::EnergyMomentum { e, p }) => {
                deformed_residual(choice, e, p, *m, *lp, *alpha)
            }
            (ShellDef::Desitter { .. }, _) => {
                Err(ShellError::WrongPoint { name: name.to_string(), expected: "a 5-momentum p0..p4" })
            }
            _ => Err(ShellError::WrongPoint { name: name.to_string(), expected: "an energy E and 3-momentum p" }),
        }
    }
}

/// Named shell presets, as stored in a presets file:
/// `{"schema": 1, "shells": {"name": {"kind": "standard", "m": 1.0}, ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellPresets {
    pub schema: u32,
    pub shells: BTreeMap<String, ShellDef>,
}

impl Default for ShellPresets {
    fn default() -> Self {
        let mut shells = BTreeMap::new();
        shells.insert("standard".into(), ShellDef::Standard { m: 1.0, branch: 1 });
        shells.insert("desitter".into(), ShellDef::Desitter { big_m: 1.0 });
        shells.insert(
            "planck-linear".into(),
            ShellDef::Deformed { m: 0.0, lp: PLANCK_LENGTH, choice: "linear-E".into(), alpha: 1.0 },
        );
        shells.insert(
            "planck-quadratic".into(),
            ShellDef::Deformed { m: 0.0, lp: PLANCK_LENGTH, choice: "quadratic-E".into(), alpha: 1.0 },
        );
        Self { schema: 1, shells }
    }
}

impl ShellPresets {
    pub fn from_json(text: &str) -> Result<Self, ShellError> {
        let presets: ShellPresets = serde_json::from_str(text).map_err(|e| ShellError::Invalid(e.to_string()))?;
        if presets.schema != 1 {
            return Err(ShellError::Invalid(format!("unsupported schema {}", presets.schema)));
        }
        for spec in presets.shells.values() {
            spec.validate()?;
        }
        Ok(presets)
    }

    pub fn get(&self, name: &str) -> Result<&ShellDef, ShellError> {
        self.shells.get(name).ok_or_else(|| ShellError::UnknownShell(name.to_string()))
    }
}

/// `m = sinh(mu)`, `m4 = cosh(mu) = sqrt(1 + m^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformedMass {
    pub mu: f64,
    pub m: f64,
    pub m4: f64,
}

pub fn mass_relation(mu: f64) -> DeformedMass {
    DeformedMass { mu, m: mu.sinh(), m4: mu.cosh() }
}

/// Dirac-representation gamma matrices, metric `(+,-,-,-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub gamma: [Mat4; 4],
    pub gamma5: Mat4,
}

impl Default for GammaSet {
    fn default() -> Self {
        Self::dirac()
    }
}

impl GammaSet {
    pub fn dirac() -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        #[rustfmt::skip]
        let g0 = Mat4::new(
            l, o, o, o,
            o, l, o, o,
            o, o, -l, o,
            o, o, o, -l,
        );
        // gamma^k = [[0, sigma_k], [-sigma_k, 0]]
        #[rustfmt::skip]
        let g1 = Mat4::new(
            o, o, o, l,
            o, o, l, o,
            o, -l, o, o,
            -l, o, o, o,
        );
        #[rustfmt::skip]
        let g2 = Mat4::new(
            o, o, o, -i,
            o, o, i, o,
            o, i, o, o,
            -i, o, o, o,
        );
        #[rustfmt::skip]
        let g3 = Mat4::new(
            o, o, l, o,
            o, o, o, -l,
            -l, o, o, o,
            o, l, o, o,
        );
        #[rustfmt::skip]
        let g5 = Mat4::new(
            o, o, l, o,
            o, o, o, l,
            l, o, o, o,
            o, l, o, o,
        );
        Self { gamma: [g0, g1, g2, g3], gamma5: g5 }
    }

    /// `p_mu gamma^mu` for a contravariant `p`.
    pub fn slash(&self, p: [f64; 4]) -> Mat4 {
        let c = |x: f64| C64::new(x, 0.0);
        self.gamma[0] * c(p[0]) - self.gamma[1] * c(p[1]) - self.gamma[2] * c(p[2]) - self.gamma[3] * c(p[3])
    }
}

/// Which equation of the pair: `Psi` carries `-(p4 - 1) gamma^5`, `PsiR` carries `+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinorVariant {
    Psi,
    PsiR,
}

impl SpinorVariant {
    fn sign(self) -> f64 {
        match self {
            SpinorVariant::Psi => 1.0,
            SpinorVariant::PsiR => -1.0,
        }
    }
}

impl std::str::FromStr for SpinorVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psi" => Ok(SpinorVariant::Psi),
            "psiR" | "psir" => Ok(SpinorVariant::PsiR),
            other => Err(format!("unknown variant `{other}` (expected psi or psiR)")),
        }
    }
}

/// Reading of the mass term `2 sinh mu/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MassTerm {
    /// `2 sinh(mu / 2)`.
    #[default]
    HalfArgument,
    /// `2 sinh(mu) / 2 = sinh(mu)`.
    HalvedSinh,
}

impl MassTerm {
    pub fn value(self, mu: f64) -> f64 {
        match self {
            MassTerm::HalfArgument => 2.0 * (mu / 2.0).sinh(),
            MassTerm::HalvedSinh => mu.sinh(),
        }
    }
}

/// `a I - p_mu gamma^mu - s (p4 - 1) gamma^5`, `a` from the mass-term reading,
/// `s = +1` for `Psi` and `-1` for `PsiR`.
pub fn dirac_operator(g: &GammaSet, p: [f64; 4], p4: f64, mu: f64, variant: SpinorVariant, reading: MassTerm) -> Mat4 {
    let a = C64::new(reading.value(mu), 0.0);
    let b = C64::new(variant.sign() * (p4 - 1.0), 0.0);
    Mat4::identity() * a - g.slash(p) - g.gamma5 * b
}

/// Both equations as one block-diagonal 8x8 operator acting on `(Psi, Psi^R)`.
pub fn dirac_operator_8(g: &GammaSet, p: [f64; 4], p4: f64, mu: f64, reading: MassTerm) -> SMatrix<C64, 8, 8> {
    let mut out = SMatrix::<C64, 8, 8>::zeros();
    out.fixed_view_mut::<4, 4>(0, 0).copy_from(&dirac_operator(g, p, p4, mu, SpinorVariant::Psi, reading));
    out.fixed_view_mut::<4, 4>(4, 4).copy_from(&dirac_operator(g, p, p4, mu, SpinorVariant::PsiR, reading));
    out
}

fn minkowski_square(p: [f64; 4]) -> f64 {
    p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3]
}

/// `a^2 - p.p - (p4 - 1)^2`: the operator is singular exactly when this vanishes.
pub fn dirac_algebraic_residual(p: [f64; 4], p4: f64, mu: f64, reading: MassTerm) -> f64 {
    let a = reading.value(mu);
    let b = p4 - 1.0;
    a * a - minkowski_square(p) - b * b
}

/// Numeric determinant of the operator and the algebraic residual.
pub fn dirac_shell_residual(
    g: &GammaSet,
    p: [f64; 4],
    p4: f64,
    mu: f64,
    variant: SpinorVariant,
    reading: MassTerm,
) -> (C64, f64) {
    let det = dirac_operator(g, p, p4, mu, variant, reading).determinant();
    (det, dirac_algebraic_residual(p, p4, mu, reading))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anticomm(a: &Mat4, b: &Mat4) -> Mat4 {
        a * b + b * a
    }

    #[test]
    fn shell_energy_cases() {
        assert_eq!(shell_energy([4.0, 0.0, 0.0], 3.0, 1), 5.0);
        assert_eq!(shell_energy([0.0, 0.0, 0.0], 2.0, -1), -2.0);
        let e = shell_energy([1.0, 2.0, 2.0], 0.5, 1);
        assert!(standard_residual(e, [1.0, 2.0, 2.0], 0.5).abs() < 1e-14);
    }

    #[test]
    fn desitter_cases() {
        assert_eq!(desitter_residual([0.0, 0.0, 0.0, 0.0, 1.0], 2.5), 0.0);
        let m = 1.7;
        let r = desitter_residual([m, 0.0, 0.0, 0.0, 2f64.sqrt()], m);
        assert!(r.abs() < 1e-14);
        let p = [0.3, 1.0, -0.2, 0.5, 1.1];
        let ell = 0.25;
        assert_eq!(desitter_residual_ell(p, ell), desitter_residual(p, 1.0 / ell));
        let spec = ShellDef::desitter_from_ell(ell).unwrap();
        assert_eq!(spec.ell(), Some(ell));
    }

    #[test]
    fn desitter_rotation_invariance() {
        let p = [0.9, 0.3, -1.1, 0.4, 0.7];
        let (s, c) = 0.83f64.sin_cos();
        let rotated = [p[0], c * p[1] - s * p[2], s * p[1] + c * p[2], p[3], p[4]];
        assert!((desitter_residual(p, 1.3) - desitter_residual(rotated, 1.3)).abs() < 1e-12);
    }

    #[test]
    fn deformed_cases() {
        assert_eq!(deformed_residual("none", 5.0, [4.0, 0.0, 0.0], 3.0, PLANCK_LENGTH, 1.0).unwrap(), 0.0);
        for choice in ["linear-E", "quadratic-E"] {
            let a = deformed_residual(choice, 1.3, [0.2, 0.4, 0.1], 0.5, PLANCK_LENGTH, 0.0).unwrap();
            let b = deformed_residual("none", 1.3, [0.2, 0.4, 0.1], 0.5, PLANCK_LENGTH, 0.0).unwrap();
            assert_eq!(a, b);
        }
        let r = deformed_residual("linear-E", 1.0, [1.0, 0.0, 0.0], 0.0, PLANCK_LENGTH, 1.0).unwrap();
        assert_eq!(r, 1.6e-35);
        assert_eq!(
            deformed_residual("cubic", 1.0, [1.0, 0.0, 0.0], 0.0, PLANCK_LENGTH, 1.0),
            Err(ShellError::UnknownDeformation("cubic".into()))
        );
    }

    #[test]
    fn custom_deformation() {
        let mut r = DeformationRegistry::default();
        r.register("mass", Arc::new(|_, _, m, lp, alpha| alpha * lp * m));
        assert_eq!(r.term("mass", 0.0, [0.0; 3], 2.0, 0.5, 3.0).unwrap(), 3.0);
    }

    #[test]
    fn gamma_algebra() {
        let g = GammaSet::dirac();
        let metric = [1.0, -1.0, -1.0, -1.0];
        for mu in 0..4 {
            for nu in 0..4 {
                let expect = if mu == nu { Mat4::identity() * C64::new(2.0 * metric[mu], 0.0) } else { Mat4::zeros() };
                assert_eq!(anticomm(&g.gamma[mu], &g.gamma[nu]), expect);
            }
            assert_eq!(anticomm(&g.gamma[mu], &g.gamma5), Mat4::zeros());
        }
        assert_eq!(g.gamma5 * g.gamma5, Mat4::identity());
        let i = C64::new(0.0, 1.0);
        assert_eq!(g.gamma[0] * g.gamma[1] * g.gamma[2] * g.gamma[3] * i, g.gamma5);
    }

    #[test]
    fn operator_cases() {
        let g = GammaSet::dirac();
        for v in [SpinorVariant::Psi, SpinorVariant::PsiR] {
            assert_eq!(dirac_operator(&g, [0.0; 4], 1.0, 0.0, v, MassTerm::HalfArgument), Mat4::zeros());
        }
        let p = [0.3, -0.2, 0.7, 0.1];
        let (p4, mu) = (1.6, 0.8);
        let sum = dirac_operator(&g, p, p4, mu, SpinorVariant::Psi, MassTerm::HalfArgument)
            + dirac_operator(&g, p, p4, mu, SpinorVariant::PsiR, MassTerm::HalfArgument);
        let a = C64::new(2.0 * (mu / 2.0).sinh(), 0.0);
        let expect = (Mat4::identity() * a - g.slash(p)) * C64::new(2.0, 0.0);
        assert!((sum - expect).norm() < 1e-14);
    }

    #[test]
    fn determinant_vanishes_at_rest_on_shell() {
        let g = GammaSet::dirac();
        let mu: f64 = 0.5;
        let p0 = 2.0 * (mu / 2.0).sinh();
        let (det, alg) =
            dirac_shell_residual(&g, [p0, 0.0, 0.0, 0.0], 1.0, mu, SpinorVariant::Psi, MassTerm::HalfArgument);
        assert!(det.norm() <= 1e-10);
        assert!(alg.abs() <= 1e-15);
    }

    #[test]
    fn lightlike_massless_point() {
        let g = GammaSet::dirac();
        let (det, alg) =
            dirac_shell_residual(&g, [1.0, 1.0, 0.0, 0.0], 1.0, 0.0, SpinorVariant::PsiR, MassTerm::HalfArgument);
        assert!(det.norm() <= 1e-12);
        assert_eq!(alg, 0.0);
    }

    #[test]
    fn determinant_factorizes() {
        let g = GammaSet::dirac();
        let p = [1.3, 0.4, -0.6, 0.2];
        let (p4, mu) = (0.3, 1.1);
        for reading in [MassTerm::HalfArgument, MassTerm::HalvedSinh] {
            let alg = dirac_algebraic_residual(p, p4, mu, reading);
            for v in [SpinorVariant::Psi, SpinorVariant::PsiR] {
                let (det, _) = dirac_shell_residual(&g, p, p4, mu, v, reading);
                assert!((det - C64::new(alg * alg, 0.0)).norm() <= 1e-12 * (1.0 + alg * alg));
            }
        }
    }

    #[test]
    fn block_operator_determinant() {
        let g = GammaSet::dirac();
        let p = [0.9, 0.1, 0.2, -0.3];
        let d8 = dirac_operator_8(&g, p, 1.4, 0.6, MassTerm::HalfArgument).determinant();
        let alg = dirac_algebraic_residual(p, 1.4, 0.6, MassTerm::HalfArgument);
        assert!((d8 - C64::new(alg.powi(4), 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn mass_relation_cases() {
        let d = mass_relation(0.0);
        assert_eq!((d.m, d.m4), (0.0, 1.0));
        let d = mass_relation(1.0);
        assert!((d.m4 * d.m4 - d.m * d.m - 1.0).abs() <= 1e-12);
        for k in -20..=20 {
            let d = mass_relation(f64::from(k) / 10.0);
            assert!(((1.0 + d.m * d.m).sqrt() - d.m4).abs() <= 1e-12);
        }
    }

    #[test]
    fn presets_round_trip_and_lookup() {
        let presets = ShellPresets::default();
        let text = serde_json::to_string(&presets).unwrap();
        assert_eq!(ShellPresets::from_json(&text).unwrap(), presets);
        let std = presets.get("standard").unwrap();
        let r = std.residual("standard", ShellPoint::EnergyMomentum { e: 2f64.sqrt(), p: [1.0, 0.0, 0.0] }).unwrap();
        assert!(r.abs() < 1e-15);
        assert!(matches!(presets.get("nope"), Err(ShellError::UnknownShell(_))));
        assert!(matches!(std.residual("standard", ShellPoint::Five([0.0; 5])), Err(ShellError::WrongPoint { .. })));
        let text = r#"{"schema":1,"shells":{"ds":{"kind":"desitter","M":0.0}}}"#;
        assert!(matches!(ShellPresets::from_json(text), Err(ShellError::Invalid(_))));
        let text = r#"{"schema":1,"shells":{"q":{"kind":"deformed","m":1.0,"choice":"cubic"}}}"#;
        assert!(matches!(ShellPresets::from_json(text), Err(ShellError::UnknownDeformation(_))));
    }
}
