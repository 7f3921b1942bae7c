//! Helicity-basis polarization vectors and their electromagnetic fields.
//!
//! Conventions (the closed forms use `p_l`, `p_r` and `phi` without further
//! qualification):
//! - `p_r = p1 + i p2`, `p_l = p1 - i p2`, `e^{i phi} = p_r / p_perp`;
//! - polarization vectors are returned with lower (covariant) indices, as
//!   printed: `eps_mu(p, lambda)`;
//! - fields from a potential use `F^{mu nu} = -i (p^mu eps^nu - p^nu eps^mu)`,
//!   `E^i = F^{i0}` and `B^i = -1/2 eps_ijk F^{jk}`;
//! - coordinates act as `x^mu = i * D/Dp_mu`, so `[x^0, x^i] = -[D_E, D_{p_i}]`.
//!
//! [`fields_from_potential`] applied to [`pol_vector`] reproduces
//! [`fields_closed`] under these conventions; the tests check that.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{diff_explicit, eval, Bindings, Expr, C64};
use crate::onshell::{self, Chart, ChartError, ENERGY};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HelicityError {
    #[error("transverse momentum vanishes: helicity +-1 is undefined on the z axis")]
    AxisSingularity,
    #[error("momentum vanishes")]
    ZeroMomentum,
    #[error("mass must be positive for this mode")]
    ZeroMass,
    #[error("invalid kinematics: {0}")]
    InvalidKinematics(String),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// Helicity label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Helicity {
    Plus,
    Minus,
    Zero,
    /// The time-like `0_t` mode.
    Time,
}

impl Helicity {
    pub const ALL: [Helicity; 4] = [Helicity::Plus, Helicity::Minus, Helicity::Zero, Helicity::Time];

    pub fn label(self) -> &'static str {
        match self {
            Helicity::Plus => "+1",
            Helicity::Minus => "-1",
            Helicity::Zero => "0",
            Helicity::Time => "0t",
        }
    }
}

impl fmt::Display for Helicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Helicity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+1" | "1" | "plus" => Ok(Helicity::Plus),
            "-1" | "minus" => Ok(Helicity::Minus),
            "0" => Ok(Helicity::Zero),
            "0t" | "0_t" | "t" => Ok(Helicity::Time),
            other => Err(format!("unknown helicity `{other}` (expected +1, -1, 0 or 0t)")),
        }
    }
}

/// Complex 4-vector in a metric of signature `(+,-,-,-)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourVector(pub [C64; 4]);

impl FourVector {
    pub fn real(v: [f64; 4]) -> Self {
        Self(v.map(|x| C64::new(x, 0.0)))
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    /// Flip the spatial components: lower <-> upper index.
    pub fn raised(&self) -> Self {
        let [a, b, c, d] = self.0;
        Self([a, -b, -c, -d])
    }

    pub fn spatial(&self) -> [C64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// `a_0 b_0 - a_1 b_1 - a_2 b_2 - a_3 b_3` for two vectors with the same index position.
    pub fn minkowski_dot(&self, other: &Self) -> C64 {
        self.0[0] * other.0[0] - self.0[1] * other.0[1] - self.0[2] * other.0[2] - self.0[3] * other.0[3]
    }

    /// `a^mu b_mu` for an upper-index `self` and lower-index `lower`.
    pub fn contract(&self, lower: &Self) -> C64 {
        self.0.iter().zip(lower.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// `v . v*`.
    pub fn norm_sq(&self) -> C64 {
        self.minkowski_dot(&self.conj())
    }
}

pub type Vec3 = [C64; 3];

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm3(a: &Vec3) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(s: C64, v: &[C64; 3]) -> Vec3 {
    v.map(|z| s * z)
}

fn add3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Electric and magnetic 3-vectors of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldTriple {
    pub e: Vec3,
    pub b: Vec3,
    pub helicity: Option<Helicity>,
}

impl FieldTriple {
    /// Largest component-wise distance to `other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.e
            .iter()
            .zip(other.e.iter())
            .chain(self.b.iter().zip(other.b.iter()))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Antisymmetric `F^{mu nu}` with `F^{i0} = E^i`, `F^{jk} = -eps_jkl B^l`.
    pub fn tensor(&self) -> [[C64; 4]; 4] {
        let z = C64::new(0.0, 0.0);
        let mut f = [[z; 4]; 4];
        for i in 0..3 {
            f[i + 1][0] = self.e[i];
            f[0][i + 1] = -self.e[i];
        }
        let b = self.b;
        f[1][2] = -b[2];
        f[2][1] = b[2];
        f[2][3] = -b[0];
        f[3][2] = b[0];
        f[3][1] = -b[1];
        f[1][3] = b[1];
        f
    }
}

/// On-shell kinematics `(p, m)` with `E = +sqrt(m^2 + p^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub p: [f64; 3],
    pub m: f64,
}

impl Kinematics {
    pub fn new(p: [f64; 3], m: f64) -> Result<Self, HelicityError> {
        if !p.iter().all(|x| x.is_finite()) || !m.is_finite() || m < 0.0 {
            return Err(HelicityError::InvalidKinematics(format!("p = {p:?}, m = {m}")));
        }
        Ok(Self { p, m })
    }

    pub fn p_abs(&self) -> f64 {
        self.p.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn p_perp(&self) -> f64 {
        self.p[0].hypot(self.p[1])
    }

    pub fn energy(&self) -> f64 {
        (self.m * self.m + self.p.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    pub fn p_r(&self) -> C64 {
        C64::new(self.p[0], self.p[1])
    }

    pub fn p_l(&self) -> C64 {
        C64::new(self.p[0], -self.p[1])
    }

    /// `e^{i phi} = p_r / p_perp`.
    pub fn phase(&self) -> Result<C64, HelicityError> {
        let pt = self.p_perp();
        if pt == 0.0 {
            return Err(HelicityError::AxisSingularity);
        }
        Ok(self.p_r() / pt)
    }

    /// Contravariant 4-momentum `(E, p)`.
    pub fn four_momentum(&self) -> FourVector {
        FourVector::real([self.energy(), self.p[0], self.p[1], self.p[2]])
    }

    fn p3(&self) -> Vec3 {
        self.p.map(|x| C64::new(x, 0.0))
    }

    /// Bindings `p1, p2, p3, m, E` for evaluating chart expressions.
    pub fn bindings(&self) -> Bindings {
        let mut b = Bindings::from_reals([("p1", self.p[0]), ("p2", self.p[1]), ("p3", self.p[2]), ("m", self.m)]);
        b.set_real(ENERGY, self.energy());
        b
    }

    fn nonzero_p(&self) -> Result<f64, HelicityError> {
        let p = self.p_abs();
        if p == 0.0 {
            Err(HelicityError::ZeroMomentum)
        } else {
            Ok(p)
        }
    }

    fn positive_m(&self) -> Result<f64, HelicityError> {
        if self.m > 0.0 {
            Ok(self.m)
        } else {
            Err(HelicityError::ZeroMass)
        }
    }
}

/// Polarization 4-vector `eps_mu(p, lambda)` (lower index).
pub fn pol_vector(k: &Kinematics, lambda: Helicity) -> Result<FourVector, HelicityError> {
    let [px, py, pz] = k.p;
    let c = |re: f64, im: f64| C64::new(re, im);
    match lambda {
        Helicity::Plus | Helicity::Minus => {
            let phase = k.phase()?;
            let pt = k.p_perp();
            let p = k.nonzero_p()?;
            let s = if lambda == Helicity::Plus { 1.0 } else { -1.0 };
            let phase = if s > 0.0 { phase } else { phase.conj() };
            let pre = phase / (std::f64::consts::SQRT_2 * p);
            Ok(FourVector([
                c(0.0, 0.0),
                pre * c(s * px * pz, -py * p) / pt,
                pre * c(s * py * pz, px * p) / pt,
                pre * c(-s * pt, 0.0),
            ]))
        }
        Helicity::Zero => {
            let m = k.positive_m()?;
            let p = k.nonzero_p()?;
            let e = k.energy();
            Ok(FourVector::real([p / m, -e * px / (p * m), -e * py / (p * m), -e * pz / (p * m)]))
        }
        Helicity::Time => {
            let m = k.positive_m()?;
            Ok(FourVector::real([k.energy() / m, -px / m, -py / m, -pz / m]))
        }
    }
}

/// Closed-form fields of the helicity modes, with `p~ = (p2, -p1, -i p)`.
pub fn fields_closed(k: &Kinematics, lambda: Helicity) -> Result<FieldTriple, HelicityError> {
    let r2 = std::f64::consts::SQRT_2;
    let e = k.energy();
    let pz = k.p[2];
    let pv = k.p3();
    let i = C64::new(0.0, 1.0);
    let (ef, bf) = match lambda {
        Helicity::Plus | Helicity::Minus => {
            if k.p_perp() == 0.0 {
                return Err(HelicityError::AxisSingularity);
            }
            let p = k.nonzero_p()?;
            let tilde: Vec3 = [C64::new(k.p[1], 0.0), C64::new(-k.p[0], 0.0), C64::new(0.0, -p)];
            if lambda == Helicity::Plus {
                let pl = k.p_l();
                let ef = add3(&scale(-i * e * pz / (r2 * p * pl), &pv), &scale(C64::new(-e, 0.0) / (r2 * pl), &tilde));
                let bf = add3(&scale(C64::new(-pz, 0.0) / (r2 * pl), &pv), &scale(i * p / (r2 * pl), &tilde));
                (ef, bf)
            } else {
                let pr = k.p_r();
                let tilde_conj = tilde.map(|z| z.conj());
                let ef =
                    add3(&scale(i * e * pz / (r2 * p * pr), &pv), &scale(C64::new(-e, 0.0) / (r2 * pr), &tilde_conj));
                let bf = add3(&scale(C64::new(-pz, 0.0) / (r2 * pr), &pv), &scale(-i * p / (r2 * pr), &tilde_conj));
                (ef, bf)
            }
        }
        Helicity::Zero => {
            let m = k.positive_m()?;
            let p = k.nonzero_p()?;
            (scale(i * m / p, &pv), [C64::new(0.0, 0.0); 3])
        }
        Helicity::Time => {
            // eps(0_t) = p/m is pure gauge
            k.positive_m()?;
            ([C64::new(0.0, 0.0); 3], [C64::new(0.0, 0.0); 3])
        }
    };
    Ok(FieldTriple { e: ef, b: bf, helicity: Some(lambda) })
}

/// Fields of the potential `eps` (lower index) at momentum `k`.
pub fn fields_from_potential(k: &Kinematics, eps: &FourVector) -> FieldTriple {
    let p = k.four_momentum().0;
    let a = eps.raised().0;
    let minus_i = C64::new(0.0, -1.0);
    let f = |mu: usize, nu: usize| minus_i * (p[mu] * a[nu] - p[nu] * a[mu]);
    let e = [f(1, 0), f(2, 0), f(3, 0)];
    // B^i = -1/2 eps_ijk F^{jk} = -F^{jk} for cyclic (i, j, k)
    let b = [-f(2, 3), -f(3, 1), -f(1, 2)];
    FieldTriple { e, b, helicity: None }
}

/// The longitudinal (`lambda = 0`) field tensor: `E = (i m / p) p`, `B = 0`.
pub fn longitudinal_tensor(k: &Kinematics) -> Result<FieldTriple, HelicityError> {
    fields_closed(k, Helicity::Zero)
}

/// Coordinate-operator convention for the ansatz: `x^mu = factor * D/Dp_mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzConvention {
    pub factor: C64,
}

impl Default for AnsatzConvention {
    fn default() -> Self {
        Self { factor: C64::new(0.0, 1.0) }
    }
}

/// Commutators of the coordinate operators applied to a test function,
/// evaluated at one kinematic point, and the extracted weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzResult {
    /// `[x^mu, x^nu] f` at the point.
    pub commutator: [[C64; 4]; 4],
    /// `df/dE` at the point.
    pub df_de: C64,
    /// Commutator divided by `df/dE`; absent when `df/dE` vanishes.
    pub coefficient: Option<[[C64; 4]; 4]>,
    /// Per-axis weight: coefficient of `[x^0, x^i]` over the longitudinal
    /// field component `E_par^i`; absent where `p_i = 0` or `df/dE = 0`.
    pub omega: [Option<C64>; 3],
}

impl AnsatzResult {
    /// The `(0, i)` coefficients as a 3-vector.
    pub fn coefficient_vector(&self) -> Option<Vec3> {
        self.coefficient.map(|c| [c[0][1], c[0][2], c[0][3]])
    }
}

fn coordinate_var(mu: usize) -> String {
    if mu == 0 {
        ENERGY.to_string()
    } else {
        format!("p{mu}")
    }
}

/// Symbolic `[x^mu, x^nu] f` under the given convention.
pub fn coordinate_commutator(
    c: &Chart,
    mu: usize,
    nu: usize,
    f: &Expr,
    conv: &AnsatzConvention,
) -> Result<Expr, HelicityError> {
    let r = onshell::commutator_apply(c, &coordinate_var(mu), &coordinate_var(nu), f)?;
    Ok(Expr::mul([Expr::Const(conv.factor * conv.factor), r]))
}

/// Evaluate `[x^mu, x^nu] f` at `k`, divide by `df/dE` and extract the weight
/// against the longitudinal field.
pub fn ansatz_commutator(
    c: &Chart,
    k: &Kinematics,
    f: &Expr,
    conv: &AnsatzConvention,
) -> Result<AnsatzResult, HelicityError> {
    let point = k.bindings();
    let zero = C64::new(0.0, 0.0);
    let mut commutator = [[zero; 4]; 4];
    for mu in 0..4 {
        for nu in (mu + 1)..4 {
            let e = coordinate_commutator(c, mu, nu, f, conv)?;
            let v = eval(&e, &point).map_err(ChartError::from)?;
            commutator[mu][nu] = v;
            commutator[nu][mu] = -v;
        }
    }
    let df_de = eval(&diff_explicit(f, ENERGY), &point).map_err(ChartError::from)?;
    if df_de == zero {
        return Ok(AnsatzResult { commutator, df_de, coefficient: None, omega: [None; 3] });
    }
    let coefficient = commutator.map(|row| row.map(|z| z / df_de));
    let long = longitudinal_tensor(k)?;
    let mut omega = [None; 3];
    for i in 0..3 {
        if k.p[i] != 0.0 {
            omega[i] = Some(coefficient[0][i + 1] / long.e[i]);
        }
    }
    Ok(AnsatzResult { commutator, df_de, coefficient: Some(coefficient), omega })
}

/// Jacobi residual of the derivative-valued bracket for one triple of
/// coordinates, `[[x^a, x^b], x^c] f + cyclic`, evaluated at `k`.
pub fn ansatz_jacobi_residual(
    c: &Chart,
    k: &Kinematics,
    f: &Expr,
    triple: [usize; 3],
    conv: &AnsatzConvention,
) -> Result<f64, HelicityError> {
    // X_mu g = factor * D_mu g; [A, B] g = A(B g) - B(A g)
    let apply = |mu: usize, g: &Expr| -> Result<Expr, ChartError> {
        Ok(Expr::mul([Expr::Const(conv.factor), onshell::whole_partial(c, g, &coordinate_var(mu))?]))
    };
    let bracket_then = |a: usize, b: usize, cc: usize| -> Result<Expr, ChartError> {
        // [[X_a, X_b], X_c] f = [X_a, X_b](X_c f) - X_c([X_a, X_b] f)
        let comm = |g: &Expr| -> Result<Expr, ChartError> {
            Ok(Expr::sub(apply(a, &apply(b, g)?)?, apply(b, &apply(a, g)?)?))
        };
        Ok(Expr::sub(comm(&apply(cc, f)?)?, apply(cc, &comm(f)?)?))
    };
    let [a, b, cc] = triple;
    let total = Expr::add([bracket_then(a, b, cc)?, bracket_then(b, cc, a)?, bracket_then(cc, a, b)?]);
    let v = eval(&total, &k.bindings()).map_err(ChartError::from)?;
    Ok(v.norm())
}
