//! The verification suite run by `wholepartial verify`.
//!
//! Every check yields one [`CheckResult`]; the report is deterministic for a
//! given seed (wall times are only attached on request and never take part
//! in the determinism comparison).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{diff_explicit, eval, parse, rel_err, Bindings, Expr, Sampler, C64};
use crate::gen::ExprGen;
use crate::helicity::{self, AnsatzConvention, Helicity, Kinematics};
use crate::ncalgebra::CoordAlgebra;
use crate::numeric::{convergence_order, median};
use crate::onshell::{self, Chart, OnShellSampler, ENERGY};
use crate::shells::{self, GammaSet, MassTerm, SpinorVariant, PLANCK_LENGTH};

pub const SCHEMA: u32 = 1;

/// Test functions for the commutator identities.
pub const BATTERY: [&str; 10] = [
    "E*p1",
    "E^2*p2",
    "exp(E)*sinh(p2)",
    "sinh(E)*p1*p3",
    "exp(-E)*p1^2",
    "E^3/(1 + p2^2)",
    "cosh(p3)*E*p1",
    "sqrt(1 + E^2)*p2",
    "exp(0.5*E)*sinh(p1)*p3",
    "E*p1*p2*p3 + sinh(E)",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// How `residual` is compared with `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `residual <= tolerance`.
    AtMost,
    /// `residual >= tolerance` (separation and negative controls).
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub criterion: u8,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerance_override: Option<f64>,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces every upper-bound tolerance when set.
    pub tolerance: Option<f64>,
    /// Attach wall-clock times to each check.
    pub timing: bool,
}

struct Ctx {
    seed: u64,
    tolerance: Option<f64>,
    timing: bool,
    out: Vec<CheckResult>,
}

impl Ctx {
    fn sub_seed(&self, k: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k)
    }

    fn run(
        &mut self,
        name: &str,
        criterion: u8,
        comparison: Comparison,
        tolerance: f64,
        stream: u64,
        body: impl FnOnce(u64) -> Outcome,
    ) {
        let seed = self.sub_seed(stream);
        let start = Instant::now();
        let outcome = body(seed);
        let wall = start.elapsed().as_secs_f64() * 1e3;
        let tol = match (comparison, self.tolerance) {
            (Comparison::AtMost, Some(t)) => t,
            _ => tolerance,
        };
        let ok = match (&outcome.error, comparison) {
            (Some(_), _) => false,
            (None, Comparison::AtMost) => outcome.residual <= tol,
            (None, Comparison::AtLeast) => outcome.residual >= tol,
        };
        self.out.push(CheckResult {
            name: name.to_string(),
            criterion,
            status: if ok { Status::Pass } else { Status::Fail },
            residual: outcome.residual,
            tolerance: tol,
            comparison,
            samples: outcome.samples,
            seed,
            wall_ms: self.timing.then_some(wall),
            note: outcome.error,
        });
    }
}

struct Outcome {
    residual: f64,
    samples: usize,
    error: Option<String>,
}

impl Outcome {
    fn ok(residual: f64, samples: usize) -> Self {
        Self { residual, samples, error: None }
    }

    fn from_result(r: Result<(f64, usize), String>) -> Self {
        match r {
            Ok((residual, samples)) => Self::ok(residual, samples),
            Err(e) => Self { residual: f64::NAN, samples: 0, error: Some(e) },
        }
    }
}

/// Run the full suite.
pub fn run(opts: VerifyOptions) -> VerifyReport {
    let mut checks = run_checks(opts.seed, opts.tolerance, opts.timing);
    let first = strip_timing(&checks);
    let second = run_checks(opts.seed, opts.tolerance, false);
    let same = serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap();
    checks.push(CheckResult {
        name: "report_determinism".into(),
        criterion: 8,
        status: if same { Status::Pass } else { Status::Fail },
        residual: if same { 0.0 } else { 1.0 },
        tolerance: 0.0,
        comparison: Comparison::AtMost,
        samples: 2,
        seed: opts.seed,
        wall_ms: None,
        note: None,
    });
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let passed = checks.iter().all(|c| c.status == Status::Pass);
    VerifyReport { schema: SCHEMA, seed: opts.seed, tolerance_override: opts.tolerance, passed, checks }
}

fn strip_timing(checks: &[CheckResult]) -> Vec<CheckResult> {
    checks.iter().cloned().map(|c| CheckResult { wall_ms: None, ..c }).collect()
}

fn run_checks(seed: u64, tolerance: Option<f64>, timing: bool) -> Vec<CheckResult> {
    let mut ctx = Ctx { seed, tolerance, timing, out: Vec::new() };
    whole_partial_checks(&mut ctx);
    commutator_checks(&mut ctx);
    helicity_checks(&mut ctx);
    shell_checks(&mut ctx);
    algebra_checks(&mut ctx);
    ctx.out
}

/// Per-function FD data for the whole-partial oracle.
struct FdSample {
    rel_err_at_h5: f64,
    order: Option<f64>,
}

/// Exact value against central differences at `h = 1e-3, 1e-4, 1e-5`.
///
/// The relative error uses the `f64` oracle. The order is fitted on the
/// 128-bit oracle: in `f64` the difference quotient at `h = 1e-5` sits on
/// the roundoff floor `eps*|f|/h` for most functions.
fn fd_sample(chart: &Chart, f: &Expr, v: &str, point: &Bindings) -> Result<FdSample, String> {
    let exact =
        eval(&onshell::whole_partial(chart, f, v).map_err(|e| e.to_string())?, point).map_err(|e| e.to_string())?;
    let fd = onshell::fd_whole_partial(chart, f, v, point, 1e-5).map_err(|e| e.to_string())?;
    let rel_err_at_h5 = rel_err(fd, exact);
    let mut errs = Vec::new();
    for h in [1e-3, 1e-4, 1e-5] {
        match onshell::fd_whole_partial_extended(chart, f, v, point, h) {
            Ok(x) => errs.push((h, (C64::new(x, 0.0) - exact).norm())),
            Err(_) => return Ok(FdSample { rel_err_at_h5, order: None }),
        }
    }
    // Functions at most quadratic along the motion have no truncation error.
    let order = (errs[0].1 > 1e-9 * (1.0 + exact.norm())).then(|| convergence_order(&errs));
    Ok(FdSample { rel_err_at_h5, order })
}

fn fd_battery(seed: u64) -> Result<Vec<FdSample>, String> {
    let chart = Chart::standard(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = ExprGen::new(&["p1", "p2", "p3", "m", ENERGY]).nonzero(&[ENERGY, "m"]).depth(3);
    let mut sampler = OnShellSampler::new(&chart, seed ^ 0x5a5a);
    let vars = ["p1", "p2", "p3", "m", ENERGY];
    let mut out = Vec::with_capacity(100);
    let mut attempts = 0;
    while out.len() < 100 {
        attempts += 1;
        if attempts > 1000 {
            return Err("could not draw 100 evaluable functions".into());
        }
        let f = gen.generate(&mut rng);
        let v = vars[rng.random_range(0..vars.len())];
        let point = sampler.sample();
        match fd_sample(&chart, &f, v, &point) {
            Ok(s) => out.push(s),
            Err(_) => continue,
        }
    }
    Ok(out)
}

fn whole_partial_checks(ctx: &mut Ctx) {
    let seed = ctx.sub_seed(1);
    let battery = fd_battery(seed);
    let b1 = battery
        .as_ref()
        .map_err(Clone::clone)
        .map(|v| (v.iter().map(|s| s.rel_err_at_h5).fold(0.0, f64::max), v.len()));
    ctx.run("whole_partial_fd_oracle", 1, Comparison::AtMost, 1e-6, 1, |_| Outcome::from_result(b1));
    let b2 = battery.map(|v| {
        let mut orders: Vec<f64> = v.iter().filter_map(|s| s.order).collect();
        let n = orders.len();
        ((median(&mut orders) - 2.0).abs(), n)
    });
    ctx.run("whole_partial_fd_order", 1, Comparison::AtMost, 0.2, 1, |_| Outcome::from_result(b2));
}

fn commutator_checks(ctx: &mut Ctx) {
    ctx.run("commutator_closed_form", 2, Comparison::AtMost, 1e-9, 2, |seed| {
        let run = || -> Result<(f64, usize), String> {
            let mut worst = 0.0f64;
            let mut n = 0;
            for branch in [1, -1] {
                let chart = Chart::standard(branch);
                for (k, text) in BATTERY.iter().enumerate() {
                    let f = parse(text).map_err(|e| e.to_string())?;
                    for axis in 1..=3 {
                        let mut s = OnShellSampler::new(&chart, seed.wrapping_add(k as u64 * 7 + axis as u64));
                        let r = onshell::commutator_coefficient_residual(&chart, axis, &f, &mut s, 200)
                            .map_err(|e| e.to_string())?;
                        worst = worst.max(r);
                        n += 200;
                    }
                }
            }
            Ok((worst, n))
        };
        Outcome::from_result(run())
    });

    ctx.run("momentum_commutator_classical", 3, Comparison::AtMost, 1e-10, 3, |seed| {
        let run = || -> Result<(f64, usize), String> {
            let chart = Chart::standard(1);
            let mut s = OnShellSampler::new(&chart, seed);
            let mut worst = 0.0f64;
            let mut n = 0;
            for text in BATTERY {
                let f = parse(text).map_err(|e| e.to_string())?;
                for (i, j) in [(1, 2), (2, 3), (3, 1)] {
                    let zero = onshell::momentum_commutator_apply(&chart, i, j, &f, &Expr::zero())
                        .map_err(|e| e.to_string())?;
                    if !zero.is_zero() {
                        return Err(format!("pcomm = 0 gave {zero} for {text}"));
                    }
                    let (pi, pj) = (format!("p{i}"), format!("p{j}"));
                    let comm = onshell::commutator_apply(&chart, &pi, &pj, &f).map_err(|e| e.to_string())?;
                    for _ in 0..20 {
                        let v = eval(&comm, &s.sample()).map_err(|e| e.to_string())?;
                        worst = worst.max(v.norm());
                        n += 1;
                    }
                }
            }
            Ok((worst, n))
        };
        Outcome::from_result(run())
    });

    ctx.run("momentum_commutator_magnetic", 3, Comparison::AtMost, 1e-10, 4, |seed| {
        let run = || -> Result<(f64, usize), String> {
            let chart = Chart::standard(1);
            let mut s = OnShellSampler::new(&chart, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb);
            let mut worst = 0.0f64;
            let mut n = 0;
            for text in BATTERY {
                let f = parse(text).map_err(|e| e.to_string())?;
                let df = diff_explicit(&f, ENERGY);
                for (i, j) in [(1, 2), (2, 3), (3, 1), (2, 1)] {
                    let pcomm = onshell::magnetic_pcomm(i, j).map_err(|e| e.to_string())?;
                    let out =
                        onshell::momentum_commutator_apply(&chart, i, j, &f, &pcomm).map_err(|e| e.to_string())?;
                    for _ in 0..10 {
                        let mut point = s.sample();
                        let b: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
                        for (k, bk) in b.iter().enumerate() {
                            point.set_real(format!("B{}", k + 1), *bk);
                        }
                        let e = point.get(ENERGY).unwrap();
                        let fe = eval(&df, &point).map_err(|e| e.to_string())?;
                        let direct = fe / (e * e * e) * C64::new(0.0, levi_civita(i, j) * b[6 - i - j - 1]);
                        let got = eval(&out, &point).map_err(|e| e.to_string())?;
                        worst = worst.max(rel_err(got, direct));
                        n += 1;
                    }
                }
            }
            Ok((worst, n))
        };
        Outcome::from_result(run())
    });
}

/// `eps_ijk` for distinct axes `i, j` (1-based) and the remaining `k`.
fn levi_civita(i: usize, j: usize) -> f64 {
    match (i, j) {
        (1, 2) | (2, 3) | (3, 1) => 1.0,
        _ => -1.0,
    }
}

/// Random kinematics with `|p_i| in [0.1, 2]` (random signs), `m in [0.5, 2]`.
pub fn random_kinematics<R: Rng>(rng: &mut R) -> Kinematics {
    let p = std::array::from_fn(|_| {
        let x: f64 = rng.random_range(0.1..=2.0);
        if rng.random_bool(0.5) {
            -x
        } else {
            x
        }
    });
    Kinematics::new(p, rng.random_range(0.5..=2.0)).expect("finite kinematics")
}

fn helicity_checks(ctx: &mut Ctx) {
    let kin_set = |seed: u64, n: usize| -> Vec<Kinematics> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| random_kinematics(&mut rng)).collect()
    };

    ctx.run("polarization_normalization", 4, Comparison::AtMost, 1e-10, 5, |seed| {
        let run = || -> Result<(f64, usize), String> {
            let mut worst = 0.0f64;
            for k in kin_set(seed, 100) {
                for (lambda, expect) in
                    [(Helicity::Plus, -1.0), (Helicity::Minus, -1.0), (Helicity::Zero, -1.0), (Helicity::Time, 1.0)]
                {
                    let n = helicity::pol_vector(&k, lambda).map_err(|e| e.to_string())?.norm_sq();
                    worst = worst.max((n - C64::new(expect, 0.0)).norm());
                }
            }
            Ok((worst, 100))
        };
        Outcome::from_result(run())
    });

    ctx.run("polarization_transversality", 4, Comparison::AtMost, 1e-10, 5, |seed| {
        let run = || -> Result<(f64, usize), String> {
            let mut worst = 0.0f64;
            for k in kin_set(seed, 100) {
                let p = k.four_momentum();
                for lambda in [Helicity::Plus, Helicity::Minus] {
                    let eps = helicity::pol_vector(&k, lambda).map_err(|e| e.to_string())?;
                    worst = worst.max(p.contract(&eps).norm());
                }
            }
            Ok((worst, 100))
        };
        Outcome::from_result(run())
    });

    ctx.run("longitudinal_magnetic_field_zero", 4, Comparison::AtMost, 0.0, 5, |seed| {
        let run = || -> Result<(f64, usize), String> {
            let mut worst = 0.0f64;
            for k in kin_set(seed, 100) {
                let f = helicity::fields_closed(&k, Helicity::Zero).map_err(|e| e.to_string())?;
                worst = worst.max(helicity::norm3(&f.b));
            }
            Ok((worst, 100))
        };
        Outcome::from_result(run())
    });

    ctx.run("fields_potential_agreement", 4, Comparison::AtMost, 1e-10, 5, |seed| {
        let run = || -> Result<(f64, usize), String> {
            let mut worst = 0.0f64;
            for k in kin_set(seed, 100) {
                for lambda in [Helicity::Plus, Helicity::Minus, Helicity::Zero] {
                    let closed = helicity::fields_closed(&k, lambda).map_err(|e| e.to_string())?;
                    let eps = helicity::pol_vector(&k, lambda).map_err(|e| e.to_string())?;
                    worst = worst.max(closed.max_diff(&helicity::fields_from_potential(&k, &eps)));
                }
            }
            Ok((worst, 100))
        };
        Outcome::from_result(run())
    });

    let ansatz = |seed: u64| -> Result<(f64, f64, usize), String> {
        let chart = Chart::standard(1);
        let conv = AnsatzConvention::default();
        let fs: Vec<Expr> = ["E*p1", "exp(E)*sinh(p2)", "E^2*p2 + sinh(E)"]
            .iter()
            .map(|t| parse(t).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let mut cross_worst = 0.0f64;
        let mut omega_worst = 0.0f64;
        for (n, k) in kin_set(seed, 50).into_iter().enumerate() {
            let f = &fs[n % fs.len()];
            let r = helicity::ansatz_commutator(&chart, &k, f, &conv).map_err(|e| e.to_string())?;
            let coef = r.coefficient_vector().ok_or("df/dE vanished at a sample point")?;
            let long = helicity::longitudinal_tensor(&k).map_err(|e| e.to_string())?;
            cross_worst = cross_worst.max(helicity::norm3(&helicity::cross(&coef, &long.e)));
            let w: Vec<C64> = r.omega.iter().map(|w| w.ok_or("missing weight")).collect::<Result<_, _>>()?;
            for a in 0..3 {
                for b in (a + 1)..3 {
                    omega_worst = omega_worst.max((w[a] - w[b]).norm());
                }
            }
        }
        Ok((cross_worst, omega_worst, 50))
    };
    let result = ansatz(ctx.sub_seed(6));
    let cross = result.clone().map(|(c, _, n)| (c, n));
    let omega = result.map(|(_, w, n)| (w, n));
    ctx.run("ansatz_parallel_to_longitudinal", 5, Comparison::AtMost, 1e-10, 6, |_| Outcome::from_result(cross));
    ctx.run("ansatz_weight_axis_independent", 5, Comparison::AtMost, 1e-9, 6, |_| Outcome::from_result(omega));
}

/// `(p, p4, mu)` with the algebraic Dirac residual exactly solved for `p0`,
/// then shifted by `offset` in `p0`.
fn dirac_point<R: Rng>(rng: &mut R, offset: f64) -> ([f64; 4], f64, f64) {
    loop {
        let mu: f64 = rng.random_range(-2.0..=2.0);
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let p4: f64 = rng.random_range(0.0..=2.0);
        let a = MassTerm::HalfArgument.value(mu);
        let b = p4 - 1.0;
        let p0sq = a * a + p.iter().map(|x| x * x).sum::<f64>() - b * b;
        if p0sq < 0.0 {
            continue;
        }
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let p0 = sign * (p0sq.sqrt() + offset);
        return ([p0, p[0], p[1], p[2]], p4, mu);
    }
}

fn shell_checks(ctx: &mut Ctx) {
    let g = GammaSet::dirac();
    ctx.run("dirac_on_shell_determinant", 6, Comparison::AtMost, 1e-9, 7, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for n in 0..50 {
            let (p, p4, mu) = dirac_point(&mut rng, 0.0);
            let v = if n % 2 == 0 { SpinorVariant::Psi } else { SpinorVariant::PsiR };
            let (det, _) = shells::dirac_shell_residual(&g, p, p4, mu, v, MassTerm::HalfArgument);
            worst = worst.max(det.norm());
        }
        Outcome::ok(worst, 50)
    });

    ctx.run("dirac_off_shell_separation", 6, Comparison::AtLeast, 1e-6, 8, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut least = f64::INFINITY;
        for n in 0..50 {
            let offset = rng.random_range(0.2..=1.0);
            let (p, p4, mu) = dirac_point(&mut rng, offset);
            let v = if n % 2 == 0 { SpinorVariant::Psi } else { SpinorVariant::PsiR };
            let (det, _) = shells::dirac_shell_residual(&g, p, p4, mu, v, MassTerm::HalfArgument);
            least = least.min(det.norm());
        }
        Outcome::ok(least, 50)
    });

    ctx.run("dirac_determinant_factorization", 6, Comparison::AtMost, 1e-9, 9, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..=2.0));
            let p4 = rng.random_range(-1.0..=3.0);
            let mu = rng.random_range(-2.0..=2.0);
            let alg = shells::dirac_algebraic_residual(p, p4, mu, MassTerm::HalfArgument);
            let factor = C64::new(alg * alg, 0.0);
            let (d1, _) = shells::dirac_shell_residual(&g, p, p4, mu, SpinorVariant::Psi, MassTerm::HalfArgument);
            let (d2, _) = shells::dirac_shell_residual(&g, p, p4, mu, SpinorVariant::PsiR, MassTerm::HalfArgument);
            worst = worst.max(rel_err(d1, factor)).max(rel_err(d2, factor));
            worst = worst.max((d1.norm() - d2.norm()).abs() / (1.0 + d1.norm()));
        }
        Outcome::ok(worst, 200)
    });

    ctx.run("mass_relation_hyperbolic", 6, Comparison::AtMost, 1e-12, 10, |_| {
        let mut worst = 0.0f64;
        for k in -20..=20 {
            let d = shells::mass_relation(f64::from(k) / 10.0);
            worst = worst.max((d.m4 * d.m4 - d.m * d.m - 1.0).abs());
            worst = worst.max(((1.0 + d.m * d.m).sqrt() - d.m4).abs());
        }
        Outcome::ok(worst, 41)
    });

    ctx.run("deformed_none_matches_standard", 7, Comparison::AtMost, 0.0, 11, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mismatches = 0usize;
        for _ in 0..1000 {
            let e = rng.random_range(-5.0..=5.0);
            let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-5.0..=5.0));
            let m = rng.random_range(0.0..=3.0);
            let a = shells::deformed_residual("none", e, p, m, PLANCK_LENGTH, rng.random_range(0.0..=5.0));
            let b = shells::standard_residual(e, p, m);
            if a.map(f64::to_bits) != Ok(b.to_bits()) {
                mismatches += 1;
            }
        }
        Outcome::ok(mismatches as f64, 1000)
    });

    ctx.run("deformation_linear_in_alpha", 7, Comparison::AtMost, 1e-12, 12, |seed| {
        let run = || -> Result<(f64, usize), String> {
            let reg = shells::DeformationRegistry::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            let mut n = 0;
            for _ in 0..100 {
                let e = rng.random_range(0.1..=5.0);
                let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-5.0..=5.0));
                let m = rng.random_range(0.0..=3.0);
                for choice in ["linear-E", "quadratic-E"] {
                    let unit = reg.term(choice, e, p, m, PLANCK_LENGTH, 1.0).map_err(|e| e.to_string())?;
                    for alpha in [0.5, 2.0, 10.0, -3.0] {
                        let t = reg.term(choice, e, p, m, PLANCK_LENGTH, alpha).map_err(|e| e.to_string())?;
                        worst = worst.max((t - alpha * unit).abs() / (alpha * unit).abs());
                        n += 1;
                    }
                }
            }
            let r =
                reg.residual("linear-E", 1.0, [1.0, 0.0, 0.0], 0.0, PLANCK_LENGTH, 1.0).map_err(|e| e.to_string())?;
            worst = worst.max((r - PLANCK_LENGTH).abs() / PLANCK_LENGTH);
            Ok((worst, n + 1))
        };
        Outcome::from_result(run())
    });
}

fn algebra_checks(ctx: &mut Ctx) {
    ctx.run("jacobi_kappa_minkowski", 7, Comparison::AtMost, 1e-12, 13, |_| {
        let mut worst = 0.0f64;
        for kappa in [0.1, 1.0, 10.0] {
            worst = worst.max(CoordAlgebra::kappa_minkowski(kappa).unwrap().jacobi_residual());
        }
        Outcome::ok(worst, 3)
    });

    ctx.run("jacobi_canonical", 7, Comparison::AtMost, 1e-12, 14, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let mut theta = vec![vec![0.0; 4]; 4];
            for mu in 0..4 {
                for nu in (mu + 1)..4 {
                    let t = rng.random_range(-3.0..=3.0);
                    theta[mu][nu] = t;
                    theta[nu][mu] = -t;
                }
            }
            let a = CoordAlgebra::canonical(&["x0", "x1", "x2", "x3"], theta).unwrap();
            worst = worst.max(a.jacobi_residual());
        }
        Outcome::ok(worst, 10)
    });

    ctx.run("jacobi_negative_control", 7, Comparison::AtLeast, 1e-3, 15, |_| {
        let kappa = 1.0;
        let a = CoordAlgebra::lie(
            &["t", "x1", "x2", "x3"],
            &[("x1", ("x1", "t"), 1.0 / kappa), ("x2", ("x2", "t"), 2.0 / kappa), ("t", ("x1", "x2"), 1.0)],
        )
        .unwrap();
        Outcome::ok(a.jacobi_residual(), 1)
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levi_civita_signs() {
        assert_eq!(levi_civita(1, 2), 1.0);
        assert_eq!(levi_civita(3, 1), 1.0);
        assert_eq!(levi_civita(2, 1), -1.0);
        assert_eq!(levi_civita(1, 3), -1.0);
    }

    #[test]
    fn constructed_dirac_points_are_on_shell() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (p, p4, mu) = dirac_point(&mut rng, 0.0);
            assert!(shells::dirac_algebraic_residual(p, p4, mu, MassTerm::HalfArgument).abs() < 1e-12);
        }
    }
}
