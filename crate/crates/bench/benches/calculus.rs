use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use wholepartial_core::expr::{diff_explicit, parse};
use wholepartial_core::helicity::{self, Helicity, Kinematics};
use wholepartial_core::ncalgebra::CoordAlgebra;
use wholepartial_core::onshell::{self, Chart};
use wholepartial_core::shells::{self, GammaSet, MassTerm, SpinorVariant};

const F: &str = "exp(0.5*E)*sinh(p1)*p3 + E*p1*p2*p3/sqrt(1 + E^2)";

fn expressions(c: &mut Criterion) {
    let f = parse(F).unwrap();
    c.bench_function("parse", |b| b.iter(|| parse(black_box(F)).unwrap()));
    c.bench_function("diff_explicit", |b| b.iter(|| diff_explicit(black_box(&f), "E")));
    c.bench_function("simplify", |b| {
        let d = diff_explicit(&f, "E");
        b.iter(|| black_box(&d).simplify())
    });
}

fn calculus(c: &mut Criterion) {
    let chart = Chart::standard(1);
    let f = parse(F).unwrap();
    c.bench_function("whole_partial", |b| b.iter(|| onshell::whole_partial(&chart, black_box(&f), "p1").unwrap()));
    c.bench_function("commutator_apply", |b| {
        b.iter(|| onshell::commutator_apply(&chart, "p1", "E", black_box(&f)).unwrap())
    });
    c.bench_function("commutator_closed_form_general", |b| {
        b.iter(|| onshell::commutator_closed_form_general(&chart, "p1", "p2", black_box(&f)).unwrap())
    });
}

fn numerics(c: &mut Criterion) {
    let k = Kinematics::new([0.3, -0.7, 1.1], 0.9).unwrap();
    c.bench_function("pol_vector", |b| b.iter(|| helicity::pol_vector(black_box(&k), Helicity::Zero).unwrap()));
    let g = GammaSet::dirac();
    c.bench_function("dirac_shell_residual", |b| {
        b.iter(|| {
            shells::dirac_shell_residual(
                &g,
                black_box([0.4, 0.1, -0.2, 0.3]),
                1.2,
                0.8,
                SpinorVariant::Psi,
                MassTerm::HalfArgument,
            )
        })
    });
    let a = CoordAlgebra::kappa_minkowski(10.0).unwrap();
    c.bench_function("jacobi_residual", |b| b.iter(|| black_box(&a).jacobi_residual()));
}

criterion_group!(benches, expressions, calculus, numerics);
criterion_main!(benches);
