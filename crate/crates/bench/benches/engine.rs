use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use trc_core::classfield;
use trc_core::hecke;
use trc_core::lattice;
use trc_core::lfactor::{self, SatakeParams};
use trc_core::mackey;
use trc_core::qcomb::{self, QCombContext};

fn combinatorics(c: &mut Criterion) {
    let ctx = QCombContext::new(5, 7).unwrap();
    c.bench_function("qcomb/coefficient-table n=5 ell=7", |b| b.iter(|| qcomb::CoefficientTable::compute(black_box(&ctx))));
    c.bench_function("qcomb/congruences n=5 ell=7", |b| b.iter(|| qcomb::congruence_certificates(black_box(&ctx))));
}

fn lattices(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice");
    g.sample_size(10);
    g.bench_function("inclusion-exclusion n=2 ell=3 depth=2", |b| b.iter(|| lattice::verify_inclusion_exclusion(2, 3, 2).unwrap()));
    g.bench_function("measure-identity n=3 ell=2 depth=2", |b| b.iter(|| lattice::verify_measure_identity(3, 2, 2).unwrap()));
    g.finish();
}

fn hecke_assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("hecke");
    g.sample_size(10);
    let ctx = QCombContext::new(2, 3).unwrap();
    g.bench_function("phi-certificate n=2 ell=3", |b| b.iter(|| hecke::phi_certificate(black_box(&ctx), None).unwrap()));
    g.bench_function("reduce-um-to-psi n=2 m=2 ell=3", |b| b.iter(|| hecke::reduce_um_to_psi(2, black_box(&ctx)).unwrap()));
    g.finish();
}

fn l_factors(c: &mut Criterion) {
    c.bench_function("lfactor/central-value-sweep n=2 ell=5", |b| b.iter(|| lfactor::central_value_sweep(2, 5, 6).unwrap()));
    let cl = classfield::ring_class_group(-4, 65).unwrap();
    let sp = SatakeParams::from_roots(1, 5, &[(1, 4), (3, 4)]).unwrap();
    c.bench_function("lfactor/tame-check Pic(O_65)", |b| b.iter(|| lfactor::tame_group_algebra_check(&cl.group, &sp, 1).unwrap()));
}

fn mackey_engine(c: &mut Criterion) {
    let mut g = c.benchmark_group("mackey");
    g.sample_size(10);
    for entry in mackey::catalog() {
        for model in mackey::MODELS {
            let name = format!("{} {model} 10 samples", entry.group.name);
            g.bench_function(name, |b| b.iter(|| mackey::mackey_report(&entry, model, 10, 1).unwrap()));
        }
    }
    g.bench_function("ord-projector 20 matrices", |b| b.iter(|| mackey::ord_report(20, 6, 8, 1).unwrap()));
    g.finish();
}

fn class_field(c: &mut Criterion) {
    let mut g = c.benchmark_group("classfield");
    g.sample_size(10);
    g.bench_function("ring-class-group d=-4 m=65", |b| b.iter(|| classfield::ring_class_group(-4, black_box(65)).unwrap()));
    g.bench_function("tower d=-23 m=3 ell=13", |b| b.iter(|| classfield::tower(-23, 3, 13).unwrap()));
    g.bench_function("class-number sweep 20000", |b| b.iter(|| classfield::class_number_sweep(20_000)));
    g.finish();
}

criterion_group!(benches, combinatorics, lattices, hecke_assembly, l_factors, mackey_engine, class_field);
criterion_main!(benches);
