//! Benchmarks for proof search, certificate checking, countermodel
//! extraction, and cut-degree reduction.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use igl_core::certificates::{contra_loeb_certificate, loeb_certificate};
use igl_core::countermodel::extract_countermodel;
use igl_core::cutelim::{degree_reduce_bounded, embed_multisuccedent, DegreeReduceOutcome};
use igl_core::cyclic::check_progress;
use igl_core::formula::{axiom_loeb, contra_loeb};
use igl_core::prover::{prove, SearchConfig, SearchOutcome};
use igl_core::SystemId;

fn search(c: &mut Criterion) {
    let loeb = axiom_loeb();
    let igl = SearchConfig::for_system(SystemId::IK4);
    c.bench_function("prove loeb igl", |b| {
        b.iter(|| prove(black_box(&loeb), &igl))
    });

    let contra = contra_loeb();
    let gl = SearchConfig::for_system(SystemId::K4);
    c.bench_function("prove contra-loeb gl", |b| {
        b.iter(|| prove(black_box(&contra), &gl))
    });

    // the refutable case exercises the full denier construction
    c.bench_function("refute contra-loeb igl", |b| {
        b.iter(|| prove(black_box(&contra), &igl))
    });
}

fn checking(c: &mut Criterion) {
    let loeb = loeb_certificate();
    c.bench_function("check_progress loeb certificate", |b| {
        b.iter(|| check_progress(black_box(&loeb)))
    });

    let contra = contra_loeb_certificate();
    c.bench_function("check_local+progress contra-loeb certificate", |b| {
        b.iter(|| {
            let p = black_box(&contra);
            p.check_local().unwrap();
            check_progress(p).unwrap();
        })
    });

    let igl = SearchConfig::for_system(SystemId::IK4);
    let SearchOutcome::Refutable(denier) = prove(&contra_loeb(), &igl) else {
        panic!("contra-loeb must be refutable");
    };
    c.bench_function("extract_countermodel contra-loeb", |b| {
        b.iter(|| extract_countermodel(black_box(&denier)))
    });
}

fn cut_reduction(c: &mut Criterion) {
    let migl = SearchConfig::for_system(SystemId::MIK4);
    let SearchOutcome::Provable(proof) = prove(&axiom_loeb(), &migl) else {
        panic!("loeb must be provable");
    };
    let embedded = embed_multisuccedent(&proof).expect("embedding succeeds");
    let mut group = c.benchmark_group("cut reduction");
    group.sample_size(10);
    group.bench_function("embed loeb migl", |b| {
        b.iter(|| embed_multisuccedent(black_box(&proof)))
    });
    group.bench_function("degree_reduce loeb", |b| {
        b.iter(|| {
            let out = degree_reduce_bounded(black_box(&embedded), 12);
            assert!(matches!(out, DegreeReduceOutcome::Done(_)));
        })
    });
    group.finish();
}

criterion_group!(benches, search, checking, cut_reduction);
criterion_main!(benches);
