use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use modschrod_core::fit::{synthesize_records, SyntheticSpec};
use modschrod_core::schrodinger::CrankNicolson;
use modschrod_core::*;

fn eikonal(c: &mut Criterion) {
    let mut group = c.benchmark_group("fast_marching");
    for n in [101usize, 201] {
        let g = Grid::uniform(&[n, n], 1.0).unwrap();
        let src = SourceSpec::point(vec![n / 2, n / 2]);
        group.bench_function(format!("{n}x{n}"), |b| {
            b.iter(|| solve_traveltime(black_box(&g), &src, Speed::Uniform(1.0)).unwrap())
        });
    }
    group.finish();
}

fn crank_nicolson(c: &mut Criterion) {
    let consts = PhysicalConstants::codata2018();
    let mut group = c.benchmark_group("crank_nicolson_step");
    for shape in [vec![512usize], vec![64, 64]] {
        let g = Grid::uniform(&shape, 1e-11).unwrap();
        let modes = vec![1; shape.len()];
        let psi = StationaryState::box_mode(&g, &modes, consts.m_e, &consts)
            .unwrap()
            .psi()
            .clone();
        let problem = QuantumProblem::free(g, consts.m_e, 1e-17, &consts).unwrap();
        let stepper = CrankNicolson::new(&problem).unwrap();
        let name = shape
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("x");
        group.bench_function(name, |b| b.iter(|| stepper.step(black_box(&psi)).unwrap()));
    }
    group.finish();
}

fn fit(c: &mut Criterion) {
    let consts = PhysicalConstants::codata2018();
    let spec = SyntheticSpec::new(PerturbationSpeed::finite(1.3e8).unwrap(), 1000, 1, 0.01);
    let records = synthesize_records(&spec, &consts).unwrap();
    c.bench_function("fit_vp_1000_records", |b| {
        b.iter(|| fit_vp(black_box(&records), &consts).unwrap())
    });
}

criterion_group!(benches, eikonal, crank_nicolson, fit);
criterion_main!(benches);
