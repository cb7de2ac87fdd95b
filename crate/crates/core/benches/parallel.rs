use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use jetsym::inverse::{inverse_check, CoefficientFamily, ImposedSymmetry};
use jetsym::io::parse;
use jetsym::parallel::Execution;
use jetsym::pde::PdeModel;
use jetsym::reduction::{verify_solution, SolutionCandidate};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn grid_residual(c: &mut Criterion) {
    let m = PdeModel::builtin("convdiff").unwrap();
    let text = "(2*v*t*x - x^2 - y^2 - v^2*t^2 + 2*q1)/(4*t + 2*q2)";
    let ctx = m.parse_context().with_params(["q1", "q2"]);
    let mut s = SolutionCandidate::new("paraboloid", parse(text, &ctx).unwrap(), text);
    s.parameters = vec!["q1".into(), "q2".into()];
    s.positive = vec!["t".into(), "q2".into()];
    let mut g = c.benchmark_group("grid_residual");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 2000), &exec, |b, &e| {
            b.iter(|| verify_solution(&m, &s, 2000, 1e-9, 0, e).unwrap())
        });
    }
    g.finish();
}

fn inverse_sampling(c: &mut Criterion) {
    let s = ImposedSymmetry::builtin("drift").unwrap();
    let f = CoefficientFamily::builtin("drift").unwrap();
    let mut g = c.benchmark_group("inverse_check");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 25), &exec, |b, &e| {
            b.iter(|| inverse_check(&s, &f, 25, 0, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, grid_residual, inverse_sampling);
criterion_main!(benches);
