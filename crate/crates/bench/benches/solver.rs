use criterion::{criterion_group, criterion_main, Criterion};

use skillfix::abstraction::{compile_skills, Abstraction, Skill};
use skillfix::logic::Gr1Spec;
use skillfix::synthesis::{check_realizability, SolverOptions};

const FACTORY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/factory");
const MINI: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/mini");

fn compiled(dir: &str) -> Gr1Spec {
    let read = |name: &str| std::fs::read_to_string(format!("{dir}/{name}")).expect("fixture");
    let abs = Abstraction::from_json(&read("abstraction.json")).expect("abstraction");
    let skills = Skill::load_json(&read("skills.json"), &abs).expect("skills");
    let base = Gr1Spec::from_json(&read("spec.json")).expect("spec");
    compile_skills(&abs, &skills, &base).expect("compile")
}

fn solver(c: &mut Criterion) {
    let options = SolverOptions::default();
    let mut group = c.benchmark_group("realizability");
    for (name, dir) in [("mini", MINI), ("factory", FACTORY)] {
        let spec = compiled(dir);
        group.bench_function(name, |b| b.iter(|| check_realizability(&spec, &options).expect("solve")));
    }
    group.finish();
}

criterion_group!(benches, solver);
criterion_main!(benches);
