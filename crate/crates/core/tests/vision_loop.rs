use flowcode_core::code2flow::lower;
use flowcode_core::flowgraph::{is_isomorphic, BlockKind};
use flowcode_core::render::render_png;
use flowcode_core::synth::{generate_many, SynthConfig};
use flowcode_core::vision::recover;

#[test]
fn rendered_synthetic_graphs_are_recovered() {
    let mut failures = Vec::new();
    let programs = generate_many(120, 7, &SynthConfig::default());
    for p in &programs {
        let g = lower(p);
        let (img, boxes) = render_png(&g, 2.0).unwrap();
        match recover(&img, &boxes) {
            Ok(a) if is_isomorphic(&a.graph, &g) => {}
            Ok(_) => failures.push(format!("mismatch ({} nodes)", g.nodes.len())),
            Err(e) => failures.push(format!(
                "{e} ({} nodes, branchy {})",
                g.nodes.len(),
                g.nodes.iter().any(|n| n.kind == BlockKind::Decision)
            )),
        }
    }
    assert!(
        failures.is_empty(),
        "{} of {} failed: {:#?}",
        failures.len(),
        programs.len(),
        &failures[..failures.len().min(10)]
    );
}
