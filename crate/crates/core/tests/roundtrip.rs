use flowcode_core::code2flow::lower;
use flowcode_core::codeparse::{canonicalize, parse, print_canonical};
use flowcode_core::flow2code::structure;
use flowcode_core::synth::{generate_many, generate_raw, SynthConfig};

#[test]
fn synthetic_programs_round_trip() {
    let mut failures = Vec::new();
    for p in generate_many(1000, 42, &SynthConfig::default()) {
        let want = print_canonical(&canonicalize(&p));
        match structure(&lower(&p)) {
            Ok(q) if print_canonical(&q) == want => {}
            Ok(q) => failures.push(format!("mismatch:\n{want}---\n{}", print_canonical(&q))),
            Err(e) => failures.push(format!("error {e}:\n{want}")),
        }
    }
    assert!(
        failures.is_empty(),
        "{} failures, first:\n{}",
        failures.len(),
        failures[0]
    );
}

#[test]
fn raw_programs_reach_their_canonical_form() {
    let cfg = SynthConfig::default();
    let mut saw_for = false;
    for seed in 0..300 {
        let p = generate_raw(seed, &cfg);
        let src = print_canonical(&p);
        saw_for |= src.contains("for ");
        assert_eq!(print_canonical(&parse(&src).unwrap()), src);
        let q = structure(&lower(&p)).unwrap();
        assert_eq!(print_canonical(&q), print_canonical(&canonicalize(&p)), "{src}");
    }
    assert!(saw_for);
}
