use proptest::prelude::*;

use flowcode_core::augment::{rename, AugMode, AugmentationSpec};
use flowcode_core::code2flow::lower;
use flowcode_core::codeparse::{canonicalize, interpret, parse, print_canonical, Expr, Stmt, Value};
use flowcode_core::corpus::{split, DatasetRecord, Split, SplitRatio};
use flowcode_core::encode::{decode_modified, encode, EncodingVariant};
use flowcode_core::flow2code::structure;
use flowcode_core::flowgraph::{is_isomorphic, linearize, validate};
use flowcode_core::maskgen::{mask, PretrainRecord, SampleSource, SEP};
use flowcode_core::metrics::{bleu, codebleu, exact_match, CodeBleuWeights};
use flowcode_core::render::{layout, parse_svg, render_png, to_svg, Element};
use flowcode_core::synth::{generate, generate_raw, SynthConfig};
use flowcode_core::vision::recover;

fn program(seed: u64) -> flowcode_core::codeparse::Program {
    generate(seed, &SynthConfig::default())
}

fn arb_mode() -> impl Strategy<Value = AugMode> {
    prop_oneof![Just(AugMode::Functions), Just(AugMode::Variables), Just(AugMode::Both)]
}

fn arb_tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop_oneof![Just(SEP.to_string()), "[a-z]{1,5}", "[0-9]{1,3}", "[-+*/=(),:]"],
        0..80,
    )
}

fn inside(poly: &[(f64, f64)], (x, y): (f64, f64)) -> bool {
    let mut hit = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let ((xi, yi), (xj, yj)) = (poly[i], poly[j]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            hit = !hit;
        }
        j = i;
    }
    hit
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn lowered_graphs_validate_and_linearize(seed in any::<u64>()) {
        let g = lower(&program(seed));
        prop_assert!(validate(&g).is_ok());
        let order = linearize(&g).unwrap();
        prop_assert_eq!(order.len(), g.nodes.len());
        let mut ids: Vec<&str> = order.iter().map(|n| n.id.as_str()).collect();
        prop_assert_eq!(ids[0], g.nodes[g.start_index().unwrap()].id.as_str());
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), g.nodes.len());
    }

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        for p in [program(seed), generate_raw(seed, &SynthConfig::default())] {
            prop_assert_eq!(parse(&print_canonical(&p)).unwrap(), p);
        }
    }

    #[test]
    fn interpretation_is_deterministic(seed in any::<u64>(), a in -20i64..20, b in -20i64..20) {
        let p = program(seed);
        let args: Vec<Value> = p.params.iter().enumerate().map(|(i, _)| Value::Int(if i % 2 == 0 { a } else { b })).collect();
        prop_assert_eq!(interpret(&p, &args, 50_000), interpret(&p, &args, 50_000));
    }

    #[test]
    fn each_simple_statement_adds_one_node(seed in any::<u64>(), v in 0i64..100) {
        let p = program(seed);
        let mut q = p.clone();
        q.body.insert(0, Stmt::Assign { target: "q0".into(), value: Expr::Int(v) });
        prop_assert_eq!(lower(&q).nodes.len(), lower(&p).nodes.len() + 1);
    }

    #[test]
    fn distinct_programs_lower_to_distinct_graphs(a in any::<u64>(), b in any::<u64>()) {
        let (p, q) = (program(a), program(b));
        prop_assume!(print_canonical(&p) != print_canonical(&q));
        prop_assert!(!is_isomorphic(&lower(&p), &lower(&q)));
    }

    #[test]
    fn structuring_inverts_lowering(seed in any::<u64>()) {
        let p = generate_raw(seed, &SynthConfig::default());
        let g = lower(&p);
        let q = structure(&g).unwrap();
        let text = print_canonical(&q);
        prop_assert_eq!(&text, &print_canonical(&canonicalize(&p)));
        prop_assert_eq!(parse(&text).unwrap(), q);
        prop_assert_eq!(print_canonical(&structure(&g).unwrap()), text);
    }

    #[test]
    fn modified_encoding_decodes_to_linear_order(seed in any::<u64>()) {
        let g = lower(&program(seed));
        let pairs = decode_modified(&encode(&g, EncodingVariant::ModifiedString).unwrap()).unwrap();
        let want: Vec<(String, String)> = linearize(&g)
            .unwrap()
            .iter()
            .map(|n| (n.text.clone(), n.kind.shape_token().to_string()))
            .collect();
        prop_assert_eq!(pairs, want);
        for v in [EncodingVariant::Tuple, EncodingVariant::String] {
            let s = encode(&g, v).unwrap();
            prop_assert_eq!(&s, &encode(&g, v).unwrap());
            let shapes = ["OVAL", "RECTANGLE", "PARALLELOGRAM", "DIAMOND"]
                .iter()
                .map(|t| s.matches(t).count())
                .sum::<usize>();
            prop_assert!(shapes >= g.nodes.len());
        }
    }

    #[test]
    fn renaming_preserves_behaviour(seed in any::<u64>(), mode in arb_mode(), rseed in any::<u64>(),
                                    args in prop::collection::vec(-25i64..25, 3)) {
        let p = program(seed);
        let spec = AugmentationSpec { mode, seed: rseed };
        let q = rename(&p, spec);
        prop_assert_eq!(&q, &rename(&p, spec));
        let args: Vec<Value> = args[..p.params.len()].iter().map(|&v| Value::Int(v)).collect();
        let (a, b) = (interpret(&p, &args, 50_000), interpret(&q, &args, 50_000));
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(x), Err(y)) => prop_assert!(x.same_kind(&y)),
            (x, y) => prop_assert!(false, "{x:?} vs {y:?}"),
        }
    }

    #[test]
    fn masking_reconstructs_and_spares_separators(tokens in arb_tokens(), p in 0.0f64..=1.0, seed in any::<u64>()) {
        let s = mask(&tokens, p, seed);
        prop_assert_eq!(s.reconstruct(), tokens.clone());
        prop_assert_eq!(&s, &mask(&tokens, p, seed));
        for &i in &s.mask_positions {
            prop_assert_ne!(tokens[i].as_str(), SEP);
        }
    }

    #[test]
    fn masked_text_unmasks(text in "\\PC{0,120}", seed in any::<u64>()) {
        let r = PretrainRecord::from_text(SampleSource::Code, &text, 0.3, seed);
        prop_assert_eq!(r.unmask(), Some(text));
    }

    #[test]
    fn text_sits_inside_its_block(seed in any::<u64>()) {
        let g = lower(&program(seed));
        let l = layout(&g).unwrap();
        for t in l.texts.iter().filter(|t| t.node.is_some()) {
            let shape = l.shapes.iter().find(|s| Some(s.node) == t.node).unwrap();
            let poly = shape.polygon();
            for corner in [(t.x, t.y), (t.x + t.width(), t.y), (t.x, t.y + t.size), (t.x + t.width(), t.y + t.size)] {
                prop_assert!(inside(&poly, corner), "{:?} outside node {}", corner, shape.node);
            }
        }
        let doc = parse_svg(&to_svg(&g).unwrap()).unwrap();
        let strokes = doc.elements.iter().filter(|e| matches!(e, Element::Stroke { .. })).count();
        prop_assert_eq!(strokes, g.nodes.len() + g.edges.len());
        prop_assert_eq!(l.shapes.len(), g.nodes.len());
        prop_assert_eq!(l.arrows.len(), g.edges.len());
    }

    #[test]
    fn split_partitions_by_the_rounding_rule(n in 0usize..60, seed in any::<u64>()) {
        let recs: Vec<DatasetRecord> = (0..n)
            .map(|i| DatasetRecord::from_source(&format!("def f(x):\n    return x + {i}\n"), "t").unwrap())
            .collect();
        let ratio = SplitRatio::default();
        let out = split(recs.clone(), ratio, seed).unwrap();
        prop_assert_eq!(out.len(), n);
        let count = |s| out.iter().filter(|r| r.split == s).count();
        prop_assert_eq!((count(Split::Train), count(Split::Test), count(Split::Val)), ratio.sizes(n));
        for (a, b) in recs.iter().zip(&out) {
            prop_assert_eq!(&a.id, &b.id);
        }
    }

    #[test]
    fn records_regenerate(seed in any::<u64>()) {
        let r = DatasetRecord::from_program(&program(seed), "synth").unwrap();
        prop_assert!(r.regenerates());
        let back: DatasetRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }
}

fn corpus_pair() -> impl Strategy<Value = (Vec<String>, Vec<String>)> {
    prop::collection::vec((any::<u64>(), any::<u64>()), 1..6).prop_map(|seeds| {
        seeds
            .into_iter()
            .map(|(a, b)| (print_canonical(&program(a)), print_canonical(&program(b))))
            .unzip()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_stay_in_range(texts in prop::collection::vec(("\\PC{0,40}", "\\PC{0,40}"), 1..5)) {
        let (c, r): (Vec<String>, Vec<String>) = texts.into_iter().unzip();
        let b = bleu(&c, &r).unwrap();
        prop_assert!((0.0..=100.0).contains(&b), "bleu {b}");
        let em = exact_match(&c, &r).unwrap();
        prop_assert!((0.0..=100.0).contains(&em));
        prop_assert_eq!(em, exact_match(&r, &c).unwrap());
    }

    #[test]
    fn program_scores_behave((cands, refs) in corpus_pair(), rot in 0usize..6) {
        let w = CodeBleuWeights::default();
        let cb = codebleu(&cands, &refs, &w).unwrap();
        prop_assert!((0.0..=100.0).contains(&cb.score));
        for x in [cb.ngram, cb.weighted_ngram, cb.ast_match, cb.dataflow_match] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!((codebleu(&refs, &refs, &w).unwrap().score - 100.0).abs() < 1e-9);
        prop_assert_eq!(exact_match(&cands, &refs).unwrap(), exact_match(&refs, &cands).unwrap());

        let k = rot % cands.len();
        let (mut c2, mut r2) = (cands.clone(), refs.clone());
        c2.rotate_left(k);
        r2.rotate_left(k);
        prop_assert!((bleu(&cands, &refs).unwrap() - bleu(&c2, &r2).unwrap()).abs() < 1e-9);

        let mut fixed = cands.clone();
        fixed[k] = refs[k].clone();
        let better = codebleu(&fixed, &refs, &w).unwrap();
        prop_assert!(better.ngram >= cb.ngram - 1e-12);
        prop_assert!(better.weighted_ngram >= cb.weighted_ngram - 1e-12);
        prop_assert!(better.ast_match >= cb.ast_match - 1e-12);
        prop_assert!(better.dataflow_match >= cb.dataflow_match - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rendered_graphs_read_back(seed in any::<u64>(), scale in prop_oneof![Just(2.0f64), Just(3.0)]) {
        let g = lower(&program(seed));
        let (img, boxes) = render_png(&g, scale).unwrap();
        let a = recover(&img, &boxes).unwrap();
        prop_assert!(is_isomorphic(&a.graph, &g));
        prop_assert!(a.warnings.is_empty());
    }
}
