use flowcode_core::codeparse::print_canonical;
use flowcode_core::corpus::{DatasetRecord, Split};
use flowcode_core::metrics::{line_count, report, CodeBleuWeights, MetricError, Prediction};
use flowcode_core::synth::{generate_many, SynthConfig};

fn corpus(n: usize) -> Vec<DatasetRecord> {
    generate_many(n, 5, &SynthConfig::default())
        .iter()
        .map(|p| {
            let mut r = DatasetRecord::from_source(&print_canonical(p), "synth").unwrap();
            r.split = Split::Test;
            r
        })
        .collect()
}

fn echo(refs: &[DatasetRecord]) -> Vec<Prediction> {
    refs.iter()
        .map(|r| Prediction {
            id: r.id.clone(),
            code: r.code.clone(),
        })
        .collect()
}

#[test]
fn perfect_predictions_score_100_everywhere() {
    let refs = corpus(60);
    let rep = report(&echo(&refs), &refs, &CodeBleuWeights::default()).unwrap();
    assert_eq!(rep.overall.count, 60);
    assert!((rep.overall.bleu - 100.0).abs() < 1e-9);
    assert!((rep.overall.codebleu.score - 100.0).abs() < 1e-9);
    assert_eq!(rep.overall.em, 100.0);
    let mut binned = 0;
    for bin in &rep.by_length {
        if let Some(s) = &bin.scores {
            binned += s.count;
            assert!((s.bleu - 100.0).abs() < 1e-9 && s.em == 100.0 && (s.codebleu.score - 100.0).abs() < 1e-9);
        }
    }
    assert_eq!(binned, 60);
    let json = serde_json::to_value(&rep).unwrap();
    for key in ["bleu", "codebleu", "em", "by_length"] {
        assert!(json.get(key).is_some(), "report JSON lacks {key}");
    }
}

#[test]
fn ids_must_line_up() {
    let refs = corpus(5);
    let other = vec![Prediction {
        id: "nope".into(),
        code: refs[0].code.clone(),
    }];
    assert!(matches!(
        report(&other, &refs, &CodeBleuWeights::default()),
        Err(MetricError::IdMismatch { .. })
    ));
    let mut partial = echo(&refs);
    partial.pop();
    match report(&partial, &refs, &CodeBleuWeights::default()) {
        Err(MetricError::IdMismatch { missing, unexpected }) => {
            assert_eq!(missing, vec![refs[4].id.clone()]);
            assert!(unexpected.is_empty());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn one_wrong_prediction_lowers_scores_in_its_bin_only() {
    let refs = corpus(30);
    let mut preds = echo(&refs);
    let victim = 3;
    preds[victim].code = "def g():\n    return 0\n".into();
    let rep = report(&preds, &refs, &CodeBleuWeights::default()).unwrap();
    assert!(rep.overall.em < 100.0 && rep.overall.bleu < 100.0);
    let n = line_count(&refs[victim].code);
    for bin in &rep.by_length {
        let Some(s) = &bin.scores else { continue };
        let holds = n >= bin.min && bin.max.is_none_or(|m| n <= m);
        assert_eq!(s.em < 100.0, holds, "bin {}..{:?}", bin.min, bin.max);
    }
}

#[test]
fn short_program_corpus_fills_the_low_bins() {
    // Short programs averaging 4.6 lines land almost entirely in the first
    // two bins.
    let lens = [3usize, 4, 5, 6, 5, 4, 3, 6, 5, 5];
    assert!((lens.iter().sum::<usize>() as f64 / lens.len() as f64 - 4.6).abs() < 1e-9);
    let refs: Vec<DatasetRecord> = lens
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut src = format!("def f{i}(x):\n");
            for k in 0..n - 2 {
                src.push_str(&format!("    x = x + {k}\n"));
            }
            src.push_str("    return x\n");
            let mut r = DatasetRecord::from_source(&src, "t").unwrap();
            assert_eq!(line_count(&r.code), n);
            r.split = Split::Test;
            r
        })
        .collect();
    let rep = report(&echo(&refs), &refs, &CodeBleuWeights::default()).unwrap();
    let counts: Vec<usize> = rep
        .by_length
        .iter()
        .map(|b| b.scores.as_ref().map_or(0, |s| s.count))
        .collect();
    assert_eq!(counts, [2, 8, 0, 0, 0]);
}
