use criterion::{black_box, criterion_group, criterion_main, Criterion};

use flowcode_bench::programs;
use flowcode_core::code2flow::lower;
use flowcode_core::codeparse::parse;
use flowcode_core::flow2code::structure;
use flowcode_core::metrics::{bleu, codebleu, CodeBleuWeights};
use flowcode_core::render::{rasterize, text_boxes, to_svg};
use flowcode_core::vision::recover;
use flowcode_core::{encode, EncodingVariant};

fn conversion(c: &mut Criterion) {
    let ps = programs(64);
    let graphs: Vec<_> = ps.iter().map(|(p, _)| lower(p)).collect();
    c.bench_function("parse", |b| {
        b.iter(|| ps.iter().map(|(_, s)| parse(black_box(s)).unwrap()).collect::<Vec<_>>())
    });
    c.bench_function("lower", |b| {
        b.iter(|| ps.iter().map(|(p, _)| lower(black_box(p))).collect::<Vec<_>>())
    });
    c.bench_function("structure", |b| {
        b.iter(|| {
            graphs
                .iter()
                .map(|g| structure(black_box(g)).unwrap())
                .collect::<Vec<_>>()
        })
    });
    c.bench_function("encode_modified", |b| {
        b.iter(|| {
            graphs
                .iter()
                .map(|g| encode(black_box(g), EncodingVariant::ModifiedString).unwrap())
                .collect::<Vec<_>>()
        })
    });
}

fn imaging(c: &mut Criterion) {
    let ps = programs(8);
    let svgs: Vec<String> = ps.iter().map(|(p, _)| to_svg(&lower(p)).unwrap()).collect();
    let rendered: Vec<_> = svgs
        .iter()
        .map(|s| (rasterize(s, 2.0).unwrap(), text_boxes(s, 2.0).unwrap()))
        .collect();
    let mut g = c.benchmark_group("imaging");
    g.sample_size(10);
    g.bench_function("rasterize_x2", |b| {
        b.iter(|| {
            svgs.iter()
                .map(|s| rasterize(black_box(s), 2.0).unwrap())
                .collect::<Vec<_>>()
        })
    });
    g.bench_function("recover_x2", |b| {
        b.iter(|| {
            rendered
                .iter()
                .map(|(img, boxes)| recover(black_box(img), boxes).unwrap())
                .collect::<Vec<_>>()
        })
    });
    g.finish();
}

fn scoring(c: &mut Criterion) {
    let ps = programs(200);
    let refs: Vec<&str> = ps.iter().map(|(_, s)| s.as_str()).collect();
    let mut cands = refs.clone();
    cands.rotate_left(1);
    c.bench_function("bleu_200", |b| b.iter(|| bleu(black_box(&cands), &refs).unwrap()));
    c.bench_function("codebleu_200", |b| {
        b.iter(|| codebleu(black_box(&cands), &refs, &CodeBleuWeights::default()).unwrap())
    });
}

criterion_group!(benches, conversion, imaging, scoring);
criterion_main!(benches);
