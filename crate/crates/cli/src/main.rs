use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use flowcode_core::augment::augment_corpus;
use flowcode_core::code2flow::lower;
use flowcode_core::codeparse::{parse, print_canonical};
use flowcode_core::corpus::{self, read_jsonl, write_jsonl, DatasetRecord, Split, SplitRatio};
use flowcode_core::flow2code::structure;
use flowcode_core::maskgen::{build_pretrain_corpus, DEFAULT_MASK_PROB};
use flowcode_core::metrics::{report, CodeBleuWeights, Prediction};
use flowcode_core::render::{render_png, to_svg};
use flowcode_core::synth::{generate_many, SynthConfig};
use flowcode_core::vision::{recover_file, write_sidecar, OcrAdapter};
use flowcode_core::{encode, EncodingVariant, FlowGraph};

#[derive(Parser)]
#[command(
    name = "flowcode",
    version,
    about = "Convert between flowcharts and code, and build datasets of both"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Svg,
    Png,
}

#[derive(Subcommand)]
enum Command {
    /// Build a corpus from source files or directories of `.py` files.
    Build {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Assign train/test/val splits.
    Split {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "85:10:5")]
        ratio: SplitRatio,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Append renamed variants of every train record.
    Augment {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write masked pretraining samples from the train records.
    Maskgen {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MASK_PROB)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw a graph file, or every record of a corpus, as SVG or PNG. PNG
    /// output also gets a `.gt.json` text sidecar.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "png")]
        format: Format,
        #[arg(long, default_value_t = 2.0)]
        scale: f64,
        /// Only render records with these ids.
        #[arg(long)]
        id: Vec<String>,
    },
    /// Recover a flowchart graph from an image.
    Detect {
        image: PathBuf,
        /// OCR command, run as `<cmd> <image>`. Without it the sidecar is read.
        #[arg(long)]
        adapter: Option<String>,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
    },
    /// Print an encoding of a graph.
    Encode {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "modified")]
        variant: Variant,
    },
    /// Print the flowchart graph of a program.
    Code2flow { source: PathBuf },
    /// Print the program of a flowchart graph.
    Flow2code { graph: PathBuf },
    /// Score predictions against the references of one split.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write random programs as `.py` files.
    Synth {
        #[arg(short, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Variant {
    Tuple,
    String,
    Modified,
}

impl From<Variant> for EncodingVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Tuple => EncodingVariant::Tuple,
            Variant::String => EncodingVariant::String,
            Variant::Modified => EncodingVariant::ModifiedString,
        }
    }
}

/// Reads a file, or standard input for `-`.
fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_graph(path: &Path) -> Result<FlowGraph> {
    FlowGraph::from_json(&read_input(path)?).with_context(|| format!("{} is not a flowchart graph", path.display()))
}

fn read_corpus(path: &Path) -> Result<Vec<DatasetRecord>> {
    read_jsonl(path).with_context(|| format!("reading {}", path.display()))
}

fn write_corpus(path: &Path, items: &[DatasetRecord]) -> Result<()> {
    write_jsonl(path, items).with_context(|| format!("writing {}", path.display()))
}

fn source_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "py"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn build(inputs: &[PathBuf], output: &Path) -> Result<()> {
    let mut programs = Vec::new();
    for f in source_files(inputs)? {
        programs.push((f.display().to_string(), read_input(&f)?));
    }
    let out = corpus::build(&programs);
    for s in &out.skipped {
        eprintln!("skipped {}: {}", s.source, s.reason);
    }
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    write_corpus(output, &out.records)?;
    eprintln!("{} records, {} skipped", out.records.len(), out.skipped.len());
    Ok(())
}

fn augment(input: &Path, output: &Path, seed: u64) -> Result<()> {
    let records = read_corpus(input)?;
    let train: Vec<DatasetRecord> = records
        .iter()
        .filter(|r| r.split == Split::Train && r.provenance.parent_id.is_none())
        .cloned()
        .collect();
    if train.is_empty() {
        bail!("{} has no train records; run `split` first", input.display());
    }
    let augmented = augment_corpus(&train, seed)?;
    let mut out = records;
    out.extend_from_slice(&augmented[train.len()..]);
    write_corpus(output, &out)?;
    eprintln!("{} train records -> {}", train.len(), augmented.len());
    Ok(())
}

fn maskgen(input: &Path, output: &Path, p: f64, seed: u64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        bail!("mask probability {p} is outside [0, 1]");
    }
    let records = read_corpus(input)?;
    let (augmented, train): (Vec<DatasetRecord>, Vec<DatasetRecord>) = records
        .into_iter()
        .filter(|r| r.split == Split::Train)
        .partition(|r| r.provenance.parent_id.is_some());
    let samples = build_pretrain_corpus(&train, &augmented, p, seed)?;
    write_jsonl(output, &samples).with_context(|| format!("writing {}", output.display()))?;
    eprintln!("{} samples", samples.len());
    Ok(())
}

fn render(input: &Path, out_dir: &Path, format: Format, scale: f64, ids: &[String]) -> Result<()> {
    if scale.is_nan() || scale <= 0.0 {
        bail!("scale must be positive");
    }
    let text = read_input(input)?;
    let items: Vec<(String, FlowGraph)> = match FlowGraph::from_json(&text) {
        Ok(g) => {
            let stem = input
                .file_stem()
                .map_or("graph".into(), |s| s.to_string_lossy().into_owned());
            vec![(stem, g)]
        }
        Err(_) => read_corpus(input)?
            .into_iter()
            .filter(|r| ids.is_empty() || ids.contains(&r.id))
            .map(|r| (r.id, r.graph))
            .collect(),
    };
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (name, g) in &items {
        match format {
            Format::Svg => {
                let path = out_dir.join(format!("{name}.svg"));
                fs::write(&path, to_svg(g).with_context(|| format!("rendering {name}"))?)?;
            }
            Format::Png => {
                let path = out_dir.join(format!("{name}.png"));
                let (img, boxes) = render_png(g, scale).with_context(|| format!("rendering {name}"))?;
                img.save(&path).with_context(|| format!("writing {}", path.display()))?;
                write_sidecar(&path, &boxes)?;
            }
        }
    }
    eprintln!("rendered {} graphs into {}", items.len(), out_dir.display());
    Ok(())
}

fn detect(image: &Path, adapter: Option<&str>, variant: Option<Variant>) -> Result<()> {
    let adapter = match adapter {
        Some(cmd) => {
            let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if parts.is_empty() {
                bail!("empty adapter command");
            }
            OcrAdapter::Command(parts)
        }
        None => OcrAdapter::Sidecar,
    };
    let a = recover_file(image, &adapter)?;
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
    match variant {
        Some(v) => println!("{}", encode(&a.graph, v.into())?),
        None => println!("{}", a.graph.to_json()),
    }
    Ok(())
}

fn eval(pred: &Path, reference: &Path, split: Split, output: Option<&Path>) -> Result<()> {
    let predictions: Vec<Prediction> = read_jsonl(pred).with_context(|| format!("reading {}", pred.display()))?;
    let refs: Vec<DatasetRecord> = read_corpus(reference)?
        .into_iter()
        .filter(|r| r.split == split)
        .collect();
    let rep = report(&predictions, &refs, &CodeBleuWeights::default())?;
    let json = serde_json::to_string_pretty(&rep)?;
    match output {
        Some(p) => fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn synth(n: usize, seed: u64, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (i, p) in generate_many(n, seed, &SynthConfig::default()).iter().enumerate() {
        fs::write(out_dir.join(format!("{i:05}_{}.py", p.name)), print_canonical(p))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build { inputs, output } => build(&inputs, &output),
        Command::Split {
            input,
            output,
            ratio,
            seed,
        } => {
            let records = corpus::split(read_corpus(&input)?, ratio, seed)?;
            write_corpus(&output, &records)
        }
        Command::Augment { input, output, seed } => augment(&input, &output, seed),
        Command::Maskgen { input, output, p, seed } => maskgen(&input, &output, p, seed),
        Command::Render {
            input,
            out_dir,
            format,
            scale,
            id,
        } => render(&input, &out_dir, format, scale, &id),
        Command::Detect {
            image,
            adapter,
            variant,
        } => detect(&image, adapter.as_deref(), variant),
        Command::Encode { graph, variant } => {
            println!("{}", encode(&read_graph(&graph)?, variant.into())?);
            Ok(())
        }
        Command::Code2flow { source } => {
            let p = parse(&read_input(&source)?)?;
            println!("{}", lower(&p).to_json());
            Ok(())
        }
        Command::Flow2code { graph } => {
            print!("{}", print_canonical(&structure(&read_graph(&graph)?)?));
            Ok(())
        }
        Command::Eval {
            pred,
            reference,
            split,
            output,
        } => eval(&pred, &reference, split, output.as_deref()),
        Command::Synth { n, seed, out_dir } => synth(n, seed, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
