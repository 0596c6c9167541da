//! Shared inputs for the pipeline benchmarks.

use flowcode_core::codeparse::{print_canonical, Program};
use flowcode_core::synth::{generate_many, SynthConfig};

/// Fixed synthetic programs with their source text.
pub fn programs(n: usize) -> Vec<(Program, String)> {
    generate_many(n, 2024, &SynthConfig::default())
        .into_iter()
        .map(|p| {
            let src = print_canonical(&p);
            (p, src)
        })
        .collect()
}
