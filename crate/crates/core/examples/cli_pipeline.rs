// The full pipeline through the command-line driver: synthetic corpus,
// ingest, comparisons, training, embeddings, index and suggestions.
//
// Each call is equivalent to running the `stylerank` binary with the same
// arguments.

use std::error::Error;
use std::path::Path;

use stylerank::cli::main_with_args;

fn run(dir: &Path, args: &str) -> Result<(), Box<dyn Error>> {
    let mut argv = vec!["stylerank".to_string()];
    for a in args.split_whitespace() {
        argv.push(a.replace("{dir}", &dir.display().to_string()));
    }
    println!("$ {}", argv.join(" "));
    match main_with_args(argv.into_iter().map(Into::into).collect()) {
        0 => Ok(()),
        code => Err(format!("exit code {code}").into()),
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let tmp = tempfile::tempdir()?;
    let dir = tmp.path();
    std::fs::write(
        dir.join("train.conf"),
        "# shared training settings\nlearning_rate = 0.001\nepochs = 10\n",
    )?;

    run(
        dir,
        "synth --out-dir {dir} --images 300 --feature-dim 16 --items 40 --seed 1",
    )?;
    run(
        dir,
        "ingest --annotations {dir}/annotations.jsonl --seed 2 --out {dir}/dataset.json",
    )?;
    run(
        dir,
        "gen-comparisons --dataset {dir}/dataset.json --t 3 --n 1500 --seed 7 --out {dir}/comparisons.jsonl",
    )?;
    run(
        dir,
        "train --config {dir}/train.conf --dataset {dir}/dataset.json --features {dir}/features.bin \
         --comparisons {dir}/comparisons.jsonl --seed 3 --out {dir}/head.ckpt",
    )?;
    run(
        dir,
        "embed --checkpoint {dir}/head.ckpt --features {dir}/features.bin --out {dir}/embeddings.bin",
    )?;
    run(
        dir,
        "build-index --registry {dir}/registry.json --embeddings {dir}/embeddings.bin --out {dir}/index.bin",
    )?;
    run(
        dir,
        "suggest --index {dir}/index.bin --seed-item sofa_0 --class coffee_table --k 3",
    )?;
    run(
        dir,
        "eval --checkpoint {dir}/head.ckpt --dataset {dir}/dataset.json --features {dir}/features.bin \
         --l-min 6,6,6,6 --out {dir}/report.json",
    )?;
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json"))?)?;
    println!("test accuracy {}", report["classification"]["overall"]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
