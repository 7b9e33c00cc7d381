//! The `analyze` pipeline as a library call: writes CSV tables and a
//! manifest to a directory, then compares the run against itself.

use lora_fuota::config::{default_spec, Mode};
use lora_fuota::runner::{compare_files, run_tables};

fn main() -> lora_fuota::error::Result<()> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("fuota-example"));
    let mut spec = default_spec("pipeline", Mode::Analysis);
    spec.layout.distance_bins = 5;
    let run = run_tables("analyze", &spec, Mode::Analysis, &out)?;
    for f in &run.files {
        println!("wrote {}", f.display());
    }
    let csv = out.join("per_distance.csv");
    let report = compare_files(&csv, &csv, 0.0)?;
    println!("self-compare: {} cells, pass = {}", report.rows.len(), report.pass());
    Ok(())
}
