//! Average energy and delivery time of every configured scheme.
//! Pass a run count to add simulation: `cargo run --example benchmark_suite -- 20`.

use lora_fuota::benchmarks::evaluate_suite;
use lora_fuota::config::{default_spec, Mode};

fn main() -> lora_fuota::error::Result<()> {
    let runs: Option<u32> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mode = if runs.is_some() { Mode::Both } else { Mode::Analysis };
    let mut spec = default_spec("suite", mode);
    if let Some(r) = runs {
        spec.experiment.runs = r;
    }
    let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
    println!("{:<18} {:>8} {:>8} {:>8} {:>8}", "scheme", "ee_an", "dt_an", "ee_sim", "dt_sim");
    for e in evaluate_suite(&spec, mode)? {
        let r = e.row;
        println!(
            "{:<18} {:>8} {:>8} {:>8} {:>8}",
            r.scheme,
            fmt(r.ee_norm_analysis),
            fmt(r.dt_hours_analysis),
            fmt(r.ee_norm_sim),
            fmt(r.dt_hours_sim)
        );
    }
    Ok(())
}
