//! SF chosen for each distance by the energy and latency group criteria.

use lora_fuota::analysis::Analyzer;
use lora_fuota::benchmarks::group_assignments;
use lora_fuota::config::{default_spec, Mode};
use lora_fuota::schemes::{GroupCriterion, SchemeConfig};

fn main() -> lora_fuota::error::Result<()> {
    let spec = default_spec("groups", Mode::Analysis);
    let an = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    let distances: Vec<f64> = (1..=10).map(|i| i as f64 * 100.0).collect();
    for c in [GroupCriterion::Energy, GroupCriterion::Latency] {
        let s = SchemeConfig::group(c);
        let sfs = group_assignments(&an, &s, spec.network.fec.k, &distances)?;
        let cells: Vec<String> = distances.iter().zip(&sfs).map(|(d, sf)| format!("{d:.0}:SF{}", sf.value())).collect();
        println!("{:<5} {}", s.label(), cells.join(" "));
    }
    Ok(())
}
