//! Interference radius, interferer count distribution and per-pair
//! collision probabilities.

use lora_fuota::analysis::{Analyzer, Segment};
use lora_fuota::config::{default_spec, Mode};
use lora_fuota::phy::SfIndex;

fn main() -> lora_fuota::error::Result<()> {
    let spec = default_spec("interference", Mode::Analysis);
    let an = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    println!("interference radius {:.1} m", an.interference_radius());
    println!("mean interferers    {:.1}", an.mean_interferers());
    let (lo, w) = an.interferer_support();
    println!("poisson support     n = {lo}..{} ({} terms)", lo + w.len() as u64 - 1, w.len());
    println!("\ncollision probability with an SF12 desired frame");
    println!("interferer  preamble    frame");
    let d = SfIndex::MAX;
    for j in SfIndex::all() {
        println!(
            "SF{:<8}  {:.3e}  {:.3e}",
            j.value(),
            an.collision_probability(d, j, Segment::Preamble),
            an.collision_probability(d, j, Segment::Frame)
        );
    }
    Ok(())
}
