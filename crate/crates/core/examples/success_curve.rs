//! Frame success probability against distance for each SF: averaged over
//! the Poisson interferer count, and conditioned on the mean count.

use lora_fuota::analysis::Analyzer;
use lora_fuota::config::{default_spec, Mode};
use lora_fuota::phy::SfIndex;

fn main() -> lora_fuota::error::Result<()> {
    let spec = default_spec("success", Mode::Analysis);
    let an = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    let n = an.mean_interferers().round() as u64;
    println!("mean interferer count {n}");
    print!("{:>6}", "d_m");
    for sf in SfIndex::all() {
        print!("  SF{:<2} avg  SF{:<2} n", sf.value(), sf.value());
    }
    println!();
    for d in [50.0, 250.0, 500.0, 750.0, 1000.0] {
        print!("{d:>6.0}");
        for sf in SfIndex::all() {
            print!("  {:>8.4}  {:>7.4}", an.deconditioned_frame_success(d, sf)?, an.frame_success(d, n, sf)?);
        }
        println!();
    }
    Ok(())
}
