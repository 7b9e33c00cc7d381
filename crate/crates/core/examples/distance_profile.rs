//! Analytical energy and delivery time against distance for the proposed
//! round plan and fixed-SF transmission.

use lora_fuota::analysis::Analyzer;
use lora_fuota::config::{default_spec, Mode};
use lora_fuota::schemes::SchemeConfig;

fn main() -> lora_fuota::error::Result<()> {
    let spec = default_spec("profile", Mode::Analysis);
    let an = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    let schemes = [SchemeConfig::proposed(7, 12, 300)?, SchemeConfig::fixed(10)?, SchemeConfig::fixed(12)?];
    for s in &schemes {
        let plan = s.plan().expect("fixed plan");
        let fec = spec.fec_for(s);
        println!("{}", s.label());
        println!("  d_m   ee_norm  dt_hours  final_round");
        for d in [100.0, 300.0, 500.0, 700.0, 900.0, 1000.0] {
            let o = an.evaluate(d, &plan, &fec)?;
            println!(
                "  {d:<5.0} {:>7.2}  {:>8.2}  {:>11}",
                o.energy_fragments_j / an.normalization_energy(),
                o.update_time_s / 3600.0,
                o.round_completed
            );
        }
    }
    Ok(())
}
