//! Battery lifetime of an edge node and a near node under each lifetime
//! scheme, from the analytical receive time per update.

use lora_fuota::config::{default_spec, Mode};
use lora_fuota::runner::lifetime_rows;

fn main() -> lora_fuota::error::Result<()> {
    let spec = default_spec("lifetime", Mode::Analysis);
    let (rows, _) = lifetime_rows(&spec, Mode::Analysis)?;
    println!("{:<18} {:>6} {:>6} {:>10} {:>8}", "scheme", "d_m", "uplink", "rx_h", "years");
    for r in rows {
        println!(
            "{:<18} {:>6.0} {:>6} {:>10.4} {:>8.3}",
            r.scheme,
            r.distance_m,
            format!("SF{}", r.uplink_sf),
            r.rx_hours_analysis.unwrap_or(f64::NAN),
            r.lifetime_years_analysis.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
