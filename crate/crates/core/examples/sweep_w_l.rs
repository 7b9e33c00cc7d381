//! Average metrics of the proposed scheme over a small (w, L) grid.

use lora_fuota::config::{default_spec, Mode};
use lora_fuota::phy::SfIndex;
use lora_fuota::runner::sweep_rows;

fn main() -> lora_fuota::error::Result<()> {
    let mut spec = default_spec("sweep", Mode::Analysis);
    spec.sweep.w = vec![100, 200, 300, 500, 800];
    spec.sweep.l = vec![SfIndex::new(7)?, SfIndex::new(9)?, SfIndex::new(11)?];
    let (rows, _) = sweep_rows(&spec, Mode::Analysis)?;
    println!(" L    w  avg_ee  avg_dt_h");
    for r in rows {
        println!(
            "{:>2} {:>4}  {:>6.2}  {:>8.2}",
            r.l,
            r.w,
            r.avg_ee_norm_analysis.unwrap_or(f64::NAN),
            r.avg_dt_hours_analysis.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
