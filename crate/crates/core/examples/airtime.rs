//! Frame airtime and receive energy per spreading factor for one fragment.

use lora_fuota::config::{default_spec, Mode};
use lora_fuota::phy::{FrameTable, SfIndex};

fn main() -> lora_fuota::error::Result<()> {
    let spec = default_spec("airtime", Mode::Analysis);
    let bytes = spec.network.fragment_bytes();
    let t = FrameTable::new(&spec.phy, bytes)?;
    println!("payload {bytes} B");
    println!("sf  preamble_ms  frame_ms  e_frame_mJ  e_preamble_mJ");
    for sf in SfIndex::all() {
        println!(
            "{:>2}  {:>11.3}  {:>8.3}  {:>10.3}  {:>13.3}",
            sf.value(),
            t.preamble(sf) * 1e3,
            t.frame(sf) * 1e3,
            t.e_frame(sf) * 1e3,
            t.e_preamble(sf) * 1e3
        );
    }
    Ok(())
}
