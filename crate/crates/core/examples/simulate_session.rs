//! One simulated multicast session with a transmission trace and a
//! duty-cycle check.

use lora_fuota::analysis::Analyzer;
use lora_fuota::config::{default_spec, Mode, Placement};
use lora_fuota::schemes::SchemeConfig;
use lora_fuota::sim::{duty_cycle_excess, run_session, RecipientLayout, SimSetup};

fn main() -> lora_fuota::error::Result<()> {
    let spec = default_spec("session", Mode::Simulate);
    let an = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    let scheme = SchemeConfig::proposed(7, 12, 300)?;
    let setup = SimSetup {
        analyzer: &an,
        fec: spec.fec_for(&scheme),
        scheme,
        layout: RecipientLayout::Disc { count: 20, radius_m: 1000.0, placement: Placement::Grid },
        cap_factor: spec.simulation.cap_factor,
        record_trace: true,
    };
    let r = run_session(&setup, 7, 0)?;
    println!("transmissions {}  session {:.2} h  airtime {:.1} s", r.transmissions, r.session_time_s / 3600.0, r.airtime_s);
    let trace = r.trace.as_deref().unwrap_or_default();
    println!("duty-cycle excess {:.3e} s", duty_cycle_excess(trace, spec.network.duty_cycle_pct));
    println!("  d_m  received  ee_norm  done_h");
    for o in &r.recipients {
        println!(
            "{:>5.0}  {:>8}  {:>7.2}  {:>6}",
            o.distance_m,
            o.fragments_received,
            o.energy_fragments_j / an.normalization_energy(),
            o.completed_at_s.map_or("-".into(), |t| format!("{:.2}", t / 3600.0))
        );
    }
    Ok(())
}
