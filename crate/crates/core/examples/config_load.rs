//! Parsing a partial config over the defaults, with strict key checking
//! and a fingerprint of the resolved experiment.

use lora_fuota::config::parse_config;

const USER: &str = r#"
[experiment]
name = "dense"
mode = "both"
runs = 10

[network.interferers]
intensity_per_m2 = 1e-3
"#;

fn main() -> lora_fuota::error::Result<()> {
    let spec = parse_config(USER, "inline")?;
    println!("name {}  mode {:?}  runs {}", spec.experiment.name, spec.experiment.mode, spec.experiment.runs);
    println!("intensity {}  channels {}", spec.network.interferers.intensity_per_m2, spec.network.interferers.channel_count);
    println!("fingerprint {}", spec.fingerprint()?);
    match parse_config("[experiment]\nname='x'\nmode='analysis'\n[layout]\nradius=5\n", "typo") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
