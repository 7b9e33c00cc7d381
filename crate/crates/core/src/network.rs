use serde::{Deserialize, Serialize};

use crate::channel::{InterfererField, LinkModel};
use crate::error::{Error, Result};
use crate::fec::RatelessModel;
use crate::phy::SfIndex;

/// Deployment, traffic and session parameters shared by the analysis and
/// the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Firmware data block size in bytes.
    pub image_bytes: u32,
    /// Gateway duty-cycle limit in percent.
    pub duty_cycle_pct: f64,
    /// Total airtime of received downlink control frames per session, s.
    pub control_airtime_s: f64,
    pub ack_payload_bytes: u32,
    pub ack_sf: SfIndex,
    pub link: LinkModel,
    pub interferers: InterfererField,
    pub fec: RatelessModel,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.interferers.validate()?;
        self.fec.validate()?;
        if self.image_bytes == 0 {
            return Err(Error::InvalidParameter("image_bytes must be positive".into()));
        }
        if !(self.duty_cycle_pct > 0.0 && self.duty_cycle_pct <= 100.0) {
            return Err(Error::InvalidParameter(format!(
                "duty_cycle_pct must lie in (0, 100], got {}",
                self.duty_cycle_pct
            )));
        }
        if !(self.control_airtime_s >= 0.0) {
            return Err(Error::InvalidParameter("control_airtime_s must be non-negative".into()));
        }
        Ok(())
    }

    /// Bytes per fragment, `ceil(b / k)`.
    pub fn fragment_bytes(&self) -> u32 {
        self.image_bytes.div_ceil(self.fec.k)
    }

    /// Wall-clock time per second of gateway airtime, `100 / DC_max`.
    pub fn pacing_factor(&self) -> f64 {
        100.0 / self.duty_cycle_pct
    }
}
