//! Battery lifetime of a recipient that sends periodic uplink reports and
//! receives a firmware update every month or so.
//!
//! ```text
//! L ≈ C_b / (I_t Δ_t + I_r Δ_r + I_s Δ_s)       years
//! Δ_t = 365 (24 / T_m) l_f / 3600,  Δ_r = 12 N_u R_u,  Δ_s = 8760 - Δ_t - Δ_r
//! ```
//!
//! with all Δ in hours per year and `R_u` the hours spent receiving per
//! update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::{PhyProfile, SfIndex};

pub const HOURS_PER_YEAR: f64 = 365.0 * 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Currents {
    pub tx: f64,
    pub rx: f64,
    pub sleep: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DutyProfile {
    pub battery_mah: f64,
    pub updates_per_month: f64,
    pub uplink_period_hr: f64,
    pub uplink_payload_bytes: u32,
    pub uplink_sf: SfIndex,
    /// Current draws in mA.
    pub currents_ma: Currents,
}

impl DutyProfile {
    pub fn validate(&self) -> Result<()> {
        let c = self.currents_ma;
        let positive = [self.battery_mah, self.uplink_period_hr, c.tx, c.rx, c.sleep];
        if positive.iter().any(|v| !(*v > 0.0)) || !(self.updates_per_month >= 0.0) {
            return Err(Error::InvalidParameter(format!("duty profile values must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Hours per year spent in each radio state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateHours {
    pub tx: f64,
    pub rx: f64,
    pub sleep: f64,
}

pub fn state_hours(profile: &DutyProfile, rx_hours_per_update: f64, phy: &PhyProfile) -> Result<StateHours> {
    profile.validate()?;
    if !(rx_hours_per_update >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "receive hours per update must be non-negative, got {rx_hours_per_update}"
        )));
    }
    let l_f = phy.frame_airtime(profile.uplink_sf, profile.uplink_payload_bytes)?;
    let tx = 365.0 * (24.0 / profile.uplink_period_hr) * (l_f / 3600.0);
    let rx = 12.0 * profile.updates_per_month * rx_hours_per_update;
    let sleep = HOURS_PER_YEAR - (tx + rx);
    if sleep < 0.0 {
        return Err(Error::InfeasibleProfile(format!(
            "transmit {tx:.1} h + receive {rx:.1} h exceed a year"
        )));
    }
    Ok(StateHours { tx, rx, sleep })
}

pub fn battery_lifetime_years(profile: &DutyProfile, rx_hours_per_update: f64, phy: &PhyProfile) -> Result<f64> {
    let h = state_hours(profile, rx_hours_per_update, phy)?;
    let c = profile.currents_ma;
    Ok(profile.battery_mah / (c.tx * h.tx + c.rx * h.rx + c.sleep * h.sleep))
}

/// Receive hours per update from the energy spent receiving, J.
pub fn rx_hours_from_energy(rx_energy_j: f64, rx_power_w: f64) -> f64 {
    rx_energy_j / rx_power_w / 3600.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::tests::profile as phy;

    fn duty() -> DutyProfile {
        DutyProfile {
            battery_mah: 1200.0,
            updates_per_month: 1.0,
            uplink_period_hr: 0.5,
            uplink_payload_bytes: 50,
            uplink_sf: SfIndex::new(12).unwrap(),
            currents_ma: Currents { tx: 83.0, rx: 38.0, sleep: 0.045 },
        }
    }

    #[test]
    fn equal_currents_ignore_split() {
        let mut d = duty();
        d.currents_ma = Currents { tx: 2.0, rx: 2.0, sleep: 2.0 };
        for ru in [0.0, 1.0, 30.0] {
            let l = battery_lifetime_years(&d, ru, &phy()).unwrap();
            assert!((l - 1200.0 / (2.0 * 8760.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn sleep_only_limit() {
        let mut d = duty();
        d.uplink_period_hr = 1e15;
        let l = battery_lifetime_years(&d, 0.0, &phy()).unwrap();
        assert!((l - 1200.0 / (0.045 * 8760.0)).abs() < 1e-6);
    }

    #[test]
    fn monotone_in_receive_hours() {
        let d = duty();
        let a = battery_lifetime_years(&d, 0.1, &phy()).unwrap();
        let b = battery_lifetime_years(&d, 0.2, &phy()).unwrap();
        assert!(b < a);
        let mut d2 = duty();
        d2.updates_per_month = 2.0;
        assert!(battery_lifetime_years(&d2, 0.1, &phy()).unwrap() < a);
    }

    #[test]
    fn infeasible_profile() {
        let d = duty();
        assert!(matches!(battery_lifetime_years(&d, 800.0, &phy()), Err(Error::InfeasibleProfile(_))));
    }
}
