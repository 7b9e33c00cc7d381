//! LoRa physical-layer arithmetic.
//!
//! Frame airtime follows the Semtech time-on-air expression, written per
//! spreading factor `i` as
//!
//! ```text
//! l_pr(i)    = (n_pr + 4.25) * 2^i / BW
//! l_pl(i, b) = [8 + max(ceil((2b - i - 5h + 11) / (i - 2y)) * (c + 4), 0)] * 2^i / BW
//! l_fr(i, b) = l_pr(i) + l_pl(i, b)
//! ```
//!
//! with `h = 0` meaning the explicit header is present and `y = 1` enabling
//! low-data-rate optimisation. Receiver sensitivities and capture thresholds
//! are carried by [`PhyProfile`] and always come from configuration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of LoRa spreading factors (SF7 through SF12).
pub const SF_COUNT: usize = 6;

/// A LoRa spreading factor in `7..=12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SfIndex(u8);

impl SfIndex {
    pub const MIN: SfIndex = SfIndex(7);
    pub const MAX: SfIndex = SfIndex(12);

    pub fn new(value: u8) -> Result<Self> {
        if (7..=12).contains(&value) {
            Ok(SfIndex(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "spreading factor {value} outside 7..=12"
            )))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Zero-based position, SF7 maps to 0.
    pub fn index(self) -> usize {
        (self.0 - 7) as usize
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < SF_COUNT, "sf index {index} out of range");
        SfIndex(index as u8 + 7)
    }

    /// All spreading factors in ascending order.
    pub fn all() -> impl DoubleEndedIterator<Item = SfIndex> + ExactSizeIterator {
        (7u8..=12).map(SfIndex)
    }

    /// Spreading factors in `from..=to`.
    pub fn range(from: SfIndex, to: SfIndex) -> impl DoubleEndedIterator<Item = SfIndex> {
        (from.0..=to.0).map(SfIndex)
    }

    pub fn saturating_add(self, rounds: usize) -> SfIndex {
        SfIndex((self.0 as usize + rounds).min(12) as u8)
    }
}

impl TryFrom<u8> for SfIndex {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        SfIndex::new(value)
    }
}

impl From<SfIndex> for u8 {
    fn from(sf: SfIndex) -> u8 {
        sf.0
    }
}

impl fmt::Display for SfIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SF{}", self.0)
    }
}

/// Per-SF airtime parameters, receiver thresholds and radio power draws.
///
/// Per-SF arrays are indexed by [`SfIndex::index`], i.e. position 0 is SF7.
/// `capture_threshold_db[i][j]` is the minimum desired-to-interferer power
/// ratio for a desired SF `i` frame to survive an overlapping SF `j` frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhyProfile {
    pub bandwidth_hz: f64,
    pub preamble_symbols: u32,
    /// 0 when the explicit header is present, 1 when it is omitted.
    pub header_flag: u8,
    pub ldro_flag_per_sf: [u8; SF_COUNT],
    /// Coding rate 4/(4+c), `c` in `1..=4`.
    pub coding_rate_index: u8,
    pub sensitivity_dbm: [f64; SF_COUNT],
    pub capture_threshold_db: [[f64; SF_COUNT]; SF_COUNT],
    /// Power drawn while demodulating, W.
    pub rx_power_w: f64,
    /// Power drawn while transmitting, W.
    pub tx_power_w: f64,
}

impl PhyProfile {
    /// Checks the profile invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return bad(format!("bandwidth_hz must be positive, got {}", self.bandwidth_hz));
        }
        if !(1..=4).contains(&self.coding_rate_index) {
            return bad(format!(
                "coding_rate_index must be in 1..=4, got {}",
                self.coding_rate_index
            ));
        }
        if self.header_flag > 1 {
            return bad(format!("header_flag must be 0 or 1, got {}", self.header_flag));
        }
        if let Some(y) = self.ldro_flag_per_sf.iter().find(|&&y| y > 1) {
            return bad(format!("ldro flags must be 0 or 1, got {y}"));
        }
        for pair in self.sensitivity_dbm.windows(2) {
            if !(pair[0] > pair[1]) {
                return bad(format!(
                    "sensitivity must strictly improve with SF, got {:?}",
                    self.sensitivity_dbm
                ));
            }
        }
        if self
            .capture_threshold_db
            .iter()
            .flatten()
            .chain(self.sensitivity_dbm.iter())
            .any(|v| !v.is_finite())
        {
            return bad("sensitivity and capture thresholds must be finite".into());
        }
        if self.rx_power_w < 0.0 || self.tx_power_w < 0.0 {
            return bad("radio power draws must be non-negative".into());
        }
        Ok(())
    }

    pub fn symbol_duration(&self, sf: SfIndex) -> f64 {
        f64::from(1u32 << sf.value()) / self.bandwidth_hz
    }

    /// Preamble duration in seconds.
    pub fn preamble_duration(&self, sf: SfIndex) -> f64 {
        (f64::from(self.preamble_symbols) + 4.25) * self.symbol_duration(sf)
    }

    /// Number of payload symbols (including the 8 fixed symbols).
    pub fn payload_symbols(&self, sf: SfIndex, payload_bytes: u32) -> Result<u64> {
        let i = i64::from(sf.value());
        let y = i64::from(self.ldro_flag_per_sf[sf.index()]);
        let h = i64::from(self.header_flag);
        let denom = i - 2 * y;
        if denom <= 0 {
            return Err(Error::InvalidParameter(format!(
                "non-positive payload symbol divisor for {sf}"
            )));
        }
        let numer = 2 * i64::from(payload_bytes) - i - 5 * h + 11;
        let blocks = if numer <= 0 { 0 } else { (numer + denom - 1) / denom };
        Ok(8 + blocks as u64 * (u64::from(self.coding_rate_index) + 4))
    }

    /// Payload duration in seconds.
    pub fn payload_duration(&self, sf: SfIndex, payload_bytes: u32) -> Result<f64> {
        Ok(self.payload_symbols(sf, payload_bytes)? as f64 * self.symbol_duration(sf))
    }

    /// Full frame airtime in seconds.
    pub fn frame_airtime(&self, sf: SfIndex, payload_bytes: u32) -> Result<f64> {
        Ok(self.preamble_duration(sf) + self.payload_duration(sf, payload_bytes)?)
    }

    /// Energy spent demodulating a whole frame.
    pub fn rx_energy_frame(&self, sf: SfIndex, payload_bytes: u32) -> Result<f64> {
        Ok(self.rx_power_w * self.frame_airtime(sf, payload_bytes)?)
    }

    /// Energy spent on the preamble only (acquisition failed).
    pub fn rx_energy_preamble(&self, sf: SfIndex) -> f64 {
        self.rx_power_w * self.preamble_duration(sf)
    }

    /// Receiver sensitivity in watts.
    pub fn sensitivity_w(&self, sf: SfIndex) -> f64 {
        dbm_to_watts(self.sensitivity_dbm[sf.index()])
    }

    /// Linear capture threshold for a desired SF against an interfering SF.
    pub fn capture_ratio(&self, desired: SfIndex, interferer: SfIndex) -> f64 {
        db_to_linear(self.capture_threshold_db[desired.index()][interferer.index()])
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Precomputed airtimes and energies for one payload size across all SFs.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTable {
    pub payload_bytes: u32,
    pub preamble_s: [f64; SF_COUNT],
    pub frame_s: [f64; SF_COUNT],
    pub energy_preamble_j: [f64; SF_COUNT],
    pub energy_frame_j: [f64; SF_COUNT],
}

impl FrameTable {
    pub fn new(profile: &PhyProfile, payload_bytes: u32) -> Result<Self> {
        let mut table = FrameTable {
            payload_bytes,
            preamble_s: [0.0; SF_COUNT],
            frame_s: [0.0; SF_COUNT],
            energy_preamble_j: [0.0; SF_COUNT],
            energy_frame_j: [0.0; SF_COUNT],
        };
        for sf in SfIndex::all() {
            let i = sf.index();
            table.preamble_s[i] = profile.preamble_duration(sf);
            table.frame_s[i] = profile.frame_airtime(sf, payload_bytes)?;
            table.energy_preamble_j[i] = profile.rx_energy_preamble(sf);
            table.energy_frame_j[i] = profile.rx_energy_frame(sf, payload_bytes)?;
        }
        Ok(table)
    }

    pub fn frame(&self, sf: SfIndex) -> f64 {
        self.frame_s[sf.index()]
    }

    pub fn preamble(&self, sf: SfIndex) -> f64 {
        self.preamble_s[sf.index()]
    }

    pub fn e_frame(&self, sf: SfIndex) -> f64 {
        self.energy_frame_j[sf.index()]
    }

    pub fn e_preamble(&self, sf: SfIndex) -> f64 {
        self.energy_preamble_j[sf.index()]
    }
}
