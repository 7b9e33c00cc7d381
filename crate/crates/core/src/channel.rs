//! Link geometry and randomness: path loss with Rayleigh block fading, the
//! interference radius, and the Poisson field of interferers around a
//! recipient.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::phy::{PhyProfile, SfIndex, SF_COUNT};

/// Path-loss link: `R = gamma0 * p_t * A * d^-alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkModel {
    pub path_loss_exponent: f64,
    pub gamma0: f64,
    /// Radiated power, W.
    pub tx_rf_power_w: f64,
}

impl LinkModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss_exponent > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "path_loss_exponent must exceed 2, got {}",
                self.path_loss_exponent
            )));
        }
        if !(self.gamma0 > 0.0) || !(self.tx_rf_power_w > 0.0) {
            return Err(Error::InvalidParameter(
                "gamma0 and tx_rf_power_w must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Link constant from antenna gains and wavelength, `g_t g_r λ / 4π`.
    pub fn gamma0_from_antennas(gain_tx: f64, gain_rx: f64, wavelength_m: f64) -> f64 {
        gain_tx * gain_rx * wavelength_m / (4.0 * PI)
    }

    /// Mean received power (unit fading) at `distance_m`.
    pub fn mean_power(&self, distance_m: f64) -> f64 {
        self.gamma0 * self.tx_rf_power_w * distance_m.powf(-self.path_loss_exponent)
    }

    pub fn received_power(&self, distance_m: f64, fading: f64) -> Result<f64> {
        if !(distance_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "distance must be positive, got {distance_m}"
            )));
        }
        if !(fading >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fading coefficient must be non-negative, got {fading}"
            )));
        }
        Ok(fading * self.mean_power(distance_m))
    }

    /// Fading level `A` needed to reach `threshold_w` at `distance_m`.
    pub fn fading_threshold(&self, distance_m: f64, threshold_w: f64) -> f64 {
        threshold_w * distance_m.powf(self.path_loss_exponent) / (self.gamma0 * self.tx_rf_power_w)
    }

    /// Probability that the received power reaches `threshold_w`.
    pub fn detection_probability(&self, distance_m: f64, threshold_w: f64) -> f64 {
        (-self.fading_threshold(distance_m, threshold_w)).exp()
    }
}

/// Unit-mean exponential fading power (Rayleigh amplitude).
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Poisson field of interfering transmitters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfererField {
    pub intensity_per_m2: f64,
    pub frame_rate_hz: f64,
    pub channel_count: u32,
    /// Probability of each SF, SF7 first.
    pub sf_probabilities: [f64; SF_COUNT],
    /// Payload carried by interfering frames; sets their mean duration.
    pub payload_bytes: u32,
    pub detection_epsilon: f64,
}

impl InterfererField {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.intensity_per_m2 >= 0.0) || !(self.frame_rate_hz >= 0.0) {
            return bad("interferer intensity and frame rate must be non-negative".into());
        }
        if self.channel_count < 1 {
            return bad("channel_count must be at least 1".into());
        }
        if self.sf_probabilities.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return bad(format!("bad SF probabilities {:?}", self.sf_probabilities));
        }
        let total: f64 = self.sf_probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("SF probabilities sum to {total}, expected 1"));
        }
        if !(self.detection_epsilon > 0.0 && self.detection_epsilon < 1.0) {
            return bad(format!(
                "detection_epsilon must lie in (0, 1), got {}",
                self.detection_epsilon
            ));
        }
        Ok(())
    }

    /// Mean interfering-frame duration per SF.
    pub fn mean_frame_durations(&self, phy: &PhyProfile) -> Result<[f64; SF_COUNT]> {
        let mut out = [0.0; SF_COUNT];
        for sf in SfIndex::all() {
            out[sf.index()] = phy.frame_airtime(sf, self.payload_bytes)?;
        }
        Ok(out)
    }

    /// Expected interferer count inside a disc of `radius_m`.
    pub fn mean_count(&self, radius_m: f64) -> f64 {
        self.intensity_per_m2 * PI * radius_m * radius_m
    }
}

/// Largest distance at which an interferer still clears `zeta12_w` with
/// probability at least `δ`: `(γ0 p_t ln(1/δ) / ζ12)^(1/α)`.
pub fn interference_radius(link: &LinkModel, field: &InterfererField, zeta12_w: f64) -> f64 {
    let delta = field.detection_epsilon;
    (link.gamma0 * link.tx_rf_power_w * (1.0 / delta).ln() / zeta12_w)
        .powf(1.0 / link.path_loss_exponent)
}

/// Distances of the interferers inside `radius_m`: Poisson count, each
/// distance with density `2u / R²`.
pub fn sample_interferer_positions<R: Rng + ?Sized>(
    radius_m: f64,
    field: &InterfererField,
    rng: &mut R,
) -> Vec<f64> {
    let mean = field.mean_count(radius_m);
    if mean <= 0.0 {
        return Vec::new();
    }
    let count: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    (0..count as usize)
        .map(|_| radius_m * rng.random::<f64>().sqrt())
        .collect()
}

/// Poisson probability of exactly `n` events at the given mean, evaluated
/// in log space.
pub fn poisson_pmf(n: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let n = n as f64;
    (n * mean.ln() - mean - ln_gamma(n + 1.0)).exp()
}

/// Probability of `n` interferers within `radius_m`.
pub fn poisson_interferer_pmf(n: u64, radius_m: f64, field: &InterfererField) -> f64 {
    poisson_pmf(n, field.mean_count(radius_m))
}

/// Smallest contiguous support `lo..=hi` around the mode whose excluded
/// mass is below `tail`, with the pmf values on it.
pub fn poisson_support(mean: f64, tail: f64) -> (u64, Vec<f64>) {
    if mean <= 0.0 {
        return (0, vec![1.0]);
    }
    let mode = mean.floor() as u64;
    let mut lo = mode;
    let mut hi = mode;
    let mut mass = poisson_pmf(mode, mean);
    let mut lower = poisson_pmf(lo.saturating_sub(1), mean);
    let mut upper = poisson_pmf(hi + 1, mean);
    while 1.0 - mass > tail {
        // extend toward the heavier neighbour
        if lo > 0 && lower >= upper {
            lo -= 1;
            mass += lower;
            lower = if lo > 0 { poisson_pmf(lo - 1, mean) } else { 0.0 };
        } else {
            hi += 1;
            mass += upper;
            upper = poisson_pmf(hi + 1, mean);
        }
        if lower == 0.0 && upper == 0.0 {
            break;
        }
    }
    let pmf = (lo..=hi).map(|n| poisson_pmf(n, mean)).collect();
    (lo, pmf)
}
