//! Statistical model of rateless decoding.
//!
//! No coded symbols are produced. Only the number of received coded
//! fragments at which a recipient manages to decode matters, and that is
//! fully described by the conditional failure probabilities of the code.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMode {
    /// Any `k` received fragments decode.
    Ideal,
    /// Decoding fails with probability `failure_at_k` after exactly `k`
    /// fragments and `failure_beyond_k` for every later attempt.
    Raptor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatelessModel {
    pub k: u32,
    pub failure_at_k: f64,
    pub failure_beyond_k: f64,
    pub mode: DecoderMode,
}

/// Tail mass below which pmf sums are truncated.
const PMF_TAIL: f64 = 1e-15;

impl RatelessModel {
    pub fn raptor(k: u32) -> Self {
        RatelessModel { k, failure_at_k: 0.85, failure_beyond_k: 0.567, mode: DecoderMode::Raptor }
    }

    pub fn ideal(k: u32) -> Self {
        RatelessModel { mode: DecoderMode::Ideal, ..Self::raptor(k) }
    }

    pub fn with_mode(&self, mode: DecoderMode) -> Self {
        RatelessModel { mode, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        for p in [self.failure_at_k, self.failure_beyond_k] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("failure probability {p} not in [0,1]")));
            }
        }
        if self.mode == DecoderMode::Raptor && self.failure_beyond_k >= 1.0 {
            return Err(Error::InvalidParameter(
                "failure_beyond_k = 1 never decodes".into(),
            ));
        }
        Ok(())
    }

    /// Probability that the decode attempt after the `l`-th fragment fails
    /// given that every earlier attempt failed.
    pub fn conditional_failure(&self, l: u64) -> f64 {
        let k = u64::from(self.k);
        match self.mode {
            _ if l < k => 1.0,
            DecoderMode::Ideal => 0.0,
            DecoderMode::Raptor if l == k => self.failure_at_k,
            DecoderMode::Raptor => self.failure_beyond_k,
        }
    }

    /// Probability that decoding needs exactly `m` fragments.
    pub fn completion_pmf(&self, m: u64) -> f64 {
        if m < u64::from(self.k) {
            return 0.0;
        }
        let survive: f64 = (u64::from(self.k)..m).map(|i| self.conditional_failure(i)).product();
        survive * (1.0 - self.conditional_failure(m))
    }

    /// Expected number of fragments needed to decode, `Σ m P_N(m)`.
    pub fn expected_fragments(&self) -> f64 {
        let k = f64::from(self.k);
        match self.mode {
            DecoderMode::Ideal => k,
            // N = k + #extra; P(N > k + j) = f_k f^j for j >= 0
            DecoderMode::Raptor => k + self.failure_at_k / (1.0 - self.failure_beyond_k),
        }
    }

    /// Last index kept when summing the pmf.
    pub fn truncation_point(&self) -> u64 {
        let k = u64::from(self.k);
        match self.mode {
            DecoderMode::Ideal => k,
            DecoderMode::Raptor => {
                if self.failure_at_k == 0.0 || self.failure_beyond_k == 0.0 {
                    return k + 1;
                }
                let extra = (PMF_TAIL / self.failure_at_k).ln() / self.failure_beyond_k.ln();
                k + extra.ceil().max(1.0) as u64
            }
        }
    }

    /// Draws the number of received fragments at which decoding succeeds.
    pub fn sample_completion_threshold<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut m = u64::from(self.k);
        if self.mode == DecoderMode::Ideal {
            return m;
        }
        while rng.random::<f64>() < self.conditional_failure(m) {
            m += 1;
        }
        m
    }
}
