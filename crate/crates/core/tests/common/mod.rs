//! Checks shared by the property tests and the acceptance suite.
#![allow(dead_code)]

use lora_fuota::analysis::Analyzer;
use lora_fuota::channel::{sample_fading, sample_interferer_positions, InterfererField};
use lora_fuota::phy::{FrameTable, SfIndex};
use lora_fuota::sim::{RecipientOutcome, TraceEntry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `|F_pr + (1 - F_pr) F_pl + S_fr - 1|`.
pub fn partition_residual(an: &Analyzer, d0: f64, n: u64, sf: SfIndex) -> f64 {
    let p = an.success_probabilities(d0, n, sf).unwrap();
    let s_fr = an.frame_success(d0, n, sf).unwrap();
    (p.preamble_fail + (1.0 - p.preamble_fail) * p.payload_fail_given_preamble + s_fr - 1.0).abs()
}

/// Largest amount by which any prefix of the trace exceeds the duty-cycle
/// budget. A prefix ending at frame `k` may use `dc` of the time from the
/// first start to the next start; the last frame is charged its own
/// off-time.
pub fn duty_prefix_violation(trace: &[TraceEntry], dc_pct: f64) -> f64 {
    let dc = dc_pct / 100.0;
    let Some(&(t0, _)) = trace.first() else { return 0.0 };
    let mut used = 0.0;
    let mut worst: f64 = 0.0;
    for (k, &(start, air)) in trace.iter().enumerate() {
        used += air;
        let horizon = match trace.get(k + 1) {
            Some(&(next, _)) => next,
            None => start + air / dc,
        };
        worst = worst.max(used - dc * (horizon - t0));
    }
    worst
}

/// Relative gap between recorded fragment energy and the energy implied by
/// the per-SF attempt counters.
pub fn energy_accounting_residual(o: &RecipientOutcome, frames: &FrameTable) -> f64 {
    let mut e = 0.0;
    for sf in SfIndex::all() {
        e += o.full_attempts[sf.index()] as f64 * frames.e_frame(sf);
        e += o.preamble_only_attempts[sf.index()] as f64 * frames.e_preamble(sf);
    }
    (e - o.energy_fragments_j).abs() / e.max(1e-300)
}

pub struct Moments {
    pub mean: f64,
    pub var: f64,
    pub n: usize,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Moments { mean, var, n: xs.len() }
}

/// Fading draws: unit mean and unit variance for an exponential.
pub fn fading_moments(samples: usize, seed: u64) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..samples).map(|_| sample_fading(&mut rng)).collect();
    moments(&xs)
}

/// Interferer counts per draw and pooled distances.
pub fn interferer_draws(radius: f64, field: &InterfererField, draws: usize, seed: u64) -> (Moments, Moments) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(draws);
    let mut dists = Vec::new();
    for _ in 0..draws {
        let d = sample_interferer_positions(radius, field, &mut rng);
        counts.push(d.len() as f64);
        dists.extend(d);
    }
    (moments(&counts), moments(&dists))
}

/// `|x - want| <= k` standard errors.
pub fn within_se(m: &Moments, want: f64, var: f64, k: f64) -> bool {
    (m.mean - want).abs() <= k * (var / m.n as f64).sqrt()
}
