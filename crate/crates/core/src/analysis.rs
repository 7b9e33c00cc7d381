//! Closed-form energy and delivery-time model for a recipient at distance
//! `d0` from the gateway.
//!
//! Per-frame outcome probabilities are integrals over the fading level `a`
//! of the desired frame,
//!
//! ```text
//! S_seg(d0 | n) = ∫_{c}^{∞} (1 - Q_seg(a))^n e^{-a} da,   c = ζ_i d0^α / (γ0 p_t)
//! Q_seg(a)      = Σ_j η_j C_seg(i, j) h(a (R_I / d0)^α / ξ_ij)
//! h(x)          = (2/α) x^{-2/α} γ(2/α, x)
//! ```
//!
//! where `seg` is the preamble or the whole frame, `C_seg(i, j)` the chance
//! an SF-`j` interferer frame overlaps the segment on the same channel and
//! `h` the capture probability averaged over the interferer's position in
//! the interference disc. The round recursion then turns the per-SF success
//! probabilities into expected energy and delivery time, and everything is
//! averaged over the Poisson number of interferers `n`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::channel::{interference_radius, poisson_pmf, poisson_support};
use crate::error::{Error, Result};
use crate::fec::RatelessModel;
use crate::network::NetworkConfig;
use crate::numeric::{gauss_legendre, integrate_exp_tail_vec, scaled_lower_gamma, QuadSettings};
use crate::phy::{FrameTable, PhyProfile, SfIndex, SF_COUNT};
use crate::schemes::RoundPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    Preamble,
    Frame,
}

/// How the expected energy of one reception attempt is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyFormula {
    /// `S_pr e_fr + (1 - S_pr) e_pr`: the full frame is demodulated exactly
    /// when the preamble is acquired.
    Partitioned,
    /// `S_fr e_fr + F_pl e_fr + F_pr e_pr` with `F_pl` conditional on
    /// preamble acquisition; the weights do not sum to one.
    AsPrinted,
}

/// Denominator of the expected final-round attempt count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptsDenominator {
    /// `remaining / S_fr`, the negative-binomial mean.
    Success,
    /// `remaining / (1 - S_fr)`.
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOptions {
    pub energy_formula: EnergyFormula,
    pub attempts_denominator: AttemptsDenominator,
    /// Poisson mass of interferer counts left out of the deconditioning.
    pub poisson_tail: f64,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            energy_formula: EnergyFormula::Partitioned,
            attempts_denominator: AttemptsDenominator::Success,
            poisson_tail: 1e-6,
            quad_rel_tol: 1e-10,
            quad_abs_tol: 1e-13,
        }
    }
}

impl AnalysisOptions {
    fn quad(&self) -> QuadSettings {
        QuadSettings { abs_tol: self.quad_abs_tol, rel_tol: self.quad_rel_tol, max_intervals: 4000 }
    }
}

/// Outcome probabilities of one SF at fixed `(d0, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProbabilities {
    pub preamble_fail: f64,
    pub frame_success: f64,
    pub payload_fail_given_preamble: f64,
}

impl SuccessProbabilities {
    pub fn from_parts(preamble_success: f64, frame_success: f64) -> Self {
        SuccessProbabilities {
            preamble_fail: 1.0 - preamble_success,
            frame_success,
            payload_fail_given_preamble: payload_fail(preamble_success, frame_success),
        }
    }

    pub fn preamble_success(&self) -> f64 {
        1.0 - self.preamble_fail
    }
}

fn payload_fail(preamble_success: f64, frame_success: f64) -> f64 {
    if preamble_success > 0.0 {
        (1.0 - frame_success / preamble_success).max(0.0)
    } else {
        0.0
    }
}

/// Per-SF success probabilities for every interferer count on the
/// truncated Poisson support at one distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessTable {
    pub distance_m: f64,
    pub n_lo: u64,
    /// Poisson weights renormalised over the support.
    pub weights: Vec<f64>,
    pub preamble_success: Vec<[f64; SF_COUNT]>,
    pub frame_success: Vec<[f64; SF_COUNT]>,
}

impl SuccessTable {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Expected figures for one recipient distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalOutcome {
    pub distance_m: f64,
    pub energy_fragments_j: f64,
    pub energy_control_j: f64,
    pub energy_total_j: f64,
    pub update_time_s: f64,
    /// Completion round with the largest probability over `n`; values above
    /// `M` denote the overflow round.
    pub round_completed: u8,
    /// Expected attempts in the completion round, averaged over `n`.
    pub attempts_in_final_round: f64,
}

/// Figures conditioned on a fixed interferer count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalOutcome {
    pub energy_j: f64,
    pub time_s: f64,
    pub round: u8,
    pub attempts: f64,
}

/// `R̄_i = w S_i`.
pub fn expected_round_receptions(w: u32, frame_success: f64) -> f64 {
    f64::from(w) * frame_success
}

/// SF used in round `round`; the overflow round `M + 1` keeps SF `M`.
pub fn round_sf(plan: &RoundPlan, round: u8) -> SfIndex {
    SfIndex::new(round.min(plan.m.value())).expect("round within 7..=13")
}

/// Smallest round `m` in `L..=M` whose cumulative expected receptions reach
/// `ns_bar`, else `M + 1`.
pub fn completion_round(plan: &RoundPlan, frame_success: &[f64; SF_COUNT], ns_bar: f64) -> u8 {
    let mut cumulative = 0.0;
    for sf in SfIndex::range(plan.l, plan.m) {
        cumulative += expected_round_receptions(plan.w, frame_success[sf.index()]);
        if cumulative >= ns_bar {
            return sf.value();
        }
    }
    plan.m.value() + 1
}

/// Expected reception attempts to collect `remaining` fragments at
/// per-attempt success `frame_success`. `None` means no finite answer.
pub fn final_round_attempts(
    remaining: f64,
    frame_success: f64,
    denominator: AttemptsDenominator,
) -> Option<f64> {
    if remaining <= 0.0 {
        return Some(0.0);
    }
    let d = match denominator {
        AttemptsDenominator::Success => frame_success,
        AttemptsDenominator::AsPrinted => 1.0 - frame_success,
    };
    (d > 0.0).then(|| remaining / d)
}

/// Expected energy of one reception attempt.
pub fn per_attempt_energy(
    preamble_success: f64,
    frame_success: f64,
    e_frame: f64,
    e_preamble: f64,
    formula: EnergyFormula,
) -> f64 {
    match formula {
        EnergyFormula::Partitioned => {
            preamble_success * e_frame + (1.0 - preamble_success) * e_preamble
        }
        EnergyFormula::AsPrinted => {
            let f_pl = payload_fail(preamble_success, frame_success);
            frame_success * e_frame + f_pl * e_frame + (1.0 - preamble_success) * e_preamble
        }
    }
}

/// Energy, time and completion round for a fixed interferer count.
#[allow(clippy::too_many_arguments)]
pub fn conditional_outcome(
    plan: &RoundPlan,
    preamble_success: &[f64; SF_COUNT],
    frame_success: &[f64; SF_COUNT],
    frames: &FrameTable,
    ns_bar: f64,
    pacing: f64,
    options: &AnalysisOptions,
    distance_m: f64,
) -> Result<ConditionalOutcome> {
    let m0 = completion_round(plan, frame_success, ns_bar);
    let attempt_energy = |sf: SfIndex| {
        let i = sf.index();
        per_attempt_energy(
            preamble_success[i],
            frame_success[i],
            frames.e_frame(sf),
            frames.e_preamble(sf),
            options.energy_formula,
        )
    };
    let w = f64::from(plan.w);
    let mut received = 0.0;
    let mut energy = 0.0;
    let mut airtime = 0.0;
    for round in plan.l.value()..m0 {
        let sf = round_sf(plan, round);
        received += expected_round_receptions(plan.w, frame_success[sf.index()]);
        energy += w * attempt_energy(sf);
        airtime += w * frames.frame(sf);
    }
    let last = round_sf(plan, m0);
    let remaining = (ns_bar - received).max(0.0);
    let attempts =
        final_round_attempts(remaining, frame_success[last.index()], options.attempts_denominator)
            .ok_or(Error::Unreachable { distance_m, sf: last.value(), remaining })?;
    energy += attempts * attempt_energy(last);
    airtime += attempts * frames.frame(last);
    Ok(ConditionalOutcome { energy_j: energy, time_s: pacing * airtime, round: m0, attempts })
}

/// Precomputed model for one network and PHY configuration.
#[derive(Debug, Clone)]
pub struct Analyzer {
    phy: PhyProfile,
    net: NetworkConfig,
    options: AnalysisOptions,
    frames: FrameTable,
    radius_m: f64,
    sensitivity_w: [f64; SF_COUNT],
    inv_capture: [[f64; SF_COUNT]; SF_COUNT],
    // [segment][desired][interferer]
    collision: [[[f64; SF_COUNT]; SF_COUNT]; 2],
    poisson_lo: u64,
    poisson_weights: Vec<f64>,
}

impl Analyzer {
    pub fn new(phy: &PhyProfile, net: &NetworkConfig, options: &AnalysisOptions) -> Result<Self> {
        phy.validate()?;
        net.validate()?;
        if !(options.poisson_tail > 0.0 && options.poisson_tail < 1.0) {
            return Err(Error::InvalidParameter("poisson_tail must lie in (0, 1)".into()));
        }
        let frames = FrameTable::new(phy, net.fragment_bytes())?;
        let interferer_l = net.interferers.mean_frame_durations(phy)?;
        let max_sf = SfIndex::MAX;
        let radius_m = interference_radius(&net.link, &net.interferers, phy.sensitivity_w(max_sf));

        let mut sensitivity_w = [0.0; SF_COUNT];
        let mut inv_capture = [[0.0; SF_COUNT]; SF_COUNT];
        let mut collision = [[[0.0; SF_COUNT]; SF_COUNT]; 2];
        let field = &net.interferers;
        for i in SfIndex::all() {
            sensitivity_w[i.index()] = phy.sensitivity_w(i);
            for j in SfIndex::all() {
                inv_capture[i.index()][j.index()] = 1.0 / phy.capture_ratio(i, j);
                for (seg, window) in [frames.preamble(i), frames.frame(i)].into_iter().enumerate() {
                    let c = field.frame_rate_hz * (window + interferer_l[j.index()])
                        / f64::from(field.channel_count);
                    if c > 1.0 {
                        warn!(
                            "collision probability {c:.3} for {i} vs {j} exceeds 1; clamping (vulnerable-window approximation breaks down)"
                        );
                    }
                    collision[seg][i.index()][j.index()] = c.min(1.0);
                }
            }
        }

        let mean = field.mean_count(radius_m);
        let (poisson_lo, mut poisson_weights) = poisson_support(mean, options.poisson_tail);
        let mass: f64 = poisson_weights.iter().sum();
        poisson_weights.iter_mut().for_each(|w| *w /= mass);

        Ok(Analyzer {
            phy: phy.clone(),
            net: net.clone(),
            options: options.clone(),
            frames,
            radius_m,
            sensitivity_w,
            inv_capture,
            collision,
            poisson_lo,
            poisson_weights,
        })
    }

    pub fn phy(&self) -> &PhyProfile {
        &self.phy
    }

    pub fn network(&self) -> &NetworkConfig {
        &self.net
    }

    pub fn options(&self) -> &AnalysisOptions {
        &self.options
    }

    /// Airtimes and energies of a fragment-carrying frame.
    pub fn frames(&self) -> &FrameTable {
        &self.frames
    }

    pub fn interference_radius(&self) -> f64 {
        self.radius_m
    }

    pub fn pacing_factor(&self) -> f64 {
        self.net.pacing_factor()
    }

    /// Mean number of interferers inside the interference radius.
    pub fn mean_interferers(&self) -> f64 {
        self.net.interferers.mean_count(self.radius_m)
    }

    /// Control overhead energy, `p_r l_c + p_t l_a`.
    pub fn control_energy(&self) -> Result<f64> {
        let l_a = self.phy.frame_airtime(self.net.ack_sf, self.net.ack_payload_bytes)?;
        Ok(self.phy.rx_power_w * self.net.control_airtime_s + self.phy.tx_power_w * l_a)
    }

    /// Energy to receive `k` fragments on SF7 over an erasure-free link.
    pub fn normalization_energy(&self) -> f64 {
        f64::from(self.net.fec.k) * self.frames.e_frame(SfIndex::MIN)
    }

    /// Chance that one interferer's frame on SF `interferer` overlaps the
    /// desired segment on the same channel, `λ_f (l + l̄_j) / n_f`.
    pub fn collision_probability(&self, desired: SfIndex, interferer: SfIndex, segment: Segment) -> f64 {
        self.collision[segment as usize][desired.index()][interferer.index()]
    }

    /// Loss probability caused by a single interferer, given the desired
    /// frame's fading level `a`.
    pub fn loss_per_interferer(&self, d0: f64, a: f64, sf: SfIndex, segment: Segment) -> f64 {
        let (pr, fr) = self.loss_pair(d0, a, sf);
        match segment {
            Segment::Preamble => pr,
            Segment::Frame => fr,
        }
    }

    fn loss_pair(&self, d0: f64, a: f64, sf: SfIndex) -> (f64, f64) {
        let alpha = self.net.link.path_loss_exponent;
        let s = 2.0 / alpha;
        let geometry = (self.radius_m / d0).powf(alpha);
        let eta = &self.net.interferers.sf_probabilities;
        let i = sf.index();
        let (mut pr, mut fr) = (0.0, 0.0);
        for j in 0..SF_COUNT {
            if eta[j] == 0.0 {
                continue;
            }
            let x = a * geometry * self.inv_capture[i][j];
            let h = s * scaled_lower_gamma(s, x);
            pr += eta[j] * self.collision[0][i][j] * h;
            fr += eta[j] * self.collision[1][i][j] * h;
        }
        (pr.min(1.0), fr.min(1.0))
    }

    /// Fading threshold `ζ_i d0^α / (γ0 p_t)` below which detection fails.
    pub fn detection_threshold(&self, d0: f64, sf: SfIndex) -> f64 {
        self.net.link.fading_threshold(d0, self.sensitivity_w[sf.index()])
    }

    fn check_distance(d0: f64) -> Result<()> {
        if !(d0 > 0.0 && d0.is_finite()) {
            return Err(Error::InvalidParameter(format!("distance must be positive, got {d0}")));
        }
        Ok(())
    }

    /// Preamble-acquisition and whole-frame success probabilities for each
    /// interferer count in `counts`.
    pub fn segment_success(&self, d0: f64, sf: SfIndex, counts: &[u64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Self::check_distance(d0)?;
        let c = self.detection_threshold(d0, sf);
        let len = counts.len();
        let ns: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
        let v = integrate_exp_tail_vec(
            |a, out| {
                let (q_pr, q_fr) = self.loss_pair(d0, a, sf);
                let (l_pr, l_fr) = ((-q_pr).ln_1p(), (-q_fr).ln_1p());
                for (k, &n) in ns.iter().enumerate() {
                    out[k] = if n == 0.0 { 1.0 } else { (n * l_pr).exp() };
                    out[len + k] = if n == 0.0 { 1.0 } else { (n * l_fr).exp() };
                }
            },
            c,
            2 * len,
            self.options.quad(),
        )
        .map_err(|e| Error::Numerical(format!("success integral at d0={d0} m, {sf}: {e}")))?;
        let (pr, fr) = v.split_at(len);
        Ok((pr.iter().map(|p| p.clamp(0.0, 1.0)).collect(), fr.iter().map(|p| p.clamp(0.0, 1.0)).collect()))
    }

    /// `F_pr(d0 | n)`.
    pub fn preamble_failure(&self, d0: f64, n: u64, sf: SfIndex) -> Result<f64> {
        Ok(1.0 - self.segment_success(d0, sf, &[n])?.0[0])
    }

    /// `S_fr(d0 | n)`.
    pub fn frame_success(&self, d0: f64, n: u64, sf: SfIndex) -> Result<f64> {
        Ok(self.segment_success(d0, sf, &[n])?.1[0])
    }

    /// `F_pl(d0 | n) = 1 - S_fr / (1 - F_pr)`; requires `F_pr < 1`.
    pub fn payload_failure_given_preamble(&self, d0: f64, n: u64, sf: SfIndex) -> Result<f64> {
        let p = self.success_probabilities(d0, n, sf)?;
        if p.preamble_fail >= 1.0 {
            return Err(Error::Numerical(format!(
                "preamble acquisition impossible at d0={d0} m on {sf}"
            )));
        }
        Ok(p.payload_fail_given_preamble)
    }

    pub fn success_probabilities(&self, d0: f64, n: u64, sf: SfIndex) -> Result<SuccessProbabilities> {
        let (pr, fr) = self.segment_success(d0, sf, &[n])?;
        Ok(SuccessProbabilities::from_parts(pr[0], fr[0]))
    }

    /// Frame success averaged over the Poisson interferer count, using
    /// `E[(1 - Q)^N] = exp(-μ Q)`.
    pub fn deconditioned_frame_success(&self, d0: f64, sf: SfIndex) -> Result<f64> {
        Self::check_distance(d0)?;
        let mu = self.mean_interferers();
        let c = self.detection_threshold(d0, sf);
        let v = integrate_exp_tail_vec(
            |a, out| out[0] = (-mu * self.loss_pair(d0, a, sf).1).exp(),
            c,
            1,
            self.options.quad(),
        )?;
        Ok(v[0].clamp(0.0, 1.0))
    }

    /// Interferer counts covered by the deconditioning and their weights.
    pub fn interferer_support(&self) -> (u64, &[f64]) {
        (self.poisson_lo, &self.poisson_weights)
    }

    /// Success probabilities for every SF and interferer count at `d0`.
    pub fn success_table(&self, d0: f64) -> Result<SuccessTable> {
        let counts: Vec<u64> =
            (0..self.poisson_weights.len() as u64).map(|k| self.poisson_lo + k).collect();
        let mut preamble_success = vec![[0.0; SF_COUNT]; counts.len()];
        let mut frame_success = vec![[0.0; SF_COUNT]; counts.len()];
        for sf in SfIndex::all() {
            let (pr, fr) = self.segment_success(d0, sf, &counts)?;
            for k in 0..counts.len() {
                preamble_success[k][sf.index()] = pr[k];
                frame_success[k][sf.index()] = fr[k];
            }
        }
        Ok(SuccessTable {
            distance_m: d0,
            n_lo: self.poisson_lo,
            weights: self.poisson_weights.clone(),
            preamble_success,
            frame_success,
        })
    }

    /// Expected figures for a recipient at `d0` under `plan`.
    pub fn evaluate(&self, d0: f64, plan: &RoundPlan, fec: &RatelessModel) -> Result<AnalyticalOutcome> {
        let table = self.success_table(d0)?;
        self.evaluate_table(&table, plan, fec.expected_fragments())
    }

    /// Same as [`Analyzer::evaluate`] but reusing a precomputed table; the
    /// table does not depend on the plan, so sweeps share it.
    pub fn evaluate_table(&self, table: &SuccessTable, plan: &RoundPlan, ns_bar: f64) -> Result<AnalyticalOutcome> {
        let pacing = self.pacing_factor();
        let mut energy = 0.0;
        let mut time = 0.0;
        let mut attempts = 0.0;
        let mut round_mass = [0.0; 8];
        for k in 0..table.len() {
            let c = conditional_outcome(
                plan,
                &table.preamble_success[k],
                &table.frame_success[k],
                &self.frames,
                ns_bar,
                pacing,
                &self.options,
                table.distance_m,
            )?;
            let w = table.weights[k];
            energy += w * c.energy_j;
            time += w * c.time_s;
            attempts += w * c.attempts;
            round_mass[(c.round - 7) as usize] += w;
        }
        let round_completed = round_mass
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(r, _)| r as u8 + 7)
            .expect("non-empty");
        let control = self.control_energy()?;
        Ok(AnalyticalOutcome {
            distance_m: table.distance_m,
            energy_fragments_j: energy,
            energy_control_j: control,
            energy_total_j: energy + control,
            update_time_s: time,
            round_completed,
            attempts_in_final_round: attempts,
        })
    }

    /// `(fragment energy, control energy, total)` at `d0`.
    pub fn expected_energy(&self, d0: f64, plan: &RoundPlan, fec: &RatelessModel) -> Result<(f64, f64, f64)> {
        let o = self.evaluate(d0, plan, fec)?;
        Ok((o.energy_fragments_j, o.energy_control_j, o.energy_total_j))
    }

    pub fn expected_update_time(&self, d0: f64, plan: &RoundPlan, fec: &RatelessModel) -> Result<f64> {
        Ok(self.evaluate(d0, plan, fec)?.update_time_s)
    }

    /// Poisson pmf of the interferer count, exposed for reporting.
    pub fn interferer_pmf(&self, n: u64) -> f64 {
        poisson_pmf(n, self.mean_interferers())
    }
}

/// Quadrature rule for averaging a per-distance metric over recipients
/// uniform on a disc of radius `r0` (distance density `2d / r0²`).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceQuadrature {
    pub distances: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DistanceQuadrature {
    /// Composite Gauss-Legendre rule with `panels` equal panels of `order`
    /// nodes each.
    pub fn new(r0: f64, panels: usize, order: usize) -> Result<Self> {
        Self::annulus(0.0, r0, panels, order)
    }

    /// Rule for recipients uniform on the annulus `lo < d <= hi`, density
    /// `2d / (hi² - lo²)`.
    pub fn annulus(lo: f64, hi: f64, panels: usize, order: usize) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo) || panels == 0 || order == 0 {
            return Err(Error::InvalidParameter(format!(
                "distance quadrature needs 0 <= lo < hi and nodes, got [{lo}, {hi}]"
            )));
        }
        let (x, w) = gauss_legendre(order);
        let width = (hi - lo) / panels as f64;
        let area = hi * hi - lo * lo;
        let mut distances = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * width;
            for (xi, wi) in x.iter().zip(&w) {
                let d = mid + 0.5 * width * xi;
                distances.push(d);
                weights.push(0.5 * width * wi * 2.0 * d / area);
            }
        }
        Ok(DistanceQuadrature { distances, weights })
    }

    /// Rules for `bins` equal-width rings covering `(0, r0]`, as one
    /// concatenated rule plus the index range of each ring.
    pub fn rings(r0: f64, bins: usize, order: usize) -> Result<(Self, Vec<std::ops::Range<usize>>)> {
        let mut all = DistanceQuadrature { distances: vec![], weights: vec![] };
        let mut ranges = Vec::with_capacity(bins);
        let width = r0 / bins as f64;
        for b in 0..bins {
            let ring = Self::annulus(b as f64 * width, (b + 1) as f64 * width, 1, order)?;
            let start = all.distances.len();
            all.distances.extend(ring.distances);
            all.weights.extend(ring.weights);
            ranges.push(start..all.distances.len());
        }
        Ok((all, ranges))
    }

    pub fn average(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.weights.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Average of `metric(d)` over a uniform disc of radius `r0`.
pub fn distance_average<F>(mut metric: F, r0: f64, panels: usize, order: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let rule = DistanceQuadrature::new(r0, panels, order)?;
    let values = rule.distances.iter().map(|&d| metric(d)).collect::<Result<Vec<_>>>()?;
    Ok(rule.average(&values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(v: u8) -> SfIndex {
        SfIndex::new(v).unwrap()
    }

    #[test]
    fn round_index_cases() {
        let plan = RoundPlan::new(sf(7), sf(12), 300).unwrap();
        let mut s = [1.0; 6];
        assert_eq!(completion_round(&plan, &s, 200.0), 7);
        s = [0.0, 0.0, 0.0, 0.0, 0.0, 0.3];
        assert_eq!(completion_round(&plan, &s, 200.0), 13);
        s = [0.5, 0.2, 0.0, 0.0, 0.0, 0.3];
        // 150 after SF7, 210 after SF8
        assert_eq!(completion_round(&plan, &s, 201.96), 8);
        assert_eq!(round_sf(&plan, 13), sf(12));
    }

    #[test]
    fn attempts_cases() {
        let d = AttemptsDenominator::Success;
        assert_eq!(final_round_attempts(0.0, 0.0, d), Some(0.0));
        assert_eq!(final_round_attempts(7.0, 1.0, d), Some(7.0));
        assert!((final_round_attempts(10.0, 0.4, d).unwrap() - 25.0).abs() < 1e-12);
        assert_eq!(final_round_attempts(3.0, 0.0, d), None);
        let lit = AttemptsDenominator::AsPrinted;
        assert!((final_round_attempts(10.0, 0.6, lit).unwrap() - 25.0).abs() < 1e-12);
        assert_eq!(final_round_attempts(10.0, 1.0, lit), None);
    }

    #[test]
    fn round_receptions() {
        assert_eq!(expected_round_receptions(0, 0.7), 0.0);
        assert_eq!(expected_round_receptions(300, 1.0), 300.0);
        assert!((expected_round_receptions(300, 0.25) - 75.0).abs() < 1e-12);
    }

    #[test]
    fn energy_weights_partition() {
        let e = per_attempt_energy(0.8, 0.6, 2.0, 0.5, EnergyFormula::Partitioned);
        assert!((e - (0.8 * 2.0 + 0.2 * 0.5)).abs() < 1e-15);
        // when payload never fails after acquisition both forms agree
        let a = per_attempt_energy(0.7, 0.7, 2.0, 0.5, EnergyFormula::Partitioned);
        let b = per_attempt_energy(0.7, 0.7, 2.0, 0.5, EnergyFormula::AsPrinted);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn distance_rule_exact_for_polynomials() {
        let r0 = 1000.0;
        let avg = distance_average(|_| Ok(3.5), r0, 4, 5).unwrap();
        assert!((avg - 3.5).abs() < 1e-12);
        let avg = distance_average(Ok, r0, 4, 5).unwrap();
        assert!((avg - 2.0 / 3.0 * r0).abs() < 1e-9);
        // mean distance on an annulus: (2/3)(hi³ - lo³)/(hi² - lo²)
        let ring = DistanceQuadrature::annulus(300.0, 400.0, 1, 3).unwrap();
        let want = 2.0 / 3.0 * (4e2f64.powi(3) - 3e2f64.powi(3)) / (4e2f64.powi(2) - 3e2f64.powi(2));
        assert!((ring.average(&ring.distances) - want).abs() < 1e-9);
        let (rule, ranges) = DistanceQuadrature::rings(r0, 4, 3).unwrap();
        assert_eq!(ranges.len(), 4);
        for r in ranges {
            assert!((rule.weights[r].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
