//! Monte Carlo simulation of complete update sessions.
//!
//! The gateway sends frames back to back, each followed by the silence the
//! duty cycle demands. Every active recipient draws its own fading for each
//! frame and the interfering frames that overlap it. Interferer positions
//! are drawn once per recipient and session; a frame overlapping the
//! desired one comes from a uniformly chosen interferer, and which SF it
//! uses is weighted by how often frames of that SF overlap the window.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{Analyzer, Segment};
use crate::channel::{sample_fading, sample_interferer_positions};
use crate::config::Placement;
use crate::error::{Error, Result};
use crate::fec::RatelessModel;
use crate::phy::{SfIndex, SF_COUNT};
use crate::schemes::{assign_group, CompletionFeedback, NoProgress, SchemeConfig, Scheduler, Target};

/// Midpoints of `count` equal-area rings on a disc of `radius_m`.
pub fn grid_distances(count: u32, radius_m: f64) -> Vec<f64> {
    let n = count as f64;
    (0..count).map(|i| radius_m * ((i as f64 + 0.5) / n).sqrt()).collect()
}

/// Where the recipients sit.
#[derive(Debug, Clone, PartialEq)]
pub enum RecipientLayout {
    Disc { count: u32, radius_m: f64, placement: Placement },
    Fixed(Vec<f64>),
}

impl RecipientLayout {
    fn distances<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            RecipientLayout::Fixed(d) => d.clone(),
            RecipientLayout::Disc { count, radius_m, placement } => {
                let n = *count as usize;
                match placement {
                    // inverse CDF of the 2d/R² density; 1 - U avoids d = 0
                    Placement::Uniform => {
                        (0..n).map(|_| radius_m * (1.0 - rng.random::<f64>()).sqrt()).collect()
                    }
                    Placement::Grid => grid_distances(*count, *radius_m),
                }
            }
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            RecipientLayout::Disc { radius_m, .. } => *radius_m,
            RecipientLayout::Fixed(d) => d.iter().cloned().fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimSetup<'a> {
    pub analyzer: &'a Analyzer,
    pub scheme: SchemeConfig,
    pub fec: RatelessModel,
    pub layout: RecipientLayout,
    /// Stream cap as a multiple of the expected fragment count.
    pub cap_factor: f64,
    pub record_trace: bool,
}

impl SimSetup<'_> {
    fn cap_per_stream(&self) -> u64 {
        (self.cap_factor * self.fec.expected_fragments()).ceil() as u64
    }
}

/// One overlapping interfering frame as seen by the recipient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferingFrame {
    pub power_w: f64,
    pub sf: SfIndex,
    pub overlaps_preamble: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionOutcome {
    Survive,
    PreambleLost,
    PayloadLost,
}

/// Dominant-interferer capture: the desired frame is lost when some
/// overlapping frame leaves `R / R' < ξ`. A ratio exactly at `ξ` survives.
pub fn collision_outcome(
    desired_power_w: f64,
    desired_sf: SfIndex,
    overlaps: &[InterferingFrame],
    analyzer: &Analyzer,
) -> CollisionOutcome {
    let phy = analyzer.phy();
    let mut outcome = CollisionOutcome::Survive;
    for f in overlaps {
        if desired_power_w < phy.capture_ratio(desired_sf, f.sf) * f.power_w {
            if f.overlaps_preamble {
                return CollisionOutcome::PreambleLost;
            }
            outcome = CollisionOutcome::PayloadLost;
        }
    }
    outcome
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipientOutcome {
    pub run: u32,
    pub distance_m: f64,
    /// Assigned SF under a group-based scheme.
    pub group: Option<SfIndex>,
    pub interferers: u32,
    pub fragments_needed: u64,
    pub fragments_received: u64,
    /// Attempts where the preamble was acquired, per SF.
    pub full_attempts: [u64; SF_COUNT],
    /// Attempts that stopped after the preamble, per SF.
    pub preamble_only_attempts: [u64; SF_COUNT],
    pub energy_fragments_j: f64,
    /// Fragment energy plus control overhead once completed.
    pub energy_total_j: f64,
    pub completed_at_s: Option<f64>,
}

impl RecipientOutcome {
    pub fn completed(&self) -> bool {
        self.completed_at_s.is_some()
    }
}

/// Gateway transmission as `(start, airtime)` in seconds.
pub type TraceEntry = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub recipients: Vec<RecipientOutcome>,
    pub transmissions: u64,
    pub session_time_s: f64,
    pub airtime_s: f64,
    pub stalled: Vec<NoProgress>,
    pub trace: Option<Vec<TraceEntry>>,
}

impl SessionResult {
    pub fn incomplete(&self) -> bool {
        !self.stalled.is_empty()
    }
}

struct Recipient {
    out: RecipientOutcome,
    interferer_d: Vec<f64>,
    target_group: Option<SfIndex>,
    active: bool,
}

struct Roster<'r>(&'r [Recipient]);

impl CompletionFeedback for Roster<'_> {
    fn pending(&self, target: Target) -> bool {
        self.0.iter().any(|r| r.active && addressed(r, target))
    }
}

fn addressed(r: &Recipient, target: Target) -> bool {
    match target {
        Target::All => true,
        Target::Group(g) => r.target_group == Some(g),
    }
}

/// Per-SF tables used for every reception attempt.
struct Channel {
    sensitivity: [f64; SF_COUNT],
    // probability an interferer overlaps the whole frame, over all SFs
    overlap_total: [f64; SF_COUNT],
    // cumulative SF weights of an overlapping frame, per desired SF
    overlap_cdf: [[f64; SF_COUNT]; SF_COUNT],
    // chance that an overlap also covers the preamble
    preamble_share: [[f64; SF_COUNT]; SF_COUNT],
}

impl Channel {
    fn new(analyzer: &Analyzer) -> Self {
        let eta = analyzer.network().interferers.sf_probabilities;
        let mut ch = Channel {
            sensitivity: [0.0; SF_COUNT],
            overlap_total: [0.0; SF_COUNT],
            overlap_cdf: [[0.0; SF_COUNT]; SF_COUNT],
            preamble_share: [[0.0; SF_COUNT]; SF_COUNT],
        };
        for i in SfIndex::all() {
            ch.sensitivity[i.index()] = analyzer.phy().sensitivity_w(i);
            let mut acc = 0.0;
            for j in SfIndex::all() {
                let c_fr = analyzer.collision_probability(i, j, Segment::Frame);
                let c_pr = analyzer.collision_probability(i, j, Segment::Preamble);
                acc += eta[j.index()] * c_fr;
                ch.overlap_cdf[i.index()][j.index()] = acc;
                ch.preamble_share[i.index()][j.index()] = if c_fr > 0.0 { c_pr / c_fr } else { 0.0 };
            }
            ch.overlap_total[i.index()] = acc;
            if acc > 0.0 {
                ch.overlap_cdf[i.index()].iter_mut().for_each(|c| *c /= acc);
            }
        }
        ch
    }

    fn pick_sf<R: Rng + ?Sized>(&self, desired: SfIndex, rng: &mut R) -> SfIndex {
        let u: f64 = rng.random();
        let cdf = &self.overlap_cdf[desired.index()];
        let j = cdf.iter().position(|&c| u < c).unwrap_or(SF_COUNT - 1);
        SfIndex::from_index(j)
    }
}

/// Deterministic random streams of one run: the layout stream fixes
/// positions, decoder thresholds and interferers, the channel stream
/// drives per-frame draws.
pub fn run_streams(seed: u64, run: u32) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut layout = ChaCha8Rng::seed_from_u64(seed);
    layout.set_stream(2 * u64::from(run));
    let mut channel = ChaCha8Rng::seed_from_u64(seed);
    channel.set_stream(2 * u64::from(run) + 1);
    (layout, channel)
}

/// Simulates one session.
pub fn run_session(setup: &SimSetup, seed: u64, run: u32) -> Result<SessionResult> {
    setup.fec.validate()?;
    setup.scheme.validate()?;
    let an = setup.analyzer;
    let net = an.network();
    let link = &net.link;
    let frames = an.frames();
    let pacing = an.pacing_factor();
    let control = an.control_energy()?;
    let channel = Channel::new(an);
    let radius_i = an.interference_radius();
    let (mut layout_rng, mut rng) = run_streams(seed, run);

    let mut recipients = Vec::new();
    for d in setup.layout.distances(&mut layout_rng) {
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!("recipient distance must be positive, got {d}")));
        }
        let needed = setup.fec.sample_completion_threshold(&mut layout_rng);
        let interferer_d = sample_interferer_positions(radius_i, &net.interferers, &mut layout_rng);
        let group = match setup.scheme {
            SchemeConfig::GroupBased { criterion, .. } => {
                Some(match assign_group(criterion, d, an, setup.fec.k) {
                    Ok(sf) => sf,
                    Err(Error::Unreachable { .. }) => SfIndex::MAX,
                    Err(e) => return Err(e),
                })
            }
            _ => None,
        };
        recipients.push(Recipient {
            out: RecipientOutcome {
                run,
                distance_m: d,
                group,
                interferers: interferer_d.len() as u32,
                fragments_needed: needed,
                fragments_received: 0,
                full_attempts: [0; SF_COUNT],
                preamble_only_attempts: [0; SF_COUNT],
                energy_fragments_j: 0.0,
                energy_total_j: 0.0,
                completed_at_s: None,
            },
            interferer_d,
            target_group: group,
            active: true,
        });
    }

    let groups: Vec<SfIndex> = recipients.iter().filter_map(|r| r.target_group).collect();
    let mut scheduler = Scheduler::new(&setup.scheme, &groups, setup.cap_per_stream());
    let mut now = 0.0;
    let mut airtime = 0.0;
    let mut stalled = Vec::new();
    let mut trace = setup.record_trace.then(Vec::new);
    let mut overlaps: Vec<InterferingFrame> = Vec::new();
    let alpha = link.path_loss_exponent;

    loop {
        let frame = match scheduler.next_frame(&Roster(&recipients)) {
            Ok(Some(f)) => f,
            Ok(None) => break,
            Err(stall) => {
                stalled.push(stall);
                for r in recipients.iter_mut().filter(|r| r.active && addressed(r, stall.target)) {
                    r.active = false;
                }
                if scheduler.skip_stream() {
                    continue;
                }
                break;
            }
        };
        let sf = frame.sf;
        let i = sf.index();
        let l = frames.frame(sf);
        if let Some(t) = trace.as_mut() {
            t.push((now, l));
        }
        let slot_end = now + pacing * l;
        for r in recipients.iter_mut().filter(|r| r.active && addressed(r, frame.target)) {
            let power = link.mean_power(r.out.distance_m) * sample_fading(&mut rng);
            let mut outcome = if power < channel.sensitivity[i] {
                CollisionOutcome::PreambleLost
            } else {
                CollisionOutcome::Survive
            };
            let n = r.interferer_d.len();
            if outcome == CollisionOutcome::Survive && n > 0 && channel.overlap_total[i] > 0.0 {
                let hits = Binomial::new(n as u64, channel.overlap_total[i])
                    .expect("probability in [0, 1]")
                    .sample(&mut rng) as usize;
                if hits > 0 {
                    overlaps.clear();
                    for idx in sample_indices(&mut rng, n, hits) {
                        let j = channel.pick_sf(sf, &mut rng);
                        let share = channel.preamble_share[i][j.index()];
                        overlaps.push(InterferingFrame {
                            power_w: link.gamma0
                                * link.tx_rf_power_w
                                * sample_fading(&mut rng)
                                * r.interferer_d[idx].powf(-alpha),
                            sf: j,
                            overlaps_preamble: rng.random::<f64>() < share,
                        });
                    }
                    outcome = collision_outcome(power, sf, &overlaps, an);
                }
            }
            match outcome {
                CollisionOutcome::PreambleLost => r.out.preamble_only_attempts[i] += 1,
                CollisionOutcome::PayloadLost => r.out.full_attempts[i] += 1,
                CollisionOutcome::Survive => {
                    r.out.full_attempts[i] += 1;
                    r.out.fragments_received += 1;
                    if r.out.fragments_received >= r.out.fragments_needed {
                        r.active = false;
                        r.out.completed_at_s = Some(slot_end);
                    }
                }
            }
        }
        now = slot_end;
        airtime += l;
    }

    let out = recipients
        .into_iter()
        .map(|r| {
            let mut o = r.out;
            o.energy_fragments_j = SfIndex::all()
                .map(|sf| {
                    o.full_attempts[sf.index()] as f64 * frames.e_frame(sf)
                        + o.preamble_only_attempts[sf.index()] as f64 * frames.e_preamble(sf)
                })
                .sum();
            o.energy_total_j = o.energy_fragments_j + if o.completed() { control } else { 0.0 };
            o
        })
        .collect();
    Ok(SessionResult {
        recipients: out,
        transmissions: scheduler.transmitted(),
        session_time_s: now,
        airtime_s: airtime,
        stalled,
        trace,
    })
}

/// Largest violation of the duty-cycle bound over every prefix of a trace:
/// `max_k (Σ_{i<=k} l_i - DC t_k)`, where `t_k` is the start of frame
/// `k + 1` (or the end of the last frame's silent period).
pub fn duty_cycle_excess(trace: &[TraceEntry], duty_cycle_pct: f64) -> f64 {
    let dc = duty_cycle_pct / 100.0;
    let mut on_air = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for (k, &(start, l)) in trace.iter().enumerate() {
        on_air += l;
        let until = trace.get(k + 1).map_or(start + l / dc, |next| next.0);
        worst = worst.max(on_air - dc * until);
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStat {
    pub lo_m: f64,
    pub hi_m: f64,
    pub samples: u64,
    pub incomplete: u64,
    pub ee_norm_mean: f64,
    pub ee_norm_stderr: f64,
    pub dt_hours_mean: f64,
    pub dt_hours_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scheme: String,
    pub runs: u32,
    pub recipients: Vec<RecipientOutcome>,
    pub bins: Vec<BinStat>,
    pub avg_ee_norm: f64,
    pub avg_ee_norm_stderr: f64,
    pub avg_dt_hours: f64,
    pub avg_dt_hours_stderr: f64,
    /// Mean total session length, hours.
    pub avg_session_hours: f64,
    pub incomplete_recipients: u64,
    pub stalled_streams: u64,
}

impl ExperimentResult {
    pub fn incomplete(&self) -> bool {
        self.incomplete_recipients > 0
    }
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `runs` independent sessions in parallel and aggregates them.
/// Run `r` always uses the same streams, so results do not depend on
/// thread scheduling.
pub fn run_experiment(setup: &SimSetup, seed: u64, runs: u32, bins: u32) -> Result<ExperimentResult> {
    if runs == 0 || bins == 0 {
        return Err(Error::InvalidParameter("runs and bins must be positive".into()));
    }
    let sessions: Vec<SessionResult> =
        (0..runs).into_par_iter().map(|r| run_session(setup, seed, r)).collect::<Result<_>>()?;
    Ok(aggregate(setup, sessions, bins))
}

fn aggregate(setup: &SimSetup, sessions: Vec<SessionResult>, bins: u32) -> ExperimentResult {
    let norm = setup.analyzer.normalization_energy();
    let runs = sessions.len() as u32;
    let radius = setup.layout.radius();
    let width = radius / f64::from(bins);
    let mut per_bin: Vec<(Vec<f64>, Vec<f64>, u64)> = vec![(vec![], vec![], 0); bins as usize];
    let mut run_ee = Vec::new();
    let mut run_dt = Vec::new();
    let mut incomplete = 0;
    let mut stalled = 0;
    let mut session_h = 0.0;
    let mut recipients = Vec::new();
    for s in sessions {
        stalled += s.stalled.len() as u64;
        session_h += s.session_time_s / 3600.0;
        let mut ee = Vec::new();
        let mut dt = Vec::new();
        for o in &s.recipients {
            let b = ((o.distance_m / width) as usize).min(bins as usize - 1);
            match o.completed_at_s {
                Some(t) => {
                    per_bin[b].0.push(o.energy_fragments_j / norm);
                    per_bin[b].1.push(t / 3600.0);
                    ee.push(o.energy_fragments_j / norm);
                    dt.push(t / 3600.0);
                }
                None => {
                    per_bin[b].2 += 1;
                    incomplete += 1;
                }
            }
        }
        if !ee.is_empty() {
            run_ee.push(mean_stderr(&ee).0);
            run_dt.push(mean_stderr(&dt).0);
        }
        recipients.extend(s.recipients);
    }
    let bins = per_bin
        .into_iter()
        .enumerate()
        .map(|(b, (ee, dt, inc))| {
            let (ee_m, ee_s) = mean_stderr(&ee);
            let (dt_m, dt_s) = mean_stderr(&dt);
            BinStat {
                lo_m: b as f64 * width,
                hi_m: (b + 1) as f64 * width,
                samples: ee.len() as u64,
                incomplete: inc,
                ee_norm_mean: ee_m,
                ee_norm_stderr: ee_s,
                dt_hours_mean: dt_m,
                dt_hours_stderr: dt_s,
            }
        })
        .collect();
    let (avg_ee, avg_ee_s) = mean_stderr(&run_ee);
    let (avg_dt, avg_dt_s) = mean_stderr(&run_dt);
    ExperimentResult {
        scheme: setup.scheme.label(),
        runs,
        recipients,
        bins,
        avg_ee_norm: avg_ee,
        avg_ee_norm_stderr: avg_ee_s,
        avg_dt_hours: avg_dt,
        avg_dt_hours_stderr: avg_dt_s,
        avg_session_hours: session_h / f64::from(runs.max(1)),
        incomplete_recipients: incomplete,
        stalled_streams: stalled,
    }
}
