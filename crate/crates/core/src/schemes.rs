//! Transmission policies: which SF the gateway uses for each multicast
//! frame and when a session (or a group's stream) ends.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::Analyzer;
use crate::error::{Error, Result};
use crate::fec::DecoderMode;
use crate::phy::SfIndex;

/// Sequential-SF schedule: `w` frames on each SF from `l` to `m`, then SF
/// `m` until every recipient has decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundPlan {
    pub l: SfIndex,
    pub m: SfIndex,
    pub w: u32,
}

impl RoundPlan {
    pub fn new(l: SfIndex, m: SfIndex, w: u32) -> Result<Self> {
        if l > m {
            return Err(Error::InvalidParameter(format!("L = {l} exceeds M = {m}")));
        }
        if w < 1 {
            return Err(Error::InvalidParameter("w must be at least 1".into()));
        }
        Ok(RoundPlan { l, m, w })
    }

    /// A fixed-SF stream is a plan whose only round is the overflow round.
    pub fn fixed(sf: SfIndex) -> Self {
        RoundPlan { l: sf, m: sf, w: 1 }
    }

    /// SF of the `t`-th transmission (1-based): `min(L + ⌊(t-1)/w⌋, M)`.
    pub fn sf_for_transmission(&self, t: u64) -> SfIndex {
        assert!(t >= 1, "transmission index is 1-based");
        let round = ((t - 1) / u64::from(self.w)).min(12) as usize;
        self.l.saturating_add(round).min(self.m)
    }

    /// Number of full rounds before the overflow round, `M - L + 1`.
    pub fn full_rounds(&self) -> usize {
        (self.m.value() - self.l.value()) as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupCriterion {
    Energy,
    Latency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeConfig {
    Proposed {
        l: SfIndex,
        m: SfIndex,
        w: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decoder: Option<DecoderMode>,
    },
    FixedSf {
        sf: SfIndex,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decoder: Option<DecoderMode>,
    },
    GroupBased {
        criterion: GroupCriterion,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decoder: Option<DecoderMode>,
    },
}

impl SchemeConfig {
    pub fn proposed(l: u8, m: u8, w: u32) -> Result<Self> {
        let plan = RoundPlan::new(SfIndex::new(l)?, SfIndex::new(m)?, w)?;
        Ok(SchemeConfig::Proposed { l: plan.l, m: plan.m, w: plan.w, decoder: None })
    }

    pub fn fixed(sf: u8) -> Result<Self> {
        Ok(SchemeConfig::FixedSf { sf: SfIndex::new(sf)?, decoder: None })
    }

    pub fn group(criterion: GroupCriterion) -> Self {
        SchemeConfig::GroupBased { criterion, decoder: None }
    }

    pub fn validate(&self) -> Result<()> {
        if let SchemeConfig::Proposed { l, m, w, .. } = *self {
            RoundPlan::new(l, m, w)?;
        }
        Ok(())
    }

    /// Single-stream plan, `None` for group-based schemes.
    pub fn plan(&self) -> Option<RoundPlan> {
        match *self {
            SchemeConfig::Proposed { l, m, w, .. } => Some(RoundPlan { l, m, w }),
            SchemeConfig::FixedSf { sf, .. } => Some(RoundPlan::fixed(sf)),
            SchemeConfig::GroupBased { .. } => None,
        }
    }

    /// Decoder statistics used by this scheme. Benchmarks default to the
    /// ideal code; the proposed scheme uses `proposed_default`.
    pub fn decoder(&self, proposed_default: DecoderMode) -> DecoderMode {
        match *self {
            SchemeConfig::Proposed { decoder, .. } => decoder.unwrap_or(proposed_default),
            SchemeConfig::FixedSf { decoder, .. } | SchemeConfig::GroupBased { decoder, .. } => {
                decoder.unwrap_or(DecoderMode::Ideal)
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            SchemeConfig::Proposed { l, m, w, .. } => {
                format!("PROP-L{}-M{}-W{}", l.value(), m.value(), w)
            }
            SchemeConfig::FixedSf { sf, .. } => format!("FSF-{}", sf.value()),
            SchemeConfig::GroupBased { criterion: GroupCriterion::Energy, .. } => "GB-E".into(),
            SchemeConfig::GroupBased { criterion: GroupCriterion::Latency, .. } => "GB-L".into(),
        }
    }
}

impl fmt::Display for SchemeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Picks the SF minimising `cost(sf)`; smaller SF wins ties. Costs of
/// `+inf` mark unreachable SFs.
fn argmin_sf(costs: [f64; 6], distance_m: f64) -> Result<SfIndex> {
    let mut best: Option<(SfIndex, f64)> = None;
    for sf in SfIndex::all() {
        let c = costs[sf.index()];
        if c.is_finite() && best.is_none_or(|(_, b)| c < b) {
            best = Some((sf, c));
        }
    }
    best.map(|(sf, _)| sf).ok_or(Error::Unreachable {
        distance_m,
        sf: 12,
        remaining: f64::INFINITY,
    })
}

fn group_costs(
    d0: f64,
    analyzer: &Analyzer,
    k: u32,
    per_attempt: impl Fn(SfIndex) -> f64,
) -> Result<[f64; 6]> {
    let mut costs = [f64::INFINITY; 6];
    for sf in SfIndex::all() {
        let s = analyzer.deconditioned_frame_success(d0, sf)?;
        if s > 0.0 {
            costs[sf.index()] = f64::from(k) / s * per_attempt(sf);
        }
    }
    Ok(costs)
}

/// SF minimising the expected receive energy `k / S_fr(sf) * e_fr(sf)`.
pub fn assign_group_energy(d0: f64, analyzer: &Analyzer, k: u32) -> Result<SfIndex> {
    let frames = analyzer.frames();
    let costs = group_costs(d0, analyzer, k, |sf| frames.e_frame(sf))?;
    argmin_sf(costs, d0)
}

/// SF minimising the expected delivery time `k / S_fr(sf) * 100 l_fr(sf) / DC`.
pub fn assign_group_latency(d0: f64, analyzer: &Analyzer, k: u32) -> Result<SfIndex> {
    let frames = analyzer.frames();
    let pace = analyzer.pacing_factor();
    let costs = group_costs(d0, analyzer, k, |sf| pace * frames.frame(sf))?;
    argmin_sf(costs, d0)
}

pub fn assign_group(
    criterion: GroupCriterion,
    d0: f64,
    analyzer: &Analyzer,
    k: u32,
) -> Result<SfIndex> {
    match criterion {
        GroupCriterion::Energy => assign_group_energy(d0, analyzer, k),
        GroupCriterion::Latency => assign_group_latency(d0, analyzer, k),
    }
}

/// Who a multicast frame is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    All,
    Group(SfIndex),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledFrame {
    /// 1-based index over the whole session.
    pub index: u64,
    /// 1-based index within the current stream.
    pub stream_index: u64,
    pub sf: SfIndex,
    pub target: Target,
}

/// Genie-aided completion feedback.
pub trait CompletionFeedback {
    /// Whether any recipient addressed by `target` still lacks the update.
    fn pending(&self, target: Target) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoProgress {
    pub target: Target,
    pub transmitted: u64,
}

#[derive(Debug, Clone)]
enum Policy {
    Single(RoundPlan),
    Groups { order: Vec<SfIndex>, current: usize },
}

/// Produces the transmission stream of a session, one frame at a time.
#[derive(Debug, Clone)]
pub struct Scheduler {
    policy: Policy,
    cap_per_stream: u64,
    stream_count: u64,
    total: u64,
}

impl Scheduler {
    /// `groups` lists the SFs that have at least one assigned recipient;
    /// it is ignored for single-stream schemes.
    pub fn new(scheme: &SchemeConfig, groups: &[SfIndex], cap_per_stream: u64) -> Self {
        let policy = match scheme.plan() {
            Some(plan) => Policy::Single(plan),
            None => {
                let mut order = groups.to_vec();
                order.sort();
                order.dedup();
                Policy::Groups { order, current: 0 }
            }
        };
        Scheduler { policy, cap_per_stream, stream_count: 0, total: 0 }
    }

    pub fn transmitted(&self) -> u64 {
        self.total
    }

    /// Next frame, `Ok(None)` once every recipient is served, or
    /// `Err(NoProgress)` when a stream hits its transmission cap.
    pub fn next_frame(
        &mut self,
        feedback: &impl CompletionFeedback,
    ) -> Result<Option<ScheduledFrame>, NoProgress> {
        let (sf, target) = match &mut self.policy {
            Policy::Single(plan) => {
                if !feedback.pending(Target::All) {
                    return Ok(None);
                }
                (plan.sf_for_transmission(self.stream_count + 1), Target::All)
            }
            Policy::Groups { order, current } => {
                while *current < order.len() && !feedback.pending(Target::Group(order[*current])) {
                    *current += 1;
                    self.stream_count = 0;
                }
                match order.get(*current) {
                    None => return Ok(None),
                    Some(&sf) => (sf, Target::Group(sf)),
                }
            }
        };
        if self.stream_count >= self.cap_per_stream {
            return Err(NoProgress { target, transmitted: self.stream_count });
        }
        self.stream_count += 1;
        self.total += 1;
        Ok(Some(ScheduledFrame { index: self.total, stream_index: self.stream_count, sf, target }))
    }

    /// Abandons the current stream (after a [`NoProgress`]) and moves on to
    /// the next group, if any.
    pub fn skip_stream(&mut self) -> bool {
        self.stream_count = 0;
        match &mut self.policy {
            Policy::Single(_) => false,
            Policy::Groups { order, current } => {
                *current += 1;
                *current < order.len()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn sf(v: u8) -> SfIndex {
        SfIndex::new(v).unwrap()
    }

    #[test]
    fn sequential_sf_rounds() {
        let p = RoundPlan::new(sf(7), sf(12), 300).unwrap();
        assert_eq!(p.sf_for_transmission(1), sf(7));
        assert_eq!(p.sf_for_transmission(300), sf(7));
        assert_eq!(p.sf_for_transmission(301), sf(8));
        assert_eq!(p.sf_for_transmission(6 * 300 + 999), sf(12));
        let q = RoundPlan::new(sf(9), sf(10), 5).unwrap();
        assert_eq!(q.sf_for_transmission(11), sf(10));
        assert_eq!(q.sf_for_transmission(u64::MAX / 2), sf(10));
        assert!(RoundPlan::new(sf(10), sf(9), 5).is_err());
        assert!(RoundPlan::new(sf(7), sf(9), 0).is_err());
    }

    #[test]
    fn ties_go_to_smaller_sf() {
        let costs = [5.0, 5.0, 4.0, 4.0, f64::INFINITY, 9.0];
        assert_eq!(argmin_sf(costs, 1.0).unwrap(), sf(9));
        assert!(argmin_sf([f64::INFINITY; 6], 1.0).is_err());
    }

    struct Remaining(Cell<u64>);

    impl CompletionFeedback for Remaining {
        fn pending(&self, _: Target) -> bool {
            self.0.get() > 0
        }
    }

    #[test]
    fn single_stream_stops_on_completion() {
        let fb = Remaining(Cell::new(12));
        let scheme = SchemeConfig::proposed(7, 12, 5).unwrap();
        let mut s = Scheduler::new(&scheme, &[], 1000);
        let mut n = 0;
        while let Some(f) = s.next_frame(&fb).unwrap() {
            n += 1;
            assert_eq!(f.index, n);
            fb.0.set(fb.0.get() - 1);
        }
        assert_eq!(n, 12);
    }

    struct GroupsLeft(Vec<(SfIndex, Cell<u64>)>);

    impl CompletionFeedback for GroupsLeft {
        fn pending(&self, target: Target) -> bool {
            match target {
                Target::All => self.0.iter().any(|(_, c)| c.get() > 0),
                Target::Group(g) => self.0.iter().any(|(s, c)| *s == g && c.get() > 0),
            }
        }
    }

    #[test]
    fn groups_served_in_ascending_order() {
        let fb = GroupsLeft(vec![(sf(9), Cell::new(2)), (sf(7), Cell::new(3)), (sf(11), Cell::new(0))]);
        let mut s = Scheduler::new(&SchemeConfig::group(GroupCriterion::Energy), &[sf(11), sf(9), sf(7)], 100);
        let mut seen = Vec::new();
        while let Some(f) = s.next_frame(&fb).unwrap() {
            seen.push(f.sf.value());
            let Target::Group(g) = f.target else { panic!() };
            let c = &fb.0.iter().find(|(s, _)| *s == g).unwrap().1;
            c.set(c.get() - 1);
        }
        assert_eq!(seen, vec![7, 7, 7, 9, 9]);
    }

    #[test]
    fn cap_raises_no_progress() {
        let fb = Remaining(Cell::new(1));
        let mut s = Scheduler::new(&SchemeConfig::fixed(11).unwrap(), &[], 3);
        for _ in 0..3 {
            assert!(s.next_frame(&fb).unwrap().is_some());
        }
        let err = s.next_frame(&fb).unwrap_err();
        assert_eq!(err.transmitted, 3);
        assert!(!s.skip_stream());
    }

    #[test]
    fn scheme_serde_roundtrip() {
        let all = vec![
            SchemeConfig::proposed(7, 12, 300).unwrap(),
            SchemeConfig::fixed(10).unwrap(),
            SchemeConfig::group(GroupCriterion::Latency),
        ];
        let json = serde_json::to_string(&all).unwrap();
        let back: Vec<SchemeConfig> = serde_json::from_str(&json).unwrap();
        assert_eq!(all, back);
        assert_eq!(all[0].decoder(DecoderMode::Raptor), DecoderMode::Raptor);
        assert_eq!(all[1].decoder(DecoderMode::Raptor), DecoderMode::Ideal);
        assert_eq!(all[2].label(), "GB-L");
    }
}
