//! Side-by-side evaluation of the proposed scheme and the fixed-SF and
//! group-based benchmarks on one network.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{Analyzer, DistanceQuadrature, SuccessTable};
use crate::config::{ExperimentSpec, Mode};
use crate::error::{Error, Result};
use crate::fec::RatelessModel;
use crate::phy::SfIndex;
use crate::schemes::{assign_group, RoundPlan, SchemeConfig};
use crate::sim::{run_experiment, ExperimentResult, RecipientLayout, SimSetup};

/// Success tables at the nodes of a distance rule, shared by every scheme
/// and round plan evaluated on it.
#[derive(Debug, Clone)]
pub struct DistanceTables<'a> {
    pub analyzer: &'a Analyzer,
    pub rule: DistanceQuadrature,
    tables: Vec<SuccessTable>,
}

/// Normalised energy and delivery time at one distance node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeMetric {
    pub ee_norm: f64,
    /// `None` for group-based schemes, whose delivery time depends on the
    /// other groups.
    pub dt_hours: Option<f64>,
}

impl<'a> DistanceTables<'a> {
    pub fn new(analyzer: &'a Analyzer, rule: DistanceQuadrature) -> Result<Self> {
        let tables = rule
            .distances
            .par_iter()
            .map(|&d| analyzer.success_table(d))
            .collect::<Result<Vec<_>>>()?;
        Ok(DistanceTables { analyzer, rule, tables })
    }

    /// Plan used at node `idx` under `scheme`.
    fn plan_at(&self, scheme: &SchemeConfig, fec: &RatelessModel, idx: usize) -> Result<RoundPlan> {
        match (scheme.plan(), scheme) {
            (Some(p), _) => Ok(p),
            (None, SchemeConfig::GroupBased { criterion, .. }) => {
                let sf = assign_group(*criterion, self.rule.distances[idx], self.analyzer, fec.k)?;
                Ok(RoundPlan::fixed(sf))
            }
            (None, _) => unreachable!("only group-based schemes lack a plan"),
        }
    }

    /// Metric at every node.
    pub fn node_metrics(&self, scheme: &SchemeConfig, fec: &RatelessModel) -> Result<Vec<NodeMetric>> {
        let norm = self.analyzer.normalization_energy();
        let ns_bar = fec.expected_fragments();
        let grouped = scheme.plan().is_none();
        (0..self.tables.len())
            .into_par_iter()
            .map(|i| {
                let plan = self.plan_at(scheme, fec, i)?;
                let o = self.analyzer.evaluate_table(&self.tables[i], &plan, ns_bar)?;
                Ok(NodeMetric {
                    ee_norm: o.energy_fragments_j / norm,
                    dt_hours: (!grouped).then_some(o.update_time_s / 3600.0),
                })
            })
            .collect()
    }

    /// Weighted average of node metrics, weights renormalised.
    pub fn average(metrics: &[NodeMetric], weights: &[f64]) -> NodeMetric {
        let total: f64 = weights.iter().sum();
        let ee = metrics.iter().zip(weights).map(|(m, w)| m.ee_norm * w).sum::<f64>() / total;
        let dt = metrics
            .iter()
            .zip(weights)
            .map(|(m, w)| m.dt_hours.map(|d| d * w))
            .sum::<Option<f64>>()
            .map(|s| s / total);
        NodeMetric { ee_norm: ee, dt_hours: dt }
    }
}

/// Averaged metrics of one scheme at one interferer intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub scheme: String,
    pub intensity_per_m2: f64,
    pub ee_norm_analysis: Option<f64>,
    pub dt_hours_analysis: Option<f64>,
    pub ee_norm_sim: Option<f64>,
    pub ee_norm_sim_stderr: Option<f64>,
    pub dt_hours_sim: Option<f64>,
    pub dt_hours_sim_stderr: Option<f64>,
    pub incomplete_recipients: u64,
    /// Distances where analysis found the scheme cannot deliver.
    pub unreachable: bool,
}

/// Analysis and simulation output for one scheme.
#[derive(Debug, Clone)]
pub struct SchemeEvaluation {
    pub row: SchemeRow,
    pub sim: Option<ExperimentResult>,
}

pub fn layout_of(spec: &ExperimentSpec) -> RecipientLayout {
    RecipientLayout::Disc {
        count: spec.layout.recipients,
        radius_m: spec.layout.radius_m,
        placement: spec.layout.placement,
    }
}

/// Evaluates every scheme in `spec.experiment.schemes`. Simulations share
/// the seed, so schemes see the same layouts and interferer fields.
pub fn evaluate_suite(spec: &ExperimentSpec, mode: Mode) -> Result<Vec<SchemeEvaluation>> {
    let analyzer = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    let tables = if mode.analysis() {
        let rule = DistanceQuadrature::new(
            spec.layout.radius_m,
            spec.analysis.distance_panels,
            spec.analysis.distance_order,
        )?;
        Some(DistanceTables::new(&analyzer, rule)?)
    } else {
        None
    };
    let mut out = Vec::new();
    for scheme in &spec.experiment.schemes {
        let fec = spec.fec_for(scheme);
        let mut row = SchemeRow {
            scheme: scheme.label(),
            intensity_per_m2: spec.network.interferers.intensity_per_m2,
            ee_norm_analysis: None,
            dt_hours_analysis: None,
            ee_norm_sim: None,
            ee_norm_sim_stderr: None,
            dt_hours_sim: None,
            dt_hours_sim_stderr: None,
            incomplete_recipients: 0,
            unreachable: false,
        };
        if let Some(t) = &tables {
            match t.node_metrics(scheme, &fec) {
                Ok(m) => {
                    let avg = DistanceTables::average(&m, &t.rule.weights);
                    row.ee_norm_analysis = Some(avg.ee_norm);
                    row.dt_hours_analysis = avg.dt_hours;
                }
                Err(Error::Unreachable { distance_m, sf, .. }) => {
                    log::warn!("{scheme}: recipients at {distance_m:.0} m unreachable on SF{sf}");
                    row.unreachable = true;
                }
                Err(e) => return Err(e),
            }
        }
        let sim = if mode.simulate() {
            let setup = SimSetup {
                analyzer: &analyzer,
                scheme: scheme.clone(),
                fec: fec.clone(),
                layout: layout_of(spec),
                cap_factor: spec.simulation.cap_factor,
                record_trace: false,
            };
            let r = run_experiment(&setup, spec.experiment.seed, spec.experiment.runs, spec.layout.distance_bins)?;
            row.ee_norm_sim = Some(r.avg_ee_norm);
            row.ee_norm_sim_stderr = Some(r.avg_ee_norm_stderr);
            row.dt_hours_sim = Some(r.avg_dt_hours);
            row.dt_hours_sim_stderr = Some(r.avg_dt_hours_stderr);
            row.incomplete_recipients = r.incomplete_recipients;
            Some(r)
        } else {
            None
        };
        out.push(SchemeEvaluation { row, sim });
    }
    Ok(out)
}

/// The suite repeated at each interferer intensity.
pub fn intensity_sweep(spec: &ExperimentSpec, intensities: &[f64], mode: Mode) -> Result<Vec<SchemeRow>> {
    let mut rows = Vec::new();
    for &lambda in intensities {
        let mut s = spec.clone();
        s.network.interferers.intensity_per_m2 = lambda;
        rows.extend(evaluate_suite(&s, mode)?.into_iter().map(|e| e.row));
    }
    Ok(rows)
}

/// SF each group-based recipient at the given distances is assigned to.
pub fn group_assignments(
    analyzer: &Analyzer,
    scheme: &SchemeConfig,
    k: u32,
    distances: &[f64],
) -> Result<Vec<SfIndex>> {
    let SchemeConfig::GroupBased { criterion, .. } = scheme else {
        return Err(Error::InvalidParameter(format!("{scheme} is not group-based")));
    };
    distances.iter().map(|&d| assign_group(*criterion, d, analyzer, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_spec;

    #[test]
    fn single_scheme_suite_matches_plain_experiment() {
        let mut spec = default_spec("b", Mode::Simulate);
        spec.experiment.schemes = vec![SchemeConfig::fixed(12).unwrap()];
        spec.experiment.runs = 2;
        spec.layout.recipients = 10;
        let rows = evaluate_suite(&spec, Mode::Simulate).unwrap();
        assert_eq!(rows.len(), 1);
        let an = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options).unwrap();
        let scheme = spec.experiment.schemes[0].clone();
        let setup = SimSetup {
            analyzer: &an,
            fec: spec.fec_for(&scheme),
            scheme,
            layout: layout_of(&spec),
            cap_factor: spec.simulation.cap_factor,
            record_trace: false,
        };
        let plain = run_experiment(&setup, spec.experiment.seed, 2, spec.layout.distance_bins).unwrap();
        assert_eq!(rows[0].row.ee_norm_sim, Some(plain.avg_ee_norm));
        assert_eq!(rows[0].row.dt_hours_sim, Some(plain.avg_dt_hours));
    }

    #[test]
    fn analysis_rows_for_group_schemes_have_no_time() {
        let mut spec = default_spec("b", Mode::Analysis);
        spec.experiment.schemes = vec![SchemeConfig::group(crate::schemes::GroupCriterion::Energy)];
        spec.analysis.distance_panels = 2;
        let rows = evaluate_suite(&spec, Mode::Analysis).unwrap();
        assert!(rows[0].row.ee_norm_analysis.unwrap() > 1.0);
        assert_eq!(rows[0].row.dt_hours_analysis, None);
        assert!(rows[0].sim.is_none());
    }
}
