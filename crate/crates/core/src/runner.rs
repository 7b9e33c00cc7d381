//! Experiment drivers behind the command-line verbs. Each writes CSV
//! tables plus a manifest into an output directory.
//!
//! Every CSV starts with one comment line,
//! `# fuota-csv v1 fingerprint=<hex> seed=<u64>`, followed by a header row.
//! Empty cells mean "not computed in this mode".

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{Analyzer, DistanceQuadrature};
use crate::benchmarks::{evaluate_suite, layout_of, DistanceTables, SchemeRow};
use crate::config::{ExperimentSpec, Mode};
use crate::error::{Error, Result};
use crate::lifetime::{battery_lifetime_years, rx_hours_from_energy};
use crate::schemes::{RoundPlan, SchemeConfig};
use crate::sim::{grid_distances, run_experiment, RecipientLayout, SimSetup};

pub const CSV_VERSION: &str = "fuota-csv v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub scheme: String,
    pub bin_lo_m: f64,
    pub bin_hi_m: f64,
    pub distance_m: f64,
    pub ee_norm_analysis: Option<f64>,
    pub ee_norm_sim: Option<f64>,
    pub ee_norm_sim_stderr: Option<f64>,
    pub dt_hours_analysis: Option<f64>,
    pub dt_hours_sim: Option<f64>,
    pub dt_hours_sim_stderr: Option<f64>,
    pub sim_samples: Option<u64>,
    pub sim_incomplete: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub l: u8,
    pub m: u8,
    pub w: u32,
    pub avg_ee_norm_analysis: Option<f64>,
    pub avg_dt_hours_analysis: Option<f64>,
    pub avg_ee_norm_sim: Option<f64>,
    pub avg_dt_hours_sim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeRow {
    pub scheme: String,
    pub distance_m: f64,
    pub uplink_sf: u8,
    pub rx_hours_analysis: Option<f64>,
    pub lifetime_years_analysis: Option<f64>,
    pub dt_hours_analysis: Option<f64>,
    pub rx_hours_sim: Option<f64>,
    pub lifetime_years_sim: Option<f64>,
    pub dt_hours_sim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub verb: String,
    pub name: String,
    pub mode: Mode,
    pub seed: u64,
    pub runs: u32,
    pub fingerprint: String,
    pub files: Vec<String>,
    pub incomplete: bool,
    pub config: ExperimentSpec,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub incomplete: bool,
    pub manifest: Manifest,
}

fn write_csv<T: Serialize>(path: &Path, spec: &ExperimentSpec, rows: &[T]) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(file, "# {CSV_VERSION} fingerprint={} seed={}", spec.fingerprint()?, spec.experiment.seed)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads rows written by this module, skipping the comment line.
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn finish(
    verb: &str,
    spec: &ExperimentSpec,
    mode: Mode,
    out: &Path,
    mut files: Vec<PathBuf>,
    incomplete: bool,
) -> Result<RunOutcome> {
    let config_path = out.join("config.toml");
    fs::write(&config_path, spec.to_toml()?).map_err(|e| Error::io(&config_path, e))?;
    files.push(config_path);
    let manifest = Manifest {
        format: "fuota-manifest v1".into(),
        verb: verb.into(),
        name: spec.experiment.name.clone(),
        mode,
        seed: spec.experiment.seed,
        runs: if mode.simulate() { spec.experiment.runs } else { 0 },
        fingerprint: spec.fingerprint()?,
        files: files
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
        incomplete,
        config: spec.clone(),
    };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok(RunOutcome { files, incomplete, manifest })
}

fn ensure_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Per-distance rows and scheme averages for `mode`.
pub fn distance_and_average_rows(spec: &ExperimentSpec, mode: Mode) -> Result<(Vec<DistanceRow>, Vec<SchemeRow>)> {
    let suite = evaluate_suite(spec, mode)?;
    let analyzer = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    let bins = spec.layout.distance_bins as usize;
    let width = spec.layout.radius_m / bins as f64;
    let ring_tables = if mode.analysis() {
        let (rule, ranges) = DistanceQuadrature::rings(spec.layout.radius_m, bins, spec.analysis.bin_order)?;
        Some((DistanceTables::new(&analyzer, rule)?, ranges))
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut averages = Vec::new();
    for (scheme, eval) in spec.experiment.schemes.iter().zip(suite) {
        let per_node = match &ring_tables {
            Some((t, _)) => t.node_metrics(scheme, &spec.fec_for(scheme)).ok(),
            None => None,
        };
        for b in 0..bins {
            let mut row = DistanceRow {
                scheme: scheme.label(),
                bin_lo_m: b as f64 * width,
                bin_hi_m: (b + 1) as f64 * width,
                distance_m: (b as f64 + 0.5) * width,
                ee_norm_analysis: None,
                ee_norm_sim: None,
                ee_norm_sim_stderr: None,
                dt_hours_analysis: None,
                dt_hours_sim: None,
                dt_hours_sim_stderr: None,
                sim_samples: None,
                sim_incomplete: None,
            };
            if let (Some((t, ranges)), Some(m)) = (&ring_tables, &per_node) {
                let r = ranges[b].clone();
                let avg = DistanceTables::average(&m[r.clone()], &t.rule.weights[r]);
                row.ee_norm_analysis = Some(avg.ee_norm);
                row.dt_hours_analysis = avg.dt_hours;
            }
            if let Some(sim) = &eval.sim {
                let s = &sim.bins[b];
                let finite = |x: f64| x.is_finite().then_some(x);
                row.ee_norm_sim = finite(s.ee_norm_mean);
                row.ee_norm_sim_stderr = finite(s.ee_norm_stderr);
                row.dt_hours_sim = finite(s.dt_hours_mean);
                row.dt_hours_sim_stderr = finite(s.dt_hours_stderr);
                row.sim_samples = Some(s.samples);
                row.sim_incomplete = Some(s.incomplete);
            }
            rows.push(row);
        }
        averages.push(eval.row);
    }
    Ok((rows, averages))
}

/// `analyze` and `simulate`: per-distance and averaged tables.
pub fn run_tables(verb: &str, spec: &ExperimentSpec, mode: Mode, out: &Path) -> Result<RunOutcome> {
    ensure_dir(out)?;
    let (rows, averages) = distance_and_average_rows(spec, mode)?;
    let incomplete = averages.iter().any(|r| r.incomplete_recipients > 0);
    let per_distance = out.join("per_distance.csv");
    write_csv(&per_distance, spec, &rows)?;
    let avg = out.join("averages.csv");
    write_csv(&avg, spec, &averages)?;
    finish(verb, spec, mode, out, vec![per_distance, avg], incomplete)
}

/// Average metrics of the proposed scheme over the `(w, L)` grid.
pub fn sweep_rows(spec: &ExperimentSpec, mode: Mode) -> Result<(Vec<SweepRow>, bool)> {
    let analyzer = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    let tables = if mode.analysis() {
        let rule = DistanceQuadrature::new(spec.layout.radius_m, spec.analysis.distance_panels, spec.analysis.distance_order)?;
        Some(DistanceTables::new(&analyzer, rule)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut incomplete = false;
    for &l in &spec.sweep.l {
        for &w in &spec.sweep.w {
            let plan = RoundPlan::new(l, spec.sweep.m, w)?;
            let scheme = SchemeConfig::Proposed { l, m: spec.sweep.m, w, decoder: None };
            let fec = spec.fec_for(&scheme);
            let mut row = SweepRow {
                l: plan.l.value(),
                m: plan.m.value(),
                w,
                avg_ee_norm_analysis: None,
                avg_dt_hours_analysis: None,
                avg_ee_norm_sim: None,
                avg_dt_hours_sim: None,
            };
            if let Some(t) = &tables {
                let m = t.node_metrics(&scheme, &fec)?;
                let avg = DistanceTables::average(&m, &t.rule.weights);
                row.avg_ee_norm_analysis = Some(avg.ee_norm);
                row.avg_dt_hours_analysis = avg.dt_hours;
            }
            if mode.simulate() {
                let setup = SimSetup {
                    analyzer: &analyzer,
                    scheme,
                    fec,
                    layout: layout_of(spec),
                    cap_factor: spec.simulation.cap_factor,
                    record_trace: false,
                };
                let r = run_experiment(&setup, spec.experiment.seed, spec.experiment.runs, spec.layout.distance_bins)?;
                incomplete |= r.incomplete();
                row.avg_ee_norm_sim = Some(r.avg_ee_norm);
                row.avg_dt_hours_sim = Some(r.avg_dt_hours);
            }
            log::info!("sweep L={} w={w} done", l.value());
            rows.push(row);
        }
    }
    Ok((rows, incomplete))
}

pub fn run_sweep(spec: &ExperimentSpec, mode: Mode, out: &Path) -> Result<RunOutcome> {
    ensure_dir(out)?;
    let (rows, incomplete) = sweep_rows(spec, mode)?;
    let path = out.join("sweep.csv");
    write_csv(&path, spec, &rows)?;
    finish("sweep", spec, mode, out, vec![path], incomplete)
}

/// Receive hours, lifetime and delivery time for each lifetime scheme and
/// case. Simulated figures come from one extra recipient at the case
/// distance, placed among a fixed ring layout of the usual population.
pub fn lifetime_rows(spec: &ExperimentSpec, mode: Mode) -> Result<(Vec<LifetimeRow>, bool)> {
    let analyzer = Analyzer::new(&spec.phy, &spec.network, &spec.analysis.options)?;
    let p_r = spec.phy.rx_power_w;
    let control_rx = p_r * spec.network.control_airtime_s;
    let mut rows = Vec::new();
    let mut incomplete = false;
    for scheme in &spec.lifetime.lifetime_schemes {
        let fec = spec.fec_for(scheme);
        for case in &spec.lifetime.cases {
            let d = case.radius_fraction * spec.layout.radius_m;
            let profile = spec.lifetime.profile(case.uplink_sf);
            let mut row = LifetimeRow {
                scheme: scheme.label(),
                distance_m: d,
                uplink_sf: case.uplink_sf.value(),
                rx_hours_analysis: None,
                lifetime_years_analysis: None,
                dt_hours_analysis: None,
                rx_hours_sim: None,
                lifetime_years_sim: None,
                dt_hours_sim: None,
            };
            if mode.analysis() {
                let plan = match (scheme.plan(), scheme) {
                    (Some(p), _) => p,
                    (None, SchemeConfig::GroupBased { criterion, .. }) => {
                        RoundPlan::fixed(crate::schemes::assign_group(*criterion, d, &analyzer, fec.k)?)
                    }
                    (None, _) => unreachable!(),
                };
                let o = analyzer.evaluate(d, &plan, &fec)?;
                let ru = rx_hours_from_energy(o.energy_fragments_j + control_rx, p_r);
                row.rx_hours_analysis = Some(ru);
                row.lifetime_years_analysis = Some(battery_lifetime_years(&profile, ru, &spec.phy)?);
                row.dt_hours_analysis = scheme.plan().map(|_| o.update_time_s / 3600.0);
            }
            if mode.simulate() {
                let mut distances = grid_distances(spec.layout.recipients, spec.layout.radius_m);
                distances.push(d);
                let setup = SimSetup {
                    analyzer: &analyzer,
                    scheme: scheme.clone(),
                    fec: fec.clone(),
                    layout: RecipientLayout::Fixed(distances),
                    cap_factor: spec.simulation.cap_factor,
                    record_trace: false,
                };
                let r = run_experiment(&setup, spec.experiment.seed, spec.experiment.runs, 1)?;
                let n = spec.layout.recipients as usize + 1;
                let probe: Vec<_> = r.recipients.chunks(n).map(|c| &c[n - 1]).collect();
                let done: Vec<_> = probe.iter().filter(|o| o.completed()).collect();
                if done.len() < probe.len() {
                    incomplete = true;
                }
                if !done.is_empty() {
                    let k = done.len() as f64;
                    let e = done.iter().map(|o| o.energy_fragments_j).sum::<f64>() / k;
                    let t = done.iter().filter_map(|o| o.completed_at_s).sum::<f64>() / k;
                    let ru = rx_hours_from_energy(e + control_rx, p_r);
                    row.rx_hours_sim = Some(ru);
                    row.lifetime_years_sim = Some(battery_lifetime_years(&profile, ru, &spec.phy)?);
                    row.dt_hours_sim = Some(t / 3600.0);
                }
            }
            rows.push(row);
        }
    }
    Ok((rows, incomplete))
}

pub fn run_lifetime(spec: &ExperimentSpec, mode: Mode, out: &Path) -> Result<RunOutcome> {
    ensure_dir(out)?;
    let (rows, incomplete) = lifetime_rows(spec, mode)?;
    let path = out.join("lifetime.csv");
    write_csv(&path, spec, &rows)?;
    finish("lifetime", spec, mode, out, vec![path], incomplete)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub scheme: String,
    pub distance_m: f64,
    pub metric: String,
    pub reference: f64,
    pub candidate: f64,
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub tolerance: f64,
}

impl CompareReport {
    pub fn pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max)
    }
}

type Pair = (Option<f64>, Option<f64>);

fn metric_pairs(r: &DistanceRow) -> [(&'static str, Pair); 2] {
    [
        ("ee_norm", (r.ee_norm_analysis, r.ee_norm_sim)),
        ("dt_hours", (r.dt_hours_analysis, r.dt_hours_sim)),
    ]
}

/// Column pairs to compare: same-named columns where both files have them,
/// otherwise whatever each side provides (analysis file against a
/// simulation file).
fn pair_values(reference: Pair, candidate: Pair) -> Vec<(&'static str, f64, f64)> {
    let mut out = Vec::new();
    if let (Some(a), Some(b)) = (reference.0, candidate.0) {
        out.push(("analysis", a, b));
    }
    if let (Some(a), Some(b)) = (reference.1, candidate.1) {
        out.push(("sim", a, b));
    }
    if out.is_empty() {
        if let (Some(a), Some(b)) = (reference.0.or(reference.1), candidate.1.or(candidate.0)) {
            out.push(("cross", a, b));
        }
    }
    out
}

/// Relative differences between two per-distance CSV files.
pub fn compare_files(reference: &Path, candidate: &Path, tolerance: f64) -> Result<CompareReport> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be non-negative, got {tolerance}")));
    }
    let key = |r: &DistanceRow| (r.scheme.clone(), r.distance_m.to_bits());
    let cand: BTreeMap<_, DistanceRow> =
        read_csv::<DistanceRow>(candidate)?.into_iter().map(|r| (key(&r), r)).collect();
    let mut rows = Vec::new();
    for r in read_csv::<DistanceRow>(reference)? {
        let Some(c) = cand.get(&key(&r)) else { continue };
        for ((metric, rp), (_, cp)) in metric_pairs(&r).into_iter().zip(metric_pairs(c)) {
            for (kind, a, b) in pair_values(rp, cp) {
                let rel = if a == b { 0.0 } else { (b - a).abs() / a.abs() };
                rows.push(CompareRow {
                    scheme: r.scheme.clone(),
                    distance_m: r.distance_m,
                    metric: format!("{metric}_{kind}"),
                    reference: a,
                    candidate: b,
                    rel_error: rel,
                    pass: rel <= tolerance,
                });
            }
        }
    }
    Ok(CompareReport { rows, tolerance })
}

pub fn write_compare_report(report: &CompareReport, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in &report.rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
