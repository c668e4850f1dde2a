//! Alternative length against look-ahead time and roadmap size.
//!
//! Each `(variant, repetition)` gets its own roadmap seed, and that roadmap
//! is reused for every look-ahead value, so the look-ahead comparison is
//! paired.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::chmap::{local_detect, ChMap};
use crate::error::{Error, Result};
use crate::io::{f6, write_text};
use crate::planner::{prm_build, PrmParams};
use crate::replanner::{sspr, LookAhead, Replan};
use crate::trajectory::Trajectory;

use super::pipeline::{files, read_chmap, read_initial};
use super::scenario::{Scenario, SweepSpec};
use super::seeds::sweep_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lat: f64,
    pub nodes: usize,
    pub d_max: f64,
    pub repetition: usize,
    /// Sampled length of the alternative trajectory.
    pub alt_length: Option<f64>,
    /// Prefix plus roadmap re-route length (the minimized objective).
    pub planned_length: Option<f64>,
    pub status: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummaryRow {
    pub lat: f64,
    pub nodes: usize,
    pub d_max: f64,
    pub runs: usize,
    pub failures: usize,
    pub mean_alt_length: f64,
    pub std_alt_length: f64,
    pub mean_planned_length: f64,
    pub std_planned_length: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row per `(lat, variant, repetition)`, ordered by variant, lat, then
/// repetition.
pub fn sweep_lat(
    sc: &Scenario,
    spec: &SweepSpec,
    chmap: &ChMap,
    initial: &Trajectory,
) -> Result<Vec<SweepRow>> {
    let event = local_detect(chmap, initial, sc.k_now)?
        .ok_or_else(|| Error::Replanning("no coverage hole ahead on the initial trajectory".into()))?;
    let jobs: Vec<(usize, f64, usize)> = spec
        .variants
        .iter()
        .flat_map(|&(n, d)| (0..spec.repetitions).map(move |r| (n, d, r)))
        .collect();
    let per_job: Vec<Vec<SweepRow>> = jobs
        .par_iter()
        .map(|&(nodes, d_max, repetition)| {
            let row = |lat: f64, alt, planned, status| SweepRow {
                lat,
                nodes,
                d_max,
                repetition,
                alt_length: alt,
                planned_length: planned,
                status,
            };
            let prm = prm_build(
                chmap.grid(),
                PrmParams {
                    nodes,
                    d_max,
                    seed: sweep_seed(sc.seed, nodes, d_max, repetition),
                },
            );
            let Ok(prm) = prm else {
                return spec.lat_values.iter().map(|&l| row(l, None, None, "roadmap_failed")).collect();
            };
            spec.lat_values
                .iter()
                .map(|&lat| {
                    let la = LookAhead { lat };
                    match sspr(chmap, &prm, initial, sc.k_now, Some(&event), la, &sc.profile) {
                        Ok(Replan::Rerouted(r)) => row(lat, Some(r.alt_length), Some(r.planned_length), "ok"),
                        Ok(Replan::Unchanged(_)) => row(lat, None, None, "no_event"),
                        Err(_) => row(lat, None, None, "infeasible"),
                    }
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<SweepRow> = per_job.into_iter().flatten().collect();
    let vi = |n: usize, d: f64| spec.variants.iter().position(|&v| v == (n, d)).unwrap_or(0);
    let li = |l: f64| spec.lat_values.iter().position(|&v| v == l).unwrap_or(0);
    rows.sort_by_key(|r| (vi(r.nodes, r.d_max), li(r.lat), r.repetition));
    Ok(rows)
}

/// Per `(variant, lat)` statistics over successful repetitions.
pub fn summarize(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<SweepSummaryRow> {
    let mut out = Vec::new();
    for &(nodes, d_max) in &spec.variants {
        for &lat in &spec.lat_values {
            let cell: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.nodes == nodes && r.d_max == d_max && r.lat == lat)
                .collect();
            let alt: Vec<f64> = cell.iter().filter_map(|r| r.alt_length).collect();
            let planned: Vec<f64> = cell.iter().filter_map(|r| r.planned_length).collect();
            let (mean_alt_length, std_alt_length) = mean_std(&alt);
            let (mean_planned_length, std_planned_length) = mean_std(&planned);
            out.push(SweepSummaryRow {
                lat,
                nodes,
                d_max,
                runs: cell.len(),
                failures: cell.len() - alt.len(),
                mean_alt_length,
                std_alt_length,
                mean_planned_length,
                std_planned_length,
            });
        }
    }
    out
}

pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("lat,n,d_max,repetition,alt_length,planned_length,status\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.lat,
            r.nodes,
            r.d_max,
            r.repetition,
            f6(r.alt_length.unwrap_or(f64::NAN)),
            f6(r.planned_length.unwrap_or(f64::NAN)),
            r.status
        );
    }
    s
}

pub fn summary_csv(rows: &[SweepSummaryRow]) -> String {
    let mut s = String::from(
        "lat,n,d_max,runs,failures,mean_alt_length,std_alt_length,mean_planned_length,std_planned_length\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.lat,
            r.nodes,
            r.d_max,
            r.runs,
            r.failures,
            f6(r.mean_alt_length),
            f6(r.std_alt_length),
            f6(r.mean_planned_length),
            f6(r.std_planned_length)
        );
    }
    s
}

/// Sweep on the coverage map and initial trajectory of a run directory.
pub fn stage_sweep(sc: &Scenario, dir: &Path) -> Result<Vec<SweepSummaryRow>> {
    let chmap = read_chmap(dir)?;
    let initial = read_initial(dir)?;
    let rows = sweep_lat(sc, &sc.sweep, &chmap, &initial)?;
    let summary = summarize(&sc.sweep, &rows);
    write_text(&dir.join(files::SWEEP), &rows_csv(&rows))?;
    write_text(&dir.join(files::SWEEP_SUMMARY), &summary_csv(&summary))?;
    Ok(summary)
}
