//! End-to-end run, split into stages that read and write a run directory.
//!
//! Every stage reads its inputs from the files earlier stages wrote, so
//! running the stages one by one gives the same bytes as `run_pipeline`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::chmap::{build_chmap, local_detect, ChMap, CoverageHoleEvent};
use crate::dataset::{build_dataset, split, LabeledDataset, Normalization, Splits, LABEL_CH, LABEL_COVERED};
use crate::error::{Error, Result};
use crate::follower::{trace_csv, AgvState, Simulation, TraceRow};
use crate::gridworld::{GridMap, WorldPoint};
use crate::io::write_text;
use crate::planner::{prm_build, shortest_route, PrmGraph, PrmParams};
use crate::radio::{gen_rss_maps, sample_receivers, RadioConfig, RssMap, RssVariant};
use crate::replanner::{lat_from_event, sspr, LookAhead, Replan, SsprResult};
use crate::svc::{cross_validate, operating_point, roc_curve, train, CvResult, OperatingPoint, RocCurve, SvcModel};
use crate::trajectory::{interpolate_safe, StartState, Trajectory};

use super::report::{report_detection, DetectionReport};
use super::scenario::Scenario;
use super::seeds::{self, derive_seed};

pub mod files {
    pub const MANIFEST: &str = "manifest.txt";
    pub const LAYOUT: &str = "layout.pgm";
    pub const RSS_PL: &str = "rss_pl.csv";
    pub const RSS_SF: &str = "rss_sf.csv";
    pub const TRAIN: &str = "dataset_train.csv";
    pub const VALIDATION: &str = "dataset_val.csv";
    pub const TEST: &str = "dataset_test.csv";
    pub const CV_SCORES: &str = "cv_scores.csv";
    pub const MODEL: &str = "model.svc";
    pub const ROC_VALIDATION: &str = "roc_validation.csv";
    pub const ROC: &str = "roc.csv";
    pub const METRICS: &str = "metrics.csv";
    pub const CONFUSION: &str = "confusion.csv";
    pub const CHMAP: &str = "chmap.pgm";
    pub const CH_CELLS: &str = "ch_cells.csv";
    pub const PRM_INITIAL_NODES: &str = "prm_initial_nodes.csv";
    pub const PRM_INITIAL_EDGES: &str = "prm_initial_edges.csv";
    pub const TRAJ_INITIAL: &str = "trajectory_initial.csv";
    pub const REPLAN: &str = "replan.txt";
    pub const PRM_REPLAN_NODES: &str = "prm_replan_nodes.csv";
    pub const PRM_REPLAN_EDGES: &str = "prm_replan_edges.csv";
    pub const SSPR_TRACE: &str = "sspr_trace.csv";
    pub const TRAJ_ALT: &str = "trajectory_alt.csv";
    pub const FOLLOW_TRACE: &str = "follow_trace.csv";
    pub const SUMMARY: &str = "summary.txt";
    pub const SWEEP: &str = "sweep_lat.csv";
    pub const SWEEP_SUMMARY: &str = "sweep_summary.csv";
}

/// Radio parameters with the stage seed filled in.
pub fn radio_config(sc: &Scenario) -> RadioConfig {
    RadioConfig {
        seed: derive_seed(sc.seed, seeds::RADIO),
        ..sc.radio.clone()
    }
}

pub fn generate_maps(sc: &Scenario, layout: &GridMap) -> Result<(RssMap, RssMap)> {
    gen_rss_maps(layout, &sc.tx, &radio_config(sc))
}

pub fn make_dataset(sc: &Scenario, pl: &RssMap, sf: &RssMap) -> Result<Splits> {
    let positions = sample_receivers(pl.grid(), sc.receivers, derive_seed(sc.seed, seeds::RECEIVERS))?;
    let ds = build_dataset(pl, sf, &sc.tx, &radio_config(sc), &positions)?;
    split(&ds, sc.split, derive_seed(sc.seed, seeds::SPLIT))
}

#[derive(Debug, Clone)]
pub struct Detector {
    pub model: SvcModel,
    pub cv: Option<CvResult>,
    pub validation_roc: Option<RocCurve>,
    pub operating_point: Option<OperatingPoint>,
    /// Training data had one class; the model is a constant.
    pub constant: bool,
}

/// Cross-validated training on `train`; the decision threshold is the
/// g-mean operating point of the validation ROC.
pub fn train_detector(sc: &Scenario, train_set: &LabeledDataset, validation: &LabeledDataset) -> Result<Detector> {
    let norm = Normalization::fit(&train_set.rows).map_err(|e| Error::Training(e.to_string()))?;
    if !train_set.has_both_classes() {
        let label = if train_set.count_label(LABEL_CH) > 0 { LABEL_CH } else { LABEL_COVERED };
        return Ok(Detector {
            model: SvcModel::constant(label, Some(norm)),
            cv: None,
            validation_roc: None,
            operating_point: None,
            constant: true,
        });
    }
    let x: Vec<Vec<f64>> = train_set.rows.iter().map(|r| norm.apply(r)).collect();
    let cv = cross_validate(
        &x,
        &train_set.labels,
        &sc.c_grid,
        &sc.gamma_grid,
        sc.folds,
        derive_seed(sc.seed, seeds::CV),
        sc.smo,
    )?;
    let (mut model, _) = train(&x, &train_set.labels, cv.best_c, cv.best_gamma, sc.smo)?;
    model.normalization = Some(norm.clone());
    let (validation_roc, op) = if validation.has_both_classes() {
        let vx: Vec<Vec<f64>> = validation.rows.iter().map(|r| norm.apply(r)).collect();
        let roc = roc_curve(&model, &vx, &validation.labels)?;
        let op = operating_point(&roc)?;
        model.decision_threshold = op.threshold;
        (Some(roc), Some(op))
    } else {
        (None, None)
    };
    Ok(Detector {
        model,
        cv: Some(cv),
        validation_roc,
        operating_point: op,
        constant: false,
    })
}

#[derive(Debug, Clone)]
pub struct InitialPlan {
    pub prm: PrmGraph,
    pub waypoints: Vec<WorldPoint>,
    pub trajectory: Trajectory,
}

/// Start-to-target reference on the layout alone (no coverage knowledge).
pub fn plan_initial(sc: &Scenario, layout: &GridMap) -> Result<InitialPlan> {
    let prm = prm_build(
        layout,
        PrmParams {
            nodes: sc.prm_nodes,
            d_max: sc.prm_d_max,
            seed: derive_seed(sc.seed, seeds::PRM_INITIAL),
        },
    )?;
    let (waypoints, _) = shortest_route(&prm, layout, sc.start, sc.target)?
        .ok_or_else(|| Error::Planning("no roadmap path from start to target".into()))?;
    let trajectory = interpolate_safe(&waypoints, &sc.profile, StartState::default(), layout)?;
    Ok(InitialPlan {
        prm,
        waypoints,
        trajectory,
    })
}

#[derive(Debug, Clone)]
pub struct ReplanOutcome {
    pub event: Option<CoverageHoleEvent>,
    pub lat: Option<LookAhead>,
    /// Roadmap on the coverage map, built only when there is an event.
    pub prm: Option<PrmGraph>,
    pub replan: Replan,
}

impl ReplanOutcome {
    pub fn result(&self) -> Option<&SsprResult> {
        match &self.replan {
            Replan::Rerouted(r) => Some(r),
            Replan::Unchanged(_) => None,
        }
    }
}

/// Checks the reference ahead of `k_now` against the coverage map and
/// re-plans around the first hole.
pub fn replan_on(sc: &Scenario, chmap: &ChMap, initial: &Trajectory, prm_seed: u64) -> Result<ReplanOutcome> {
    let event = local_detect(chmap, initial, sc.k_now)?;
    let Some(ev) = event else {
        return Ok(ReplanOutcome {
            event: None,
            lat: None,
            prm: None,
            replan: Replan::Unchanged(initial.clone()),
        });
    };
    let mut lat = lat_from_event(sc.k_now, &ev, initial.dt)?;
    if let Some(budget) = sc.lat_budget {
        lat = lat.clamp(budget);
    }
    let prm = prm_build(
        chmap.grid(),
        PrmParams {
            nodes: sc.prm_nodes,
            d_max: sc.prm_d_max,
            seed: prm_seed,
        },
    )?;
    let replan = sspr(chmap, &prm, initial, sc.k_now, Some(&ev), lat, &sc.profile)?;
    Ok(ReplanOutcome {
        event: Some(ev),
        lat: Some(lat),
        prm: Some(prm),
        replan,
    })
}

/// Tracks `initial` up to `k_now`, then the alternative (if any) to the end.
pub fn follow(sc: &Scenario, initial: &Trajectory, alternative: Option<&Trajectory>) -> Result<Vec<TraceRow>> {
    let r0 = initial.samples[0];
    let start = AgvState {
        theta: crate::follower::wrap_angle(r0.theta + sc.theta_offset),
        ..AgvState::at_reference(&r0)
    };
    let mut sim = Simulation::new(initial.clone(), start, sc.gains)?;
    if let Some(alt) = alternative {
        sim.run_until(sc.k_now);
        sim.replace_reference(alt.clone())?;
    }
    sim.run_to_end();
    Ok(sim.into_trace())
}

// ---- directory stages ----

fn read_pgm(path: &Path) -> Result<GridMap> {
    GridMap::read_pgm(BufReader::new(File::open(path)?))
}

fn read_rss(dir: &Path, layout: &GridMap, variant: RssVariant) -> Result<RssMap> {
    let name = match variant {
        RssVariant::PathLoss => files::RSS_PL,
        RssVariant::Fading => files::RSS_SF,
    };
    RssMap::read_csv(layout, variant, BufReader::new(File::open(dir.join(name))?))
}

pub fn read_layout(dir: &Path) -> Result<GridMap> {
    read_pgm(&dir.join(files::LAYOUT))
}

pub fn read_model(dir: &Path) -> Result<SvcModel> {
    SvcModel::from_text(&std::fs::read_to_string(dir.join(files::MODEL))?)
}

pub fn read_chmap(dir: &Path) -> Result<ChMap> {
    let layout = read_layout(dir)?;
    ChMap::from_pgm(&layout, &read_pgm(&dir.join(files::CHMAP))?)
}

pub fn read_initial(dir: &Path) -> Result<Trajectory> {
    Trajectory::read_csv(&dir.join(files::TRAJ_INITIAL))
}

/// Layout and both RSS maps.
pub fn stage_genmap(sc: &Scenario, dir: &Path) -> Result<()> {
    let layout = sc.load_layout()?;
    sc.validate_with(&layout)?;
    let (pl, sf) = generate_maps(sc, &layout)?;
    write_text(&dir.join(files::LAYOUT), &layout.to_pgm_string())?;
    write_text(&dir.join(files::RSS_PL), &pl.to_csv())?;
    write_text(&dir.join(files::RSS_SF), &sf.to_csv())?;
    Ok(())
}

/// Receivers, labels and the stratified split.
pub fn stage_dataset(sc: &Scenario, dir: &Path) -> Result<()> {
    let layout = read_layout(dir)?;
    let pl = read_rss(dir, &layout, RssVariant::PathLoss)?;
    let sf = read_rss(dir, &layout, RssVariant::Fading)?;
    let s = make_dataset(sc, &pl, &sf)?;
    write_text(&dir.join(files::TRAIN), &s.train.to_csv())?;
    write_text(&dir.join(files::VALIDATION), &s.validation.to_csv())?;
    write_text(&dir.join(files::TEST), &s.test.to_csv())?;
    Ok(())
}

pub fn stage_train(sc: &Scenario, dir: &Path) -> Result<Detector> {
    let train_set = LabeledDataset::read_csv(&dir.join(files::TRAIN))?;
    let validation = LabeledDataset::read_csv(&dir.join(files::VALIDATION))?;
    let det = train_detector(sc, &train_set, &validation)?;
    if let Some(cv) = &det.cv {
        write_text(&dir.join(files::CV_SCORES), &cv.to_csv())?;
    }
    if let Some(roc) = &det.validation_roc {
        write_text(&dir.join(files::ROC_VALIDATION), &roc.to_csv())?;
    }
    write_text(&dir.join(files::MODEL), &det.model.to_text())?;
    Ok(det)
}

pub fn stage_report(dir: &Path) -> Result<DetectionReport> {
    let model = read_model(dir)?;
    let test = LabeledDataset::read_csv(&dir.join(files::TEST))?;
    let rep = report_detection(&model, &test)?;
    write_text(&dir.join(files::ROC), &rep.roc.to_csv())?;
    write_text(&dir.join(files::METRICS), &rep.metrics_csv())?;
    write_text(&dir.join(files::CONFUSION), &rep.confusion_csv())?;
    Ok(rep)
}

pub fn stage_chmap(sc: &Scenario, dir: &Path) -> Result<ChMap> {
    let layout = read_layout(dir)?;
    let model = read_model(dir)?;
    let chmap = build_chmap(&model, &layout, &sc.tx, &radio_config(sc))?;
    write_text(&dir.join(files::CHMAP), &chmap.to_pgm_string())?;
    write_text(&dir.join(files::CH_CELLS), &chmap.holes_csv())?;
    Ok(chmap)
}

pub fn stage_plan(sc: &Scenario, dir: &Path) -> Result<InitialPlan> {
    let layout = read_layout(dir)?;
    sc.validate_with(&layout)?;
    let plan = plan_initial(sc, &layout)?;
    write_text(&dir.join(files::PRM_INITIAL_NODES), &plan.prm.nodes_csv())?;
    write_text(&dir.join(files::PRM_INITIAL_EDGES), &plan.prm.edges_csv())?;
    write_text(&dir.join(files::TRAJ_INITIAL), &plan.trajectory.to_csv())?;
    Ok(plan)
}

pub fn stage_replan(sc: &Scenario, dir: &Path) -> Result<ReplanOutcome> {
    let chmap = read_chmap(dir)?;
    let initial = read_initial(dir)?;
    let out = replan_on(sc, &chmap, &initial, derive_seed(sc.seed, seeds::PRM_REPLAN))?;
    let mut s = String::new();
    match (&out.event, out.result()) {
        (Some(ev), Some(r)) => {
            let _ = writeln!(s, "status = rerouted");
            let _ = writeln!(s, "k_now = {}", sc.k_now);
            let _ = writeln!(s, "k_bs = {}", ev.k_bs);
            let _ = writeln!(s, "x_bs = {:.6}", ev.position.x);
            let _ = writeln!(s, "y_bs = {:.6}", ev.position.y);
            let _ = writeln!(s, "lat = {:.6}", out.lat.map_or(0.0, |l| l.lat));
            let _ = writeln!(s, "index = {}", r.index);
            let _ = writeln!(s, "t_re = {:.6}", r.t_re);
            let _ = writeln!(s, "x_re = {:.6}", r.sp_re.x);
            let _ = writeln!(s, "y_re = {:.6}", r.sp_re.y);
            let _ = writeln!(s, "alt_length = {:.6}", r.alt_length);
            let _ = writeln!(s, "planned_length = {:.6}", r.planned_length);
            let _ = writeln!(s, "remaining_length = {:.6}", r.remaining_length);
            let _ = writeln!(s, "candidates = {}", r.candidates_evaluated);
            let prm = out.prm.as_ref().expect("roadmap built with the event");
            write_text(&dir.join(files::PRM_REPLAN_NODES), &prm.nodes_csv())?;
            write_text(&dir.join(files::PRM_REPLAN_EDGES), &prm.edges_csv())?;
            write_text(&dir.join(files::SSPR_TRACE), &r.trace_csv())?;
            write_text(&dir.join(files::TRAJ_ALT), &r.alternative.to_csv())?;
        }
        _ => {
            let _ = writeln!(s, "status = no_event");
            let _ = writeln!(s, "k_now = {}", sc.k_now);
        }
    }
    write_text(&dir.join(files::REPLAN), &s)?;
    Ok(out)
}

fn rerouted(dir: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(dir.join(files::REPLAN))?;
    Ok(text.lines().any(|l| l.trim() == "status = rerouted"))
}

pub fn stage_follow(sc: &Scenario, dir: &Path) -> Result<Vec<TraceRow>> {
    let initial = read_initial(dir)?;
    let alt = if rerouted(dir)? {
        Some(Trajectory::read_csv(&dir.join(files::TRAJ_ALT))?)
    } else {
        None
    };
    let trace = follow(sc, &initial, alt.as_ref())?;
    write_text(&dir.join(files::FOLLOW_TRACE), &trace_csv(&trace))?;
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub constant_detector: bool,
    pub report: Option<DetectionReport>,
    pub predicted_holes: usize,
    pub event: Option<CoverageHoleEvent>,
    pub result: Option<SsprResult>,
    pub initial_length: f64,
    /// Reference actually followed after the switch.
    pub followed: Trajectory,
    pub terminal_error: f64,
    pub max_xy_error: f64,
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("detector", if self.constant_detector { "constant" } else { "svc" }.into());
        if let Some(r) = &self.report {
            kv("auc", format!("{:.6}", r.roc.auc));
            kv("threshold", crate::io::f6(r.deployed_threshold));
            kv("tpr", crate::io::f6(r.metrics.tpr.unwrap_or(f64::NAN)));
            kv("fpr", crate::io::f6(r.metrics.fpr.unwrap_or(f64::NAN)));
        }
        kv("predicted_hole_cells", self.predicted_holes.to_string());
        kv("initial_length", format!("{:.6}", self.initial_length));
        match (&self.event, &self.result) {
            (Some(ev), Some(r)) => {
                kv("event_k_bs", ev.k_bs.to_string());
                kv("event_position", format!("{:.6} {:.6}", ev.position.x, ev.position.y));
                kv("t_re", format!("{:.6}", r.t_re));
                kv("alt_length", format!("{:.6}", r.alt_length));
                kv("planned_length", format!("{:.6}", r.planned_length));
            }
            _ => kv("event", "none".into()),
        }
        kv("terminal_error", format!("{:.6}", self.terminal_error));
        kv("max_xy_error", format!("{:.6}", self.max_xy_error));
        s
    }
}

fn manifest(sc: &Scenario, notes: &[String]) -> String {
    let mut s = String::from("# scenario\n");
    s.push_str(&sc.to_text());
    s.push_str("# stage seeds\n");
    for stage in seeds::STAGES {
        let _ = writeln!(s, "seed.{stage} = {}", derive_seed(sc.seed, stage));
    }
    s.push_str("# notes\n");
    for n in notes {
        let _ = writeln!(s, "note = {n}");
    }
    s
}

/// Runs every stage into `dir` and writes the manifest and summary.
pub fn run_pipeline(sc: &Scenario, dir: &Path) -> Result<RunSummary> {
    let mut notes = Vec::new();
    stage_genmap(sc, dir).map_err(|e| e.in_stage("genmap"))?;
    stage_dataset(sc, dir).map_err(|e| e.in_stage("dataset"))?;
    let det = stage_train(sc, dir).map_err(|e| e.in_stage("train"))?;
    let report = if det.constant {
        notes.push("training data has a single class; detection skipped".to_string());
        None
    } else {
        Some(stage_report(dir).map_err(|e| e.in_stage("report"))?)
    };
    let chmap = stage_chmap(sc, dir).map_err(|e| e.in_stage("chmap"))?;
    stage_plan(sc, dir).map_err(|e| e.in_stage("plan"))?;
    let out = stage_replan(sc, dir).map_err(|e| e.in_stage("replan"))?;
    let trace = stage_follow(sc, dir).map_err(|e| e.in_stage("follow"))?;

    let initial = read_initial(dir)?;
    let followed = out.replan.trajectory().clone();
    let last = trace.last().expect("non-empty trace");
    let terminal_error = WorldPoint::new(last.state.x, last.state.y).distance(&followed.end());
    let summary = RunSummary {
        constant_detector: det.constant,
        report,
        predicted_holes: chmap.hole_count(),
        event: out.event,
        result: out.result().cloned(),
        initial_length: initial.length(),
        followed,
        terminal_error,
        max_xy_error: trace.iter().map(TraceRow::xy_error).fold(0.0, f64::max),
    };
    write_text(&dir.join(files::SUMMARY), &summary.to_text())?;
    write_text(&dir.join(files::MANIFEST), &manifest(sc, &notes))?;
    Ok(summary)
}
