//! One PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use covhole::gridworld::{GridMap, WorldPoint};
use covhole::harness::pipeline::{self, files};
use covhole::harness::{run_pipeline, summarize, sweep_lat, RunSummary, Scenario};
use covhole::planner::astar;
use covhole::radio::shadow_field;
use covhole::replanner::{sspr, LookAhead, Replan};
use covhole::svc::{operating_point, roc_from_scores, train, RocCurve, SmoParams, SvcModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {:.1?}, limit {:?}", elapsed, limit))
    }
}

fn shortest_paths() -> Outcome {
    let t0 = Instant::now();
    let mut reachable = 0;
    for seed in 0..200u64 {
        let n = 2 + (seed as usize * 7) % 60;
        let g = common::random_graph(seed, n);
        let adj = common::adjacency_of(&g);
        let (s, t) = (seed as usize % n, (seed as usize * 13 + 5) % n);
        let got = astar(&g, s, t).map(|p| p.length);
        let want = common::dijkstra(&adj, s, t);
        match (got, want) {
            (Some(a), Some(b)) if (a - b).abs() <= 1e-9 => reachable += 1,
            (None, None) => {}
            other => return Err(format!("graph {seed}: A* {:?} vs Dijkstra {:?}", other.0, other.1)),
        }
    }
    within(t0.elapsed(), Duration::from_secs(10))?;
    Ok(format!("200 graphs agree ({reachable} connected queries) in {:.2?}", t0.elapsed()))
}

fn sspr_optimality() -> Outcome {
    let mut cases = 0;
    let mut seed = 0u64;
    while cases < 50 {
        seed += 1;
        if seed > 5000 {
            return Err(format!("only {cases} usable cases"));
        }
        let Some(c) = common::sspr_case(seed) else { continue };
        let window = common::window_oracle(c.k_now, c.event.k_bs, c.lat, c.traj.dt);
        let oracle = common::exhaustive_sspr(&c.chmap, &c.prm, &c.traj, window.into_iter());
        let got = sspr(&c.chmap, &c.prm, &c.traj, c.k_now, Some(&c.event), LookAhead { lat: c.lat }, &c.profile);
        match (got, oracle) {
            (Ok(Replan::Rerouted(r)), Some((_, best))) if (r.planned_length - best).abs() <= 1e-9 => {}
            (Err(_), None) => {}
            (got, oracle) => {
                let got = match got {
                    Ok(Replan::Rerouted(r)) => Some(r.planned_length),
                    _ => None,
                };
                return Err(format!("case {seed}: sspr {got:?} vs exhaustive {oracle:?}"));
            }
        }
        cases += 1;
    }
    Ok("50 cases match exhaustive search to 1e-9".into())
}

fn sweep_trends(sc: &Scenario, dir: &Path) -> Outcome {
    let t0 = Instant::now();
    let chmap = pipeline::read_chmap(dir).map_err(|e| e.to_string())?;
    let initial = pipeline::read_initial(dir).map_err(|e| e.to_string())?;
    let rows = sweep_lat(sc, &sc.sweep, &chmap, &initial).map_err(|e| e.to_string())?;
    let sum = summarize(&sc.sweep, &rows);
    within(t0.elapsed(), Duration::from_secs(120))?;
    let lats = sc.sweep.lat_values.len();
    let mut notes = Vec::new();
    let mut ok = true;
    for (v, &(n, d)) in sc.sweep.variants.iter().enumerate() {
        let means: Vec<f64> = sum[v * lats..(v + 1) * lats].iter().map(|r| r.mean_alt_length).collect();
        let rises: Vec<f64> = means.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[1] - w[0]) / w[0]).collect();
        ok &= means.iter().all(|m| m.is_finite()) && rises.len() <= 1 && rises.iter().all(|&r| r <= 0.01);
        notes.push(format!(
            "{n}:{d} [{}]",
            means.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(" ")
        ));
    }
    // variants are listed from the sparsest roadmap to the densest
    for v in 1..sc.sweep.variants.len() {
        for l in 0..lats {
            ok &= sum[v * lats + l].mean_alt_length <= sum[(v - 1) * lats + l].mean_alt_length;
        }
    }
    check(ok, format!("{} in {:.2?}", notes.join(", "), t0.elapsed()))
}

fn detection(s: &RunSummary) -> Outcome {
    let r = s.report.as_ref().ok_or("constant detector")?;
    let (tpr, fpr) = (r.metrics.tpr.unwrap_or(0.0), r.metrics.fpr.unwrap_or(1.0));
    check(
        r.roc.auc >= 0.9 && fpr <= 0.1 && tpr >= 0.6,
        format!("AUC {:.3}, TPR {tpr:.3}, FPR {fpr:.3}", r.roc.auc),
    )
}

fn brute_force_best(roc: &RocCurve) -> f64 {
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, f64::NAN);
    for p in &roc.points {
        let g = (p.tpr * (1.0 - p.fpr)).sqrt();
        if g > best.0 || (g == best.0 && p.fpr < best.1) {
            best = (g, p.fpr, p.threshold);
        }
    }
    best.2
}

fn operating_points(sc: &Scenario, dir: &Path, s: &RunSummary) -> Outcome {
    let mut rocs = Vec::new();
    if let Some(r) = &s.report {
        rocs.push(r.roc.clone());
    }
    let det = pipeline::stage_train(sc, dir).map_err(|e| e.to_string())?;
    rocs.extend(det.validation_roc);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let n = rng.random_range(4..200);
        let scores: Vec<f64> = (0..n).map(|_| (rng.random_range(-30..30) as f64) / 3.0).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<bool>())).collect();
        labels[0] = 0;
        labels[1] = 1;
        rocs.push(roc_from_scores(&scores, &labels).map_err(|e| e.to_string())?);
    }
    for (i, roc) in rocs.iter().enumerate() {
        let got = operating_point(roc).map_err(|e| e.to_string())?.threshold;
        if got.to_bits() != brute_force_best(roc).to_bits() {
            return Err(format!("roc {i}: {got} vs {}", brute_force_best(roc)));
        }
    }
    Ok(format!("{} curves match the brute-force scan", rocs.len()))
}

fn svc_sanity() -> Outcome {
    let (x, y) = common::xor();
    let (m, st) = train(&x, &y, 100.0, 1.0, SmoParams::default()).map_err(|e| e.to_string())?;
    let correct = x.iter().zip(&y).filter(|(p, l)| m.classify(m.decision_value(p).unwrap()) == **l).count();
    let mut feasible = true;
    let mut balance = 0.0;
    for (a, s) in st.alphas.iter().zip(&st.signs) {
        feasible &= *a >= 0.0 && *a <= 100.0 + 1e-12;
        balance += a * s;
    }
    feasible &= balance.abs() <= SmoParams::default().tolerance;
    let back = SvcModel::from_text(&m.to_text()).map_err(|e| e.to_string())?;
    let (rx, _) = common::ring_and_core(100, 3);
    let drift = rx
        .iter()
        .chain(&x)
        .map(|p| (m.decision_value(p).unwrap() - back.decision_value(p).unwrap()).abs())
        .fold(0.0, f64::max);
    check(
        correct == 4 && feasible && drift <= 1e-12,
        format!("XOR {correct}/4, dual feasible {feasible}, round-trip drift {drift:.1e}"),
    )
}

fn safe_arrival(runs: &[(String, RunSummary, &Path, usize)]) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, s, dir, k_now) in runs {
        let dir: &Path = dir;
        let chmap = pipeline::read_chmap(dir).map_err(|e| e.to_string())?;
        let unsafe_samples = s.followed.samples[*k_now..]
            .iter()
            .filter(|p| !chmap.grid().point_free(p.position()))
            .count();
        ok &= unsafe_samples == 0 && s.terminal_error <= 0.3;
        notes.push(format!("{name}: {unsafe_samples} unsafe, end {:.3} m", s.terminal_error));
    }
    check(ok, notes.join("; "))
}

fn shadow_statistics() -> Outcome {
    let t0 = Instant::now();
    let n = 100;
    let grid = GridMap::new(n, n, 1.0, WorldPoint::new(0.0, 0.0)).map_err(|e| e.to_string())?;
    let (sigma, dc) = (6.0, 10.0);
    let lag = 10;
    let (mut ss, mut count, mut num, mut den) = (0.0, 0usize, 0.0, 0.0);
    for seed in 0..20u64 {
        let s = shadow_field(&grid, sigma, dc, &mut ChaCha8Rng::seed_from_u64(seed));
        ss += s.iter().map(|v| v * v).sum::<f64>();
        count += s.len();
        for iy in 0..n {
            for ix in 0..n {
                let v = s[iy * n + ix];
                if ix + lag < n {
                    num += v * s[iy * n + ix + lag];
                    den += v * v;
                }
                if iy + lag < n {
                    num += v * s[(iy + lag) * n + ix];
                    den += v * v;
                }
            }
        }
    }
    within(t0.elapsed(), Duration::from_secs(30))?;
    let std = (ss / count as f64).sqrt();
    let rho = num / den;
    let target = (-1.0f64).exp();
    check(
        (std - sigma).abs() <= 0.1 * sigma && (rho - target).abs() <= 0.15,
        format!("std {std:.3} (sigma {sigma}), lag-dc correlation {rho:.3} (target {target:.3})"),
    )
}

fn identical_runs(a: &Path, b: &Path) -> Outcome {
    let mut names: Vec<String> = std::fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for n in &names {
        let (x, y) = (std::fs::read(a.join(n)), std::fs::read(b.join(n)));
        if x.map_err(|e| e.to_string())? != y.map_err(|e| format!("{n}: {e}"))? {
            return Err(format!("{n} differs"));
        }
    }
    check(names.len() > 20 && names.iter().any(|n| n == files::MANIFEST), format!("{} artifacts identical", names.len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let run = |sc: &Scenario| {
        let dir = tempfile::tempdir().unwrap();
        let s = run_pipeline(sc, dir.path());
        (dir, s)
    };

    results.push((1, "A* equals Dijkstra on random graphs", shortest_paths()));
    results.push((2, "SSPR equals exhaustive search", sspr_optimality()));

    let default = Scenario::preset("default").unwrap();
    let (d_dir, d_run) = run(&default);
    let d_run = match d_run {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL default run: {e}");
            return ExitCode::FAILURE;
        }
    };
    results.push((3, "alternative length trends over LAT and roadmap size", sweep_trends(&default, d_dir.path())));
    results.push((4, "detection quality", detection(&d_run)));
    results.push((5, "operating point equals brute force", operating_points(&default, d_dir.path(), &d_run)));
    results.push((6, "classifier sanity", svc_sanity()));

    let mut scenarios = vec![("fig7".to_string(), Scenario::preset("fig7").unwrap())];
    for seed in [6u64, 10, 12] {
        scenarios.push((format!("seed {seed}"), Scenario::parse(&format!("seed = {seed}\n"), None).unwrap()));
    }
    let mut dirs = Vec::new();
    let mut failed_runs = Vec::new();
    for (name, sc) in &scenarios {
        match run(sc) {
            (dir, Ok(s)) => dirs.push((name.clone(), s, dir, sc.k_now)),
            (_, Err(e)) => failed_runs.push(format!("{name}: {e}")),
        }
    }
    let mut table = vec![("default".to_string(), d_run.clone(), d_dir.path(), default.k_now)];
    table.extend(dirs.iter().map(|(n, s, d, k)| (n.clone(), s.clone(), d.path(), *k)));
    let seven = if failed_runs.is_empty() { safe_arrival(&table) } else { Err(failed_runs.join("; ")) };
    results.push((7, "safe arrival at the target", seven));

    let (again, second) = run(&default);
    let eight = match second {
        Ok(_) => identical_runs(d_dir.path(), again.path()),
        Err(e) => Err(e.to_string()),
    };
    results.push((8, "runs are byte-identical", eight));
    results.push((9, "shadow field statistics", shadow_statistics()));

    let mut failed = false;
    for (n, name, r) in &results {
        match r {
            Ok(d) => println!("criterion {n}: PASS {name}: {d}"),
            Err(d) => {
                failed = true;
                println!("criterion {n}: FAIL {name}: {d}");
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
