//! Start-selection re-planning: scan departure points inside the look-ahead
//! window and keep the one giving the shortest alternative to the target.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::chmap::{ChMap, CoverageHoleEvent};
use crate::error::{Error, Result};
use crate::gridworld::WorldPoint;
use crate::planner::{shortest_route, PrmGraph};
use crate::trajectory::{interpolate_safe, path_length, ProfileParams, StartState, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookAhead {
    /// s
    pub lat: f64,
}

impl LookAhead {
    pub fn new(lat: f64) -> Result<LookAhead> {
        if !(lat >= 0.0) {
            return Err(Error::Replanning(format!("look-ahead must be non-negative, got {lat}")));
        }
        Ok(LookAhead { lat })
    }

    pub fn clamp(self, budget: f64) -> LookAhead {
        LookAhead {
            lat: self.lat.min(budget.max(0.0)),
        }
    }
}

/// `dt * (k_bs - k_now)`.
pub fn lat_from_event(k_now: usize, event: &CoverageHoleEvent, dt: f64) -> Result<LookAhead> {
    if event.k_bs < k_now {
        return Err(Error::Replanning(format!(
            "hole at step {} precedes current step {k_now}",
            event.k_bs
        )));
    }
    LookAhead::new(dt * (event.k_bs - k_now) as f64)
}

/// Candidate departure indices `k_now ..= min(k_now + lat/dt, k_bs - 1)`.
pub fn candidate_window(k_now: usize, k_bs: usize, lat: LookAhead, dt: f64) -> std::ops::RangeInclusive<usize> {
    let steps = (lat.lat / dt + 1e-9).floor() as usize;
    let hi = (k_now + steps).min(k_bs.saturating_sub(1)).max(k_now);
    k_now..=hi
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsprCandidate {
    pub index: usize,
    pub t_re: f64,
    pub sp_re: WorldPoint,
    /// `None` when no re-route exists from this departure point.
    pub reroute_length: Option<f64>,
    pub total_length: Option<f64>,
    pub chosen: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsprResult {
    pub index: usize,
    pub t_re: f64,
    pub sp_re: WorldPoint,
    pub alternative: Trajectory,
    /// Sampled length of `alternative`.
    pub alt_length: f64,
    /// Prefix length plus roadmap re-route length of the chosen candidate.
    pub planned_length: f64,
    /// `planned_length` minus the part already driven before `k_now`.
    pub remaining_length: f64,
    pub reroute_waypoints: Vec<WorldPoint>,
    pub candidates_evaluated: usize,
    pub candidates: Vec<SsprCandidate>,
}

impl SsprResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("i,t_re,x_re,y_re,reroute_len,total_len,chosen\n");
        for c in &self.candidates {
            let _ = writeln!(
                s,
                "{},{:.6},{:.6},{:.6},{},{},{}",
                c.index,
                c.t_re,
                c.sp_re.x,
                c.sp_re.y,
                crate::io::f6(c.reroute_length.unwrap_or(f64::INFINITY)),
                crate::io::f6(c.total_length.unwrap_or(f64::INFINITY)),
                c.chosen as u8
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Replan {
    /// No hole ahead: keep the current reference.
    Unchanged(Trajectory),
    Rerouted(Box<SsprResult>),
}

impl Replan {
    pub fn trajectory(&self) -> &Trajectory {
        match self {
            Replan::Unchanged(t) => t,
            Replan::Rerouted(r) => &r.alternative,
        }
    }
}

/// Picks the departure index minimizing prefix length plus roadmap re-route
/// length (ties to the earlier index), then interpolates the re-route from
/// the reference state at that index and splices it onto the prefix.
pub fn sspr(
    chmap: &ChMap,
    prm: &PrmGraph,
    traj: &Trajectory,
    k_now: usize,
    event: Option<&CoverageHoleEvent>,
    lat: LookAhead,
    profile: &ProfileParams,
) -> Result<Replan> {
    let Some(event) = event else {
        return Ok(Replan::Unchanged(traj.clone()));
    };
    if k_now >= traj.len() || event.k_bs >= traj.len() {
        return Err(Error::Replanning("step index outside the trajectory".into()));
    }
    if event.k_bs < k_now {
        return Err(Error::Replanning(format!(
            "hole at step {} precedes current step {k_now}",
            event.k_bs
        )));
    }
    let map = chmap.grid();
    let target = traj.end();
    if !map.point_free(target) {
        return Err(Error::Replanning("target lies in a coverage hole".into()));
    }
    let dt = traj.dt;
    let prefix = prefix_lengths(traj);
    let window: Vec<usize> = candidate_window(k_now, event.k_bs, lat, dt).collect();
    let routes: Vec<Option<(Vec<WorldPoint>, f64)>> = window
        .par_iter()
        // a departure point inside a hole counts as unconnectable
        .map(|&i| shortest_route(prm, map, traj.samples[i].position(), target).unwrap_or_default())
        .collect();

    let mut best: Option<(usize, f64)> = None;
    let mut candidates = Vec::with_capacity(window.len());
    for (slot, (&i, route)) in window.iter().zip(&routes).enumerate() {
        let reroute = route.as_ref().map(|r| r.1);
        let total = reroute.map(|r| prefix[i] + r);
        if let Some(t) = total {
            if best.is_none_or(|(_, b)| t < b) {
                best = Some((slot, t));
            }
        }
        candidates.push(SsprCandidate {
            index: i,
            t_re: i as f64 * dt,
            sp_re: traj.samples[i].position(),
            reroute_length: reroute,
            total_length: total,
            chosen: false,
        });
    }
    let Some((slot, planned_length)) = best else {
        return Err(Error::Replanning(format!(
            "no feasible re-route from any of {} departure points",
            window.len()
        )));
    };
    candidates[slot].chosen = true;
    let index = window[slot];
    let waypoints = routes[slot].as_ref().expect("chosen route exists").0.clone();
    let at = traj.samples[index];
    let reroute = interpolate_safe(
        &waypoints,
        &ProfileParams { dt, ..*profile },
        StartState {
            speed: at.v,
            heading: Some(at.theta),
        },
        map,
    )?;
    let alternative = traj.splice(index, &reroute);
    let alt_length = path_length(&alternative.positions());
    Ok(Replan::Rerouted(Box::new(SsprResult {
        index,
        t_re: index as f64 * dt,
        sp_re: at.position(),
        alternative,
        alt_length,
        planned_length,
        remaining_length: planned_length - prefix[k_now],
        reroute_waypoints: waypoints,
        candidates_evaluated: window.len(),
        candidates,
    })))
}

fn prefix_lengths(traj: &Trajectory) -> Vec<f64> {
    let mut out = Vec::with_capacity(traj.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in traj.samples.windows(2) {
        acc += w[0].position().distance(&w[1].position());
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::GridMap;
    use crate::planner::{prm_build, PrmParams};
    use crate::trajectory::interpolate;

    fn event(k_bs: usize) -> CoverageHoleEvent {
        CoverageHoleEvent {
            k_bs,
            position: WorldPoint::new(0.0, 0.0),
        }
    }

    #[test]
    fn lat_formula() {
        assert_eq!(lat_from_event(5, &event(5), 0.1).unwrap().lat, 0.0);
        assert!((lat_from_event(10, &event(77), 0.1).unwrap().lat - 6.7).abs() < 1e-12);
        assert!(lat_from_event(10, &event(9), 0.1).is_err());
        assert!(LookAhead::new(-1.0).is_err());
    }

    #[test]
    fn window_bounds() {
        let lat = LookAhead { lat: 6.7 };
        assert_eq!(candidate_window(10, 77, lat, 0.1), 10..=76);
        assert_eq!(candidate_window(10, 200, lat, 0.1), 10..=77);
        assert_eq!(candidate_window(10, 77, LookAhead { lat: 0.0 }, 0.1), 10..=10);
        assert_eq!(candidate_window(10, 10, lat, 0.1), 10..=10);
    }

    fn scene() -> (GridMap, ChMap, Trajectory, ProfileParams) {
        let layout = GridMap::new(40, 20, 0.5, WorldPoint::new(0.0, 0.0)).unwrap();
        let mut holes = vec![false; layout.len()];
        // a hole across the straight corridor at x ~ 10
        for iy in 6..14 {
            for ix in 19..22 {
                holes[iy * 40 + ix] = true;
            }
        }
        let chmap = ChMap::with_holes(&layout, &holes).unwrap();
        let params = ProfileParams::new(0.1, 1.5, 1.0, 0.5);
        let traj = interpolate(&[WorldPoint::new(1.0, 5.0), WorldPoint::new(19.0, 5.0)], &params).unwrap();
        (layout, chmap, traj, params)
    }

    #[test]
    fn reroutes_around_hole() {
        let (_, chmap, traj, params) = scene();
        let ev = crate::chmap::local_detect(&chmap, &traj, 0).unwrap().unwrap();
        let prm = prm_build(chmap.grid(), PrmParams { nodes: 300, d_max: 3.0, seed: 3 }).unwrap();
        let lat = lat_from_event(0, &ev, traj.dt).unwrap();
        let Replan::Rerouted(r) = sspr(&chmap, &prm, &traj, 0, Some(&ev), lat, &params).unwrap() else {
            panic!("expected a re-route");
        };
        assert!(r.index < ev.k_bs);
        assert_eq!(&r.alternative.samples[..=r.index], &traj.samples[..=r.index]);
        assert!(r.alternative.samples.iter().all(|s| !chmap.is_hole(s.position())));
        assert!(r.alternative.end().distance(&traj.end()) < 1e-9);
        assert!((r.alt_length - path_length(&r.alternative.positions())).abs() < 1e-9);
        let best = r
            .candidates
            .iter()
            .filter_map(|c| c.total_length)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, r.planned_length);
        assert_eq!(r.candidates.iter().filter(|c| c.chosen).count(), 1);
        assert!(r.trace_csv().starts_with("i,t_re,x_re,y_re,reroute_len,total_len,chosen\n"));
    }

    #[test]
    fn no_event_is_identity() {
        let (_, chmap, traj, params) = scene();
        let prm = prm_build(chmap.grid(), PrmParams { nodes: 10, d_max: 3.0, seed: 3 }).unwrap();
        let out = sspr(&chmap, &prm, &traj, 0, None, LookAhead { lat: 1.0 }, &params).unwrap();
        assert_eq!(out, Replan::Unchanged(traj));
    }

    #[test]
    fn unreachable_target_is_an_error() {
        let (_, chmap, traj, params) = scene();
        let ev = crate::chmap::local_detect(&chmap, &traj, 0).unwrap().unwrap();
        let prm = prm_build(chmap.grid(), PrmParams { nodes: 50, d_max: 0.1, seed: 3 }).unwrap();
        let err = sspr(&chmap, &prm, &traj, 0, Some(&ev), LookAhead { lat: 1.0 }, &params);
        assert!(matches!(err, Err(Error::Replanning(_))));
    }
}
