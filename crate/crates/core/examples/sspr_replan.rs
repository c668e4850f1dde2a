//! Look-ahead re-planning around a coverage hole on an open floor.
use covhole::chmap::{local_detect, ChMap};
use covhole::gridworld::{GridMap, WorldPoint};
use covhole::planner::{prm_build, PrmParams};
use covhole::replanner::{lat_from_event, sspr, Replan};
use covhole::trajectory::{interpolate, ProfileParams};

fn main() -> covhole::Result<()> {
    let floor = GridMap::new(40, 20, 1.0, WorldPoint::new(0.0, 0.0))?;
    let holes: Vec<bool> = (0..floor.len())
        .map(|i| floor.cell_center(floor.cell_at(i)).distance(&WorldPoint::new(20.0, 10.0)) < 3.0)
        .collect();
    let chmap = ChMap::with_holes(&floor, &holes)?;
    let profile = ProfileParams::new(0.1, 1.5, 1.0, 0.5);
    let initial = interpolate(&[WorldPoint::new(2.0, 10.0), WorldPoint::new(38.0, 10.0)], &profile)?;
    let k_now = 20;
    let ev = local_detect(&chmap, &initial, k_now)?.expect("the straight line crosses the hole");
    println!("hole at step {} ({:.2}, {:.2})", ev.k_bs, ev.position.x, ev.position.y);
    let prm = prm_build(chmap.grid(), PrmParams { nodes: 250, d_max: 6.0, seed: 3 })?;
    let full = lat_from_event(k_now, &ev, initial.dt)?;
    for lat in [0.0, 2.0, 5.0, full.lat] {
        let la = covhole::replanner::LookAhead { lat };
        if let Replan::Rerouted(r) = sspr(&chmap, &prm, &initial, k_now, Some(&ev), la, &profile)? {
            println!(
                "LAT {lat:>5.2} s: depart t = {:.1} s at ({:.2}, {:.2}), {} candidates, alternative {:.2} m",
                r.t_re, r.sp_re.x, r.sp_re.y, r.candidates_evaluated, r.alt_length
            );
        }
    }
    Ok(())
}
