//! Cubic B-spline through waypoints, sampled with a trapezoidal speed profile.
use covhole::gridworld::WorldPoint;
use covhole::trajectory::{interpolate, ProfileParams};

fn main() -> covhole::Result<()> {
    let w = [
        WorldPoint::new(0.0, 0.0),
        WorldPoint::new(6.0, 0.0),
        WorldPoint::new(8.0, 4.0),
        WorldPoint::new(14.0, 4.0),
    ];
    let t = interpolate(&w, &ProfileParams::new(0.1, 1.5, 1.0, 0.5))?;
    println!("{} samples, {:.1} s, {:.3} m", t.len(), t.total_time(), t.length());
    for s in t.samples.iter().step_by(20) {
        println!("x {:>6.2} y {:>5.2} theta {:>6.3} v {:.2} omega {:>6.3}", s.x, s.y, s.theta, s.v, s.omega);
    }
    Ok(())
}
