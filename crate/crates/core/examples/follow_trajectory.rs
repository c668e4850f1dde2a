//! Unicycle tracking of a curved reference from a heading offset.
use covhole::follower::{simulate, AgvState, FollowerGains};
use covhole::gridworld::WorldPoint;
use covhole::trajectory::{interpolate, ProfileParams};

fn main() -> covhole::Result<()> {
    let w: Vec<WorldPoint> = (0..=16)
        .map(|k| WorldPoint::new(k as f64, 2.0 * (k as f64 / 4.0).sin()))
        .collect();
    let t = interpolate(&w, &ProfileParams::new(0.1, 1.5, 1.0, 0.5))?;
    let start = AgvState { theta: t.samples[0].theta + 0.4, ..AgvState::at_reference(&t.samples[0]) };
    let trace = simulate(&t, start, &FollowerGains::default())?;
    for r in trace.iter().step_by(15) {
        println!(
            "t {:>4.1}: position error {:.4} m, heading error {:>7.4} rad, v {:.2}, omega {:>6.3}",
            r.state.t, r.xy_error(), r.theta_err, r.v_cmd, r.omega_cmd
        );
    }
    println!("final error {:.2e} m", trace.last().unwrap().xy_error());
    Ok(())
}
