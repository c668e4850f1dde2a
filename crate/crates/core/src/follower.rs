//! Kinematic unicycle tracking a reference with a Kanayama-type law.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::trajectory::{RefSample, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgvState {
    pub x: f64,
    pub y: f64,
    /// rad, in (-pi, pi]
    pub theta: f64,
    pub t: f64,
}

impl AgvState {
    pub fn at_reference(r: &RefSample) -> AgvState {
        AgvState {
            x: r.x,
            y: r.y,
            theta: r.theta,
            t: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerGains {
    pub k_x: f64,
    pub k_y: f64,
    pub k_theta: f64,
    pub v_max: f64,
    pub omega_max: f64,
}

impl Default for FollowerGains {
    fn default() -> Self {
        FollowerGains {
            k_x: 2.0,
            k_y: 4.0,
            k_theta: 4.0,
            v_max: 1.5,
            omega_max: 2.0,
        }
    }
}

impl FollowerGains {
    pub fn validate(&self) -> Result<()> {
        let all = [self.k_x, self.k_y, self.k_theta, self.v_max, self.omega_max];
        if all.iter().all(|g| g.is_finite() && *g > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("follower gains must be positive: {self:?}")))
        }
    }
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Robot-frame tracking error `(e_x, e_y, e_theta)`.
pub fn tracking_error(state: &AgvState, r: &RefSample) -> (f64, f64, f64) {
    let (dx, dy) = (r.x - state.x, r.y - state.y);
    let (s, c) = state.theta.sin_cos();
    (c * dx + s * dy, -s * dx + c * dy, wrap_angle(r.theta - state.theta))
}

/// `v = v_r cos e_th + k_x e_x`, `w = w_r + v_r (k_y e_y + k_th sin e_th)`,
/// clamped to `[0, v_max]` and `[-omega_max, omega_max]`.
pub fn control_step(state: &AgvState, r: &RefSample, gains: &FollowerGains) -> (f64, f64) {
    let (ex, ey, eth) = tracking_error(state, r);
    let v = r.v * eth.cos() + gains.k_x * ex;
    let w = r.omega + r.v * (gains.k_y * ey + gains.k_theta * eth.sin());
    (v.clamp(0.0, gains.v_max), w.clamp(-gains.omega_max, gains.omega_max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub state: AgvState,
    /// World-frame position error, reference minus state. The heading error is
    /// taken against the chord heading of [`sampled_reference`].
    pub x_err: f64,
    pub y_err: f64,
    pub theta_err: f64,
    pub v_cmd: f64,
    pub omega_cmd: f64,
}

impl TraceRow {
    pub fn xy_error(&self) -> f64 {
        self.x_err.hypot(self.y_err)
    }
}

pub const TRACE_HEADER: &str = "t,x,y,theta,x_err,y_err,theta_err,v_cmd,omega_cmd";

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 96);
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.state.t, r.state.x, r.state.y, r.state.theta, r.x_err, r.y_err, r.theta_err, r.v_cmd, r.omega_cmd
        );
    }
    s
}

fn chord_heading(traj: &Trajectory, k: usize) -> f64 {
    let s = &traj.samples;
    match s.get(k + 1) {
        Some(n) if (n.x - s[k].x).hypot(n.y - s[k].y) > 1e-12 => (n.y - s[k].y).atan2(n.x - s[k].x),
        _ => s[k].theta,
    }
}

/// Reference pose and feedforward as seen between samples `k` and `k + 1`:
/// chord heading, chord length over dt, heading change over dt.
/// An Euler step from this pose with these inputs lands on sample `k + 1`.
pub fn sampled_reference(traj: &Trajectory, k: usize) -> Option<RefSample> {
    let r = *traj.samples.get(k)?;
    let Some(n) = traj.samples.get(k + 1) else {
        return Some(r);
    };
    let theta = chord_heading(traj, k);
    Some(RefSample {
        x: r.x,
        y: r.y,
        theta,
        v: (n.x - r.x).hypot(n.y - r.y) / traj.dt,
        omega: wrap_angle(chord_heading(traj, k + 1) - theta) / traj.dt,
    })
}

/// Step-by-step simulation; the reference may be swapped between steps.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub state: AgvState,
    pub gains: FollowerGains,
    reference: Trajectory,
    k: usize,
    trace: Vec<TraceRow>,
}

impl Simulation {
    pub fn new(reference: Trajectory, initial: AgvState, gains: FollowerGains) -> Result<Simulation> {
        gains.validate()?;
        if reference.is_empty() {
            return Err(Error::Trajectory("empty reference".into()));
        }
        Ok(Simulation {
            state: initial,
            gains,
            reference,
            k: 0,
            trace: Vec::new(),
        })
    }

    /// Index of the next reference sample to track.
    pub fn step_index(&self) -> usize {
        self.k
    }

    pub fn reference(&self) -> &Trajectory {
        &self.reference
    }

    pub fn finished(&self) -> bool {
        self.k >= self.reference.len()
    }

    /// Replaces the reference; indices keep counting from the current step.
    pub fn replace_reference(&mut self, reference: Trajectory) -> Result<()> {
        if reference.len() <= self.k {
            return Err(Error::Trajectory(format!(
                "replacement has {} samples, already at step {}",
                reference.len(),
                self.k
            )));
        }
        if (reference.dt - self.reference.dt).abs() > 1e-12 {
            return Err(Error::Trajectory("replacement uses a different dt".into()));
        }
        self.reference = reference;
        Ok(())
    }

    /// Records the error at the current sample, then integrates one step
    /// unless this is the last sample.
    pub fn step(&mut self) -> Option<TraceRow> {
        let r = sampled_reference(&self.reference, self.k)?;
        let (v, w) = control_step(&self.state, &r, &self.gains);
        let row = TraceRow {
            state: self.state,
            x_err: r.x - self.state.x,
            y_err: r.y - self.state.y,
            theta_err: wrap_angle(r.theta - self.state.theta),
            v_cmd: v,
            omega_cmd: w,
        };
        self.trace.push(row);
        self.k += 1;
        if self.k < self.reference.len() {
            let dt = self.reference.dt;
            let s = &mut self.state;
            s.x += v * s.theta.cos() * dt;
            s.y += v * s.theta.sin() * dt;
            s.theta = wrap_angle(s.theta + w * dt);
            s.t = self.k as f64 * dt;
        }
        Some(row)
    }

    /// Runs until step `k` has been recorded (exclusive upper bound).
    pub fn run_until(&mut self, k: usize) {
        while self.k < k && self.step().is_some() {}
    }

    pub fn run_to_end(&mut self) {
        while self.step().is_some() {}
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<TraceRow> {
        self.trace
    }
}

pub fn simulate(traj: &Trajectory, initial: AgvState, gains: &FollowerGains) -> Result<Vec<TraceRow>> {
    let mut sim = Simulation::new(traj.clone(), initial, *gains)?;
    sim.run_to_end();
    Ok(sim.into_trace())
}
