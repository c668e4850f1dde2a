//! Waypoint path to time-parameterized reference `(x, y, theta, v, omega)`.
//!
//! The waypoint polyline is densified to a control-point spacing of about one
//! map cell and used as the control polygon of a clamped uniform cubic
//! B-spline, so the curve starts and ends exactly on the first and last
//! waypoints and never strays more than a fraction of the spacing from the
//! polyline. The curve is then traversed by arc length with a trapezoidal
//! speed profile whose duration is rounded up to a whole number of samples.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gridworld::{GridMap, WorldPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefSample {
    pub x: f64,
    pub y: f64,
    /// rad, in (-pi, pi]
    pub theta: f64,
    /// m/s
    pub v: f64,
    /// rad/s
    pub omega: f64,
}

impl RefSample {
    pub fn position(&self) -> WorldPoint {
        WorldPoint::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<RefSample>,
}

pub const CSV_HEADER: &str = "t,x,y,theta,v,omega";

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.samples.len().saturating_sub(1) as f64 * self.dt
    }

    pub fn positions(&self) -> Vec<WorldPoint> {
        self.samples.iter().map(RefSample::position).collect()
    }

    pub fn start(&self) -> WorldPoint {
        self.samples[0].position()
    }

    pub fn end(&self) -> WorldPoint {
        self.samples[self.samples.len() - 1].position()
    }

    pub fn length(&self) -> f64 {
        path_length(&self.positions())
    }

    /// Arc length of the sampled polyline from sample 0 up to `index`.
    pub fn length_until(&self, index: usize) -> f64 {
        self.samples[..=index]
            .windows(2)
            .map(|w| w[0].position().distance(&w[1].position()))
            .sum()
    }

    /// Samples `0..=index` of `self` followed by `tail` minus its first sample
    /// (which is expected to coincide with sample `index`).
    pub fn splice(&self, index: usize, tail: &Trajectory) -> Trajectory {
        let mut samples = self.samples[..=index].to_vec();
        samples.extend_from_slice(&tail.samples[1..]);
        Trajectory {
            dt: self.dt,
            samples,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.samples.len() * 64);
        s.push_str(CSV_HEADER);
        s.push('\n');
        for (k, r) in self.samples.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                k as f64 * self.dt,
                r.x,
                r.y,
                r.theta,
                r.v,
                r.omega
            );
        }
        s
    }

    pub fn read_csv(path: &Path) -> Result<Trajectory> {
        let rows = crate::io::read_csv_rows(path, CSV_HEADER, 6)?;
        if rows.len() < 2 {
            return Err(Error::Parse(format!("{}: need at least 2 samples", path.display())));
        }
        let dt = rows[1][0] - rows[0][0];
        if !(dt > 0.0) {
            return Err(Error::Parse(format!("{}: non-increasing time", path.display())));
        }
        // times are written with 6 decimals
        let dt = (dt * 1e6).round() / 1e6;
        Ok(Trajectory {
            dt,
            samples: rows
                .iter()
                .map(|r| RefSample {
                    x: r[1],
                    y: r[2],
                    theta: r[3],
                    v: r[4],
                    omega: r[5],
                })
                .collect(),
        })
    }
}

/// Sum of consecutive Euclidean distances.
pub fn path_length(points: &[WorldPoint]) -> f64 {
    points.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    /// s
    pub dt: f64,
    /// m/s
    pub v_max: f64,
    /// m/s
    pub v_cruise: f64,
    /// m/s^2
    pub a_max: f64,
    /// Target distance between spline control points (m).
    pub control_spacing: f64,
}

impl ProfileParams {
    pub fn new(dt: f64, v_max: f64, v_cruise: f64, control_spacing: f64) -> Self {
        ProfileParams {
            dt,
            v_max,
            v_cruise,
            // reach v_max in one second
            a_max: v_max,
            control_spacing,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Trajectory(m));
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.v_cruise > 0.0) {
            return bad(format!("v_cruise must be positive, got {}", self.v_cruise));
        }
        if self.v_cruise > self.v_max {
            return bad(format!("v_cruise {} exceeds v_max {}", self.v_cruise, self.v_max));
        }
        if !(self.a_max > 0.0) {
            return bad(format!("a_max must be positive, got {}", self.a_max));
        }
        if !(self.control_spacing > 0.0) {
            return bad(format!("control spacing must be positive, got {}", self.control_spacing));
        }
        Ok(())
    }
}

/// Speed and heading at the first sample; the default starts from rest.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StartState {
    pub speed: f64,
    pub heading: Option<f64>,
}

/// Clamped uniform B-spline over `u in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BSpline {
    degree: usize,
    control: Vec<WorldPoint>,
    knots: Vec<f64>,
}

impl BSpline {
    /// Degree is capped at `control.len() - 1`.
    pub fn clamped(control: Vec<WorldPoint>, degree: usize) -> Result<BSpline> {
        if control.len() < 2 {
            return Err(Error::Trajectory("a spline needs at least 2 control points".into()));
        }
        let p = degree.min(control.len() - 1).max(1);
        let n = control.len();
        let spans = n - p;
        let mut knots = vec![0.0; p + 1];
        for i in 1..spans {
            knots.push(i as f64 / spans as f64);
        }
        knots.extend(std::iter::repeat_n(1.0, p + 1));
        Ok(BSpline {
            degree: p,
            control,
            knots,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn control_points(&self) -> &[WorldPoint] {
        &self.control
    }

    /// Interior knot values including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.knots[self.degree..self.knots.len() - self.degree].to_vec();
        b.dedup();
        b
    }

    fn span(&self, u: f64) -> usize {
        let p = self.degree;
        let n = self.control.len();
        if u >= 1.0 {
            return n - 1;
        }
        // last k with knots[k] <= u, within [p, n-1]
        let mut lo = p;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.knots[mid] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// De Boor evaluation of the curve and its first two derivatives.
    pub fn eval(&self, u: f64) -> (WorldPoint, WorldPoint, WorldPoint) {
        let u = u.clamp(0.0, 1.0);
        let p = self.degree;
        let k = self.span(u);
        // basis functions and derivatives (NURBS Book A2.3), up to order 2
        let nders = 2.min(p);
        let ders = basis_derivs(&self.knots, k, u, p, nders);
        let mut out = [WorldPoint::new(0.0, 0.0); 3];
        for (d, o) in out.iter_mut().enumerate().take(nders + 1) {
            let mut x = 0.0;
            let mut y = 0.0;
            for j in 0..=p {
                let c = self.control[k - p + j];
                x += ders[d][j] * c.x;
                y += ders[d][j] * c.y;
            }
            *o = WorldPoint::new(x, y);
        }
        if u >= 1.0 {
            out[0] = self.control[self.control.len() - 1];
        } else if u <= 0.0 {
            out[0] = self.control[0];
        }
        (out[0], out[1], out[2])
    }

    pub fn point(&self, u: f64) -> WorldPoint {
        self.eval(u).0
    }
}

fn basis_derivs(knots: &[f64], span: usize, u: f64, p: usize, n: usize) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; n + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=n {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for (k, row) in ders.iter_mut().enumerate().skip(1) {
        for v in row.iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

// 5-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

const SUBDIVISIONS: usize = 8;

/// Arc-length table of a spline with inversion `s -> u`.
#[derive(Debug, Clone)]
struct ArcTable {
    us: Vec<f64>,
    ss: Vec<f64>,
}

fn speed_at(spline: &BSpline, u: f64) -> f64 {
    let (_, d, _) = spline.eval(u);
    d.x.hypot(d.y)
}

fn integrate_speed(spline: &BSpline, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL_X.iter()
        .zip(GL_W)
        .map(|(x, w)| w * speed_at(spline, mid + half * x))
        .sum::<f64>()
        * half
}

impl ArcTable {
    fn new(spline: &BSpline) -> ArcTable {
        let breaks = spline.breakpoints();
        let mut us = vec![0.0];
        let mut ss = vec![0.0];
        for w in breaks.windows(2) {
            for j in 1..=SUBDIVISIONS {
                let u0 = *us.last().expect("non-empty");
                let u1 = if j == SUBDIVISIONS {
                    w[1]
                } else {
                    w[0] + (w[1] - w[0]) * j as f64 / SUBDIVISIONS as f64
                };
                let s0 = *ss.last().expect("non-empty");
                us.push(u1);
                ss.push(s0 + integrate_speed(spline, u0, u1));
            }
        }
        ArcTable { us, ss }
    }

    fn total(&self) -> f64 {
        *self.ss.last().expect("non-empty")
    }

    fn u_at(&self, spline: &BSpline, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.total() {
            return 1.0;
        }
        let k = self.ss.partition_point(|&v| v <= s) - 1;
        let (ua, ub) = (self.us[k], self.us[k + 1]);
        let (sa, sb) = (self.ss[k], self.ss[k + 1]);
        let mut lo = ua;
        let mut hi = ub;
        let mut u = if sb > sa { ua + (ub - ua) * (s - sa) / (sb - sa) } else { ua };
        for _ in 0..50 {
            let f = sa + integrate_speed(spline, ua, u) - s;
            if f.abs() < 1e-12 {
                break;
            }
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let d = speed_at(spline, u);
            let newton = u - f / d;
            u = if d > 1e-12 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        u
    }
}

/// Trapezoidal speed profile over a path of length `length`, starting at
/// `v0`, ending at rest, lasting exactly `duration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    pub length: f64,
    pub v0: f64,
    pub v_peak: f64,
    pub accel: f64,
    pub duration: f64,
    t_accel_end: f64,
    t_decel_start: f64,
}

impl SpeedProfile {
    /// Shortest whole-`quantum` duration respecting `v_cruise` and `accel`.
    pub fn plan(length: f64, v0: f64, v_cruise: f64, accel: f64, quantum: f64) -> SpeedProfile {
        let mut v0 = v0.clamp(0.0, v_cruise);
        // cannot stop within the path: start from rest instead
        if v0 * v0 / (2.0 * accel) > length {
            v0 = 0.0;
        }
        let peak = v_cruise.min((accel * length + v0 * v0 / 2.0).sqrt());
        let t_min = if peak >= v_cruise {
            let ramp = (v_cruise - v0) / accel + v_cruise / accel;
            let ramp_dist = (v_cruise * v_cruise - v0 * v0) / (2.0 * accel)
                + v_cruise * v_cruise / (2.0 * accel);
            ramp + (length - ramp_dist).max(0.0) / v_cruise
        } else {
            (peak - v0) / accel + peak / accel
        };
        let steps = (t_min / quantum - 1e-9).ceil().max(1.0);
        let duration = steps * quantum;
        Self::with_duration(length, v0, accel, duration)
            .or_else(|| Self::with_duration(length, 0.0, accel, duration))
            .expect("duration not shorter than the minimum is always feasible from rest")
    }

    /// Peak speed solves `v^2 - v (aT + v0) + aL + v0^2/2 = 0` (smaller root).
    fn with_duration(length: f64, v0: f64, accel: f64, duration: f64) -> Option<SpeedProfile> {
        let b = accel * duration + v0;
        let c = accel * length + v0 * v0 / 2.0;
        let disc = b * b - 4.0 * c;
        if disc < -1e-12 {
            return None;
        }
        let v = (b - disc.max(0.0).sqrt()) / 2.0;
        if v + 1e-12 < v0 {
            return None;
        }
        let v = v.max(v0);
        let t1 = (v - v0) / accel;
        let t2 = duration - v / accel;
        if t2 + 1e-9 < t1 {
            return None;
        }
        Some(SpeedProfile {
            length,
            v0,
            v_peak: v,
            accel,
            duration,
            t_accel_end: t1,
            t_decel_start: t2.max(t1),
        })
    }

    pub fn distance(&self, t: f64) -> f64 {
        let a = self.accel;
        if t <= 0.0 {
            0.0
        } else if t >= self.duration {
            self.length
        } else if t <= self.t_accel_end {
            self.v0 * t + 0.5 * a * t * t
        } else if t <= self.t_decel_start {
            let t1 = self.t_accel_end;
            self.v0 * t1 + 0.5 * a * t1 * t1 + self.v_peak * (t - t1)
        } else {
            let r = self.duration - t;
            self.length - 0.5 * a * r * r
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        if t <= 0.0 {
            self.v0
        } else if t >= self.duration {
            0.0
        } else if t <= self.t_accel_end {
            self.v0 + self.accel * t
        } else if t <= self.t_decel_start {
            self.v_peak
        } else {
            self.accel * (self.duration - t)
        }
    }
}

/// A spline traversed by a speed profile; sample it at any step that
/// divides the profile duration.
#[derive(Debug, Clone)]
pub struct TrajectoryPlan {
    pub spline: BSpline,
    pub profile: SpeedProfile,
    table: ArcTable,
}

impl TrajectoryPlan {
    pub fn arc_length(&self) -> f64 {
        self.table.total()
    }

    pub fn sample(&self, dt: f64) -> Trajectory {
        let steps = (self.profile.duration / dt).round() as usize;
        let samples = (0..=steps)
            .map(|k| {
                let t = k as f64 * dt;
                let s = if k == steps {
                    self.table.total()
                } else {
                    self.profile.distance(t) * self.table.total() / self.profile.length
                };
                let v = if k == steps { 0.0 } else { self.profile.speed(t) };
                let u = self.table.u_at(&self.spline, s);
                let (p, d1, d2) = self.spline.eval(u);
                let speed = d1.x.hypot(d1.y);
                let theta = d1.y.atan2(d1.x);
                let curvature = if speed > 1e-12 {
                    (d1.x * d2.y - d1.y * d2.x) / (speed * speed * speed)
                } else {
                    0.0
                };
                RefSample {
                    x: p.x,
                    y: p.y,
                    theta,
                    v,
                    omega: curvature * v,
                }
            })
            .collect();
        Trajectory { dt, samples }
    }
}

fn collapse_duplicates(waypoints: &[WorldPoint]) -> Vec<WorldPoint> {
    let mut out: Vec<WorldPoint> = Vec::with_capacity(waypoints.len());
    for &w in waypoints {
        if out.last().is_none_or(|l| l.distance(&w) > 1e-9) {
            out.push(w);
        }
    }
    out
}

/// Inserts evenly spaced points so no segment is longer than `spacing`.
pub fn densify(waypoints: &[WorldPoint], spacing: f64) -> Vec<WorldPoint> {
    let mut out = vec![waypoints[0]];
    for w in waypoints.windows(2) {
        let pieces = (w[0].distance(&w[1]) / spacing).ceil().max(1.0) as usize;
        for j in 1..=pieces {
            out.push(w[0].lerp(&w[1], j as f64 / pieces as f64));
        }
    }
    out
}

fn control_polygon(waypoints: &[WorldPoint], spacing: f64, heading: Option<f64>) -> Result<Vec<WorldPoint>> {
    let mut pts = collapse_duplicates(waypoints);
    if pts.len() < 2 {
        return Err(Error::Trajectory("need at least 2 distinct waypoints".into()));
    }
    if let Some(h) = heading {
        let lead = WorldPoint::new(
            pts[0].x + 0.5 * spacing * h.cos(),
            pts[0].y + 0.5 * spacing * h.sin(),
        );
        if lead.distance(&pts[1]) > 1e-9 {
            pts.insert(1, lead);
        }
    }
    Ok(densify(&pts, spacing))
}

pub fn plan(
    waypoints: &[WorldPoint],
    params: &ProfileParams,
    start: StartState,
    degree: usize,
) -> Result<TrajectoryPlan> {
    params.validate()?;
    let control = control_polygon(waypoints, params.control_spacing, start.heading)?;
    let spline = BSpline::clamped(control, degree)?;
    let table = ArcTable::new(&spline);
    let profile = SpeedProfile::plan(
        table.total(),
        start.speed,
        params.v_cruise,
        params.a_max,
        params.dt,
    );
    Ok(TrajectoryPlan {
        spline,
        profile,
        table,
    })
}

/// Cubic spline reference starting from rest.
pub fn interpolate(waypoints: &[WorldPoint], params: &ProfileParams) -> Result<Trajectory> {
    interpolate_from(waypoints, params, StartState::default())
}

pub fn interpolate_from(
    waypoints: &[WorldPoint],
    params: &ProfileParams,
    start: StartState,
) -> Result<Trajectory> {
    Ok(plan(waypoints, params, start, 3)?.sample(params.dt))
}

pub fn samples_free(traj: &Trajectory, map: &GridMap) -> bool {
    traj.samples.iter().all(|s| map.point_free(s.position()))
}

/// Interpolation that keeps every sample in free cells of `map`.
///
/// The cubic curve is retried with the control spacing halved up to three
/// times; if it still clips a blocked cell, the reference follows the
/// waypoint polyline itself (degree 1), which is safe whenever the waypoint
/// segments are.
pub fn interpolate_safe(
    waypoints: &[WorldPoint],
    params: &ProfileParams,
    start: StartState,
    map: &GridMap,
) -> Result<Trajectory> {
    let mut start = start;
    if let (Some(h), Some(&first)) = (start.heading, waypoints.first()) {
        let lead = WorldPoint::new(
            first.x + 0.5 * params.control_spacing * h.cos(),
            first.y + 0.5 * params.control_spacing * h.sin(),
        );
        if !map.segment_free(first, lead) {
            start.heading = None;
        }
    }
    let mut p = *params;
    for _ in 0..=3 {
        let traj = interpolate_from(waypoints, &p, start)?;
        if samples_free(&traj, map) {
            return Ok(traj);
        }
        p.control_spacing /= 2.0;
    }
    let linear = plan(waypoints, params, StartState { heading: None, ..start }, 1)?.sample(params.dt);
    if samples_free(&linear, map) {
        return Ok(linear);
    }
    Err(Error::Trajectory(
        "no collision-free interpolation of the waypoints".into(),
    ))
}
