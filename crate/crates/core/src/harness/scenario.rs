//! Flat `key = value` scenario files.
//!
//! Lines starting with `#` are comments. A file is read on top of the
//! built-in `default` preset, so it only lists what it changes;
//! `radio.fade` may repeat, and any fade line replaces the preset's fades
//! (`radio.fade = none` clears them). Lists
//! are whitespace separated; points are `x y`; fades are `x y radius depth`;
//! roadmap variants are `nodes:d_max`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::follower::FollowerGains;
use crate::gridworld::{GridMap, WorldPoint};
use crate::radio::{LocalFade, RadioConfig, Transmitter};
use crate::svc::SmoParams;
use crate::trajectory::ProfileParams;

pub const DEFAULT_PRESET: &str = include_str!("../../scenarios/default.scn");
pub const FIG7_PRESET: &str = include_str!("../../scenarios/fig7.scn");

#[derive(Debug, Clone, PartialEq)]
pub enum LayoutSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub lat_values: Vec<f64>,
    /// `(nodes, d_max)` pairs.
    pub variants: Vec<(usize, f64)>,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub layout: LayoutSource,
    pub tx: Transmitter,
    /// `seed` here is ignored; the radio stage derives its own.
    pub radio: RadioConfig,
    pub receivers: usize,
    pub split: [f64; 3],
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub folds: usize,
    pub smo: SmoParams,
    pub prm_nodes: usize,
    pub prm_d_max: f64,
    pub profile: ProfileParams,
    pub gains: FollowerGains,
    /// Initial heading error of the AGV (rad).
    pub theta_offset: f64,
    pub start: WorldPoint,
    pub target: WorldPoint,
    pub k_now: usize,
    pub lat_budget: Option<f64>,
    pub sweep: SweepSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::parse(DEFAULT_PRESET, None).expect("built-in default preset parses")
    }
}

fn base() -> Scenario {
    Scenario {
        name: String::new(),
        seed: 0,
        layout: LayoutSource::Builtin("factory".into()),
        tx: Transmitter {
            position: WorldPoint::new(0.0, 0.0),
            height: 3.0,
            tx_power: 20.0,
            frequency: 2.4,
        },
        radio: RadioConfig::default(),
        receivers: 1000,
        split: [0.6, 0.2, 0.2],
        c_grid: vec![1.0, 10.0, 100.0],
        gamma_grid: vec![1.0, 4.0, 16.0],
        folds: 5,
        smo: SmoParams::default(),
        prm_nodes: 300,
        prm_d_max: 6.0,
        profile: ProfileParams::new(0.1, 1.5, 1.0, 0.5),
        gains: FollowerGains::default(),
        theta_offset: 0.0,
        start: WorldPoint::new(0.0, 0.0),
        target: WorldPoint::new(0.0, 0.0),
        k_now: 0,
        lat_budget: None,
        sweep: SweepSpec {
            lat_values: vec![0.0, 1.0, 2.0, 4.0, 6.7, 10.0],
            variants: vec![(150, 4.0), (400, 8.0)],
            repetitions: 10,
        },
    }
}

fn err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Scenario(format!("`{key}`: {msg}"))
}

fn f64_of(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.trim().parse().map_err(|_| err(key, format!("not a number: `{v}`")))?;
    if !x.is_finite() {
        return Err(err(key, "must be finite"));
    }
    Ok(x)
}

fn usize_of(key: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| err(key, format!("not a non-negative integer: `{v}`")))
}

fn list_of(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split_whitespace().map(|t| f64_of(key, t)).collect()
}

fn point_of(key: &str, v: &str) -> Result<WorldPoint> {
    match list_of(key, v)?.as_slice() {
        &[x, y] => Ok(WorldPoint::new(x, y)),
        _ => Err(err(key, "expected `x y`")),
    }
}

type Entries = (BTreeMap<String, String>, Option<Vec<String>>);

/// Key/value pairs of one file; `radio.fade` may repeat.
fn collect(text: &str) -> Result<Entries> {
    let mut kv = BTreeMap::new();
    let mut fades: Option<Vec<String>> = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.split_once('#').map_or(line, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Scenario(format!("line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k == "radio.fade" {
            fades.get_or_insert_with(Vec::new).push(v);
            continue;
        }
        if kv.insert(k.clone(), v).is_some() {
            return Err(Error::Scenario(format!("line {}: duplicate key `{k}`", n + 1)));
        }
    }
    Ok((kv, fades))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

impl Scenario {
    /// Parses scenario text over the built-in defaults. `base_dir` resolves a
    /// relative `layout.file`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Scenario> {
        let (mut kv, mut fades) = collect(DEFAULT_PRESET)?;
        let (over, over_fades) = collect(text)?;
        if over.contains_key("layout.file") || over.contains_key("layout.builtin") {
            kv.remove("layout.file");
            kv.remove("layout.builtin");
        }
        kv.extend(over);
        if let Some(f) = over_fades {
            fades = Some(f);
        }
        let fades = fades.unwrap_or_default();
        let mut sc = base();
        let mut take = |key: &str| kv.remove(key);
        if let Some(v) = take("name") {
            sc.name = v;
        }
        if let Some(v) = take("seed") {
            sc.seed = v.parse().map_err(|_| err("seed", "not an unsigned integer"))?;
        }
        match (take("layout.builtin"), take("layout.file")) {
            (Some(_), Some(_)) => return Err(Error::Scenario("give layout.builtin or layout.file, not both".into())),
            (Some(b), None) => sc.layout = LayoutSource::Builtin(b),
            (None, Some(f)) => {
                let p = PathBuf::from(f);
                sc.layout = LayoutSource::File(match base_dir {
                    Some(d) if p.is_relative() => d.join(p),
                    _ => p,
                });
            }
            (None, None) => {}
        }
        macro_rules! set {
            ($key:literal, $field:expr, $conv:ident) => {
                if let Some(v) = take($key) {
                    $field = $conv($key, &v)?;
                }
            };
        }
        set!("tx.position", sc.tx.position, point_of);
        set!("tx.height", sc.tx.height, f64_of);
        set!("tx.power_dbm", sc.tx.tx_power, f64_of);
        set!("tx.freq_ghz", sc.tx.frequency, f64_of);
        set!("radio.pathloss_exponent", sc.radio.pathloss_exponent, f64_of);
        set!("radio.reference_distance", sc.radio.reference_distance, f64_of);
        set!("radio.reference_loss", sc.radio.reference_loss, f64_of);
        set!("radio.sigma_sf", sc.radio.shadow_sigma, f64_of);
        set!("radio.decorrelation", sc.radio.shadow_decorrelation, f64_of);
        set!("radio.sigma_mp", sc.radio.multipath_sigma, f64_of);
        set!("radio.sensitivity", sc.radio.sensitivity, f64_of);
        set!("dataset.receivers", sc.receivers, usize_of);
        if let Some(v) = take("dataset.split") {
            match list_of("dataset.split", &v)?.as_slice() {
                &[a, b, c] => sc.split = [a, b, c],
                _ => return Err(err("dataset.split", "expected three fractions")),
            }
        }
        set!("svc.c_grid", sc.c_grid, list_of);
        set!("svc.gamma_grid", sc.gamma_grid, list_of);
        set!("svc.folds", sc.folds, usize_of);
        set!("svc.tolerance", sc.smo.tolerance, f64_of);
        set!("svc.max_iterations", sc.smo.max_iterations, usize_of);
        set!("planner.nodes", sc.prm_nodes, usize_of);
        set!("planner.d_max", sc.prm_d_max, f64_of);
        set!("traj.dt", sc.profile.dt, f64_of);
        set!("traj.v_max", sc.profile.v_max, f64_of);
        set!("traj.v_cruise", sc.profile.v_cruise, f64_of);
        set!("traj.a_max", sc.profile.a_max, f64_of);
        set!("traj.spacing", sc.profile.control_spacing, f64_of);
        set!("follower.k_x", sc.gains.k_x, f64_of);
        set!("follower.k_y", sc.gains.k_y, f64_of);
        set!("follower.k_theta", sc.gains.k_theta, f64_of);
        set!("follower.v_max", sc.gains.v_max, f64_of);
        set!("follower.omega_max", sc.gains.omega_max, f64_of);
        set!("follower.theta_offset", sc.theta_offset, f64_of);
        set!("mission.start", sc.start, point_of);
        set!("mission.target", sc.target, point_of);
        set!("replan.k_now", sc.k_now, usize_of);
        if let Some(v) = take("replan.lat_budget") {
            sc.lat_budget = match v.as_str() {
                "none" => None,
                _ => Some(f64_of("replan.lat_budget", &v)?),
            };
        }
        set!("sweep.lat", sc.sweep.lat_values, list_of);
        set!("sweep.repetitions", sc.sweep.repetitions, usize_of);
        if let Some(v) = take("sweep.variants") {
            sc.sweep.variants = v
                .split_whitespace()
                .map(|t| {
                    let (n, d) = t
                        .split_once(':')
                        .ok_or_else(|| err("sweep.variants", format!("expected `nodes:d_max`, got `{t}`")))?;
                    Ok((usize_of("sweep.variants", n)?, f64_of("sweep.variants", d)?))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(k) = kv.keys().next() {
            return Err(Error::Scenario(format!("unknown key `{k}`")));
        }
        sc.radio.fades = fades
                .iter()
                .filter(|v| v.as_str() != "none")
                .map(|v| match list_of("radio.fade", v)?.as_slice() {
                    &[x, y, radius, depth] => Ok(LocalFade {
                        center: WorldPoint::new(x, y),
                        radius,
                        depth,
                    }),
                    _ => Err(err("radio.fade", "expected `x y radius depth`")),
                })
                .collect::<Result<_>>()?;
        sc.check()?;
        Ok(sc)
    }

    pub fn from_file(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Scenario::parse(&text, path.parent())
    }

    pub fn preset(name: &str) -> Result<Scenario> {
        match name {
            "default" => Scenario::parse(DEFAULT_PRESET, None),
            "fig7" => Scenario::parse(FIG7_PRESET, None),
            other => Err(Error::Scenario(format!("unknown preset `{other}` (default, fig7)"))),
        }
    }

    /// Preset name or path to a scenario file.
    pub fn resolve(spec: &str) -> Result<Scenario> {
        match spec {
            "default" | "fig7" => Scenario::preset(spec),
            path => Scenario::from_file(Path::new(path)),
        }
    }

    /// Checks that do not need the layout.
    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        self.tx.validate().map_err(|e| Error::Scenario(e.to_string()))?;
        self.radio.validate().map_err(|e| Error::Scenario(e.to_string()))?;
        if self.receivers < 3 {
            return bad(format!("need at least 3 receivers, got {}", self.receivers));
        }
        if self.split.iter().any(|&f| !(f > 0.0)) || (self.split.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("split fractions {:?} must be positive and sum to 1", self.split));
        }
        if self.c_grid.is_empty() || self.c_grid.iter().any(|&c| !(c > 0.0)) {
            return bad("svc.c_grid must be non-empty and positive".into());
        }
        if self.gamma_grid.is_empty() || self.gamma_grid.iter().any(|&g| !(g > 0.0)) {
            return bad("svc.gamma_grid must be non-empty and positive".into());
        }
        if self.folds < 2 {
            return bad(format!("svc.folds must be >= 2, got {}", self.folds));
        }
        if self.prm_nodes < 2 || !(self.prm_d_max > 0.0) {
            return bad("planner needs nodes >= 2 and d_max > 0".into());
        }
        self.profile.validate().map_err(|e| Error::Scenario(e.to_string()))?;
        self.gains.validate().map_err(|e| Error::Scenario(e.to_string()))?;
        if self.sweep.repetitions < 1 {
            return bad("sweep.repetitions must be >= 1".into());
        }
        if self.sweep.lat_values.iter().any(|&l| l < 0.0) {
            return bad("sweep.lat values must be non-negative".into());
        }
        if self.sweep.variants.iter().any(|&(n, d)| n < 2 || !(d > 0.0)) {
            return bad("sweep.variants need nodes >= 2 and d_max > 0".into());
        }
        if self.lat_budget.is_some_and(|l| l < 0.0) {
            return bad("replan.lat_budget must be non-negative".into());
        }
        Ok(())
    }

    pub fn load_layout(&self) -> Result<GridMap> {
        match &self.layout {
            LayoutSource::Builtin(name) => match name.as_str() {
                "factory" => Ok(factory_layout()),
                other => Err(Error::Scenario(format!("unknown built-in layout `{other}`"))),
            },
            LayoutSource::File(p) => {
                let f = std::fs::File::open(p)
                    .map_err(|e| Error::Scenario(format!("layout {}: {e}", p.display())))?;
                GridMap::read_pgm(std::io::BufReader::new(f))
                    .map_err(|e| Error::Scenario(format!("layout {}: {e}", p.display())))
            }
        }
    }

    /// Checks against the layout: free mission endpoints and a sampling step
    /// shorter than a cell at full speed.
    pub fn validate_with(&self, layout: &GridMap) -> Result<()> {
        if self.profile.dt * self.profile.v_max >= layout.resolution() {
            return Err(Error::Scenario(format!(
                "dt * v_max = {} must be below the map resolution {}",
                self.profile.dt * self.profile.v_max,
                layout.resolution()
            )));
        }
        for (what, p) in [("start", self.start), ("target", self.target)] {
            if !layout.point_free(p) {
                return Err(Error::Scenario(format!("{what} ({}, {}) is not free", p.x, p.y)));
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same scenario.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("name", self.name.clone());
        kv("seed", self.seed.to_string());
        match &self.layout {
            LayoutSource::Builtin(b) => kv("layout.builtin", b.clone()),
            LayoutSource::File(p) => kv("layout.file", p.display().to_string()),
        }
        let pt = |p: WorldPoint| format!("{} {}", p.x, p.y);
        kv("tx.position", pt(self.tx.position));
        kv("tx.height", self.tx.height.to_string());
        kv("tx.power_dbm", self.tx.tx_power.to_string());
        kv("tx.freq_ghz", self.tx.frequency.to_string());
        let r = &self.radio;
        kv("radio.pathloss_exponent", r.pathloss_exponent.to_string());
        kv("radio.reference_distance", r.reference_distance.to_string());
        kv("radio.reference_loss", r.reference_loss.to_string());
        kv("radio.sigma_sf", r.shadow_sigma.to_string());
        kv("radio.decorrelation", r.shadow_decorrelation.to_string());
        kv("radio.sigma_mp", r.multipath_sigma.to_string());
        kv("radio.sensitivity", r.sensitivity.to_string());
        if r.fades.is_empty() {
            kv("radio.fade", "none".into());
        }
        for f in &r.fades {
            kv("radio.fade", format!("{} {} {} {}", f.center.x, f.center.y, f.radius, f.depth));
        }
        kv("dataset.receivers", self.receivers.to_string());
        kv("dataset.split", fmt_list(&self.split));
        kv("svc.c_grid", fmt_list(&self.c_grid));
        kv("svc.gamma_grid", fmt_list(&self.gamma_grid));
        kv("svc.folds", self.folds.to_string());
        kv("svc.tolerance", self.smo.tolerance.to_string());
        kv("svc.max_iterations", self.smo.max_iterations.to_string());
        kv("planner.nodes", self.prm_nodes.to_string());
        kv("planner.d_max", self.prm_d_max.to_string());
        let p = &self.profile;
        kv("traj.dt", p.dt.to_string());
        kv("traj.v_max", p.v_max.to_string());
        kv("traj.v_cruise", p.v_cruise.to_string());
        kv("traj.a_max", p.a_max.to_string());
        kv("traj.spacing", p.control_spacing.to_string());
        let g = &self.gains;
        kv("follower.k_x", g.k_x.to_string());
        kv("follower.k_y", g.k_y.to_string());
        kv("follower.k_theta", g.k_theta.to_string());
        kv("follower.v_max", g.v_max.to_string());
        kv("follower.omega_max", g.omega_max.to_string());
        kv("follower.theta_offset", self.theta_offset.to_string());
        kv("mission.start", pt(self.start));
        kv("mission.target", pt(self.target));
        kv("replan.k_now", self.k_now.to_string());
        kv(
            "replan.lat_budget",
            self.lat_budget.map_or("none".into(), |l| l.to_string()),
        );
        kv("sweep.lat", fmt_list(&self.sweep.lat_values));
        kv(
            "sweep.variants",
            self.sweep
                .variants
                .iter()
                .map(|(n, d)| format!("{n}:{d}"))
                .collect::<Vec<_>>()
                .join(" "),
        );
        kv("sweep.repetitions", self.sweep.repetitions.to_string());
        s
    }
}

/// 50 m x 50 m floor at 0.5 m, `x in [0, 50]`, `y in [-25, 25]`: five rows of
/// storage racks in the southern part and a machine island in the open
/// northern hall.
pub fn factory_layout() -> GridMap {
    let mut g = GridMap::new(100, 100, 0.5, WorldPoint::new(0.0, -25.0)).expect("valid geometry");
    let mut rect = |x0: f64, y0: f64, x1: f64, y1: f64| {
        g.block_rect(WorldPoint::new(x0, y0), WorldPoint::new(x1, y1));
    };
    for i in 0..5 {
        let x0 = 4.0 + 9.0 * i as f64;
        rect(x0, -22.0, x0 + 4.0, -14.0);
        rect(x0, -10.0, x0 + 4.0, -2.0);
        rect(x0, 2.0, x0 + 4.0, 9.0);
    }
    // machine island in the hall
    rect(33.0, 14.0, 37.0, 17.0);
    // wall stub between the hall and the racks
    rect(0.0, 11.5, 12.0, 12.5);
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_round_trip() {
        for name in ["default", "fig7"] {
            let sc = Scenario::preset(name).unwrap();
            let again = Scenario::parse(&sc.to_text(), None).unwrap();
            assert_eq!(again, sc);
            let layout = sc.load_layout().unwrap();
            sc.validate_with(&layout).unwrap();
        }
    }

    #[test]
    fn overrides_and_errors() {
        let sc = Scenario::parse("seed = 9\nradio.fade = 1 2 3 4\nradio.fade = 5 6 7 8\n", None).unwrap();
        assert_eq!(sc.seed, 9);
        assert_eq!(sc.radio.fades.len(), 2);
        assert!(matches!(Scenario::parse("bogus = 1", None), Err(Error::Scenario(_))));
        assert!(Scenario::parse("seed = 1\nseed = 2", None).is_err());
        assert!(Scenario::parse("dataset.split = 0.5 0.5", None).is_err());
        assert!(Scenario::parse("traj.v_cruise = 0", None).is_err());
        assert!(Scenario::parse("no equals sign", None).is_err());
        let clear = Scenario::parse("radio.fade = none", None).unwrap();
        assert!(clear.radio.fades.is_empty());
        assert_eq!(Scenario::parse(&clear.to_text(), None).unwrap(), clear);
        let file = Scenario::parse("layout.file = floor.pgm", Some(Path::new("/maps"))).unwrap();
        assert_eq!(file.layout, LayoutSource::File(PathBuf::from("/maps/floor.pgm")));
    }

    #[test]
    fn trailing_comments() {
        let sc = Scenario::parse("seed = 3 # master\nreplan.lat_budget = 4   # s\n", None).unwrap();
        assert_eq!((sc.seed, sc.lat_budget), (3, Some(4.0)));
    }

    #[test]
    fn fast_sampling_is_rejected() {
        let sc = Scenario::parse("traj.dt = 1.0", None).unwrap();
        let layout = sc.load_layout().unwrap();
        assert!(sc.validate_with(&layout).is_err());
    }
}
