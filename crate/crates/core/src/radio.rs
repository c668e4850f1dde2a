//! Synthetic received-signal-strength maps.
//!
//! The `pl` layer is the deterministic log-distance mean path loss. The `sf`
//! layer adds a spatially correlated log-normal shadowing field and i.i.d.
//! multipath jitter (both in dB), plus optional deterministic local fades.
//!
//! The shadowing field is a separable first-order Gauss-Markov field sampled
//! cell by cell in row-major order: along either grid axis its correlation is
//! exactly `exp(-lag / decorrelation)`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gridworld::{GridMap, WorldPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter {
    pub position: WorldPoint,
    /// meters
    pub height: f64,
    /// dBm
    pub tx_power: f64,
    /// GHz
    pub frequency: f64,
}

impl Transmitter {
    pub fn validate(&self) -> Result<()> {
        if !(self.height > 0.0) {
            return Err(Error::InvalidConfig(format!("tx height {}", self.height)));
        }
        if !(self.frequency > 0.0) {
            return Err(Error::InvalidConfig(format!("tx frequency {}", self.frequency)));
        }
        Ok(())
    }

    pub fn horizontal_distance(&self, p: WorldPoint) -> f64 {
        self.position.distance(&p)
    }

    /// Receivers are assumed at floor level.
    pub fn distance_3d(&self, p: WorldPoint) -> f64 {
        self.horizontal_distance(p).hypot(self.height)
    }
}

/// Deterministic circular attenuation added to the `sf` layer only, with a
/// raised-cosine edge. Models a deep localized fade (e.g. behind a machine).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFade {
    pub center: WorldPoint,
    pub radius: f64,
    /// dB of attenuation at the center
    pub depth: f64,
}

impl LocalFade {
    pub fn attenuation(&self, p: WorldPoint) -> f64 {
        let r = self.center.distance(&p);
        if r >= self.radius {
            0.0
        } else {
            self.depth * 0.5 * (1.0 + (std::f64::consts::PI * r / self.radius).cos())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadioConfig {
    pub pathloss_exponent: f64,
    /// meters
    pub reference_distance: f64,
    /// dB
    pub reference_loss: f64,
    /// dB
    pub shadow_sigma: f64,
    /// meters
    pub shadow_decorrelation: f64,
    /// dB
    pub multipath_sigma: f64,
    /// dBm
    pub sensitivity: f64,
    pub seed: u64,
    pub fades: Vec<LocalFade>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            pathloss_exponent: 2.7,
            reference_distance: 1.0,
            reference_loss: 40.0,
            shadow_sigma: 6.0,
            shadow_decorrelation: 6.0,
            multipath_sigma: 1.0,
            sensitivity: -75.0,
            seed: 0,
            fades: Vec::new(),
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidConfig(format!("radio {what} = {v}")));
        if !(self.reference_distance > 0.0) {
            return bad("reference_distance", self.reference_distance);
        }
        if !(self.shadow_sigma >= 0.0) {
            return bad("shadow_sigma", self.shadow_sigma);
        }
        if !(self.multipath_sigma >= 0.0) {
            return bad("multipath_sigma", self.multipath_sigma);
        }
        if !(self.shadow_decorrelation > 0.0) {
            return bad("shadow_decorrelation", self.shadow_decorrelation);
        }
        if !self.pathloss_exponent.is_finite() {
            return bad("pathloss_exponent", self.pathloss_exponent);
        }
        for f in &self.fades {
            if !(f.radius > 0.0) || !f.depth.is_finite() {
                return Err(Error::InvalidConfig(format!("bad local fade {f:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RssVariant {
    PathLoss,
    Fading,
}

impl RssVariant {
    pub fn tag(self) -> &'static str {
        match self {
            RssVariant::PathLoss => "pl",
            RssVariant::Fading => "sf",
        }
    }
}

/// RSS per cell (dBm). Blocked cells hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RssMap {
    grid: GridMap,
    values: Vec<f64>,
    variant: RssVariant,
}

impl RssMap {
    pub fn new(grid: GridMap, values: Vec<f64>, variant: RssVariant) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(RssMap {
            grid,
            values,
            variant,
        })
    }

    pub fn grid(&self) -> &GridMap {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn variant(&self) -> RssVariant {
        self.variant
    }

    /// Value of the cell containing `p`, if that cell is in bounds and free.
    pub fn at(&self, p: WorldPoint) -> Option<f64> {
        let cell = self.grid.world_to_cell(p)?;
        if self.grid.blocked(cell) {
            return None;
        }
        Some(self.values[self.grid.index(cell)])
    }

    /// `x,y,rss_dbm` rows for free cells in row-major order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,rss_dbm\n");
        for (i, v) in self.values.iter().enumerate() {
            let cell = self.grid.cell_at(i);
            if self.grid.blocked(cell) {
                continue;
            }
            let c = self.grid.cell_center(cell);
            let _ = writeln!(s, "{:.6},{:.6},{:.6}", c.x, c.y, v);
        }
        s
    }

    /// Inverse of [`RssMap::to_csv`] given the layout it was written from.
    pub fn read_csv<R: Read>(grid: &GridMap, variant: RssVariant, r: R) -> Result<RssMap> {
        let mut values = vec![f64::NAN; grid.len()];
        let reader = BufReader::new(r);
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if n == 0 {
                if line.trim() != "x,y,rss_dbm" {
                    return Err(Error::Parse(format!("RSS CSV header `{line}`")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields = crate::io::parse_csv_floats(&line, 3)?;
            let p = WorldPoint::new(fields[0], fields[1]);
            let cell = grid
                .world_to_cell(p)
                .ok_or(Error::BlockedPosition { x: p.x, y: p.y })?;
            values[grid.index(cell)] = fields[2];
        }
        RssMap::new(grid.clone(), values, variant)
    }
}

/// Log-distance mean received power in dBm.
pub fn rss_pl(tx: &Transmitter, cfg: &RadioConfig, p: WorldPoint) -> f64 {
    let d = tx.distance_3d(p).max(cfg.reference_distance);
    tx.tx_power
        - (cfg.reference_loss
            + 10.0 * cfg.pathloss_exponent * (d / cfg.reference_distance).log10())
}

/// Zero-mean shadowing field over every cell of `grid` (blocked cells
/// included, so the field stays continuous under obstacles).
pub fn shadow_field(grid: &GridMap, sigma: f64, decorrelation: f64, rng: &mut impl Rng) -> Vec<f64> {
    let w = grid.width();
    let h = grid.height();
    let rho = (-grid.resolution() / decorrelation).exp();
    let mut s = vec![0.0; w * h];
    if sigma == 0.0 {
        return s;
    }
    let mut z = || -> f64 { StandardNormal.sample(rng) };
    // Separable AR(1) in x and y: each innovation variance keeps the marginal
    // variance at sigma^2.
    let edge = sigma * (1.0 - rho * rho).sqrt();
    let inner = sigma * (1.0 - rho * rho);
    for iy in 0..h {
        for ix in 0..w {
            let v = match (ix, iy) {
                (0, 0) => sigma * z(),
                (_, 0) => rho * s[ix - 1] + edge * z(),
                (0, _) => rho * s[(iy - 1) * w] + edge * z(),
                _ => {
                    rho * s[iy * w + ix - 1] + rho * s[(iy - 1) * w + ix]
                        - rho * rho * s[(iy - 1) * w + ix - 1]
                        + inner * z()
                }
            };
            s[iy * w + ix] = v;
        }
    }
    s
}

/// Builds the path-loss map and the faded map from one seeded stream.
pub fn gen_rss_maps(grid: &GridMap, tx: &Transmitter, cfg: &RadioConfig) -> Result<(RssMap, RssMap)> {
    tx.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shadow = shadow_field(grid, cfg.shadow_sigma, cfg.shadow_decorrelation, &mut rng);

    let mut pl = vec![f64::NAN; grid.len()];
    let mut sf = vec![f64::NAN; grid.len()];
    for i in 0..grid.len() {
        let cell = grid.cell_at(i);
        // one multipath draw per cell, blocked or not, keeps streams aligned
        let multipath = if cfg.multipath_sigma > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            cfg.multipath_sigma * z
        } else {
            0.0
        };
        if grid.blocked(cell) {
            continue;
        }
        let p = grid.cell_center(cell);
        let mean = rss_pl(tx, cfg, p);
        let fade: f64 = cfg.fades.iter().map(|f| f.attenuation(p)).sum();
        pl[i] = mean;
        sf[i] = mean + shadow[i] + multipath - fade;
    }
    Ok((
        RssMap::new(grid.clone(), pl, RssVariant::PathLoss)?,
        RssMap::new(grid.clone(), sf, RssVariant::Fading)?,
    ))
}

/// Uniform points over the free area: a free cell is drawn uniformly, then a
/// point uniformly inside it (all cells have equal area).
pub fn sample_receivers(grid: &GridMap, count: usize, seed: u64) -> Result<Vec<WorldPoint>> {
    if count == 0 {
        return Err(Error::InvalidConfig("receiver count must be >= 1".into()));
    }
    let free = grid.free_cells();
    if free.is_empty() {
        return Err(Error::NoFreeSpace);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = grid.resolution();
    let origin = grid.origin();
    Ok((0..count)
        .map(|_| {
            let cell = free[rng.random_range(0..free.len())];
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            WorldPoint::new(
                origin.x + (cell.ix as f64 + u) * res,
                origin.y + (cell.iy as f64 + v) * res,
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::Cell;

    fn tx_at_origin(height: f64) -> Transmitter {
        Transmitter {
            position: WorldPoint::new(0.0, 0.0),
            height,
            tx_power: 20.0,
            frequency: 2.4,
        }
    }

    fn simple_cfg(exponent: f64) -> RadioConfig {
        RadioConfig {
            pathloss_exponent: exponent,
            reference_distance: 1.0,
            reference_loss: 40.0,
            ..RadioConfig::default()
        }
    }

    #[test]
    fn pathloss_closed_forms() {
        // height 1 directly below the transmitter: d3 = 1 m
        let v = rss_pl(&tx_at_origin(1.0), &simple_cfg(2.0), WorldPoint::new(0.0, 0.0));
        assert!((v + 20.0).abs() < 1e-12);

        // d3 = 10 m: horizontal 8, height 6
        let v = rss_pl(&tx_at_origin(6.0), &simple_cfg(2.0), WorldPoint::new(8.0, 0.0));
        assert!((v + 40.0).abs() < 1e-12);

        // d3 = 25 m: horizontal 24, height 7
        let v = rss_pl(&tx_at_origin(7.0), &simple_cfg(2.7), WorldPoint::new(0.0, 24.0));
        // 20 - (40 + 27 * log10(25)), evaluated independently
        assert!((v - (-57.744_380_234_145_02)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn pathloss_clamps_inside_reference_distance() {
        let cfg = RadioConfig {
            reference_distance: 5.0,
            ..simple_cfg(3.0)
        };
        let tx = tx_at_origin(1.0);
        let near = rss_pl(&tx, &cfg, WorldPoint::new(0.5, 0.0));
        assert!((near - (20.0 - 40.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_maps_coincide() {
        let grid = GridMap::new(12, 9, 1.0, WorldPoint::new(-3.0, -2.0)).unwrap();
        let cfg = RadioConfig {
            shadow_sigma: 0.0,
            multipath_sigma: 0.0,
            ..RadioConfig::default()
        };
        let (pl, sf) = gen_rss_maps(&grid, &tx_at_origin(3.0), &cfg).unwrap();
        assert_eq!(pl.values(), sf.values());
    }

    #[test]
    fn same_seed_same_maps() {
        let mut grid = GridMap::new(20, 20, 0.5, WorldPoint::new(0.0, 0.0)).unwrap();
        grid.set_blocked(Cell::new(4, 4), true);
        let cfg = RadioConfig {
            seed: 99,
            ..RadioConfig::default()
        };
        let a = gen_rss_maps(&grid, &tx_at_origin(3.0), &cfg).unwrap();
        let b = gen_rss_maps(&grid, &tx_at_origin(3.0), &cfg).unwrap();
        assert_eq!(a.1.to_csv(), b.1.to_csv());
        assert!(a.1.values()[grid.index(Cell::new(4, 4))].is_nan());
    }

    #[test]
    fn rejects_bad_config() {
        let grid = GridMap::new(4, 4, 1.0, WorldPoint::new(0.0, 0.0)).unwrap();
        let cfg = RadioConfig {
            shadow_decorrelation: 0.0,
            ..RadioConfig::default()
        };
        assert!(gen_rss_maps(&grid, &tx_at_origin(3.0), &cfg).is_err());
        assert!(gen_rss_maps(&grid, &tx_at_origin(0.0), &RadioConfig::default()).is_err());
    }

    #[test]
    fn receivers_stay_in_free_cells() {
        let one = GridMap::new(1, 1, 2.0, WorldPoint::new(1.0, 1.0)).unwrap();
        let pts = sample_receivers(&one, 3, 5).unwrap();
        assert_eq!(pts.len(), 3);
        for p in pts {
            assert!(p.x >= 1.0 && p.x < 3.0 && p.y >= 1.0 && p.y < 3.0);
        }

        let mut half = GridMap::new(10, 10, 1.0, WorldPoint::new(0.0, 0.0)).unwrap();
        half.block_rect(WorldPoint::new(0.0, 0.0), WorldPoint::new(10.0, 5.0));
        let pts = sample_receivers(&half, 1000, 6).unwrap();
        assert!(pts.iter().all(|&p| half.point_free(p)));

        let mut full = GridMap::new(2, 2, 1.0, WorldPoint::new(0.0, 0.0)).unwrap();
        full.block_rect(WorldPoint::new(0.0, 0.0), WorldPoint::new(2.0, 2.0));
        assert!(matches!(sample_receivers(&full, 1, 0), Err(Error::NoFreeSpace)));
    }

    #[test]
    fn local_fade_profile() {
        let f = LocalFade {
            center: WorldPoint::new(0.0, 0.0),
            radius: 2.0,
            depth: 20.0,
        };
        assert_eq!(f.attenuation(WorldPoint::new(0.0, 0.0)), 20.0);
        assert!((f.attenuation(WorldPoint::new(1.0, 0.0)) - 10.0).abs() < 1e-12);
        assert_eq!(f.attenuation(WorldPoint::new(2.0, 0.0)), 0.0);
    }
}
