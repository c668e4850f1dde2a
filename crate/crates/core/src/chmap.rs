//! Binary coverage-hole map and the local detector that checks a reference
//! trajectory against it.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dataset::{features_at, LABEL_CH};
use crate::error::{Error, Result};
use crate::gridworld::{GridMap, WorldPoint};
use crate::radio::{RadioConfig, Transmitter};
use crate::svc::SvcModel;
use crate::trajectory::Trajectory;

/// `true` cells are predicted coverage holes or layout obstacles; either way
/// the AGV must not enter them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChMap {
    grid: GridMap,
    predicted: Vec<bool>,
    pub timestamp_step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageHoleEvent {
    pub k_bs: usize,
    pub position: WorldPoint,
}

impl ChMap {
    /// A map with no predicted holes: only the layout obstacles.
    pub fn from_layout(layout: &GridMap) -> ChMap {
        ChMap {
            grid: layout.clone(),
            predicted: vec![false; layout.len()],
            timestamp_step: 0,
        }
    }

    /// Marks free layout cells flagged in `holes` (row-major) as coverage holes.
    pub fn with_holes(layout: &GridMap, holes: &[bool]) -> Result<ChMap> {
        if holes.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                got: holes.len(),
            });
        }
        let mut grid = layout.clone();
        let mut predicted = vec![false; layout.len()];
        for (i, &h) in holes.iter().enumerate() {
            let cell = layout.cell_at(i);
            if h && !layout.blocked(cell) {
                grid.set_blocked(cell, true);
                predicted[i] = true;
            }
        }
        Ok(ChMap {
            grid,
            predicted,
            timestamp_step: 0,
        })
    }

    pub fn grid(&self) -> &GridMap {
        &self.grid
    }

    /// CH-or-blocked raster.
    pub fn cells(&self) -> &[bool] {
        self.grid.cells()
    }

    /// Cells that are free in the layout but predicted as holes.
    pub fn predicted(&self) -> &[bool] {
        &self.predicted
    }

    pub fn hole_count(&self) -> usize {
        self.predicted.iter().filter(|&&p| p).count()
    }

    pub fn is_hole(&self, p: WorldPoint) -> bool {
        !self.grid.point_free(p)
    }

    pub fn to_pgm_string(&self) -> String {
        self.grid.to_pgm_string()
    }

    /// `x,y` centers of the predicted hole cells.
    pub fn holes_csv(&self) -> String {
        let mut s = String::from("x,y\n");
        for (i, _) in self.predicted.iter().enumerate().filter(|(_, &p)| p) {
            let c = self.grid.cell_center(self.grid.cell_at(i));
            let _ = writeln!(s, "{:.6},{:.6}", c.x, c.y);
        }
        s
    }

    /// Rebuilds from a PGM raster and its layout.
    pub fn from_pgm(layout: &GridMap, pgm: &GridMap) -> Result<ChMap> {
        if !layout.same_geometry(pgm) {
            return Err(Error::InvalidMap("coverage map geometry differs from layout".into()));
        }
        ChMap::with_holes(layout, pgm.cells())
    }
}

/// Classifies every free cell center with the thresholded model.
pub fn build_chmap(
    model: &SvcModel,
    layout: &GridMap,
    tx: &Transmitter,
    cfg: &RadioConfig,
) -> Result<ChMap> {
    let holes = (0..layout.len())
        .into_par_iter()
        .map(|i| {
            let cell = layout.cell_at(i);
            if layout.blocked(cell) {
                return Ok(false);
            }
            let f = features_at(tx, cfg, layout.cell_center(cell));
            Ok(model.predict_raw(&f)? == LABEL_CH)
        })
        .collect::<Result<Vec<bool>>>()?;
    ChMap::with_holes(layout, &holes)
}

/// First step `k >= k_now` whose reference position lies in a hole or off
/// the map.
pub fn local_detect(chmap: &ChMap, traj: &Trajectory, k_now: usize) -> Result<Option<CoverageHoleEvent>> {
    if k_now >= traj.len() {
        return Err(Error::Replanning(format!(
            "k_now {k_now} outside trajectory of {} samples",
            traj.len()
        )));
    }
    Ok(traj.samples[k_now..]
        .iter()
        .position(|s| chmap.is_hole(s.position()))
        .map(|off| CoverageHoleEvent {
            k_bs: k_now + off,
            position: traj.samples[k_now + off].position(),
        }))
}
