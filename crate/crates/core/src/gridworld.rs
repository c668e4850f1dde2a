//! Binary floor raster with world/cell transforms and conservative
//! straight-line collision checks.
//!
//! Cells are addressed as `(ix, iy)` with `ix` growing along world x and `iy`
//! along world y. Storage is row-major: `iy * width + ix`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        WorldPoint { x, y }
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &WorldPoint, t: f64) -> WorldPoint {
        WorldPoint::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
}

impl Cell {
    pub const fn new(ix: usize, iy: usize) -> Self {
        Cell { ix, iy }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    resolution: f64,
    origin: WorldPoint,
    /// `true` = blocked.
    cells: Vec<bool>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, resolution: f64, origin: WorldPoint) -> Result<Self> {
        Self::from_cells(width, height, resolution, origin, vec![false; width * height])
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        origin: WorldPoint,
        cells: Vec<bool>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMap(format!("size {width}x{height}")));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidMap(format!("resolution {resolution}")));
        }
        if !(origin.x.is_finite() && origin.y.is_finite()) {
            return Err(Error::InvalidMap("non-finite origin".into()));
        }
        if cells.len() != width * height {
            return Err(Error::InvalidMap(format!(
                "{} cells for a {width}x{height} raster",
                cells.len()
            )));
        }
        Ok(GridMap {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> WorldPoint {
        self.origin
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// World extent as `(min, max)` corners.
    pub fn bounds(&self) -> (WorldPoint, WorldPoint) {
        (
            self.origin,
            WorldPoint::new(
                self.origin.x + self.width as f64 * self.resolution,
                self.origin.y + self.height as f64 * self.resolution,
            ),
        )
    }

    /// Same geometry, every cell free.
    pub fn blank_like(&self) -> GridMap {
        GridMap {
            cells: vec![false; self.cells.len()],
            ..self.clone()
        }
    }

    pub fn same_geometry(&self, other: &GridMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.resolution == other.resolution
            && self.origin == other.origin
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.iy * self.width + cell.ix
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn blocked(&self, cell: Cell) -> bool {
        self.cells[self.index(cell)]
    }

    pub fn set_blocked(&mut self, cell: Cell, blocked: bool) {
        let i = self.index(cell);
        self.cells[i] = blocked;
    }

    /// Blocks every cell whose center lies inside the axis-aligned rectangle.
    pub fn block_rect(&mut self, min: WorldPoint, max: WorldPoint) {
        for i in 0..self.cells.len() {
            let c = self.cell_center(self.cell_at(i));
            if c.x >= min.x && c.x <= max.x && c.y >= min.y && c.y <= max.y {
                self.cells[i] = true;
            }
        }
    }

    fn grid_coords(&self, p: WorldPoint) -> (f64, f64) {
        (
            (p.x - self.origin.x) / self.resolution,
            (p.y - self.origin.y) / self.resolution,
        )
    }

    fn cell_from_grid(&self, gx: f64, gy: f64) -> Option<Cell> {
        let fx = gx.floor();
        let fy = gy.floor();
        if !(fx >= 0.0 && fy >= 0.0) || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some(Cell::new(fx as usize, fy as usize))
    }

    /// Floor quantization of `(p - origin) / resolution`; `None` is out of bounds.
    pub fn world_to_cell(&self, p: WorldPoint) -> Option<Cell> {
        let (gx, gy) = self.grid_coords(p);
        self.cell_from_grid(gx, gy)
    }

    pub fn cell_center(&self, cell: Cell) -> WorldPoint {
        WorldPoint::new(
            self.origin.x + (cell.ix as f64 + 0.5) * self.resolution,
            self.origin.y + (cell.iy as f64 + 0.5) * self.resolution,
        )
    }

    /// Out-of-bounds counts as blocked.
    pub fn point_free(&self, p: WorldPoint) -> bool {
        self.world_to_cell(p).is_some_and(|c| !self.blocked(c))
    }

    pub fn free_cells(&self) -> Vec<Cell> {
        (0..self.cells.len())
            .filter(|&i| !self.cells[i])
            .map(|i| self.cell_at(i))
            .collect()
    }

    /// Every cell the closed segment `a -> b` touches, in traversal order.
    ///
    /// When the segment crosses a cell corner exactly, both side cells are
    /// included. Returns `None` if any part of the segment leaves the map.
    pub fn supercover(&self, a: WorldPoint, b: WorldPoint) -> Option<Vec<Cell>> {
        let (ax, ay) = self.grid_coords(a);
        let (bx, by) = self.grid_coords(b);
        let start = self.cell_from_grid(ax, ay)?;
        let end = self.cell_from_grid(bx, by)?;
        let mut out = vec![start];
        if start == end {
            return Some(out);
        }

        let dx = bx - ax;
        let dy = by - ay;
        let step_x: i64 = if dx > 0.0 { 1 } else if dx < 0.0 { -1 } else { 0 };
        let step_y: i64 = if dy > 0.0 { 1 } else if dy < 0.0 { -1 } else { 0 };
        let mut ix = start.ix as i64;
        let mut iy = start.iy as i64;

        // Parameter t in [0, 1] at which the next vertical / horizontal grid
        // line is crossed, recomputed from the line index to avoid drift.
        let next_boundary = |i: i64, step: i64| if step > 0 { i + 1 } else { i };
        let t_at_x = |ix: i64| {
            if step_x == 0 {
                f64::INFINITY
            } else {
                (next_boundary(ix, step_x) as f64 - ax) / dx
            }
        };
        let t_at_y = |iy: i64| {
            if step_y == 0 {
                f64::INFINITY
            } else {
                (next_boundary(iy, step_y) as f64 - ay) / dy
            }
        };

        let (ex, ey) = (end.ix as i64, end.iy as i64);
        let max_steps = (ex - ix).unsigned_abs() + (ey - iy).unsigned_abs() + 2;
        let w = self.width as i64;
        let h = self.height as i64;
        let in_bounds = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h;

        for _ in 0..max_steps {
            let t_max_x = t_at_x(ix);
            let t_max_y = t_at_y(iy);
            if (ix, iy) == (ex, ey) || t_max_x.min(t_max_y) > 1.0 {
                break;
            }
            if t_max_x < t_max_y {
                ix += step_x;
            } else if t_max_y < t_max_x {
                iy += step_y;
            } else {
                // exact corner crossing
                for (cx, cy) in [(ix + step_x, iy), (ix, iy + step_y)] {
                    if !in_bounds(cx, cy) {
                        return None;
                    }
                    out.push(Cell::new(cx as usize, cy as usize));
                }
                ix += step_x;
                iy += step_y;
            }
            if !in_bounds(ix, iy) {
                return None;
            }
            out.push(Cell::new(ix as usize, iy as usize));
        }
        if out.last() != Some(&end) {
            out.push(end);
        }
        Some(out)
    }

    /// True iff every cell touched by the segment is in bounds and free.
    pub fn segment_free(&self, a: WorldPoint, b: WorldPoint) -> bool {
        // canonical endpoint order makes the predicate symmetric even on
        // grid-line ties
        let (a, b) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
        match self.supercover(a, b) {
            Some(cells) => cells.iter().all(|&c| !self.blocked(c)),
            None => false,
        }
    }

    /// Writes an ASCII PGM (`P2`): 0 = blocked, 255 = free. The top image row
    /// is the highest `iy`.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::with_capacity(self.cells.len() * 4 + 64);
        s.push_str("P2\n");
        let _ = writeln!(
            s,
            "# resolution={} origin={} {}",
            self.resolution, self.origin.x, self.origin.y
        );
        let _ = writeln!(s, "{} {}", self.width, self.height);
        s.push_str("255\n");
        for iy in (0..self.height).rev() {
            for ix in 0..self.width {
                if ix > 0 {
                    s.push(' ');
                }
                s.push_str(if self.blocked(Cell::new(ix, iy)) { "0" } else { "255" });
            }
            s.push('\n');
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn to_pgm_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_pgm(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("PGM output is ASCII")
    }

    pub fn read_pgm<R: Read>(r: R) -> Result<GridMap> {
        let reader = BufReader::new(r);
        let mut resolution = None;
        let mut origin = None;
        let mut tokens: Vec<String> = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                parse_pgm_comment(comment, &mut resolution, &mut origin)?;
                continue;
            }
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        let mut next = |what: &str| {
            it.next()
                .ok_or_else(|| Error::Parse(format!("PGM: missing {what}")))
        };
        let magic = next("magic")?;
        if magic != "P2" {
            return Err(Error::Parse(format!("PGM: expected P2, found {magic}")));
        }
        let parse_usize = |s: String, what: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("PGM: bad {what} `{s}`")))
        };
        let width = parse_usize(next("width")?, "width")?;
        let height = parse_usize(next("height")?, "height")?;
        let maxval = parse_usize(next("maxval")?, "maxval")?;
        if maxval == 0 {
            return Err(Error::Parse("PGM: maxval 0".into()));
        }
        let mut cells = vec![false; width * height];
        for row in 0..height {
            let iy = height - 1 - row;
            for ix in 0..width {
                let v = parse_usize(next("pixel")?, "pixel")?;
                // dark pixels are blocked
                cells[iy * width + ix] = v * 2 < maxval;
            }
        }
        let resolution = resolution
            .ok_or_else(|| Error::Parse("PGM: missing `# resolution=` comment".into()))?;
        let origin = origin.unwrap_or(WorldPoint::new(0.0, 0.0));
        GridMap::from_cells(width, height, resolution, origin, cells)
    }
}

fn parse_pgm_comment(
    comment: &str,
    resolution: &mut Option<f64>,
    origin: &mut Option<WorldPoint>,
) -> Result<()> {
    let mut words = comment.split_whitespace().peekable();
    while let Some(word) = words.next() {
        if let Some(v) = word.strip_prefix("resolution=") {
            *resolution = Some(parse_f64(v)?);
        } else if let Some(v) = word.strip_prefix("origin=") {
            let x = parse_f64(v)?;
            let y = words
                .next()
                .ok_or_else(|| Error::Parse("PGM: origin needs two values".into()))
                .and_then(parse_f64)?;
            *origin = Some(WorldPoint::new(x, y));
        }
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_map(w: usize, h: usize) -> GridMap {
        GridMap::new(w, h, 1.0, WorldPoint::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn world_to_cell_quantizes_with_floor() {
        let m = unit_map(10, 10);
        assert_eq!(m.world_to_cell(WorldPoint::new(2.4, 3.7)), Some(Cell::new(2, 3)));
        assert_eq!(m.world_to_cell(WorldPoint::new(-0.1, 0.0)), None);
        assert_eq!(m.world_to_cell(WorldPoint::new(10.0, 5.0)), None);

        let shifted = GridMap::new(40, 40, 0.5, WorldPoint::new(-5.0, -5.0)).unwrap();
        assert_eq!(shifted.world_to_cell(WorldPoint::new(0.0, 0.0)), Some(Cell::new(10, 10)));
    }

    #[test]
    fn rejects_invalid_geometry() {
        assert!(GridMap::new(0, 3, 1.0, WorldPoint::new(0.0, 0.0)).is_err());
        assert!(GridMap::new(3, 3, 0.0, WorldPoint::new(0.0, 0.0)).is_err());
        assert!(GridMap::new(3, 3, -1.0, WorldPoint::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn segment_checks() {
        let free = unit_map(10, 10);
        assert!(free.segment_free(WorldPoint::new(0.5, 0.5), WorldPoint::new(9.5, 9.2)));

        let mut m = unit_map(10, 10);
        m.set_blocked(Cell::new(3, 3), true);
        let p = WorldPoint::new(3.5, 3.5);
        assert!(!m.segment_free(p, p));

        let mut wall = unit_map(10, 10);
        for iy in 0..10 {
            wall.set_blocked(Cell::new(5, iy), true);
        }
        assert!(!wall.segment_free(WorldPoint::new(1.0, 1.0), WorldPoint::new(8.0, 1.0)));
        assert!(wall.segment_free(WorldPoint::new(1.0, 1.0), WorldPoint::new(4.9, 8.0)));
    }

    #[test]
    fn segment_leaving_the_map_is_not_free() {
        let m = unit_map(5, 5);
        assert!(!m.segment_free(WorldPoint::new(1.0, 1.0), WorldPoint::new(6.0, 1.0)));
    }

    #[test]
    fn diagonal_through_corner_touches_both_side_cells() {
        let mut m = unit_map(4, 4);
        // (0.5,0.5) -> (2.5,2.5) crosses the corners (1,1) and (2,2) exactly
        m.set_blocked(Cell::new(1, 0), true);
        assert!(!m.segment_free(WorldPoint::new(0.5, 0.5), WorldPoint::new(2.5, 2.5)));
        let cells = unit_map(4, 4)
            .supercover(WorldPoint::new(0.5, 0.5), WorldPoint::new(2.5, 2.5))
            .unwrap();
        assert!(cells.contains(&Cell::new(1, 0)));
        assert!(cells.contains(&Cell::new(0, 1)));
        assert!(cells.contains(&Cell::new(2, 2)));
    }

    #[test]
    fn supercover_matches_hand_enumeration() {
        let m = unit_map(10, 10);
        let cells = m
            .supercover(WorldPoint::new(0.5, 0.5), WorldPoint::new(3.5, 1.5))
            .unwrap();
        // slope 1/3 from (0.5,0.5): crosses y=1 at x=2.0, exactly on a corner
        assert_eq!(
            cells,
            vec![
                Cell::new(0, 0),
                Cell::new(1, 0),
                Cell::new(2, 0),
                Cell::new(1, 1),
                Cell::new(2, 1),
                Cell::new(3, 1),
            ]
        );
    }

    #[test]
    fn pgm_round_trip_is_bit_exact() {
        let mut m = GridMap::new(7, 4, 0.25, WorldPoint::new(-1.5, 2.125)).unwrap();
        m.set_blocked(Cell::new(0, 0), true);
        m.set_blocked(Cell::new(6, 3), true);
        m.set_blocked(Cell::new(2, 1), true);
        let text = m.to_pgm_string();
        assert!(text.starts_with("P2\n# resolution=0.25 origin=-1.5 2.125\n7 4\n255\n"));
        let back = GridMap::read_pgm(text.as_bytes()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_pgm_string(), text);
    }

    #[test]
    fn pgm_requires_resolution() {
        let err = GridMap::read_pgm("P2\n2 1\n255\n0 255\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }
}
