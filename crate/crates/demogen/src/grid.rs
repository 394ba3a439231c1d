//! Occupancy-grid rasterization of static scene geometry.

use simworld::geom::{disc_overlaps_polygon, disc_overlaps_segment, Vec2};
use simworld::StaticGeom;

pub const GRID_RES: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct OccupancyGrid {
    origin: Vec2,
    res: f64,
    width: usize,
    height: usize,
    blocked: Vec<bool>,
}

impl OccupancyGrid {
    /// Rasterizes static geometry. A cell is blocked when a disc of
    /// `inflation` radius at its center touches any wall or polygon, so
    /// paths through free cells keep at least that much clearance minus
    /// half a cell diagonal.
    pub fn from_statics(statics: &StaticGeom, res: f64, inflation: f64) -> Self {
        assert!(res > 0.0 && inflation >= 0.0);
        let origin = statics.bounds.min;
        let width = (statics.bounds.width() / res).ceil() as usize;
        let height = (statics.bounds.height() / res).ceil() as usize;
        let mut grid = Self {
            origin,
            res,
            width,
            height,
            blocked: vec![false; width * height],
        };
        for iy in 0..height {
            for ix in 0..width {
                let c = grid.center(ix, iy);
                let hit = statics
                    .walls
                    .iter()
                    .any(|w| disc_overlaps_segment(c, inflation, w))
                    || statics
                        .polygons
                        .iter()
                        .any(|p| disc_overlaps_polygon(c, inflation, p));
                grid.blocked[iy * width + ix] = hit;
            }
        }
        grid
    }

    /// Builds a grid directly from cell data; `blocked` is row-major with
    /// `iy * width + ix` indexing.
    pub fn from_cells(origin: Vec2, res: f64, width: usize, height: usize, blocked: Vec<bool>) -> Self {
        assert_eq!(blocked.len(), width * height);
        Self {
            origin,
            res,
            width,
            height,
            blocked,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn res(&self) -> f64 {
        self.res
    }

    pub fn center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (ix as f64 + 0.5) * self.res,
            self.origin.y + (iy as f64 + 0.5) * self.res,
        )
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin.x) / self.res;
        let fy = (p.y - self.origin.y) / self.res;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx as usize, fy as usize);
        (ix < self.width && iy < self.height).then_some((ix, iy))
    }

    pub fn is_blocked(&self, ix: usize, iy: usize) -> bool {
        self.blocked[iy * self.width + ix]
    }

    pub fn is_free(&self, ix: usize, iy: usize) -> bool {
        !self.is_blocked(ix, iy)
    }

    /// Cell containing `p`, or the nearest free cell within a few rings of
    /// it. Points with physical clearance can still land in a blocked cell
    /// because blocking is judged at cell centers.
    pub fn nearest_free_cell(&self, p: Vec2) -> Option<(usize, usize)> {
        let (cx, cy) = self.cell_of(p)?;
        if self.is_free(cx, cy) {
            return Some((cx, cy));
        }
        for ring in 1..=5i64 {
            let mut best: Option<((usize, usize), f64)> = None;
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let (ix, iy) = (cx as i64 + dx, cy as i64 + dy);
                    if ix < 0 || iy < 0 || ix as usize >= self.width || iy as usize >= self.height
                    {
                        continue;
                    }
                    let cell = (ix as usize, iy as usize);
                    if self.is_free(cell.0, cell.1) {
                        let d = self.center(cell.0, cell.1).dist(p);
                        if best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((cell, d));
                        }
                    }
                }
            }
            if let Some((cell, _)) = best {
                return Some(cell);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use simworld::geom::{Aabb, ConvexPolygon, Segment};

    fn boxed_statics() -> StaticGeom {
        let bounds = Aabb::new(Vec2::new(0.0, 0.0), Vec2::new(4.0, 4.0));
        StaticGeom {
            bounds,
            walls: vec![Segment::new(Vec2::new(0.0, 2.0), Vec2::new(3.0, 2.0))],
            polygons: vec![ConvexPolygon::new(vec![
                Vec2::new(3.0, 3.0),
                Vec2::new(3.6, 3.0),
                Vec2::new(3.6, 3.6),
                Vec2::new(3.0, 3.6),
            ])],
        }
    }

    #[test]
    fn blocking_respects_inflation() {
        let grid = OccupancyGrid::from_statics(&boxed_statics(), 0.1, 0.25);
        assert_eq!(grid.width(), 40);
        assert_eq!(grid.height(), 40);
        // Cell centered at (1.05, 2.05) sits 0.05 from the wall.
        let (ix, iy) = grid.cell_of(Vec2::new(1.05, 2.05)).unwrap();
        assert!(grid.is_blocked(ix, iy));
        // (1.05, 2.35) is 0.35 away: outside the inflation radius.
        let (ix, iy) = grid.cell_of(Vec2::new(1.05, 2.35)).unwrap();
        assert!(grid.is_free(ix, iy));
        // Inside the polygon.
        let (ix, iy) = grid.cell_of(Vec2::new(3.3, 3.3)).unwrap();
        assert!(grid.is_blocked(ix, iy));
    }

    #[test]
    fn nearest_free_cell_escapes_blocked_centers() {
        let grid = OccupancyGrid::from_statics(&boxed_statics(), 0.1, 0.25);
        let p = Vec2::new(1.05, 2.3);
        let (ix, iy) = grid.nearest_free_cell(p).unwrap();
        assert!(grid.is_free(ix, iy));
        assert!(grid.center(ix, iy).dist(p) < 0.3);
    }

    #[test]
    fn points_outside_bounds_have_no_cell() {
        let grid = OccupancyGrid::from_statics(&boxed_statics(), 0.1, 0.25);
        assert_eq!(grid.cell_of(Vec2::new(-0.1, 1.0)), None);
        assert_eq!(grid.cell_of(Vec2::new(1.0, 4.1)), None);
    }
}
