//! Scene description schema: parsing and validation of scene JSON.

use serde::Deserialize;
use simworld::geom::{Aabb, ConvexPolygon, Vec2};

use crate::SceneError;

pub const SCENE_VERSION: u32 = 1;

/// Axis-aligned rectangle written as `{"min": [x, y], "max": [x, y]}`.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Region {
    pub fn to_aabb(self) -> Aabb {
        Aabb::new(
            Vec2::new(self.min[0], self.min[1]),
            Vec2::new(self.max[0], self.max[1]),
        )
    }

    fn corners(&self) -> [Vec2; 4] {
        [
            Vec2::new(self.min[0], self.min[1]),
            Vec2::new(self.max[0], self.min[1]),
            Vec2::new(self.max[0], self.max[1]),
            Vec2::new(self.min[0], self.max[1]),
        ]
    }

    fn is_well_formed(&self) -> bool {
        self.min.iter().chain(self.max.iter()).all(|v| v.is_finite())
            && self.min[0] < self.max[0]
            && self.min[1] < self.max[1]
    }

    fn is_inside(&self, outer: &Region) -> bool {
        self.min[0] >= outer.min[0]
            && self.min[1] >= outer.min[1]
            && self.max[0] <= outer.max[0]
            && self.max[1] <= outer.max[1]
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Circle,
    Rect,
}

/// Randomized population of moving obstacles. Concrete sizes, positions,
/// headings, and speeds are drawn at build time from the given ranges.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DynTemplate {
    pub count: usize,
    /// Obstacle `i` takes shape `shapes[i % shapes.len()]`.
    pub shapes: Vec<ShapeKind>,
    /// Circle radius, or rect half-width, in meters.
    pub size_range: [f64; 2],
    /// Meters per second.
    pub speed_range: [f64; 2],
    /// Heading wander per tick, radians.
    pub wander_std: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub scene_version: u32,
    pub name: String,
    pub bounds: Region,
    /// Line segments, each `[[x1, y1], [x2, y2]]`.
    pub walls: Vec<[[f64; 2]; 2]>,
    /// Convex polygons, any winding order.
    pub static_polygons: Vec<Vec<[f64; 2]>>,
    pub dynamic_obstacles: DynTemplate,
    pub robot_spawn: Region,
    pub goal_region: Region,
    /// Std of Gaussian noise added to lidar observations at eval time.
    pub obs_noise_std: f64,
}

pub fn parse_scene(json: &str) -> Result<SceneSpec, SceneError> {
    let spec: SceneSpec = serde_json::from_str(json).map_err(|e| SceneError::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    validate_scene(&spec)?;
    Ok(spec)
}

/// Converts raw polygon vertices to counter-clockwise order, the winding
/// the collision half-plane tests assume.
pub(crate) fn polygon_ccw(poly: &[[f64; 2]]) -> ConvexPolygon {
    let mut verts: Vec<Vec2> = poly.iter().map(|p| Vec2::new(p[0], p[1])).collect();
    if signed_area(&verts) < 0.0 {
        verts.reverse();
    }
    ConvexPolygon::new(verts)
}

fn signed_area(verts: &[Vec2]) -> f64 {
    let n = verts.len();
    (0..n)
        .map(|i| verts[i].cross(verts[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

pub fn validate_scene(spec: &SceneSpec) -> Result<(), SceneError> {
    let fail = |msg: String| SceneError::Invalid {
        scene: spec.name.clone(),
        msg,
    };

    if spec.scene_version != SCENE_VERSION {
        return Err(fail(format!(
            "unsupported scene_version {} (expected {SCENE_VERSION})",
            spec.scene_version
        )));
    }
    if spec.name.is_empty() {
        return Err(fail("scene name must not be empty".to_string()));
    }
    if !spec.bounds.is_well_formed() {
        return Err(fail("bounds must be finite with min < max".to_string()));
    }

    for (i, w) in spec.walls.iter().enumerate() {
        if !w.iter().flatten().all(|v| v.is_finite()) {
            return Err(fail(format!("wall {i} has a non-finite endpoint")));
        }
        let len = Vec2::new(w[1][0], w[1][1]).dist(Vec2::new(w[0][0], w[0][1]));
        if len < 1e-9 {
            return Err(fail(format!("wall {i} has zero length")));
        }
    }

    for (i, poly) in spec.static_polygons.iter().enumerate() {
        check_polygon(i, poly).map_err(&fail)?;
    }

    let t = &spec.dynamic_obstacles;
    if t.count > MAX_DYNAMIC_OBSTACLES {
        return Err(fail(format!(
            "dynamic obstacle count {} exceeds {MAX_DYNAMIC_OBSTACLES}",
            t.count
        )));
    }
    if t.count > 0 {
        if t.shapes.is_empty() {
            return Err(fail("dynamic_obstacles.shapes must not be empty".to_string()));
        }
        if !(t.size_range[0] > 0.0
            && t.size_range[1] >= t.size_range[0]
            && t.size_range[1].is_finite())
        {
            return Err(fail("size_range must satisfy 0 < lo <= hi".to_string()));
        }
        if !(t.speed_range[0] >= 0.0
            && t.speed_range[1] >= t.speed_range[0]
            && t.speed_range[1].is_finite())
        {
            return Err(fail("speed_range must satisfy 0 <= lo <= hi".to_string()));
        }
        if !(t.wander_std >= 0.0 && t.wander_std.is_finite()) {
            return Err(fail("wander_std must be finite and non-negative".to_string()));
        }
    }

    for (what, region) in [
        ("robot_spawn", &spec.robot_spawn),
        ("goal_region", &spec.goal_region),
    ] {
        if !region.is_well_formed() {
            return Err(fail(format!("{what} must be finite with min < max")));
        }
        if !region.is_inside(&spec.bounds) {
            return Err(fail(format!("{what} extends outside bounds")));
        }
        for (i, poly) in spec.static_polygons.iter().enumerate() {
            // A convex polygon containing all four corners contains the
            // whole rectangle, leaving no free point to sample.
            let ccw = polygon_ccw(poly);
            if region.corners().iter().all(|&c| ccw.contains(c)) {
                return Err(fail(format!("{what} is fully covered by static polygon {i}")));
            }
        }
    }

    if !(spec.obs_noise_std >= 0.0 && spec.obs_noise_std.is_finite()) {
        return Err(fail("obs_noise_std must be finite and non-negative".to_string()));
    }

    Ok(())
}

const MAX_DYNAMIC_OBSTACLES: usize = 64;

fn check_polygon(i: usize, poly: &[[f64; 2]]) -> Result<(), String> {
    if poly.len() < 3 {
        return Err(format!("static polygon {i} has fewer than 3 vertices"));
    }
    if !poly.iter().flatten().all(|v| v.is_finite()) {
        return Err(format!("static polygon {i} has a non-finite vertex"));
    }
    let verts: Vec<Vec2> = poly.iter().map(|p| Vec2::new(p[0], p[1])).collect();
    if signed_area(&verts).abs() < 1e-9 {
        return Err(format!("static polygon {i} is degenerate (zero area)"));
    }
    let ccw = polygon_ccw(poly);
    let n = ccw.verts.len();
    for k in 0..n {
        let a = ccw.verts[k];
        let b = ccw.verts[(k + 1) % n];
        let c = ccw.verts[(k + 2) % n];
        if b.sub(a).norm() < 1e-9 {
            return Err(format!("static polygon {i} repeats a vertex"));
        }
        if b.sub(a).cross(c.sub(b)) < -1e-9 {
            return Err(format!("static polygon {i} is not convex"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{
            "scene_version": 1,
            "name": "t",
            "bounds": {"min": [-5.0, -5.0], "max": [5.0, 5.0]},
            "walls": [[[-5.0, -5.0], [5.0, -5.0]]],
            "static_polygons": [[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]],
            "dynamic_obstacles": {
                "count": 0, "shapes": ["circle"],
                "size_range": [0.2, 0.3], "speed_range": [0.1, 0.2],
                "wander_std": 0.1
            },
            "robot_spawn": {"min": [-4.0, -4.0], "max": [-2.0, -2.0]},
            "goal_region": {"min": [2.0, 2.0], "max": [4.0, 4.0]},
            "obs_noise_std": 0.0
        }"#
        .to_string()
    }

    #[test]
    fn minimal_scene_parses() {
        let spec = parse_scene(&minimal_json()).unwrap();
        assert_eq!(spec.name, "t");
        assert_eq!(spec.static_polygons.len(), 1);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_scene("{\n  \"scene_version\": ").unwrap_err();
        match err {
            SceneError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let json = minimal_json().replacen("\"name\"", "\"extra\": 1, \"name\"", 1);
        assert!(matches!(
            parse_scene(&json),
            Err(SceneError::Parse { .. })
        ));
    }

    #[test]
    fn reflex_polygon_is_rejected() {
        let json = minimal_json().replacen(
            "[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]",
            "[[0.0, 0.0], [2.0, 0.0], [0.2, 0.2], [0.0, 2.0]]",
            1,
        );
        let err = parse_scene(&json).unwrap_err();
        assert!(err.to_string().contains("not convex"), "{err}");
    }

    #[test]
    fn clockwise_polygons_are_normalized() {
        let ccw = polygon_ccw(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
        assert!(signed_area(&ccw.verts) > 0.0);
        assert!(ccw.contains(Vec2::new(0.2, 0.2)));
    }

    #[test]
    fn covered_goal_region_is_rejected() {
        let json = minimal_json().replacen(
            "[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]",
            "[[1.0, 1.0], [5.0, 1.0], [5.0, 5.0], [1.0, 5.0]]",
            1,
        );
        let err = parse_scene(&json).unwrap_err();
        assert!(err.to_string().contains("fully covered"), "{err}");
    }
}
