//! Ray-cast lidar over the world's primitives.

use std::f64::consts::PI;

use crate::geom::{ray_circle, ray_segment, rect_corners, Segment, Vec2};
use crate::kinematics::Pose;
use crate::obstacles::{DynObstacle, ObstacleShape};
use crate::world::StaticGeom;

pub const LIDAR_BEAMS: usize = 180;

/// Beam angles relative to the heading: 180 beams at 1° spacing covering
/// [−90°, +89°], so beam 90 looks straight ahead and beam 150 at +60°.
fn beam_offset(k: usize) -> f64 {
    -PI / 2.0 + k as f64 * (PI / 180.0)
}

/// Ranges in meters for all beams, capped at `max_range`. If the sensor
/// origin sits inside an obstacle every range is 0; the caller must treat
/// that state as a collision.
pub fn cast_lidar(
    statics: &StaticGeom,
    dynamics: &[DynObstacle],
    pose: Pose,
    max_range: f64,
) -> Vec<f64> {
    let origin = pose.position();
    if origin_buried(statics, dynamics, origin) {
        return vec![0.0; LIDAR_BEAMS];
    }

    let mut segments: Vec<Segment> = Vec::with_capacity(statics.walls.len() + 8);
    segments.extend_from_slice(&statics.walls);
    for poly in &statics.polygons {
        segments.extend(poly.edges());
    }
    let mut circles: Vec<(Vec2, f64)> = Vec::new();
    for ob in dynamics {
        match ob.shape {
            ObstacleShape::Circle { radius } => circles.push((ob.pos, radius)),
            ObstacleShape::Rect { half_w, half_h } => {
                let c = rect_corners(ob.pos, ob.heading, half_w, half_h);
                for i in 0..4 {
                    segments.push(Segment::new(c[i], c[(i + 1) % 4]));
                }
            }
        }
    }

    (0..LIDAR_BEAMS)
        .map(|k| {
            let dir = Vec2::from_angle(pose.theta + beam_offset(k));
            let mut best = max_range;
            for seg in &segments {
                if let Some(t) = ray_segment(origin, dir, seg) {
                    if t < best {
                        best = t;
                    }
                }
            }
            for &(c, r) in &circles {
                if let Some(t) = ray_circle(origin, dir, c, r) {
                    if t < best {
                        best = t;
                    }
                }
            }
            best
        })
        .collect()
}

fn origin_buried(statics: &StaticGeom, dynamics: &[DynObstacle], origin: Vec2) -> bool {
    if statics.polygons.iter().any(|p| p.contains(origin)) {
        return true;
    }
    dynamics.iter().any(|ob| match ob.shape {
        ObstacleShape::Circle { radius } => origin.dist(ob.pos) <= radius,
        ObstacleShape::Rect { half_w, half_h } => {
            crate::geom::point_in_rect(origin, ob.pos, ob.heading, half_w, half_h)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Aabb, ConvexPolygon};

    fn open_statics() -> StaticGeom {
        StaticGeom {
            bounds: Aabb::new(Vec2::new(-50.0, -50.0), Vec2::new(50.0, 50.0)),
            walls: vec![],
            polygons: vec![],
        }
    }

    #[test]
    fn empty_world_returns_max_range() {
        let ranges = cast_lidar(&open_statics(), &[], Pose::new(0.0, 0.0, 0.0), 6.0);
        assert_eq!(ranges.len(), LIDAR_BEAMS);
        assert!(ranges.iter().all(|&r| r == 6.0));
    }

    #[test]
    fn perpendicular_wall_matches_trigonometry() {
        let mut statics = open_statics();
        statics.walls.push(Segment::new(
            Vec2::new(2.0, -10.0),
            Vec2::new(2.0, 10.0),
        ));
        let ranges = cast_lidar(&statics, &[], Pose::new(0.0, 0.0, 0.0), 6.0);
        assert!((ranges[90] - 2.0).abs() < 1e-9, "center beam");
        let expected = 2.0 / (PI / 3.0).cos(); // 60° off-center
        assert!((ranges[150] - expected).abs() < 1e-9);
        assert!((ranges[30] - expected).abs() < 1e-9);
        // ±90° beams run parallel to the wall's normal plane
        assert_eq!(ranges[0], 6.0);
    }

    #[test]
    fn circle_obstacle_ahead() {
        let dynamics = [DynObstacle {
            shape: ObstacleShape::Circle { radius: 1.0 },
            pos: Vec2::new(4.0, 0.0),
            heading: 0.0,
            speed: 0.0,
            wander_std: 0.0,
        }];
        let ranges = cast_lidar(&open_statics(), &dynamics, Pose::new(0.0, 0.0, 0.0), 6.0);
        assert!((ranges[90] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn buried_origin_returns_zeros() {
        let mut statics = open_statics();
        statics.polygons.push(ConvexPolygon::new(vec![
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ]));
        let ranges = cast_lidar(&statics, &[], Pose::new(0.0, 0.0, 0.3), 6.0);
        assert!(ranges.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn rotated_sensor_tracks_heading() {
        let mut statics = open_statics();
        statics.walls.push(Segment::new(
            Vec2::new(-10.0, 3.0),
            Vec2::new(10.0, 3.0),
        ));
        // facing +y puts the wall straight ahead of the center beam
        let ranges = cast_lidar(&statics, &[], Pose::new(0.0, 0.0, PI / 2.0), 6.0);
        assert!((ranges[90] - 3.0).abs() < 1e-9);
    }
}
