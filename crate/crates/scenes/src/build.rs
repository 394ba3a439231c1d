//! Scene instantiation. A fixed `(spec, seed)` pair always yields the
//! same world: every random draw flows from one seeded generator in a
//! fixed order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simworld::geom::{
    disc_overlaps_circle, disc_overlaps_polygon, disc_overlaps_segment, Aabb, Segment, Vec2,
};
use simworld::{DynObstacle, ObstacleShape, Pose, SimParams, StaticGeom, World};

use crate::spec::{polygon_ccw, SceneSpec, ShapeKind};
use crate::SceneError;

const PLACE_TRIES: u32 = 1000;
/// Free space required between an obstacle and anything else at placement.
const OBSTACLE_MARGIN: f64 = 0.05;
/// Free space required around the robot spawn beyond its own radius.
const SPAWN_CLEARANCE: f64 = 0.1;
/// Free space required around the goal point.
const GOAL_CLEARANCE: f64 = 0.35;
/// Episodes shorter than this are trivial; reject goal draws closer.
const MIN_START_GOAL_DIST: f64 = 3.0;

pub fn build_scene(spec: &SceneSpec, params: SimParams, seed: u64) -> Result<World, SceneError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let statics = build_statics(spec);
    let dynamics = place_obstacles(spec, &statics, &mut rng)?;
    let robot = place_robot(spec, &statics, &dynamics, &params, &mut rng)?;
    let goal = place_goal(spec, &statics, robot.position(), &mut rng)?;
    let world_seed = rng.random::<u64>();
    Ok(World::new(statics, dynamics, robot, goal, params, world_seed))
}

fn build_statics(spec: &SceneSpec) -> StaticGeom {
    StaticGeom {
        bounds: spec.bounds.to_aabb(),
        walls: spec
            .walls
            .iter()
            .map(|w| {
                Segment::new(Vec2::new(w[0][0], w[0][1]), Vec2::new(w[1][0], w[1][1]))
            })
            .collect(),
        polygons: spec.static_polygons.iter().map(|p| polygon_ccw(p)).collect(),
    }
}

fn clear_of_statics(p: Vec2, radius: f64, statics: &StaticGeom) -> bool {
    statics
        .walls
        .iter()
        .all(|w| !disc_overlaps_segment(p, radius, w))
        && statics
            .polygons
            .iter()
            .all(|poly| !disc_overlaps_polygon(p, radius, poly))
}

fn sample_in(rng: &mut ChaCha8Rng, area: &Aabb) -> Vec2 {
    Vec2::new(
        rng.random_range(area.min.x..=area.max.x),
        rng.random_range(area.min.y..=area.max.y),
    )
}

fn infeasible(spec: &SceneSpec, what: &'static str) -> SceneError {
    SceneError::Infeasible {
        scene: spec.name.clone(),
        what,
        tries: PLACE_TRIES,
    }
}

fn place_obstacles(
    spec: &SceneSpec,
    statics: &StaticGeom,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<DynObstacle>, SceneError> {
    let t = &spec.dynamic_obstacles;
    let mut placed: Vec<DynObstacle> = Vec::with_capacity(t.count);
    for i in 0..t.count {
        let shape = match t.shapes[i % t.shapes.len()] {
            ShapeKind::Circle => ObstacleShape::Circle {
                radius: rng.random_range(t.size_range[0]..=t.size_range[1]),
            },
            ShapeKind::Rect => {
                let half_w = rng.random_range(t.size_range[0]..=t.size_range[1]);
                ObstacleShape::Rect {
                    half_w,
                    half_h: half_w * rng.random_range(0.5..=1.0),
                }
            }
        };
        let br = shape.bounding_radius();
        let inset = br + OBSTACLE_MARGIN;
        let area = Aabb::new(
            Vec2::new(statics.bounds.min.x + inset, statics.bounds.min.y + inset),
            Vec2::new(statics.bounds.max.x - inset, statics.bounds.max.y - inset),
        );
        if area.min.x >= area.max.x || area.min.y >= area.max.y {
            return Err(infeasible(spec, "dynamic obstacle"));
        }
        let pos = (0..PLACE_TRIES)
            .map(|_| sample_in(rng, &area))
            .find(|&p| {
                clear_of_statics(p, br + OBSTACLE_MARGIN, statics)
                    && placed.iter().all(|o| {
                        !disc_overlaps_circle(
                            p,
                            br + OBSTACLE_MARGIN,
                            o.pos,
                            o.shape.bounding_radius(),
                        )
                    })
            })
            .ok_or_else(|| infeasible(spec, "dynamic obstacle"))?;
        placed.push(DynObstacle {
            shape,
            pos,
            heading: rng.random_range(-PI..PI),
            speed: rng.random_range(t.speed_range[0]..=t.speed_range[1]),
            wander_std: t.wander_std,
        });
    }
    Ok(placed)
}

fn place_robot(
    spec: &SceneSpec,
    statics: &StaticGeom,
    dynamics: &[DynObstacle],
    params: &SimParams,
    rng: &mut ChaCha8Rng,
) -> Result<Pose, SceneError> {
    let area = spec.robot_spawn.to_aabb();
    let radius = params.robot_radius + SPAWN_CLEARANCE;
    let pos = (0..PLACE_TRIES)
        .map(|_| sample_in(rng, &area))
        .find(|&p| {
            clear_of_statics(p, radius, statics)
                && dynamics
                    .iter()
                    .all(|o| !disc_overlaps_circle(p, radius, o.pos, o.shape.bounding_radius()))
        })
        .ok_or_else(|| infeasible(spec, "robot spawn"))?;
    Ok(Pose::new(pos.x, pos.y, rng.random_range(-PI..PI)))
}

fn place_goal(
    spec: &SceneSpec,
    statics: &StaticGeom,
    robot: Vec2,
    rng: &mut ChaCha8Rng,
) -> Result<Vec2, SceneError> {
    let area = spec.goal_region.to_aabb();
    (0..PLACE_TRIES)
        .map(|_| sample_in(rng, &area))
        .find(|&p| p.dist(robot) >= MIN_START_GOAL_DIST && clear_of_statics(p, GOAL_CLEARANCE, statics))
        .ok_or_else(|| infeasible(spec, "goal"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_scene;

    fn open_scene() -> SceneSpec {
        parse_scene(
            r#"{
                "scene_version": 1,
                "name": "open",
                "bounds": {"min": [-5.0, -5.0], "max": [5.0, 5.0]},
                "walls": [
                    [[-5.0, -5.0], [5.0, -5.0]], [[5.0, -5.0], [5.0, 5.0]],
                    [[5.0, 5.0], [-5.0, 5.0]], [[-5.0, 5.0], [-5.0, -5.0]]
                ],
                "static_polygons": [],
                "dynamic_obstacles": {
                    "count": 6, "shapes": ["circle", "rect"],
                    "size_range": [0.2, 0.4], "speed_range": [0.1, 0.3],
                    "wander_std": 0.2
                },
                "robot_spawn": {"min": [-4.5, -4.5], "max": [-2.5, -2.5]},
                "goal_region": {"min": [2.5, 2.5], "max": [4.5, 4.5]},
                "obs_noise_std": 0.0
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn same_seed_gives_identical_worlds() {
        let spec = open_scene();
        let a = build_scene(&spec, SimParams::default(), 7).unwrap();
        let b = build_scene(&spec, SimParams::default(), 7).unwrap();
        assert_eq!(a.robot_pose(), b.robot_pose());
        assert_eq!(a.goal(), b.goal());
        assert_eq!(a.dynamics().len(), b.dynamics().len());
        for (x, y) in a.dynamics().iter().zip(b.dynamics()) {
            assert_eq!(x.pos, y.pos);
            assert_eq!(x.heading, y.heading);
            assert_eq!(x.speed, y.speed);
            assert_eq!(x.shape, y.shape);
        }
    }

    #[test]
    fn different_seeds_give_different_layouts() {
        let spec = open_scene();
        let a = build_scene(&spec, SimParams::default(), 1).unwrap();
        let b = build_scene(&spec, SimParams::default(), 2).unwrap();
        assert_ne!(a.robot_pose(), b.robot_pose());
    }

    #[test]
    fn obstacle_count_and_shape_mix_follow_the_template() {
        let spec = open_scene();
        let world = build_scene(&spec, SimParams::default(), 3).unwrap();
        assert_eq!(world.dynamics().len(), 6);
        let circles = world
            .dynamics()
            .iter()
            .filter(|o| matches!(o.shape, ObstacleShape::Circle { .. }))
            .count();
        assert_eq!(circles, 3);
    }

    #[test]
    fn placements_respect_clearances() {
        let spec = open_scene();
        for seed in 0..50 {
            let world = build_scene(&spec, SimParams::default(), seed).unwrap();
            let obs = world.dynamics();
            for (i, a) in obs.iter().enumerate() {
                for b in &obs[i + 1..] {
                    let gap = a.pos.dist(b.pos)
                        - a.shape.bounding_radius()
                        - b.shape.bounding_radius();
                    assert!(gap >= 0.0, "seed {seed}: obstacles overlap by {gap}");
                }
            }
            let robot = world.robot_pose().position();
            assert!(robot.dist(world.goal()) >= MIN_START_GOAL_DIST);
            for o in obs {
                assert!(robot.dist(o.pos) >= 0.2 + o.shape.bounding_radius());
            }
        }
    }

    #[test]
    fn unplaceable_obstacles_report_infeasible() {
        // Two radius-3 circles need 6.05 m of separation, but centers are
        // confined to a box whose diagonal is only 5.52 m.
        let mut spec = open_scene();
        spec.dynamic_obstacles.size_range = [3.0, 3.0];
        spec.dynamic_obstacles.count = 2;
        spec.dynamic_obstacles.shapes = vec![ShapeKind::Circle];
        let err = build_scene(&spec, SimParams::default(), 0).unwrap_err();
        assert!(matches!(err, SceneError::Infeasible { what: "dynamic obstacle", .. }));
    }
}
