//! Planar geometry: vectors, segments, convex polygons, oriented
//! rectangles, ray casting, and disc-overlap tests.

/// 2D point or direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        self.sub(o).norm()
    }

    /// Rotates by `theta` around the origin.
    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }
}

/// Convex polygon, vertices in counter-clockwise order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    pub verts: Vec<Vec2>,
}

impl ConvexPolygon {
    pub fn new(verts: Vec<Vec2>) -> Self {
        debug_assert!(verts.len() >= 3);
        Self { verts }
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.verts.len();
        (0..n).map(move |i| Segment::new(self.verts[i], self.verts[(i + 1) % n]))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.edges().all(|e| e.b.sub(e.a).cross(p.sub(e.a)) >= 0.0)
    }
}

/// Axis-aligned rectangle used for world bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        debug_assert!(min.x < max.x && min.y < max.y);
        Self { min, max }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Distance t ≥ 0 along ray `origin + t·dir` (dir unit length) to the
/// segment, if they intersect.
pub fn ray_segment(origin: Vec2, dir: Vec2, seg: &Segment) -> Option<f64> {
    let e = seg.b.sub(seg.a);
    let denom = dir.cross(e);
    if denom.abs() < 1e-12 {
        return None; // parallel; grazing contact contributes nothing
    }
    let rel = seg.a.sub(origin);
    let t = rel.cross(e) / denom;
    let s = rel.cross(dir) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&s) {
        Some(t)
    } else {
        None
    }
}

/// Nearest non-negative ray parameter hitting the circle boundary.
pub fn ray_circle(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let oc = origin.sub(center);
    let b = oc.dot(dir);
    let c = oc.dot(oc) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t1 = -b - sq;
    if t1 >= 0.0 {
        return Some(t1);
    }
    let t2 = -b + sq;
    if t2 >= 0.0 {
        return Some(t2); // origin inside the circle
    }
    None
}

pub fn dist_point_segment(p: Vec2, seg: &Segment) -> f64 {
    let e = seg.b.sub(seg.a);
    let len_sq = e.dot(e);
    if len_sq < 1e-24 {
        return p.dist(seg.a);
    }
    let t = (p.sub(seg.a).dot(e) / len_sq).clamp(0.0, 1.0);
    p.dist(seg.a.add(e.scale(t)))
}

pub fn disc_overlaps_segment(center: Vec2, radius: f64, seg: &Segment) -> bool {
    dist_point_segment(center, seg) < radius
}

pub fn disc_overlaps_circle(center: Vec2, radius: f64, c: Vec2, r: f64) -> bool {
    center.dist(c) < radius + r
}

pub fn disc_overlaps_polygon(center: Vec2, radius: f64, poly: &ConvexPolygon) -> bool {
    poly.contains(center) || poly.edges().any(|e| disc_overlaps_segment(center, radius, &e))
}

/// Corners of a rectangle centered at `center`, rotated by `heading`,
/// with half-extents (hw, hh), in counter-clockwise order.
pub fn rect_corners(center: Vec2, heading: f64, hw: f64, hh: f64) -> [Vec2; 4] {
    let local = [
        Vec2::new(hw, hh),
        Vec2::new(-hw, hh),
        Vec2::new(-hw, -hh),
        Vec2::new(hw, -hh),
    ];
    local.map(|p| p.rotate(heading).add(center))
}

pub fn point_in_rect(p: Vec2, center: Vec2, heading: f64, hw: f64, hh: f64) -> bool {
    let local = p.sub(center).rotate(-heading);
    local.x.abs() <= hw && local.y.abs() <= hh
}

pub fn disc_overlaps_rect(center: Vec2, radius: f64, rc: Vec2, heading: f64, hw: f64, hh: f64) -> bool {
    // closest point on the box to the disc center, in box frame
    let local = center.sub(rc).rotate(-heading);
    let clamped = Vec2::new(local.x.clamp(-hw, hw), local.y.clamp(-hh, hh));
    local.dist(clamped) < radius
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_hits_perpendicular_wall() {
        let seg = Segment::new(Vec2::new(2.0, -1.0), Vec2::new(2.0, 1.0));
        let t = ray_segment(Vec2::ZERO, Vec2::new(1.0, 0.0), &seg).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert!(ray_segment(Vec2::ZERO, Vec2::new(-1.0, 0.0), &seg).is_none());
        // ray passes above the segment end
        assert!(ray_segment(Vec2::new(0.0, 1.5), Vec2::new(1.0, 0.0), &seg).is_none());
    }

    #[test]
    fn ray_circle_cases() {
        let c = Vec2::new(3.0, 0.0);
        let t = ray_circle(Vec2::ZERO, Vec2::new(1.0, 0.0), c, 1.0).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert!(ray_circle(Vec2::ZERO, Vec2::new(0.0, 1.0), c, 1.0).is_none());
        // from inside: first boundary ahead
        let t = ray_circle(c, Vec2::new(1.0, 0.0), c, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_containment_and_overlap() {
        let tri = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 2.0),
        ]);
        assert!(tri.contains(Vec2::new(1.0, 0.5)));
        assert!(!tri.contains(Vec2::new(2.0, 2.0)));
        // (0, 0.5) sits 0.5/√5 ≈ 0.224 from the left edge
        assert!(disc_overlaps_polygon(Vec2::new(0.0, 0.5), 0.3, &tri));
        assert!(!disc_overlaps_polygon(Vec2::new(-1.0, 0.5), 0.3, &tri));
    }

    #[test]
    fn rect_overlap_and_rotation() {
        let rc = Vec2::new(1.0, 1.0);
        let heading = std::f64::consts::FRAC_PI_4;
        assert!(point_in_rect(rc, rc, heading, 0.5, 0.2));
        // along the rotated long axis
        let tip = Vec2::new(1.0 + 0.45 * heading.cos(), 1.0 + 0.45 * heading.sin());
        assert!(point_in_rect(tip, rc, heading, 0.5, 0.2));
        assert!(!point_in_rect(Vec2::new(1.45, 1.0), rc, heading, 0.5, 0.2));
        // (1.7, 1.7) lies 0.7√2 − 0.5 ≈ 0.49 beyond the near short face
        assert!(disc_overlaps_rect(Vec2::new(1.7, 1.7), 0.6, rc, heading, 0.5, 0.2));
        assert!(!disc_overlaps_rect(Vec2::new(2.0, 2.0), 0.6, rc, heading, 0.5, 0.2));
    }

    #[test]
    fn segment_distance() {
        let seg = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0));
        assert!((dist_point_segment(Vec2::new(2.0, 3.0), &seg) - 3.0).abs() < 1e-12);
        assert!((dist_point_segment(Vec2::new(-3.0, 4.0), &seg) - 5.0).abs() < 1e-12);
    }
}
