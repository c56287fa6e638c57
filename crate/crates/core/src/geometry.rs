//! Planar primitives for rotated text-line boxes.
//!
//! Coordinates are image coordinates: x grows right, y grows down, so
//! "below" means larger y. Angles are radians, counter-clockwise in the
//! coordinate algebra, normalized to `(-pi, pi]`.

use thiserror::Error;

/// Resultant-vector magnitudes below this are treated as "no mean
/// direction" by [`circular_mean`].
pub const RESULTANT_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("circular mean of an empty angle list is undefined")]
    EmptyAngleList,
    #[error("bounding box of an empty point set is undefined")]
    EmptyPointSet,
}

/// Normalize an angle to `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Rotate about the origin by `theta` radians.
    pub fn rotated(self, theta: f64) -> Point {
        let (sin, cos) = theta.sin_cos();
        Point {
            x: self.x * cos - self.y * sin,
            y: self.x * sin + self.y * cos,
        }
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// A rectangle with center `(cx, cy)`, extents `w` x `h`, rotated by
/// `angle` radians about its own center. `w` and `h` must be
/// non-negative and all fields finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub angle: f64,
}

impl RotatedBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, angle: f64) -> Self {
        debug_assert!(w >= 0.0 && h >= 0.0, "box extents must be non-negative");
        RotatedBox {
            cx,
            cy,
            w,
            h,
            angle: normalize_angle(angle),
        }
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// The four corners in a fixed winding: top-left first in the box's
    /// own frame (y down), then top-right, bottom-right, bottom-left.
    pub fn corners(&self) -> [Point; 4] {
        let (sin, cos) = self.angle.sin_cos();
        let hw = self.w / 2.0;
        let hh = self.h / 2.0;
        let local = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)];
        local.map(|(x, y)| Point {
            x: x * cos - y * sin + self.cx,
            y: x * sin + y * cos + self.cy,
        })
    }

    /// Rigidly rotate the box about the origin: the center moves, the
    /// extents are unchanged, and the angle advances by `theta`.
    pub fn rotate_about_origin(&self, theta: f64) -> RotatedBox {
        let c = self.center().rotated(theta);
        RotatedBox::new(c.x, c.y, self.w, self.h, self.angle + theta)
    }

    /// Tightest axis-aligned box containing all four corners.
    pub fn aabb(&self) -> AABox {
        AABox::from_points(&self.corners()).expect("a box always has corners")
    }

    /// Whether `p` lies inside the rectangle (boundary included).
    pub fn contains_point(&self, p: Point) -> bool {
        let (sin, cos) = self.angle.sin_cos();
        let dx = p.x - self.cx;
        let dy = p.y - self.cy;
        // Inverse rotation into the box frame.
        let lx = dx * cos + dy * sin;
        let ly = -dx * sin + dy * cos;
        lx.abs() <= self.w / 2.0 && ly.abs() <= self.h / 2.0
    }
}

/// Axis-aligned box; `x_min <= x_max` and `y_min <= y_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AABox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl AABox {
    pub fn from_points(points: &[Point]) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyPointSet);
        }
        let mut b = AABox {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for p in points {
            b.x_min = b.x_min.min(p.x);
            b.x_max = b.x_max.max(p.x);
            b.y_min = b.y_min.min(p.y);
            b.y_max = b.y_max.max(p.y);
        }
        Ok(b)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn x_center(&self) -> f64 {
        (self.x_min + self.x_max) / 2.0
    }

    pub fn y_center(&self) -> f64 {
        (self.y_min + self.y_max) / 2.0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn union(&self, other: &AABox) -> AABox {
        AABox {
            x_min: self.x_min.min(other.x_min),
            x_max: self.x_max.max(other.x_max),
            y_min: self.y_min.min(other.y_min),
            y_max: self.y_max.max(other.y_max),
        }
    }
}

/// Length of the overlap of two boxes' projections onto an axis,
/// clamped at zero. Touching intervals overlap by exactly 0; callers
/// that need "overlaps" must test `> 0`.
pub fn axis_overlap(a: &AABox, b: &AABox, axis: Axis) -> f64 {
    let (a_lo, a_hi, b_lo, b_hi) = match axis {
        Axis::X => (a.x_min, a.x_max, b.x_min, b.x_max),
        Axis::Y => (a.y_min, a.y_max, b.y_min, b.y_max),
    };
    (a_hi.min(b_hi) - a_lo.max(b_lo)).max(0.0)
}

/// Mean direction of a set of angles: `atan2(sum sin, sum cos)`.
///
/// Antipodal inputs can cancel; when the resultant vector is shorter
/// than [`RESULTANT_EPS`] the mean is defined as 0.
pub fn circular_mean(angles: &[f64]) -> Result<f64, GeometryError> {
    if angles.is_empty() {
        return Err(GeometryError::EmptyAngleList);
    }
    let mut sin_sum = 0.0;
    let mut cos_sum = 0.0;
    for a in angles {
        sin_sum += a.sin();
        cos_sum += a.cos();
    }
    if sin_sum.hypot(cos_sum) < RESULTANT_EPS {
        return Ok(0.0);
    }
    Ok(normalize_angle(sin_sum.atan2(cos_sum)))
}

/// Smallest box at the given angle containing all `points`: rotate the
/// points by `-angle`, take the axis-aligned box, rotate it back.
pub fn min_containing_box(points: &[Point], angle: f64) -> Result<RotatedBox, GeometryError> {
    let rotated: Vec<Point> = points.iter().map(|p| p.rotated(-angle)).collect();
    let bb = AABox::from_points(&rotated)?;
    let center = Point::new(bb.x_center(), bb.y_center()).rotated(angle);
    Ok(RotatedBox::new(
        center.x,
        center.y,
        bb.width(),
        bb.height(),
        angle,
    ))
}

/// Signed shoelace area; positive for the winding produced by
/// [`RotatedBox::corners`].
fn polygon_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        sum += a.x * b.y - b.x * a.y;
    }
    sum / 2.0
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn line_intersection(a: Point, b: Point, p: Point, q: Point) -> Point {
    let a1 = b.y - a.y;
    let b1 = a.x - b.x;
    let c1 = a1 * a.x + b1 * a.y;
    let a2 = q.y - p.y;
    let b2 = p.x - q.x;
    let c2 = a2 * p.x + b2 * p.y;
    let det = a1 * b2 - a2 * b1;
    Point {
        x: (b2 * c1 - b1 * c2) / det,
        y: (a1 * c2 - a2 * c1) / det,
    }
}

/// Clip a convex polygon against another convex polygon
/// (Sutherland-Hodgman); both wound as [`RotatedBox::corners`] winds.
fn convex_clip(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let cur_in = cross(a, b, cur) >= 0.0;
            let prev_in = cross(a, b, prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(a, b, prev, cur));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(a, b, prev, cur));
            }
        }
    }
    output
}

/// Area of the intersection of two rotated rectangles.
pub fn intersection_area(a: &RotatedBox, b: &RotatedBox) -> f64 {
    if a.area() == 0.0 || b.area() == 0.0 {
        return 0.0;
    }
    let clipped = convex_clip(&a.corners(), &b.corners());
    polygon_area(&clipped).abs()
}
