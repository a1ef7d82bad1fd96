//! Small shared geometry helpers: 3-vectors, axis-aligned boxes, gravity basis.

use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    if n == 0.0 {
        a
    } else {
        scale(a, 1.0 / n)
    }
}

pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

pub fn centroid(points: &[Vec3]) -> Vec3 {
    let mut c = [0.0; 3];
    for p in points {
        c = add(c, *p);
    }
    if points.is_empty() {
        c
    } else {
        scale(c, 1.0 / points.len() as f64)
    }
}

/// Axis-aligned box given by min/max corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points(points: &[Vec3]) -> Option<Aabb> {
        let first = *points.first()?;
        let mut b = Aabb {
            min: first,
            max: first,
        };
        for p in &points[1..] {
            b.expand_point(*p);
        }
        Some(b)
    }

    pub fn expand_point(&mut self, p: Vec3) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut b = *self;
        b.expand_point(other.min);
        b.expand_point(other.max);
        b
    }

    pub fn centroid(&self) -> Vec3 {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    pub fn volume(&self) -> f64 {
        let mut v = 1.0;
        for k in 0..3 {
            v *= (self.max[k] - self.min[k]).max(0.0);
        }
        v
    }

    pub fn is_valid(&self) -> bool {
        (0..3).all(|k| self.min[k] <= self.max[k] && self.min[k].is_finite() && self.max[k].is_finite())
    }

    pub fn contains_point(&self, p: Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    /// Box grown by `m` meters on every side.
    pub fn inflate(&self, m: f64) -> Aabb {
        Aabb {
            min: [self.min[0] - m, self.min[1] - m, self.min[2] - m],
            max: [self.max[0] + m, self.max[1] + m, self.max[2] + m],
        }
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|k| other.min[k] >= self.min[k] && other.max[k] <= self.max[k])
    }
}

/// Orthonormal basis whose third axis is `up`; maps scene points into a frame
/// where the gravity direction is +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityBasis {
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

impl GravityBasis {
    pub fn from_up(up: Vec3) -> GravityBasis {
        let z = normalize(up);
        // reference axis least aligned with up, for a deterministic tangent
        let abs = [z[0].abs(), z[1].abs(), z[2].abs()];
        let mut k = 0;
        if abs[1] < abs[k] {
            k = 1;
        }
        if abs[2] < abs[k] {
            k = 2;
        }
        let mut r = [0.0; 3];
        r[k] = 1.0;
        let x = normalize(sub(r, scale(z, dot(r, z))));
        let y = cross(z, x);
        GravityBasis { x, y, z }
    }

    pub fn to_frame(&self, p: Vec3) -> Vec3 {
        [dot(p, self.x), dot(p, self.y), dot(p, self.z)]
    }

    pub fn to_frame_dir(&self, d: Vec3) -> Vec3 {
        self.to_frame(d)
    }
}

/// Round to 6 significant digits; used for canonical serialization.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let e = x.abs().log10().floor() as i32;
    let m = 10f64.powi(5 - e);
    (x * m).round() / m
}
