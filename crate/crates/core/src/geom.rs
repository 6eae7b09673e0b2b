//! Vectors, rotations and poses.
//!
//! Conventions: right-handed, +Z up, the zero orientation faces +Y. Orientations
//! are built from intrinsic yaw (about Z), then pitch (about the rotated X), then
//! roll (about the twice-rotated Y). Positive yaw turns the forward vector from
//! +Y toward -X, positive pitch raises it toward +Z and positive roll tilts the
//! body's top toward its +X side.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3 { x, y, z }
}

impl Vec3 {
    pub const ZERO: Vec3 = vec3(0.0, 0.0, 0.0);
    pub const X: Vec3 = vec3(1.0, 0.0, 0.0);
    pub const Y: Vec3 = vec3(0.0, 1.0, 0.0);
    pub const Z: Vec3 = vec3(0.0, 0.0, 1.0);

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        vec3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Unit vector in the same direction; the zero vector is returned unchanged.
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self / n
        }
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn component_mul(self, o: Vec3) -> Vec3 {
        vec3(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        vec3(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        vec3(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Vec3 {
        vec3(a[0], a[1], a[2])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        vec3(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        vec3(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        vec3(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        vec3(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        vec3(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// A proper rotation stored as a row-major orthonormal matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    m: [[f64; 3]; 3],
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation::IDENTITY
    }
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn from_matrix(m: [[f64; 3]; 3]) -> Orientation {
        Orientation { m }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    /// Intrinsic Z-X-Y rotation: `Rz(yaw) * Rx(pitch) * Ry(roll)`.
    pub fn from_euler(yaw: f64, pitch: f64, roll: f64) -> Orientation {
        let (sy, cy) = yaw.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let (sr, cr) = roll.sin_cos();
        Orientation {
            m: [
                [cy * cr - sy * sp * sr, -sy * cp, cy * sr + sy * sp * cr],
                [sy * cr + cy * sp * sr, cy * cp, sy * sr - cy * sp * cr],
                [-cp * sr, sp, cp * cr],
            ],
        }
    }

    pub fn about_z(angle: f64) -> Orientation {
        Orientation::from_euler(angle, 0.0, 0.0)
    }

    /// Rotation by `angle` radians about the unit `axis` (Rodrigues).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Orientation {
        let a = axis.normalized();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Orientation {
            m: [
                [t * a.x * a.x + c, t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y],
                [t * a.x * a.y + s * a.z, t * a.y * a.y + c, t * a.y * a.z - s * a.x],
                [t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c],
            ],
        }
    }

    /// Shortest-arc rotation carrying `from` onto `to` (both nonzero).
    pub fn aligning(from: Vec3, to: Vec3) -> Orientation {
        let f = from.normalized();
        let t = to.normalized();
        let c = f.dot(t);
        let axis = f.cross(t);
        let s = axis.norm();
        if s < 1e-15 {
            if c > 0.0 {
                return Orientation::IDENTITY;
            }
            // Antiparallel: any perpendicular axis works; pick one deterministically.
            let helper = if f.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
            return Orientation::from_axis_angle(f.cross(helper), PI);
        }
        Orientation::from_axis_angle(axis / s, s.atan2(c))
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        vec3(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Applies the inverse rotation (global to local).
    pub fn apply_inverse(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        vec3(
            m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Orientation {
        let m = &self.m;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[j][i];
            }
        }
        Orientation { m: t }
    }

    pub fn inverse(&self) -> Orientation {
        self.transpose()
    }

    /// `self * local`: applies `local` inside the frame given by `self`.
    pub fn compose(&self, local: &Orientation) -> Orientation {
        let a = &self.m;
        let b = &local.m;
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Orientation { m }
    }

    pub fn forward(&self) -> Vec3 {
        self.apply(Vec3::Y)
    }

    pub fn up(&self) -> Vec3 {
        self.apply(Vec3::Z)
    }

    pub fn right(&self) -> Vec3 {
        self.apply(Vec3::X)
    }

    /// Reads back (yaw, pitch, roll). Yaw and roll are in (-pi, pi], pitch in
    /// [-pi/2, pi/2]. At gimbal lock the roll is folded into yaw and reported as 0.
    pub fn euler_angles(&self) -> (f64, f64, f64) {
        let m = &self.m;
        let sp = m[2][1].clamp(-1.0, 1.0);
        let pitch = sp.asin();
        let cp = (m[2][0] * m[2][0] + m[2][2] * m[2][2]).sqrt();
        if cp < 1e-12 {
            let yaw = m[1][0].atan2(m[0][0]);
            let pitch = if sp > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
            return (normalize_angle(yaw), pitch, 0.0);
        }
        let yaw = (-m[0][1]).atan2(m[1][1]);
        let roll = (-m[2][0]).atan2(m[2][2]);
        (normalize_angle(yaw), pitch, normalize_angle(roll))
    }

    pub fn yaw(&self) -> f64 {
        self.euler_angles().0
    }

    pub fn pitch(&self) -> f64 {
        self.euler_angles().1
    }

    pub fn roll(&self) -> f64 {
        self.euler_angles().2
    }

    /// Largest absolute entry of `R * R^T - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.compose(&self.transpose()).m;
        let mut worst: f64 = 0.0;
        for (i, row) in p.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - expect).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Orientation) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        worst
    }
}

/// Maps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("direction toward target is degenerate (target directly above or below, or coincident)")]
    DegenerateDirection,
}

/// Yaw and pitch that point the forward (+Y) axis from `from` toward `to`.
/// Errors when the horizontal projection of the direction vanishes, since yaw is
/// then undefined.
pub fn angles_toward(from: Vec3, to: Vec3) -> Result<(f64, f64), GeomError> {
    let d = to - from;
    let horizontal = (d.x * d.x + d.y * d.y).sqrt();
    if horizontal == 0.0 {
        return Err(GeomError::DegenerateDirection);
    }
    Ok(((-d.x).atan2(d.y), d.z.atan2(horizontal)))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Orientation,
}

impl Pose {
    pub fn new(position: Vec3, orientation: Orientation) -> Pose {
        Pose {
            position,
            orientation,
        }
    }

    /// Maps a point from this pose's local frame to the global frame.
    pub fn transform_point(&self, local: Vec3) -> Vec3 {
        self.position + self.orientation.apply(local)
    }

    pub fn inverse_transform_point(&self, global: Vec3) -> Vec3 {
        self.orientation.apply_inverse(global - self.position)
    }
}
