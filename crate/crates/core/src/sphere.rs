//! Directions, panel orientations and equirectangular quadrature on the unit sphere.
//!
//! Conventions: `+z` is the zenith, azimuth is measured counterclockwise from `+x`
//! (east), so `+y` is north. Polar angles are measured from `+z`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Direction {
    pub const ZENITH: Direction = Direction {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Normalizes `(x, y, z)`. The input must not be the zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        let norm = (x * x + y * y + z * z).sqrt();
        debug_assert!(norm > 0.0, "cannot normalize the zero vector");
        Direction {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        }
    }

    /// From polar angle `theta` (from +z) and azimuth `phi` (from +x), both radians.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Direction {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    /// From zenith and azimuth angles in degrees.
    pub fn from_angles_deg(zenith: f64, azimuth: f64) -> Self {
        Self::from_spherical(zenith.to_radians(), azimuth.to_radians())
    }

    /// Polar angle from +z, radians in `[0, π]`.
    pub fn theta(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }

    /// Azimuth from +x, radians in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        let p = self.y.atan2(self.x);
        if p < 0.0 {
            p + 2.0 * PI
        } else {
            p
        }
    }

    pub fn zenith_deg(&self) -> f64 {
        self.theta().to_degrees()
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.phi().to_degrees()
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Direction) -> [f64; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn neg(&self) -> Direction {
        Direction {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Rotation about the +z axis by `angle` radians.
    pub fn rotate_about_z(&self, angle: f64) -> Direction {
        let (s, c) = angle.sin_cos();
        Direction {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
            z: self.z,
        }
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        ((self.x * self.x + self.y * self.y + self.z * self.z) - 1.0).abs() <= tol
    }
}

/// Angle between two unit vectors in degrees, in `[0, 180]`.
pub fn angle_between(a: &Direction, b: &Direction) -> f64 {
    let c = a.cross(b);
    let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    s.atan2(a.dot(b)).to_degrees()
}

fn combine(a: &Direction, ca: f64, b: &Direction, cb: f64) -> [f64; 3] {
    [
        a.x * ca + b.x * cb,
        a.y * ca + b.y * cb,
        a.z * ca + b.z * cb,
    ]
}

fn unit(v: [f64; 3]) -> Direction {
    Direction::new(v[0], v[1], v[2])
}

/// Tangent axis of a panel frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TangentAxis {
    U,
    V,
}

/// Panel (or detector) orientation: a normal plus a panel-fixed tangent frame.
///
/// `{u, v, normal}` is right-handed: `u × v = normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub normal: Direction,
    pub u: Direction,
    pub v: Direction,
    /// When set, tilts are clamped so that `normal.z >= 0`.
    pub upper_hemisphere: bool,
}

impl Orientation {
    /// Zenith-facing panel with `u = +x`, `v = +y`.
    pub fn zenith() -> Self {
        Orientation {
            normal: Direction::ZENITH,
            u: Direction {
                x: 1.0,
                y: 0.0,
                z: 0.0,
            },
            v: Direction {
                x: 0.0,
                y: 1.0,
                z: 0.0,
            },
            upper_hemisphere: true,
        }
    }

    /// Panel whose normal sits at the given zenith/azimuth (degrees).
    ///
    /// Built by turning the zenith frame about +z by `azimuth`, then tilting toward
    /// `u` by `zenith`, so `u` points down-slope in the meridian plane and `v` is
    /// horizontal.
    pub fn from_angles_deg(zenith: f64, azimuth: f64) -> Self {
        let (st, ct) = zenith.to_radians().sin_cos();
        let (sp, cp) = azimuth.to_radians().sin_cos();
        Orientation {
            normal: Direction {
                x: st * cp,
                y: st * sp,
                z: ct,
            },
            u: Direction {
                x: ct * cp,
                y: ct * sp,
                z: -st,
            },
            v: Direction {
                x: -sp,
                y: cp,
                z: 0.0,
            },
            upper_hemisphere: true,
        }
    }

    /// Orientation with the given normal and a canonical frame.
    pub fn facing(normal: Direction) -> Self {
        let mut o = Orientation::from_angles_deg(normal.zenith_deg(), normal.azimuth_deg());
        o.normal = normal;
        o.upper_hemisphere = normal.z >= 0.0;
        o.reorthonormalize()
    }

    pub fn with_upper_hemisphere(mut self, flag: bool) -> Self {
        self.upper_hemisphere = flag;
        self
    }

    pub fn zenith_deg(&self) -> f64 {
        self.normal.zenith_deg()
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.normal.azimuth_deg()
    }

    /// Whether `{u, v, normal}` is a right-handed orthonormal triad within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let n = &self.normal;
        let c = self.u.cross(&self.v);
        self.u.is_unit(tol)
            && self.v.is_unit(tol)
            && n.is_unit(tol)
            && self.u.dot(&self.v).abs() <= tol
            && self.u.dot(n).abs() <= tol
            && self.v.dot(n).abs() <= tol
            && (c[0] - n.x).abs() <= tol
            && (c[1] - n.y).abs() <= tol
            && (c[2] - n.z).abs() <= tol
    }

    fn reorthonormalize(mut self) -> Self {
        let n = self.normal;
        let d = self.u.dot(&n);
        let mut u = unit([self.u.x - d * n.x, self.u.y - d * n.y, self.u.z - d * n.z]);
        let v = unit(n.cross(&u));
        u = unit(v.cross(&n));
        self.u = u;
        self.v = v;
        self
    }

    /// Rotates the frame about +z by `angle_deg`.
    pub fn rotate_about_z(&self, angle_deg: f64) -> Orientation {
        let a = angle_deg.to_radians();
        Orientation {
            normal: self.normal.rotate_about_z(a),
            u: self.u.rotate_about_z(a),
            v: self.v.rotate_about_z(a),
            upper_hemisphere: self.upper_hemisphere,
        }
    }
}

/// Tilts the normal toward the tangent axis `axis` by `angle_deg`.
///
/// Positive angles move the normal toward `+axis`. With the upper-hemisphere
/// flag set, the tilt stops where the normal reaches the horizon.
pub fn rotate_toward(o: &Orientation, axis: TangentAxis, angle_deg: f64) -> Orientation {
    let alpha = match axis {
        TangentAxis::U => 0.0,
        TangentAxis::V => 90.0,
    };
    tilt_toward(o, alpha, angle_deg)
}

/// Tilts the normal toward the in-plane direction at `tangent_azimuth_deg`
/// (measured from `u` toward `v`) by `angle_deg`.
pub fn tilt_toward(o: &Orientation, tangent_azimuth_deg: f64, angle_deg: f64) -> Orientation {
    if angle_deg == 0.0 {
        return *o;
    }
    let (sa, ca) = tangent_azimuth_deg.to_radians().sin_cos();
    let n = o.normal;
    // t: tilt direction, w: rotation axis (unchanged by the tilt)
    let t = unit(combine(&o.u, ca, &o.v, sa));
    let w = unit(combine(&o.u, -sa, &o.v, ca));

    let mut a = angle_deg.to_radians();
    let mut clamped = false;
    if o.upper_hemisphere {
        // normal.z(a) = A cos a + B sin a = R cos(a - phi)
        let (za, zb) = (n.z.max(0.0), t.z);
        let z_end = za * a.cos() + zb * a.sin();
        if z_end < 0.0 {
            let phi = zb.atan2(za);
            let limit = if a > 0.0 {
                phi + PI / 2.0
            } else {
                phi - PI / 2.0
            };
            if a.abs() > limit.abs() {
                a = limit;
                clamped = true;
            }
        }
    }
    if a == 0.0 {
        return *o;
    }
    let (s, c) = a.sin_cos();
    let mut nn = combine(&n, c, &t, s);
    if o.upper_hemisphere && (clamped || nn[2] < 0.0) {
        nn[2] = 0.0;
    }
    let normal = unit(nn);
    let t2 = combine(&t, c, &n, -s);
    let t2 = Direction {
        x: t2[0],
        y: t2[1],
        z: t2[2],
    };
    let u = unit(combine(&t2, ca, &w, -sa));
    let out = Orientation {
        normal,
        u,
        v: o.v,
        upper_hemisphere: o.upper_hemisphere,
    };
    out.reorthonormalize()
}

/// Equirectangular texel layout: columns span azimuth `[0, 2π)`, rows span
/// polar angle `[0, π]` with row 0 at the zenith. Texel centers sit at
/// half-integer offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub width: usize,
    pub height: usize,
}

impl SphereGrid {
    pub fn new(width: usize, height: usize) -> Self {
        SphereGrid { width, height }
    }

    /// Full panorama grid with `width = 2 * height`.
    pub fn with_height(height: usize) -> Self {
        SphereGrid {
            width: 2 * height,
            height,
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Polar angle of the row center, radians.
    pub fn row_theta(&self, row: usize) -> f64 {
        (row as f64 + 0.5) * PI / self.height as f64
    }

    /// Azimuth of the column center, radians.
    pub fn col_phi(&self, col: usize) -> f64 {
        (col as f64 + 0.5) * 2.0 * PI / self.width as f64
    }

    /// Solid angle of one texel in the given row, steradians.
    pub fn row_weight(&self, row: usize) -> f64 {
        (2.0 * PI / self.width as f64) * (PI / self.height as f64) * self.row_theta(row).sin()
    }

    pub fn total_solid_angle(&self) -> f64 {
        (0..self.height)
            .map(|r| self.row_weight(r) * self.width as f64)
            .sum()
    }

    pub fn grid_direction(&self, row: usize, col: usize) -> Result<Direction> {
        if row >= self.height || col >= self.width {
            return Err(Error::IndexOutOfRange {
                row,
                col,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.direction_unchecked(row, col))
    }

    pub(crate) fn direction_unchecked(&self, row: usize, col: usize) -> Direction {
        Direction::from_spherical(self.row_theta(row), self.col_phi(col))
    }

    /// Texel containing `d`.
    pub fn direction_to_texel(&self, d: &Direction) -> (usize, usize) {
        let row = ((d.theta() / PI) * self.height as f64).floor() as usize;
        let col = ((d.phi() / (2.0 * PI)) * self.width as f64).floor() as usize;
        (row.min(self.height - 1), col % self.width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn quarter_turn_reaches_horizon() {
        let o = rotate_toward(&Orientation::zenith(), TangentAxis::U, 90.0);
        assert!(close(o.normal.z, 0.0, 1e-12));
        assert!(close(o.normal.x, 1.0, 1e-12));
        assert!(o.is_valid(1e-9));
    }

    #[test]
    fn zero_angle_is_identity() {
        let o = Orientation::from_angles_deg(33.0, 121.0);
        assert_eq!(rotate_toward(&o, TangentAxis::V, 0.0), o);
    }

    #[test]
    fn clamps_at_horizon() {
        let o = rotate_toward(&Orientation::zenith(), TangentAxis::U, 95.0);
        assert_eq!(o.normal.z, 0.0);
        assert!(o.is_valid(1e-9));
        let back = rotate_toward(&o, TangentAxis::U, 10.0);
        assert_eq!(back.normal.z, 0.0);

        let free = rotate_toward(
            &Orientation::zenith().with_upper_hemisphere(false),
            TangentAxis::U,
            95.0,
        );
        assert!(free.normal.z < 0.0);
    }

    #[test]
    fn angle_between_examples() {
        let z = Direction::ZENITH;
        assert_eq!(angle_between(&z, &z), 0.0);
        assert!(close(angle_between(&z, &z.neg()), 180.0, 1e-12));
        let h = Direction::from_angles_deg(90.0, 37.0);
        assert!(close(angle_between(&z, &h), 90.0, 1e-12));
    }

    #[test]
    fn half_offset_mapping() {
        let g = SphereGrid::new(4, 2);
        let d = g.grid_direction(0, 0).unwrap();
        assert!(close(d.theta(), PI / 4.0, 1e-12));
        assert!(close(d.phi(), PI / 4.0, 1e-12));
        assert!(g.grid_direction(2, 0).is_err());
        assert!(g.grid_direction(0, 4).is_err());

        let g = SphereGrid::with_height(90);
        let top = g.grid_direction(0, 17).unwrap();
        assert!(close(top.theta(), PI / 180.0, 1e-12));
    }

    #[test]
    fn texel_round_trip() {
        for g in [SphereGrid::new(4, 2), SphereGrid::with_height(37), SphereGrid::with_height(64)] {
            for r in 0..g.height {
                for c in 0..g.width {
                    let d = g.grid_direction(r, c).unwrap();
                    assert_eq!(g.direction_to_texel(&d), (r, c));
                }
            }
        }
    }

    #[test]
    fn quadrature_weights_sum_to_sphere() {
        for h in [64, 65, 128, 512] {
            let total = SphereGrid::with_height(h).total_solid_angle();
            assert!((total - 4.0 * PI).abs() / (4.0 * PI) < 1e-3, "H={h}: {total}");
        }
    }

    #[test]
    fn row_weight_formula() {
        let g = SphereGrid::new(16, 8);
        for r in 0..8 {
            let theta = (r as f64 + 0.5) * PI / 8.0;
            let expect = (2.0 * PI / 16.0) * (PI / 8.0) * theta.sin();
            assert!(close(g.row_weight(r), expect, 1e-15));
        }
    }

    #[test]
    fn from_angles_is_right_handed() {
        for (z, a) in [(0.0, 0.0), (10.0, 45.0), (89.0, 300.0), (45.0, 180.0)] {
            let o = Orientation::from_angles_deg(z, a);
            assert!(o.is_valid(1e-12), "{z} {a}");
            assert!(close(o.zenith_deg(), z, 1e-9));
        }
    }

    proptest! {
        #[test]
        fn tilt_then_untilt_restores(
            zen in 0.0f64..60.0, az in 0.0f64..360.0,
            ang in -25.0f64..25.0, use_u in any::<bool>(),
        ) {
            let o = Orientation::from_angles_deg(zen, az);
            let axis = if use_u { TangentAxis::U } else { TangentAxis::V };
            let there = rotate_toward(&o, axis, ang);
            prop_assume!(there.normal.z > 1e-6);
            let back = rotate_toward(&there, axis, -ang);
            prop_assert!(there.is_valid(1e-9));
            prop_assert!(angle_between(&back.normal, &o.normal) < 1e-6);
            prop_assert!(angle_between(&back.u, &o.u) < 1e-6);
            prop_assert!(angle_between(&back.v, &o.v) < 1e-6);
        }

        #[test]
        fn tilt_respects_hemisphere(
            zen in 0.0f64..90.0, az in 0.0f64..360.0,
            alpha in 0.0f64..360.0, ang in -180.0f64..180.0,
        ) {
            let o = Orientation::from_angles_deg(zen, az);
            let t = tilt_toward(&o, alpha, ang);
            prop_assert!(t.normal.z >= 0.0);
            prop_assert!(t.is_valid(1e-9));
        }

        #[test]
        fn angle_between_is_a_metric(
            a in (0.0f64..180.0, 0.0f64..360.0),
            b in (0.0f64..180.0, 0.0f64..360.0),
            c in (0.0f64..180.0, 0.0f64..360.0),
        ) {
            let (a, b, c) = (
                Direction::from_angles_deg(a.0, a.1),
                Direction::from_angles_deg(b.0, b.1),
                Direction::from_angles_deg(c.0, c.1),
            );
            prop_assert!((angle_between(&a, &b) - angle_between(&b, &a)).abs() < 1e-12);
            prop_assert!(angle_between(&a, &c) <= angle_between(&a, &b) + angle_between(&b, &c) + 1e-9);
        }
    }
}
