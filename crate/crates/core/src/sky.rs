//! Analytic clear-sky radiance: a painted sun disk, a diffuse dome brightened
//! around the sun and toward the horizon, a uniform ground, and occluding
//! buildings that replace the sky behind them.

use chrono::{DateTime, Duration, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::environment::{paint_sun_disk, Occluder, RadianceMap, SUN_DISK_RADIUS_DEG};
use crate::ephemeris::{solar_position, GeoTime, SolarPosition};
use crate::error::{Error, Result};
use crate::sphere::{Direction, SphereGrid};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkyParams {
    /// Strength of the circumsolar and horizon brightening; 0 is a uniform dome.
    pub clarity: f64,
    /// Direct-normal irradiance, W/m².
    pub dni: f64,
    /// Diffuse horizontal irradiance, W/m².
    pub dhi: f64,
    pub albedo: f64,
}

impl Default for SkyParams {
    fn default() -> Self {
        SkyParams {
            clarity: 1.0,
            dni: 850.0,
            dhi: 100.0,
            albedo: 0.2,
        }
    }
}

impl SkyParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dni >= 0.0
            && self.dhi >= 0.0
            && self.clarity >= 0.0
            && (0.0..=1.0).contains(&self.albedo)
            && self.dni.is_finite()
            && self.dhi.is_finite()
            && self.clarity.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid sky parameters {self:?}")))
        }
    }
}

/// Elevation (degrees) at which twilight diffuse light reaches zero.
pub const TWILIGHT_END_DEG: f64 = -6.0;

/// Diffuse scale: 1 with the sun up, falling linearly to 0 at −6°.
pub fn twilight_factor(elevation_deg: f64) -> f64 {
    (1.0 - elevation_deg / TWILIGHT_END_DEG).clamp(0.0, 1.0)
}

fn sky_shape(s: &Direction, sun: &Direction, clarity: f64) -> f64 {
    let gamma = sun.dot(s).clamp(-1.0, 1.0).acos();
    1.0 + clarity * (2.0 * (-3.0 * gamma).exp() + 0.5 * (1.0 - s.z))
}

/// Clear-sky radiance map at `gt`. `params.dni` and `params.dhi` are used
/// as given; the sun disk is drawn only when the sun is up and visible.
pub fn clear_sky_map(gt: &GeoTime, params: &SkyParams, grid: SphereGrid, occluders: &[Occluder]) -> Result<RadianceMap> {
    params.validate()?;
    let pos = solar_position(gt)?;
    sky_for_sun(&pos, params, grid, occluders)
}

/// [`clear_sky_map`] for a known sun position.
pub fn sky_for_sun(pos: &SolarPosition, params: &SkyParams, grid: SphereGrid, occluders: &[Occluder]) -> Result<RadianceMap> {
    let sun = pos.direction();
    let up = pos.above_horizon();
    let dni = if up { params.dni } else { 0.0 };
    let dhi = params.dhi * twilight_factor(pos.elevation_deg);

    let mut norm = 0.0;
    let mut shape = vec![0.0; grid.len()];
    for row in 0..grid.height {
        let dw = grid.row_weight(row);
        for col in 0..grid.width {
            let s = grid.direction_unchecked(row, col);
            if s.z > 0.0 {
                let g = sky_shape(&s, &sun, params.clarity);
                shape[row * grid.width + col] = g;
                norm += g * s.z * dw;
            }
        }
    }
    let sky_scale = if norm > 0.0 { dhi / norm } else { 0.0 };
    let horizontal = dni * sun.z.max(0.0) + dhi;
    let ground = params.albedo * horizontal / std::f64::consts::PI;

    let building = |o: &Occluder| {
        let lit = match o.face_normal() {
            Some(face) => dni * sun.dot(&face).max(0.0),
            None => 0.0,
        };
        o.albedo() * (lit + 0.5 * dhi) / std::f64::consts::PI
    };

    let mut values = Vec::with_capacity(grid.len());
    for row in 0..grid.height {
        for col in 0..grid.width {
            let s = grid.direction_unchecked(row, col);
            let l = match occluders.iter().find(|o| o.blocks(&s)) {
                Some(o) => building(o),
                None if s.z > 0.0 => sky_scale * shape[row * grid.width + col],
                None => ground,
            };
            values.push(l);
        }
    }
    if up && dni > 0.0 && !occluders.iter().any(|o| o.blocks(&sun)) {
        paint_sun_disk(&mut values, grid, &sun, SUN_DISK_RADIUS_DEG, dni)?;
    }
    RadianceMap::new(grid, values)
}

/// Kasten–Young relative air mass for a solar elevation in degrees.
pub fn air_mass(elevation_deg: f64) -> f64 {
    let z = 90.0 - elevation_deg;
    1.0 / (z.to_radians().cos() + 0.50572 * (96.07995 - z).powf(-1.6364))
}

/// Irradiances at a given sun elevation: direct attenuated with air mass,
/// diffuse scaled with the sun's height. Parameters give zenith-sun values.
pub fn diurnal_params(params: &SkyParams, elevation_deg: f64) -> SkyParams {
    if elevation_deg <= 0.0 {
        return SkyParams {
            dni: 0.0,
            dhi: 0.2 * params.dhi,
            ..*params
        };
    }
    let am = air_mass(elevation_deg);
    SkyParams {
        dni: params.dni * 0.7f64.powf(am.powf(0.678) - 1.0),
        dhi: params.dhi * (0.2 + 0.8 * elevation_deg.to_radians().sin()),
        ..*params
    }
}

#[derive(Debug, Clone)]
pub struct DaySample {
    pub time: GeoTime,
    pub sun: SolarPosition,
    pub params: SkyParams,
    pub map: RadianceMap,
}

/// Timestamps from `start` to `end` inclusive at `interval_min` spacing.
pub fn interval_times(start: DateTime<FixedOffset>, end: DateTime<FixedOffset>, interval_min: f64) -> Result<Vec<DateTime<FixedOffset>>> {
    if !(interval_min > 0.0) {
        return Err(Error::InvalidArgument("interval must be positive".into()));
    }
    if start >= end {
        return Err(Error::InvalidArgument("start must precede end".into()));
    }
    let step = Duration::milliseconds((interval_min * 60_000.0).round() as i64);
    let mut out = Vec::new();
    let mut t = start;
    while t <= end {
        out.push(t);
        t += step;
    }
    Ok(out)
}

/// One clear-sky map per interval boundary between `start` and `end`.
pub fn day_sequence(
    start: &GeoTime,
    end: DateTime<FixedOffset>,
    interval_min: f64,
    params: &SkyParams,
    grid: SphereGrid,
    occluders: &[Occluder],
) -> Result<Vec<DaySample>> {
    params.validate()?;
    let times = interval_times(start.time, end, interval_min)?;
    let build = |t: DateTime<FixedOffset>| -> Result<DaySample> {
        let gt = start.with_time(t);
        let sun = solar_position(&gt)?;
        let p = diurnal_params(params, sun.elevation_deg);
        Ok(DaySample {
            time: gt,
            sun,
            params: p,
            map: sky_for_sun(&sun, &p, grid, occluders)?,
        })
    };
    #[cfg(feature = "parallel")]
    return times.into_par_iter().map(build).collect();
    #[cfg(not(feature = "parallel"))]
    times.into_iter().map(build).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::angle_between;

    fn gt(ts: &str) -> GeoTime {
        GeoTime::parse(40.7128, -74.0060, ts).unwrap()
    }

    const NOON: &str = "2023-06-21T13:00:00-04:00";

    #[test]
    fn uniform_diffuse_normalizes() {
        let p = SkyParams {
            clarity: 0.0,
            dni: 0.0,
            dhi: 120.0,
            albedo: 0.2,
        };
        let m = clear_sky_map(&gt(NOON), &p, SphereGrid::with_height(64), &[]).unwrap();
        let e = m.irradiance(&Direction::ZENITH);
        assert!((e - 120.0).abs() < 0.02 * 120.0, "{e}");
        // clarity reshapes but keeps the horizontal diffuse
        let p = SkyParams { clarity: 2.0, ..p };
        let m = clear_sky_map(&gt(NOON), &p, SphereGrid::with_height(64), &[]).unwrap();
        assert!((m.irradiance(&Direction::ZENITH) - 120.0).abs() < 0.02 * 120.0);
    }

    #[test]
    fn sun_only_gives_dni() {
        let p = SkyParams {
            clarity: 0.0,
            dni: 900.0,
            dhi: 0.0,
            albedo: 0.0,
        };
        let t = gt(NOON);
        let m = clear_sky_map(&t, &p, SphereGrid::with_height(512), &[]).unwrap();
        let sun = solar_position(&t).unwrap().direction();
        assert!((m.irradiance(&sun) - 900.0).abs() < 0.02 * 900.0);
    }

    #[test]
    fn linear_in_irradiances() {
        let t = gt(NOON);
        let g = SphereGrid::with_height(64);
        let base = SkyParams::default();
        let a = clear_sky_map(&t, &SkyParams { dni: 400.0, dhi: 50.0, ..base }, g, &[]).unwrap();
        let b = clear_sky_map(&t, &SkyParams { dni: 800.0, dhi: 100.0, ..base }, g, &[]).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((2.0 * x - y).abs() <= 1e-9 * y.max(1.0));
        }
    }

    #[test]
    fn dark_occluder_never_adds_light() {
        let t = gt(NOON);
        let g = SphereGrid::with_height(64);
        let p = SkyParams::default();
        let wall = Occluder::Wall {
            azimuth_deg: 250.0,
            top_elevation_deg: 40.0,
            albedo: 0.0,
        };
        let open = clear_sky_map(&t, &p, g, &[]).unwrap();
        let walled = clear_sky_map(&t, &p, g, &[wall]).unwrap();
        for z in (0..=90).step_by(15) {
            for a in (0..360).step_by(30) {
                let n = Direction::from_angles_deg(z as f64, a as f64);
                assert!(walled.irradiance(&n) <= open.irradiance(&n) + 1e-9);
            }
        }
    }

    #[test]
    fn occluded_sun_is_not_drawn() {
        let t = gt(NOON);
        let pos = solar_position(&t).unwrap();
        let g = SphereGrid::with_height(64);
        let p = SkyParams::default();
        let blocker = Occluder::Rect {
            zenith_min_deg: 0.0,
            zenith_max_deg: 60.0,
            azimuth_min_deg: 0.0,
            azimuth_max_deg: 359.9,
            albedo: 0.3,
        };
        let m = sky_for_sun(&pos, &p, g, &[blocker]).unwrap();
        let sun = pos.direction();
        assert!(m.irradiance(&sun) < 0.3 * p.dni);
    }

    #[test]
    fn fencepost_and_order() {
        let start = gt("2023-06-21T10:00:00-04:00");
        let end = DateTime::parse_from_rfc3339("2023-06-21T10:30:00-04:00").unwrap();
        let seq = day_sequence(&start, end, 10.0, &SkyParams::default(), SphereGrid::with_height(16), &[]).unwrap();
        assert_eq!(seq.len(), 4);
        assert!(day_sequence(&start, start.time, 10.0, &SkyParams::default(), SphereGrid::with_height(16), &[]).is_err());
        assert!(interval_times(start.time, end, 0.0).is_err());
    }

    #[test]
    fn night_is_dark() {
        let start = gt("2023-06-21T00:00:00-04:00");
        let end = DateTime::parse_from_rfc3339("2023-06-21T03:00:00-04:00").unwrap();
        let g = SphereGrid::with_height(32);
        let night = day_sequence(&start, end, 30.0, &SkyParams::default(), g, &[]).unwrap();
        let noon = clear_sky_map(&gt(NOON), &SkyParams::default(), g, &[]).unwrap();
        let peak = noon.irradiance(&Direction::ZENITH);
        for s in night {
            assert!(s.map.irradiance(&Direction::ZENITH) < 1e-3 * peak);
        }
    }

    #[test]
    fn midday_disk_tracks_ephemeris() {
        let start = gt("2023-06-21T12:00:00-04:00");
        let end = DateTime::parse_from_rfc3339("2023-06-21T13:00:00-04:00").unwrap();
        let p = SkyParams {
            dhi: 0.0,
            albedo: 0.0,
            ..SkyParams::default()
        };
        let g = SphereGrid::with_height(256);
        let seq = day_sequence(&start, end, 30.0, &p, g, &[]).unwrap();
        for s in &seq {
            // radiance-weighted centroid of the painted disk
            let mut c = [0.0; 3];
            for row in 0..g.height {
                for col in 0..g.width {
                    let l = s.map.get(row, col) * g.row_weight(row);
                    let d = g.grid_direction(row, col).unwrap();
                    c[0] += l * d.x;
                    c[1] += l * d.y;
                    c[2] += l * d.z;
                }
            }
            let centroid = Direction::new(c[0], c[1], c[2]);
            assert!(angle_between(&centroid, &s.sun.direction()) < 1.0);
        }
        assert!(angle_between(&seq[0].sun.direction(), &seq[2].sun.direction()) > 5.0);
    }

    #[test]
    fn twilight_ramp() {
        assert_eq!(twilight_factor(10.0), 1.0);
        assert_eq!(twilight_factor(0.0), 1.0);
        assert!((twilight_factor(-3.0) - 0.5).abs() < 1e-12);
        assert_eq!(twilight_factor(-6.0), 0.0);
        assert_eq!(twilight_factor(-30.0), 0.0);
    }

    #[test]
    fn air_mass_values() {
        assert!((air_mass(90.0) - 1.0).abs() < 1e-3);
        assert!((air_mass(30.0) - 2.0).abs() < 0.01);
        let p = diurnal_params(&SkyParams::default(), 90.0);
        assert!((p.dni - 850.0).abs() < 1.0);
    }
}
