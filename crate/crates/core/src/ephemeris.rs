//! Solar position from site and time (low-precision almanac series, good to
//! a few hundredths of a degree over 1990–2050). Elevation is geometric:
//! no refraction correction.

use chrono::{DateTime, Datelike, FixedOffset, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::Direction;

pub const ERA_FIRST_YEAR: i32 = 1990;
pub const ERA_LAST_YEAR: i32 = 2050;

/// A site and an instant. The offset only affects how the time is displayed
/// and how local dates are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoTime {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub time: DateTime<FixedOffset>,
}

impl GeoTime {
    pub fn new(latitude_deg: f64, longitude_deg: f64, time: DateTime<FixedOffset>) -> Result<Self> {
        if !(latitude_deg.abs() <= 90.0) {
            return Err(Error::InvalidArgument(format!("latitude {latitude_deg} outside [-90, 90]")));
        }
        if !(longitude_deg.abs() <= 180.0) {
            return Err(Error::InvalidArgument(format!("longitude {longitude_deg} outside [-180, 180]")));
        }
        Ok(GeoTime {
            latitude_deg,
            longitude_deg,
            time,
        })
    }

    /// Parses an RFC 3339 / ISO-8601 timestamp with an explicit offset.
    pub fn parse(latitude_deg: f64, longitude_deg: f64, timestamp: &str) -> Result<Self> {
        let time = DateTime::parse_from_rfc3339(timestamp).map_err(|_| Error::Parse {
            what: "timestamp",
            input: timestamp.to_string(),
        })?;
        Self::new(latitude_deg, longitude_deg, time)
    }

    pub fn utc(&self) -> DateTime<Utc> {
        self.time.with_timezone(&Utc)
    }

    pub fn with_time(&self, time: DateTime<FixedOffset>) -> Self {
        GeoTime { time, ..*self }
    }
}

/// Sun elevation above the horizon and compass azimuth (clockwise from
/// north), in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarPosition {
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
    /// Hour angle, degrees; zero at local solar noon.
    pub hour_angle_deg: f64,
}

impl SolarPosition {
    /// Unit vector toward the sun (+x east, +y north, +z up).
    pub fn direction(&self) -> Direction {
        compass_direction(self.elevation_deg, self.azimuth_deg)
    }

    pub fn above_horizon(&self) -> bool {
        self.elevation_deg > 0.0
    }
}

/// Direction for an elevation and compass azimuth (degrees).
pub fn compass_direction(elevation_deg: f64, azimuth_deg: f64) -> Direction {
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    let (sa, ca) = azimuth_deg.to_radians().sin_cos();
    Direction::new(ce * sa, ce * ca, se)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SunDirection {
    Above(Direction),
    BelowHorizon,
}

fn julian_day(t: &DateTime<Utc>) -> f64 {
    let secs = t.timestamp() as f64 + t.timestamp_subsec_nanos() as f64 * 1e-9;
    secs / 86_400.0 + 2_440_587.5
}

pub fn solar_position(gt: &GeoTime) -> Result<SolarPosition> {
    let utc = gt.utc();
    if !(ERA_FIRST_YEAR..=ERA_LAST_YEAR).contains(&utc.year()) {
        return Err(Error::OutOfEra(gt.time.to_rfc3339()));
    }
    let t = (julian_day(&utc) - 2_451_545.0) / 36_525.0;

    let l0 = (280.46646 + t * (36000.76983 + t * 0.0003032)).rem_euclid(360.0);
    let m = (357.52911 + t * (35999.05029 - t * 0.0001537)).to_radians();
    let e = 0.016708634 - t * (0.000042037 + t * 0.0000001267);
    let c = m.sin() * (1.914602 - t * (0.004817 + t * 0.000014))
        + (2.0 * m).sin() * (0.019993 - t * 0.000101)
        + (3.0 * m).sin() * 0.000289;
    let omega = (125.04 - 1934.136 * t).to_radians();
    let lambda = (l0 + c - 0.00569 - 0.00478 * omega.sin()).to_radians();
    let eps0 = 23.0 + (26.0 + (21.448 - t * (46.815 + t * (0.00059 - t * 0.001813))) / 60.0) / 60.0;
    let eps = (eps0 + 0.00256 * omega.cos()).to_radians();
    let decl = (eps.sin() * lambda.sin()).asin();

    let y = (eps / 2.0).tan().powi(2);
    let l0r = l0.to_radians();
    let eot_min = 4.0
        * (y * (2.0 * l0r).sin() - 2.0 * e * m.sin() + 4.0 * e * y * m.sin() * (2.0 * l0r).cos()
            - 0.5 * y * y * (4.0 * l0r).sin()
            - 1.25 * e * e * (2.0 * m).sin())
        .to_degrees();

    let minutes = utc.hour() as f64 * 60.0
        + utc.minute() as f64
        + (utc.second() as f64 + utc.nanosecond() as f64 * 1e-9) / 60.0;
    let solar_minutes = minutes + eot_min + 4.0 * gt.longitude_deg;
    let hour_angle = ((solar_minutes / 4.0 - 180.0 + 180.0).rem_euclid(360.0) - 180.0).to_radians();

    let lat = gt.latitude_deg.to_radians();
    let cos_zen = (lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos()).clamp(-1.0, 1.0);
    let elevation = 90.0 - cos_zen.acos().to_degrees();
    // compass azimuth measured clockwise from north
    let azimuth = (hour_angle.sin())
        .atan2(hour_angle.cos() * lat.sin() - decl.tan() * lat.cos())
        .to_degrees()
        + 180.0;
    Ok(SolarPosition {
        elevation_deg: elevation,
        azimuth_deg: azimuth.rem_euclid(360.0),
        hour_angle_deg: hour_angle.to_degrees(),
    })
}

pub fn sun_direction(gt: &GeoTime) -> Result<SunDirection> {
    let p = solar_position(gt)?;
    Ok(if p.above_horizon() {
        SunDirection::Above(p.direction())
    } else {
        SunDirection::BelowHorizon
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAT: f64 = 40.7128;
    const LON: f64 = -74.0060;

    fn pos(ts: &str) -> SolarPosition {
        solar_position(&GeoTime::parse(LAT, LON, ts).unwrap()).unwrap()
    }

    // Reference values from the NREL solar position algorithm (geometric
    // elevation, no refraction) for lower Manhattan.
    const FIXTURES: [(&str, f64, f64); 3] = [
        ("2023-06-21T14:30:00-04:00", 64.0837, 235.2312),
        ("2023-12-21T10:15:00-05:00", 21.8429, 155.5477),
        ("2023-03-20T16:45:00-04:00", 25.4906, 245.7577),
    ];

    #[test]
    fn matches_reference_fixtures() {
        for (ts, el, az) in FIXTURES {
            let p = pos(ts);
            assert!((p.elevation_deg - el).abs() < 0.05, "{ts}: {p:?}");
            assert!((p.azimuth_deg - az).abs() < 0.05, "{ts}: {p:?}");
        }
    }

    #[test]
    fn equinox_noon() {
        let p = pos("2023-03-20T13:04:00-04:00");
        assert!((p.elevation_deg - (90.0 - LAT)).abs() < 1.0, "{p:?}");
        assert!((p.azimuth_deg - 180.0).abs() < 1.0, "{p:?}");
        let p = pos("2023-03-20T13:00:00-04:00");
        assert!((p.elevation_deg - 49.2052).abs() < 0.05 && (p.azimuth_deg - 178.6667).abs() < 0.05);
    }

    #[test]
    fn midnight_is_below_horizon() {
        let gt = GeoTime::parse(LAT, LON, "2023-03-20T00:00:00-04:00").unwrap();
        assert_eq!(sun_direction(&gt).unwrap(), SunDirection::BelowHorizon);
        let p = solar_position(&gt).unwrap();
        assert!((p.elevation_deg + 47.0735).abs() < 0.05 && (p.azimuth_deg - 336.2654).abs() < 0.05);
    }

    #[test]
    fn southern_noon_faces_north() {
        // Sydney, local noon near the June solstice
        let gt = GeoTime::parse(-33.8688, 151.2093, "2023-06-21T11:55:00+10:00").unwrap();
        let p = solar_position(&gt).unwrap();
        let az = p.azimuth_deg.min(360.0 - p.azimuth_deg);
        assert!(az < 3.0, "{p:?}");
    }

    #[test]
    fn direction_matches_compass() {
        let d = compass_direction(0.0, 90.0);
        assert!((d.x - 1.0).abs() < 1e-12);
        let d = compass_direction(0.0, 0.0);
        assert!((d.y - 1.0).abs() < 1e-12);
        let p = pos("2023-06-21T14:30:00-04:00");
        assert!((p.direction().z - p.elevation_deg.to_radians().sin()).abs() < 1e-12);
    }

    #[test]
    fn era_and_input_checks() {
        let gt = GeoTime::parse(LAT, LON, "1989-12-31T12:00:00+00:00").unwrap();
        assert!(matches!(solar_position(&gt), Err(Error::OutOfEra(_))));
        let gt = GeoTime::parse(LAT, LON, "2051-01-01T12:00:00+00:00").unwrap();
        assert!(matches!(solar_position(&gt), Err(Error::OutOfEra(_))));
        assert!(GeoTime::parse(91.0, 0.0, "2023-01-01T00:00:00Z").is_err());
        assert!(GeoTime::parse(0.0, 181.0, "2023-01-01T00:00:00Z").is_err());
        assert!(GeoTime::parse(0.0, 0.0, "yesterday").is_err());
    }

    #[test]
    fn elevation_is_unimodal_over_a_day() {
        // solar midnight in New York in early August is close to 01:00 EDT
        let start = GeoTime::parse(LAT, LON, "2023-08-01T01:00:00-04:00").unwrap();
        let days: Vec<SolarPosition> = (0..144)
            .map(|k| {
                let t = start.time + chrono::Duration::minutes(10 * k);
                solar_position(&start.with_time(t)).unwrap()
            })
            .collect();
        let els: Vec<f64> = days.iter().map(|p| p.elevation_deg).collect();
        let peak = els
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(els[..=peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(els[peak..].windows(2).all(|w| w[1] <= w[0]));
        // ten minutes is 2.5 degrees of hour angle
        assert!(days[peak].hour_angle_deg.abs() <= 2.5, "{:?}", days[peak]);
    }
}
