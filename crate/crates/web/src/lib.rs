//! WebAssembly bindings for the demo page. Every export returns a JSON string
//! or throws a message string.

use chrono::{Duration, FixedOffset, NaiveDate, TimeZone};
use heliotrope::controller::{orient as run_orient, pct_of_optimal, ControllerConfig};
use heliotrope::corpus::{multimodal_profile, multimodal_recipe, three_lobe_profile, unimodal_recipe, PROFILE_SAMPLES};
use heliotrope::environment::synth_scene;
use heliotrope::ephemeris::{solar_position, GeoTime};
use heliotrope::irradiance::{global_optimum, irradiance_field};
use heliotrope::photodiff::{blur_profile, count_modes_1d};
use heliotrope::sphere::{Orientation, SphereGrid};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAP_HEIGHT: usize = 48;

type Js = Result<String, String>;

fn json(v: &impl Serialize) -> Js {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn err(e: heliotrope::Error) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct OrientView {
    width: usize,
    height: usize,
    /// Radiance scaled to [0, 1], row 0 at the zenith.
    radiance: Vec<f32>,
    /// (zenith°, azimuth°, irradiance) per iteration.
    trajectory: Vec<(f64, f64, f64)>,
    converged: bool,
    optimum: (f64, f64),
    pct_of_optimal: f64,
}

/// Orients a panel on a seeded `unimodal` or `multimodal` scene.
#[wasm_bindgen]
pub fn orient(kind: &str, seed: u32, delta_theta_deg: f64, start_zenith_deg: f64, start_azimuth_deg: f64) -> Js {
    let recipe = match kind {
        "unimodal" => unimodal_recipe(seed as u64),
        "multimodal" => multimodal_recipe(seed as u64),
        _ => return Err(format!("unknown scene kind {kind:?}")),
    };
    let map = synth_scene(&recipe, SphereGrid::with_height(MAP_HEIGHT)).map_err(err)?;
    let cfg = ControllerConfig::default().with_delta_theta(delta_theta_deg);
    let start = Orientation::from_angles_deg(start_zenith_deg.clamp(0.0, 90.0), start_azimuth_deg);
    let report = run_orient(&map, &start, &cfg).map_err(err)?;
    let (best, best_value) = global_optimum(&irradiance_field(&map, 31, 120));
    let peak = map.max_value().max(f64::MIN_POSITIVE);
    let grid = map.grid();
    json(&OrientView {
        width: grid.width,
        height: grid.height,
        radiance: map.values().iter().map(|&v| (v / peak) as f32).collect(),
        trajectory: report
            .trajectory
            .iter()
            .map(|o| (o.zenith_deg(), o.azimuth_deg(), map.irradiance(&o.normal)))
            .collect(),
        converged: report.converged,
        optimum: (best.zenith_deg(), best.azimuth_deg()),
        pct_of_optimal: pct_of_optimal(report.final_irradiance, best_value),
    })
}

#[derive(Serialize)]
struct ScalespaceView {
    theta_deg: Vec<f64>,
    radiance: Vec<f64>,
    irradiance: Vec<f64>,
    blurred: Vec<f64>,
    modes_irradiance: usize,
    modes_blurred: usize,
}

/// 1D scale space of the three-lobe profile (`seed < 0`) or a seeded one.
#[wasm_bindgen]
pub fn scalespace(seed: i32, delta_theta_deg: f64) -> Js {
    let profile = if seed < 0 { three_lobe_profile() } else { multimodal_profile(seed as u64) };
    let p = blur_profile(profile.sample(PROFILE_SAMPLES), delta_theta_deg).map_err(err)?;
    json(&ScalespaceView {
        theta_deg: (0..p.len()).map(|i| p.theta_deg(i)).collect(),
        modes_irradiance: count_modes_1d(&p.irradiance),
        modes_blurred: count_modes_1d(&p.blurred),
        radiance: p.radiance,
        irradiance: p.irradiance,
        blurred: p.blurred,
    })
}

#[derive(Serialize)]
struct SunSample {
    minute: i64,
    elevation_deg: f64,
    azimuth_deg: f64,
}

/// Sun elevation and compass azimuth every ten minutes of a local day.
#[wasm_bindgen]
pub fn sun_path(latitude_deg: f64, longitude_deg: f64, date: &str, utc_offset_hours: i32) -> Js {
    let day = NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|_| format!("bad date {date:?}"))?;
    let tz = FixedOffset::east_opt(utc_offset_hours * 3600).ok_or("bad UTC offset")?;
    let midnight = tz
        .from_local_datetime(&day.and_hms_opt(0, 0, 0).ok_or("bad date")?)
        .single()
        .ok_or("bad date")?;
    let site = GeoTime::new(latitude_deg, longitude_deg, midnight).map_err(err)?;
    let samples = (0..=144)
        .map(|k| {
            let p = solar_position(&site.with_time(midnight + Duration::minutes(10 * k))).map_err(err)?;
            Ok(SunSample {
                minute: 10 * k,
                elevation_deg: p.elevation_deg,
                azimuth_deg: p.azimuth_deg,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    json(&samples)
}
