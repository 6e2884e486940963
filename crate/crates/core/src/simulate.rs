//! Day-long energy bookkeeping: per-interval reorientation, conversion and
//! actuator cost, compared against an optimal-tracking oracle.

use std::io::Write;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, TimeZone};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::{orient, ControllerConfig};
use crate::environment::Occluder;
use crate::ephemeris::GeoTime;
use crate::error::{Error, Result};
use crate::irradiance::{global_optimum, irradiance_field};
use crate::sky::{day_sequence, DaySample, SkyParams};
use crate::sphere::{Direction, Orientation, SphereGrid};
use crate::strategies::{fixed_orientation, orient_geodesic_dome, orient_shading_wall, orient_tetrahedron, Strategy};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelModel {
    pub area_m2: f64,
    pub efficiency: f64,
}

impl Default for PanelModel {
    fn default() -> Self {
        PanelModel {
            area_m2: 0.0625,
            efficiency: 0.20,
        }
    }
}

impl PanelModel {
    pub fn validate(&self) -> Result<()> {
        if self.area_m2 > 0.0 && self.efficiency > 0.0 && self.efficiency <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid panel {self:?}")))
        }
    }

    /// Electrical energy for `irradiance` held over `seconds`.
    pub fn energy(&self, irradiance: f64, seconds: f64) -> f64 {
        irradiance * self.area_m2 * self.efficiency * seconds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorModel {
    pub joules_per_step: f64,
}

/// Default energy per single-axis step, J.
pub const DEFAULT_STEP_ENERGY_J: f64 = 0.30;

impl Default for ActuatorModel {
    fn default() -> Self {
        ActuatorModel {
            joules_per_step: DEFAULT_STEP_ENERGY_J,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub time: DateTime<FixedOffset>,
    pub orientation: Orientation,
    pub irradiance: f64,
    pub axis_steps: usize,
    pub harvested_j: f64,
    pub actuator_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub strategy: String,
    pub rows: Vec<LedgerRow>,
    pub harvested_j: f64,
    pub actuator_j: f64,
    pub net_j: f64,
}

impl EnergyLedger {
    fn from_rows(strategy: &str, rows: Vec<LedgerRow>) -> Self {
        let harvested_j = rows.iter().map(|r| r.harvested_j).sum::<f64>();
        let actuator_j = rows.iter().map(|r| r.actuator_j).sum::<f64>();
        EnergyLedger {
            strategy: strategy.to_string(),
            rows,
            harvested_j,
            actuator_j,
            net_j: harvested_j - actuator_j,
        }
    }

    /// Actuator energy as a percentage of harvested energy.
    pub fn actuator_share_pct(&self) -> f64 {
        if self.harvested_j > 0.0 {
            100.0 * self.actuator_j / self.harvested_j
        } else {
            0.0
        }
    }

    /// CSV with header
    /// `time,zenith_deg,azimuth_deg,irradiance_w_m2,axis_steps,harvested_j,actuator_j`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "time,zenith_deg,azimuth_deg,irradiance_w_m2,axis_steps,harvested_j,actuator_j")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.4},{:.4},{:.6},{},{:.6},{:.6}",
                r.time.to_rfc3339(),
                r.orientation.zenith_deg(),
                r.orientation.azimuth_deg(),
                r.irradiance,
                r.axis_steps,
                r.harvested_j,
                r.actuator_j
            )?;
        }
        Ok(())
    }
}

/// Single-axis steps a two-axis mount needs to slew from `from` to face `to`.
pub fn slew_steps(from: &Orientation, to: &Direction, step_deg: f64) -> usize {
    let n = from.normal;
    let along = |axis: &Direction| to.dot(axis).atan2(to.dot(&n)).to_degrees().abs();
    let count = |deg: f64| {
        let k = deg / step_deg;
        // tolerate rounding just above a whole number of steps
        (k - 1e-9).ceil().max(0.0) as usize
    };
    count(along(&from.u)) + count(along(&from.v))
}

/// Runs `strategy` through the day. Iterative strategies warm-start from the
/// previous interval's orientation; the first interval starts facing up.
pub fn simulate_day(
    sequence: &[DaySample],
    interval_min: f64,
    strategy: &Strategy,
    panel: &PanelModel,
    actuator: &ActuatorModel,
) -> Result<EnergyLedger> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty day sequence".into()));
    }
    strategy.validate()?;
    panel.validate()?;
    let seconds = interval_min * 60.0;
    let tracker_step = ControllerConfig::default().step_deg;
    let mut o = Orientation::zenith();
    let mut rows = Vec::with_capacity(sequence.len());
    for s in sequence {
        let map = &s.map;
        let steps = match strategy {
            Strategy::FixedUp | Strategy::FixedLatitude { .. } => {
                o = fixed_orientation(strategy)?;
                0
            }
            Strategy::GeodesicDome => {
                o = orient_geodesic_dome(map);
                0
            }
            Strategy::SunTracker => {
                if s.sun.above_horizon() {
                    let sun = s.sun.direction();
                    let steps = slew_steps(&o, &sun, tracker_step);
                    o = Orientation::facing(sun);
                    steps
                } else {
                    0
                }
            }
            Strategy::Proposed { config } => {
                let r = orient(map, &o, config)?;
                o = r.final_orientation;
                r.axis_steps
            }
            Strategy::Tetrahedron { config } => {
                let r = orient_tetrahedron(map, &o, config)?;
                o = r.final_orientation;
                r.axis_steps
            }
            Strategy::ShadingWall { config } => {
                let r = orient_shading_wall(map, &o, config)?;
                o = r.final_orientation;
                r.axis_steps
            }
        };
        let irradiance = map.irradiance(&o.normal);
        rows.push(LedgerRow {
            time: s.time.time,
            orientation: o,
            irradiance,
            axis_steps: steps,
            harvested_j: panel.energy(irradiance, seconds),
            actuator_j: steps as f64 * actuator.joules_per_step,
        });
    }
    Ok(EnergyLedger::from_rows(strategy.name(), rows))
}

pub const OPTIMAL: &str = "optimal";

/// Per-interval global optimum at zero actuator cost.
pub fn optimal_ledger(sequence: &[DaySample], interval_min: f64, panel: &PanelModel) -> Result<EnergyLedger> {
    panel.validate()?;
    let seconds = interval_min * 60.0;
    let row = |s: &DaySample| {
        let (o, e) = if s.map.max_value() > 0.0 {
            global_optimum(&irradiance_field(&s.map, 31, 120))
        } else {
            (Orientation::zenith(), 0.0)
        };
        LedgerRow {
            time: s.time.time,
            orientation: o,
            irradiance: e,
            axis_steps: 0,
            harvested_j: panel.energy(e, seconds),
            actuator_j: 0.0,
        }
    };
    #[cfg(feature = "parallel")]
    let rows = sequence.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows = sequence.iter().map(row).collect();
    Ok(EnergyLedger::from_rows(OPTIMAL, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: String,
    pub harvested_j: f64,
    pub actuator_j: f64,
    pub net_j: f64,
    pub pct_of_optimal: f64,
    /// `(baseline, percent gain of this strategy's net over the baseline's)`.
    pub gain_over: Vec<(String, f64)>,
}

impl ComparisonRow {
    pub fn gain_over(&self, baseline: &str) -> Option<f64> {
        self.gain_over.iter().find(|g| g.0 == baseline).map(|g| g.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayComparison {
    pub ledgers: Vec<EnergyLedger>,
    pub optimal: EnergyLedger,
    pub rows: Vec<ComparisonRow>,
}

impl DayComparison {
    pub fn row(&self, strategy: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.strategy == strategy)
    }

    pub fn ledger(&self, strategy: &str) -> Option<&EnergyLedger> {
        self.ledgers.iter().find(|l| l.strategy == strategy)
    }
}

fn pct_gain(net: f64, baseline: f64) -> f64 {
    if baseline > 0.0 {
        100.0 * (net / baseline - 1.0)
    } else {
        0.0
    }
}

/// Runs every strategy on the same day and normalizes by the optimal oracle.
pub fn compare_day(
    sequence: &[DaySample],
    interval_min: f64,
    strategies: &[Strategy],
    panel: &PanelModel,
    actuator: &ActuatorModel,
) -> Result<DayComparison> {
    if strategies.is_empty() {
        return Err(Error::InvalidArgument("no strategies to compare".into()));
    }
    let optimal = optimal_ledger(sequence, interval_min, panel)?;
    let ledgers = strategies
        .iter()
        .map(|s| simulate_day(sequence, interval_min, s, panel, actuator))
        .collect::<Result<Vec<_>>>()?;
    let rows = ledgers
        .iter()
        .map(|l| ComparisonRow {
            strategy: l.strategy.clone(),
            harvested_j: l.harvested_j,
            actuator_j: l.actuator_j,
            net_j: l.net_j,
            pct_of_optimal: if optimal.net_j > 0.0 {
                100.0 * l.net_j / optimal.net_j
            } else {
                100.0
            },
            gain_over: ledgers
                .iter()
                .filter(|b| b.strategy != l.strategy)
                .map(|b| (b.strategy.clone(), pct_gain(l.net_j, b.net_j)))
                .collect(),
        })
        .collect();
    Ok(DayComparison {
        ledgers,
        optimal,
        rows,
    })
}

/// A simulated site: where, when, and what surrounds the panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub date: NaiveDate,
    pub utc_offset_hours: i32,
    pub sky: SkyParams,
    /// Occluder azimuths follow the map convention (counterclockwise from east).
    pub occluders: Vec<Occluder>,
}

impl Location {
    pub fn open(id: &str, latitude_deg: f64, longitude_deg: f64, date: NaiveDate, utc_offset_hours: i32) -> Self {
        Location {
            id: id.to_string(),
            latitude_deg,
            longitude_deg,
            date,
            utc_offset_hours,
            sky: SkyParams::default(),
            occluders: Vec::new(),
        }
    }

    pub fn local_time(&self, hour: u32, minute: u32) -> Result<DateTime<FixedOffset>> {
        let tz = FixedOffset::east_opt(self.utc_offset_hours * 3600)
            .ok_or_else(|| Error::InvalidArgument(format!("bad UTC offset {}", self.utc_offset_hours)))?;
        let naive = self
            .date
            .and_hms_opt(hour, minute, 0)
            .ok_or_else(|| Error::InvalidArgument(format!("bad time {hour}:{minute}")))?;
        tz.from_local_datetime(&naive)
            .single()
            .ok_or_else(|| Error::InvalidArgument("ambiguous local time".into()))
    }

    /// Clear-sky maps for a local time window, inclusive.
    pub fn day(&self, from_hour: u32, to_hour: u32, interval_min: f64, grid: SphereGrid) -> Result<Vec<DaySample>> {
        let start = GeoTime::new(self.latitude_deg, self.longitude_deg, self.local_time(from_hour, 0)?)?;
        let end = self.local_time(to_hour, 0)?;
        day_sequence(&start, end, interval_min, &self.sky, grid, &self.occluders)
    }
}

/// Where an urban panel is mounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Open sky with a few taller buildings low on the horizon.
    Rooftop,
    /// On a building wall: half the sky is the building itself, with a
    /// neighbor across the street.
    Facade,
    /// At street level between two facing walls.
    Street,
}

impl Placement {
    pub const ALL: [Placement; 3] = [Placement::Rooftop, Placement::Facade, Placement::Street];

    pub fn name(&self) -> &'static str {
        match self {
            Placement::Rooftop => "rooftop",
            Placement::Facade => "facade",
            Placement::Street => "street",
        }
    }
}

fn building(r: &mut ChaCha8Rng, center_deg: f64, span: (f64, f64), top_zenith: (f64, f64), albedo: f64) -> Occluder {
    let half = 0.5 * r.gen_range(span.0..span.1);
    Occluder::Rect {
        zenith_min_deg: r.gen_range(top_zenith.0..top_zenith.1),
        zenith_max_deg: 90.0,
        azimuth_min_deg: (center_deg - half).rem_euclid(360.0),
        azimuth_max_deg: (center_deg + half).rem_euclid(360.0),
        albedo,
    }
}

fn occluders_for(placement: Placement, r: &mut ChaCha8Rng) -> Vec<Occluder> {
    let albedo = r.gen_range(0.15..0.45);
    match placement {
        Placement::Rooftop => {
            let n = r.gen_range(1..=3);
            (0..n)
                .map(|_| {
                    let c = r.gen_range(0.0..360.0);
                    building(r, c, (20.0, 60.0), (55.0, 80.0), albedo)
                })
                .collect()
        }
        Placement::Facade => {
            let back: f64 = r.gen_range(0.0..360.0);
            let across = back + 180.0 + r.gen_range(-30.0..30.0);
            vec![
                Occluder::Wall {
                    azimuth_deg: back,
                    top_elevation_deg: 90.0,
                    albedo,
                },
                building(r, across, (30.0, 90.0), (45.0, 75.0), albedo),
            ]
        }
        Placement::Street => {
            let street: f64 = r.gen_range(0.0..180.0);
            vec![
                Occluder::Wall {
                    azimuth_deg: street + 90.0,
                    top_elevation_deg: r.gen_range(20.0..55.0),
                    albedo,
                },
                Occluder::Wall {
                    azimuth_deg: street + 270.0,
                    top_elevation_deg: r.gen_range(20.0..55.0),
                    albedo,
                },
            ]
        }
    }
}

/// Occluders for a panel at a seeded urban placement.
pub fn urban_occluders(seed: u64) -> Vec<Occluder> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    occluders_for(Placement::ALL[(seed % 3) as usize], &mut r)
}

/// Fills in the site latitude for latitude-tilted fixed panels.
pub fn at_latitude(strategy: Strategy, latitude_deg: f64) -> Strategy {
    match strategy {
        Strategy::FixedLatitude { .. } => Strategy::FixedLatitude { latitude_deg },
        s => s,
    }
}

/// Urban panels at random mid-latitude northern sites and dates, cycling
/// through rooftop, facade and street placements.
pub fn urban_batch(seed: u64, count: usize) -> Vec<Location> {
    (0..count)
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(i as u64);
            let placement = Placement::ALL[i % 3];
            let lon: f64 = r.gen_range(-120.0..-70.0);
            let date = NaiveDate::from_yo_opt(2023, r.gen_range(60..300)).expect("valid ordinal");
            let occluders = occluders_for(placement, &mut r);
            Location {
                id: format!("{}-{seed}-{i}", placement.name()),
                latitude_deg: r.gen_range(25.0..50.0),
                longitude_deg: lon,
                date,
                utc_offset_hours: (lon / 15.0).round() as i32,
                sky: SkyParams {
                    clarity: r.gen_range(0.5..1.5),
                    dni: r.gen_range(750.0..950.0),
                    dhi: r.gen_range(80.0..140.0),
                    albedo: 0.2,
                },
                occluders,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationResult {
    pub location_id: String,
    pub comparison: DayComparison,
}

/// Simulates each location's day from `from_hour` to `to_hour` local time.
/// Latitude-tilted fixed panels use each location's own latitude.
pub fn simulate_batch(
    locations: &[Location],
    window: (u32, u32),
    interval_min: f64,
    grid: SphereGrid,
    strategies: &[Strategy],
    panel: &PanelModel,
    actuator: &ActuatorModel,
) -> Result<Vec<LocationResult>> {
    let one = |loc: &Location| -> Result<LocationResult> {
        let seq = loc.day(window.0, window.1, interval_min, grid)?;
        let local: Vec<Strategy> = strategies.iter().map(|s| at_latitude(*s, loc.latitude_deg)).collect();
        Ok(LocationResult {
            location_id: loc.id.clone(),
            comparison: compare_day(&seq, interval_min, &local, panel, actuator)?,
        })
    };
    #[cfg(feature = "parallel")]
    return locations.par_iter().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    locations.iter().map(one).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub strategy: String,
    pub mean_pct_of_optimal: f64,
    pub median_pct_of_optimal: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and median percentage of optimal per strategy across locations.
pub fn batch_stats(results: &[LocationResult]) -> Vec<BatchStats> {
    let Some(first) = results.first() else {
        return Vec::new();
    };
    first
        .comparison
        .rows
        .iter()
        .map(|row| {
            let pcts: Vec<f64> = results
                .iter()
                .filter_map(|r| r.comparison.row(&row.strategy))
                .map(|r| r.pct_of_optimal)
                .collect();
            BatchStats {
                strategy: row.strategy.clone(),
                mean_pct_of_optimal: mean(&pcts),
                median_pct_of_optimal: median(pcts),
            }
        })
        .collect()
}

/// CSV with header `location_id,strategy,harvested_j,actuator_j,net_j,pct_of_optimal`.
pub fn write_summary_csv(results: &[LocationResult], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "location_id,strategy,harvested_j,actuator_j,net_j,pct_of_optimal")?;
    for res in results {
        let c = &res.comparison;
        for r in &c.rows {
            writeln!(
                out,
                "{},{},{:.4},{:.4},{:.4},{:.6}",
                res.location_id, r.strategy, r.harvested_j, r.actuator_j, r.net_j, r.pct_of_optimal
            )?;
        }
        writeln!(
            out,
            "{},{OPTIMAL},{:.4},0.0000,{:.4},100.000000",
            res.location_id, c.optimal.harvested_j, c.optimal.net_j
        )?;
    }
    Ok(())
}

/// Per-location distribution rows for `subject`: its gain over each baseline
/// and its percentage of optimal.
///
/// Header: `location_id,pct_of_optimal,gain_vs_<baseline>...`.
pub fn export_histograms(
    results: &[LocationResult],
    subject: &str,
    baselines: &[&str],
    mut out: impl Write,
) -> Result<()> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("no results to export".into()));
    }
    let io = |e| Error::io("<histogram>", e);
    write!(out, "location_id,pct_of_optimal").map_err(io)?;
    for b in baselines {
        write!(out, ",gain_vs_{b}").map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for res in results {
        let row = res
            .comparison
            .row(subject)
            .ok_or_else(|| Error::InvalidArgument(format!("strategy {subject} missing")))?;
        write!(out, "{},{}", res.location_id, row.pct_of_optimal).map_err(io)?;
        for b in baselines {
            let g = row
                .gain_over(b)
                .ok_or_else(|| Error::InvalidArgument(format!("baseline {b} missing")))?;
            write!(out, ",{g}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}

/// Intervals within `hours` of local solar noon with the sun up.
pub fn midday(sample: &DaySample, hours: f64) -> bool {
    sample.sun.above_horizon() && sample.sun.hour_angle_deg.abs() <= 15.0 * hours
}

/// Start of a local day at a fixed UTC offset, for callers building their
/// own windows.
pub fn local_midnight(date: NaiveDate, utc_offset_hours: i32) -> Option<DateTime<FixedOffset>> {
    let tz = FixedOffset::east_opt(utc_offset_hours * 3600)?;
    tz.from_local_datetime(&date.and_hms_opt(0, 0, 0)?).single()
}

/// `t + minutes`.
pub fn add_minutes(t: DateTime<FixedOffset>, minutes: i64) -> DateTime<FixedOffset> {
    t + Duration::minutes(minutes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::angle_between;

    fn grid() -> SphereGrid {
        SphereGrid::with_height(32)
    }

    fn nyc(month: u32, day: u32) -> Location {
        Location::open("nyc", 40.7128, -74.006, NaiveDate::from_ymd_opt(2023, month, day).unwrap(), -4)
    }

    #[test]
    fn ledger_identities() {
        let seq = nyc(6, 21).day(11, 13, 20.0, grid()).unwrap();
        let l = simulate_day(&seq, 20.0, &Strategy::proposed(), &PanelModel::default(), &ActuatorModel::default()).unwrap();
        assert_eq!(l.net_j, l.harvested_j - l.actuator_j);
        for r in &l.rows {
            assert_eq!(r.harvested_j, r.irradiance * 0.0625 * 0.2 * 1200.0);
            assert_eq!(r.actuator_j, r.axis_steps as f64 * DEFAULT_STEP_ENERGY_J);
        }
    }

    #[test]
    fn night_costs_and_yields_nothing() {
        let seq = nyc(6, 21).day(0, 3, 30.0, grid()).unwrap();
        for s in [Strategy::proposed(), Strategy::SunTracker, Strategy::FixedUp] {
            let l = simulate_day(&seq, 30.0, &s, &PanelModel::default(), &ActuatorModel::default()).unwrap();
            assert!(l.harvested_j.abs() < 1e-6 && l.actuator_j == 0.0, "{}", l.strategy);
        }
    }

    #[test]
    fn panel_area_scales_linearly() {
        let seq = nyc(3, 20).day(10, 12, 30.0, grid()).unwrap();
        let s = Strategy::proposed();
        let a = simulate_day(&seq, 30.0, &s, &PanelModel::default(), &ActuatorModel::default()).unwrap();
        let big = PanelModel { area_m2: 0.125, ..Default::default() };
        let b = simulate_day(&seq, 30.0, &s, &big, &ActuatorModel::default()).unwrap();
        assert!((b.harvested_j - 2.0 * a.harvested_j).abs() < 1e-9 * b.harvested_j);
        assert_eq!(a.actuator_j, b.actuator_j);
        assert!((b.net_j + b.actuator_j - 2.0 * (a.net_j + a.actuator_j)).abs() < 1e-9 * b.harvested_j);
    }

    #[test]
    fn free_actuation_never_loses() {
        let seq = nyc(3, 20).day(8, 16, 30.0, grid()).unwrap();
        let s = Strategy::proposed();
        let free = simulate_day(&seq, 30.0, &s, &PanelModel::default(), &ActuatorModel { joules_per_step: 0.0 }).unwrap();
        let paid = simulate_day(&seq, 30.0, &s, &PanelModel::default(), &ActuatorModel::default()).unwrap();
        assert!(free.net_j >= paid.net_j);
    }

    #[test]
    fn uniform_sky_day_is_optimal_for_all() {
        let mut loc = nyc(3, 20);
        loc.sky = SkyParams {
            clarity: 0.0,
            dni: 0.0,
            dhi: 100.0,
            albedo: 1.0,
        };
        let seq = loc.day(10, 14, 30.0, grid()).unwrap();
        let c = compare_day(
            &seq,
            30.0,
            &[Strategy::proposed(), Strategy::FixedUp, Strategy::GeodesicDome],
            &PanelModel::default(),
            &ActuatorModel::default(),
        )
        .unwrap();
        for r in &c.rows {
            assert!((r.pct_of_optimal - 100.0).abs() < 1.0, "{r:?}");
        }
    }

    #[test]
    fn sun_tracker_follows_the_sun() {
        let seq = nyc(6, 21).day(9, 15, 30.0, grid()).unwrap();
        let l = simulate_day(&seq, 30.0, &Strategy::SunTracker, &PanelModel::default(), &ActuatorModel::default()).unwrap();
        for (r, s) in l.rows.iter().zip(&seq) {
            assert!(angle_between(&r.orientation.normal, &s.sun.direction()) < 1e-9);
        }
        assert!(l.actuator_j > 0.0);
    }

    #[test]
    fn afternoon_shade_favors_proposed() {
        let mut loc = nyc(6, 21);
        // tall wall to the west
        loc.occluders = vec![Occluder::Wall {
            azimuth_deg: 180.0,
            top_elevation_deg: 75.0,
            albedo: 0.3,
        }];
        let seq = loc.day(13, 19, 20.0, grid()).unwrap();
        let c = compare_day(&seq, 20.0, &[Strategy::proposed(), Strategy::SunTracker], &PanelModel::default(), &ActuatorModel::default()).unwrap();
        assert!(c.row("proposed").unwrap().net_j > c.row("sun_tracker").unwrap().net_j);
    }

    #[test]
    fn clear_day_actuator_share_is_small() {
        let seq = nyc(6, 21).day(5, 20, 10.0, grid()).unwrap();
        let l = simulate_day(&seq, 10.0, &Strategy::proposed(), &PanelModel::default(), &ActuatorModel::default()).unwrap();
        let share = l.actuator_share_pct();
        assert!(share > 0.0 && share < 3.0, "{share}");
    }

    #[test]
    fn fixed_latitude_binds_site() {
        let s = at_latitude("fixed_latitude".parse().unwrap(), 40.0);
        assert_eq!(s, Strategy::FixedLatitude { latitude_deg: 40.0 });
        assert_eq!(at_latitude(Strategy::FixedUp, 40.0), Strategy::FixedUp);
        assert_eq!(urban_occluders(4), urban_occluders(4));
    }

    #[test]
    fn slew_step_counts() {
        let o = Orientation::zenith();
        assert_eq!(slew_steps(&o, &Direction::ZENITH, 5.0), 0);
        assert_eq!(slew_steps(&o, &Direction::from_angles_deg(10.0, 0.0), 5.0), 2);
        assert_eq!(slew_steps(&o, &Direction::from_angles_deg(12.0, 90.0), 5.0), 3);
    }

    #[test]
    fn histogram_means_match_comparison() {
        let locs = urban_batch(1, 2);
        let strategies = [Strategy::proposed(), Strategy::SunTracker, Strategy::FixedLatitude { latitude_deg: 35.0 }];
        let res = simulate_batch(&locs, (10, 12), 30.0, grid(), &strategies, &PanelModel::default(), &ActuatorModel::default()).unwrap();
        let mut buf = Vec::new();
        export_histograms(&res, "proposed", &["sun_tracker", "fixed_latitude"], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "location_id,pct_of_optimal,gain_vs_sun_tracker,gain_vs_fixed_latitude");
        assert_eq!(lines.len(), 3);
        let col: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        let stats = batch_stats(&res);
        let proposed = stats.iter().find(|s| s.strategy == "proposed").unwrap();
        assert_eq!(mean(&col), proposed.mean_pct_of_optimal);
        assert!(export_histograms(&[], "proposed", &[], Vec::new()).is_err());
    }

    #[test]
    fn urban_batch_is_seeded() {
        assert_eq!(urban_batch(5, 3), urban_batch(5, 3));
        assert_ne!(urban_batch(5, 3), urban_batch(6, 3));
    }

    #[test]
    fn summary_csv_layout() {
        let locs = vec![nyc(6, 21)];
        let res = simulate_batch(&locs, (12, 13), 30.0, grid(), &[Strategy::FixedUp], &PanelModel::default(), &ActuatorModel::default()).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&res, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "location_id,strategy,harvested_j,actuator_j,net_j,pct_of_optimal");
        assert!(lines[1].starts_with("nyc,fixed_up,"));
        assert!(lines[2].starts_with("nyc,optimal,"));
    }
}
