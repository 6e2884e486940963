//! Baseline orientation strategies: fixed panels, sun tracking and three
//! alternative minimal-sensing controllers.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::controller::{
    optima, orient, pct_of_optimal, ControllerConfig, ConvergenceReport, oscillating,
};
use crate::environment::RadianceMap;
use crate::error::{Error, Result};
use crate::sphere::{angle_between, tilt_toward, Direction, Orientation};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Zenith tilt of a regular tetrahedron's side-face normals.
pub const TETRAHEDRON_TILT_DEG: f64 = 70.528_779_365_509_31;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    FixedUp,
    FixedLatitude { latitude_deg: f64 },
    SunTracker,
    Tetrahedron { config: ControllerConfig },
    ShadingWall { config: ControllerConfig },
    GeodesicDome,
    Proposed { config: ControllerConfig },
}

impl Strategy {
    pub fn proposed() -> Self {
        Strategy::Proposed {
            config: ControllerConfig::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::FixedUp => "fixed_up",
            Strategy::FixedLatitude { .. } => "fixed_latitude",
            Strategy::SunTracker => "sun_tracker",
            Strategy::Tetrahedron { .. } => "tetrahedron",
            Strategy::ShadingWall { .. } => "shading_wall",
            Strategy::GeodesicDome => "geodesic_dome",
            Strategy::Proposed { .. } => "proposed",
        }
    }

    /// Light sensors the strategy carries.
    pub fn num_sensors(&self) -> usize {
        match self {
            Strategy::FixedUp | Strategy::FixedLatitude { .. } | Strategy::SunTracker => 0,
            Strategy::Tetrahedron { .. } => 3,
            Strategy::ShadingWall { .. } | Strategy::Proposed { .. } => 4,
            Strategy::GeodesicDome => DOME_SIZE,
        }
    }

    /// Whether the outcome depends on the starting orientation.
    pub fn is_iterative(&self) -> bool {
        matches!(
            self,
            Strategy::Tetrahedron { .. } | Strategy::ShadingWall { .. } | Strategy::Proposed { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Strategy::FixedLatitude { latitude_deg } if latitude_deg.abs() > 90.0 => Err(
                Error::InvalidArgument(format!("latitude {latitude_deg} outside [-90, 90]")),
            ),
            Strategy::Tetrahedron { config }
            | Strategy::ShadingWall { config }
            | Strategy::Proposed { config } => config.validate(),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a strategy name; parameterized kinds take default parameters
/// (latitude 0 for `fixed_latitude`).
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let config = ControllerConfig::default();
        Ok(match s {
            "fixed_up" => Strategy::FixedUp,
            "fixed_latitude" => Strategy::FixedLatitude { latitude_deg: 0.0 },
            "sun_tracker" => Strategy::SunTracker,
            "tetrahedron" => Strategy::Tetrahedron { config },
            "shading_wall" => Strategy::ShadingWall { config },
            "geodesic_dome" => Strategy::GeodesicDome,
            "proposed" => Strategy::Proposed { config },
            _ => {
                return Err(Error::Parse {
                    what: "strategy",
                    input: s.to_string(),
                })
            }
        })
    }
}

/// Panel orientation of a fixed strategy.
pub fn fixed_orientation(strategy: &Strategy) -> Result<Orientation> {
    strategy.validate()?;
    match *strategy {
        Strategy::FixedUp => Ok(Orientation::zenith()),
        Strategy::FixedLatitude { latitude_deg } => {
            // +y is north; face the equator
            let azimuth = if latitude_deg >= 0.0 { 270.0 } else { 90.0 };
            Ok(Orientation::from_angles_deg(latitude_deg.abs(), azimuth))
        }
        _ => Err(Error::InvalidArgument(format!("{strategy} is not a fixed strategy"))),
    }
}

/// Iterates `choose` from `start`: each call returns the tangent azimuth to
/// tilt toward, or `None` when balanced.
fn tilt_loop(
    map: &RadianceMap,
    start: &Orientation,
    cfg: &ControllerConfig,
    mut choose: impl FnMut(&Orientation) -> Option<f64>,
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let mut o = start.with_upper_hemisphere(true);
    let mut trajectory = vec![o];
    let mut iterations = 0;
    let mut axis_steps = 0;
    let converged = loop {
        let Some(azimuth) = choose(&o) else {
            break true;
        };
        if iterations == cfg.max_iters {
            break false;
        }
        let next = tilt_toward(&o, azimuth, cfg.step_deg);
        if angle_between(&next.normal, &o.normal) < 1e-9 {
            break true;
        }
        let (s, c) = azimuth.to_radians().sin_cos();
        axis_steps += (c.abs() > 1e-9) as usize + (s.abs() > 1e-9) as usize;
        o = next;
        trajectory.push(o);
        iterations += 1;
        if oscillating(&trajectory, cfg.step_deg) {
            break true;
        }
    };
    Ok(ConvergenceReport {
        final_orientation: o,
        iterations,
        trajectory,
        converged,
        final_irradiance: map.irradiance(&o.normal),
        axis_steps,
    })
}

/// Three detectors canted at the tetrahedral angle, 120° apart; the panel
/// tilts toward the brightest until their spread is within threshold.
pub fn orient_tetrahedron(map: &RadianceMap, start: &Orientation, cfg: &ControllerConfig) -> Result<ConvergenceReport> {
    tilt_loop(map, start, cfg, |o| {
        let free = o.with_upper_hemisphere(false);
        let readings: Vec<(f64, f64)> = [0.0, 120.0, 240.0]
            .iter()
            .map(|&az| (az, map.irradiance(&tilt_toward(&free, az, TETRAHEDRON_TILT_DEG).normal)))
            .collect();
        let mean = readings.iter().map(|r| r.1).sum::<f64>() / 3.0;
        let (lo, hi) = readings
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.1), hi.max(r.1)));
        if hi - lo <= cfg.threshold * mean {
            return None;
        }
        readings
            .iter()
            .find(|r| r.1 == hi)
            .map(|r| r.0)
    })
}

/// Two detector pairs in the panel plane, each pair split by an opaque wall
/// through the panel center; a detector sees only its side of the wall.
pub fn orient_shading_wall(map: &RadianceMap, start: &Orientation, cfg: &ControllerConfig) -> Result<ConvergenceReport> {
    tilt_loop(map, start, cfg, |o| {
        let n = o.normal;
        let pu = map.half_irradiance(&n, &o.u);
        let mu = map.half_irradiance(&n, &o.u.neg());
        let pv = map.half_irradiance(&n, &o.v);
        let mv = map.half_irradiance(&n, &o.v.neg());
        let limit = cfg.threshold * (pu + mu + pv + mv) / 4.0;
        let du = if (pu - mu).abs() > limit { (pu - mu).signum() } else { 0.0 };
        let dv = if (pv - mv).abs() > limit { (pv - mv).signum() } else { 0.0 };
        if du == 0.0 && dv == 0.0 {
            None
        } else {
            Some(dv.atan2(du).to_degrees())
        }
    })
}

pub const DOME_SIZE: usize = 40;

/// Dome detector directions: the zenith, then rings of 8, 14 and 17 at
/// zenith 25°, 50° and 75°, each ring offset by half its spacing from the
/// one below.
pub fn dome_directions() -> Vec<Direction> {
    let mut out = vec![Direction::ZENITH];
    let mut offset = 0.0;
    for (count, zenith) in [(8usize, 25.0), (14, 50.0), (17, 75.0)] {
        let spacing = 360.0 / count as f64;
        for k in 0..count {
            out.push(Direction::from_angles_deg(zenith, offset + k as f64 * spacing));
        }
        offset += 0.5 * spacing;
    }
    out
}

/// The brightest dome direction; earlier (lower-zenith) directions win ties.
pub fn orient_geodesic_dome(map: &RadianceMap) -> Orientation {
    let mut best = (Direction::ZENITH, f64::NEG_INFINITY);
    for d in dome_directions() {
        let e = map.irradiance(&d);
        if e > best.1 {
            best = (d, e);
        }
    }
    Orientation::facing(best.0)
}

/// Where a strategy leaves the panel on a static scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub orientation: Orientation,
    pub irradiance: f64,
    pub axis_steps: usize,
    pub converged: bool,
}

impl From<ConvergenceReport> for Outcome {
    fn from(r: ConvergenceReport) -> Self {
        Outcome {
            orientation: r.final_orientation,
            irradiance: r.final_irradiance,
            axis_steps: r.axis_steps,
            converged: r.converged,
        }
    }
}

/// Runs `strategy` on a static scene. The sun tracker needs a timestamp and
/// is rejected here.
pub fn run_static(strategy: &Strategy, map: &RadianceMap, start: &Orientation) -> Result<Outcome> {
    strategy.validate()?;
    let still = |o: Orientation| Outcome {
        orientation: o,
        irradiance: map.irradiance(&o.normal),
        axis_steps: 0,
        converged: true,
    };
    Ok(match strategy {
        Strategy::FixedUp | Strategy::FixedLatitude { .. } => still(fixed_orientation(strategy)?),
        Strategy::GeodesicDome => still(orient_geodesic_dome(map)),
        Strategy::Tetrahedron { config } => orient_tetrahedron(map, start, config)?.into(),
        Strategy::ShadingWall { config } => orient_shading_wall(map, start, config)?.into(),
        Strategy::Proposed { config } => orient(map, start, config)?.into(),
        Strategy::SunTracker => {
            return Err(Error::InvalidArgument(
                "sun_tracker needs a sun position and cannot run on a static scene".into(),
            ))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub strategy: String,
    pub mean_pct_of_optimal: f64,
    pub num_sensors: usize,
}

/// Per-map percentages of optimal for one strategy, averaged over starts
/// for iterative strategies.
pub fn strategy_scores(
    strategy: &Strategy,
    maps: &[RadianceMap],
    optima: &[f64],
    starts: &[Orientation],
) -> Result<Vec<f64>> {
    let starts = if strategy.is_iterative() {
        starts
    } else {
        &starts[..1.min(starts.len())]
    };
    let one = |(map, &opt): (&RadianceMap, &f64)| -> Result<f64> {
        let mut total = 0.0;
        for s in starts {
            total += pct_of_optimal(run_static(strategy, map, s)?.irradiance, opt);
        }
        Ok(total / starts.len() as f64)
    };
    #[cfg(feature = "parallel")]
    return maps.par_iter().zip(optima).map(one).collect();
    #[cfg(not(feature = "parallel"))]
    maps.iter().zip(optima).map(one).collect()
}

/// Mean percentage of optimal irradiance per strategy over a corpus.
pub fn benchmark(maps: &[RadianceMap], strategies: &[Strategy], starts: &[Orientation]) -> Result<Vec<BenchmarkRow>> {
    if maps.is_empty() || strategies.is_empty() || starts.is_empty() {
        return Err(Error::InvalidArgument("benchmark needs maps, strategies and starts".into()));
    }
    let opt = optima(maps);
    strategies
        .iter()
        .map(|s| {
            let scores = strategy_scores(s, maps, &opt, starts)?;
            Ok(BenchmarkRow {
                strategy: s.name().to_string(),
                mean_pct_of_optimal: scores.iter().sum::<f64>() / scores.len() as f64,
                num_sensors: s.num_sensors(),
            })
        })
        .collect()
}

/// CSV with header `strategy,mean_pct_of_optimal,num_sensors,corpus,maps,starts`.
pub fn write_benchmark_csv(
    rows: &[BenchmarkRow],
    corpus: &str,
    maps: usize,
    starts: usize,
    mut out: impl Write,
) -> std::io::Result<()> {
    writeln!(out, "strategy,mean_pct_of_optimal,num_sensors,corpus,maps,starts")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{},{corpus},{maps},{starts}",
            r.strategy, r.mean_pct_of_optimal, r.num_sensors
        )?;
    }
    Ok(())
}
