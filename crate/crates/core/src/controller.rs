//! Threshold-gated, fixed-step sign ascent on the photodifferential.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::RadianceMap;
use crate::error::{Error, Result};
use crate::irradiance::{global_optimum, irradiance_field};
use crate::photodiff::read_photodifferential;
use crate::sphere::{angle_between, rotate_toward, Orientation, TangentAxis};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub delta_theta_deg: f64,
    pub step_deg: f64,
    /// An axis actuates when its detector difference exceeds this fraction of
    /// the mean detector reading.
    pub threshold: f64,
    pub max_iters: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            delta_theta_deg: 45.0,
            step_deg: 5.0,
            threshold: 0.01,
            max_iters: 200,
        }
    }
}

impl ControllerConfig {
    pub fn with_delta_theta(mut self, deg: f64) -> Self {
        self.delta_theta_deg = deg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.step_deg > 0.0 && self.step_deg.is_finite()) {
            return bad("step must be positive");
        }
        if !(self.delta_theta_deg > 0.0 && self.delta_theta_deg <= 90.0) {
            return bad("delta theta must lie in (0, 90] degrees");
        }
        if self.threshold.is_nan() || self.threshold < 0.0 {
            return bad("threshold must be non-negative");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub final_orientation: Orientation,
    /// Actuated iterations; `trajectory.len() == iterations + 1`.
    pub iterations: usize,
    pub trajectory: Vec<Orientation>,
    pub converged: bool,
    pub final_irradiance: f64,
    /// Single-axis steps taken, the unit of actuator cost.
    pub axis_steps: usize,
}

impl ConvergenceReport {
    /// CSV with header `iteration,zenith_deg,azimuth_deg,irradiance_w_m2`.
    pub fn write_trajectory_csv(&self, map: &RadianceMap, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "iteration,zenith_deg,azimuth_deg,irradiance_w_m2")?;
        for (i, o) in self.trajectory.iter().enumerate() {
            writeln!(
                out,
                "{i},{:.6},{:.6},{:.6}",
                o.zenith_deg(),
                o.azimuth_deg(),
                map.irradiance(&o.normal)
            )?;
        }
        Ok(())
    }
}

/// True when the newest orientation lands back on the one two steps
/// earlier, i.e. the panel has stepped away and straight back.
pub(crate) fn oscillating(trajectory: &[Orientation], step_deg: f64) -> bool {
    let n = trajectory.len();
    n >= 3 && angle_between(&trajectory[n - 1].normal, &trajectory[n - 3].normal) < 0.25 * step_deg
}

/// Runs the controller from `start` until both axes fall under threshold,
/// the panel cannot move, it oscillates in place, or `max_iters` is reached.
pub fn orient(map: &RadianceMap, start: &Orientation, cfg: &ControllerConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let mut o = start.with_upper_hemisphere(true);
    let mut trajectory = vec![o];
    let mut iterations = 0;
    let mut axis_steps = 0;
    let gate = 2.0 * cfg.delta_theta_deg.to_radians();

    let converged = loop {
        let r = read_photodifferential(map, &o, cfg.delta_theta_deg)?;
        let limit = cfg.threshold * r.mean_reading();
        let act_u = (r.e_d_u * gate).abs() > limit;
        let act_v = (r.e_d_v * gate).abs() > limit;
        if !act_u && !act_v {
            break true;
        }
        if iterations == cfg.max_iters {
            break false;
        }
        let mut next = o;
        if act_u {
            next = rotate_toward(&next, TangentAxis::U, cfg.step_deg.copysign(r.e_d_u));
        }
        if act_v {
            next = rotate_toward(&next, TangentAxis::V, cfg.step_deg.copysign(r.e_d_v));
        }
        if angle_between(&next.normal, &o.normal) < 1e-9 {
            // pinned against the horizon
            break true;
        }
        o = next;
        trajectory.push(o);
        iterations += 1;
        axis_steps += act_u as usize + act_v as usize;
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

/// `count` upper-hemisphere orientations on an equal-area Fibonacci spiral,
/// rotated about +z by a seeded random angle.
pub fn fibonacci_starts(count: usize, seed: u64) -> Vec<Orientation> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let offset = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..std::f64::consts::TAU);
    (0..count)
        .map(|k| {
            let z: f64 = 1.0 - (k as f64 + 0.5) / count as f64;
            let az = (offset + k as f64 * golden).to_degrees().rem_euclid(360.0);
            Orientation::from_angles_deg(z.acos().to_degrees(), az)
        })
        .collect()
}

/// Best irradiance reachable on `map`: the refined field optimum.
pub fn optimum_value(map: &RadianceMap) -> f64 {
    global_optimum(&irradiance_field(map, 31, 120)).1
}

/// `value` as a percentage of `optimum`, capped at 100 when the search
/// grid's optimum falls short of an orientation found elsewhere.
pub fn pct_of_optimal(value: f64, optimum: f64) -> f64 {
    let best = optimum.max(value);
    if best <= 0.0 {
        100.0
    } else {
        100.0 * value / best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta_theta_deg: f64,
    pub mean_pct_of_optimal: f64,
}

/// Per-map mean percentage of optimal for one tilt.
pub fn map_scores(
    maps: &[RadianceMap],
    optima: &[f64],
    starts: &[Orientation],
    cfg: &ControllerConfig,
) -> Result<Vec<f64>> {
    let score = |(map, &opt): (&RadianceMap, &f64)| -> Result<f64> {
        let mut total = 0.0;
        for s in starts {
            total += pct_of_optimal(orient(map, s, cfg)?.final_irradiance, opt);
        }
        Ok(total / starts.len() as f64)
    };
    #[cfg(feature = "parallel")]
    return maps.par_iter().zip(optima).map(score).collect();
    #[cfg(not(feature = "parallel"))]
    maps.iter().zip(optima).map(score).collect()
}

pub fn optima(maps: &[RadianceMap]) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    return maps.par_iter().map(optimum_value).collect();
    #[cfg(not(feature = "parallel"))]
    maps.iter().map(optimum_value).collect()
}

/// Mean percentage of optimal irradiance for each detector tilt, averaged
/// over starts and then over maps.
pub fn sweep_tilt(
    maps: &[RadianceMap],
    tilts_deg: &[f64],
    starts: &[Orientation],
    template: &ControllerConfig,
) -> Result<Vec<SweepRow>> {
    if maps.is_empty() || tilts_deg.is_empty() || starts.is_empty() {
        return Err(Error::InvalidArgument("sweep needs maps, tilts and starts".into()));
    }
    let opt = optima(maps);
    tilts_deg
        .iter()
        .map(|&t| {
            let scores = map_scores(maps, &opt, starts, &template.with_delta_theta(t))?;
            Ok(SweepRow {
                delta_theta_deg: t,
                mean_pct_of_optimal: scores.iter().sum::<f64>() / scores.len() as f64,
            })
        })
        .collect()
}

/// CSV with header `delta_theta_deg,mean_pct_of_optimal,corpus,seed_count`.
pub fn write_sweep_csv(rows: &[SweepRow], corpus: &str, seed_count: usize, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "delta_theta_deg,mean_pct_of_optimal,corpus,seed_count")?;
    for r in rows {
        writeln!(out, "{},{:.6},{corpus},{seed_count}", r.delta_theta_deg, r.mean_pct_of_optimal)?;
    }
    Ok(())
}
