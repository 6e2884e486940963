use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RadianceMap;
use crate::error::{Error, Result};
use crate::sphere::{angle_between, Direction, SphereGrid};

/// A smooth radiance lobe with squared-exponential angular falloff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub direction: Direction,
    pub width_deg: f64,
    pub peak: f64,
}

impl Lobe {
    pub fn new(zenith_deg: f64, azimuth_deg: f64, width_deg: f64, peak: f64) -> Self {
        Lobe {
            direction: Direction::from_angles_deg(zenith_deg, azimuth_deg),
            width_deg,
            peak,
        }
    }

    pub fn radiance(&self, s: &Direction) -> f64 {
        let g = angle_between(&self.direction, s) / self.width_deg;
        self.peak * (-g * g).exp()
    }
}

/// Region of the sphere hidden behind an obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Occluder {
    /// Infinite vertical wall on the side facing azimuth `azimuth_deg`, whose top
    /// edge appears `top_elevation_deg` above the horizon when viewed head-on.
    /// Blocks every direction toward the wall that passes below the top edge.
    Wall {
        azimuth_deg: f64,
        top_elevation_deg: f64,
        albedo: f64,
    },
    /// Box in (zenith, azimuth) space; the azimuth range may wrap through 0°.
    Rect {
        zenith_min_deg: f64,
        zenith_max_deg: f64,
        azimuth_min_deg: f64,
        azimuth_max_deg: f64,
        albedo: f64,
    },
}

impl Occluder {
    pub fn albedo(&self) -> f64 {
        match *self {
            Occluder::Wall { albedo, .. } | Occluder::Rect { albedo, .. } => albedo,
        }
    }

    pub fn blocks(&self, s: &Direction) -> bool {
        match *self {
            Occluder::Wall {
                azimuth_deg,
                top_elevation_deg,
                ..
            } => {
                let (sa, ca) = azimuth_deg.to_radians().sin_cos();
                let toward = s.x * ca + s.y * sa;
                toward > 0.0 && s.z < top_elevation_deg.to_radians().tan() * toward
            }
            Occluder::Rect {
                zenith_min_deg,
                zenith_max_deg,
                azimuth_min_deg,
                azimuth_max_deg,
                ..
            } => {
                let zen = s.zenith_deg();
                if zen < zenith_min_deg || zen > zenith_max_deg {
                    return false;
                }
                if azimuth_max_deg - azimuth_min_deg >= 360.0 {
                    return true;
                }
                let az = s.azimuth_deg();
                let (lo, hi) = (
                    azimuth_min_deg.rem_euclid(360.0),
                    azimuth_max_deg.rem_euclid(360.0),
                );
                if lo <= hi {
                    az >= lo && az <= hi
                } else {
                    az >= lo || az <= hi
                }
            }
        }
    }

    /// Outward normal of the visible face, when the obstacle has one.
    pub fn face_normal(&self) -> Option<Direction> {
        match *self {
            Occluder::Wall { azimuth_deg, .. } => {
                Some(Direction::from_angles_deg(90.0, azimuth_deg + 180.0))
            }
            Occluder::Rect { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let a = self.albedo();
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidArgument(format!("occluder albedo {a} outside [0, 1]")));
        }
        Ok(())
    }
}

/// Recipe for a seeded synthetic environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecipe {
    pub seed: u64,
    pub lobes: Vec<Lobe>,
    pub ambient: f64,
    #[serde(default)]
    pub occluders: Vec<Occluder>,
    /// Amplitude of seeded multiplicative per-texel texture, `[0, 1)`.
    #[serde(default)]
    pub texture: f64,
}

impl SceneRecipe {
    pub fn uniform(ambient: f64) -> Self {
        SceneRecipe {
            seed: 0,
            lobes: Vec::new(),
            ambient,
            occluders: Vec::new(),
            texture: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ambient >= 0.0) {
            return Err(Error::InvalidArgument("ambient must be >= 0".into()));
        }
        for l in &self.lobes {
            if !(l.peak >= 0.0) || !(l.width_deg > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "lobe needs peak >= 0 and width > 0, got {l:?}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.texture) {
            return Err(Error::InvalidArgument("texture must lie in [0, 1)".into()));
        }
        self.occluders.iter().try_for_each(Occluder::validate)
    }
}

/// Evaluates `ambient + Σ lobes`, times occluder albedo factors, at every texel.
pub fn synth_scene(recipe: &SceneRecipe, grid: SphereGrid) -> Result<RadianceMap> {
    recipe.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let mut values = Vec::with_capacity(grid.len());
    for row in 0..grid.height {
        for col in 0..grid.width {
            let s = grid.direction_unchecked(row, col);
            let mut l = recipe.ambient + recipe.lobes.iter().map(|b| b.radiance(&s)).sum::<f64>();
            for occ in &recipe.occluders {
                if occ.blocks(&s) {
                    l *= occ.albedo();
                }
            }
            if recipe.texture > 0.0 {
                l *= 1.0 + recipe.texture * rng.gen_range(-1.0..1.0);
            }
            values.push(l);
        }
    }
    RadianceMap::new(grid, values)
}

/// Map containing only a uniform solar disk; see [`paint_sun_disk`].
pub fn sun_disk_radiance(
    grid: SphereGrid,
    sun: &Direction,
    radius_deg: f64,
    irradiance_at_normal: f64,
) -> Result<RadianceMap> {
    let mut values = vec![0.0; grid.len()];
    paint_sun_disk(&mut values, grid, sun, radius_deg, irradiance_at_normal)?;
    RadianceMap::new(grid, values)
}

/// Adds a uniform disk of angular radius `radius_deg` centered on `sun`.
///
/// Texel coverage is supersampled, then the disk radiance is set so that the
/// grid quadrature of `L · max(sun·s, 0)` equals `irradiance_at_normal`.
pub fn paint_sun_disk(
    values: &mut [f64],
    grid: SphereGrid,
    sun: &Direction,
    radius_deg: f64,
    irradiance_at_normal: f64,
) -> Result<()> {
    if !(radius_deg > 0.0) {
        return Err(Error::InvalidArgument("sun disk radius must be > 0".into()));
    }
    if values.len() != grid.len() {
        return Err(Error::InvalidArgument("value buffer does not match grid".into()));
    }
    let r = radius_deg.to_radians();
    let cos_r = r.cos();
    let dtheta = PI / grid.height as f64;
    let dphi = 2.0 * PI / grid.width as f64;
    let k = ((4.0 * dtheta / r).ceil() as usize).clamp(2, 64);

    let ts = sun.theta();
    let row_lo = (((ts - r) / dtheta).floor() - 1.0).max(0.0) as usize;
    let row_hi = ((((ts + r) / dtheta).ceil() + 1.0) as usize).min(grid.height - 1);

    // azimuth half-span of the disk, widened by one texel
    let cap_lo = ts - r - dtheta;
    let cap_hi = ts + r + dtheta;
    let span = if cap_lo <= 0.0 || cap_hi >= PI {
        PI
    } else {
        let ratio = r.sin() / cap_lo.sin().min(cap_hi.sin());
        if ratio >= 1.0 {
            PI
        } else {
            (ratio.asin() + 2.0 * dphi).min(PI)
        }
    };

    let mut coverage: Vec<(usize, f64)> = Vec::new();
    for row in row_lo..=row_hi {
        let theta0 = row as f64 * dtheta;
        let half = (span / dphi).ceil() as isize + 1;
        let cols: Vec<usize> = if span >= PI || 2 * half + 1 >= grid.width as isize {
            (0..grid.width).collect()
        } else {
            let center = sun.phi() / dphi;
            let c0 = center.floor() as isize;
            (c0 - half..=c0 + half)
                .map(|c| c.rem_euclid(grid.width as isize) as usize)
                .collect()
        };
        for col in cols {
            let phi0 = col as f64 * dphi;
            let (mut inside, mut total) = (0.0, 0.0);
            for i in 0..k {
                let th = theta0 + (i as f64 + 0.5) * dtheta / k as f64;
                let w = th.sin();
                for j in 0..k {
                    let ph = phi0 + (j as f64 + 0.5) * dphi / k as f64;
                    total += w;
                    if Direction::from_spherical(th, ph).dot(sun) >= cos_r {
                        inside += w;
                    }
                }
            }
            if inside > 0.0 {
                coverage.push((row * grid.width + col, inside / total));
            }
        }
    }
    if coverage.is_empty() {
        let (row, col) = grid.direction_to_texel(sun);
        coverage.push((row * grid.width + col, 1.0));
    }

    let quadrature: f64 = coverage
        .iter()
        .map(|&(i, frac)| {
            let (row, col) = (i / grid.width, i % grid.width);
            let s = grid.direction_unchecked(row, col);
            frac * grid.row_weight(row) * s.dot(sun).max(0.0)
        })
        .sum();
    if quadrature <= 0.0 {
        return Err(Error::InvalidArgument("sun disk covers no visible texel".into()));
    }
    let radiance = irradiance_at_normal / quadrature;
    for (i, frac) in coverage {
        values[i] += radiance * frac;
    }
    Ok(())
}
