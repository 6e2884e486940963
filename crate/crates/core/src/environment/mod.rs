//! Radiance functions over the sphere: equirectangular maps, synthetic scenes,
//! the solar disk and PFM file I/O.

mod pfm;
mod scene;

use std::sync::Arc;

pub use pfm::{load_radiance_map, read_pfm, save_radiance_map, write_pfm};
pub use scene::{paint_sun_disk, sun_disk_radiance, synth_scene, Lobe, Occluder, SceneRecipe};

use crate::error::{Error, Result};
use crate::sphere::{Direction, SphereGrid};

/// Default angular radius of the solar disk, degrees.
pub const SUN_DISK_RADIUS_DEG: f64 = 0.266;

/// Texels with non-zero radiance in structure-of-arrays form, each weighted by
/// `L · dω` so that irradiance is a single dot-and-clip reduction.
#[derive(Debug, Default)]
pub(crate) struct WeightedSamples {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug)]
struct MapData {
    values: Vec<f64>,
    samples: WeightedSamples,
}

/// Single-channel equirectangular radiance map in W/(m²·sr).
///
/// Row 0 is the zenith row. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct RadianceMap {
    grid: SphereGrid,
    data: Arc<MapData>,
}

impl PartialEq for RadianceMap {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.data.values == other.data.values
    }
}

impl RadianceMap {
    /// Validates and wraps row-major texel values.
    pub fn new(grid: SphereGrid, values: Vec<f64>) -> Result<Self> {
        if grid.width != 2 * grid.height || grid.height == 0 {
            return Err(Error::DimensionMismatch {
                width: grid.width,
                height: grid.height,
            });
        }
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} texels, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidTexel {
                row: i / grid.width,
                col: i % grid.width,
                value: values[i],
            });
        }
        let samples = weigh(&grid, &values);
        Ok(RadianceMap {
            grid,
            data: Arc::new(MapData { values, samples }),
        })
    }

    pub fn uniform(grid: SphereGrid, radiance: f64) -> Result<Self> {
        Self::new(grid, vec![radiance; grid.len()])
    }

    /// Builds a map by evaluating `f` at every texel center.
    pub fn from_fn(grid: SphereGrid, f: impl Fn(&Direction) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for row in 0..grid.height {
            for col in 0..grid.width {
                values.push(f(&grid.direction_unchecked(row, col)));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> SphereGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data.values
    }

    pub fn into_values(self) -> Vec<f64> {
        match Arc::try_unwrap(self.data) {
            Ok(d) => d.values,
            Err(shared) => shared.values.clone(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data.values[row * self.grid.width + col]
    }

    pub fn max_value(&self) -> f64 {
        self.data.values.iter().copied().fold(0.0, f64::max)
    }

    /// `Σ L(s) · max(n·s, 0) · dω` over all texels.
    pub fn irradiance(&self, normal: &Direction) -> f64 {
        let s = &self.data.samples;
        let (nx, ny, nz) = (normal.x, normal.y, normal.z);
        let mut acc = 0.0;
        for i in 0..s.w.len() {
            let c = nx * s.x[i] + ny * s.y[i] + nz * s.z[i];
            acc += s.w[i] * c.max(0.0);
        }
        acc
    }

    /// Irradiance restricted to directions with `side · s > 0`.
    ///
    /// Texels straddling the dividing plane count by their approximate
    /// covered fraction, so a symmetric scene splits evenly.
    pub fn half_irradiance(&self, normal: &Direction, side: &Direction) -> f64 {
        let s = &self.data.samples;
        let half_width = 0.5 * std::f64::consts::PI / self.grid.height as f64;
        let mut acc = 0.0;
        for i in 0..s.w.len() {
            let c = normal.x * s.x[i] + normal.y * s.y[i] + normal.z * s.z[i];
            if c <= 0.0 {
                continue;
            }
            let h = side.x * s.x[i] + side.y * s.y[i] + side.z * s.z[i];
            let fraction = (0.5 + 0.5 * h / half_width).clamp(0.0, 1.0);
            acc += s.w[i] * c * fraction;
        }
        acc
    }

    /// `α·self + β·other` on the same grid.
    pub fn linear_combination(&self, alpha: f64, other: &RadianceMap, beta: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("grid mismatch".into()));
        }
        let values = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Self::new(self.grid, values)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values().iter().map(|v| v * factor).collect())
    }

    /// Rotates the map about +z by a whole number of columns
    /// (`columns · 360° / width`).
    pub fn rotate_columns(&self, columns: usize) -> Self {
        let (w, h) = (self.grid.width, self.grid.height);
        let mut values = vec![0.0; w * h];
        for r in 0..h {
            for c in 0..w {
                values[r * w + (c + columns) % w] = self.get(r, c);
            }
        }
        Self::new(self.grid, values).expect("rotation preserves validity")
    }
}

fn weigh(grid: &SphereGrid, values: &[f64]) -> WeightedSamples {
    let mut s = WeightedSamples::default();
    for row in 0..grid.height {
        let dw = grid.row_weight(row);
        for col in 0..grid.width {
            let l = values[row * grid.width + col];
            if l > 0.0 {
                let d = grid.direction_unchecked(row, col);
                s.x.push(d.x);
                s.y.push(d.y);
                s.z.push(d.z);
                s.w.push(l * dw);
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_texels() {
        let g = SphereGrid::new(4, 2);
        let mut v = vec![1.0; 8];
        v[5] = f64::NAN;
        match RadianceMap::new(g, v) {
            Err(Error::InvalidTexel { row: 1, col: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let mut v = vec![1.0; 8];
        v[2] = -0.5;
        assert!(matches!(
            RadianceMap::new(g, v),
            Err(Error::InvalidTexel { row: 0, col: 2, .. })
        ));
        assert!(matches!(
            RadianceMap::new(SphereGrid::new(4, 4), vec![1.0; 16]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rotate_columns_wraps() {
        let g = SphereGrid::new(4, 2);
        let m = RadianceMap::new(g, (0..8).map(f64::from).collect()).unwrap();
        let r = m.rotate_columns(1);
        assert_eq!(r.values(), &[3.0, 0.0, 1.0, 2.0, 7.0, 4.0, 5.0, 6.0]);
    }
}
