//! Panel irradiance as a spherical convolution of radiance with the clipped
//! cosine kernel, sampled over every upper-hemisphere orientation.

use std::io::Write;

use crate::environment::RadianceMap;
use crate::modes;
use crate::sphere::{angle_between, Direction, Orientation};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default field sampling: 1° in zenith and azimuth.
pub const DEFAULT_ZENITH_STEPS: usize = 91;
pub const DEFAULT_AZIMUTH_STEPS: usize = 360;

/// The clipped cosine kernel `k(n) = max(n·ẑ, 0)`.
pub fn clipped_cosine(n: &Direction) -> f64 {
    n.z.max(0.0)
}

/// Total irradiance (W/m²) on a panel with normal `normal`.
pub fn total_irradiance(map: &RadianceMap, normal: &Direction) -> f64 {
    map.irradiance(normal)
}

/// Irradiance sampled on a regular (zenith, azimuth) grid of panel normals
/// covering zenith `[0°, 90°]` and azimuth `[0°, 360°)`.
#[derive(Debug, Clone)]
pub struct IrradianceField {
    pub zenith_steps: usize,
    pub azimuth_steps: usize,
    /// Zenith-major: `values[i * azimuth_steps + j]`.
    pub values: Vec<f64>,
    source: Option<RadianceMap>,
}

impl IrradianceField {
    /// Wraps precomputed samples, e.g. for analysis of an externally built field.
    pub fn from_values(zenith_steps: usize, azimuth_steps: usize, values: Vec<f64>) -> Self {
        assert!(zenith_steps >= 2 && azimuth_steps >= 2);
        assert_eq!(values.len(), zenith_steps * azimuth_steps);
        IrradianceField {
            zenith_steps,
            azimuth_steps,
            values,
            source: None,
        }
    }

    pub fn zenith_step_deg(&self) -> f64 {
        90.0 / (self.zenith_steps - 1) as f64
    }

    pub fn azimuth_step_deg(&self) -> f64 {
        360.0 / self.azimuth_steps as f64
    }

    pub fn angles_deg(&self, i: usize, j: usize) -> (f64, f64) {
        (
            i as f64 * self.zenith_step_deg(),
            j as f64 * self.azimuth_step_deg(),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.azimuth_steps + j]
    }

    pub fn source(&self) -> Option<&RadianceMap> {
        self.source.as_ref()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `zenith_deg,azimuth_deg,irradiance_w_m2`, zenith-major.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "zenith_deg,azimuth_deg,irradiance_w_m2")?;
        for i in 0..self.zenith_steps {
            for j in 0..self.azimuth_steps {
                let (z, a) = self.angles_deg(i, j);
                writeln!(out, "{z},{a},{}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Samples `total_irradiance` at every grid orientation.
pub fn irradiance_field(
    map: &RadianceMap,
    zenith_steps: usize,
    azimuth_steps: usize,
) -> IrradianceField {
    assert!(zenith_steps >= 2 && azimuth_steps >= 2, "need at least 2 steps per axis");
    let zstep = 90.0 / (zenith_steps - 1) as f64;
    let astep = 360.0 / azimuth_steps as f64;
    let row = |i: usize| -> Vec<f64> {
        (0..azimuth_steps)
            .map(|j| {
                let n = Direction::from_angles_deg(i as f64 * zstep, j as f64 * astep);
                map.irradiance(&n)
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = (0..zenith_steps).into_par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..zenith_steps).map(row).collect();
    IrradianceField {
        zenith_steps,
        azimuth_steps,
        values: rows.concat(),
        source: Some(map.clone()),
    }
}

/// Values within this relative margin are treated as ties.
const TIE_TOLERANCE: f64 = 1e-12;

fn better(candidate: (f64, f64, f64), best: (f64, f64, f64)) -> bool {
    let (cz, ca, cv) = candidate;
    let (bz, ba, bv) = best;
    let tol = TIE_TOLERANCE * bv.abs().max(cv.abs()).max(f64::MIN_POSITIVE);
    if cv > bv + tol {
        return true;
    }
    if cv < bv - tol {
        return false;
    }
    cz < bz || (cz == bz && ca < ba)
}

/// Brute-force maximum of the field, refined twice on a 3×3 neighbourhood at
/// half the previous step. Ties go to the smallest zenith, then azimuth.
///
/// Refinement needs the source map; fields built with
/// [`IrradianceField::from_values`] return the best grid sample.
pub fn global_optimum(field: &IrradianceField) -> (Orientation, f64) {
    let mut best = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..field.zenith_steps {
        // every azimuth at zenith 0 is the same orientation
        let cols = if i == 0 { 1 } else { field.azimuth_steps };
        for j in 0..cols {
            let (z, a) = field.angles_deg(i, j);
            let cand = (z, a, field.get(i, j));
            if better(cand, best) {
                best = cand;
            }
        }
    }
    if let Some(map) = field.source() {
        let (mut dz, mut da) = (field.zenith_step_deg(), field.azimuth_step_deg());
        for _ in 0..2 {
            dz *= 0.5;
            da *= 0.5;
            let (cz, ca, _) = best;
            for di in -1..=1 {
                for dj in -1..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let z = (cz + di as f64 * dz).clamp(0.0, 90.0);
                    let a = if z == 0.0 {
                        0.0
                    } else {
                        (ca + dj as f64 * da).rem_euclid(360.0)
                    };
                    let v = map.irradiance(&Direction::from_angles_deg(z, a));
                    if better((z, a, v), best) {
                        best = (z, a, v);
                    }
                }
            }
        }
    }
    (Orientation::from_angles_deg(best.0, best.1), best.2)
}

/// Prominence floor relative to the field's peak value, above the quadrature
/// ripple of the coarsest maps in use.
pub const QUADRATURE_RIPPLE: f64 = 1e-3;

/// Number of local maxima after the ripple floor and 5° merge rule.
///
/// Azimuth wraps; the zenith row is a single node adjacent to the whole next
/// row; the horizon row has no outer neighbours.
pub fn count_local_maxima(field: &IrradianceField) -> usize {
    field_maxima(field).len()
}

/// Orientations of the merged local maxima, strongest first.
pub fn field_maxima(field: &IrradianceField) -> Vec<(Orientation, f64)> {
    let (zs, az) = (field.zenith_steps, field.azimuth_steps);
    // node 0 = zenith, then rows 1.. of the grid
    let node_of = |i: usize, j: usize| if i == 0 { 0 } else { 1 + (i - 1) * az + j };
    let grid_of = |node: usize| {
        if node == 0 {
            (0, 0)
        } else {
            ((node - 1) / az + 1, (node - 1) % az)
        }
    };
    let mut values = Vec::with_capacity(1 + (zs - 1) * az);
    values.push(field.get(0, 0));
    for i in 1..zs {
        for j in 0..az {
            values.push(field.get(i, j));
        }
    }
    let dirs: Vec<Direction> = (0..values.len())
        .map(|n| {
            let (i, j) = grid_of(n);
            let (z, a) = field.angles_deg(i, j);
            Direction::from_angles_deg(z, a)
        })
        .collect();
    let (lo, hi) = modes::value_range(&values);
    let floor = (modes::RIPPLE_FLOOR * (hi - lo)).max(QUADRATURE_RIPPLE * hi.abs());
    let peaks = modes::peaks_above(
        &values,
        floor,
        |n, out| {
            if n == 0 {
                out.extend((0..az).map(|j| node_of(1, j)));
                return;
            }
            let (i, j) = grid_of(n);
            for di in [-1isize, 0, 1] {
                let ii = i as isize + di;
                if ii < 0 || ii >= zs as isize {
                    continue;
                }
                let ii = ii as usize;
                if ii == 0 {
                    out.push(0);
                    continue;
                }
                for dj in [az - 1, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    out.push(node_of(ii, (j + dj) % az));
                }
            }
            out.sort_unstable();
            out.dedup();
        },
        |a, b| angle_between(&dirs[a], &dirs[b]),
    );
    peaks
        .into_iter()
        .map(|p| {
            let (i, j) = grid_of(p.node);
            let (z, a) = field.angles_deg(i, j);
            (Orientation::from_angles_deg(z, a), p.value)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sun_disk_radiance, synth_scene, Lobe, SceneRecipe};
    use crate::sphere::SphereGrid;
    use std::f64::consts::PI;

    fn scene(lobes: Vec<Lobe>, ambient: f64) -> RadianceMap {
        let recipe = SceneRecipe {
            lobes,
            ..SceneRecipe::uniform(ambient)
        };
        synth_scene(&recipe, SphereGrid::with_height(64)).unwrap()
    }

    #[test]
    fn uniform_gives_pi() {
        let m = RadianceMap::uniform(SphereGrid::with_height(128), 1.0).unwrap();
        for (z, a) in [(0.0, 0.0), (45.0, 10.0), (90.0, 200.0), (130.0, 33.0)] {
            let e = total_irradiance(&m, &Direction::from_angles_deg(z, a));
            assert!((e - PI).abs() / PI < 5e-3, "{e}");
        }
    }

    #[test]
    fn cosine_law_on_sun_disk() {
        let g = SphereGrid::with_height(512);
        let sun = Direction::from_angles_deg(20.0, 75.0);
        let m = sun_disk_radiance(g, &sun, 0.266, 1000.0).unwrap();
        let facing = Orientation::facing(sun);
        let off = crate::sphere::rotate_toward(&facing, crate::sphere::TangentAxis::U, 60.0);
        let e0 = total_irradiance(&m, &facing.normal);
        let e60 = total_irradiance(&m, &off.normal);
        assert!((e0 - 1000.0).abs() < 20.0);
        assert!((e60 - 500.0).abs() < 10.0, "{e60}");
    }

    #[test]
    fn uniform_field_is_constant_and_optimum_is_zenith() {
        let m = RadianceMap::uniform(SphereGrid::with_height(32), 2.0).unwrap();
        let f = irradiance_field(&m, 10, 12);
        assert!(f.values.iter().all(|v| (v - 2.0 * PI).abs() < 5e-3 * 2.0 * PI));
        let (o, _) = global_optimum(&f);
        assert_eq!(o.zenith_deg(), 0.0);
        assert_eq!(count_local_maxima(&f), 1);
    }

    #[test]
    fn constant_field_from_values() {
        let f = IrradianceField::from_values(5, 8, vec![3.0; 40]);
        let (o, v) = global_optimum(&f);
        assert_eq!((o.zenith_deg(), v), (0.0, 3.0));
        assert_eq!(count_local_maxima(&f), 1);
    }

    #[test]
    fn single_lobe_optimum_and_count() {
        let m = scene(vec![Lobe::new(40.0, 130.0, 15.0, 10.0)], 0.05);
        let f = irradiance_field(&m, 46, 180);
        let (o, _) = global_optimum(&f);
        let d = Direction::from_angles_deg(40.0, 130.0);
        assert!(angle_between(&o.normal, &d) < 2.0, "{}", angle_between(&o.normal, &d));
        assert_eq!(count_local_maxima(&f), 1);

        let zenith_lobe = scene(vec![Lobe::new(0.0, 0.0, 15.0, 10.0)], 0.0);
        let f = irradiance_field(&zenith_lobe, 31, 72);
        assert_eq!(global_optimum(&f).0.zenith_deg(), 0.0);
    }

    #[test]
    fn horizon_lobes_count() {
        // Lobes less than 120° apart share a maximum between them, so the
        // maxima of horizon lobes sit at lobes or at bisectors of close pairs.
        let horizon = |azimuths: &[f64]| {
            let lobes = azimuths
                .iter()
                .enumerate()
                .map(|(k, &a)| Lobe::new(90.0, a, 8.0, 10.0 - k as f64))
                .collect();
            count_local_maxima(&irradiance_field(&scene(lobes, 0.05), 46, 180))
        };
        assert_eq!(horizon(&[0.0, 180.0]), 2);
        assert_eq!(horizon(&[0.0, 90.0, 180.0]), 2);
        assert_eq!(horizon(&[0.0, 90.0, 180.0, 315.0]), 3);
        assert_eq!(horizon(&[0.0, 90.0, 180.0, 270.0]), 4);
    }

    #[test]
    fn stronger_lobe_wins() {
        let m = scene(
            vec![Lobe::new(85.0, 20.0, 12.0, 11.0), Lobe::new(85.0, 200.0, 12.0, 10.0)],
            0.0,
        );
        let f = irradiance_field(&m, 46, 180);
        // brute-force oracle over the raw samples
        let (mut bi, mut bv) = (0, f64::MIN);
        for (k, &v) in f.values.iter().enumerate() {
            if v > bv {
                bi = k;
                bv = v;
            }
        }
        let (oz, oa) = f.angles_deg(bi / f.azimuth_steps, bi % f.azimuth_steps);
        let (o, v) = global_optimum(&f);
        assert!(v >= bv);
        assert!(angle_between(&o.normal, &Direction::from_angles_deg(oz, oa)) < 2.0);
        assert!(angle_between(&o.normal, &Direction::from_angles_deg(85.0, 20.0)) < 5.0);
        assert_eq!(count_local_maxima(&f), 2);
    }

    #[test]
    fn argmax_is_scale_invariant() {
        let m = scene(
            vec![Lobe::new(35.0, 60.0, 20.0, 4.0), Lobe::new(70.0, 250.0, 10.0, 3.0)],
            0.1,
        );
        let a = global_optimum(&irradiance_field(&m, 31, 72)).0;
        let b = global_optimum(&irradiance_field(&m.scaled(7.5).unwrap(), 31, 72)).0;
        assert!(angle_between(&a.normal, &b.normal) < 1e-9);
    }

    #[test]
    fn rotation_moves_argmax() {
        let m = scene(vec![Lobe::new(45.0, 30.0, 15.0, 5.0)], 0.02);
        let g = m.grid();
        let cols = 16; // 45 degrees at width 128
        let shift = cols as f64 * 360.0 / g.width as f64;
        let f0 = irradiance_field(&m, 46, 180);
        let f1 = irradiance_field(&m.rotate_columns(cols), 46, 180);
        let a0 = global_optimum(&f0).0.azimuth_deg();
        let a1 = global_optimum(&f1).0.azimuth_deg();
        let diff = (a1 - a0 - shift).rem_euclid(360.0);
        assert!(diff.min(360.0 - diff) <= 2.0, "{a0} {a1}");
    }

    #[test]
    fn wider_lobes_give_smoother_fields() {
        let mut last = f64::INFINITY;
        for width in [5.0, 10.0, 20.0, 40.0, 80.0] {
            let m = scene(vec![Lobe::new(30.0, 0.0, width, 1.0)], 0.0);
            let f = irradiance_field(&m, 46, 36);
            let peak = f.max_value();
            // total variation along the azimuth-0 meridian, normalized
            let tv: f64 = (1..f.zenith_steps)
                .map(|i| (f.get(i, 0) - f.get(i - 1, 0)).abs() / peak)
                .fold(0.0, f64::max);
            assert!(tv < last, "width {width}: {tv} >= {last}");
            last = tv;
        }
    }

    #[test]
    fn linear_in_radiance() {
        let a = scene(vec![Lobe::new(20.0, 10.0, 30.0, 2.0)], 0.3);
        let b = scene(vec![Lobe::new(70.0, 200.0, 8.0, 5.0)], 0.0);
        let mix = a.linear_combination(0.7, &b, 2.5).unwrap();
        for (z, az) in [(0.0, 0.0), (33.0, 41.0), (80.0, 190.0)] {
            let n = Direction::from_angles_deg(z, az);
            let lhs = total_irradiance(&mix, &n);
            let rhs = 0.7 * total_irradiance(&a, &n) + 2.5 * total_irradiance(&b, &n);
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs());
        }
    }

    #[test]
    fn csv_layout() {
        let f = IrradianceField::from_values(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "zenith_deg,azimuth_deg,irradiance_w_m2\n0,0,1\n0,180,2\n90,0,3\n90,180,4\n"
        );
    }
}
