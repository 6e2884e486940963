//! Seeded synthetic scene corpora.
//!
//! Every generator is a pure function of its seed. Scenes that fail a
//! corpus's modality requirement are redrawn from a derived seed, so a
//! corpus of `n` scenes from seed `s` is always the same `n` scenes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::environment::{synth_scene, Lobe, Occluder, RadianceMap, SceneRecipe};
use crate::error::Result;
use crate::irradiance::{count_local_maxima, irradiance_field};
use crate::photodiff::{blur_profile, count_modes_1d};
use crate::sphere::{angle_between, SphereGrid};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map resolution of every generated corpus scene.
pub const CORPUS_HEIGHT: usize = 64;

/// Samples of generated 1D profiles.
pub const PROFILE_SAMPLES: usize = 1440;

pub fn corpus_grid() -> SphereGrid {
    SphereGrid::with_height(CORPUS_HEIGHT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    Uniform,
    Unimodal,
    Multimodal,
    Mixed,
}

impl CorpusKind {
    pub fn name(&self) -> &'static str {
        match self {
            CorpusKind::Uniform => "uniform",
            CorpusKind::Unimodal => "unimodal",
            CorpusKind::Multimodal => "multimodal",
            CorpusKind::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(CorpusKind::Uniform),
            "unimodal" => Some(CorpusKind::Unimodal),
            "multimodal" => Some(CorpusKind::Multimodal),
            "mixed" => Some(CorpusKind::Mixed),
            _ => None,
        }
    }
}

fn rng(seed: u64, attempt: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(attempt);
    r
}

fn sky_lobe(r: &mut ChaCha8Rng, max_zenith: f64, width: (f64, f64), peak: f64) -> Lobe {
    // uniform over the spherical cap of the given zenith
    let z: f64 = r.gen_range(max_zenith.to_radians().cos()..1.0);
    Lobe::new(
        z.acos().to_degrees(),
        r.gen_range(0.0..360.0),
        r.gen_range(width.0..width.1),
        peak,
    )
}

fn field_modes(map: &RadianceMap) -> usize {
    count_local_maxima(&irradiance_field(map, 19, 72))
}

/// Dark ground below the horizon.
fn ground(r: &mut ChaCha8Rng) -> Occluder {
    Occluder::Rect {
        zenith_min_deg: 90.0,
        zenith_max_deg: 180.0,
        azimuth_min_deg: 0.0,
        azimuth_max_deg: 360.0,
        albedo: r.gen_range(0.1..0.4),
    }
}

/// Approximate irradiance a lobe delivers to a surface facing it.
fn lobe_power(l: &Lobe) -> f64 {
    let w = l.width_deg.to_radians();
    std::f64::consts::PI * l.peak * w * w
}

/// Broad brightening of the sky toward the zenith carrying a fraction of
/// the primary's power.
fn sky_glow(r: &mut ChaCha8Rng, primary: &Lobe) -> Lobe {
    let width: f64 = r.gen_range(50.0..90.0);
    let power = lobe_power(primary) * r.gen_range(0.05..0.2);
    let w = width.to_radians();
    Lobe::new(0.0, 0.0, width, power / (std::f64::consts::PI * w * w))
}

/// Uniform diffuse level as a fraction of the primary's power.
fn ambient(r: &mut ChaCha8Rng, primary: &Lobe) -> f64 {
    lobe_power(primary) * r.gen_range(0.03..0.15) / std::f64::consts::PI
}

/// A sun-like lobe over a sky that brightens toward the zenith and a darker
/// ground.
pub fn unimodal_recipe(seed: u64) -> SceneRecipe {
    for attempt in 0.. {
        let mut r = rng(seed, attempt);
        let sun = sky_lobe(&mut r, 70.0, (4.0, 20.0), 100.0);
        let glow = sky_glow(&mut r, &sun);
        let ambient = ambient(&mut r, &sun);
        let recipe = SceneRecipe {
            seed,
            lobes: vec![sun, glow],
            ambient,
            occluders: vec![ground(&mut r)],
            texture: 0.0,
        };
        let map = synth_scene(&recipe, corpus_grid()).expect("valid recipe");
        if field_modes(&map) == 1 {
            return recipe;
        }
    }
    unreachable!()
}

/// The unimodal sky plus one or two weaker secondary sources (reflections)
/// far enough away to hold their own irradiance maxima, sometimes behind a
/// wall. Secondary strength is drawn as a fraction of the primary's power.
pub fn multimodal_recipe(seed: u64) -> SceneRecipe {
    for attempt in 0.. {
        let mut r = rng(seed, attempt);
        let primary = sky_lobe(&mut r, 75.0, (3.0, 15.0), 100.0);
        let primary_power = primary.peak * primary.width_deg * primary.width_deg;
        let glow = sky_glow(&mut r, &primary);
        let ambient = ambient(&mut r, &primary);
        let mut lobes = vec![primary];
        let extra = r.gen_range(1..=2);
        for _ in 0..64 {
            if lobes.len() > extra {
                break;
            }
            let width: f64 = r.gen_range(5.0..25.0);
            let power = primary_power * r.gen_range(0.15..0.7);
            let cand = Lobe::new(
                r.gen_range(40.0..110.0),
                r.gen_range(0.0..360.0),
                width,
                power / (width * width),
            );
            if lobes
                .iter()
                .all(|l| angle_between(&l.direction, &cand.direction) > 100.0)
            {
                lobes.push(cand);
            }
        }
        if lobes.len() <= extra {
            continue;
        }
        lobes.push(glow);
        let mut occluders = vec![ground(&mut r)];
        if r.gen_bool(0.3) {
            occluders.push(Occluder::Wall {
                azimuth_deg: r.gen_range(0.0..360.0),
                top_elevation_deg: r.gen_range(10.0..35.0),
                albedo: r.gen_range(0.1..0.4),
            });
        }
        let recipe = SceneRecipe {
            seed,
            lobes,
            ambient,
            occluders,
            texture: 0.0,
        };
        let map = synth_scene(&recipe, corpus_grid()).expect("valid recipe");
        if field_modes(&map) >= 2 {
            return recipe;
        }
    }
    unreachable!()
}

pub fn recipe(kind: CorpusKind, seed: u64) -> SceneRecipe {
    match kind {
        CorpusKind::Uniform => SceneRecipe {
            seed,
            ..SceneRecipe::uniform(rng(seed, 0).gen_range(0.5..5.0))
        },
        CorpusKind::Unimodal => unimodal_recipe(seed),
        CorpusKind::Multimodal => multimodal_recipe(seed),
        CorpusKind::Mixed if seed % 2 == 0 => unimodal_recipe(seed),
        CorpusKind::Mixed => multimodal_recipe(seed),
    }
}

/// Maps for seeds `base .. base + count`.
pub fn scene_corpus(kind: CorpusKind, base: u64, count: usize) -> Result<Vec<RadianceMap>> {
    let build = |i: u64| synth_scene(&recipe(kind, base + i), corpus_grid());
    let seeds: Vec<u64> = (0..count as u64).collect();
    #[cfg(feature = "parallel")]
    return seeds.into_par_iter().map(build).collect();
    #[cfg(not(feature = "parallel"))]
    seeds.into_iter().map(build).collect()
}

fn wrapped_lobe(theta_deg: f64, center: f64, width: f64) -> f64 {
    let d = (theta_deg - center + 180.0).rem_euclid(360.0) - 180.0;
    (-(d / width) * (d / width)).exp()
}

/// Periodic 1D radiance: Gaussian lobes `(center°, width°, peak)` on an
/// ambient floor, sampled on `[−180°, 180°)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LobeProfile {
    pub lobes: Vec<(f64, f64, f64)>,
    pub ambient: f64,
}

impl LobeProfile {
    pub fn radiance(&self, theta_deg: f64) -> f64 {
        self.ambient
            + self
                .lobes
                .iter()
                .map(|&(c, w, p)| p * wrapped_lobe(theta_deg, c, w))
                .sum::<f64>()
    }

    pub fn sample(&self, samples: usize) -> Vec<f64> {
        (0..samples)
            .map(|i| self.radiance(-180.0 + 360.0 * i as f64 / samples as f64))
            .collect()
    }
}

/// Three unequal lobes 125° apart whose irradiance is strongly multimodal.
pub fn three_lobe_profile() -> LobeProfile {
    LobeProfile {
        lobes: vec![(-125.0, 6.0, 1.0), (0.0, 12.0, 0.75), (125.0, 8.0, 0.85)],
        ambient: 0.02,
    }
}

/// Profile of 2–4 lobes whose irradiance is multimodal at a 5° tilt when
/// sampled at [`PROFILE_SAMPLES`].
pub fn multimodal_profile(seed: u64) -> LobeProfile {
    for attempt in 0.. {
        let mut r = rng(seed, attempt);
        let count = r.gen_range(2..=4);
        let lobes: Vec<(f64, f64, f64)> = (0..count)
            .map(|_| {
                (
                    r.gen_range(-180.0..180.0),
                    r.gen_range(3.0..25.0),
                    r.gen_range(0.2..1.0),
                )
            })
            .collect();
        let profile = LobeProfile {
            lobes,
            ambient: r.gen_range(0.0..0.1),
        };
        let p = blur_profile(profile.sample(PROFILE_SAMPLES), 5.0).expect("profile is long enough");
        if count_modes_1d(&p.blurred) >= 2 {
            return profile;
        }
    }
    unreachable!()
}
