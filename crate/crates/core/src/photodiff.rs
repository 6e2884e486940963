//! The four-detector photodifferential sensor and the one-dimensional
//! scale-space analysis behind it.
//!
//! A detector pair tilted by `±Δθ` measures `E_T(θ+Δθ) − E_T(θ−Δθ)`; divided by
//! `2Δθ` this is exactly the derivative of `E_T` blurred by a normalized box of
//! half-width `Δθ`. The 1D machinery here checks that identity numerically and
//! measures how the blur removes (and does not create) local maxima.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::environment::RadianceMap;
use crate::error::{Error, Result};
use crate::modes::{self, MERGE_RADIUS_DEG};
use crate::sphere::{rotate_toward, Orientation, TangentAxis};

/// Four detectors tilted `±Δθ` about the panel's `u` and `v` axes.
#[derive(Debug, Clone, Copy)]
pub struct DetectorRig {
    pub tilt_deg: f64,
    /// `[+u, −u, +v, −v]`
    pub detectors: [Orientation; 4],
}

impl DetectorRig {
    pub fn new(panel: &Orientation, tilt_deg: f64) -> Result<Self> {
        if !(tilt_deg > 0.0 && tilt_deg <= 90.0) {
            return Err(Error::InvalidArgument(format!(
                "detector tilt {tilt_deg}° outside (0°, 90°]"
            )));
        }
        let free = panel.with_upper_hemisphere(false);
        Ok(DetectorRig {
            tilt_deg,
            detectors: [
                rotate_toward(&free, TangentAxis::U, tilt_deg),
                rotate_toward(&free, TangentAxis::U, -tilt_deg),
                rotate_toward(&free, TangentAxis::V, tilt_deg),
                rotate_toward(&free, TangentAxis::V, -tilt_deg),
            ],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotodiffReading {
    /// W/m² per radian along `u`.
    pub e_d_u: f64,
    /// W/m² per radian along `v`.
    pub e_d_v: f64,
    /// Detector irradiances `[+u, −u, +v, −v]`, W/m².
    pub raw: [f64; 4],
    pub tilt_deg: f64,
}

impl PhotodiffReading {
    pub fn mean_reading(&self) -> f64 {
        self.raw.iter().sum::<f64>() / 4.0
    }
}

/// Reads ideal full-hemisphere detectors and forms the per-axis differences.
pub fn read_photodifferential(
    map: &RadianceMap,
    panel: &Orientation,
    tilt_deg: f64,
) -> Result<PhotodiffReading> {
    let rig = DetectorRig::new(panel, tilt_deg)?;
    let raw = rig.detectors.map(|d| map.irradiance(&d.normal));
    let denom = 2.0 * tilt_deg.to_radians();
    Ok(PhotodiffReading {
        e_d_u: (raw[0] - raw[1]) / denom,
        e_d_v: (raw[2] - raw[3]) / denom,
        raw,
        tilt_deg,
    })
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Frequency response `jω · sinc(ωΔθ)` of the impulse pair
/// `(δ(θ+Δθ) − δ(θ−Δθ)) / 2Δθ`; zero at `ω = 0`.
pub fn impulse_pair_response(tilt_rad: f64, omega: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, omega * sinc(omega * tilt_rad))
}

/// Fourier transform of the clipped cosine `max(cos θ, 0)`:
/// `2 cos(πω/2) / (1 − ω²)`, equal to `π/2` at `|ω| = 1`.
pub fn kernel_spectrum(omega: f64) -> f64 {
    if (omega.abs() - 1.0).abs() < 1e-9 {
        return FRAC_PI_2;
    }
    2.0 * (FRAC_PI_2 * omega).cos() / (1.0 - omega * omega)
}

/// Fourier transform of the normalized box of half-width `tilt_rad`.
pub fn box_spectrum(tilt_rad: f64, omega: f64) -> f64 {
    sinc(omega * tilt_rad)
}

/// First `ω > 0` at which `spectrum(ω)` reaches zero, scanning in steps of
/// `step` and refining by bisection. `None` if no crossing below `limit`.
pub fn first_zero_crossing(spectrum: impl Fn(f64) -> f64, step: f64, limit: f64) -> Option<f64> {
    let mut a = 0.0;
    let mut fa = spectrum(a);
    while a < limit {
        let b = a + step;
        let fb = spectrum(b);
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if spectrum(mid).signum() == fa.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    None
}

/// Unnormalized forward DFT (`Σ x_n e^{−2πikn/N}`).
pub fn dft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Angular frequency (cycles per 2π) of DFT bin `k` for `n` samples.
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Spectrum of the impulse pair sampled on `n` points over one period, as a
/// Riemann-sum approximation of the continuous transform. The tilt snaps to
/// the nearest sample; the snapped tilt (radians) is returned alongside.
pub fn sampled_impulse_pair_spectrum(n: usize, tilt_deg: f64) -> (f64, Vec<Complex64>) {
    let h = 2.0 * PI / n as f64;
    let m = ((tilt_deg.to_radians() / h).round() as usize).max(1);
    let tilt = m as f64 * h;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[(n - m) % n] += 1.0 / (2.0 * tilt * h);
    x[m % n] -= 1.0 / (2.0 * tilt * h);
    let spectrum = dft(&x).into_iter().map(|c| c * h).collect();
    (tilt, spectrum)
}

/// Clipped-cosine spectrum at integer frequencies from the DFT of `n` samples.
pub fn sampled_kernel_spectrum(n: usize) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new((i as f64 * h).cos().max(0.0) * h, 0.0))
        .collect();
    dft(&x).into_iter().map(|c| c.re).collect()
}

/// Least-squares Gaussian `exp(−ω²/2σ²)` fit to the box spectrum over
/// `0 ≤ ω ≤ band`. Returns `(σ, rms error)`.
pub fn gaussian_fit(tilt_rad: f64, band: f64) -> (f64, f64) {
    let samples: Vec<(f64, f64)> = (0..=400)
        .map(|i| {
            let w = band * i as f64 / 400.0;
            (w, box_spectrum(tilt_rad, w))
        })
        .collect();
    let rms = |sigma: f64| {
        let sse: f64 = samples
            .iter()
            .map(|&(w, b)| {
                let g = (-w * w / (2.0 * sigma * sigma)).exp();
                (g - b) * (g - b)
            })
            .sum();
        (sse / samples.len() as f64).sqrt()
    };
    // golden-section search on log σ
    let (mut lo, mut hi) = ((1e-3f64).ln(), (1e3f64).ln());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if rms(a.exp()) < rms(b.exp()) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let sigma = (0.5 * (lo + hi)).exp();
    (sigma, rms(sigma))
}

/// Number of maxima of a periodic sampled function after the ripple floor
/// and 5° merge rule. A constant function has one.
pub fn count_modes_1d(values: &[f64]) -> usize {
    modes::circular_peaks(values).len()
}

/// A periodic 1D radiance profile on `[−180°, 180°)` with its irradiance
/// `E_T = L ∗ k` and blurred irradiance `E_B = E_T ∗ b`.
///
/// The 1D radiance is taken as constant across the out-of-plane direction, so
/// the in-plane convolution carries the factor `∫cos²β dβ = π/2`; a uniform
/// profile then yields `E_T = π L₀`, matching the spherical case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpaceProfile1D {
    pub radiance: Vec<f64>,
    pub irradiance: Vec<f64>,
    pub blurred: Vec<f64>,
    pub tilt_deg: f64,
}

pub const MIN_PROFILE_SAMPLES: usize = 720;

impl ScaleSpaceProfile1D {
    /// Samples `radiance(θ)` (θ in degrees) on `n` points and blurs it.
    pub fn from_fn(n: usize, tilt_deg: f64, radiance: impl Fn(f64) -> f64) -> Result<Self> {
        let l = (0..n).map(|i| radiance(theta_deg(i, n))).collect();
        blur_profile(l, tilt_deg)
    }

    pub fn len(&self) -> usize {
        self.radiance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radiance.is_empty()
    }

    pub fn theta_deg(&self, i: usize) -> f64 {
        theta_deg(i, self.len())
    }

    /// Box half-width in whole samples.
    pub fn tilt_samples(&self) -> usize {
        tilt_samples(self.tilt_deg, self.len())
    }

    /// Eq.-4-style finite difference of `E_T` at the (snapped) tilt.
    pub fn photodifferential(&self) -> Vec<f64> {
        finite_difference(&self.irradiance, self.tilt_samples())
    }

    /// Central-difference derivative of `E_B`, per radian.
    pub fn blurred_derivative(&self) -> Vec<f64> {
        let n = self.len();
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|i| (self.blurred[(i + 1) % n] - self.blurred[(i + n - 1) % n]) / (2.0 * h))
            .collect()
    }

    /// CSV with header `theta_deg,L,E_T,E_B,E_D`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "theta_deg,L,E_T,E_B,E_D")?;
        let ed = self.photodifferential();
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.theta_deg(i),
                self.radiance[i],
                self.irradiance[i],
                self.blurred[i],
                ed[i]
            )?;
        }
        Ok(())
    }
}

fn theta_deg(i: usize, n: usize) -> f64 {
    -180.0 + 360.0 * i as f64 / n as f64
}

fn tilt_samples(tilt_deg: f64, n: usize) -> usize {
    (tilt_deg * n as f64 / 360.0).round() as usize
}

fn finite_difference(e: &[f64], m: usize) -> Vec<f64> {
    let n = e.len();
    if m == 0 {
        return vec![0.0; n];
    }
    let denom = 2.0 * m as f64 * 2.0 * PI / n as f64;
    (0..n)
        .map(|i| (e[(i + m) % n] - e[(i + n - m) % n]) / denom)
        .collect()
}

/// `E_T = (π/2) · L ⊛ max(cos, 0)` by circular convolution.
pub fn convolve_kernel(radiance: &[f64]) -> Vec<f64> {
    let n = radiance.len();
    let h = 2.0 * PI / n as f64;
    let to_c = |v: &[f64]| -> Vec<Complex64> { v.iter().map(|&x| Complex64::new(x, 0.0)).collect() };
    let kernel: Vec<f64> = (0..n)
        .map(|i| FRAC_PI_2 * (i as f64 * h).cos().max(0.0) * h)
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a = to_c(radiance);
    let mut k = to_c(&kernel);
    fwd.process(&mut a);
    fwd.process(&mut k);
    for (x, y) in a.iter_mut().zip(&k) {
        *x *= *y;
    }
    inv.process(&mut a);
    a.iter().map(|c| (c.re / n as f64).max(0.0)).collect()
}

/// Normalized box of half-width `m` samples with half-weight end taps.
/// `m = 0` is the identity.
pub fn box_blur(e: &[f64], m: usize) -> Vec<f64> {
    let n = e.len();
    if m == 0 {
        return e.to_vec();
    }
    let mut prefix = Vec::with_capacity(2 * n + 1);
    prefix.push(0.0);
    // three periods so every window is contiguous
    for k in 0..3 * n {
        let last = *prefix.last().unwrap();
        prefix.push(last + e[k % n]);
    }
    (0..n)
        .map(|i| {
            let c = i + n;
            // interior taps c-m+1 ..= c+m-1
            let interior = prefix[c + m] - prefix[c + 1 - m];
            let ends = 0.5 * (e[(c - m) % n] + e[(c + m) % n]);
            (interior + ends) / (2 * m) as f64
        })
        .collect()
}

/// Computes `E_T` and `E_B` for a sampled periodic radiance profile.
pub fn blur_profile(radiance: Vec<f64>, tilt_deg: f64) -> Result<ScaleSpaceProfile1D> {
    if radiance.len() < MIN_PROFILE_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "profile needs at least {MIN_PROFILE_SAMPLES} samples, got {}",
            radiance.len()
        )));
    }
    if !(0.0..=180.0).contains(&tilt_deg) {
        return Err(Error::InvalidArgument(format!("tilt {tilt_deg}° outside [0°, 180°]")));
    }
    let irradiance = convolve_kernel(&radiance);
    let blurred = box_blur(&irradiance, tilt_samples(tilt_deg, radiance.len()));
    Ok(ScaleSpaceProfile1D {
        radiance,
        irradiance,
        blurred,
        tilt_deg,
    })
}

/// Maximum absolute deviation between the direct finite difference of `E_T`
/// and the central-difference derivative of `E_B`.
pub fn photodiff_equals_blurred_derivative(profile: &ScaleSpaceProfile1D) -> f64 {
    profile
        .photodifferential()
        .iter()
        .zip(profile.blurred_derivative())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn raw_maxima(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    (0..n)
        .filter(|&i| v[i] > v[(i + n - 1) % n] && v[i] >= v[(i + 1) % n])
        .collect()
}

/// Maxima of `E_B` at each requested tilt that cannot be traced back through
/// the blur ladder to a maximum of `E_T`.
///
/// `E_T` is blurred on a ladder of half-widths spaced `ladder_step_deg`; every
/// significant maximum at a requested tilt is followed down the ladder. On
/// each rung it continues from the nearest maximum within the 5° merge radius.
/// Failing that, it is a merger if both maxima flanking it on the finer rung
/// vanish on its own rung and that rung has fewer maxima (or the finer rung
/// has only one); the chain continues from the higher of the two. A maximum
/// whose chain breaks is a mode the blur created.
pub fn created_modes(irradiance: &[f64], tilts_deg: &[f64], ladder_step_deg: f64) -> Vec<Vec<usize>> {
    let n = irradiance.len();
    let per_deg = n as f64 / 360.0;
    let step = ((ladder_step_deg * per_deg).round() as usize).max(1);
    let radius = (MERGE_RADIUS_DEG * per_deg).round() as usize;
    let max_m = tilts_deg
        .iter()
        .map(|&t| tilt_samples(t, n))
        .max()
        .unwrap_or(0);

    let mut rungs: Vec<usize> = (0..=max_m).step_by(step).collect();
    for &t in tilts_deg {
        rungs.push(tilt_samples(t, n));
    }
    rungs.sort_unstable();
    rungs.dedup();
    let ladder: Vec<(Vec<f64>, Vec<usize>)> = rungs
        .iter()
        .map(|&m| {
            let b = box_blur(irradiance, m);
            let maxima = raw_maxima(&b);
            (b, maxima)
        })
        .collect();

    let circ = |a: usize, b: usize| a.abs_diff(b).min(n - a.abs_diff(b));
    let near = |set: &[usize], x: usize| set.iter().any(|&q| circ(q, x) <= radius);
    let traced = |level: usize, mut pos: usize| -> bool {
        for rung in (0..level).rev() {
            let (values, below) = &ladder[rung];
            let above = &ladder[rung + 1].1;
            if below.is_empty() {
                return false;
            }
            if let Some(&q) = below.iter().min_by_key(|&&q| circ(q, pos)) {
                if circ(q, pos) <= radius {
                    pos = q;
                    continue;
                }
            }
            // `below` is sorted; flanking maxima on either side of `pos`
            let i = below.partition_point(|&q| q < pos);
            let (a, b) = (below[(i + below.len() - 1) % below.len()], below[i % below.len()]);
            let merged = !near(above, a) && !near(above, b) && (above.len() < below.len() || below.len() == 1);
            if !merged {
                return false;
            }
            pos = if values[a] >= values[b] { a } else { b };
        }
        true
    };
    tilts_deg
        .iter()
        .map(|&t| {
            let m = tilt_samples(t, n);
            let level = rungs.binary_search(&m).unwrap();
            modes::circular_peaks(&ladder[level].0)
                .into_iter()
                .filter(|p| !traced(level, p.node))
                .map(|p| p.node)
                .collect()
        })
        .collect()
}
