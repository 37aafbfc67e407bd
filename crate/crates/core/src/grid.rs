//! Brute-force evaluation of the dual functional on a periodic grid.
//!
//! The kernel `h_k = P_{≤k}δ₀` is sampled on `[-L, L)^n` by an inverse DFT of
//! `χ(|ξ|/2^k)` on the dual grid `ξ = (π/L) j`, transformed back, multiplied
//! by a trapezoid-rule time transform of the moving source, and summed
//! against `|ξ|^{-2s}`. The `ξ = 0` cell is left out of the sum and replaced
//! by the lattice (Epstein zeta) correction for the excluded singular cell,
//! which turns the `O(Δξ^{n-2s})` error of the punctured sum into
//! `O(Δξ^{n-2s+4})`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{Mollifier, Profile};
use crate::quadrature::neumaier_sum;

/// Grid size is capped so direct mode stays at desk scale.
pub const MAX_DIRECT_DIM: u32 = 3;
pub const MAX_MASS_DIM: u32 = 4;
pub const MIN_POINTS_PER_AXIS: usize = 16;
/// The box must be at least this many effective kernel radii `1/(inner·2^k)`.
pub const BOX_KERNEL_RADII: f64 = 8.0;
/// Largest box used by [`GridSpec::for_probe`].
pub const DEFAULT_BOX_HALFWIDTH: f64 = 8.0;
/// Smallest box used by [`GridSpec::for_probe`]; below it the dual spacing
/// `π/L` is too coarse for the lattice correction, and a level that needs a
/// smaller box is reported as a Nyquist violation instead.
pub const MIN_DEFAULT_BOX_HALFWIDTH: f64 = 2.0;
/// Headroom between the cutoff support and the grid Nyquist frequency in
/// [`GridSpec::for_probe`].
const NYQUIST_HEADROOM: f64 = 1.05;
/// Box of the mass grid, in effective kernel radii.
pub const MASS_BOX_RADII: f64 = 24.0;
/// Relative `∫|f|` allowed outside the time window.
pub const TIME_TAIL_TOLERANCE: f64 = 1e-12;
/// Dual-grid modes with `|ĥ|²` below this are treated as outside the cutoff.
const SYMBOL_FLOOR: f64 = 1e-28;
/// Shells `|j|_∞ ≤ EPSTEIN_SHELLS` in the Epstein zeta theta-series.
const EPSTEIN_SHELLS: i64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: u32,
    pub points_per_axis: usize,
    pub box_halfwidth: f64,
    pub time_nodes: usize,
    pub time_halfwidth: f64,
}

impl GridSpec {
    pub fn new(n: u32, points_per_axis: usize, box_halfwidth: f64, time_nodes: usize, time_halfwidth: f64) -> Result<Self> {
        if !(2..=MAX_MASS_DIM).contains(&n) {
            return Err(Error::InvalidArgument(format!("grid dimension must be 2..={MAX_MASS_DIM}, got {n}")));
        }
        if points_per_axis < MIN_POINTS_PER_AXIS || !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be a power of two ≥ {MIN_POINTS_PER_AXIS}, got {points_per_axis}"
            )));
        }
        if !(box_halfwidth > 0.0 && box_halfwidth.is_finite()) {
            return Err(Error::InvalidArgument(format!("box half-width must be positive, got {box_halfwidth}")));
        }
        if time_nodes < 3 || time_nodes.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("time nodes must be odd and ≥ 3, got {time_nodes}")));
        }
        if !(time_halfwidth > 0.0 && time_halfwidth.is_finite()) {
            return Err(Error::InvalidArgument(format!("time half-width must be positive, got {time_halfwidth}")));
        }
        Ok(Self {
            n,
            points_per_axis,
            box_halfwidth,
            time_nodes,
            time_halfwidth,
        })
    }

    /// Defaults for a direct evaluation at level `k` and speed `c`: the largest
    /// box up to [`DEFAULT_BOX_HALFWIDTH`] that keeps the cutoff below Nyquist
    /// (but no smaller than [`MIN_DEFAULT_BOX_HALFWIDTH`]), and the coarsest
    /// time step that does not alias.
    pub fn for_probe(n: u32, points_per_axis: usize, k: i32, c: f64, p: &Profile, m: &Mollifier) -> Result<Self> {
        let support = m.outer_radius * 2f64.powi(k);
        let fit = PI * points_per_axis as f64 / (2.0 * NYQUIST_HEADROOM * support);
        let box_halfwidth = DEFAULT_BOX_HALFWIDTH.min(fit).max(MIN_DEFAULT_BOX_HALFWIDTH);
        Self::with_box(n, points_per_axis, box_halfwidth, k, c, p, m)
    }

    /// As [`GridSpec::for_probe`] with an explicit box half-width.
    pub fn with_box(n: u32, points_per_axis: usize, box_halfwidth: f64, k: i32, c: f64, p: &Profile, m: &Mollifier) -> Result<Self> {
        let support = m.outer_radius * 2f64.powi(k);
        let (lo, hi) = p.time_support();
        let time_halfwidth = lo.abs().max(hi.abs());
        let time_nodes = time_nodes_for(time_halfwidth, max_phase(c, support), p);
        Self::new(n, points_per_axis, box_halfwidth, time_nodes, time_halfwidth)
    }

    /// Mass-only grid at level `k`: a box of [`MASS_BOX_RADII`] kernel radii,
    /// so every level sees the same dilated picture.
    pub fn for_mass(n: u32, k: i32, m: &Mollifier) -> Result<Self> {
        let points = match n {
            2 => 512,
            3 => 128,
            _ => 32,
        };
        let box_halfwidth = MASS_BOX_RADII / (m.inner_radius * 2f64.powi(k));
        Self::new(n, points, box_halfwidth, 3, 1.0)
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.box_halfwidth / self.points_per_axis as f64
    }

    pub fn dual_spacing(&self) -> f64 {
        PI / self.box_halfwidth
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.points_per_axis as f64 / (2.0 * self.box_halfwidth)
    }

    pub fn time_step(&self) -> f64 {
        2.0 * self.time_halfwidth / (self.time_nodes - 1) as f64
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.pow(self.n)
    }

    /// The same grid with the time window doubled at a fixed step.
    pub fn with_doubled_time_window(self) -> Self {
        Self {
            time_halfwidth: 2.0 * self.time_halfwidth,
            time_nodes: 2 * (self.time_nodes - 1) + 1,
            ..self
        }
    }

    fn check_level(&self, k: i32, m: &Mollifier) -> Result<()> {
        let support = m.outer_radius * 2f64.powi(k);
        if support >= self.nyquist() {
            return Err(Error::NyquistViolation {
                support,
                nyquist: self.nyquist(),
            });
        }
        let required = BOX_KERNEL_RADII / (m.inner_radius * 2f64.powi(k));
        if self.box_halfwidth < required {
            return Err(Error::BoxTooSmall {
                halfwidth: self.box_halfwidth,
                required,
            });
        }
        Ok(())
    }
}

fn max_phase(c: f64, support: f64) -> f64 {
    (1.0 + c.abs()) * support
}

fn time_nodes_for(halfwidth: f64, phase: f64, p: &Profile) -> usize {
    let step = 2.0 * PI / (phase + p.spectral_radius());
    let intervals = (2.0 * halfwidth / step).ceil() as usize;
    let intervals = intervals + intervals % 2;
    intervals.max(2) + 1
}

/// `F(t, x) = f(t) h_k(x - c t ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingSource {
    pub profile: Profile,
    pub mollifier: Mollifier,
    pub k: i32,
    pub c: f64,
    pub omega: Vec<f64>,
}

impl MovingSource {
    pub fn new(profile: Profile, mollifier: Mollifier, k: i32, c: f64, omega: Vec<f64>) -> Result<Self> {
        let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("direction must have unit length, got |ω| = {norm}")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("speed must be finite and nonnegative, got {c}")));
        }
        Ok(Self {
            profile,
            mollifier,
            k,
            c,
            omega,
        })
    }

    /// Source moving along the first axis.
    pub fn along_first_axis(profile: Profile, mollifier: Mollifier, k: i32, c: f64, n: u32) -> Result<Self> {
        let mut omega = vec![0.0; n as usize];
        omega[0] = 1.0;
        Self::new(profile, mollifier, k, c, omega)
    }
}

/// Real samples of `h_k` in FFT order (`x = 0` at index 0, axis 0 slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSamples {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

/// Signed frequency index of FFT position `i`.
fn signed_index(i: usize, size: usize) -> i64 {
    if i < size / 2 {
        i as i64
    } else {
        i as i64 - size as i64
    }
}

fn unravel(mut flat: usize, size: usize, n: usize, out: &mut [i64]) {
    for a in (0..n).rev() {
        out[a] = signed_index(flat % size, size);
        flat /= size;
    }
}

/// In-place n-dimensional DFT (unnormalized in both directions).
pub fn fft_nd(data: &mut [Complex64], n: u32, size: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(size, direction);
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); size];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..n as usize {
        let stride = size.pow(n - 1 - axis as u32);
        let block = stride * size;
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

fn dual_radius(flat: usize, g: &GridSpec, idx: &mut [i64]) -> f64 {
    unravel(flat, g.points_per_axis, g.n as usize, idx);
    g.dual_spacing() * (idx.iter().map(|&j| (j * j) as f64).sum::<f64>()).sqrt()
}

/// `h_k` on the grid: `(Δξ/2π)^n Σ_ξ χ(|ξ|/2^k) e^{ixξ}`.
pub fn sample_mollifier_kernel(m: &Mollifier, k: i32, g: &GridSpec) -> Result<KernelSamples> {
    g.check_level(k, m)?;
    let scale = 2f64.powi(k);
    let mut idx = vec![0i64; g.n as usize];
    let mut data: Vec<Complex64> = (0..g.total_points())
        .map(|flat| Complex64::new(m.eval(dual_radius(flat, g, &mut idx) / scale), 0.0))
        .collect();
    fft_nd(&mut data, g.n, g.points_per_axis, FftDirection::Inverse);
    let norm = (g.dual_spacing() / (2.0 * PI)).powi(g.n as i32);
    // χ is even, so the imaginary part is rounding noise
    let values = data.iter().map(|z| z.re * norm).collect();
    Ok(KernelSamples { grid: *g, values })
}

/// `ĥ(ξ) = dx^n Σ_x h(x) e^{-ixξ}` on the dual grid, FFT order.
pub fn kernel_symbol(h: &KernelSamples) -> Vec<Complex64> {
    let g = &h.grid;
    let mut data: Vec<Complex64> = h.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, g.n, g.points_per_axis, FftDirection::Forward);
    let cell = g.cell_width().powi(g.n as i32);
    data.iter_mut().for_each(|z| *z *= cell);
    data
}

/// `Σ |h| dx^n`.
pub fn l1_mass(h: &KernelSamples) -> f64 {
    neumaier_sum(h.values.iter().map(|v| v.abs())) * h.grid.cell_width().powi(h.grid.n as i32)
}

/// `Σ h dx^n`, equal to `ĥ(0)`.
pub fn mean(h: &KernelSamples) -> f64 {
    neumaier_sum(h.values.iter().copied()) * h.grid.cell_width().powi(h.grid.n as i32)
}

/// `Σ |h|² dx^n`.
pub fn l2_norm_sq(h: &KernelSamples) -> f64 {
    neumaier_sum(h.values.iter().map(|v| v * v)) * h.grid.cell_width().powi(h.grid.n as i32)
}

/// Largest `|h(x) - h(σx)|` over axis transpositions `σ`.
pub fn permutation_asymmetry(h: &KernelSamples) -> f64 {
    let g = &h.grid;
    let n = g.n as usize;
    let size = g.points_per_axis;
    let mut worst: f64 = 0.0;
    let mut idx = vec![0usize; n];
    for flat in 0..h.values.len() {
        let mut r = flat;
        for a in (0..n).rev() {
            idx[a] = r % size;
            r /= size;
        }
        for a in 0..n {
            for b in a + 1..n {
                idx.swap(a, b);
                let other = idx.iter().fold(0, |acc, &i| acc * size + i);
                idx.swap(a, b);
                worst = worst.max((h.values[flat] - h.values[other]).abs());
            }
        }
    }
    worst
}

/// Trapezoid nodes and weighted profile values on `[-T, T]`.
struct TimeRule {
    nodes: Vec<f64>,
    weighted: Vec<f64>,
    step: f64,
    even: bool,
}

impl TimeRule {
    fn new(p: &Profile, g: &GridSpec) -> Self {
        let step = g.time_step();
        let even = p.is_even();
        let (nodes, weighted): (Vec<f64>, Vec<f64>) = if even {
            // t_0 = 0 carries weight step; the folded pairs ±t_j carry 2·step
            (0..=(g.time_nodes - 1) / 2)
                .map(|j| {
                    let t = j as f64 * step;
                    let mut w = if j == 0 { step } else { 2.0 * step };
                    if j == (g.time_nodes - 1) / 2 {
                        w *= 0.5;
                    }
                    (t, w * p.value(t))
                })
                .unzip()
        } else {
            (0..g.time_nodes)
                .map(|j| {
                    let t = -g.time_halfwidth + j as f64 * step;
                    let w = if j == 0 || j + 1 == g.time_nodes { 0.5 * step } else { step };
                    (t, w * p.value(t))
                })
                .unzip()
        };
        Self {
            nodes,
            weighted,
            step,
            even,
        }
    }

    /// `Σ w_j f(t_j) e^{-i t_j φ}` by a rotation recurrence.
    fn transform(&self, phi: f64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, -self.step * phi);
        let mut z = Complex64::from_polar(1.0, -self.nodes[0] * phi);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &w) in self.weighted.iter().enumerate() {
            acc += w * z;
            // re-anchor periodically so the recurrence error stays at rounding level
            z = if (j + 1) % 256 == 0 && j + 1 < self.nodes.len() {
                Complex64::from_polar(1.0, -self.nodes[j + 1] * phi)
            } else {
                z * rot
            };
        }
        if self.even {
            Complex64::new(acc.re, 0.0)
        } else {
            acc
        }
    }

    /// `Σ w_j f(t_j) t_j^i` for `i = 0, 1, 2`, over the full window.
    fn moments(&self) -> [f64; 3] {
        if self.even {
            let m0 = neumaier_sum(self.weighted.iter().copied());
            let m2 = neumaier_sum(self.nodes.iter().zip(&self.weighted).map(|(t, w)| w * t * t));
            [m0, 0.0, m2]
        } else {
            let m = |i: i32| neumaier_sum(self.nodes.iter().zip(&self.weighted).map(|(t, w)| w * t.powi(i)));
            [m(0), m(1), m(2)]
        }
    }
}

/// `Z_n(α) = Σ_{j ∈ Z^n \ 0} |j|^{-α}`, analytically continued below `α = n`.
/// Values with `α - n` a nonnegative even integer are not supported.
pub fn epstein_zeta(n: u32, alpha: f64) -> Result<f64> {
    use statrs::function::gamma::{gamma, gamma_ur};
    let nf = n as f64;
    if alpha == nf {
        return Err(Error::InvalidArgument(format!("Z_{n}(α) has a pole at α = {n}")));
    }
    let excess = 0.5 * (alpha - nf);
    if excess > 0.0 && excess.fract() == 0.0 {
        return Err(Error::InvalidArgument(format!("Z_{n}({alpha}) is not supported")));
    }
    if alpha == 0.0 {
        return Ok(-1.0);
    }
    let half = 0.5 * alpha;
    if half < 0.0 && half.fract() == 0.0 {
        return Ok(0.0);
    }
    // Γ(a, x) for any real a ≠ 0, -1, ... via Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a
    fn upper(a: f64, x: f64) -> f64 {
        if a > 0.0 {
            gamma_ur(a, x) * gamma(a)
        } else {
            (upper(a + 1.0, x) - x.powf(a) * (-x).exp()) / a
        }
    }
    let r = EPSTEIN_SHELLS;
    let mut terms = Vec::new();
    let mut j = vec![-r; n as usize];
    loop {
        let r2: i64 = j.iter().map(|x| x * x).sum();
        if r2 > 0 {
            let x = PI * r2 as f64;
            terms.push(upper(half, x) * x.powf(-half) + upper(0.5 * (nf - alpha), x) * x.powf(-0.5 * (nf - alpha)));
        }
        let mut a = 0;
        while a < j.len() {
            j[a] += 1;
            if j[a] <= r {
                break;
            }
            j[a] = -r;
            a += 1;
        }
        if a == j.len() {
            break;
        }
    }
    let bracket = 2.0 / (alpha - nf) - 2.0 / alpha + neumaier_sum(terms);
    Ok(bracket * PI.powf(half) / gamma(half))
}

/// `‖∫ e^{-it|D|} |D|^{-s} F(t) dt‖_{L²}` for the moving source, by direct
/// summation over the dual grid.
pub fn dual_functional_direct(src: &MovingSource, s: f64, g: &GridSpec) -> Result<f64> {
    let h = sample_mollifier_kernel(&src.mollifier, src.k, g)?;
    dual_functional_from_kernel(src, s, &h)
}

/// As [`dual_functional_direct`] with `h_k` already sampled.
pub fn dual_functional_from_kernel(src: &MovingSource, s: f64, h: &KernelSamples) -> Result<f64> {
    let g = &h.grid;
    if g.n > MAX_DIRECT_DIM {
        return Err(Error::InvalidArgument(format!(
            "direct mode is limited to n ≤ {MAX_DIRECT_DIM}, got {}",
            g.n
        )));
    }
    if src.omega.len() != g.n as usize {
        return Err(Error::InvalidArgument("direction and grid dimensions differ".into()));
    }
    let nf = g.n as f64;
    if !(s < 0.5 * nf) {
        return Err(Error::InvalidArgument(format!("direct mode needs s < n/2, got s = {s}")));
    }
    let p = &src.profile;
    if p.amplitude == 0.0 {
        return Ok(0.0);
    }
    let tail = p.time_tail(g.time_halfwidth);
    if tail > TIME_TAIL_TOLERANCE {
        return Err(Error::TimeWindowTooSmall {
            halfwidth: g.time_halfwidth,
            tail,
        });
    }
    let phase = max_phase(src.c, src.mollifier.outer_radius * 2f64.powi(src.k));
    if g.time_step() * (phase + p.spectral_radius()) > 2.0 * PI {
        return Err(Error::TimeStepTooCoarse {
            step: g.time_step(),
            max_phase: phase,
        });
    }

    let symbol = kernel_symbol(h);
    let rule = TimeRule::new(p, g);
    let dxi = g.dual_spacing();
    let size = g.points_per_axis;
    let row = size.pow(g.n - 1);
    let row_sums: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|r| {
            let mut idx = vec![0i64; g.n as usize];
            let terms = (r * row..(r + 1) * row).filter_map(|flat| {
                let hs = symbol[flat].norm_sqr();
                if flat == 0 || hs < SYMBOL_FLOOR {
                    return None;
                }
                unravel(flat, size, g.n as usize, &mut idx);
                let xi: Vec<f64> = idx.iter().map(|&j| j as f64 * dxi).collect();
                let radius = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                let along: f64 = xi.iter().zip(&src.omega).map(|(x, w)| x * w).sum();
                let t = rule.transform(radius + src.c * along);
                Some(radius.powf(-2.0 * s) * hs * t.norm_sqr())
            });
            neumaier_sum(terms)
        })
        .collect();
    let punctured = neumaier_sum(row_sums) * dxi.powf(nf);

    // Taylor coefficients of |T(φ)|² = Φ0 + Φ1 φ + Φ2 φ²/2 at φ = 0
    let [m0, m1, m2] = rule.moments();
    let phi0 = m0 * m0;
    let phi2 = 2.0 * (m1 * m1 - m0 * m2);
    let h0 = symbol[0].norm_sqr();
    let c = src.c;
    let correction = epstein_zeta(g.n, 2.0 * s)? * dxi.powf(nf - 2.0 * s) * phi0 * h0
        + epstein_zeta(g.n, 2.0 * s - 2.0)? * dxi.powf(nf - 2.0 * s + 2.0) * 0.5 * phi2 * (1.0 + c * c / nf) * h0;
    let value_sq = (2.0 * PI).powf(-nf) * (punctured - correction);
    Ok(value_sq.max(0.0).sqrt())
}

/// `dual_functional_direct / (‖f‖_{L²} ‖h_k‖_{L¹})` at `s = (n-1)/2`, with the
/// mass measured on [`GridSpec::for_mass`].
pub fn witness_ratio(n: u32, k: i32, c: f64, p: &Profile, m: &Mollifier, g: &GridSpec) -> Result<f64> {
    let src = MovingSource::along_first_axis(*p, *m, k, c, n)?;
    witness_ratio_for(&src, g)
}

/// [`witness_ratio`] for an arbitrary direction.
pub fn witness_ratio_for(src: &MovingSource, g: &GridSpec) -> Result<f64> {
    let n = g.n;
    let value = dual_functional_direct(src, 0.5 * (n as f64 - 1.0), g)?;
    let mass = l1_mass(&sample_mollifier_kernel(&src.mollifier, src.k, &GridSpec::for_mass(n, src.k, &src.mollifier)?)?);
    Ok(value / (src.profile.l2_norm() * mass))
}

const SFGD_MAGIC: &[u8; 4] = b"SFGD";
const SFGD_VERSION: u16 = 1;

/// Write `values` (row-major over `dims`) as `SFGD` | version u16 | n u16 |
/// n × dim u32 | f64 data, all little-endian.
pub fn write_sfgd(path: &Path, dims: &[usize], values: &[f64]) -> Result<()> {
    if dims.iter().product::<usize>() != values.len() {
        return Err(Error::InvalidArgument("dump dimensions do not match the data length".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SFGD_MAGIC)?;
    w.write_all(&SFGD_VERSION.to_le_bytes())?;
    w.write_all(&(dims.len() as u16).to_le_bytes())?;
    for &d in dims {
        let d = u32::try_from(d).map_err(|_| Error::InvalidArgument("dimension exceeds u32".into()))?;
        w.write_all(&d.to_le_bytes())?;
    }
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a file written by [`write_sfgd`].
pub fn read_sfgd(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SFGD_MAGIC {
        return Err(Error::Io("not an SFGD file".into()));
    }
    let mut two = [0u8; 2];
    r.read_exact(&mut two)?;
    let version = u16::from_le_bytes(two);
    if version != SFGD_VERSION {
        return Err(Error::Io(format!("unsupported SFGD version {version}")));
    }
    r.read_exact(&mut two)?;
    let n = u16::from_le_bytes(two) as usize;
    let mut dims = Vec::with_capacity(n);
    let mut four = [0u8; 4];
    for _ in 0..n {
        r.read_exact(&mut four)?;
        dims.push(u32::from_le_bytes(four) as usize);
    }
    let len: usize = dims.iter().product();
    let mut values = Vec::with_capacity(len);
    let mut eight = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut eight)?;
        values.push(f64::from_le_bytes(eight));
    }
    if r.read(&mut eight)? != 0 {
        return Err(Error::Io("trailing bytes after SFGD payload".into()));
    }
    Ok((dims, values))
}

/// Dump kernel samples (FFT order) to `path`.
pub fn dump_kernel(path: &Path, h: &KernelSamples) -> Result<()> {
    let dims = vec![h.grid.points_per_axis; h.grid.n as usize];
    write_sfgd(path, &dims, &h.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::CutoffLevel;
    use crate::reduced::{radial_separable_value, reduced_q_value, sphere_surface_measure, AngularDomain, ProbeConfig};

    fn default_profile() -> Profile {
        Profile::default_normalized()
    }

    #[test]
    fn epstein_values() {
        // 4 ζ(1/2) β(1/2)
        assert!((epstein_zeta(2, 1.0).unwrap() + 3.900_264_920_001_959).abs() < 1e-10);
        assert!((epstein_zeta(3, 2.0).unwrap() + 8.913_632_917_585_186).abs() < 1e-10);
        assert!((epstein_zeta(2, -1.0).unwrap() + 0.228_824_31).abs() < 1e-7);
        assert_eq!(epstein_zeta(3, 0.0).unwrap(), -1.0);
        assert_eq!(epstein_zeta(3, -2.0).unwrap(), 0.0);
        assert!(epstein_zeta(2, 2.0).is_err());
    }

    #[test]
    fn epstein_against_references() {
        // 4 ζ(3/4) β(3/4) by an arbitrary-precision library
        assert!((epstein_zeta(2, 1.5).unwrap() + 10.077_559_478_793_152).abs() < 1e-10);
        // convergent region: plain lattice sum with a tail estimate
        let r = 400i64;
        let mut direct = Vec::new();
        for i in -r..=r {
            for j in -r..=r {
                if i != 0 || j != 0 {
                    direct.push(((i * i + j * j) as f64).powf(-2.5));
                }
            }
        }
        let direct = neumaier_sum(direct);
        // truncation tail of the direct sum is about 2π/(3·400³)/Z ≈ 6e-9
        assert!((epstein_zeta(2, 5.0).unwrap() / direct - 1.0).abs() < 1e-7);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(2, 100, 8.0, 101, 8.6).is_err());
        assert!(GridSpec::new(2, 8, 8.0, 101, 8.6).is_err());
        assert!(GridSpec::new(5, 16, 8.0, 101, 8.6).is_err());
        assert!(GridSpec::new(2, 64, 8.0, 100, 8.6).is_err());
        assert!(GridSpec::new(2, 64, -1.0, 101, 8.6).is_err());
        let g = GridSpec::new(2, 64, 8.0, 101, 8.6).unwrap();
        assert!((g.nyquist() - PI * 4.0).abs() < 1e-14);
    }

    #[test]
    fn nyquist_and_box_violations() {
        let m = Mollifier::default();
        let g = GridSpec::new(2, 64, 8.0, 101, 8.6).unwrap();
        assert!(matches!(sample_mollifier_kernel(&m, 4, &g), Err(Error::NyquistViolation { .. })));
        let small = GridSpec::new(2, 64, 2.0, 101, 8.6).unwrap();
        assert!(matches!(sample_mollifier_kernel(&m, 0, &small), Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn kernel_unit_mean_and_symmetry() {
        let m = Mollifier::default();
        let g = GridSpec::new(2, 128, 8.0, 3, 1.0).unwrap();
        let h = sample_mollifier_kernel(&m, 1, &g).unwrap();
        assert!((mean(&h) - 1.0).abs() < 1e-12);
        assert!(permutation_asymmetry(&h) < 1e-10);
        let g3 = GridSpec::new(3, 32, 8.0, 3, 1.0).unwrap();
        let h3 = sample_mollifier_kernel(&m, 0, &g3).unwrap();
        assert!((mean(&h3) - 1.0).abs() < 1e-12);
        assert!(permutation_asymmetry(&h3) < 1e-10);
        assert!(l1_mass(&h3) >= 1.0);
    }

    #[test]
    fn plancherel_on_grid() {
        let m = Mollifier::default();
        let g = GridSpec::new(2, 64, 8.0, 3, 1.0).unwrap();
        let h = sample_mollifier_kernel(&m, 0, &g).unwrap();
        let symbol = kernel_symbol(&h);
        let dual = neumaier_sum(symbol.iter().map(|z| z.norm_sqr())) * g.dual_spacing().powi(2) / (2.0 * PI).powi(2);
        assert!((l2_norm_sq(&h) / dual - 1.0).abs() < 1e-8);
    }

    #[test]
    fn symbol_round_trip_is_the_cutoff() {
        let m = Mollifier::default();
        let g = GridSpec::new(2, 64, 8.0, 3, 1.0).unwrap();
        let h = sample_mollifier_kernel(&m, 1, &g).unwrap();
        let symbol = kernel_symbol(&h);
        let mut idx = [0i64; 2];
        for (flat, z) in symbol.iter().enumerate() {
            let r = dual_radius(flat, &g, &mut idx);
            assert!((z.re - m.cutoff(r, CutoffLevel::Level(1))).abs() < 1e-12);
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_source_is_zero() {
        let m = Mollifier::default();
        let zero = default_profile().scaled(0.0);
        let src = MovingSource::along_first_axis(zero, m, 2, 2.0, 2).unwrap();
        let g = GridSpec::for_probe(2, 64, 2, 2.0, &default_profile(), &m).unwrap();
        assert_eq!(dual_functional_direct(&src, 0.5, &g).unwrap(), 0.0);
    }

    #[test]
    fn direction_must_be_unit() {
        let m = Mollifier::default();
        assert!(MovingSource::new(default_profile(), m, 0, 2.0, vec![1.0, 1.0]).is_err());
        assert!(MovingSource::new(default_profile(), m, 0, 2.0, vec![0.6, 0.8]).is_ok());
    }

    #[test]
    fn time_window_guards() {
        let m = Mollifier::default();
        let p = default_profile();
        let src = MovingSource::along_first_axis(p, m, 2, 2.0, 2).unwrap();
        let short = GridSpec::new(2, 64, 8.0, 2001, 3.0).unwrap();
        assert!(matches!(
            dual_functional_direct(&src, 0.5, &short),
            Err(Error::TimeWindowTooSmall { .. })
        ));
        let coarse = GridSpec::new(2, 64, 8.0, 11, 8.6).unwrap();
        assert!(matches!(
            dual_functional_direct(&src, 0.5, &coarse),
            Err(Error::TimeStepTooCoarse { .. })
        ));
    }

    #[test]
    fn time_window_doubling() {
        let m = Mollifier::default();
        let p = default_profile();
        let src = MovingSource::along_first_axis(p, m, 2, 2.0, 2).unwrap();
        let g = GridSpec::for_probe(2, 64, 2, 2.0, &p, &m).unwrap();
        let a = dual_functional_direct(&src, 0.5, &g).unwrap();
        let b = dual_functional_direct(&src, 0.5, &g.with_doubled_time_window()).unwrap();
        assert!((a / b - 1.0).abs() < 1e-6);
    }

    #[test]
    fn moving_source_matches_reduced_engine() {
        let m = Mollifier::default();
        let p = default_profile();
        let k = 3;
        let g = GridSpec::for_probe(2, 128, k, 2.0, &p, &m).unwrap();
        let src = MovingSource::along_first_axis(p, m, k, 2.0, 2).unwrap();
        let direct = dual_functional_direct(&src, 0.5, &g).unwrap().powi(2);
        let cfg = ProbeConfig::endpoint(2, 2.0, CutoffLevel::Level(k), AngularDomain::full()).unwrap();
        let q = reduced_q_value(&cfg, &p, &m, 1e-10).unwrap();
        let reduced = (2.0 * PI).powi(-2) * sphere_surface_measure(0) * q;
        assert!((direct / reduced - 1.0).abs() < 0.01, "{direct} vs {reduced}");
    }

    #[test]
    fn source_at_rest_matches_radial_quadrature() {
        let m = Mollifier::default();
        let p = default_profile();
        let k = 3;
        let g = GridSpec::for_probe(2, 128, k, 0.0, &p, &m).unwrap();
        let src = MovingSource::along_first_axis(p, m, k, 0.0, 2).unwrap();
        let direct = dual_functional_direct(&src, 0.5, &g).unwrap().powi(2);
        let radial = radial_separable_value(2, 0.5, CutoffLevel::Level(k), &p, &m, 1e-10).unwrap();
        assert!((direct / radial - 1.0).abs() < 0.01, "{direct} vs {radial}");
    }

    #[test]
    fn sfgd_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.sfgd");
        let values: Vec<f64> = (0..24).map(|i| i as f64 * 0.5 - 3.0).collect();
        write_sfgd(&path, &[2, 3, 4], &values).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"SFGD");
        assert_eq!(bytes.len(), 4 + 2 + 2 + 3 * 4 + 24 * 8);
        let (dims, back) = read_sfgd(&path).unwrap();
        assert_eq!(dims, vec![2, 3, 4]);
        assert_eq!(back, values);
        assert!(write_sfgd(&path, &[5], &values).is_err());
    }
}
