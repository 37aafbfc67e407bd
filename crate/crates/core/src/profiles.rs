//! Time profiles `f`, their Fourier transforms, and the radial cutoff `χ`
//! that defines the frequency-truncated Dirac masses `h_k = P_{≤k} δ₀`.
//!
//! Fourier convention: `f̂(η) = ∫ e^{-itη} f(t) dt`, so that
//! `‖f̂‖²_{L²} = 2π ‖f‖²_{L²}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_power_at_origin, QuadOptions};

/// `|f̂(η)|² ≤ SPECTRAL_FLOOR · |f̂|²_max` beyond [`Profile::spectral_radius`].
pub const SPECTRAL_FLOOR: f64 = 1e-32;

/// Half-width of the Gaussian time window, in units of the width σ
/// (relative L¹ tail below 1e-16).
const GAUSSIAN_TIME_EXTENT: f64 = 8.6;

/// Shape of the time profile before amplitude scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileFamily {
    /// `exp(-t²/(2σ²))`
    Gaussian { width: f64 },
    /// `exp(-1/(1-u²))` with `u = (t - center)/radius`, zero for `|u| ≥ 1`
    CompactBump { center: f64, radius: f64 },
}

/// A real time profile `f = amplitude · shape`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub family: ProfileFamily,
    pub amplitude: f64,
}

impl Profile {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!("gaussian width must be positive, got {width}")));
        }
        Ok(Self {
            family: ProfileFamily::Gaussian { width },
            amplitude: 1.0,
        })
    }

    pub fn compact_bump(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bump needs finite center and positive radius, got center={center}, radius={radius}"
            )));
        }
        Ok(Self {
            family: ProfileFamily::CompactBump { center, radius },
            amplitude: 1.0,
        })
    }

    /// Unit-width Gaussian scaled to `‖f‖_{L²} = 1`.
    pub fn default_normalized() -> Self {
        Self::gaussian(1.0).expect("unit width").normalized()
    }

    /// Multiply the profile by `alpha`.
    pub fn scaled(self, alpha: f64) -> Self {
        Self {
            amplitude: self.amplitude * alpha,
            ..self
        }
    }

    /// Same shape, scaled to unit L² norm. Zero profiles are returned unchanged.
    pub fn normalized(self) -> Self {
        let norm = self.l2_norm();
        if norm > 0.0 {
            self.scaled(1.0 / norm)
        } else {
            self
        }
    }

    /// L²-preserving dilation `μ^{1/2} f(μ t)`.
    pub fn dilated(self, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {mu}")));
        }
        let family = match self.family {
            ProfileFamily::Gaussian { width } => ProfileFamily::Gaussian { width: width / mu },
            ProfileFamily::CompactBump { center, radius } => ProfileFamily::CompactBump {
                center: center / mu,
                radius: radius / mu,
            },
        };
        Ok(Self {
            family,
            amplitude: self.amplitude * mu.sqrt(),
        })
    }

    pub fn l2_norm(&self) -> f64 {
        let shape_sq = match self.family {
            ProfileFamily::Gaussian { width } => width * PI.sqrt(),
            ProfileFamily::CompactBump { radius, .. } => radius * bump_spectrum().l2_sq,
        };
        self.amplitude.abs() * shape_sq.sqrt()
    }

    /// `f(t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude
            * match self.family {
                ProfileFamily::Gaussian { width } => (-0.5 * (t / width).powi(2)).exp(),
                ProfileFamily::CompactBump { center, radius } => bump((t - center) / radius),
            }
    }

    /// `f̂(η) = ∫ e^{-itη} f(t) dt`.
    pub fn fhat(&self, eta: f64) -> Complex64 {
        match self.family {
            ProfileFamily::Gaussian { width } => {
                let v = self.amplitude * width * (2.0 * PI).sqrt() * (-0.5 * (width * eta).powi(2)).exp();
                Complex64::new(v, 0.0)
            }
            ProfileFamily::CompactBump { center, radius } => {
                let v = self.amplitude * radius * bump_spectrum().eval(radius * eta);
                Complex64::from_polar(v, -eta * center)
            }
        }
    }

    /// `|f̂(η)|²`, which is even in η for real profiles.
    pub fn fhat_norm_sq(&self, eta: f64) -> f64 {
        match self.family {
            ProfileFamily::Gaussian { width } => {
                let a = self.amplitude * width;
                2.0 * PI * a * a * (-(width * eta).powi(2)).exp()
            }
            ProfileFamily::CompactBump { radius, .. } => {
                let v = self.amplitude * radius * bump_spectrum().eval(radius * eta);
                v * v
            }
        }
    }

    /// Whether `f(-t) = f(t)`.
    pub fn is_even(&self) -> bool {
        match self.family {
            ProfileFamily::Gaussian { .. } => true,
            ProfileFamily::CompactBump { center, .. } => center == 0.0,
        }
    }

    /// Frequency beyond which `|f̂|²` stays below [`SPECTRAL_FLOOR`] times its peak.
    pub fn spectral_radius(&self) -> f64 {
        match self.family {
            ProfileFamily::Gaussian { width } => (-SPECTRAL_FLOOR.ln()).sqrt() / width,
            ProfileFamily::CompactBump { radius, .. } => BUMP_SPECTRUM_EXTENT / radius,
        }
    }

    /// Characteristic frequency scale of `f̂`.
    pub fn spectral_scale(&self) -> f64 {
        match self.family {
            ProfileFamily::Gaussian { width } => 1.0 / width,
            ProfileFamily::CompactBump { radius, .. } => 1.0 / radius,
        }
    }

    /// Interval outside of which `f` is negligible (exactly zero for bumps).
    pub fn time_support(&self) -> (f64, f64) {
        match self.family {
            ProfileFamily::Gaussian { width } => (-GAUSSIAN_TIME_EXTENT * width, GAUSSIAN_TIME_EXTENT * width),
            ProfileFamily::CompactBump { center, radius } => (center - radius, center + radius),
        }
    }

    /// Fraction of `∫|f|` lying outside `[-halfwidth, halfwidth]`.
    pub fn time_tail(&self, halfwidth: f64) -> f64 {
        match self.family {
            ProfileFamily::Gaussian { width } => statrs::function::erf::erfc(halfwidth / (width * 2f64.sqrt())),
            ProfileFamily::CompactBump { center, radius } => {
                let lo = ((-halfwidth - center) / radius).clamp(-1.0, 1.0);
                let hi = ((halfwidth - center) / radius).clamp(-1.0, 1.0);
                let total = bump_spectrum().mass;
                let opts = QuadOptions::with_rel_tol(1e-12);
                let inside = integrate(&bump, &[lo, hi], &opts).map(|e| e.value).unwrap_or(0.0);
                ((total - inside) / total).max(0.0)
            }
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            ProfileFamily::Gaussian { width } => write!(f, "gaussian:width={width}")?,
            ProfileFamily::CompactBump { center, radius } => write!(f, "bump:center={center},radius={radius}")?,
        }
        write!(f, ",amplitude={}", self.amplitude)
    }
}

/// Parses `gaussian:width=1` or `bump:center=0,radius=1`, with an optional
/// `amplitude=` parameter. Without an explicit amplitude the profile is
/// L²-normalized.
impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidArgument(format!("profile `{s}`: {msg}"));
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let mut width = None;
        let mut center = None;
        let mut radius = None;
        let mut amplitude = None;
        for kv in params.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{kv}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| bad(format!("`{value}` is not a number")))?;
            let slot = match key.trim() {
                "width" | "sigma" => &mut width,
                "center" => &mut center,
                "radius" => &mut radius,
                "amplitude" | "amp" => &mut amplitude,
                other => return Err(bad(format!("unknown parameter `{other}`"))),
            };
            *slot = Some(value);
        }
        let shape = match family.trim() {
            "gaussian" | "gauss" => {
                if center.is_some() || radius.is_some() {
                    return Err(bad("gaussian takes only width".into()));
                }
                Profile::gaussian(width.unwrap_or(1.0))?
            }
            "bump" | "compact_bump" => {
                if width.is_some() {
                    return Err(bad("bump takes center and radius".into()));
                }
                Profile::compact_bump(center.unwrap_or(0.0), radius.unwrap_or(1.0))?
            }
            other => return Err(bad(format!("unknown family `{other}`"))),
        };
        Ok(match amplitude {
            Some(a) => shape.scaled(a),
            None => shape.normalized(),
        })
    }
}

/// `f̂(η)` for `p`.
pub fn fhat_eval(p: &Profile, eta: f64) -> Complex64 {
    p.fhat(eta)
}

/// `E(f) = ∫_0^∞ |f̂(η)|² dη` to relative accuracy `tol`.
pub fn halfline_energy(p: &Profile, tol: f64) -> Result<f64> {
    weighted_halfline_energy(p, 0.0, tol)
}

/// `∫_0^∞ η^power |f̂(η)|² dη` for `power > -1`.
pub fn weighted_halfline_energy(p: &Profile, power: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if power <= -1.0 {
        return Err(Error::DivergentAtOrigin { power });
    }
    if p.amplitude == 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOptions::with_rel_tol(tol);
    let scale = p.spectral_scale();
    let reach = p.spectral_radius();
    let g = |eta: f64| p.fhat_norm_sq(eta);
    let head_end = 0.25 * scale;
    let head = if power == 0.0 {
        integrate(&g, &[0.0, head_end], &opts)?.value
    } else {
        integrate_power_at_origin(power, &g, head_end, &opts)?.value
    };
    let mut pts = vec![head_end];
    let mut x = head_end;
    while x < reach {
        x = (2.0 * x).min(reach);
        pts.push(x);
    }
    let weighted = |eta: f64| eta.powf(power) * g(eta);
    let body = integrate(&weighted, &pts, &opts)?.value;
    let mut total = head + body;
    if let ProfileFamily::Gaussian { width } = p.family {
        if power == 0.0 {
            // ∫_R^∞ 2π A²σ² e^{-σ²η²} dη, added exactly
            let a = p.amplitude * width;
            let tail = 2.0 * PI * a * a * PI.sqrt() / (2.0 * width) * statrs::function::erf::erfc(width * reach);
            total += tail;
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// compact bump spectrum cache

/// `B̂(ω)` is cached on `[0, BUMP_SPECTRUM_EXTENT]` and treated as zero beyond
/// (|B̂| < 1e-14 · B̂(0) there).
pub const BUMP_SPECTRUM_EXTENT: f64 = 800.0;
const BUMP_CACHE_STEP: f64 = 0.04;
const BUMP_HALF_NODES: usize = 512;

fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

struct BumpSpectrum {
    values: Vec<f64>,
    slopes: Vec<f64>,
    mass: f64,
    l2_sq: f64,
}

impl BumpSpectrum {
    fn build() -> Self {
        // Trapezoid sums on (-1, 1) converge faster than any power for a
        // flat-ended bump; aliasing error is B̂(2π·512 - ω), far below 1e-16.
        let dt = 1.0 / BUMP_HALF_NODES as f64;
        let nodes: Vec<(f64, f64)> = (1..BUMP_HALF_NODES)
            .map(|j| {
                let t = j as f64 * dt;
                (t, bump(t))
            })
            .collect();
        let b0 = bump(0.0);
        let count = (BUMP_SPECTRUM_EXTENT / BUMP_CACHE_STEP).round() as usize + 1;
        let mut values = Vec::with_capacity(count);
        let mut slopes = Vec::with_capacity(count);
        for i in 0..count {
            let w = i as f64 * BUMP_CACHE_STEP;
            let mut v = 0.5 * b0;
            let mut d = 0.0;
            for &(t, b) in &nodes {
                let (s, c) = (w * t).sin_cos();
                v += b * c;
                d -= t * b * s;
            }
            values.push(2.0 * dt * v);
            slopes.push(2.0 * dt * d);
        }
        let mass = values[0];
        let l2_sq = dt * (b0 * b0 + 2.0 * nodes.iter().map(|&(_, b)| b * b).sum::<f64>());
        Self {
            values,
            slopes,
            mass,
            l2_sq,
        }
    }

    /// Cubic Hermite interpolation with exact nodal derivatives.
    fn eval(&self, w: f64) -> f64 {
        let w = w.abs();
        let x = w / BUMP_CACHE_STEP;
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return 0.0;
        }
        let t = x - i as f64;
        let h = BUMP_CACHE_STEP;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }
}

fn bump_spectrum() -> &'static BumpSpectrum {
    static CACHE: OnceLock<BumpSpectrum> = OnceLock::new();
    CACHE.get_or_init(BumpSpectrum::build)
}

// ---------------------------------------------------------------------------
// mollifier

/// Frequency cutoff level `k` of `P_{≤k}`; `Unbounded` means no cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffLevel {
    Level(i32),
    Unbounded,
}

impl CutoffLevel {
    /// `2^k`, or infinity.
    pub fn scale(self) -> f64 {
        match self {
            CutoffLevel::Level(k) => 2f64.powi(k),
            CutoffLevel::Unbounded => f64::INFINITY,
        }
    }
}

impl fmt::Display for CutoffLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffLevel::Level(k) => write!(f, "{k}"),
            CutoffLevel::Unbounded => f.write_str("unbounded"),
        }
    }
}

fn smooth_gate(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Radial cutoff `χ`: exactly 1 on `[0, inner]`, exactly 0 beyond `outer`,
/// with the `exp(-1/x)` smooth step in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl Default for Mollifier {
    fn default() -> Self {
        Self {
            inner_radius: 1.0,
            outer_radius: 2.0,
        }
    }
}

impl Mollifier {
    pub fn new(inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && outer_radius > inner_radius && outer_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mollifier needs 0 < inner < outer, got inner={inner_radius}, outer={outer_radius}"
            )));
        }
        Ok(Self {
            inner_radius,
            outer_radius,
        })
    }

    /// `χ(|η|)`.
    pub fn eval(&self, eta: f64) -> f64 {
        let r = eta.abs();
        if r <= self.inner_radius {
            return 1.0;
        }
        if r >= self.outer_radius {
            return 0.0;
        }
        let keep = smooth_gate(self.outer_radius - r);
        let drop = smooth_gate(r - self.inner_radius);
        keep / (keep + drop)
    }

    /// `χ(|ξ| / 2^k)`, the symbol of `P_{≤k}` at radius `|ξ|`.
    pub fn cutoff(&self, radius: f64, level: CutoffLevel) -> f64 {
        match level {
            CutoffLevel::Level(_) => self.eval(radius / level.scale()),
            CutoffLevel::Unbounded => 1.0,
        }
    }

    /// Radius beyond which `χ(·/2^k)` vanishes.
    pub fn support(&self, level: CutoffLevel) -> f64 {
        self.outer_radius * level.scale()
    }
}

impl fmt::Display for Mollifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inner={},outer={}", self.inner_radius, self.outer_radius)
    }
}

/// Parses `inner=1,outer=2` (either key may be omitted to keep its default).
impl FromStr for Mollifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut m = Mollifier::default();
        for kv in s.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let bad = || Error::InvalidArgument(format!("mollifier `{s}`: cannot read `{kv}`"));
            let (key, value) = kv.split_once('=').ok_or_else(bad)?;
            let value: f64 = value.trim().parse().map_err(|_| bad())?;
            match key.trim() {
                "inner" => m.inner_radius = value,
                "outer" => m.outer_radius = value,
                _ => return Err(bad()),
            }
        }
        Mollifier::new(m.inner_radius, m.outer_radius)
    }
}

/// `χ(|η|)` for `m`.
pub fn mollifier_eval(m: &Mollifier, eta: f64) -> f64 {
    m.eval(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force `∫ e^{-itη} f(t) dt` by composite Simpson on a fine grid;
    /// independent of the closed forms and the bump cache.
    fn brute_fhat(p: &Profile, eta: f64) -> Complex64 {
        let (lo, hi) = p.time_support();
        let n = 40_000;
        let h = (hi - lo) / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            let t = lo + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += Complex64::from_polar(w * p.value(t), -t * eta);
        }
        acc * (h / 3.0)
    }

    #[test]
    fn gaussian_fhat_frozen_values() {
        let p = Profile::gaussian(1.0).unwrap();
        // frozen from brute_fhat
        assert!((p.fhat(0.0).re - 2.506_628_274_631_000_7).abs() < 1e-12);
        assert!((p.fhat(1.0).re - 1.520_346_901_066_280_8).abs() < 1e-12);
        assert!((brute_fhat(&p, 0.0).re - 2.506_628_274_631_000_7).abs() < 1e-10);
        assert!((brute_fhat(&p, 1.0).re - 1.520_346_901_066_280_8).abs() < 1e-10);
    }

    #[test]
    fn fhat_matches_brute_force_on_grid() {
        let profiles = [
            Profile::gaussian(1.0).unwrap(),
            Profile::gaussian(0.7).unwrap().scaled(1.3),
            Profile::compact_bump(0.0, 1.0).unwrap(),
            Profile::compact_bump(0.4, 1.7).unwrap(),
        ];
        for p in profiles {
            let peak = p.fhat(0.0).norm();
            for i in 0..20 {
                let eta = -6.0 + 12.0 * i as f64 / 19.0;
                let got = p.fhat(eta);
                let want = brute_fhat(&p, eta);
                let err = (got - want).norm() / peak;
                assert!(err < 1e-8, "{p} at η={eta}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn even_profiles_have_even_transform() {
        for p in [Profile::gaussian(2.0).unwrap(), Profile::compact_bump(0.0, 0.5).unwrap()] {
            assert!(p.is_even());
            for eta in [0.3, 1.0, 7.5] {
                assert_eq!(p.fhat(eta), p.fhat(-eta));
            }
        }
        let shifted = Profile::compact_bump(0.5, 1.0).unwrap();
        assert!(!shifted.is_even());
        for eta in [0.3, 2.0] {
            assert!((shifted.fhat_norm_sq(eta) - shifted.fhat_norm_sq(-eta)).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_energy_is_pi_three_halves() {
        // brute-force oracle for 2π ∫_0^∞ e^{-η²} dη, Simpson on [0, 12]
        let n = 24_000;
        let h = 12.0 / n as f64;
        let simpson: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let x = i as f64 * h;
                w * 2.0 * PI * (-x * x).exp()
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((simpson - 5.568_327_996_831_708).abs() < 1e-12);
        let e = halfline_energy(&Profile::gaussian(1.0).unwrap(), 1e-10).unwrap();
        assert!((e - 5.568_327_996_831_708).abs() < 1e-9);
    }

    #[test]
    fn normalized_even_profiles_have_energy_at_most_pi() {
        for p in [
            Profile::default_normalized(),
            Profile::gaussian(3.0).unwrap().normalized(),
            Profile::compact_bump(0.0, 1.0).unwrap().normalized(),
            Profile::compact_bump(0.8, 0.3).unwrap().normalized(),
        ] {
            assert!((p.l2_norm() - 1.0).abs() < 1e-12);
            let e = halfline_energy(&p, 1e-10).unwrap();
            assert!(e > 0.0);
            assert!(e <= PI * (1.0 + 1e-8), "{p}: {e}");
        }
    }

    #[test]
    fn bump_energy_matches_plancherel() {
        // even real f: ∫_0^∞|f̂|² = π ‖f‖²
        let p = Profile::compact_bump(0.0, 1.0).unwrap();
        let e = halfline_energy(&p, 1e-10).unwrap();
        assert!((e / (PI * p.l2_norm().powi(2)) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn energy_is_dilation_invariant() {
        for p in [Profile::default_normalized(), Profile::compact_bump(0.2, 1.0).unwrap()] {
            let e = halfline_energy(&p, 1e-10).unwrap();
            for mu in [0.25, 4.0] {
                let ed = halfline_energy(&p.dilated(mu).unwrap(), 1e-10).unwrap();
                assert!((ed / e - 1.0).abs() < 1e-8, "μ={mu}: {ed} vs {e}");
            }
        }
    }

    #[test]
    fn weighted_energy_of_gaussian() {
        // ∫_0^∞ η^{-1/2} 2π e^{-η²} dη = π Γ(1/4)
        let p = Profile::gaussian(1.0).unwrap();
        let got = weighted_halfline_energy(&p, -0.5, 1e-11).unwrap();
        let want = PI * statrs::function::gamma::gamma(0.25);
        assert!((got / want - 1.0).abs() < 1e-9);
        assert!(weighted_halfline_energy(&p, -1.0, 1e-8).is_err());
    }

    #[test]
    fn mollifier_flat_regions_are_exact() {
        let m = Mollifier::default();
        for eta in [0.0, 0.3, -0.99, 1.0, -1.0] {
            assert_eq!(m.eval(eta), 1.0);
        }
        for eta in [2.0, -2.0, 2.5, 100.0] {
            assert_eq!(m.eval(eta), 0.0);
        }
    }

    #[test]
    fn mollifier_transition_is_antisymmetric_about_midpoint() {
        let m = Mollifier::new(1.0, 2.0).unwrap();
        for eta in [1.1, 1.25, 1.5, 1.7, 1.95] {
            let v = m.eval(eta);
            assert!(v > 0.0 && v < 1.0);
            assert!((v - (1.0 - m.eval(3.0 - eta))).abs() < 1e-15);
        }
        assert!((m.eval(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mollifier_rejects_bad_radii() {
        assert!(Mollifier::new(2.0, 1.0).is_err());
        assert!(Mollifier::new(0.0, 1.0).is_err());
    }

    #[test]
    fn profile_vocabulary_parses() {
        let p: Profile = "gaussian:width=2".parse().unwrap();
        assert_eq!(p.family, ProfileFamily::Gaussian { width: 2.0 });
        assert!((p.l2_norm() - 1.0).abs() < 1e-12);
        let b: Profile = "bump:center=0.5,radius=2,amplitude=3".parse().unwrap();
        assert_eq!(b.family, ProfileFamily::CompactBump { center: 0.5, radius: 2.0 });
        assert_eq!(b.amplitude, 3.0);
        assert!("gaussian:width=-1".parse::<Profile>().is_err());
        assert!("square:side=1".parse::<Profile>().is_err());
        assert!("gaussian:radius=1".parse::<Profile>().is_err());
        let round: Profile = b.to_string().parse().unwrap();
        assert_eq!(round, b);
    }

    proptest! {
        #[test]
        fn cutoff_is_monotone_in_level(xi in 0.0f64..64.0, k1 in -3i32..8, dk in 0i32..6) {
            let m = Mollifier::default();
            let lo = m.cutoff(xi, CutoffLevel::Level(k1));
            let hi = m.cutoff(xi, CutoffLevel::Level(k1 + dk));
            prop_assert!(lo <= hi);
            prop_assert!(hi <= m.cutoff(xi, CutoffLevel::Unbounded));
        }

        #[test]
        fn mollifier_is_radially_nonincreasing(a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let m = Mollifier::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(m.eval(lo) >= m.eval(hi));
            prop_assert!((0.0..=1.0).contains(&m.eval(a)));
        }
    }

    #[test]
    fn mollifier_vocabulary() {
        let m: Mollifier = "inner=0.5, outer=3".parse().unwrap();
        assert_eq!(m, Mollifier::new(0.5, 3.0).unwrap());
        assert_eq!("".parse::<Mollifier>().unwrap(), Mollifier::default());
        assert_eq!(m.to_string().parse::<Mollifier>().unwrap(), m);
        assert!("inner=2,outer=1".parse::<Mollifier>().is_err());
        assert!("width=1".parse::<Mollifier>().is_err());
    }
}
