//! The dual functional after Plancherel, written in spherical coordinates
//! `ξ = λ(cos θ ω + sin θ σ)`:
//!
//! ```text
//! Q_k = ∫_{θa}^{θb} ∫_0^∞ λ^{n-1-2s} χ(λ/2^k)² |f̂(λ(1 + c cos θ))|² dλ (sin θ)^{n-2} dθ
//! ```
//!
//! The `|S^{n-2}|` and `(2π)^{-n}` factors are left out here and restored by
//! the grid oracle. The phase factor `1 + c cos θ` vanishes at the critical
//! angle `θ₀ = arccos(-1/c)`; all θ-integrations grade their panels
//! geometrically toward `θ₀`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{halfline_energy, weighted_halfline_energy, CutoffLevel, Mollifier, Profile};
use crate::quadrature::{integrate, integrate_power_at_origin, QuadOptions};

/// Levels of dyadic grading toward a singular point beyond what the cutoff
/// level already demands.
const EXTRA_GRADING_LEVELS: i32 = 10;
const MAX_GRADING_LEVELS: i32 = 200;

/// `[θa, θb] ⊂ [0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularDomain {
    pub start: f64,
    pub end: f64,
}

impl AngularDomain {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(0.0 <= start && start <= end && end <= PI) {
            return Err(Error::InvalidArgument(format!(
                "angular domain [{start}, {end}] must satisfy 0 ≤ θa ≤ θb ≤ π"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn full() -> Self {
        Self { start: 0.0, end: PI }
    }

    /// `[π/2, θ₀]`, or `[π/2, π]` when there is no critical angle.
    pub fn up_to_critical(c: f64) -> Self {
        let end = critical_angle(c).unwrap_or(PI);
        Self {
            start: FRAC_PI_2,
            end: end.max(FRAC_PI_2),
        }
    }

    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

/// Dimension, speed, Sobolev weight, cutoff level and angular domain of one
/// evaluation of `Q_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub n: u32,
    pub c: f64,
    pub s: f64,
    pub k: CutoffLevel,
    pub domain: AngularDomain,
}

impl ProbeConfig {
    pub fn new(n: u32, c: f64, s: f64, k: CutoffLevel, domain: AngularDomain) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {n}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("speed must be positive, got {c}")));
        }
        if !s.is_finite() {
            return Err(Error::InvalidArgument("Sobolev exponent must be finite".into()));
        }
        Ok(Self { n, c, s, k, domain })
    }

    /// The `|D|^{-(n-1)/2}` weight of the dual `L²_t L^∞_x` estimate.
    pub fn endpoint(n: u32, c: f64, k: CutoffLevel, domain: AngularDomain) -> Result<Self> {
        Self::new(n, c, 0.5 * (n as f64 - 1.0), k, domain)
    }

    /// The `Ḣ^{n/2 - 1/q}` weight of the `L^q_t L^∞_x` estimate.
    pub fn time_exponent(n: u32, q: f64, c: f64, k: CutoffLevel, domain: AngularDomain) -> Result<Self> {
        if !(q > 2.0 && q.is_finite()) {
            return Err(Error::InvalidArgument(format!("time exponent must lie in (2, ∞), got {q}")));
        }
        Self::new(n, c, 0.5 * n as f64 - 1.0 / q, k, domain)
    }

    pub fn with_level(self, k: CutoffLevel) -> Self {
        Self { k, ..self }
    }

    /// `n - 1 - 2s`, the power of λ in the radial integrand.
    pub fn radial_power(&self) -> f64 {
        self.n as f64 - 1.0 - 2.0 * self.s
    }

    /// `n - 2s`, the power of `1/(1 + c cos θ)` left after substituting
    /// `η = λ(1 + c cos θ)`.
    pub fn angular_power(&self) -> f64 {
        self.n as f64 - 2.0 * self.s
    }
}

/// `θ₀ = arccos(-1/c)`, where `1 + c cos θ` vanishes.
pub fn critical_angle(c: f64) -> Result<f64> {
    if !(c >= 1.0) {
        return Err(Error::NoCriticalAngle(c));
    }
    Ok((-1.0 / c).acos())
}

/// `1 + c cos θ`, evaluated as `2c sin((θ₀+θ)/2) sin((θ₀-θ)/2)` when a
/// critical angle exists so it keeps full relative precision near `θ₀`.
pub fn phase_factor(c: f64, theta: f64) -> f64 {
    match critical_angle(c) {
        Ok(t0) => 2.0 * c * (0.5 * (t0 + theta)).sin() * (0.5 * (t0 - theta)).sin(),
        Err(_) => 1.0 + c * theta.cos(),
    }
}

/// Breakpoints on `[a, b]` graded dyadically toward `t0` (which may lie inside,
/// at an end, or beyond `b`) down to distance `floor`.
fn graded_points(a: f64, b: f64, t0: Option<f64>, floor: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    if let Some(t0) = t0 {
        if t0 > a && t0 < b {
            pts.push(t0);
        }
        for (reach, sign) in [(t0 - a, -1.0), (b - t0, 1.0)] {
            if reach <= 0.0 {
                continue;
            }
            let mut d = reach;
            while d > floor {
                d *= 0.5;
                let x = t0 + sign * d;
                if x > a && x < b {
                    pts.push(x);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn check_subcritical(c: f64, dom: &AngularDomain) -> Result<Option<f64>> {
    match critical_angle(c) {
        Ok(t0) if dom.end >= t0 => Err(Error::DomainTouchesSingularity {
            end: dom.end,
            critical: t0,
        }),
        Ok(t0) => Ok(Some(t0)),
        Err(_) => Ok(None),
    }
}

/// `∫_{θa}^{θb} (sin θ)^{n-2} / (1 + c cos θ) dθ` on a strictly subcritical
/// domain.
pub fn angular_integral(n: u32, c: f64, dom: AngularDomain, tol: f64) -> Result<f64> {
    weighted_angular_integral(n, c, 1.0, dom, tol)
}

/// `∫_{θa}^{θb} (sin θ)^{n-2} (1 + c cos θ)^{-β} dθ`.
///
/// For `β ≥ 1` the domain must stay strictly below `θ₀`; for `0 < β < 1`
/// it may end exactly at `θ₀`, where the integrable singularity is removed by
/// the substitution `θ = θ₀ - t^{1/(1-β)}` on the last panel.
pub fn weighted_angular_integral(n: u32, c: f64, beta: f64, dom: AngularDomain, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("speed must be positive, got {c}")));
    }
    if dom.width() == 0.0 {
        return Ok(0.0);
    }
    let m = n as f64 - 2.0;
    let weight = |th: f64| th.sin().powf(m) * phase_factor(c, th).powf(-beta);
    let opts = QuadOptions::with_rel_tol(tol);
    let t0 = match critical_angle(c) {
        Ok(t0) => t0,
        Err(_) => return Ok(integrate(&weight, &[dom.start, dom.end], &opts)?.value),
    };
    if dom.end < t0 || beta <= 0.0 {
        if dom.end > t0 {
            return Err(Error::DomainTouchesSingularity {
                end: dom.end,
                critical: t0,
            });
        }
        let gap = (t0 - dom.end).max(f64::MIN_POSITIVE);
        let floor = 0.25 * gap;
        let pts = graded_points(dom.start, dom.end, Some(t0), floor);
        return Ok(integrate(&weight, &pts, &opts)?.value);
    }
    if dom.end > t0 || beta >= 1.0 {
        return Err(Error::DomainTouchesSingularity {
            end: dom.end,
            critical: t0,
        });
    }
    // dom.end == θ₀ with 0 < β < 1
    let split = t0 - 0.5 * (t0 - dom.start);
    let head = if split > dom.start {
        integrate(&weight, &[dom.start, split], &opts)?.value
    } else {
        0.0
    };
    let e = 1.0 - beta;
    let d_max = t0 - split;
    // (θ₀-θ)^{-β} · ψ(θ), ψ = (sin θ)^{n-2} ((θ₀-θ)/(1+c cos θ))^β
    let psi = |t: f64| {
        let d = t.powf(1.0 / e);
        let th = t0 - d;
        // 1 + c cos(θ₀ - d) written in terms of d, exact as d → 0
        let ratio = if d > 0.0 {
            d / (2.0 * c * (t0 - 0.5 * d).sin() * (0.5 * d).sin())
        } else {
            1.0 / (c * t0.sin())
        };
        th.sin().powf(m) * ratio.powf(beta) / e
    };
    let tail = integrate(&psi, &[0.0, d_max.powf(e)], &opts)?.value;
    Ok(head + tail)
}

/// `Q_k` for `cfg`, profile `p` and cutoff `m`, to relative accuracy `tol`.
///
/// The λ-integral is truncated where `|f̂(λ(1+c cos θ))|²` falls below
/// [`crate::profiles::SPECTRAL_FLOOR`] or where the cutoff vanishes. With
/// `k = Unbounded` the domain must be strictly subcritical.
pub fn reduced_q_value(cfg: &ProbeConfig, p: &Profile, m: &Mollifier, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let power = cfg.radial_power();
    if p.amplitude == 0.0 || cfg.domain.width() == 0.0 {
        return Ok(0.0);
    }
    if power <= -1.0 {
        return Err(Error::DivergentAtOrigin { power });
    }
    let t0 = match cfg.k {
        CutoffLevel::Unbounded => check_subcritical(cfg.c, &cfg.domain)?,
        CutoffLevel::Level(_) => critical_angle(cfg.c).ok(),
    };

    let inner_opts = QuadOptions::with_rel_tol((tol * 1e-2).max(1e-13));
    let outer_opts = QuadOptions::with_rel_tol(tol);
    let sin_power = cfg.n as f64 - 2.0;
    let cut_scale = cfg.k.scale();
    let support = m.support(cfg.k);
    let flat_end = m.inner_radius * cut_scale;
    let reach = p.spectral_radius();
    let scale = p.spectral_scale();

    // radial integral at |1 + c cos θ| = a
    let radial = |a: f64| -> Result<f64> {
        let lam_end = if a > 0.0 { support.min(reach / a) } else { support };
        if !lam_end.is_finite() {
            // only reachable with a = 0 and no cutoff, excluded above
            return Err(Error::DomainTouchesSingularity {
                end: cfg.domain.end,
                critical: t0.unwrap_or(cfg.domain.end),
            });
        }
        let g = |lam: f64| m.cutoff(lam, cfg.k).powi(2) * p.fhat_norm_sq(lam * a);
        // features of |f̂(λa)|² sit at λ ~ scale/a, the cutoff edge at [inner, outer]·2^k
        let mut pts: Vec<f64> = Vec::new();
        if a > 0.0 {
            let mut x = 0.25 * scale / a;
            while x < lam_end {
                pts.push(x);
                x *= 2.0;
            }
        }
        for x in [flat_end, support] {
            if x.is_finite() && x < lam_end {
                pts.push(x);
            }
        }
        pts.push(lam_end);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let first = pts[0];
        let head = if power == 0.0 {
            integrate(&g, &[0.0, first], &inner_opts)?.value
        } else {
            integrate_power_at_origin(power, &g, first, &inner_opts)?.value
        };
        let body = if pts.len() > 1 {
            let weighted = |lam: f64| lam.powf(power) * g(lam);
            integrate(&weighted, &pts, &inner_opts)?.value
        } else {
            0.0
        };
        Ok(head + body)
    };

    // the closure of an adaptive integrator cannot return errors, so the
    // first inner failure is parked here and re-raised afterwards
    let failure = std::sync::Mutex::new(None);
    let outer = |sin_theta: f64, a: f64| -> f64 {
        match radial(a) {
            Ok(v) => sin_theta.powf(sin_power) * v,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    };

    let dom = cfg.domain;
    let c = cfg.c;
    let value = match t0 {
        None => integrate(&|th: f64| outer(th.sin(), phase_factor(c, th).abs()), &[dom.start, dom.end], &outer_opts)?.value,
        Some(t0) => {
            // work in d = |θ - θ₀|, where 1 + c cos θ = ∓2c sin(θ₀ ∓ d/2) sin(d/2)
            // keeps full precision at any depth of grading
            let levels = match cfg.k {
                CutoffLevel::Level(k) => k.max(0) + EXTRA_GRADING_LEVELS,
                CutoffLevel::Unbounded => MAX_GRADING_LEVELS,
            };
            let mut total = 0.0;
            if dom.start < t0 {
                let (d_lo, d_hi) = (t0 - dom.end.min(t0), t0 - dom.start);
                let f = |d: f64| outer((t0 - d).sin(), 2.0 * c * (t0 - 0.5 * d).sin() * (0.5 * d).sin());
                total += integrate(&f, &dyadic_ladder(d_lo, d_hi, levels), &outer_opts)?.value;
            }
            if dom.end > t0 {
                let (d_lo, d_hi) = (dom.start.max(t0) - t0, dom.end - t0);
                let f = |d: f64| outer((t0 + d).sin(), (2.0 * c * (t0 + 0.5 * d).sin() * (0.5 * d).sin()).abs());
                total += integrate(&f, &dyadic_ladder(d_lo, d_hi, levels), &outer_opts)?.value;
            }
            total
        }
    };
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(value)
}

/// `[lo, hi]` with breakpoints at `hi/2^j`, stopping at `lo` or after `levels`
/// halvings.
fn dyadic_ladder(lo: f64, hi: f64, levels: i32) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let mut x = hi;
    for _ in 0..levels.clamp(1, MAX_GRADING_LEVELS) {
        x *= 0.5;
        if x <= lo {
            break;
        }
        pts.push(x);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `E(f) · ∫ (sin θ)^{n-2}/(1 + c cos θ) dθ`, the `k → ∞` limit of `Q_k` for
/// `s = (n-1)/2` on a strictly subcritical domain.
pub fn factorized_value(n: u32, c: f64, p: &Profile, dom: AngularDomain, tol: f64) -> Result<f64> {
    check_subcritical(c, &dom)?;
    if dom.width() == 0.0 {
        return Ok(0.0);
    }
    Ok(halfline_energy(p, tol)? * angular_integral(n, c, dom, tol)?)
}

/// `k → ∞` limit of `Q_k` for a general weight:
/// `∫_0^∞ η^{n-1-2s}|f̂|² dη · ∫ (sin θ)^{n-2}(1 + c cos θ)^{-(n-2s)} dθ`.
pub fn factorized_limit(cfg: &ProbeConfig, p: &Profile, tol: f64) -> Result<f64> {
    let energy = weighted_halfline_energy(p, cfg.radial_power(), tol)?;
    let angular = weighted_angular_integral(cfg.n, cfg.c, cfg.angular_power(), cfg.domain, tol)?;
    Ok(energy * angular)
}

/// `|S^{n-1}| (2π)^{-n} ∫_0^∞ λ^{n-1-2s} χ(λ/2^k)² |f̂(λ)|² dλ`, the value of
/// the squared dual functional for a source at rest (`c = 0`).
pub fn radial_separable_value(n: u32, s: f64, k: CutoffLevel, p: &Profile, m: &Mollifier, tol: f64) -> Result<f64> {
    let power = n as f64 - 1.0 - 2.0 * s;
    if power <= -1.0 {
        return Err(Error::DivergentAtOrigin { power });
    }
    let opts = QuadOptions::with_rel_tol(tol);
    let end = m.support(k).min(p.spectral_radius());
    let g = |lam: f64| m.cutoff(lam, k).powi(2) * p.fhat_norm_sq(lam);
    let first = (0.25 * p.spectral_scale()).min(end);
    let head = integrate_power_at_origin(power, &g, first, &opts)?.value;
    let mut pts = vec![first];
    let mut x = first;
    while x < end {
        x = (2.0 * x).min(end);
        pts.push(x);
    }
    let weighted = |lam: f64| lam.powf(power) * g(lam);
    let body = integrate(&weighted, &pts, &opts)?.value;
    let nf = n as f64;
    Ok(sphere_surface_measure(n - 1) * (2.0 * PI).powf(-nf) * (head + body))
}

/// The regularized three-dimensional, unit-speed quantity
/// `∫_ε^2 ∫_0^∞ |f̂(λu)|² dλ du = E(f) ln(2/ε)`, by closed form and by
/// quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct N3Remark {
    pub eps: f64,
    pub closed_form: f64,
    pub quadrature: f64,
}

pub fn n3_remark_value(eps: f64, p: &Profile, tol: f64) -> Result<N3Remark> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 2], got {eps}")));
    }
    let energy = halfline_energy(p, tol)?;
    let closed_form = energy * (2.0 / eps).ln();
    if eps == 2.0 || p.amplitude == 0.0 {
        return Ok(N3Remark {
            eps,
            closed_form,
            quadrature: 0.0,
        });
    }
    let inner_opts = QuadOptions::with_rel_tol((tol * 1e-2).max(1e-13));
    let reach = p.spectral_radius();
    let scale = p.spectral_scale();
    let failure = std::sync::Mutex::new(None);
    let along_u = |u: f64| -> f64 {
        let end = reach / u;
        let mut pts = vec![0.0];
        let mut x = 0.25 * scale / u;
        while x < end {
            pts.push(x);
            x *= 2.0;
        }
        pts.push(end);
        match integrate(&|lam: f64| p.fhat_norm_sq(lam * u), &pts, &inner_opts) {
            Ok(e) => e.value,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    };
    let mut pts = vec![eps];
    let mut x = eps;
    while 2.0 * x < 2.0 {
        x *= 2.0;
        pts.push(x);
    }
    pts.push(2.0);
    pts.dedup();
    let quadrature = integrate(&along_u, &pts, &QuadOptions::with_rel_tol(tol))?.value;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(N3Remark {
        eps,
        closed_form,
        quadrature,
    })
}

/// `|S^m| = 2π^{(m+1)/2} / Γ((m+1)/2)`, via `|S^m| = 2π/(m-1) |S^{m-2}|`.
pub fn sphere_surface_measure(m: u32) -> f64 {
    let mut area = if m.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut j = if m.is_multiple_of(2) { 0 } else { 1 };
    while j < m {
        j += 2;
        area *= 2.0 * PI / (j as f64 - 1.0);
    }
    area
}

/// `(k, Q_k)` pairs for one configuration, ordered by `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSequence {
    pub config: ProbeConfig,
    pub entries: Vec<(i32, f64)>,
}

impl QSequence {
    /// Evaluate `Q_k` for each `k` in `levels` (in parallel; order preserved).
    pub fn compute(config: &ProbeConfig, levels: &[i32], p: &Profile, m: &Mollifier, tol: f64) -> Result<Self> {
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("levels must be strictly increasing".into()));
        }
        let entries = levels
            .par_iter()
            .map(|&k| {
                let cfg = config.with_level(CutoffLevel::Level(k));
                reduced_q_value(&cfg, p, m, tol).map(|q| (k, q))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: *config,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nondecreasing up to a relative slack (quadrature noise).
    pub fn is_monotone(&self, rel_slack: f64) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[1].1 >= w[0].1 - rel_slack * w[0].1.abs())
    }

    /// `Q_{k+1} - Q_k` for consecutive entries.
    pub fn increments(&self) -> Vec<f64> {
        self.entries.windows(2).map(|w| w[1].1 - w[0].1).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fine_sum<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        // composite Simpson, brute force
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn critical_angles() {
        assert!((critical_angle(2.0).unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(critical_angle(1.0).unwrap(), PI);
        assert_eq!(critical_angle(0.5), Err(Error::NoCriticalAngle(0.5)));
    }

    #[test]
    fn phase_factor_matches_naive_form() {
        for c in [0.5, 1.0, 1.5, 2.0, 3.0] {
            for i in 0..=20 {
                let th = PI * i as f64 / 20.0;
                assert!((phase_factor(c, th) - (1.0 + c * th.cos())).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn angular_integral_three_dimensions_closed_form() {
        // ∫ sinθ/(1+2cosθ) = -(1/2) ln(1+2cosθ); over [π/2, arccos(-1/4)] this is ln(2)/2
        let end = (-0.25f64).acos();
        let brute = fine_sum(|t| t.sin() / (1.0 + 2.0 * t.cos()), FRAC_PI_2, end, 20_000);
        assert!((brute - 0.346_573_590_279_972_6).abs() < 1e-12);
        let got = angular_integral(3, 2.0, AngularDomain::new(FRAC_PI_2, end).unwrap(), 1e-12).unwrap();
        assert!((got - 0.5 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn angular_integral_near_critical_angle() {
        // local model: (sinθ₀)^{n-2}/(c sinθ₀) ln(1e3) = (√3/4) ln(1e3) for n=4, c=2
        let t0 = 2.0 * PI / 3.0;
        let dom = |eps: f64| AngularDomain::new(FRAC_PI_2, t0 - eps).unwrap();
        let near = angular_integral(4, 2.0, dom(1e-6), 1e-12).unwrap();
        let far = angular_integral(4, 2.0, dom(1e-3), 1e-12).unwrap();
        let model = 3f64.sqrt() / 4.0 * 1e3f64.ln();
        assert!(((near - far) / model - 1.0).abs() < 1e-3, "{} vs {model}", near - far);
        // independent check: Simpson on the same difference
        let brute = fine_sum(|t| t.sin().powi(2) / phase_factor(2.0, t), t0 - 1e-3, t0 - 1e-6, 2_000_000);
        assert!(((near - far) - brute).abs() < 1e-6 * brute);
    }

    #[test]
    fn angular_integral_edge_cases() {
        let t0 = critical_angle(2.0).unwrap();
        assert_eq!(angular_integral(4, 2.0, AngularDomain::new(1.0, 1.0).unwrap(), 1e-8).unwrap(), 0.0);
        let touching = AngularDomain::new(FRAC_PI_2, t0).unwrap();
        assert!(matches!(
            angular_integral(4, 2.0, touching, 1e-8),
            Err(Error::DomainTouchesSingularity { .. })
        ));
        // c < 1: integrand is bounded everywhere
        let v = angular_integral(3, 0.5, AngularDomain::full(), 1e-10).unwrap();
        // ∫_0^π sinθ/(1+cosθ/2) dθ = 2 ln 3
        assert!((v - 2.0 * 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn weighted_angular_integral_up_to_critical_angle() {
        // n=3, c=2, β=1/2: ∫ sinθ (1+2cosθ)^{-1/2} over [π/2, θ₀] = [-(1+2cosθ)^{1/2}] = 1
        let dom = AngularDomain::up_to_critical(2.0);
        let v = weighted_angular_integral(3, 2.0, 0.5, dom, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11, "{v}");
        // β = 1/3: ∫ = (1/2)(3/2)[u^{2/3}]_0^1 = 3/4
        let v = weighted_angular_integral(3, 2.0, 1.0 / 3.0, dom, 1e-12).unwrap();
        assert!((v - 0.75).abs() < 1e-11, "{v}");
        assert!(weighted_angular_integral(3, 2.0, 1.0, dom, 1e-8).is_err());
    }

    #[test]
    fn sphere_measures() {
        assert_eq!(sphere_surface_measure(0), 2.0);
        assert!((sphere_surface_measure(1) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_surface_measure(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_surface_measure(3) - 2.0 * PI * PI).abs() < 1e-13);
        for m in 0..12u32 {
            let x = (m as f64 + 1.0) / 2.0;
            let gamma = 2.0 * PI.powf(x) / statrs::function::gamma::gamma(x);
            assert!((sphere_surface_measure(m) / gamma - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_amplitude_gives_zero() {
        let cfg = ProbeConfig::endpoint(4, 2.0, CutoffLevel::Level(6), AngularDomain::up_to_critical(2.0)).unwrap();
        let zero = Profile::default_normalized().scaled(0.0);
        assert_eq!(reduced_q_value(&cfg, &zero, &Mollifier::default(), 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn divergent_at_origin_for_oversized_weight() {
        // s = n/2 (the q = ∞ endpoint): λ^{-1}
        let cfg = ProbeConfig::new(4, 2.0, 2.0, CutoffLevel::Level(4), AngularDomain::up_to_critical(2.0)).unwrap();
        assert!(matches!(
            reduced_q_value(&cfg, &Profile::default_normalized(), &Mollifier::default(), 1e-8),
            Err(Error::DivergentAtOrigin { .. })
        ));
    }

    #[test]
    fn unbounded_level_needs_subcritical_domain() {
        let cfg = ProbeConfig::endpoint(4, 2.0, CutoffLevel::Unbounded, AngularDomain::up_to_critical(2.0)).unwrap();
        assert!(matches!(
            reduced_q_value(&cfg, &Profile::default_normalized(), &Mollifier::default(), 1e-8),
            Err(Error::DomainTouchesSingularity { .. })
        ));
    }

    #[test]
    fn factorization_identity_spot_check() {
        let end = (-0.25f64).acos();
        let dom = AngularDomain::new(FRAC_PI_2, end).unwrap();
        let p = Profile::default_normalized();
        let cfg = ProbeConfig::endpoint(4, 2.0, CutoffLevel::Unbounded, dom).unwrap();
        let q = reduced_q_value(&cfg, &p, &Mollifier::default(), 1e-10).unwrap();
        let f = factorized_value(4, 2.0, &p, dom, 1e-10).unwrap();
        assert!((q / f - 1.0).abs() < 1e-6, "{q} vs {f}");
    }

    #[test]
    fn unnormalized_gaussian_factorized_value() {
        // π^{3/2} · ln(2)/2
        let end = (-0.25f64).acos();
        let dom = AngularDomain::new(FRAC_PI_2, end).unwrap();
        let v = factorized_value(3, 2.0, &Profile::gaussian(1.0).unwrap(), dom, 1e-11).unwrap();
        assert!((v - 1.929_835_425_718_453).abs() < 1e-9, "{v}");
        let empty = AngularDomain::new(1.0, 1.0).unwrap();
        assert_eq!(factorized_value(3, 2.0, &Profile::default_normalized(), empty, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn n3_remark_matches_log_law() {
        let p = Profile::default_normalized();
        let unit = p.scaled(1.0 / PI.sqrt());
        let r = n3_remark_value(0.2, &unit, 1e-10).unwrap();
        assert!((r.closed_form - 10f64.ln()).abs() < 1e-9);
        assert!((r.quadrature / r.closed_form - 1.0).abs() < 1e-8);
        let empty = n3_remark_value(2.0, &p, 1e-8).unwrap();
        assert_eq!(empty.closed_form, 0.0);
        assert_eq!(empty.quadrature, 0.0);
        assert!(n3_remark_value(0.0, &p, 1e-8).is_err());
        assert!(n3_remark_value(2.5, &p, 1e-8).is_err());
    }

    #[test]
    fn n3_remark_equals_reduced_integral_with_unit_speed() {
        // u = 1 + cos θ maps θ ∈ [0, arccos(ε-1)] onto u ∈ [ε, 2]
        let p = Profile::default_normalized();
        let eps = 0.02;
        let dom = AngularDomain::new(0.0, (eps - 1.0f64).acos()).unwrap();
        let cfg = ProbeConfig::endpoint(3, 1.0, CutoffLevel::Unbounded, dom).unwrap();
        let q = reduced_q_value(&cfg, &p, &Mollifier::default(), 1e-10).unwrap();
        let r = n3_remark_value(eps, &p, 1e-10).unwrap();
        assert!((q / r.closed_form - 1.0).abs() < 1e-7, "{q} vs {}", r.closed_form);
    }
}
