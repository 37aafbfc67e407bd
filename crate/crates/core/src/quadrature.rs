//! Globally adaptive Gauss-Kronrod quadrature.
//!
//! Panels are bisected in order of decreasing error estimate until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)`. The caller supplies the
//! initial breakpoints, which is how near-singular integrands get their
//! geometric grading (see [`geometric_ladder`]). Ties in the work queue are
//! broken by panel creation order so the result does not depend on anything
//! but the inputs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_365_410,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and panel budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_panels: 1_000_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Value and error estimate of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// One 21-point Kronrod panel: (value, error estimate).
fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut res_g = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[derive(Debug, PartialEq)]
struct Queued {
    error: f64,
    id: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Integrate `f` over `[breakpoints[0], breakpoints[last]]`.
///
/// Breakpoints must be nondecreasing; zero-width pieces are skipped. A single
/// repeated point yields zero.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, breakpoints: &[f64], opts: &QuadOptions) -> Result<Estimate> {
    if breakpoints.len() < 2 {
        return Err(Error::InvalidArgument("need at least two breakpoints".into()));
    }
    if breakpoints.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("breakpoints must be finite".into()));
    }
    if breakpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("breakpoints must be nondecreasing".into()));
    }
    if !(opts.rel_tol >= 0.0 && opts.abs_tol >= 0.0) || (opts.rel_tol == 0.0 && opts.abs_tol == 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }

    let mut panels: Vec<Panel> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;

    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (value, error) = kronrod21(f, w[0], w[1]);
            heap.push(Queued { error, id: panels.len() });
            panels.push(Panel { a: w[0], b: w[1], value, error });
            alive.push(true);
            total += value;
            total_err += error;
        }
    }
    if panels.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }

    // Panels too narrow to bisect keep their error here.
    let mut frozen_err = 0.0;
    let mut live = panels.len();

    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err + frozen_err <= target {
            break;
        }
        let Some(Queued { id, .. }) = heap.pop() else {
            break;
        };
        let p = panels[id];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 8.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) {
            frozen_err += p.error;
            total_err -= p.error;
            continue;
        }
        if live + 1 > opts.max_panels {
            return Err(Error::NonConvergence {
                panels: live,
                estimate: total,
                error: total_err + frozen_err,
            });
        }
        alive[id] = false;
        let (v1, e1) = kronrod21(f, p.a, mid);
        let (v2, e2) = kronrod21(f, mid, p.b);
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        for (a, b, value, error) in [(p.a, mid, v1, e1), (mid, p.b, v2, e2)] {
            heap.push(Queued { error, id: panels.len() });
            panels.push(Panel { a, b, value, error });
            alive.push(true);
        }
        live += 1;
    }

    let mut pieces: Vec<&Panel> = panels
        .iter()
        .zip(&alive)
        .filter_map(|(p, &keep)| keep.then_some(p))
        .collect();
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = neumaier_sum(pieces.iter().map(|p| p.value));
    let error = neumaier_sum(pieces.iter().map(|p| p.error));
    let target = opts.abs_tol.max(opts.rel_tol * value.abs());
    if error > target && heap.is_empty() {
        return Err(Error::NonConvergence {
            panels: pieces.len(),
            estimate: value,
            error,
        });
    }
    Ok(Estimate {
        value,
        error,
        panels: pieces.len(),
    })
}

/// `∫_0^b x^p φ(x) dx` for `p > -1`, via `u = x^(p+1)` which removes the
/// endpoint singularity.
pub fn integrate_power_at_origin<F: Fn(f64) -> f64>(p: f64, phi: &F, b: f64, opts: &QuadOptions) -> Result<Estimate> {
    if p <= -1.0 {
        return Err(Error::DivergentAtOrigin { power: p });
    }
    if b <= 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let e = p + 1.0;
    let inv = 1.0 / e;
    let g = |u: f64| phi(u.powf(inv)) * inv;
    let u_end = b.powf(e);
    // grade toward u = 0 so the remaining fractional powers in φ(u^(1/e)) are resolved
    let mut pts = geometric_ladder(0.0, u_end, 0.5, 12, false);
    pts.insert(0, 0.0);
    integrate(&g, &pts, opts)
}

/// Points `end - (end-start)·r^j` (or mirrored toward `start` when
/// `toward_start`), for `j = 1..=levels`, plus both endpoints, ascending.
pub fn geometric_ladder(start: f64, end: f64, ratio: f64, levels: usize, toward_start: bool) -> Vec<f64> {
    let width = end - start;
    let mut pts = Vec::with_capacity(levels + 2);
    pts.push(start);
    let mut d = width;
    for _ in 0..levels {
        d *= ratio;
        let x = if toward_start { start + d } else { end - d };
        if x > start && x < end {
            pts.push(x);
        }
    }
    pts.push(end);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Compensated (Neumaier) summation in iteration order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> QuadOptions {
        QuadOptions::with_rel_tol(tol)
    }

    #[test]
    fn polynomial_is_exact() {
        let f = |x: f64| 7.0 * x.powi(4) + 2.0 * x.powi(3) - 11.0 * x.powi(2) + 15.0 * x + 1.0;
        let exact = |x: f64| 1.4 * x.powi(5) + 0.5 * x.powi(4) - 11.0 / 3.0 * x.powi(3) + 7.5 * x * x + x;
        let est = integrate(&f, &[-3.0, 10.0], &opts(1e-12)).unwrap();
        let want = exact(10.0) - exact(-3.0);
        assert!((est.value - want).abs() < 1e-10 * want.abs());
    }

    #[test]
    fn log_singularity_with_grading() {
        // ∫_0^1 ln(x) dx = -1
        let pts = geometric_ladder(0.0, 1.0, 0.5, 40, true);
        let est = integrate(&|x: f64| x.ln(), &pts, &opts(1e-10)).unwrap();
        assert!((est.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn near_pole_needs_grading_only_for_speed() {
        // ∫_0^{1-1e-6} dx/(1-x) = ln(1e6)
        let b = 1.0 - 1e-6;
        let ladder: Vec<f64> = geometric_ladder(0.0, 1.0, 0.5, 30, false)
            .into_iter()
            .filter(|&x| x < b)
            .chain(std::iter::once(b))
            .collect();
        let est = integrate(&|x: f64| 1.0 / (1.0 - x), &ladder, &opts(1e-12)).unwrap();
        assert!((est.value - 1e6f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn power_substitution_handles_inverse_sqrt() {
        // ∫_0^4 x^{-1/2} e^{-x} dx = √π erf(2)
        let est = integrate_power_at_origin(-0.5, &|x: f64| (-x).exp(), 4.0, &opts(1e-12)).unwrap();
        let want = std::f64::consts::PI.sqrt() * statrs::function::erf::erf(2.0);
        assert!((est.value - want).abs() < 1e-11);
    }

    #[test]
    fn empty_and_degenerate_intervals() {
        assert_eq!(integrate(&|x: f64| x, &[1.0, 1.0], &opts(1e-8)).unwrap().value, 0.0);
        assert!(integrate(&|x: f64| x, &[1.0], &opts(1e-8)).is_err());
        assert!(integrate(&|x: f64| x, &[1.0, 0.0], &opts(1e-8)).is_err());
        assert!(integrate_power_at_origin(-1.0, &|_| 1.0, 1.0, &opts(1e-8)).is_err());
    }

    #[test]
    fn budget_exhaustion_reports_nonconvergence() {
        let o = QuadOptions {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_panels: 3,
        };
        let r = integrate(&|x: f64| (50.0 * x).sin().abs(), &[0.0, 10.0], &o);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let s = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }
}
