//! Verdicts from Q-sequences: a logarithmic growth fit for the endpoint
//! weight, geometric-tail convergence for `q > 2`, and the log-law fit of the
//! angular integral as the domain approaches `θ₀`.
//!
//! The finite-k decision rules are ours. A `Bounded` verdict says only that
//! this family of sources does not falsify the estimate.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{CutoffLevel, Mollifier, Profile};
use crate::reduced::{angular_integral, critical_angle, AngularDomain, ProbeConfig, QSequence};

/// A divergent slope must exceed this many standard errors.
pub const DIVERGENCE_SIGMA: f64 = 3.0;
/// Minimum number of fitted points behind a divergent verdict.
pub const MIN_DIVERGENT_POINTS: usize = 8;
/// Each of the last [`MIN_DIVERGENT_POINTS`] increments must be at least this
/// fraction of the fitted slope. Rules out a converging sequence whose last
/// few increments happen to look linear.
pub const SUSTAINED_INCREMENT_FRACTION: f64 = 0.8;
/// Relative step `|Q_k - Q_{k-1}| / Q_k` below which a step counts as settled.
pub const BOUNDED_REL_STEP: f64 = 1e-4;
/// Consecutive settled steps behind a bounded verdict.
pub const MIN_BOUNDED_POINTS: usize = 5;
/// Number of trailing levels used by [`growth_fit`] in the probes.
pub const DEFAULT_FIT_WINDOW: usize = 12;
/// Smallest `kmax` accepted by [`falsification_probe`].
pub const MIN_FALSIFY_KMAX: i32 = 12;
/// Default last level of [`boundedness_probe`]; differences decay like
/// `2^{-(1-2/q)k}`, slowly for `q` near 2.
pub const DEFAULT_CONTRAST_KMAX: i32 = 40;
/// Relative tolerance of every `Q_k` evaluated by the probes.
pub const PROBE_TOL: f64 = 1e-8;

/// Least-squares line `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub slope_stderr: f64,
    pub points: usize,
}

/// Fit a line through `(x, y)` pairs; needs at least three distinct `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::InvalidArgument("x and y lengths differ".into()));
    }
    if n < 3 {
        return Err(Error::InsufficientData(format!("a fit needs at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("abscissae are not distinct".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        residual_rms: (ssr / nf).sqrt(),
        slope_stderr: (ssr / (nf - 2.0) / sxx).sqrt(),
        points: n,
    })
}

/// Fit `Q_k ≈ intercept + slope·k` over the last `window` entries.
pub fn growth_fit(seq: &QSequence, window: usize) -> Result<LinearFit> {
    if window < 3 {
        return Err(Error::InsufficientData(format!("window must be at least 3, got {window}")));
    }
    if seq.len() < window {
        return Err(Error::InsufficientData(format!(
            "sequence has {} entries, window needs {window}",
            seq.len()
        )));
    }
    let tail = &seq.entries[seq.len() - window..];
    let xs: Vec<f64> = tail.iter().map(|&(k, _)| k as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|&(_, q)| q).collect();
    linear_fit(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Divergent { slope: f64, slope_stderr: f64 },
    /// Family-level non-falsification, not a proof of the estimate.
    Bounded { limit_estimate: f64, tail_bound: f64 },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Verdict::Divergent { .. })
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Verdict::Bounded { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }
}

/// A probe's sequence, fit and verdict. `sequence` is absent when the probe
/// stopped before computing anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub sequence: Option<QSequence>,
    pub fit: Option<LinearFit>,
    pub verdict: Verdict,
}

/// Apply the divergence rules to a sequence.
pub fn classify_growth(seq: &QSequence, window: usize) -> Result<(LinearFit, Verdict)> {
    let fit = growth_fit(seq, window)?;
    let inc = seq.increments();
    let recent = &inc[inc.len().saturating_sub(MIN_DIVERGENT_POINTS)..];
    let verdict = if fit.points < MIN_DIVERGENT_POINTS {
        Verdict::Inconclusive {
            reason: format!("fit window {} is below {MIN_DIVERGENT_POINTS} points", fit.points),
        }
    } else if !(fit.slope > 0.0 && fit.slope > DIVERGENCE_SIGMA * fit.slope_stderr) {
        Verdict::Inconclusive {
            reason: format!(
                "slope {} does not exceed {DIVERGENCE_SIGMA} standard errors ({})",
                fit.slope, fit.slope_stderr
            ),
        }
    } else if recent.len() < MIN_DIVERGENT_POINTS
        || recent.iter().any(|&d| d < SUSTAINED_INCREMENT_FRACTION * fit.slope)
    {
        Verdict::Inconclusive {
            reason: "increments are not sustained at the fitted slope".into(),
        }
    } else {
        Verdict::Divergent {
            slope: fit.slope,
            slope_stderr: fit.slope_stderr,
        }
    };
    Ok((fit, verdict))
}

/// Apply the boundedness rules to a sequence.
pub fn classify_convergence(seq: &QSequence) -> Verdict {
    let inc = seq.increments();
    if inc.len() < MIN_BOUNDED_POINTS {
        return Verdict::Inconclusive {
            reason: format!("need {MIN_BOUNDED_POINTS} differences, have {}", inc.len()),
        };
    }
    let last = seq.entries[seq.len() - 1].1;
    let tail = &inc[inc.len() - MIN_BOUNDED_POINTS..];
    let values = &seq.entries[seq.len() - MIN_BOUNDED_POINTS..];
    let settled = tail
        .iter()
        .zip(values)
        .all(|(d, &(_, q))| d.abs() <= BOUNDED_REL_STEP * q.abs());
    if !settled {
        return Verdict::Inconclusive {
            reason: format!(
                "relative steps did not stay below {BOUNDED_REL_STEP} for {MIN_BOUNDED_POINTS} levels"
            ),
        };
    }
    let d_last = tail[tail.len() - 1].abs();
    if d_last == 0.0 {
        return Verdict::Bounded {
            limit_estimate: last,
            tail_bound: 0.0,
        };
    }
    let ratio = tail
        .windows(2)
        .map(|w| if w[0] == 0.0 { f64::INFINITY } else { (w[1] / w[0]).abs() })
        .fold(0.0, f64::max);
    if ratio >= 1.0 {
        return Verdict::Inconclusive {
            reason: format!("differences are not decaying (ratio {ratio})"),
        };
    }
    Verdict::Bounded {
        limit_estimate: last,
        tail_bound: d_last * ratio / (1.0 - ratio),
    }
}

fn levels(kmax: i32) -> Vec<i32> {
    (0..=kmax).collect()
}

/// Endpoint probe `s = (n-1)/2` over `[π/2, θ₀]` for `k = 0..=kmax`.
pub fn falsification_probe(n: u32, c: f64, p: &Profile, m: &Mollifier, kmax: i32) -> Result<ProbeOutcome> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("falsification needs n ≥ 3, got {n}")));
    }
    if kmax < MIN_FALSIFY_KMAX {
        return Err(Error::InvalidArgument(format!(
            "kmax must be at least {MIN_FALSIFY_KMAX}, got {kmax}"
        )));
    }
    if critical_angle(c).is_err() {
        return Ok(ProbeOutcome {
            sequence: None,
            fit: None,
            verdict: Verdict::Inconclusive {
                reason: format!("no critical angle for c = {c}"),
            },
        });
    }
    let cfg = ProbeConfig::endpoint(n, c, CutoffLevel::Level(0), AngularDomain::up_to_critical(c))?;
    let seq = QSequence::compute(&cfg, &levels(kmax), p, m, PROBE_TOL)?;
    let window = DEFAULT_FIT_WINDOW.min(seq.len());
    let (fit, verdict) = classify_growth(&seq, window)?;
    Ok(ProbeOutcome {
        sequence: Some(seq),
        fit: Some(fit),
        verdict,
    })
}

/// `L^q_t` probe `s = n/2 - 1/q` over `[π/2, θ₀]` (or `[π/2, π]` when `c < 1`).
pub fn boundedness_probe(n: u32, q: f64, c: f64, p: &Profile, m: &Mollifier, kmax: i32) -> Result<ProbeOutcome> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "q must lie in (2, ∞), got {q}; the q = 2 endpoint is the falsification probe"
        )));
    }
    if kmax < MIN_BOUNDED_POINTS as i32 {
        return Err(Error::InvalidArgument(format!("kmax must be at least {MIN_BOUNDED_POINTS}")));
    }
    let cfg = ProbeConfig::time_exponent(n, q, c, CutoffLevel::Level(0), AngularDomain::up_to_critical(c))?;
    let seq = QSequence::compute(&cfg, &levels(kmax), p, m, PROBE_TOL)?;
    let verdict = classify_convergence(&seq);
    Ok(ProbeOutcome {
        sequence: Some(seq),
        fit: None,
        verdict,
    })
}

/// `J ≈ a + b·ln(1/ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub b: f64,
    pub a: f64,
    pub residual_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    /// `(ε, J(ε))` with `J(ε) = ∫_{π/2}^{θ₀-ε} (sin θ)^{n-2}/(1 + c cos θ) dθ`.
    pub points: Vec<(f64, f64)>,
    /// Absent with fewer than two points.
    pub fit: Option<LogFit>,
}

pub fn epsilon_sweep(n: u32, c: f64, eps: &[f64], tol: f64) -> Result<EpsilonSweep> {
    let t0 = critical_angle(c)?;
    if eps.is_empty() {
        return Err(Error::InvalidArgument("ε list is empty".into()));
    }
    let reach = t0 - FRAC_PI_2;
    if eps.iter().any(|&e| !(e > 0.0 && e <= reach)) {
        return Err(Error::InvalidArgument(format!("every ε must lie in (0, {reach}]")));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("ε values must be strictly decreasing".into()));
    }
    let points = eps
        .iter()
        .map(|&e| {
            let end = (t0 - e).max(FRAC_PI_2);
            angular_integral(n, c, AngularDomain::new(FRAC_PI_2, end)?, tol).map(|j| (e, j))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = match points.len() {
        0 | 1 => None,
        2 => {
            let (e0, j0) = points[0];
            let (e1, j1) = points[1];
            let b = (j1 - j0) / (e0 / e1).ln();
            Some(LogFit {
                b,
                a: j0 - b * (1.0 / e0).ln(),
                residual_rms: 0.0,
            })
        }
        _ => {
            let xs: Vec<f64> = points.iter().map(|&(e, _)| (1.0 / e).ln()).collect();
            let ys: Vec<f64> = points.iter().map(|&(_, j)| j).collect();
            let f = linear_fit(&xs, &ys)?;
            Some(LogFit {
                b: f.slope,
                a: f.intercept,
                residual_rms: f.residual_rms,
            })
        }
    };
    Ok(EpsilonSweep { points, fit })
}

/// `ln 2 · (sin θ₀)^{n-3}/c · E`, the asymptotic growth of `Q_k` per level.
pub fn slope_law(n: u32, c: f64, energy: f64) -> Result<f64> {
    Ok(std::f64::consts::LN_2 * angular_log_coefficient(n, c)? * energy)
}

/// `(sin θ₀)^{n-2}/(c sin θ₀)`, the coefficient of `ln(1/ε)` in `J(ε)`.
pub fn angular_log_coefficient(n: u32, c: f64) -> Result<f64> {
    let t0 = critical_angle(c)?;
    Ok(t0.sin().powi(n as i32 - 3) / c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::halfline_energy;
    use proptest::prelude::*;

    fn synthetic(values: impl Fn(i32) -> f64, kmax: i32) -> QSequence {
        let cfg = ProbeConfig::endpoint(4, 2.0, CutoffLevel::Level(0), AngularDomain::up_to_critical(2.0)).unwrap();
        QSequence {
            config: cfg,
            entries: (0..=kmax).map(|k| (k, values(k))).collect(),
        }
    }

    #[test]
    fn exact_line() {
        let fit = growth_fit(&synthetic(|k| 2.0 + 3.0 * k as f64, 9), 10).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn constant_sequence() {
        let fit = growth_fit(&synthetic(|_| 7.0, 9), 10).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.residual_rms, 0.0);
    }

    #[test]
    fn fit_needs_data() {
        assert!(matches!(growth_fit(&synthetic(|k| k as f64, 1), 3), Err(Error::InsufficientData(_))));
        assert!(matches!(growth_fit(&synthetic(|k| k as f64, 9), 2), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn converging_sequence_is_not_divergent() {
        // increments 2^{-k/8}: slowly converging, nearly linear over a short window
        let seq = synthetic(|k| (0..k).map(|j| 0.5f64.powf(j as f64 / 8.0)).sum(), 40);
        let (_, v) = classify_growth(&seq, DEFAULT_FIT_WINDOW).unwrap();
        assert!(v.is_inconclusive(), "{v:?}");
        assert!(classify_convergence(&seq).is_inconclusive());
    }

    #[test]
    fn geometric_sequence_is_bounded() {
        let seq = synthetic(|k| 5.0 - 0.5f64.powi(k), 40);
        match classify_convergence(&seq) {
            Verdict::Bounded {
                limit_estimate,
                tail_bound,
            } => {
                assert!((limit_estimate + tail_bound - 5.0).abs() < 1e-15);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn falsify_rejects_subcritical_speed() {
        let p = Profile::default_normalized();
        let out = falsification_probe(4, 0.5, &p, &Mollifier::default(), 24).unwrap();
        match out.verdict {
            Verdict::Inconclusive { reason } => assert!(reason.contains("no critical angle")),
            v => panic!("{v:?}"),
        }
        assert!(falsification_probe(4, 2.0, &p, &Mollifier::default(), 8).is_err());
    }

    #[test]
    fn falsify_four_dimensions() {
        let p = Profile::default_normalized();
        let out = falsification_probe(4, 2.0, &p, &Mollifier::default(), 24).unwrap();
        let law = slope_law(4, 2.0, halfline_energy(&p, 1e-12).unwrap()).unwrap();
        match out.verdict {
            Verdict::Divergent { slope, .. } => assert!((slope / law - 1.0).abs() < 0.05, "{slope} vs {law}"),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn unit_speed_degenerates_in_four_dimensions() {
        // sin θ₀ = 0 when c = 1: the angular singularity is integrable for n ≥ 4
        let p = Profile::default_normalized();
        let out = falsification_probe(4, 1.0, &p, &Mollifier::default(), 24).unwrap();
        assert!(!out.verdict.is_divergent(), "{:?}", out.verdict);
    }

    #[test]
    fn contrast_rejects_endpoint() {
        let p = Profile::default_normalized();
        assert!(boundedness_probe(4, 2.0, 2.0, &p, &Mollifier::default(), 40).is_err());
        assert!(boundedness_probe(4, f64::INFINITY, 2.0, &p, &Mollifier::default(), 40).is_err());
    }

    #[test]
    fn sweep_three_dimensions() {
        let eps: Vec<f64> = (1..=6).map(|i| 10f64.powi(-i)).collect();
        let sweep = epsilon_sweep(3, 2.0, &eps, 1e-12).unwrap();
        let b = sweep.fit.unwrap().b;
        assert!((b - 0.5).abs() < 0.01, "{b}");
        let t0 = critical_angle(2.0).unwrap();
        for &(e, j) in &sweep.points {
            let exact = -0.5 * (1.0 + 2.0 * (t0 - e).cos()).ln();
            assert!((j - exact).abs() < 1e-8 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn sweep_edge_cases() {
        let t0 = critical_angle(2.0).unwrap();
        let single = epsilon_sweep(4, 2.0, &[t0 - FRAC_PI_2], 1e-10).unwrap();
        assert_eq!(single.points, vec![(t0 - FRAC_PI_2, 0.0)]);
        assert!(single.fit.is_none());
        assert!(epsilon_sweep(4, 2.0, &[], 1e-10).is_err());
        assert!(epsilon_sweep(4, 2.0, &[1e-3, 1e-2], 1e-10).is_err());
        assert!(epsilon_sweep(4, 0.5, &[1e-3], 1e-10).is_err());
    }

    proptest! {
        #[test]
        fn exact_lines_fit_exactly(a in -10.0f64..10.0, b in -5.0f64..5.0, window in 3usize..20) {
            let seq = synthetic(|k| a + b * k as f64, 25);
            let fit = growth_fit(&seq, window).unwrap();
            prop_assert!((fit.slope - b).abs() < 1e-9);
            prop_assert!(fit.residual_rms < 1e-9);
        }
    }
}
