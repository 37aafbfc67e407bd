//! Machine-readable run reports.
//!
//! A report is `{command, version, config, payload, timing}`. Only `timing`
//! depends on the clock, so identical invocations give identical payloads.
//! CSV output carries the payload's main table with a header row; floats use
//! the shortest representation that parses back to the same `f64`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::divergence::{LinearFit, LogFit, Verdict};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub payload: Payload,
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPoint {
    pub k: i32,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct N3Point {
    pub eps: f64,
    pub closed_form: f64,
    pub quadrature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Falsify {
        points: Vec<QPoint>,
        fit: Option<LinearFit>,
        /// `ln 2 (sin θ₀)^{n-3}/c · E(f)`, absent without a critical angle.
        slope_law: Option<f64>,
        verdict: Verdict,
    },
    Contrast {
        points: Vec<QPoint>,
        /// `∫ η^{n-1-2s}|f̂|² · ∫ (sin θ)^{n-2}(1 + c cos θ)^{-2/q}`.
        factorized_limit: f64,
        verdict: Verdict,
    },
    Angular {
        points: Vec<SweepPoint>,
        fit: Option<LogFit>,
        /// `(sin θ₀)^{n-3}/c`.
        log_coefficient: f64,
    },
    Oracle {
        /// `moving` or `separable` (source at rest).
        mode: String,
        grid: GridSpec,
        s: f64,
        /// Squared dual functional from the grid.
        direct: f64,
        /// The same quantity from the (λ, θ) engine or the radial quadrature.
        reference: f64,
        gap: f64,
        kernel_mass: f64,
        passed: bool,
    },
    N3 {
        energy: f64,
        points: Vec<N3Point>,
    },
}

impl RunReport {
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let (header, rows) = self.payload.table();
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(&header).map_err(csv_err)?;
        for row in rows {
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    // Display for f64 is the shortest round-trip form
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn verdict_columns(v: &Verdict) -> [String; 3] {
    match v {
        Verdict::Divergent { slope, slope_stderr } => ["divergent".into(), num(*slope), num(*slope_stderr)],
        Verdict::Bounded {
            limit_estimate,
            tail_bound,
        } => ["bounded".into(), num(*limit_estimate), num(*tail_bound)],
        Verdict::Inconclusive { .. } => ["inconclusive".into(), String::new(), String::new()],
    }
}

impl Payload {
    /// Header and rows of the CSV form.
    pub fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        match self {
            Payload::Falsify {
                points,
                fit,
                slope_law,
                verdict,
            } => {
                let [kind, _, _] = verdict_columns(verdict);
                let rows = points
                    .iter()
                    .map(|p| {
                        vec![
                            p.k.to_string(),
                            num(p.q),
                            opt(fit.map(|f| f.slope)),
                            opt(fit.map(|f| f.slope_stderr)),
                            opt(*slope_law),
                            kind.clone(),
                        ]
                    })
                    .collect();
                (vec!["k", "Q", "slope", "slope_stderr", "slope_law", "verdict"], rows)
            }
            Payload::Contrast {
                points,
                factorized_limit,
                verdict,
            } => {
                let [kind, limit, tail] = verdict_columns(verdict);
                let rows = points
                    .iter()
                    .map(|p| {
                        vec![
                            p.k.to_string(),
                            num(p.q),
                            limit.clone(),
                            tail.clone(),
                            num(*factorized_limit),
                            kind.clone(),
                        ]
                    })
                    .collect();
                (
                    vec!["k", "Q", "limit_estimate", "tail_bound", "factorized_limit", "verdict"],
                    rows,
                )
            }
            Payload::Angular { points, fit, .. } => {
                let rows = points
                    .iter()
                    .map(|p| vec![num(p.eps), num(p.j), opt(fit.map(|f| f.b)), opt(fit.map(|f| f.a))])
                    .collect();
                (vec!["eps", "J", "fit_b", "fit_a"], rows)
            }
            Payload::Oracle {
                mode,
                grid,
                s,
                direct,
                reference,
                gap,
                kernel_mass,
                passed,
            } => {
                let row = vec![
                    mode.clone(),
                    grid.n.to_string(),
                    grid.points_per_axis.to_string(),
                    num(grid.box_halfwidth),
                    num(*s),
                    num(*direct),
                    num(*reference),
                    num(*gap),
                    num(*kernel_mass),
                    passed.to_string(),
                ];
                (
                    vec![
                        "mode",
                        "n",
                        "grid",
                        "box",
                        "s",
                        "direct",
                        "reference",
                        "gap",
                        "kernel_mass",
                        "passed",
                    ],
                    vec![row],
                )
            }
            Payload::N3 { energy, points } => {
                let rows = points
                    .iter()
                    .map(|p| vec![num(p.eps), num(p.closed_form), num(p.quadrature), num(*energy)])
                    .collect();
                (vec!["eps", "closed_form", "quadrature", "energy"], rows)
            }
        }
    }
}
