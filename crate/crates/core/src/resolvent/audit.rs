//! Tabulates the A1 traces and the two- and three-resolvent bounds over a `(z, η)` grid.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{diagnostics, factorize, trace_chain, BlockOp};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AuditThresholds {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

impl Default for AuditThresholds {
    fn default() -> Self {
        Self { c: 0.05, big_c: 20.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditGrid {
    pub z: Vec<C64>,
    pub eta: Vec<f64>,
    /// Also tabulate four-resolvent chains and fit their η-exponent.
    pub four_resolvent: bool,
}

impl AuditGrid {
    /// `count` log-spaced η values from `eta_min` to `eta_max`.
    pub fn log_spaced(z: Vec<C64>, eta_min: f64, eta_max: f64, count: usize) -> Self {
        let eta = if count <= 1 {
            vec![eta_min]
        } else {
            let (l0, l1) = (eta_min.ln(), eta_max.ln());
            (0..count).map(|k| (l0 + (l1 - l0) * k as f64 / (count - 1) as f64).exp()).collect()
        };
        Self { z, eta, four_resolvent: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditCell {
    pub re_z: f64,
    pub im_z: f64,
    pub eta: f64,
    pub g: f64,
    pub alpha: f64,
    pub abs_beta: f64,
    pub eta_gamma: f64,
    /// Max |⟨G(η₁)B₁G(η₂)B₂⟩| over `B_i ∈ {E, E^*}`, `η_i ∈ {η, 2η}`.
    pub a2_max: f64,
    /// `η · max |⟨G B₁ G B₂ G B₃⟩|` over `B_i ∈ {E, E^*}`.
    pub a3_max_scaled: f64,
    pub a4_max: Option<f64>,
    pub pass: bool,
    pub failures: Vec<String>,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub n: usize,
    pub thresholds: AuditThresholds,
    pub cells: Vec<AuditCell>,
    pub g_range: (f64, f64),
    pub alpha_range: (f64, f64),
    pub abs_beta_max: f64,
    pub eta_gamma_range: (f64, f64),
    pub a2_max: f64,
    pub a3_max_scaled: f64,
    pub pass_fraction: f64,
    /// Fitted `p` in `max|⟨(GB)⁴⟩| ~ η^{-p}`, averaged over z.
    pub four_resolvent_exponent: Option<f64>,
    pub warnings: Vec<String>,
}

const OFF_DIAGONAL: [BlockOp; 2] = [BlockOp::E, BlockOp::EAdj];

fn patterns(len: usize) -> Vec<Vec<BlockOp>> {
    (0..1usize << len).map(|bits| (0..len).map(|k| OFF_DIAGONAL[(bits >> k) & 1]).collect()).collect()
}

fn skipped(z: C64, eta: f64, reason: String) -> AuditCell {
    AuditCell {
        re_z: z.re,
        im_z: z.im,
        eta,
        g: f64::NAN,
        alpha: f64::NAN,
        abs_beta: f64::NAN,
        eta_gamma: f64::NAN,
        a2_max: f64::NAN,
        a3_max_scaled: f64::NAN,
        a4_max: None,
        pass: false,
        failures: Vec::new(),
        skipped: Some(reason),
    }
}

fn audit_z(a: &ComplexMatrix, z: C64, grid: &AuditGrid, th: AuditThresholds) -> Vec<AuditCell> {
    let f = match factorize(a, z) {
        Ok(f) => f,
        Err(e) => return grid.eta.iter().map(|&eta| skipped(z, eta, format!("factorization failed: {e}"))).collect(),
    };
    let p2 = patterns(2);
    let p3 = patterns(3);
    let p4 = patterns(4);
    grid.eta
        .iter()
        .map(|&eta| {
            let d = match diagnostics(&f, eta, None) {
                Ok(d) => d,
                Err(e) => return skipped(z, eta, e.to_string()),
            };
            let mut a2: f64 = 0.0;
            for p in &p2 {
                for (e1, e2) in [(eta, eta), (eta, 2.0 * eta), (2.0 * eta, eta), (2.0 * eta, 2.0 * eta)] {
                    a2 = a2.max(trace_chain(&f, &[(e1, p[0]), (e2, p[1])]).norm());
                }
            }
            let a3 = p3
                .iter()
                .map(|p| trace_chain(&f, &p.iter().map(|&b| (eta, b)).collect::<Vec<_>>()).norm())
                .fold(0.0, f64::max);
            let a4 = grid.four_resolvent.then(|| {
                p4.iter()
                    .map(|p| trace_chain(&f, &p.iter().map(|&b| (eta, b)).collect::<Vec<_>>()).norm())
                    .fold(0.0, f64::max)
            });
            let (c, cc) = (th.c, th.big_c);
            let eta_gamma = eta * d.gamma;
            let a3s = eta * a3;
            let mut failures = Vec::new();
            let mut band = |name: &str, v: f64, lower: bool| {
                if (lower && v < c) || v > cc || !v.is_finite() {
                    failures.push(format!("{name}={v:.4e}"));
                }
            };
            band("g", d.g, true);
            band("alpha", d.alpha, true);
            band("abs_beta", d.beta.norm(), false);
            band("eta_gamma", eta_gamma, true);
            band("a2", a2, false);
            band("a3_scaled", a3s, false);
            AuditCell {
                re_z: z.re,
                im_z: z.im,
                eta,
                g: d.g,
                alpha: d.alpha,
                abs_beta: d.beta.norm(),
                eta_gamma,
                a2_max: a2,
                a3_max_scaled: a3s,
                a4_max: a4,
                pass: failures.is_empty(),
                failures,
                skipped: None,
            }
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
fn log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        pts.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

pub fn audit_assumptions(a: &ComplexMatrix, grid: &AuditGrid, thresholds: AuditThresholds) -> Result<AssumptionReport> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::InvalidInput("expected a nonempty square matrix".into()));
    }
    if grid.z.is_empty() || grid.eta.is_empty() {
        return Err(Error::InvalidInput("audit grid is empty".into()));
    }
    if grid.eta.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidInput("grid η values must be positive".into()));
    }
    let n = a.rows();
    let mut warnings = Vec::new();
    let floor = 1.0 / (n as f64).sqrt();
    let below = grid.eta.iter().filter(|&&e| e < floor).count();
    if below > 0 {
        warnings.push(format!("{below} η values below N^(-1/2) = {floor:.4e}"));
    }
    let per_z: Vec<Vec<AuditCell>> = grid.z.par_iter().map(|&z| audit_z(a, z, grid, thresholds)).collect();

    let four_resolvent_exponent = if grid.four_resolvent {
        let slopes: Vec<f64> = per_z
            .iter()
            .filter_map(|cells| {
                log_slope(&cells.iter().filter_map(|c| c.a4_max.map(|v| (c.eta, v))).collect::<Vec<_>>())
            })
            .collect();
        (!slopes.is_empty()).then(|| -slopes.iter().sum::<f64>() / slopes.len() as f64)
    } else {
        None
    };
    let cells: Vec<AuditCell> = per_z.into_iter().flatten().collect();
    let live: Vec<&AuditCell> = cells.iter().filter(|c| c.skipped.is_none()).collect();
    let range = |f: &dyn Fn(&AuditCell) -> f64| {
        live.iter().map(|c| f(c)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let pass_fraction = cells.iter().filter(|c| c.pass).count() as f64 / cells.len() as f64;
    Ok(AssumptionReport {
        n,
        thresholds,
        g_range: range(&|c| c.g),
        alpha_range: range(&|c| c.alpha),
        abs_beta_max: range(&|c| c.abs_beta).1,
        eta_gamma_range: range(&|c| c.eta_gamma),
        a2_max: range(&|c| c.a2_max).1,
        a3_max_scaled: range(&|c| c.a3_max_scaled).1,
        pass_fraction,
        four_resolvent_exponent,
        warnings,
        cells,
    })
}

impl AssumptionReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re_z,im_z,eta,g,alpha,abs_beta,eta_gamma,a2_max,a3_max_scaled,pass")?;
        for c in &self.cells {
            let pass = if c.skipped.is_some() {
                "skipped"
            } else if c.pass {
                "true"
            } else {
                "false"
            };
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                c.re_z, c.im_z, c.eta, c.g, c.alpha, c.abs_beta, c.eta_gamma, c.a2_max, c.a3_max_scaled, pass
            )?;
        }
        Ok(())
    }

    /// Everything except the per-cell rows.
    pub fn summary_json(&self) -> serde_json::Value {
        let failing: Vec<_> = self
            .cells
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                serde_json::json!({
                    "re_z": c.re_z, "im_z": c.im_z, "eta": c.eta,
                    "failures": c.failures, "skipped": c.skipped,
                })
            })
            .collect();
        serde_json::json!({
            "n": self.n,
            "thresholds": self.thresholds,
            "cells": self.cells.len(),
            "pass_fraction": self.pass_fraction,
            "g_range": self.g_range,
            "alpha_range": self.alpha_range,
            "abs_beta_max": self.abs_beta_max,
            "eta_gamma_range": self.eta_gamma_range,
            "a2_max": self.a2_max,
            "a3_max_scaled": self.a3_max_scaled,
            "four_resolvent_exponent": self.four_resolvent_exponent,
            "warnings": self.warnings,
            "failing_cells": failing,
        })
    }
}
