//! Forward method versus Brownian bridge for `f_d(x) = exp(Σ_j x_j / √d)`,
//! the terminal value `exp(B(1))` of a discretized Brownian path.
//!
//! Under the forward construction every coordinate carries weight `1/√d` and
//! the weighted norm grows with `d`. Under the Brownian bridge the same
//! function is `exp(x_1)`, whose norm does not depend on `d`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coeffs::{data_lines, CSV_VERSION_LINE};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expansion::exp_norm_sq;
use crate::hermite::ln_factorial;
use crate::kernel::{rms_error, GammaRule};
use crate::pointset::{pointset_halton_mapped, qmc_integrate, MAX_HALTON_DIM};
use crate::transform::{construction_matrix, orthogonal_from_construction, ConstructionKind};
use crate::weights::{touchard_m, WeightSpec};

/// Inputs of the comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub points: Vec<usize>,
    /// Common polynomial decay `α_j = alpha`.
    pub alpha: u32,
    pub gamma: GammaRule,
    /// Halton offset.
    pub skip: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dims: vec![1, 2, 4, 8, 16, 32],
            points: vec![1 << 8, 1 << 10, 1 << 12],
            alpha: 2,
            gamma: GammaRule::Power(2.0),
            skip: 0,
        }
    }
}

/// One `(d, n)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub d: usize,
    pub n: usize,
    pub norm_forward: f64,
    pub norm_bb: f64,
    pub lower_bound_forward: f64,
    pub qmc_err_forward: f64,
    pub qmc_err_bb: f64,
    pub rms_bound: f64,
}

const HEADER: &str =
    "d,n,norm_forward,norm_bb,lower_bound_forward,qmc_err_forward,qmc_err_bb,rms_bound";

/// `‖f_d‖²` for polynomial weights with integer `α_j`:
/// `e · ∏_j (1 + γ_j^{-1} (1/d) m_{α_j}(1/d) e^{1/d})`.
pub fn forward_norm_sq(spec: &WeightSpec) -> Result<f64> {
    let alpha = spec.alpha().ok_or(Error::Family {
        expected: "polynomial",
    })?;
    let d = spec.dim();
    let x = 1.0 / d as f64;
    let mut prod = std::f64::consts::E;
    for (j, &a) in alpha.iter().enumerate() {
        if a.fract() != 0.0 {
            return Err(Error::domain(format!(
                "closed form needs integer alpha, got {a}"
            )));
        }
        prod *= 1.0 + x * touchard_m(a as u32, x)? * x.exp() / spec.gamma()[j];
    }
    Ok(prod)
}

/// The lower bound `e (d!)² / d^d` on `‖f_d‖²` for `α_j ≥ 2`, `γ_j ≤ 1`.
pub fn forward_norm_sq_lower(d: usize) -> f64 {
    let ln = 1.0 + 2.0 * ln_factorial(d as u32) - d as f64 * (d as f64).ln();
    ln.exp()
}

fn spec_for(config: &ExperimentConfig, d: usize) -> Result<WeightSpec> {
    WeightSpec::polynomial(vec![config.alpha as f64; d], config.gamma.take(d))
}

/// Runs every `(d, n)` cell. Cells are independent and computed with
/// `exec`; rows come back sorted by `(d, n)`.
pub fn run_forward_vs_bb_experiment(
    config: &ExperimentConfig,
    exec: Exec,
) -> Result<Vec<ExperimentRow>> {
    if config.dims.is_empty() || config.points.is_empty() {
        return Err(Error::domain(
            "need at least one dimension and one point count",
        ));
    }
    if let Some(&d) = config.dims.iter().find(|&&d| d == 0 || d > MAX_HALTON_DIM) {
        return Err(Error::domain(format!(
            "dimension {d} outside 1..={MAX_HALTON_DIM}"
        )));
    }
    if config.points.contains(&0) {
        return Err(Error::domain("point counts must be positive"));
    }
    let mut dims = config.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let mut ns = config.points.clone();
    ns.sort_unstable();
    ns.dedup();
    let mean = 0.5f64.exp();

    let mut rows = Vec::with_capacity(dims.len() * ns.len());
    for &d in &dims {
        let spec = spec_for(config, d)?;
        let norm_forward = forward_norm_sq(&spec)?.sqrt();
        let u = orthogonal_from_construction(&construction_matrix(
            ConstructionKind::BrownianBridge,
            d,
        )?)?;
        let w = vec![1.0 / (d as f64).sqrt(); d];
        let norm_bb = exp_norm_sq(&spec, &u.apply_transpose(&w))?.sqrt();
        let lower_bound_forward = forward_norm_sq_lower(d).sqrt();
        // Σ_j x_j / √d, and the same after x ↦ Ux
        let v_bb = u.apply_transpose(&w);
        let n_max = *ns.last().expect("nonempty");
        let points = pointset_halton_mapped(n_max, d, config.skip)?;
        for &n in &ns {
            let prefix = crate::pointset::PointSet::from_rows(
                d,
                &points.iter().take(n).collect::<Vec<_>>(),
            )?;
            let fwd = qmc_integrate(
                |x| (x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()).exp(),
                &prefix,
                exec,
            )?;
            let bb = qmc_integrate(
                |x| (x.iter().zip(&v_bb).map(|(a, b)| a * b).sum::<f64>()).exp(),
                &prefix,
                exec,
            )?;
            rows.push(ExperimentRow {
                d,
                n,
                norm_forward,
                norm_bb,
                lower_bound_forward,
                qmc_err_forward: (fwd - mean).abs(),
                qmc_err_bb: (bb - mean).abs(),
                rms_bound: rms_error(&spec, n)?,
            });
        }
    }
    Ok(rows)
}

/// Version line, header row, one line per cell.
pub fn experiment_to_csv(rows: &[ExperimentRow]) -> String {
    let mut s = format!("{CSV_VERSION_LINE}\n{HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.d,
            r.n,
            r.norm_forward,
            r.norm_bb,
            r.lower_bound_forward,
            r.qmc_err_forward,
            r.qmc_err_bb,
            r.rms_bound
        );
    }
    s
}

/// Parses the CSV written by [`experiment_to_csv`].
pub fn experiment_from_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => return Err(Error::parse("missing experiment header row")),
    }
    lines
        .map(|(lineno, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::parse(format!("line {lineno}: expected 8 fields")));
            }
            let bad = || Error::parse(format!("line {lineno}: bad number"));
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad());
            Ok(ExperimentRow {
                d: f[0].parse().map_err(|_| bad())?,
                n: f[1].parse().map_err(|_| bad())?,
                norm_forward: num(2)?,
                norm_bb: num(3)?,
                lower_bound_forward: num(4)?,
                qmc_err_forward: num(5)?,
                qmc_err_bb: num(6)?,
                rms_bound: num(7)?,
            })
        })
        .collect()
}
