//! Reproducing kernels, worst-case and root-mean-square QMC errors, and the
//! tractability bounds built from them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coeffs::{data_lines, CSV_VERSION_LINE};
use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::hermite::hermite_table;
use crate::pointset::PointSet;
use crate::weights::{riemann_zeta, Family, WeightSpec};

/// Default per-coordinate truncation for the series kernel.
pub const DEFAULT_SERIES_DEGREE: u32 = 60;

/// How kernel values are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    /// `∏_j Σ_{k ≤ m} r_j(k) H_k(x_j) H_k(y_j)`; works for both families.
    Series(u32),
    /// Mehler's closed form; exponential family only.
    Mehler,
}

impl KernelMode {
    /// Mehler for the exponential family, the default series otherwise.
    pub fn default_for(spec: &WeightSpec) -> KernelMode {
        match spec.family() {
            Family::Exponential => KernelMode::Mehler,
            Family::Polynomial => KernelMode::Series(DEFAULT_SERIES_DEGREE),
        }
    }
}

/// `r_j(k)` for `k ≤ m`, one row per coordinate.
fn weight_tables(spec: &WeightSpec, m: u32) -> Vec<Vec<f64>> {
    (0..spec.dim())
        .map(|j| (0..=m).map(|k| spec.coord_weight(j, k)).collect())
        .collect()
}

fn series_from_tables(r: &[Vec<f64>], hx: &[Vec<f64>], hy: &[Vec<f64>]) -> f64 {
    r.iter()
        .zip(hx.iter().zip(hy))
        .map(|(rj, (a, b))| {
            rj.iter()
                .zip(a.iter().zip(b))
                .map(|(w, (p, q))| w * (p * q))
                .sum::<f64>()
        })
        .product()
}

/// Kernel `Σ r(k) H_k(x) H_k(y)` with each coordinate's series cut at
/// degree `m`.
pub fn kernel_eval_series(spec: &WeightSpec, x: &[f64], y: &[f64], m: u32) -> Result<f64> {
    check_dim(spec.dim(), x.len())?;
    check_dim(spec.dim(), y.len())?;
    let r = weight_tables(spec, m);
    let hx: Vec<_> = x.iter().map(|&v| hermite_table(m, v)).collect();
    let hy: Vec<_> = y.iter().map(|&v| hermite_table(m, v)).collect();
    Ok(series_from_tables(&r, &hx, &hy))
}

fn mehler_factor(gamma: f64, omega: f64, x: f64, y: f64) -> f64 {
    let one_m = 1.0 - omega * omega;
    let diff = x - y;
    let expo = omega * (x * y) / (1.0 + omega) - omega * omega * diff * diff / (2.0 * one_m);
    1.0 - gamma + gamma * expo.exp() / one_m.sqrt()
}

/// Closed-form exponential-family kernel
/// `∏_j (1 − γ_j + γ_j (1−ω_j²)^{-1/2} exp(ω_j x_j y_j/(1+ω_j) − ω_j²(x_j−y_j)²/(2(1−ω_j²))))`.
pub fn kernel_eval_mehler(spec: &WeightSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let omega = spec.omega().ok_or(Error::Family {
        expected: "exponential",
    })?;
    check_dim(spec.dim(), x.len())?;
    check_dim(spec.dim(), y.len())?;
    Ok((0..spec.dim())
        .map(|j| mehler_factor(spec.gamma()[j], omega[j], x[j], y[j]))
        .product())
}

/// Kernel value in the requested mode.
pub fn kernel_eval(spec: &WeightSpec, x: &[f64], y: &[f64], mode: KernelMode) -> Result<f64> {
    match mode {
        KernelMode::Series(m) => kernel_eval_series(spec, x, y, m),
        KernelMode::Mehler => kernel_eval_mehler(spec, x, y),
    }
}

/// A worst-case error together with the raw squared value before clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub value: f64,
    /// `−1 + (1/n²) ΣΣ K(x_i, x_j)`, possibly slightly negative.
    pub squared_raw: f64,
    /// Set when `squared_raw < 0` was clamped to zero.
    pub clamped: bool,
}

/// Worst-case QMC error `√(−1 + (1/n²) Σ_i Σ_j K(x_i, x_j))` of the
/// equal-weight rule on `points`.
///
/// Rows of the double sum are computed in parallel and combined in row
/// order, using `K(x_i, x_j) = K(x_j, x_i)` to visit each pair once.
pub fn worst_case_error(
    spec: &WeightSpec,
    points: &PointSet,
    mode: KernelMode,
    exec: Exec,
) -> Result<WorstCase> {
    if points.is_empty() {
        return Err(Error::domain("empty point set"));
    }
    check_dim(spec.dim(), points.dim())?;
    let n = points.len();
    let d = spec.dim();

    let row_sums: Vec<f64> = match mode {
        KernelMode::Mehler => {
            let omega = spec
                .omega()
                .ok_or(Error::Family {
                    expected: "exponential",
                })?
                .to_vec();
            let gamma = spec.gamma();
            let k = |a: &[f64], b: &[f64]| -> f64 {
                (0..d)
                    .map(|j| mehler_factor(gamma[j], omega[j], a[j], b[j]))
                    .product()
            };
            exec.map_range(n, |i| {
                let xi = points.point(i);
                let off: f64 = (i + 1..n).map(|j| k(xi, points.point(j))).sum();
                k(xi, xi) + 2.0 * off
            })
        }
        KernelMode::Series(m) => {
            let r = weight_tables(spec, m);
            let tables: Vec<Vec<Vec<f64>>> = exec.map_range(n, |i| {
                points
                    .point(i)
                    .iter()
                    .map(|&v| hermite_table(m, v))
                    .collect()
            });
            exec.map_range(n, |i| {
                let ti = &tables[i];
                let off: f64 = (i + 1..n)
                    .map(|j| series_from_tables(&r, ti, &tables[j]))
                    .sum();
                series_from_tables(&r, ti, ti) + 2.0 * off
            })
        }
    };
    let total: f64 = row_sums.iter().sum();
    if !total.is_finite() {
        return Err(Error::NonFinite {
            value: total,
            location: "kernel double sum".into(),
        });
    }
    let nf = n as f64;
    let squared_raw = total / (nf * nf) - 1.0;
    let clamped = squared_raw < 0.0;
    Ok(WorstCase {
        value: squared_raw.max(0.0).sqrt(),
        squared_raw,
        clamped,
    })
}

/// Root-mean-square worst-case error over i.i.d. Gaussian point sets of size
/// `n`: `√((Σ_k r(k) − 1)/n)`.
pub fn rms_error(spec: &WeightSpec, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    Ok(((spec.weight_sum() - 1.0).max(0.0) / n as f64).sqrt())
}

/// The two upper bounds on the best achievable worst-case error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// Family bound `n^{-1/2} exp(c Σ γ_j)`, with `c = ζ(α_min)/2` for
    /// polynomial weights and `c = ω_max/(2(1−ω_max))` for exponential ones.
    pub family: f64,
    /// Existence bound `√(Σ r(k) − 1)/√n`, the RMS error.
    pub averaged: f64,
}

/// Exponent constant `c` of the family bound.
fn family_constant(spec: &WeightSpec) -> Result<f64> {
    match (spec.alpha(), spec.omega()) {
        (Some(alpha), _) => {
            let amin = alpha.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(riemann_zeta(amin)? / 2.0)
        }
        (_, Some(omega)) => {
            let omax = omega.iter().copied().fold(0.0, f64::max);
            Ok(omax / (2.0 * (1.0 - omax)))
        }
        _ => unreachable!("every spec has a shape parameter"),
    }
}

/// Upper bounds on `e_{n,d}` for the best `n`-point rule.
pub fn wce_upper_bound(spec: &WeightSpec, n: usize) -> Result<UpperBound> {
    let averaged = rms_error(spec, n)?;
    let gsum: f64 = spec.gamma().iter().sum();
    let family = (family_constant(spec)? * gsum).exp() / (n as f64).sqrt();
    Ok(UpperBound { family, averaged })
}

/// `c(ω) = (1 − √(1−ω²))/√(1−ω²)`.
pub fn lower_bound_constant(omega: f64) -> f64 {
    let s = (1.0 - omega * omega).sqrt();
    (1.0 - s) / s
}

/// Lower bound `√(max(0, −1 + ∏_j (1 + γ_j c(ω_j))/n))` on the worst-case
/// error of every `n`-point equal-weight rule, for exponential weights with
/// all `γ_j < 1`.
pub fn wce_lower_bound_exp(spec: &WeightSpec, n: usize) -> Result<f64> {
    let omega = spec.omega().ok_or(Error::Family {
        expected: "exponential",
    })?;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if let Some(g) = spec.gamma().iter().find(|&&g| g >= 1.0) {
        return Err(Error::domain(format!(
            "lower bound needs every gamma < 1 (kernel positivity), got {g}"
        )));
    }
    let prod: f64 = spec
        .gamma()
        .iter()
        .zip(omega)
        .map(|(&g, &w)| 1.0 + g * lower_bound_constant(w))
        .product();
    Ok((prod / n as f64 - 1.0).max(0.0).sqrt())
}

/// Everything known about one point set under one weight specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub n: usize,
    pub d: usize,
    pub wce: f64,
    pub wce_clamped: bool,
    pub rms: f64,
    pub upper_bound: f64,
    pub averaged_bound: f64,
    pub lower_bound: Option<f64>,
    pub spec: String,
}

const REPORT_HEADER: &str = "n,d,wce,wce_clamped,rms,upper_bound,averaged_bound,lower_bound,spec";

impl ErrorReport {
    /// Computes the full report. The lower bound is filled in only for
    /// exponential weights with all `γ_j < 1`.
    pub fn compute(
        spec: &WeightSpec,
        points: &PointSet,
        mode: KernelMode,
        exec: Exec,
    ) -> Result<Self> {
        let wc = worst_case_error(spec, points, mode, exec)?;
        let n = points.len();
        let up = wce_upper_bound(spec, n)?;
        let lower_bound = match spec.family() {
            Family::Exponential if spec.gamma().iter().all(|&g| g < 1.0) => {
                Some(wce_lower_bound_exp(spec, n)?)
            }
            _ => None,
        };
        Ok(ErrorReport {
            n,
            d: points.dim(),
            wce: wc.value,
            wce_clamped: wc.clamped,
            rms: rms_error(spec, n)?,
            upper_bound: up.family,
            averaged_bound: up.averaged,
            lower_bound,
            spec: spec.summary(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Version line, header row, one data row.
    pub fn to_csv(&self) -> String {
        let lb = self
            .lower_bound
            .map(|v| format!("{v:e}"))
            .unwrap_or_default();
        format!(
            "{CSV_VERSION_LINE}\n{REPORT_HEADER}\n{},{},{:e},{},{:e},{:e},{:e},{},{}\n",
            self.n,
            self.d,
            self.wce,
            self.wce_clamped,
            self.rms,
            self.upper_bound,
            self.averaged_bound,
            lb,
            self.spec
        )
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        match lines.next() {
            Some((_, h)) if h == REPORT_HEADER => {}
            _ => return Err(Error::parse("missing report header row")),
        }
        let (lineno, row) = lines
            .next()
            .ok_or_else(|| Error::parse("missing report row"))?;
        let f: Vec<&str> = row.splitn(9, ',').collect();
        if f.len() != 9 {
            return Err(Error::parse(format!("line {lineno}: expected 9 fields")));
        }
        let bad = |what: &str| Error::parse(format!("line {lineno}: bad {what}"));
        let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
        Ok(ErrorReport {
            n: f[0].parse().map_err(|_| bad("n"))?,
            d: f[1].parse().map_err(|_| bad("d"))?,
            wce: num(f[2], "wce")?,
            wce_clamped: f[3].parse().map_err(|_| bad("wce_clamped"))?,
            rms: num(f[4], "rms")?,
            upper_bound: num(f[5], "upper_bound")?,
            averaged_bound: num(f[6], "averaged_bound")?,
            lower_bound: if f[7].is_empty() {
                None
            } else {
                Some(num(f[7], "lower_bound")?)
            },
            spec: f[8].to_string(),
        })
    }
}

/// Rule `j ↦ γ_j` for an infinite weight sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaRule {
    /// `γ_j = j^{-p}`.
    Power(f64),
    /// `γ_j = c`.
    Constant(f64),
    /// `γ_j = q^{j−1}`.
    Geometric(f64),
}

impl GammaRule {
    /// `γ_j` for `j ≥ 1`.
    pub fn eval(self, j: usize) -> f64 {
        match self {
            GammaRule::Power(p) => (j as f64).powf(-p),
            GammaRule::Constant(c) => c,
            GammaRule::Geometric(q) => q.powi(j as i32 - 1),
        }
    }

    /// Parses `power:<p>`, `const:<c>` or `geom:<q>`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, val) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("gamma rule {s:?}: expected kind:value")))?;
        let v: f64 = val
            .parse()
            .map_err(|_| Error::parse(format!("gamma rule {s:?}: bad number")))?;
        let rule = match kind {
            "power" if v > 0.0 => GammaRule::Power(v),
            "const" if v > 0.0 && v <= 1.0 => GammaRule::Constant(v),
            "geom" if v > 0.0 && v <= 1.0 => GammaRule::Geometric(v),
            "power" | "const" | "geom" => {
                return Err(Error::domain(format!(
                    "gamma rule {s:?}: value out of range"
                )))
            }
            _ => {
                return Err(Error::parse(format!(
                    "gamma rule {s:?}: unknown kind {kind:?}"
                )))
            }
        };
        Ok(rule)
    }

    /// `γ_1, …, γ_d`.
    pub fn take(self, d: usize) -> Vec<f64> {
        (1..=d).map(|j| self.eval(j)).collect()
    }
}

/// Which tractability regime the finite evidence points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TractabilityHint {
    StrongPolynomial,
    Polynomial,
    Neither,
}

impl TractabilityHint {
    pub fn describe(self) -> &'static str {
        match self {
            TractabilityHint::StrongPolynomial => "consistent with strong polynomial tractability",
            TractabilityHint::Polynomial => "consistent with polynomial tractability",
            TractabilityHint::Neither => "not consistent with polynomial tractability",
        }
    }
}

/// Information-complexity estimates at one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub d: usize,
    pub gamma_sum: f64,
    /// `ln` of the upper estimate `ε^{-2} exp(2c Σ γ_j)` for `n_min`.
    pub ln_n_min_upper: f64,
    /// `ln` of the lower estimate `∏(1 + γ_j c(ω_min))/(ε² + 1)`; exponential
    /// weights with all `γ_j < 1` only.
    pub ln_n_min_lower: Option<f64>,
}

/// Finite-horizon tractability diagnostics. These are numerical evidence up
/// to `horizon`, not proofs about the infinite sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TractabilityReport {
    pub family: Family,
    pub shape: f64,
    pub horizon: usize,
    pub epsilon: f64,
    pub gamma_sum: f64,
    pub gamma_sum_over_ln_horizon: f64,
    /// `(S_D − S_{D/2}) / ln 2`: growth of the partial sums per unit of `ln d`.
    pub log_slope: f64,
    pub hint: TractabilityHint,
    pub checkpoints: Vec<Checkpoint>,
}

/// Tractability diagnostics for `γ_j = gamma(j)` with a common shape
/// parameter (`α` or `ω`) up to dimension `horizon`.
pub fn tractability_report(
    family: Family,
    shape: f64,
    gamma: GammaRule,
    horizon: usize,
    epsilon: f64,
) -> Result<TractabilityReport> {
    if horizon < 2 {
        return Err(Error::domain("horizon must be at least 2"));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::domain("epsilon must be positive"));
    }
    // validates the shape parameter
    let one = match family {
        Family::Polynomial => WeightSpec::polynomial(vec![shape], vec![gamma.eval(1)])?,
        Family::Exponential => WeightSpec::exponential(vec![shape], vec![gamma.eval(1)])?,
    };
    let c = family_constant(&one)?;
    let lb_c = match family {
        Family::Exponential => Some(lower_bound_constant(shape)),
        Family::Polynomial => None,
    };

    let mut partial = Vec::with_capacity(horizon + 1);
    partial.push(0.0);
    let mut s = 0.0;
    let mut ln_prod = 0.0;
    let mut lower_ok = lb_c.is_some();
    let mut ln_lower = Vec::with_capacity(horizon + 1);
    ln_lower.push(0.0);
    for j in 1..=horizon {
        let g = gamma.eval(j);
        s += g;
        partial.push(s);
        if g >= 1.0 {
            lower_ok = false;
        }
        if let Some(cw) = lb_c {
            ln_prod += (g * cw).ln_1p();
        }
        ln_lower.push(ln_prod);
    }
    let ln_eps2 = 2.0 * epsilon.ln();
    let mut dims: Vec<usize> = std::iter::successors(Some(1usize), |&d| d.checked_mul(2))
        .take_while(|&d| d < horizon)
        .collect();
    dims.push(horizon);
    let checkpoints = dims
        .into_iter()
        .map(|d| Checkpoint {
            d,
            gamma_sum: partial[d],
            ln_n_min_upper: 2.0 * c * partial[d] - ln_eps2,
            ln_n_min_lower: lower_ok.then(|| ln_lower[d] - (epsilon * epsilon).ln_1p()),
        })
        .collect();

    let s_d = partial[horizon];
    let log_slope = (s_d - partial[horizon / 2]) / std::f64::consts::LN_2;
    let over_ln = s_d / (horizon as f64).ln();
    let hint = if log_slope < 0.01 {
        TractabilityHint::StrongPolynomial
    } else if log_slope <= 2.0 * over_ln {
        TractabilityHint::Polynomial
    } else {
        TractabilityHint::Neither
    };
    Ok(TractabilityReport {
        family,
        shape,
        horizon,
        epsilon,
        gamma_sum: s_d,
        gamma_sum_over_ln_horizon: over_ln,
        log_slope,
        hint,
        checkpoints,
    })
}

impl TractabilityReport {
    /// Human-readable summary, labeled as finite-horizon evidence.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "finite-horizon diagnostics up to d = {} (evidence, not a proof)",
            self.horizon
        );
        let _ = writeln!(s, "sum of gamma_j: {:.6}", self.gamma_sum);
        let _ = writeln!(s, "sum / ln(D): {:.6}", self.gamma_sum_over_ln_horizon);
        let _ = writeln!(s, "growth per ln d near D: {:.6}", self.log_slope);
        let _ = writeln!(s, "diagnostic: {}", self.hint.describe());
        let _ = writeln!(s, "d,gamma_sum,ln_n_min_upper,ln_n_min_lower");
        for c in &self.checkpoints {
            let lo = c
                .ln_n_min_lower
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{:.6},{:.6},{}",
                c.d, c.gamma_sum, c.ln_n_min_upper, lo
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::pointset_halton_mapped;
    use approx::assert_relative_eq;

    fn exp1(omega: f64, gamma: f64) -> WeightSpec {
        WeightSpec::exponential(vec![omega], vec![gamma]).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let poly = WeightSpec::polynomial(vec![2.0], vec![1.0]).unwrap();
        assert_eq!(kernel_eval_series(&poly, &[0.7], &[-2.0], 0).unwrap(), 1.0);
        assert_relative_eq!(
            kernel_eval_series(&poly, &[0.0], &[0.0], 2).unwrap(),
            1.125,
            epsilon = 1e-15
        );

        let e = exp1(0.5, 1.0);
        let target = 1.0 / 0.75f64.sqrt();
        assert_relative_eq!(
            kernel_eval_mehler(&e, &[0.0], &[0.0]).unwrap(),
            target,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            kernel_eval_series(&e, &[0.0], &[0.0], 60).unwrap(),
            target,
            epsilon = 1e-15
        );
        let h = exp1(0.5, 0.5);
        assert_relative_eq!(
            kernel_eval_mehler(&h, &[0.0], &[0.0]).unwrap(),
            0.5 + 0.5 / 0.75f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(matches!(
            kernel_eval_mehler(&poly, &[0.0], &[0.0]),
            Err(Error::Family { .. })
        ));
        assert!(kernel_eval_series(&poly, &[0.0, 1.0], &[0.0], 3).is_err());

        let two = WeightSpec::exponential(vec![0.3, 0.3], vec![0.8, 0.2]).unwrap();
        let prod = kernel_eval_mehler(&exp1(0.3, 0.8), &[0.4], &[0.4]).unwrap()
            * kernel_eval_mehler(&exp1(0.3, 0.2), &[-1.0], &[-1.0]).unwrap();
        assert_relative_eq!(
            kernel_eval_mehler(&two, &[0.4, -1.0], &[0.4, -1.0]).unwrap(),
            prod,
            epsilon = 1e-15
        );
    }

    #[test]
    fn wce_examples() {
        let e = exp1(0.5, 1.0);
        let p = PointSet::from_rows(1, &[[0.0]]).unwrap();
        let w = worst_case_error(&e, &p, KernelMode::Mehler, Exec::Sequential).unwrap();
        assert_relative_eq!(w.value, 0.393320, epsilon = 1e-6);
        assert!(!w.clamped);

        let same = PointSet::from_rows(1, &[[0.4], [0.4], [0.4]]).unwrap();
        let one = PointSet::from_rows(1, &[[0.4]]).unwrap();
        let a = worst_case_error(&e, &same, KernelMode::Mehler, Exec::Parallel).unwrap();
        let b = worst_case_error(&e, &one, KernelMode::Mehler, Exec::Parallel).unwrap();
        assert_relative_eq!(a.value, b.value, epsilon = 1e-14);

        let s = WeightSpec::exponential(vec![0.25, 0.25], vec![0.5, 0.5]).unwrap();
        let h = pointset_halton_mapped(16, 2, 0).unwrap();
        let m = worst_case_error(&s, &h, KernelMode::Mehler, Exec::Parallel).unwrap();
        let r = worst_case_error(&s, &h, KernelMode::Series(60), Exec::Sequential).unwrap();
        assert!((m.value - r.value).abs() <= 1e-8);

        let poly = WeightSpec::polynomial(vec![2.0], vec![1.0]).unwrap();
        assert!(worst_case_error(&poly, &one, KernelMode::Mehler, Exec::Sequential).is_err());
        assert!(worst_case_error(&s, &one, KernelMode::Mehler, Exec::Sequential).is_err());
    }

    #[test]
    fn wce_is_bitwise_policy_independent() {
        let s = WeightSpec::polynomial(vec![2.0, 3.0, 2.0], vec![1.0, 0.5, 0.25]).unwrap();
        let h = pointset_halton_mapped(40, 3, 5).unwrap();
        let a = worst_case_error(&s, &h, KernelMode::Series(20), Exec::Sequential).unwrap();
        let b = worst_case_error(&s, &h, KernelMode::Series(20), Exec::Parallel).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn rms_and_bounds() {
        assert_relative_eq!(
            rms_error(&exp1(0.5, 1.0), 100).unwrap(),
            0.1,
            epsilon = 1e-14
        );
        let poly = WeightSpec::polynomial(vec![2.0], vec![1.0]).unwrap();
        assert_relative_eq!(
            rms_error(&poly, 1).unwrap(),
            1.282_549_830_161_864,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            rms_error(&poly, 4).unwrap(),
            rms_error(&poly, 1).unwrap() / 2.0,
            epsilon = 1e-15
        );
        assert!(rms_error(&poly, 0).is_err());

        let p2 = WeightSpec::polynomial(vec![2.0, 2.0], vec![1.0, 1.0]).unwrap();
        let ub = wce_upper_bound(&p2, 100).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert_relative_eq!(ub.family, 0.1 * zeta2.exp(), max_relative = 1e-12);
        assert_relative_eq!(
            wce_upper_bound(&exp1(0.5, 1.0), 1).unwrap().family,
            0.5f64.exp(),
            max_relative = 1e-14
        );
        let tiny = exp1(0.5, 1e-12);
        assert_relative_eq!(
            wce_upper_bound(&tiny, 9).unwrap().family,
            1.0 / 3.0,
            max_relative = 1e-10
        );
        assert!(ub.averaged <= ub.family);
    }

    #[test]
    fn lower_bound_examples() {
        let s = exp1(0.6, 0.5);
        assert_relative_eq!(lower_bound_constant(0.6), 0.25, epsilon = 1e-15);
        assert_relative_eq!(
            wce_lower_bound_exp(&s, 1).unwrap(),
            0.125f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(wce_lower_bound_exp(&s, 1_000_000).unwrap(), 0.0);
        let three = WeightSpec::exponential(vec![0.6; 3], vec![0.5; 3]).unwrap();
        assert_relative_eq!(
            wce_lower_bound_exp(&three, 1).unwrap(),
            (1.125f64.powi(3) - 1.0).sqrt(),
            epsilon = 1e-14
        );
        assert!(wce_lower_bound_exp(&exp1(0.6, 1.0), 1).is_err());
        let poly = WeightSpec::polynomial(vec![2.0], vec![0.5]).unwrap();
        assert!(wce_lower_bound_exp(&poly, 1).is_err());
    }

    #[test]
    fn report_round_trips() {
        let s = WeightSpec::exponential(vec![0.5, 0.5], vec![0.9, 0.4]).unwrap();
        let p = pointset_halton_mapped(8, 2, 0).unwrap();
        let r = ErrorReport::compute(&s, &p, KernelMode::Mehler, Exec::Parallel).unwrap();
        assert!(r.lower_bound.is_some());
        assert_eq!(ErrorReport::from_csv(&r.to_csv()).unwrap(), r);
        assert_eq!(ErrorReport::from_json(&r.to_json()).unwrap(), r);
        let poly = WeightSpec::polynomial(vec![2.0, 2.0], vec![1.0, 1.0]).unwrap();
        let r = ErrorReport::compute(&poly, &p, KernelMode::Series(30), Exec::Parallel).unwrap();
        assert!(r.lower_bound.is_none());
        assert_eq!(ErrorReport::from_csv(&r.to_csv()).unwrap(), r);
    }

    #[test]
    fn tractability_examples() {
        let r = tractability_report(Family::Polynomial, 2.0, GammaRule::Power(2.0), 10_000, 0.1)
            .unwrap();
        assert!((r.gamma_sum - std::f64::consts::PI.powi(2) / 6.0).abs() < 2e-4);
        assert_eq!(r.hint, TractabilityHint::StrongPolynomial);

        let r = tractability_report(Family::Polynomial, 2.0, GammaRule::Power(1.0), 10_000, 0.1)
            .unwrap();
        assert!((r.gamma_sum_over_ln_horizon - 1.0).abs() < 0.1);
        assert_eq!(r.hint, TractabilityHint::Polynomial);

        let r = tractability_report(Family::Exponential, 0.5, GammaRule::Constant(0.5), 20, 0.5)
            .unwrap();
        assert_eq!(r.hint, TractabilityHint::Neither);
        let lows: Vec<f64> = r
            .checkpoints
            .iter()
            .map(|c| c.ln_n_min_lower.unwrap())
            .collect();
        // geometric growth: ln of the estimate is affine in d
        let per_dim = (0.5 * lower_bound_constant(0.5)).ln_1p();
        for (c, lo) in r.checkpoints.iter().zip(&lows) {
            assert_relative_eq!(*lo, c.d as f64 * per_dim - 1.25f64.ln(), epsilon = 1e-12);
        }
        assert!(r.to_text().contains("not a proof"));
    }

    #[test]
    fn gamma_rule_parsing() {
        assert_eq!(GammaRule::parse("power:2").unwrap(), GammaRule::Power(2.0));
        assert_eq!(
            GammaRule::parse("const:0.5").unwrap().take(2),
            vec![0.5, 0.5]
        );
        assert_eq!(
            GammaRule::parse("geom:0.5").unwrap().take(3),
            vec![1.0, 0.5, 0.25]
        );
        assert!(GammaRule::parse("const:2").is_err());
        assert!(GammaRule::parse("bogus:1").is_err());
        assert!(GammaRule::parse("power").is_err());
    }
}
