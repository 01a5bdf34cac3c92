//! Computing Hermite coefficients: Gauss–Hermite quadrature for black-box
//! functions, closed forms for exponentials, and evaluation of truncated
//! expansions.
//!
//! Quadrature rules here integrate against the standard normal density, so
//! their weights sum to one. The classical `e^{−x²}` normalization (nodes
//! scaled by `√2`, weights by `1/√π`) never leaks out of this module.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::coeffs::{CoeffMap, Provenance};
use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::hermite::{enumerate_degree, hermite_eval_all, hermite_table, MultiIndex};
use crate::linalg::symmetric_eigen_jacobi;
use crate::tensor::contract_mode;
use crate::weights::WeightSpec;

/// Largest supported quadrature order.
pub const MAX_QUAD_ORDER: usize = 256;

/// Largest tensor grid [`estimate_coeffs`] will evaluate.
pub const MAX_GRID_POINTS: u128 = 100_000_000;

/// A one-dimensional rule `∫ g φ ≈ Σ w_i g(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i g(x_i)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }

    /// Two-column `node,weight` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("node,weight\n");
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let _ = writeln!(s, "{x:e},{w:e}");
        }
        s
    }
}

/// The `n`-point Gauss–Hermite rule for the standard normal density.
///
/// Nodes are eigenvalues of the Jacobi matrix of the orthonormal recurrence
/// (off-diagonal `√k`), polished by Newton steps on `H_n`; weights come from
/// the Christoffel function `1 / Σ_{k<n} H_k(x)²` and are renormalized to
/// sum to one.
pub fn gauss_hermite_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_QUAD_ORDER {
        return Err(Error::domain(format!(
            "quadrature order must be in 1..={MAX_QUAD_ORDER}, got {n}"
        )));
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let (mut nodes, _) = symmetric_eigen_jacobi(&jacobi)?;
    nodes.reverse();

    let mut table = vec![0.0; n + 1];
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            hermite_eval_all(*x, &mut table);
            let deriv = (n as f64).sqrt() * table[n - 1];
            if deriv == 0.0 {
                break;
            }
            let step = table[n] / deriv;
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    // exact symmetry about the origin
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            hermite_eval_all(x, &mut table[..n]);
            1.0 / table[..n].iter().map(|h| h * h).sum::<f64>()
        })
        .collect();
    for i in 0..n / 2 {
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(QuadratureRule { nodes, weights })
}

/// Tensor Gauss–Hermite estimate of `f̂(k)` for every `|k| ≤ max_degree`.
///
/// `f` is evaluated once per grid node (possibly from several threads); the
/// coefficient integrals are then formed by contracting one coordinate at a
/// time.
pub fn estimate_coeffs<F>(
    f: F,
    d: usize,
    max_degree: u32,
    quad_order: usize,
    exec: Exec,
) -> Result<CoeffMap>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if quad_order < max_degree as usize + 1 {
        return Err(Error::domain(format!(
            "quadrature order {quad_order} cannot resolve degree {max_degree}"
        )));
    }
    let grid = (quad_order as u128)
        .checked_pow(d as u32)
        .unwrap_or(u128::MAX);
    if grid > MAX_GRID_POINTS {
        return Err(Error::Size {
            what: "quadrature grid",
            requested: grid,
            limit: MAX_GRID_POINTS,
        });
    }
    let rule = gauss_hermite_rule(quad_order)?;
    let n = quad_order;
    let grid = grid as usize;

    let values = exec.map_range(grid, |flat| {
        let mut x = vec![0.0; d];
        let mut rem = flat;
        for j in (0..d).rev() {
            x[j] = rule.nodes[rem % n];
            rem /= n;
        }
        (f(&x), x)
    });
    let mut data = Vec::with_capacity(grid);
    for (v, x) in values {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                location: format!("f at quadrature node {x:?}"),
            });
        }
        data.push(v);
    }

    // mat[k, i] = w_i H_k(x_i)
    let rows = max_degree as usize + 1;
    let mut mat = vec![0.0; rows * n];
    for (i, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let h = hermite_table(max_degree, x);
        for k in 0..rows {
            mat[k * n + i] = w * h[k];
        }
    }
    let mut dims = vec![n; d];
    for mode in 0..d {
        data = contract_mode(&data, &mut dims, mode, &mat, rows, exec);
    }

    let set = enumerate_degree(d, max_degree)?;
    let mut out = CoeffMap::new(d, Provenance::Quadrature);
    for k in set.iter() {
        let flat = k
            .entries()
            .iter()
            .fold(0usize, |acc, &kj| acc * rows + kj as usize);
        out.insert(k.clone(), data[flat])?;
    }
    Ok(out)
}

/// Exact coefficients of `x ↦ exp(wᵀx)` up to total degree `max_degree`:
/// `f̂(k) = e^{wᵀw/2} w^k / √k!`. Zero coefficients are not stored.
pub fn analytic_coeffs_exp(w: &[f64], max_degree: u32) -> Result<CoeffMap> {
    let d = w.len();
    let set = enumerate_degree(d, max_degree)?;
    let prefactor = (0.5 * w.iter().map(|x| x * x).sum::<f64>()).exp();
    // per-coordinate w^k / √k!
    let tables: Vec<Vec<f64>> = w
        .iter()
        .map(|&wj| {
            let mut t = Vec::with_capacity(max_degree as usize + 1);
            let mut v = 1.0;
            t.push(v);
            for k in 1..=max_degree {
                v *= wj / (k as f64).sqrt();
                t.push(v);
            }
            t
        })
        .collect();
    let mut out = CoeffMap::new(d, Provenance::Analytic);
    for k in set.iter() {
        let v: f64 = k
            .entries()
            .iter()
            .zip(&tables)
            .map(|(&kj, t)| t[kj as usize])
            .product::<f64>()
            * prefactor;
        if v != 0.0 {
            out.insert(k.clone(), v)?;
        }
    }
    Ok(out)
}

/// Validated pass-through for coefficients already known in the Hermite basis.
pub fn analytic_coeffs_polynomial<I>(d: usize, entries: I) -> Result<CoeffMap>
where
    I: IntoIterator<Item = (MultiIndex, f64)>,
{
    CoeffMap::from_entries(d, entries, Provenance::Analytic)
}

/// `Σ f̂(k) H_k(x)` over the stored indices.
pub fn eval_expansion(coeffs: &CoeffMap, x: &[f64]) -> Result<f64> {
    check_dim(coeffs.dim(), x.len())?;
    let m = coeffs.max_degree();
    let tables: Vec<Vec<f64>> = x.iter().map(|&xj| hermite_table(m, xj)).collect();
    Ok(coeffs
        .iter()
        .map(|(k, c)| {
            c * k
                .entries()
                .iter()
                .zip(&tables)
                .map(|(&kj, t)| t[kj as usize])
                .product::<f64>()
        })
        .sum())
}

/// Both sides of the integration-by-parts identity
/// `f̂(k) = −(k+1)^{−1/2} · (D f)^(k+1)` with `D f = f' − x f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluates both sides of the coefficient-shift identity by quadrature.
/// `df` must be `x ↦ f'(x) − x f(x)`.
pub fn coeff_shift_check(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    k: u32,
    quad_order: usize,
) -> Result<ShiftCheck> {
    let rule = gauss_hermite_rule(quad_order)?;
    let mut lhs = 0.0;
    let mut shifted = 0.0;
    let mut table = vec![0.0; k as usize + 2];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        hermite_eval_all(x, &mut table);
        let (fx, dfx) = (f(x), df(x));
        if !fx.is_finite() || !dfx.is_finite() {
            return Err(Error::NonFinite {
                value: if fx.is_finite() { dfx } else { fx },
                location: format!("shift check at node {x}"),
            });
        }
        lhs += w * fx * table[k as usize];
        shifted += w * dfx * table[k as usize + 1];
    }
    let rhs = -shifted / ((k + 1) as f64).sqrt();
    Ok(ShiftCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// `Σ_{k≥1} r_j(k)^{−1} w^{2k} / k!` for one coordinate, summed until the
/// terms stop contributing.
fn exp_coord_series(spec: &WeightSpec, j: usize, w: f64) -> f64 {
    let x = w * w;
    if x == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut term_base = 1.0; // x^k / k!
    for k in 1..=10_000u32 {
        term_base *= x / k as f64;
        let t = spec.coord_inv_weight(j, k) * term_base;
        sum += t;
        if k as f64 > 2.0 * x && t <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `‖exp(wᵀ·)‖²_r` over all of `N_0^d`:
/// `e^{wᵀw} ∏_j (1 + Σ_{k≥1} r_j(k)^{−1} w_j^{2k}/k!)`.
///
/// For the exponential family the inner sum is `(e^{w_j²/ω_j} − 1)/γ_j`;
/// for the polynomial family it is summed as a series.
pub fn exp_norm_sq(spec: &WeightSpec, w: &[f64]) -> Result<f64> {
    check_dim(spec.dim(), w.len())?;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let mut prod = ww.exp();
    for (j, &wj) in w.iter().enumerate() {
        let tail = match spec.omega() {
            Some(om) => ((wj * wj / om[j]).exp_m1()) / spec.gamma()[j],
            None => exp_coord_series(spec, j, wj),
        };
        prod *= 1.0 + tail;
    }
    Ok(prod)
}

/// `‖exp(wᵀ·)‖²_r` restricted to `|k| ≤ max_degree`.
///
/// The coefficients factor over coordinates, so the truncated sum is a
/// product of per-coordinate power series cut at total degree `max_degree`;
/// this costs `O(d · m²)` instead of enumerating `binomial(d+m, m)` indices.
pub fn exp_norm_sq_truncated(spec: &WeightSpec, w: &[f64], max_degree: u32) -> Result<f64> {
    check_dim(spec.dim(), w.len())?;
    let m = max_degree as usize;
    let mut acc = vec![0.0; m + 1];
    acc[0] = 1.0;
    for (j, &wj) in w.iter().enumerate() {
        // g[k] = r_j(k)^{-1} w^{2k} / k!
        let mut g = vec![0.0; m + 1];
        let mut base = 1.0;
        g[0] = 1.0;
        for (k, gk) in g.iter_mut().enumerate().skip(1) {
            base *= wj * wj / k as f64;
            *gk = spec.coord_inv_weight(j, k as u32) * base;
        }
        let mut next = vec![0.0; m + 1];
        for (a, &x) in acc.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (b, &y) in g.iter().enumerate().take(m + 1 - a) {
                next[a + b] += x * y;
            }
        }
        acc = next;
    }
    let ww: f64 = w.iter().map(|x| x * x).sum();
    Ok(ww.exp() * acc.iter().sum::<f64>())
}
