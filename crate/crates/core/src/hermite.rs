//! Orthonormal (probabilists') Hermite polynomials and multi-index bookkeeping.
//!
//! `H_k` here is always normalized so that `E[H_j(X) H_k(X)] = δ_jk` for a
//! standard normal `X`; in particular `H_2(x) = (x² − 1)/√2`. Physicists'
//! Hermite polynomials never appear in the public API.
//!
//! Multi-indices are ordered graded-lexicographically: first by total degree,
//! then, within one degree, by descending entries read left to right, so the
//! degree-2 block in two dimensions is `(2,0), (1,1), (0,2)`. This order is the
//! canonical basis order used by coefficient maps and the transform engine.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};

/// Largest `n` whose factorial is computed in exact integer arithmetic.
pub const EXACT_FACTORIAL_MAX: u32 = 20;

/// Hard cap on the number of multi-indices [`enumerate_degree`] will build.
pub const MAX_INDEX_SET: u128 = 100_000_000;

const FACTORIALS: [u64; 21] = {
    let mut t = [1u64; 21];
    let mut i = 1;
    while i < 21 {
        t[i] = t[i - 1] * i as u64;
        i += 1;
    }
    t
};

/// `n!` exactly, for `n ≤ 20`.
pub fn factorial_exact(n: u32) -> Option<u64> {
    FACTORIALS.get(n as usize).copied()
}

/// `ln(n!)`, exact table lookup up to [`EXACT_FACTORIAL_MAX`], log-gamma above.
pub fn ln_factorial(n: u32) -> f64 {
    match factorial_exact(n) {
        Some(f) => (f as f64).ln(),
        None => ln_gamma(n as f64 + 1.0),
    }
}

/// A d-dimensional multi-index `k = (k_1, …, k_d)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// `e_i`: one in coordinate `i` (zero-based), zero elsewhere.
    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = vec![0; d];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.0
    }

    /// Total degree `|k|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// `k!` in exact arithmetic, `None` on overflow or once `|k|` exceeds the
    /// exact range.
    pub fn factorial_exact(&self) -> Option<u64> {
        if self.degree() > EXACT_FACTORIAL_MAX {
            return None;
        }
        self.0
            .iter()
            .try_fold(1u64, |acc, &k| acc.checked_mul(factorial_exact(k)?))
    }

    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&k| ln_factorial(k)).sum()
    }

    /// `k!` as a float; exact whenever it fits the integer table.
    pub fn factorial(&self) -> f64 {
        match self.factorial_exact() {
            Some(f) => f as f64,
            None => self.ln_factorial().exp(),
        }
    }

    /// Componentwise `k ≤ j`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        check_dim(self.dim(), other.dim())?;
        Ok(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// `k − ℓ`, or `None` unless `ℓ ≤ k`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// The monomial `x^k`.
    pub fn monomial(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self
            .0
            .iter()
            .zip(x)
            .map(|(&k, &xi)| xi.powi(k as i32))
            .product())
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(v: [u32; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
            .then_with(|| self.dim().cmp(&other.dim()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `H_k(x)` by the three-term recurrence
/// `H_{j+1} = (x H_j − √j H_{j−1}) / √(j+1)`.
pub fn hermite_eval(k: u32, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..k {
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[j] = H_j(x)` for `j = 0..out.len()`.
pub fn hermite_eval_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for j in 1..out.len().saturating_sub(1) {
        out[j + 1] = (x * out[j] - (j as f64).sqrt() * out[j - 1]) / ((j + 1) as f64).sqrt();
    }
}

/// `H_0(x), …, H_max(x)` as a fresh vector.
pub fn hermite_table(max: u32, x: f64) -> Vec<f64> {
    let mut v = vec![0.0; max as usize + 1];
    hermite_eval_all(x, &mut v);
    v
}

/// Multivariate `H_k(x) = ∏_j H_{k_j}(x_j)`.
pub fn hermite_eval_multi(k: &MultiIndex, x: &[f64]) -> Result<f64> {
    check_dim(k.dim(), x.len())?;
    Ok(k.entries()
        .iter()
        .zip(x)
        .map(|(&kj, &xj)| hermite_eval(kj, xj))
        .product())
}

/// `∂^ℓ H_k(x) = √(k!/(k−ℓ)!) H_{k−ℓ}(x)` if `ℓ ≤ k`, else zero.
pub fn hermite_deriv_multi(k: &MultiIndex, ell: &MultiIndex, x: &[f64]) -> Result<f64> {
    check_dim(k.dim(), ell.dim())?;
    check_dim(k.dim(), x.len())?;
    let Some(rest) = k.checked_sub(ell) else {
        return Ok(0.0);
    };
    let scale = (0.5 * (k.ln_factorial() - rest.ln_factorial())).exp();
    // exact path keeps small cases free of exp/ln round-off
    let scale = match (k.factorial_exact(), rest.factorial_exact()) {
        (Some(a), Some(b)) => ((a / b) as f64).sqrt(),
        _ => scale,
    };
    Ok(scale * hermite_eval_multi(&rest, x)?)
}

/// Number of sequences `β ∈ {1,…,d}^{|k|}` whose letter counts equal `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multiplicity {
    Exact(u64),
    /// `|k| > 20`: computed through log-gamma.
    Approximate(f64),
}

impl Multiplicity {
    pub fn as_f64(self) -> f64 {
        match self {
            Multiplicity::Exact(v) => v as f64,
            Multiplicity::Approximate(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Multiplicity::Exact(_))
    }
}

/// The multinomial coefficient `|k|! / k!`.
pub fn s_multiplicity(k: &MultiIndex) -> Multiplicity {
    let m = k.degree();
    match (factorial_exact(m), k.factorial_exact()) {
        (Some(num), Some(den)) if m <= EXACT_FACTORIAL_MAX => Multiplicity::Exact(num / den),
        _ => Multiplicity::Approximate((ln_factorial(m) - k.ln_factorial()).exp()),
    }
}

/// `binomial(n, k)` with overflow detection.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// All multi-indices of dimension `d` with `|k| = degree`, in canonical order.
pub fn indices_of_degree(d: usize, degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fill_compositions(&mut cur, 0, degree, &mut out);
    out
}

fn fill_compositions(cur: &mut [u32], pos: usize, left: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(MultiIndex(cur.to_vec()));
        return;
    }
    if cur.is_empty() {
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        fill_compositions(cur, pos + 1, left - v, out);
    }
    cur[pos] = 0;
}

/// Every multi-index with `|k| ≤ max_degree`, in canonical graded order.
#[derive(Debug, Clone)]
pub struct DegreeIndexSet {
    dim: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
}

impl DegreeIndexSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Position of `k` in canonical order, by binary search.
    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        self.indices.binary_search(k).ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }
}

impl<'a> IntoIterator for &'a DegreeIndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// Enumerates all `|k| ≤ m` in dimension `d`; the count is `binomial(d+m, m)`.
pub fn enumerate_degree(d: usize, m: u32) -> Result<DegreeIndexSet> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let count = binomial(d as u64 + m as u64, m as u64).unwrap_or(u128::MAX);
    if count > MAX_INDEX_SET {
        return Err(Error::Size {
            what: "multi-index set",
            requested: count,
            limit: MAX_INDEX_SET,
        });
    }
    let mut indices = Vec::with_capacity(count as usize);
    for g in 0..=m {
        indices.extend(indices_of_degree(d, g));
    }
    Ok(DegreeIndexSet {
        dim: d,
        max_degree: m,
        indices,
    })
}
