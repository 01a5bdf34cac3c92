//! Sparse truncated Hermite expansions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hermite::MultiIndex;

/// First line of every CSV document this crate writes.
pub const CSV_VERSION_LINE: &str = "# hermite-qmc v1";

/// Where a set of coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Quadrature,
    Transformed,
    FromFile,
}

/// Hermite coefficients `f̂(k)` keyed by multi-index, iterated in canonical
/// graded order. Indices that are not stored are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMap {
    dim: usize,
    entries: BTreeMap<MultiIndex, f64>,
    provenance: Provenance,
}

impl CoeffMap {
    pub fn new(dim: usize, provenance: Provenance) -> Self {
        CoeffMap {
            dim,
            entries: BTreeMap::new(),
            provenance,
        }
    }

    /// Builds a map from `(k, value)` pairs, rejecting dimension mismatches
    /// and non-finite values. Repeated indices accumulate.
    pub fn from_entries<I>(dim: usize, entries: I, provenance: Provenance) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut map = CoeffMap::new(dim, provenance);
        for (k, v) in entries {
            map.add(k, v)?;
        }
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    fn validate(&self, k: &MultiIndex, value: f64) -> Result<()> {
        check_dim(self.dim, k.dim())?;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                value,
                location: format!("coefficient {k:?}"),
            });
        }
        Ok(())
    }

    /// Sets `f̂(k) = value`, replacing any stored value.
    pub fn insert(&mut self, k: MultiIndex, value: f64) -> Result<()> {
        self.validate(&k, value)?;
        self.entries.insert(k, value);
        Ok(())
    }

    /// Adds `value` to `f̂(k)`.
    pub fn add(&mut self, k: MultiIndex, value: f64) -> Result<()> {
        self.validate(&k, value)?;
        *self.entries.entry(k).or_insert(0.0) += value;
        Ok(())
    }

    /// `f̂(k)`, zero when not stored.
    pub fn get(&self, k: &MultiIndex) -> f64 {
        self.entries.get(k).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest total degree among stored indices.
    pub fn max_degree(&self) -> u32 {
        self.entries
            .keys()
            .map(MultiIndex::degree)
            .max()
            .unwrap_or(0)
    }

    /// `Σ f̂(k)²`, the L² mass by Parseval.
    pub fn l2_mass(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum()
    }

    /// L² mass of each degree block `|k| = m`.
    pub fn l2_by_degree(&self) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.entries {
            *out.entry(k.degree()).or_insert(0.0) += v * v;
        }
        out
    }

    /// Entries with `|k| = degree`, in canonical order.
    pub fn degree_block(&self, degree: u32) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.iter().filter(move |(k, _)| k.degree() == degree)
    }

    /// Drops entries with `|f̂(k)| ≤ tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.entries.retain(|_, v| v.abs() > tol);
        self
    }

    /// Keeps only entries with `|k| ≤ max_degree`.
    pub fn truncated(mut self, max_degree: u32) -> Self {
        self.entries.retain(|k, _| k.degree() <= max_degree);
        self
    }

    /// Largest `|a(k) − b(k)|` over the union of stored indices.
    pub fn max_abs_diff(&self, other: &CoeffMap) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        let a = self.iter().map(|(k, v)| (v - other.get(k)).abs());
        let b = other
            .iter()
            .filter(|(k, _)| !self.entries.contains_key(*k))
            .map(|(_, v)| v.abs());
        Ok(a.chain(b).fold(0.0, f64::max))
    }

    /// `k_1,…,k_d,value` lines behind the version comment.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CSV_VERSION_LINE}");
        for (k, v) in &self.entries {
            for e in k.entries() {
                let _ = write!(s, "{e},");
            }
            let _ = writeln!(s, "{v:e}");
        }
        s
    }

    /// Parses the CSV form. The dimension is taken from the first data row
    /// unless `dim` is given.
    pub fn from_csv(text: &str, dim: Option<usize>) -> Result<Self> {
        let mut map: Option<CoeffMap> = dim.map(|d| CoeffMap::new(d, Provenance::FromFile));
        for (lineno, line) in data_lines(text) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() < 2 {
                return Err(Error::parse(format!(
                    "line {lineno}: expected k_1,…,k_d,value"
                )));
            }
            let d = fields.len() - 1;
            let target = map.get_or_insert_with(|| CoeffMap::new(d, Provenance::FromFile));
            if target.dim != d {
                return Err(Error::parse(format!(
                    "line {lineno}: {d} index columns, expected {}",
                    target.dim
                )));
            }
            let k = fields[..d]
                .iter()
                .map(|f| {
                    f.parse::<u32>()
                        .map_err(|e| Error::parse(format!("line {lineno}: bad index {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let v: f64 = fields[d].parse().map_err(|e| {
                Error::parse(format!("line {lineno}: bad value {:?}: {e}", fields[d]))
            })?;
            target.add(MultiIndex::new(k), v)?;
        }
        map.ok_or_else(|| Error::parse("no coefficient rows"))
    }
}

/// Non-empty, non-comment lines with 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}
