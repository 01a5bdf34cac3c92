//! Point sets in `R^d`, the inverse normal CDF, and the equal-weight QMC rule.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{data_lines, CSV_VERSION_LINE};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Number of Halton bases available, hence the largest Halton dimension.
pub const MAX_HALTON_DIM: usize = 64;

const PRIMES: [u64; MAX_HALTON_DIM] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307,
    311,
];

/// How a point set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    GaussianIid,
    HaltonMapped,
    GridMapped,
    FromFile,
}

/// `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    generator: Generator,
    seed: u64,
    skip: u64,
}

impl PointSet {
    /// Wraps user-supplied rows. Every row must have length `dim` and every
    /// coordinate must be finite.
    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("points need at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::dim(dim, row.len()));
            }
            if let Some(&bad) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    value: bad,
                    location: format!("point {i}"),
                });
            }
            coords.extend_from_slice(row);
        }
        Ok(PointSet {
            dim,
            coords,
            generator: Generator::FromFile,
            seed: 0,
            skip: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn skip(&self) -> u64 {
        self.skip
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Row-major coordinates.
    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// Applies `x ↦ Ux` to every point, for a row-major `d × d` matrix.
    pub fn mapped(&self, u: &nalgebra::DMatrix<f64>) -> Result<PointSet> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::dim(self.dim, u.nrows()));
        }
        let mut out = self.clone();
        for (src, dst) in self.iter().zip(out.coords.chunks_exact_mut(self.dim)) {
            for (i, y) in dst.iter_mut().enumerate() {
                *y = (0..self.dim).map(|j| u[(i, j)] * src[j]).sum();
            }
        }
        Ok(out)
    }

    /// `x_1,…,x_d` rows behind the version comment.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CSV_VERSION_LINE}");
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    /// Parses `x_1,…,x_d` rows. An input without data rows is an error.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in data_lines(text) {
            let row = line
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| {
                        Error::parse(format!("line {lineno}: bad coordinate {f:?}: {e}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::parse(format!(
                        "line {lineno}: {} coordinates, expected {}",
                        row.len(),
                        first.len()
                    )));
                }
            }
            rows.push(row);
        }
        let dim = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::parse("no points"))?;
        PointSet::from_rows(dim, &rows)
    }
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `Φ^{-1}(u)` for `u ∈ (0, 1)`.
///
/// Acklam's rational approximation (relative error about 1e-9) followed by
/// one Halley step on `Φ(x) − u`. The upper half is computed from the lower
/// by symmetry so the tail keeps full relative accuracy.
pub fn inverse_normal_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "inverse normal CDF needs 0 < u < 1, got {u}"
        )));
    }
    if u > 0.5 {
        return Ok(-lower_inverse(1.0 - u));
    }
    Ok(lower_inverse(u))
}

#[allow(clippy::excessive_precision)]
fn lower_inverse(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p == 0.5 {
        return 0.0;
    }
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Halley refinement
    let e = normal_cdf(x) - p;
    let t = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    let refined = x - t / (1.0 + 0.5 * x * t);
    if refined.is_finite() {
        refined
    } else {
        x
    }
}

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    x
}

/// The Halton points with indices `skip + 1, …, skip + n` (index 0 is the
/// origin of the cube and is never used), mapped to `R^d` by `Φ^{-1}`.
pub fn pointset_halton_mapped(n: usize, d: usize, skip: u64) -> Result<PointSet> {
    if d == 0 || d > MAX_HALTON_DIM {
        return Err(Error::domain(format!(
            "Halton dimension must be in 1..={MAX_HALTON_DIM}, got {d}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("point set needs at least one point"));
    }
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n as u64 {
        let idx = skip + 1 + i;
        for &b in &PRIMES[..d] {
            coords.push(inverse_normal_cdf(radical_inverse(idx, b))?);
        }
    }
    Ok(PointSet {
        dim: d,
        coords,
        generator: Generator::HaltonMapped,
        seed: 0,
        skip,
    })
}

/// Uniform on the open interval `(0, 1)` with 53 random bits.
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Seeded i.i.d. standard normal deviates (`Φ^{-1}` of ChaCha8 uniforms).
pub fn pointset_gaussian_iid(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if d == 0 {
        return Err(Error::domain("points need at least one coordinate"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * d)
        .map(|_| inverse_normal_cdf(open_uniform(&mut rng)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointSet {
        dim: d,
        coords,
        generator: Generator::GaussianIid,
        seed,
        skip: 0,
    })
}

/// `n` standard normal deviates from a seeded generator.
pub(crate) fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| inverse_normal_cdf(open_uniform(rng)).expect("open interval"))
        .collect()
}

/// `Q_{n,d}(f, P) = (1/n) Σ f(x_i)`. Function values may be computed in
/// parallel; the sum always runs in point order.
pub fn qmc_integrate<F>(f: F, points: &PointSet, exec: Exec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if points.is_empty() {
        return Err(Error::domain("empty point set"));
    }
    let values = exec.map_range(points.len(), |i| f(points.point(i)));
    let mut sum = 0.0;
    for (i, v) in values.into_iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                value: v,
                location: format!("integrand at point {i}"),
            });
        }
        sum += v;
    }
    Ok(sum / points.len() as f64)
}
