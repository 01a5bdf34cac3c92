//! Orthogonal matrices and Brownian path construction matrices.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{data_lines, CSV_VERSION_LINE};
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, orthogonality_residual, symmetric_eigen_jacobi};
use crate::pointset::gaussian_vec;

/// Tolerance for `max |UᵀU − I|` and `max |MMᵀ − C|`.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Smallest linear part accepted by [`householder_from_linear`].
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Where an orthogonal matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthoSource {
    Identity,
    Householder,
    FromConstruction,
    UserSupplied,
    RandomQr,
}

/// A validated orthogonal `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoMatrix {
    u: DMatrix<f64>,
    source: OrthoSource,
}

impl OrthoMatrix {
    /// Accepts `u` if it is square with `max |UᵀU − I| ≤ 1e-10`.
    pub fn new(u: DMatrix<f64>, source: OrthoSource) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::dim(u.nrows(), u.ncols()));
        }
        if u.nrows() == 0 {
            return Err(Error::domain("empty matrix"));
        }
        if let Some(bad) = u.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                value: *bad,
                location: "orthogonal matrix entry".into(),
            });
        }
        let residual = orthogonality_residual(&u);
        if residual > VALIDATION_TOL {
            return Err(Error::NotOrthogonal { residual });
        }
        Ok(OrthoMatrix { u, source })
    }

    pub fn identity(d: usize) -> Self {
        OrthoMatrix {
            u: DMatrix::identity(d, d),
            source: OrthoSource::Identity,
        }
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn source(&self) -> OrthoSource {
        self.source
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn transpose(&self) -> OrthoMatrix {
        OrthoMatrix {
            u: self.u.transpose(),
            source: self.source,
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &OrthoMatrix) -> Result<OrthoMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::dim(self.dim(), other.dim()));
        }
        OrthoMatrix::new(&self.u * &other.u, OrthoSource::UserSupplied)
    }

    /// `Ux`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.u[(i, j)] * x[j]).sum())
            .collect()
    }

    /// `Uᵀx`.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.u[(j, i)] * x[j]).sum())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        matrix_to_csv(&self.u)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        OrthoMatrix::new(matrix_from_csv(text)?, OrthoSource::UserSupplied)
    }
}

/// Row-major CSV behind the version comment.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_VERSION_LINE}");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Parses a row-major CSV matrix.
pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in data_lines(text) {
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(format!("line {lineno}: bad entry {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.first().is_some_and(|r| r.len() != row.len()) {
            return Err(Error::parse(format!("line {lineno}: ragged matrix row")));
        }
        rows.push(row);
    }
    let ncols = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::parse("no matrix rows"))?;
    let flat: Vec<f64> = rows.concat();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

/// Orthogonal `U` with `U e_1 = v/‖v‖`, a Householder reflection possibly
/// combined with a sign flip of the first coordinate.
///
/// Under `x ↦ f(Ux)` the linear coefficients `v` of `f` become `Uᵀv =
/// ‖v‖ e_1`, so the whole linear part sits on the first coordinate.
pub fn householder_from_linear(v: &[f64]) -> Result<OrthoMatrix> {
    let d = v.len();
    if d == 0 {
        return Err(Error::domain("empty vector"));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm.is_nan() || norm <= DEGENERATE_TOL {
        return Err(Error::DegenerateLinearPart {
            norm,
            tolerance: DEGENERATE_TOL,
        });
    }
    let vhat: Vec<f64> = v.iter().map(|x| x / norm).collect();
    // For v̂ near e_1 the vector e_1 − v̂ cancels; reflect e_1 to −v̂
    // through e_1 + v̂ instead and flip the sign of the first column.
    let flip = vhat[0] > 0.9;
    let mut u: Vec<f64> = vhat.iter().map(|x| if flip { *x } else { -x }).collect();
    u[0] += 1.0;
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let mut h = DMatrix::<f64>::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            h[(i, j)] -= 2.0 * u[i] * u[j] / uu;
        }
    }
    if flip {
        for i in 0..d {
            h[(i, 0)] = -h[(i, 0)];
        }
    }
    OrthoMatrix::new(h, OrthoSource::Householder)
}

/// Deterministic pseudo-random orthogonal matrix: the Q factor of a seeded
/// Gaussian matrix, with signs fixed so that `R` has a positive diagonal.
pub fn random_orthogonal(d: usize, seed: u64) -> Result<OrthoMatrix> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_column_slice(d, d, &gaussian_vec(&mut rng, d * d));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    OrthoMatrix::new(q, OrthoSource::RandomQr)
}

/// Classical ways to build a discretized Brownian path `B = Mx` on the grid
/// `1/d, 2/d, …, 1` from standard normal `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    Forward,
    BrownianBridge,
    Pca,
}

/// A `d × d` matrix with `MMᵀ = C`, `C_ij = min(i, j)/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionMatrix {
    m: DMatrix<f64>,
    kind: ConstructionKind,
}

/// The discrete Brownian covariance `C_ij = min(i, j)/d` (1-based).
pub fn brownian_covariance(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| (i.min(j) + 1) as f64 / d as f64)
}

impl ConstructionMatrix {
    pub fn kind(&self) -> ConstructionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `max |MMᵀ − C|`.
    pub fn covariance_residual(&self) -> f64 {
        max_abs_diff(
            &(&self.m * self.m.transpose()),
            &brownian_covariance(self.dim()),
        )
    }

    pub fn to_csv(&self) -> String {
        matrix_to_csv(&self.m)
    }
}

fn forward_matrix(d: usize) -> DMatrix<f64> {
    let s = 1.0 / (d as f64).sqrt();
    DMatrix::from_fn(d, d, |i, j| if j <= i { s } else { 0.0 })
}

/// Brownian bridge: the terminal value first, then repeatedly the
/// conditional midpoint of the longest unfilled interval (earliest first).
/// For `d` a power of two this is the usual level-by-level order.
fn bridge_matrix(d: usize) -> DMatrix<f64> {
    let t = |i: usize| i as f64 / d as f64;
    // row i (1-based grid index) lives at matrix row i - 1; index 0 is B(0) = 0
    let mut rows = vec![vec![0.0; d]; d + 1];
    rows[d][0] = 1.0; // B(1) = √1 · x_1
    let mut intervals = vec![(0usize, d)];
    let mut next_col = 1;
    while next_col < d {
        let (pos, &(l, r)) = intervals
            .iter()
            .enumerate()
            .filter(|(_, (l, r))| r - l >= 2)
            .max_by(|(_, a), (_, b)| (a.1 - a.0).cmp(&(b.1 - b.0)).then(b.0.cmp(&a.0)))
            .expect("an interval with an interior point remains");
        let j = (l + r) / 2;
        let (tl, tj, tr) = (t(l), t(j), t(r));
        let a = (tr - tj) / (tr - tl);
        let b = (tj - tl) / (tr - tl);
        let sigma = ((tj - tl) * (tr - tj) / (tr - tl)).sqrt();
        let row: Vec<f64> = (0..d).map(|c| a * rows[l][c] + b * rows[r][c]).collect();
        rows[j] = row;
        rows[j][next_col] += sigma;
        next_col += 1;
        intervals.splice(pos..=pos, [(l, j), (j, r)]);
    }
    let flat: Vec<f64> = rows[1..].concat();
    DMatrix::from_row_slice(d, d, &flat)
}

fn pca_matrix(d: usize) -> Result<DMatrix<f64>> {
    let (values, vectors) = symmetric_eigen_jacobi(&brownian_covariance(d))?;
    let mut m = vectors;
    for (j, &lambda) in values.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        for i in 0..d {
            m[(i, j)] *= s;
        }
    }
    Ok(m)
}

/// Builds and validates the construction matrix of the given kind.
pub fn construction_matrix(kind: ConstructionKind, d: usize) -> Result<ConstructionMatrix> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let m = match kind {
        ConstructionKind::Forward => forward_matrix(d),
        ConstructionKind::BrownianBridge => bridge_matrix(d),
        ConstructionKind::Pca => pca_matrix(d)?,
    };
    let cm = ConstructionMatrix { m, kind };
    let residual = cm.covariance_residual();
    if residual > VALIDATION_TOL {
        return Err(Error::BadConstruction { residual });
    }
    Ok(cm)
}

/// The orthogonal `U = L^{-1} M` relating a construction to the forward
/// method `L`, so that `M x = L (U x)`.
pub fn orthogonal_from_construction(m: &ConstructionMatrix) -> Result<OrthoMatrix> {
    let d = m.dim();
    let l = forward_matrix(d);
    let u = l
        .solve_lower_triangular(m.matrix())
        .ok_or_else(|| Error::domain("forward factor is singular"))?;
    let residual = max_abs_diff(&(&l * &u), m.matrix());
    if residual > VALIDATION_TOL {
        return Err(Error::BadConstruction { residual });
    }
    OrthoMatrix::new(u, OrthoSource::FromConstruction)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        max_abs_diff(a, b) <= tol
    }

    #[test]
    fn householder_examples() {
        let u = householder_from_linear(&[2.5, 0.0, 0.0]).unwrap();
        assert!(close(u.matrix(), &DMatrix::identity(3, 3), 1e-15));

        let u = householder_from_linear(&[0.0, 1.0]).unwrap();
        assert!(close(
            u.matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            1e-15
        ));

        let u = householder_from_linear(&[3.0, 4.0]).unwrap();
        assert!((u.matrix()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((u.matrix()[(1, 0)] - 0.8).abs() < 1e-15);

        // nearly aligned input takes the sign-flipped branch
        let v = [1.0, 1e-9, -2e-9];
        let u = householder_from_linear(&v).unwrap();
        let t = u.apply_transpose(&v);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((t[0] - n).abs() < 1e-15 && t[1].abs() < 1e-15 && t[2].abs() < 1e-15);

        assert!(matches!(
            householder_from_linear(&[1e-13, 0.0]),
            Err(Error::DegenerateLinearPart { .. })
        ));
    }

    #[test]
    fn forward_two() {
        let m = construction_matrix(ConstructionKind::Forward, 2).unwrap();
        let s = 0.5f64.sqrt();
        assert!(close(
            m.matrix(),
            &DMatrix::from_row_slice(2, 2, &[s, 0.0, s, s]),
            1e-15
        ));
        let u = orthogonal_from_construction(&m).unwrap();
        assert!(close(u.matrix(), &DMatrix::identity(2, 2), 1e-15));
    }

    #[test]
    fn bridge_terminal_point_first() {
        for d in [1usize, 2, 3, 4, 5, 8, 12, 16, 64] {
            let m = construction_matrix(ConstructionKind::BrownianBridge, d).unwrap();
            // B(1) depends on x_1 only, with unit variance
            assert_eq!(m.matrix()[(d - 1, 0)], 1.0);
            for c in 1..d {
                assert_eq!(m.matrix()[(d - 1, c)], 0.0);
            }
            // first row of U is (1/√d, …): Σ_j (Ux)_j/√d = x_1
            let u = orthogonal_from_construction(&m).unwrap();
            let s = 1.0 / (d as f64).sqrt();
            let w = vec![s; d];
            let t = u.apply_transpose(&w);
            assert!((t[0] - 1.0).abs() < 1e-12, "d={d}");
            assert!(t[1..].iter().all(|x| x.abs() < 1e-12), "d={d}");
        }
        // level order for d = 4: B(1), B(1/2), B(1/4), B(3/4)
        let m = construction_matrix(ConstructionKind::BrownianBridge, 4).unwrap();
        assert!(m.matrix()[(1, 1)] > 0.0 && m.matrix()[(1, 2)] == 0.0);
        assert!(m.matrix()[(0, 2)] > 0.0 && m.matrix()[(2, 3)] > 0.0);
    }

    #[test]
    fn pca_two_closed_form() {
        let m = construction_matrix(ConstructionKind::Pca, 2).unwrap();
        assert!(m.covariance_residual() <= 1e-12);
        let disc = (0.0625f64 + 0.25).sqrt();
        let l1 = 0.75 + disc;
        let col0 = m.matrix().column(0);
        assert!((col0.norm() - l1.sqrt()).abs() < 1e-14);
        let u =
            orthogonal_from_construction(&construction_matrix(ConstructionKind::Pca, 4).unwrap())
                .unwrap();
        assert!(orthogonality_residual(u.matrix()) <= 1e-10);
    }

    #[test]
    fn all_constructions_validate() {
        for kind in [
            ConstructionKind::Forward,
            ConstructionKind::BrownianBridge,
            ConstructionKind::Pca,
        ] {
            for d in [1usize, 2, 4, 8, 16, 64] {
                let m = construction_matrix(kind, d).unwrap();
                assert!(m.covariance_residual() <= 1e-10, "{kind:?} {d}");
                let u = orthogonal_from_construction(&m).unwrap();
                assert!(max_abs_diff(&(forward_matrix(d) * u.matrix()), m.matrix()) <= 1e-10);
            }
        }
    }

    #[test]
    fn random_orthogonal_is_deterministic() {
        let a = random_orthogonal(8, 42).unwrap();
        assert!(orthogonality_residual(a.matrix()) <= 1e-12);
        assert_eq!(a, random_orthogonal(8, 42).unwrap());
        assert_ne!(a, random_orthogonal(8, 43).unwrap());
        let one = random_orthogonal(1, 5).unwrap();
        assert_eq!(one.matrix()[(0, 0)].abs(), 1.0);
        let x = [0.3, -1.0, 2.0, 0.0, 0.5, 0.1, -0.7, 1.1];
        let back = a.apply_transpose(&a.apply(&x));
        assert!(back.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn matrix_csv_round_trip() {
        let a = random_orthogonal(5, 1).unwrap();
        assert_eq!(
            OrthoMatrix::from_csv(&a.to_csv()).unwrap().matrix(),
            a.matrix()
        );
        assert!(matches!(
            OrthoMatrix::from_csv("1,1\n0,1\n"),
            Err(Error::NotOrthogonal { .. })
        ));
        assert!(OrthoMatrix::from_csv("1,0\n0\n").is_err());
        assert!(OrthoMatrix::from_csv("1,0,0\n0,1,0\n").is_err());
    }
}
