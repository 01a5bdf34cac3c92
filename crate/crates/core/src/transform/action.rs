//! Exact action of `f ↦ f∘U` on Hermite coefficients.
//!
//! Convention: points are column vectors and `f∘U` is `x ↦ f(Ux)`. The
//! degree-`m` block of coefficients is lifted to a symmetric tensor in
//! `(R^d)^{⊗m}` by `J_m`, transformed by `(Uᵀ)^{⊗m}` one mode at a time, and
//! projected back by `J_m*`. For `exp(wᵀx)` this sends the coefficients of
//! `w` to those of `Uᵀw`.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::coeffs::{CoeffMap, Provenance};
use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::hermite::{enumerate_degree, indices_of_degree, ln_factorial, MultiIndex};
use crate::tensor::contract_mode;
use crate::transform::matrix::OrthoMatrix;
use crate::weights::{norm, Norm, WeightSpec};

/// Largest tensor `d^m` the general path will allocate.
pub const MAX_TENSOR_LEN: u128 = 1 << 24;

/// Entries of a signed permutation below this are treated as zero.
const PERMUTATION_TOL: f64 = 1e-15;

/// `(π, s)` with `(Ux)_i = s_i x_{π(i)}` when `U` is a signed permutation.
fn signed_permutation(u: &DMatrix<f64>) -> Option<(Vec<usize>, Vec<f64>)> {
    let d = u.nrows();
    let mut pi = Vec::with_capacity(d);
    let mut sign = Vec::with_capacity(d);
    let mut used = vec![false; d];
    for i in 0..d {
        let mut hit = None;
        for j in 0..d {
            let a = u[(i, j)];
            if (a.abs() - 1.0).abs() <= PERMUTATION_TOL {
                if hit.is_some() {
                    return None;
                }
                hit = Some((j, a.signum()));
            } else if a.abs() > PERMUTATION_TOL {
                return None;
            }
        }
        let (j, s) = hit?;
        if used[j] {
            return None;
        }
        used[j] = true;
        pi.push(j);
        sign.push(s);
    }
    Some((pi, sign))
}

fn apply_signed_permutation(pi: &[usize], sign: &[f64], coeffs: &CoeffMap) -> Result<CoeffMap> {
    let d = pi.len();
    let mut out = CoeffMap::new(d, Provenance::Transformed);
    for (k, v) in coeffs.iter() {
        let mut moved = vec![0u32; d];
        let mut s = 1.0;
        for (i, &ki) in k.entries().iter().enumerate() {
            moved[pi[i]] = ki;
            if sign[i] < 0.0 && ki % 2 == 1 {
                s = -s;
            }
        }
        out.insert(MultiIndex::new(moved), s * v)?;
    }
    Ok(out)
}

/// Degree-`m` block through `J*` · `(Uᵀ)^{⊗m}` · `J`.
fn transform_block(
    ut: &[f64],
    d: usize,
    m: u32,
    block: &[(&MultiIndex, f64)],
    exec: Exec,
) -> Result<Vec<(MultiIndex, f64)>> {
    if m == 0 {
        return Ok(block.iter().map(|(k, v)| ((*k).clone(), *v)).collect());
    }
    let len = (d as u128).pow(m);
    if len > MAX_TENSOR_LEN {
        return Err(Error::Size {
            what: "degree block tensor",
            requested: len,
            limit: MAX_TENSOR_LEN,
        });
    }
    let len = len as usize;
    let ln_m_fact = ln_factorial(m);
    let scale = |k: &[u32]| -> f64 {
        let lk: f64 = k.iter().map(|&e| ln_factorial(e)).sum();
        (0.5 * (lk - ln_m_fact)).exp()
    };

    let block_idx = indices_of_degree(d, m);
    let position: HashMap<&[u32], usize> = block_idx
        .iter()
        .enumerate()
        .map(|(i, k)| (k.entries(), i))
        .collect();
    let mut lifted_vals = vec![0.0; block_idx.len()];
    for (k, v) in block {
        lifted_vals[position[k.entries()]] = v * scale(k.entries());
    }

    // counts of β, indexed by flat position
    let counts_of = |mut flat: usize, buf: &mut [u32]| {
        buf.iter_mut().for_each(|c| *c = 0);
        for _ in 0..m {
            buf[flat % d] += 1;
            flat /= d;
        }
    };
    let mut tensor: Vec<f64> = exec.map_range(len, |flat| {
        let mut buf = vec![0u32; d];
        counts_of(flat, &mut buf);
        lifted_vals[position[&buf[..]]]
    });

    let mut dims = vec![d; m as usize];
    for mode in 0..m as usize {
        tensor = contract_mode(&tensor, &mut dims, mode, ut, d, exec);
    }

    let mut sums = vec![0.0; block_idx.len()];
    let mut buf = vec![0u32; d];
    for (flat, &t) in tensor.iter().enumerate() {
        counts_of(flat, &mut buf);
        sums[position[&buf[..]]] += t;
    }
    Ok(block_idx
        .iter()
        .zip(sums)
        .map(|(k, s)| (k.clone(), s * scale(k.entries())))
        .collect())
}

/// Coefficients of `x ↦ f(Ux)` from those of `f`, exact for every degree
/// present (an orthogonal map preserves total degree).
///
/// Signed permutations are applied by relabeling indices and need no size
/// budget. Otherwise each degree block `m` costs a tensor of `d^m` entries,
/// capped at [`MAX_TENSOR_LEN`], and the index set up to `max_degree` must
/// fit the enumeration budget.
pub fn apply_transform(
    u: &OrthoMatrix,
    coeffs: &CoeffMap,
    max_degree: u32,
    exec: Exec,
) -> Result<CoeffMap> {
    let d = u.dim();
    check_dim(d, coeffs.dim())?;
    let top = coeffs.max_degree();
    if top > max_degree {
        return Err(Error::domain(format!(
            "coefficients reach degree {top}, above the requested {max_degree}"
        )));
    }
    if let Some((pi, sign)) = signed_permutation(u.matrix()) {
        return apply_signed_permutation(&pi, &sign, coeffs);
    }
    enumerate_degree(d, max_degree)?;

    // row-major Uᵀ: entry (r, s) = U[s, r]
    let um = u.matrix();
    let ut: Vec<f64> = (0..d)
        .flat_map(|r| (0..d).map(move |s| um[(s, r)]))
        .collect();

    let mut out = CoeffMap::new(d, Provenance::Transformed);
    for m in 0..=top {
        let block: Vec<(&MultiIndex, f64)> = coeffs.degree_block(m).collect();
        if block.is_empty() {
            continue;
        }
        for (k, v) in transform_block(&ut, d, m, &block, exec)? {
            if v != 0.0 {
                out.insert(k, v)?;
            }
        }
    }
    Ok(out)
}

/// `norm(spec, apply_transform(U, coeffs, max_degree))`.
pub fn transformed_norm(
    spec: &WeightSpec,
    u: &OrthoMatrix,
    coeffs: &CoeffMap,
    max_degree: u32,
    exec: Exec,
) -> Result<Norm> {
    norm(spec, &apply_transform(u, coeffs, max_degree, exec)?)
}

/// Explicit matrices of the degree-2 action in two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct J2Demo {
    /// `J_2`, 4 × 3: rows are `β ∈ {11, 12, 21, 22}`, columns the indices
    /// `(2,0), (1,1), (0,2)`.
    pub j2: DMatrix<f64>,
    pub j2_transpose: DMatrix<f64>,
    /// `U ⊗ U`, 4 × 4.
    pub u_kron2: DMatrix<f64>,
    /// `J_2ᵀ (U ⊗ U) J_2 f̂`: the coefficients of `x ↦ f(Uᵀx)`.
    pub basis_action: [f64; 3],
    /// `J_2ᵀ (Uᵀ ⊗ Uᵀ) J_2 f̂`: the coefficients of `x ↦ f(Ux)`.
    pub coeff_action: [f64; 3],
    /// `apply_transform(U, f̂)` restricted to degree 2.
    pub via_apply: [f64; 3],
    /// `apply_transform(Uᵀ, f̂)` restricted to degree 2.
    pub via_apply_transpose: [f64; 3],
}

impl J2Demo {
    /// Largest disagreement between the matrix products and the tensor path.
    pub fn residual(&self) -> f64 {
        self.coeff_action
            .iter()
            .zip(&self.via_apply)
            .chain(self.basis_action.iter().zip(&self.via_apply_transpose))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds `J_2` for `d = 2` and checks the explicit matrix form of the
/// degree-2 action against [`apply_transform`] on `f̂ = (f̂(2,0), f̂(1,1),
/// f̂(0,2))`.
pub fn j2_matrix_demo(u: &OrthoMatrix, f2: [f64; 3]) -> Result<J2Demo> {
    check_dim(2, u.dim())?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let j2 = DMatrix::from_row_slice(
        4,
        3,
        &[1.0, 0.0, 0.0, 0.0, s, 0.0, 0.0, s, 0.0, 0.0, 0.0, 1.0],
    );
    let j2_transpose = j2.transpose();
    let um = u.matrix();
    let u_kron2 = um.kronecker(um);
    let ut = um.transpose();
    let ut_kron2 = ut.kronecker(&ut);
    let f = nalgebra::DVector::from_column_slice(&f2);
    let basis = &j2_transpose * &u_kron2 * &j2 * &f;
    let coeff = &j2_transpose * &ut_kron2 * &j2 * &f;

    let idx = [
        MultiIndex::from([2, 0]),
        MultiIndex::from([1, 1]),
        MultiIndex::from([0, 2]),
    ];
    let c = CoeffMap::from_entries(2, idx.iter().cloned().zip(f2), Provenance::Analytic)?;
    let a = apply_transform(u, &c, 2, Exec::Sequential)?;
    let b = apply_transform(&u.transpose(), &c, 2, Exec::Sequential)?;
    let pick = |m: &CoeffMap| [m.get(&idx[0]), m.get(&idx[1]), m.get(&idx[2])];
    Ok(J2Demo {
        j2,
        j2_transpose,
        u_kron2,
        basis_action: [basis[0], basis[1], basis[2]],
        coeff_action: [coeff[0], coeff[1], coeff[2]],
        via_apply: pick(&a),
        via_apply_transpose: pick(&b),
    })
}
