//! Mode-wise contraction of dense row-major tensors.

use crate::exec::Exec;

/// Minimum output elements handed to one task.
const MIN_TASK_ELEMS: usize = 2048;

/// Contracts mode `mode` of `data` (shape `dims`) with the `rows × dims[mode]`
/// row-major matrix `mat`:
///
/// `out[.., r, ..] = Σ_s mat[r, s] · data[.., s, ..]`.
///
/// Returns the new buffer; `dims[mode]` becomes `rows`. Each output element
/// is summed in ascending `s`, so the result does not depend on `exec`.
pub fn contract_mode(
    data: &[f64],
    dims: &mut [usize],
    mode: usize,
    mat: &[f64],
    rows: usize,
    exec: Exec,
) -> Vec<f64> {
    let cols = dims[mode];
    debug_assert_eq!(mat.len(), rows * cols);
    debug_assert_eq!(data.len(), dims.iter().product::<usize>());
    let inner: usize = dims[mode + 1..].iter().product();
    let outer: usize = dims[..mode].iter().product();
    let mut out = vec![0.0; outer * rows * inner];
    if out.is_empty() {
        dims[mode] = rows;
        return out;
    }

    // One task handles `group` consecutive (outer, row) pairs.
    let group = MIN_TASK_ELEMS.div_ceil(inner).max(1);
    exec.for_each_chunk_mut(&mut out, group * inner, |ci, chunk| {
        for (g, slab) in chunk.chunks_mut(inner).enumerate() {
            let pair = ci * group + g;
            let (o, r) = (pair / rows, pair % rows);
            let src = &data[o * cols * inner..(o + 1) * cols * inner];
            let coeffs = &mat[r * cols..(r + 1) * cols];
            for (s, &a) in coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let plane = &src[s * inner..(s + 1) * inner];
                for (y, &x) in slab.iter_mut().zip(plane) {
                    *y += a * x;
                }
            }
        }
    });
    dims[mode] = rows;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contracts_each_mode() {
        // 2x3 tensor
        let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut dims = vec![2, 3];
        // sum over mode 1
        let out = contract_mode(&data, &mut dims, 1, &[1.0, 1.0, 1.0], 1, Exec::Sequential);
        assert_eq!(out, vec![6.0, 15.0]);
        assert_eq!(dims, vec![2, 1]);

        let mut dims = vec![2, 3];
        // swap rows of mode 0
        let out = contract_mode(
            &data,
            &mut dims,
            0,
            &[0.0, 1.0, 1.0, 0.0],
            2,
            Exec::Parallel,
        );
        assert_eq!(out, vec![4.0, 5.0, 6.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn policies_agree_on_large_tensor() {
        let d = 5;
        let data: Vec<f64> = (0..d * d * d * d)
            .map(|i| ((i * 7919) % 101) as f64 / 17.0)
            .collect();
        let mat: Vec<f64> = (0..d * d).map(|i| (i as f64 * 0.3).cos()).collect();
        for mode in 0..4 {
            let mut d1 = vec![d; 4];
            let mut d2 = vec![d; 4];
            let a = contract_mode(&data, &mut d1, mode, &mat, d, Exec::Sequential);
            let b = contract_mode(&data, &mut d2, mode, &mat, d, Exec::Parallel);
            assert_eq!(a, b);
        }
    }
}
