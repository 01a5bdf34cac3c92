use hermite_qmc::transform::OrthoSource;
use hermite_qmc::{
    analytic_coeffs_exp, apply_transform, enumerate_degree, estimate_coeffs, eval_expansion,
    householder_from_linear, random_orthogonal, CoeffMap, Exec, MultiIndex, OrthoMatrix,
    Provenance,
};
use proptest::prelude::*;

fn random_coeffs(d: usize, m: u32, seed: u64) -> CoeffMap {
    let idx = enumerate_degree(d, m).unwrap();
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let vals = idx.iter().map(|_| {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    });
    CoeffMap::from_entries(
        d,
        idx.iter().cloned().zip(vals).collect::<Vec<_>>(),
        Provenance::Analytic,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn degree_blocks_keep_their_mass(d in 1usize..=4, m in 0u32..=6, seed in any::<u64>()) {
        let u = random_orthogonal(d, seed).unwrap();
        let c = random_coeffs(d, m, seed ^ 1);
        let out = apply_transform(&u, &c, m, Exec::Parallel).unwrap();
        prop_assert!(out.max_degree() <= m);
        let before = c.l2_by_degree();
        let after = out.l2_by_degree();
        for (deg, mass) in before {
            let got = after.get(&deg).copied().unwrap_or(0.0);
            prop_assert!((got - mass).abs() <= 1e-10 * mass.max(1e-300), "degree {}: {} vs {}", deg, got, mass);
        }
    }

    #[test]
    fn composition_and_inverse(d in 1usize..=4, m in 0u32..=5, s1 in any::<u64>(), s2 in any::<u64>()) {
        let u = random_orthogonal(d, s1).unwrap();
        let v = random_orthogonal(d, s2).unwrap();
        let c = random_coeffs(d, m, s1 ^ s2);
        let uv = apply_transform(&u, &apply_transform(&v, &c, m, Exec::Parallel).unwrap(), m, Exec::Parallel).unwrap();
        let vu = apply_transform(&v.compose(&u).unwrap(), &c, m, Exec::Parallel).unwrap();
        prop_assert!(uv.max_abs_diff(&vu).unwrap() <= 1e-9);
        let back = apply_transform(&u.transpose(), &apply_transform(&u, &c, m, Exec::Parallel).unwrap(), m, Exec::Parallel).unwrap();
        prop_assert!(back.max_abs_diff(&c).unwrap() <= 1e-9);
    }

    #[test]
    fn matches_quadrature_oracle(d in 1usize..=3, seed in any::<u64>(), w in prop::collection::vec(-0.5f64..0.5, 3)) {
        let m = if d == 3 { 6 } else { 8 };
        let u = random_orthogonal(d, seed).unwrap();
        let w = w[..d].to_vec();
        let c = analytic_coeffs_exp(&w, m).unwrap();
        // a polynomial with the same low-degree structure, exactly representable
        let poly = c.clone();
        let got = apply_transform(&u, &poly, m, Exec::Parallel).unwrap();
        let uu = u.clone();
        let oracle = estimate_coeffs(move |x| eval_expansion(&poly, &uu.apply(x)).unwrap(), d, m, m as usize + 2, Exec::Parallel).unwrap();
        prop_assert!(got.max_abs_diff(&oracle).unwrap() <= 1e-7);
    }

    #[test]
    fn householder_concentrates_linear_part(v in prop::collection::vec(-2.0f64..2.0, 1..=6)) {
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let d = v.len();
        let u = householder_from_linear(&v).unwrap();
        let c = CoeffMap::from_entries(d, (0..d).map(|j| (MultiIndex::unit(d, j), v[j])), Provenance::Analytic).unwrap();
        let out = apply_transform(&u, &c, 1, Exec::Sequential).unwrap();
        prop_assert!((out.get(&MultiIndex::unit(d, 0)) - norm).abs() <= 1e-10);
        for j in 1..d {
            prop_assert!(out.get(&MultiIndex::unit(d, j)).abs() <= 1e-10);
        }
    }
}

#[test]
fn policies_agree_bitwise() {
    let u = random_orthogonal(4, 3).unwrap();
    let c = random_coeffs(4, 6, 3);
    let a = apply_transform(&u, &c, 6, Exec::Sequential).unwrap();
    let b = apply_transform(&u, &c, 6, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn user_matrices_are_validated() {
    let m = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 1e-9, 0.0, 1.0]);
    assert!(OrthoMatrix::new(m, OrthoSource::UserSupplied).is_err());
}
