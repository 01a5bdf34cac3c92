use hermite_qmc::hermite::hermite_table;
use hermite_qmc::kernel::KernelMode;
use hermite_qmc::weights::inner_product;
use hermite_qmc::{
    eval_expansion, kernel_eval_mehler, kernel_eval_series, pointset_gaussian_iid, rms_error,
    wce_lower_bound_exp, wce_upper_bound, worst_case_error, CoeffMap, Exec, MultiIndex, PointSet,
    Provenance, WeightSpec,
};
use proptest::prelude::*;

fn exp_spec(max_omega: f64) -> impl Strategy<Value = WeightSpec> {
    (1usize..=3).prop_flat_map(move |d| {
        (
            prop::collection::vec(0.05f64..max_omega, d),
            prop::collection::vec(0.1f64..0.99, d),
        )
            .prop_map(|(omega, mut gamma)| {
                gamma.sort_by(|a, b| b.total_cmp(a));
                WeightSpec::exponential(omega, gamma).unwrap()
            })
    })
}

fn poly_spec() -> impl Strategy<Value = WeightSpec> {
    (1usize..=3).prop_flat_map(|d| {
        (
            prop::collection::vec(2.0f64..4.0, d),
            prop::collection::vec(0.1f64..1.0, d),
        )
            .prop_map(|(alpha, mut gamma)| {
                gamma.sort_by(|a, b| b.total_cmp(a));
                WeightSpec::polynomial(alpha, gamma).unwrap()
            })
    })
}

/// Coefficients of `K(·, y)` with every coordinate degree at most `m`.
fn kernel_section(spec: &WeightSpec, y: &[f64], m: u32) -> CoeffMap {
    let d = spec.dim();
    let tables: Vec<Vec<f64>> = y.iter().map(|&v| hermite_table(m, v)).collect();
    let mut out = CoeffMap::new(d, Provenance::Analytic);
    let total = (m as usize + 1).pow(d as u32);
    for flat in 0..total {
        let mut k = vec![0u32; d];
        let mut r = flat;
        for e in k.iter_mut() {
            *e = (r % (m as usize + 1)) as u32;
            r /= m as usize + 1;
        }
        let k = MultiIndex::new(k);
        let h: f64 = k
            .entries()
            .iter()
            .zip(&tables)
            .map(|(&e, t)| t[e as usize])
            .product();
        out.insert(k.clone(), spec.weight_value(&k).unwrap() * h)
            .unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn symmetric_in_both_modes(spec in exp_spec(0.6), x in prop::collection::vec(-2.0f64..2.0, 3), y in prop::collection::vec(-2.0f64..2.0, 3)) {
        let d = spec.dim();
        let (x, y) = (&x[..d], &y[..d]);
        prop_assert_eq!(kernel_eval_mehler(&spec, x, y).unwrap(), kernel_eval_mehler(&spec, y, x).unwrap());
        prop_assert_eq!(kernel_eval_series(&spec, x, y, 30).unwrap(), kernel_eval_series(&spec, y, x, 30).unwrap());
    }

    #[test]
    fn mehler_matches_series(spec in exp_spec(0.6), x in prop::collection::vec(-2.0f64..2.0, 3), y in prop::collection::vec(-2.0f64..2.0, 3)) {
        let d = spec.dim();
        let (x, y) = (&x[..d], &y[..d]);
        let a = kernel_eval_series(&spec, x, y, 80).unwrap();
        let b = kernel_eval_mehler(&spec, x, y).unwrap();
        prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn reproducing_property(spec in poly_spec(), c in prop::collection::vec(-1.0f64..1.0, 10), y in prop::collection::vec(-2.0f64..2.0, 3)) {
        let d = spec.dim();
        let m = 4;
        let idx = hermite_qmc::enumerate_degree(d, m).unwrap();
        let f = CoeffMap::from_entries(d, idx.iter().cloned().zip(c.iter().cycle().copied()), Provenance::Analytic).unwrap();
        let k_y = kernel_section(&spec, &y[..d], m);
        let lhs = inner_product(&spec, &f, &k_y).unwrap();
        let rhs = eval_expansion(&f, &y[..d]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0));
    }

    #[test]
    fn wce_permutation_invariant(spec in exp_spec(0.6), seed in 0u64..500) {
        let p = pointset_gaussian_iid(12, spec.dim(), seed).unwrap();
        let rows: Vec<Vec<f64>> = p.iter().rev().map(<[f64]>::to_vec).collect();
        let q = PointSet::from_rows(spec.dim(), &rows).unwrap();
        let a = worst_case_error(&spec, &p, KernelMode::Mehler, Exec::Parallel).unwrap().value;
        let b = worst_case_error(&spec, &q, KernelMode::Mehler, Exec::Parallel).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn rms_below_upper_bound(spec in prop_oneof![exp_spec(0.9), poly_spec()], n in 1usize..10_000) {
        let ub = wce_upper_bound(&spec, n).unwrap();
        let rms = rms_error(&spec, n).unwrap();
        prop_assert!(rms <= ub.family * (1.0 + 1e-12));
        prop_assert_eq!(rms, ub.averaged);
    }

    #[test]
    fn lower_bound_holds_for_any_points(spec in exp_spec(0.9), n in 1usize..32, seed in 0u64..1000) {
        let p = pointset_gaussian_iid(n, spec.dim(), seed).unwrap();
        let w = worst_case_error(&spec, &p, KernelMode::Mehler, Exec::Sequential).unwrap();
        let lb = wce_lower_bound_exp(&spec, n).unwrap();
        prop_assert!(w.value >= lb - 1e-12, "{} < {}", w.value, lb);
    }
}
