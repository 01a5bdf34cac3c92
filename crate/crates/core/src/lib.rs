//! Quasi-Monte Carlo analysis in weighted Hermite spaces on `R^d`.
//!
//! The crate computes Hermite expansions of functions on `R^d` under the
//! standard Gaussian measure, their norms in weighted Hermite spaces,
//! worst-case and root-mean-square errors of equal-weight QMC rules, and the
//! exact action of orthogonal changes of variables (Brownian bridge, PCA,
//! Householder regression) on Hermite coefficients.
//!
//! Hermite polynomials are the orthonormal probabilists' ones throughout:
//! `E[H_j(X) H_k(X)] = δ_jk` for `X ~ N(0, 1)`.

pub mod coeffs;
pub mod error;
pub mod exec;
pub mod expansion;
pub mod experiment;
pub mod hermite;
pub mod kernel;
pub mod linalg;
pub mod pointset;
pub mod tensor;
pub mod transform;
pub mod weights;

pub use coeffs::{CoeffMap, Provenance, CSV_VERSION_LINE};
pub use error::{Error, Result};
pub use exec::Exec;
pub use expansion::{
    analytic_coeffs_exp, analytic_coeffs_polynomial, coeff_shift_check, estimate_coeffs,
    eval_expansion, exp_norm_sq, exp_norm_sq_truncated, gauss_hermite_rule, QuadratureRule,
};
pub use experiment::{run_forward_vs_bb_experiment, ExperimentConfig, ExperimentRow};
pub use hermite::{
    enumerate_degree, hermite_deriv_multi, hermite_eval, hermite_eval_multi, s_multiplicity,
    DegreeIndexSet, MultiIndex, Multiplicity,
};
pub use kernel::{
    kernel_eval_mehler, kernel_eval_series, rms_error, tractability_report, wce_lower_bound_exp,
    wce_upper_bound, worst_case_error, ErrorReport, GammaRule, KernelMode, WorstCase,
};
pub use pointset::{
    inverse_normal_cdf, pointset_gaussian_iid, pointset_halton_mapped, qmc_integrate, Generator,
    PointSet,
};
pub use transform::{
    apply_transform, construction_matrix, householder_from_linear, j2_matrix_demo,
    orthogonal_from_construction, random_orthogonal, transformed_norm, ConstructionKind,
    ConstructionMatrix, OrthoMatrix, OrthoSource,
};
pub use weights::{
    norm, riemann_zeta, touchard_m, weight_sum, weight_value, Family, Norm, WeightSpec,
};
