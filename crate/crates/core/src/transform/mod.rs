//! Orthogonal transforms of `R^d` and their action on Hermite expansions.

mod action;
mod matrix;

pub use action::{apply_transform, j2_matrix_demo, transformed_norm, J2Demo, MAX_TENSOR_LEN};
pub use matrix::{
    brownian_covariance, construction_matrix, householder_from_linear, matrix_from_csv,
    matrix_to_csv, orthogonal_from_construction, random_orthogonal, ConstructionKind,
    ConstructionMatrix, OrthoMatrix, OrthoSource, DEGENERATE_TOL, VALIDATION_TOL,
};
