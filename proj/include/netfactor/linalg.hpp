#pragma once

#include "netfactor/types.hpp"

#include <vector>

// Small dense helpers shared across modules.
namespace netfactor::linalg {

struct SymmetricEigen {
    Vector values;   // descending
    Matrix vectors;  // columns match values; empty when not requested
};

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
SymmetricEigen sorted_symmetric_eigen(const Matrix& S, bool computeVectors = true);

/// True when two consecutive entries of a descending sequence are within
/// relTol * max|value| of each other.
bool has_relative_tie(const Vector& descending, double relTol);

Vector column_means(const Matrix& X);
Matrix center_columns(const Matrix& X);

/// Orthonormal basis of span(X) via column-pivoted QR. Throws DegeneracyError
/// naming `what` when X is column rank deficient.
Matrix orthonormal_basis(const Matrix& X, const char* what, double rankTol = 1e-10);

/// X - Q Q' X for an orthonormal Q.
Matrix project_out(const Matrix& X, const Matrix& Q);

/// Flip columns of Z so the first non-negligible entry (|z| > 1e-12 * max|z_col|)
/// is positive. The same flips are applied to the columns of `partner` when
/// given. Returns the applied signs.
Vector fix_first_nonzero_signs(Matrix& Z, Matrix* partner = nullptr);

/// Flip columns so the first entry of largest magnitude is positive.
Vector fix_largest_entry_signs(Matrix& X);

double max_abs(const Matrix& X);

/// Symmetric positive definite solve with a Cholesky factorization; throws
/// DegeneracyError naming `what` when the matrix is not numerically PD.
Matrix spd_inverse(const Matrix& G, const char* what);

}  // namespace netfactor::linalg
