#pragma once

#include "netfactor/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace netfactor {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Covariate matrix with an optional missing-entry mask (true = missing).
/// An empty mask means fully observed.
struct DataMatrix {
    Matrix Y;
    Mask missing;

    bool has_missing() const { return missing.size() > 0 && missing.any(); }
    Index missing_count() const { return missing.size() > 0 ? static_cast<Index>(missing.count()) : 0; }
    /// Throws ParameterError on a mask of the wrong shape or non-finite observed entries.
    void validate() const;
};

struct EmOptions {
    int maxIter = 1000;
    double tol = 1e-8;        ///< relative change of the objective
    double psiFloor = 1e-6;
};

struct EmResult {
    Matrix Lambda3;                ///< p x k3, Lambda3'Psi^-1 Lambda3/p diagonal descending
    Vector Psi;
    std::vector<double> objective; ///< quasi log-likelihood objective per iteration (minimized)
    int iterations = 0;
    bool converged = true;
    long psiFloorHits = 0;
};

struct FactorFit {
    Vector muHat;
    Matrix Lambda12Hat;            ///< p x d, in Zhat12 coordinates (never rotated in place)
    Matrix Lambda3Hat;             ///< p x k3
    Matrix Zhat3;                  ///< n x k3
    Vector PsiHat;
    Matrix residual;               ///< n x p
    std::vector<double> emTrace;
    int emIterations = 0;
    bool emConverged = true;
    long psiFloorHits = 0;
    std::optional<Matrix> rotation;  ///< d x d orthogonal applied post hoc to the Z12 block
    std::vector<Index> fullyMaskedColumns;
    std::vector<std::string> warnings;

    Index n() const { return residual.rows(); }
    /// Lambda12Hat * rotation when a rotation is set.
    Matrix rotated_loadings() const;
};

/// Column means.
Vector estimate_mean(const DataMatrix& Y);
Vector estimate_mean(const Matrix& Y);

/// Lambda12' = (Z'Z)^-1 Z'Y via a column-pivoted QR of Zhat12.
Matrix regress_loadings(const Matrix& Ycentered, const Matrix& Zhat12);

/// n^-1 (Z'Z/n)^-1 Psi_jj.
Matrix loading_variance(const Matrix& Zhat12, const Vector& PsiHat, Index j);

/// (I - P_[1, Zhat12]) Y: residual after removing the mean and the Zhat12 span.
Matrix residual_matrix(const Matrix& Ycentered, const Matrix& Zhat12);

/// p^-1 { ln|Sigma| + tr(S Sigma^-1) } for Sigma = Lambda Lambda' + diag(Psi).
double quasi_log_likelihood(const Matrix& S, const Matrix& Lambda, const Vector& Psi);

/// Maximum-likelihood factor analysis of the residual by EM. With k3 = 0 the
/// result is Psi = diag(R'R/n) and no iterations run.
EmResult em_factor_fit(const Matrix& R, int k3, const EmOptions& opts = {});

/// GLS scores (Lambda'Psi^-1 Lambda)^-1 Lambda'Psi^-1 r_i.
Matrix factor_scores(const Matrix& R, const Matrix& Lambda3, const Vector& Psi);

/// 2 Psi_jj^2 / n.
double psi_variance(const Vector& PsiHat, Index j, Index n);

struct VarimaxResult {
    Matrix Lambda;
    Matrix Z;
    Matrix rotation;
    int sweeps = 0;
};

/// Raw varimax criterion: sum over columns of the variance of squared loadings.
double varimax_criterion(const Matrix& Lambda);
/// Pairwise (Kaiser) varimax rotation; throws NumericError after 1000 sweeps
/// without convergence.
VarimaxResult varimax_rotate(const Matrix& Lambda, const Matrix& Z);

struct LoadingIntervals {
    double level = 0.95;
    Matrix estimate;   ///< p x d (rotated when the fit carries a rotation)
    Matrix stdError;
    Matrix lower;
    Matrix upper;

    /// True when the interval for (j, l) excludes zero.
    bool significant(Index j, Index l) const { return lower(j, l) > 0.0 || upper(j, l) < 0.0; }
};

/// Normal intervals for the Z12 loadings. `Zhat12` is the unrotated embedding
/// used in the fit; with a rotation G the covariance of G'lambda_j is G'V_j G.
LoadingIntervals loading_confidence_intervals(const FactorFit& fit, const Matrix& Zhat12, double level);

/// Sets fit.rotation to the varimax rotation of Lambda12Hat and returns the
/// rotated embedding Zhat12 * G.
Matrix apply_varimax(FactorFit& fit, const Matrix& Zhat12);

/// Step 2 on fully observed data.
FactorFit fit_factor_model(const Matrix& Y, const Matrix& Zhat12, int k3, const EmOptions& opts = {});

/// Step 2 with missing entries: masked cells start at the observed column
/// mean and are repeatedly replaced by the fitted mean structure of a full
/// refit until they settle. The returned fit belongs to the completed matrix.
FactorFit fit_factor_model_masked(const DataMatrix& data, const Matrix& Zhat12, int k3,
                                  const EmOptions& opts = {});

struct ImputationResult {
    Matrix Y;
    std::vector<Index> fullyMaskedColumns;
};

/// Replaces masked entries by mu_j + lambda12_j' z12_i + lambda3_j' z3_i;
/// observed entries are returned untouched. Fully masked columns are imputed
/// with 0 and listed.
ImputationResult impute_missing(const DataMatrix& data, const FactorFit& fit, const Matrix& Zhat12);

}  // namespace netfactor
