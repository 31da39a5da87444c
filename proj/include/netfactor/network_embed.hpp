#pragma once

#include "netfactor/adjacency.hpp"
#include "netfactor/eigen_solver.hpp"
#include "netfactor/types.hpp"

#include <string>
#include <vector>

namespace netfactor {

/// Scaled top eigenvectors U S^{1/2} of a symmetric matrix.
struct Embedding {
    Matrix X;                        ///< n x d, columns sign-fixed (largest-magnitude entry positive)
    Vector eigenvalues;              ///< the d embedded eigenvalues, descending
    Vector topSingularValues;        ///< largest min(d + 2, n) |eigenvalues|, descending
    std::vector<std::string> warnings;
};

/// d-dimensional adjacency spectral embedding. Throws NumericError when the
/// matrix has no nonzero eigenvalue and DegeneracyError when fewer than d
/// eigenvalues are positive.
Embedding spectral_embed(const AdjacencyMatrix& A, int d, const EigenOptions& opts = {});
/// Same on an arbitrary real symmetric matrix (diagonal included), e.g. an
/// exact probability matrix used as a noiseless surrogate.
Embedding spectral_embed(const Matrix& S, int d, const EigenOptions& opts = {});

/// n^-1 (I - P1/2) A 1 with P1 = 1 1' / n.
Vector estimate_alpha(const AdjacencyMatrix& A);
Vector estimate_alpha(const Matrix& S);

struct NetworkFit {
    Matrix Xhat;               ///< uncentered embedding
    Matrix Zhat12;             ///< (I - P1) Xhat * rotation: centered, diagonal Gram descending, sign-fixed
    Matrix rotation;           ///< d x d orthogonal (sign flips included)
    Vector alphaHat;
    Vector topSingularValues;  ///< length d + 2 (fewer when n is small)
    int d = 0;
    std::vector<std::string> warnings;
};

NetworkFit ase_fit(const AdjacencyMatrix& A, int d, const EigenOptions& opts = {});
NetworkFit ase_fit(const Matrix& S, int d, const EigenOptions& opts = {});

/// Zhu-Ghodsi profile-likelihood elbow of a descending scree: the q in
/// [1, m - 1] maximizing the two-segment Gaussian log-likelihood with pooled
/// variance. Throws SelectionError when all values agree within 1e-12.
int profile_likelihood_elbow(const Vector& scree);

/// Elbow of the top min(dmax + 1, n / 2) singular values of A.
int select_embedding_dim(const AdjacencyMatrix& A, int dmax, const EigenOptions& opts = {});
int select_embedding_dim(const Matrix& S, int dmax, const EigenOptions& opts = {});

/// Plug-in covariance of the i-th row of Zhat12 (in Zhat12 coordinates):
/// n^-1 M^-1 Q_i M^-1 with M = Xhat'Xhat/n and
/// Q_i = sum_{j != i} c_ij (1 - c_ij) x_j x_j' / n, c_ij = clamp(x_i'x_j, 0, 1).
Matrix latent_position_variance(const NetworkFit& fit, Index i);

/// Plug-in variance of alphaHat_i: n^-1 sum_{j != i} c_ij (1 - c_ij) / n.
double alpha_variance(const NetworkFit& fit, Index i);

}  // namespace netfactor
