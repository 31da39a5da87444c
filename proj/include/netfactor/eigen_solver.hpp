#pragma once

#include "netfactor/adjacency.hpp"
#include "netfactor/types.hpp"

#include <cstdint>
#include <functional>

namespace netfactor {

enum class EigenMethod { Auto, Dense, Lanczos };

struct EigenOptions {
    EigenMethod method = EigenMethod::Auto;
    Index denseLimit = 2000;  ///< Auto uses the dense solver up to this size
    double tol = 1e-11;       ///< Lanczos residual tolerance relative to the spectral radius
    Index maxBasis = 0;       ///< Lanczos Krylov size cap; 0 means n
    std::uint64_t seed = 0x5eed;
};

/// Extremal part of a symmetric spectrum.
struct PartialSpectrum {
    Vector top;         ///< algebraically largest eigenvalues, descending
    Matrix topVectors;  ///< matching unit eigenvectors
    Vector magnitudes;  ///< largest |eigenvalues|, descending
    int lanczosSteps = 0;
};

using SymmetricOperator = std::function<Matrix(const Matrix&)>;

/// Largest `nTop` eigenpairs (algebraic order) and the `nMagnitude` largest
/// eigenvalue magnitudes of a symmetric n x n operator, by Lanczos with full
/// reorthogonalization. The Krylov space grows until every requested Ritz
/// pair has residual below tol * |lambda|_max.
PartialSpectrum lanczos_spectrum(const SymmetricOperator& op, Index n, Index nTop, Index nMagnitude,
                                 const EigenOptions& opts);

/// Dense path (full decomposition).
PartialSpectrum dense_spectrum(const Matrix& S, Index nTop, Index nMagnitude);

/// Dispatches on opts.method and n.
PartialSpectrum symmetric_spectrum(const Matrix& S, Index nTop, Index nMagnitude, const EigenOptions& opts);
PartialSpectrum symmetric_spectrum(const AdjacencyMatrix& A, Index nTop, Index nMagnitude,
                                   const EigenOptions& opts);

}  // namespace netfactor
