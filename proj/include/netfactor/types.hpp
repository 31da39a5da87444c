#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace netfactor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Column counts of the three latent blocks: network-only (k1), shared (k2),
/// covariate-only (k3).
struct FactorDims {
    int k1 = 0;
    int k2 = 0;
    int k3 = 0;

    int d() const noexcept { return k1 + k2; }
    int k() const noexcept { return k1 + k2 + k3; }

    /// Throws ParameterError on negative counts, or on d == 0 when a network
    /// fit is requested.
    void validate(bool requireNetwork = false) const;

    friend bool operator==(const FactorDims&, const FactorDims&) = default;
};

std::string to_string(const FactorDims& dims);

/// Full parameter set of the generalized factor model
///   Y = 1 mu' + Z23 Lambda' + E,   P = alpha 1' + 1 alpha' + Z12 Z12'.
/// Lambda2 loads the shared block Z2, Lambda3 the covariate-only block Z3.
struct ModelParams {
    Vector mu;       // p
    Matrix Lambda2;  // p x k2
    Matrix Lambda3;  // p x k3
    Matrix Z1;       // n x k1
    Matrix Z2;       // n x k2
    Matrix Z3;       // n x k3
    Vector Psi;      // p, strictly positive
    Vector alpha;    // n

    Index n() const noexcept { return alpha.size(); }
    Index p() const noexcept { return mu.size(); }
    FactorDims dims() const noexcept {
        return {static_cast<int>(Z1.cols()), static_cast<int>(Z2.cols()), static_cast<int>(Z3.cols())};
    }

    Matrix Z12() const;
    Matrix Z23() const;
    /// [Lambda2 Lambda3], p x (k2 + k3).
    Matrix Lambda() const;
    /// [0 Lambda2], p x (k1 + k2): loadings of Z12 as seen by a regression on Z12.
    Matrix Lambda12() const;

    /// Dimension consistency and Psi > 0. Throws ParameterError.
    void validate() const;
};

enum class IdentifiabilityScheme {
    Cor1_1,  ///< Z centered, Z12'Z3 = 0, Lambda2'Psi^-1 Lambda2/p diagonal distinct, Lambda3 ⊃ I
    Cor1_2,  ///< Z centered, Z'Z diagonal distinct, Lambda3'Psi^-1 Lambda3/p = I
    Cor1_3   ///< Z centered, Z12'Z3 = 0, eig(Z12'Z12) distinct, Z3'Z3 diagonal distinct,
             ///< Lambda2 lower triangular, Lambda3'Psi^-1 Lambda3/p = I
};

const char* to_string(IdentifiabilityScheme scheme) noexcept;
IdentifiabilityScheme parse_scheme(const std::string& name);

}  // namespace netfactor
