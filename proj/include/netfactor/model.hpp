#pragma once

#include "netfactor/types.hpp"

namespace netfactor {

/// P = alpha 1' + 1 alpha' + Z12 Z12'. Exactly symmetric.
Matrix model_probability_matrix(const ModelParams& params);

/// Cov(Y) = Lambda M23 Lambda' + diag(Psi) with M23 = Z23'(I - P1)Z23 / n.
/// The centered Gram coincides with Z23'Z23/n whenever Z is centered.
Matrix model_covariance(const ModelParams& params);

/// True when every entry of the model probability matrix lies in [0, 1]
/// (within `tol`).
bool valid_for_sampling(const ModelParams& params, double tol = 1e-12);

/// Maps params onto the canonical representative of the chosen identifiability
/// scheme without changing P, Cov(Y) or the centered signal Z23 Lambda'.
///
/// Conventions beyond the stated condition sets:
///  - Z1 is rotated so Z1'Z1 is diagonal descending (its rotation is otherwise free).
///  - A loading block that is identically zero carries no rotation information;
///    its factor block then falls back to the diagonal-Gram convention.
///  - Under Cor1_1 the identity block of Lambda3 occupies its first k3 rows, and
///    the Z3 signs are pinned by it.
///
/// Throws DegeneracyError on rank deficiency or when Z3 has a component along Z1
/// that reaches Y (not representable without Z1 loading on Y), TieError when a
/// distinctness requirement fails at relative gap 1e-8.
ModelParams apply_identifiability(const ModelParams& params,
                                  IdentifiabilityScheme scheme = IdentifiabilityScheme::Cor1_1);

/// Constraint residuals of a parameter set against a scheme. Entries that do
/// not apply to the scheme are zero.
struct IdentifiabilityResiduals {
    double columnMean = 0.0;      ///< max |column mean of Z|
    double crossZ12Z3 = 0.0;      ///< max |Z12'Z3|
    double lambda2OffDiag = 0.0;  ///< Cor1_1: max off-diagonal of Lambda2'Psi^-1 Lambda2/p
    double lambda3Block = 0.0;    ///< Cor1_1: max |Lambda3[0:k3] - I|
    double lambda3Gram = 0.0;     ///< Cor1_2/3: max |Lambda3'Psi^-1 Lambda3/p - I|
    double zGramOffDiag = 0.0;    ///< Cor1_2: off-diagonal of Z'Z; Cor1_3: of Z3'Z3
    double lambda2Upper = 0.0;    ///< Cor1_3: max |strict upper triangle of Lambda2|

    double max() const;
};

IdentifiabilityResiduals identifiability_residuals(const ModelParams& params,
                                                   IdentifiabilityScheme scheme);

/// Tr(Xhat, X) = tr(X' P_Xhat X) / tr(X'X): the share of X's energy captured by
/// the column space of Xhat. Throws DegeneracyError for rank-deficient Xhat and
/// ParameterError for a zero X.
double subspace_alignment(const Matrix& Xhat, const Matrix& X);

}  // namespace netfactor
