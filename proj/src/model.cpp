#include "netfactor/model.hpp"

#include "netfactor/error.hpp"
#include "netfactor/linalg.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <vector>

namespace netfactor {

namespace {

constexpr double kTieTolerance = 1e-8;

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix hcat(const Matrix& a, const Matrix& b) {
    Matrix out(std::max(a.rows(), b.rows()), a.cols() + b.cols());
    if (a.cols() > 0) out.leftCols(a.cols()) = a;
    if (b.cols() > 0) out.rightCols(b.cols()) = b;
    return out;
}

void mirror_lower(Matrix& S) {
    for (Index j = 0; j < S.cols(); ++j)
        for (Index i = j + 1; i < S.rows(); ++i) S(j, i) = S(i, j);
}

bool is_zero(const Matrix& m) { return m.size() == 0 || linalg::max_abs(m) == 0.0; }

// Rotates `Z` (and `partner` loadings) so that Z'Z is diagonal descending.
void diagonalize_gram(Matrix& Z, Matrix* partner, const char* what, bool requireDistinct) {
    if (Z.cols() == 0) return;
    const auto eig = linalg::sorted_symmetric_eigen(Z.transpose() * Z);
    if (requireDistinct && Z.cols() > 1 && linalg::has_relative_tie(eig.values, kTieTolerance))
        throw TieError(std::string(what) + ": Gram matrix has tied eigenvalues");
    Z = Z * eig.vectors;
    if (partner != nullptr && partner->cols() > 0) *partner = *partner * eig.vectors;
}

}  // namespace

void FactorDims::validate(bool requireNetwork) const {
    if (k1 < 0 || k2 < 0 || k3 < 0)
        throw ParameterError("factor counts must be nonnegative, got " + to_string(*this));
    if (requireNetwork && d() < 1)
        throw ParameterError("network fit requires k1 + k2 >= 1, got " + to_string(*this));
}

std::string to_string(const FactorDims& dims) {
    return "(" + std::to_string(dims.k1) + "," + std::to_string(dims.k2) + "," +
           std::to_string(dims.k3) + ")";
}

const char* to_string(IdentifiabilityScheme scheme) noexcept {
    switch (scheme) {
    case IdentifiabilityScheme::Cor1_1: return "COR1_1";
    case IdentifiabilityScheme::Cor1_2: return "COR1_2";
    case IdentifiabilityScheme::Cor1_3: return "COR1_3";
    }
    return "?";
}

IdentifiabilityScheme parse_scheme(const std::string& name) {
    if (name == "COR1_1" || name == "1") return IdentifiabilityScheme::Cor1_1;
    if (name == "COR1_2" || name == "2") return IdentifiabilityScheme::Cor1_2;
    if (name == "COR1_3" || name == "3") return IdentifiabilityScheme::Cor1_3;
    throw ParameterError("unknown identifiability scheme '" + name + "'");
}

Matrix ModelParams::Z12() const { return hcat(Z1, Z2); }
Matrix ModelParams::Z23() const { return hcat(Z2, Z3); }
Matrix ModelParams::Lambda() const { return hcat(Lambda2, Lambda3); }

Matrix ModelParams::Lambda12() const {
    Matrix out = Matrix::Zero(p(), Z1.cols() + Z2.cols());
    if (Lambda2.cols() > 0) out.rightCols(Lambda2.cols()) = Lambda2;
    return out;
}

void ModelParams::validate() const {
    const Index nn = n();
    const Index pp = p();
    auto check = [](bool ok, const std::string& what) {
        if (!ok) throw ParameterError("ModelParams: " + what);
    };
    check(Z1.rows() == nn, "Z1 is " + shape(Z1) + ", expected n=" + std::to_string(nn) + " rows");
    check(Z2.rows() == nn, "Z2 is " + shape(Z2) + ", expected n=" + std::to_string(nn) + " rows");
    check(Z3.rows() == nn, "Z3 is " + shape(Z3) + ", expected n=" + std::to_string(nn) + " rows");
    check(Lambda2.rows() == pp && Lambda2.cols() == Z2.cols(),
          "Lambda2 is " + shape(Lambda2) + ", expected " + std::to_string(pp) + "x" +
              std::to_string(Z2.cols()));
    check(Lambda3.rows() == pp && Lambda3.cols() == Z3.cols(),
          "Lambda3 is " + shape(Lambda3) + ", expected " + std::to_string(pp) + "x" +
              std::to_string(Z3.cols()));
    check(Psi.size() == pp, "Psi has length " + std::to_string(Psi.size()) + ", expected p=" +
                                std::to_string(pp));
    for (Index j = 0; j < Psi.size(); ++j)
        check(Psi(j) > 0.0 && std::isfinite(Psi(j)), "Psi entries must be positive and finite");
}

Matrix model_probability_matrix(const ModelParams& params) {
    const Index n = params.n();
    if (params.Z1.rows() != n || params.Z2.rows() != n)
        throw ParameterError("model_probability_matrix: Z12 rows do not match alpha length");
    const Matrix Z12 = params.Z12();
    Matrix P = Matrix::Zero(n, n);
    if (Z12.cols() > 0) P.selfadjointView<Eigen::Lower>().rankUpdate(Z12);
    for (Index j = 0; j < n; ++j)
        for (Index i = j; i < n; ++i) P(i, j) += params.alpha(i) + params.alpha(j);
    mirror_lower(P);
    return P;
}

Matrix model_covariance(const ModelParams& params) {
    const Index n = params.n();
    const Index p = params.p();
    if (params.Psi.size() != p || params.Lambda2.rows() != p || params.Lambda3.rows() != p)
        throw ParameterError("model_covariance: loadings/Psi do not match mu length");
    if (params.Z2.rows() != n || params.Z3.rows() != n ||
        params.Lambda2.cols() != params.Z2.cols() || params.Lambda3.cols() != params.Z3.cols())
        throw ParameterError("model_covariance: factor/loading shapes are inconsistent");
    if (n < 2) throw ParameterError("model_covariance: needs n >= 2");
    Matrix S = Matrix::Zero(p, p);
    const Matrix signal = linalg::center_columns(params.Z23()) * params.Lambda().transpose();
    if (signal.size() > 0)
        S.selfadjointView<Eigen::Lower>().rankUpdate(signal.transpose(), 1.0 / static_cast<double>(n));
    S.diagonal() += params.Psi;
    mirror_lower(S);
    return S;
}

bool valid_for_sampling(const ModelParams& params, double tol) {
    const Matrix P = model_probability_matrix(params);
    return P.minCoeff() >= -tol && P.maxCoeff() <= 1.0 + tol;
}

ModelParams apply_identifiability(const ModelParams& in, IdentifiabilityScheme scheme) {
    in.validate();
    const auto dims = in.dims();
    const double p = static_cast<double>(in.p());
    ModelParams out = in;

    // Centering moves column means into alpha and mu.
    const Vector m1 = linalg::column_means(in.Z1);
    const Vector m2 = linalg::column_means(in.Z2);
    const Vector m3 = linalg::column_means(in.Z3);
    out.Z1 = linalg::center_columns(in.Z1);
    out.Z2 = linalg::center_columns(in.Z2);
    out.Z3 = linalg::center_columns(in.Z3);
    Vector m12(m1.size() + m2.size());
    m12 << m1, m2;
    if (m12.size() > 0) {
        out.alpha += out.Z12() * m12;
        out.alpha.array() += 0.5 * m12.squaredNorm();
    }
    if (dims.k2 > 0) out.mu += in.Lambda2 * m2;
    if (dims.k3 > 0) out.mu += in.Lambda3 * m3;

    const Matrix Z12 = out.Z12();
    if (dims.d() > 0) linalg::orthonormal_basis(Z12, "apply_identifiability: Z12");

    // Z3 ⟂ Z12: the Z2 component is absorbed into Lambda2; a Z1 component that
    // reaches Y has no model-equivalent representation.
    if (dims.k3 > 0 && dims.d() > 0) {
        const Matrix B = Z12.colPivHouseholderQr().solve(out.Z3);
        if (dims.k1 > 0 && !is_zero(in.Lambda3)) {
            const Matrix leak = out.Z1 * B.topRows(dims.k1) * in.Lambda3.transpose();
            const double scale = std::max(1.0, linalg::max_abs(out.Z3 * in.Lambda3.transpose()));
            if (linalg::max_abs(leak) > 1e-9 * scale)
                throw DegeneracyError(
                    "apply_identifiability: Z3 is correlated with the network-only block Z1; "
                    "no model-equivalent transform makes Z12'Z3 = 0");
        }
        out.Z3 -= Z12 * B;
        if (dims.k2 > 0) out.Lambda2 += out.Lambda3 * B.bottomRows(dims.k2).transpose();
    }

    diagonalize_gram(out.Z1, nullptr, "apply_identifiability: Z1", true);

    const bool lambda2Zero = is_zero(out.Lambda2);
    const bool lambda3Zero = is_zero(out.Lambda3);

    if (dims.k2 > 0) {
        if (scheme == IdentifiabilityScheme::Cor1_1 && !lambda2Zero) {
            const Vector psiInv = out.Psi.cwiseInverse();
            const Matrix H = out.Lambda2.transpose() * psiInv.asDiagonal() * out.Lambda2 / p;
            const auto eig = linalg::sorted_symmetric_eigen(H);
            if (dims.k2 > 1 && linalg::has_relative_tie(eig.values, kTieTolerance))
                throw TieError("apply_identifiability: Lambda2'Psi^-1 Lambda2/p has tied eigenvalues");
            out.Lambda2 = out.Lambda2 * eig.vectors;
            out.Z2 = out.Z2 * eig.vectors;
        } else if (scheme == IdentifiabilityScheme::Cor1_3 && !lambda2Zero) {
            if (out.Lambda2.rows() < dims.k2)
                throw DegeneracyError("apply_identifiability: p < k2, Lambda2 cannot be lower triangular");
            const Matrix top = out.Lambda2.topRows(dims.k2);
            Eigen::HouseholderQR<Matrix> qr(top.transpose());
            const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
            const double scale = R.diagonal().cwiseAbs().maxCoeff();
            if (!(R.diagonal().cwiseAbs().minCoeff() > 1e-10 * scale))
                throw DegeneracyError("apply_identifiability: leading k2 x k2 block of Lambda2 is singular");
            const Matrix Q = qr.householderQ() * Matrix::Identity(dims.k2, dims.k2);
            out.Lambda2 = out.Lambda2 * Q;
            out.Z2 = out.Z2 * Q;
        } else {
            diagonalize_gram(out.Z2, &out.Lambda2, "apply_identifiability: Z2",
                             scheme == IdentifiabilityScheme::Cor1_2);
        }
    }

    if (dims.k3 > 0) {
        if (lambda3Zero) {
            diagonalize_gram(out.Z3, &out.Lambda3, "apply_identifiability: Z3",
                             scheme != IdentifiabilityScheme::Cor1_1);
        } else if (scheme == IdentifiabilityScheme::Cor1_1) {
            if (out.Lambda3.rows() < dims.k3)
                throw DegeneracyError("apply_identifiability: p < k3, Lambda3 cannot contain I");
            const Matrix T = out.Lambda3.topRows(dims.k3);
            Eigen::FullPivLU<Matrix> lu(T);
            if (!lu.isInvertible() || !(lu.rcond() > 1e-12))
                throw DegeneracyError("apply_identifiability: leading k3 x k3 block of Lambda3 is singular");
            out.Lambda3 = out.Lambda3 * lu.inverse();
            out.Z3 = out.Z3 * T.transpose();
            out.Lambda3.topRows(dims.k3).setIdentity();
        } else {
            const Vector psiInv = out.Psi.cwiseInverse();
            const Matrix H = out.Lambda3.transpose() * psiInv.asDiagonal() * out.Lambda3 / p;
            Eigen::LLT<Matrix> llt(H);
            if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14))
                throw DegeneracyError("apply_identifiability: Lambda3'Psi^-1 Lambda3 is singular");
            const Matrix L = llt.matrixL();
            out.Lambda3 = L.triangularView<Eigen::Lower>().solve(out.Lambda3.transpose()).transpose();
            out.Z3 = out.Z3 * L;
            diagonalize_gram(out.Z3, &out.Lambda3, "apply_identifiability: Z3", true);
        }
    }

    if (scheme == IdentifiabilityScheme::Cor1_2) {
        const double scale = std::max({1e-300, out.Z1.colwise().squaredNorm().maxCoeff(),
                                       out.Z2.size() ? out.Z2.colwise().squaredNorm().maxCoeff() : 0.0});
        if (dims.k1 > 0 && dims.k2 > 0 &&
            linalg::max_abs(out.Z1.transpose() * out.Z2) > 1e-9 * scale)
            throw DegeneracyError(
                "apply_identifiability: COR1_2 needs Z1'Z2 = 0, which no model-equivalent "
                "transform can produce from these parameters");
        std::vector<double> diag;
        for (const Matrix* Z : {&out.Z1, &out.Z2, &out.Z3})
            for (Index c = 0; c < Z->cols(); ++c) diag.push_back(Z->col(c).squaredNorm());
        std::sort(diag.begin(), diag.end(), std::greater<>());
        if (linalg::has_relative_tie(Eigen::Map<Vector>(diag.data(), static_cast<Index>(diag.size())),
                                     kTieTolerance))
            throw TieError("apply_identifiability: COR1_2 needs distinct diagonal entries of Z'Z");
    }
    if (scheme == IdentifiabilityScheme::Cor1_3 && dims.d() > 1) {
        const Matrix Z12r = out.Z12();
        const auto eig = linalg::sorted_symmetric_eigen(Z12r.transpose() * Z12r, false);
        if (linalg::has_relative_tie(eig.values, kTieTolerance))
            throw TieError("apply_identifiability: COR1_3 needs distinct eigenvalues of Z12'Z12");
    }

    linalg::fix_first_nonzero_signs(out.Z1);
    linalg::fix_first_nonzero_signs(out.Z2, &out.Lambda2);
    if (scheme != IdentifiabilityScheme::Cor1_1 || lambda3Zero)
        linalg::fix_first_nonzero_signs(out.Z3, &out.Lambda3);
    return out;
}

double IdentifiabilityResiduals::max() const {
    return std::max({columnMean, crossZ12Z3, lambda2OffDiag, lambda3Block, lambda3Gram, zGramOffDiag,
                     lambda2Upper});
}

IdentifiabilityResiduals identifiability_residuals(const ModelParams& params,
                                                   IdentifiabilityScheme scheme) {
    params.validate();
    IdentifiabilityResiduals r;
    const auto dims = params.dims();
    const double p = static_cast<double>(params.p());
    for (const Matrix* Z : {&params.Z1, &params.Z2, &params.Z3})
        if (Z->cols() > 0) r.columnMean = std::max(r.columnMean, linalg::column_means(*Z).cwiseAbs().maxCoeff());
    const Vector psiInv = params.Psi.cwiseInverse();
    auto offDiag = [](const Matrix& G) {
        Matrix m = G;
        m.diagonal().setZero();
        return linalg::max_abs(m);
    };
    if (scheme != IdentifiabilityScheme::Cor1_2 && dims.k3 > 0 && dims.d() > 0)
        r.crossZ12Z3 = linalg::max_abs(params.Z12().transpose() * params.Z3);
    switch (scheme) {
    case IdentifiabilityScheme::Cor1_1:
        if (dims.k2 > 0)
            r.lambda2OffDiag = offDiag(params.Lambda2.transpose() * psiInv.asDiagonal() * params.Lambda2 / p);
        if (dims.k3 > 0)
            r.lambda3Block = linalg::max_abs(params.Lambda3.topRows(dims.k3) -
                                             Matrix::Identity(dims.k3, dims.k3));
        break;
    case IdentifiabilityScheme::Cor1_2: {
        Matrix Z(params.n(), dims.k());
        Z << params.Z1, params.Z2, params.Z3;
        if (Z.cols() > 0) r.zGramOffDiag = offDiag(Z.transpose() * Z);
        if (dims.k3 > 0)
            r.lambda3Gram = linalg::max_abs(params.Lambda3.transpose() * psiInv.asDiagonal() * params.Lambda3 / p -
                                            Matrix::Identity(dims.k3, dims.k3));
        break;
    }
    case IdentifiabilityScheme::Cor1_3:
        if (dims.k3 > 0) {
            r.zGramOffDiag = offDiag(params.Z3.transpose() * params.Z3);
            r.lambda3Gram = linalg::max_abs(params.Lambda3.transpose() * psiInv.asDiagonal() * params.Lambda3 / p -
                                            Matrix::Identity(dims.k3, dims.k3));
        }
        if (dims.k2 > 1) {
            Matrix top = params.Lambda2.topRows(dims.k2);
            top.triangularView<Eigen::Lower>().setZero();
            r.lambda2Upper = linalg::max_abs(top);
        }
        break;
    }
    return r;
}

double subspace_alignment(const Matrix& Xhat, const Matrix& X) {
    if (Xhat.rows() != X.rows())
        throw ParameterError("subspace_alignment: row mismatch " + shape(Xhat) + " vs " + shape(X));
    if (Xhat.cols() == 0) throw ParameterError("subspace_alignment: estimate has no columns");
    const double total = X.squaredNorm();
    if (!(total > 0.0)) throw ParameterError("subspace_alignment: reference matrix is zero");
    const Matrix Q = linalg::orthonormal_basis(Xhat, "subspace_alignment: estimate");
    const double captured = (Q.transpose() * X).squaredNorm();
    return std::clamp(captured / total, 0.0, 1.0);
}

}  // namespace netfactor
