#include "netfactor/error.hpp"
#include "netfactor/factor_fit.hpp"
#include "netfactor/linalg.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace netfactor {

namespace {

struct EStep {
    Matrix Ginv;  // (I + L'Psi^-1 L)^-1
    Matrix beta;  // Ginv L'Psi^-1, k x p
    double logDetG = 0.0;
};

EStep e_step(const Matrix& Lambda, const Vector& Psi) {
    const Index k = Lambda.cols();
    const Matrix PsiInvL = Psi.cwiseInverse().asDiagonal() * Lambda;
    Matrix G = Matrix::Identity(k, k) + Lambda.transpose() * PsiInvL;
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) throw NumericError("EM: posterior precision is not positive definite");
    EStep e;
    e.Ginv = llt.solve(Matrix::Identity(k, k));
    e.beta = e.Ginv * PsiInvL.transpose();
    const Matrix L = llt.matrixL();
    e.logDetG = 2.0 * L.diagonal().array().log().sum();
    return e;
}

// Objective using a precomputed E-step and SB = S beta'.
double objective_from(const Matrix& S, const Matrix& Lambda, const Vector& Psi, const EStep& e,
                      const Matrix& SB) {
    const double p = static_cast<double>(S.rows());
    const double logDet = Psi.array().log().sum() + e.logDetG;
    const Matrix PsiInvL = Psi.cwiseInverse().asDiagonal() * Lambda;
    const double trace = (S.diagonal().array() / Psi.array()).sum() - (SB.transpose() * PsiInvL).trace();
    return (logDet + trace) / p;
}

}  // namespace

double quasi_log_likelihood(const Matrix& S, const Matrix& Lambda, const Vector& Psi) {
    if (S.rows() != S.cols() || Lambda.rows() != S.rows() || Psi.size() != S.rows())
        throw ParameterError("quasi_log_likelihood: dimension mismatch");
    if ((Psi.array() <= 0.0).any()) throw ParameterError("quasi_log_likelihood: Psi must be positive");
    const EStep e = e_step(Lambda, Psi);
    return objective_from(S, Lambda, Psi, e, S * e.beta.transpose());
}

EmResult em_factor_fit(const Matrix& R, int k3, const EmOptions& opts) {
    const Index n = R.rows();
    const Index p = R.cols();
    if (k3 < 0) throw ParameterError("em_factor_fit: k3 must be nonnegative");
    if (n < 1 || p < 1) throw ParameterError("em_factor_fit: empty residual matrix");
    if (k3 >= p) throw ParameterError("em_factor_fit: k3 must be smaller than p");
    if (opts.maxIter < 1 || !(opts.tol > 0.0) || !(opts.psiFloor > 0.0))
        throw ParameterError("em_factor_fit: invalid options");

    EmResult out;
    const double nd = static_cast<double>(n);
    if (k3 == 0) {
        out.Psi = R.colwise().squaredNorm().transpose() / nd;
        out.Lambda3 = Matrix(p, 0);
        for (Index j = 0; j < p; ++j) {
            if (out.Psi(j) < opts.psiFloor) {
                out.Psi(j) = opts.psiFloor;
                ++out.psiFloorHits;
            }
        }
        return out;
    }

    Matrix S = Matrix::Zero(p, p);
    S.selfadjointView<Eigen::Lower>().rankUpdate(R.transpose(), 1.0 / nd);
    S.triangularView<Eigen::StrictlyUpper>() = S.transpose();

    // Principal-components start.
    const auto eig = linalg::sorted_symmetric_eigen(S);
    const double trailing = eig.values.tail(p - k3).mean();
    Vector scale(k3);
    for (Index c = 0; c < k3; ++c) scale(c) = std::sqrt(std::max(eig.values(c) - trailing, 1e-8));
    Matrix Lambda = eig.vectors.leftCols(k3) * scale.asDiagonal();
    Vector Psi = S.diagonal() - Lambda.rowwise().squaredNorm();
    for (Index j = 0; j < p; ++j) Psi(j) = std::max(Psi(j), std::max(opts.psiFloor, 1e-3 * S(j, j)));

    EStep e = e_step(Lambda, Psi);
    Matrix SB = S * e.beta.transpose();
    double current = objective_from(S, Lambda, Psi, e, SB);
    if (!std::isfinite(current)) throw NumericError("EM: non-finite initial objective");
    out.objective.push_back(current);
    out.converged = false;

    for (int it = 0; it < opts.maxIter; ++it) {
        const Matrix Ezz = e.Ginv + e.beta * SB;
        Eigen::LLT<Matrix> llt(Ezz);
        if (llt.info() != Eigen::Success) throw NumericError("EM: factor second moment is singular");
        Lambda = llt.solve(SB.transpose()).transpose();
        for (Index j = 0; j < p; ++j) {
            double psi = S(j, j) - Lambda.row(j).dot(SB.row(j));
            if (!(psi >= opts.psiFloor)) {
                psi = opts.psiFloor;
                ++out.psiFloorHits;
            }
            Psi(j) = psi;
        }
        e = e_step(Lambda, Psi);
        SB = S * e.beta.transpose();
        const double next = objective_from(S, Lambda, Psi, e, SB);
        if (!std::isfinite(next)) throw NumericError("EM: objective became non-finite");
        out.objective.push_back(next);
        out.iterations = it + 1;
        const double change = std::abs(current - next);
        current = next;
        if (change <= opts.tol * std::max(1.0, std::abs(next))) {
            out.converged = true;
            break;
        }
    }

    // Canonical rotation: Lambda'Psi^-1 Lambda / p diagonal descending.
    const Matrix H = Lambda.transpose() * Psi.cwiseInverse().asDiagonal() * Lambda / static_cast<double>(p);
    const auto rot = linalg::sorted_symmetric_eigen(H);
    Lambda = Lambda * rot.vectors;
    Matrix scores = factor_scores(R, Lambda, Psi);
    linalg::fix_first_nonzero_signs(scores, &Lambda);
    out.Lambda3 = std::move(Lambda);
    out.Psi = std::move(Psi);
    return out;
}

}  // namespace netfactor
