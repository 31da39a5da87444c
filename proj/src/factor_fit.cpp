#include "netfactor/factor_fit.hpp"

#include "netfactor/error.hpp"
#include "netfactor/linalg.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace netfactor {

void DataMatrix::validate() const {
    if (missing.size() > 0 && (missing.rows() != Y.rows() || missing.cols() != Y.cols()))
        throw ParameterError("DataMatrix: mask shape does not match Y");
    for (Index j = 0; j < Y.cols(); ++j)
        for (Index i = 0; i < Y.rows(); ++i)
            if ((missing.size() == 0 || !missing(i, j)) && !std::isfinite(Y(i, j)))
                throw ParameterError("DataMatrix: non-finite observed entry at (" + std::to_string(i) + ", " +
                                     std::to_string(j) + ")");
}

Matrix FactorFit::rotated_loadings() const {
    return rotation ? Matrix(Lambda12Hat * *rotation) : Lambda12Hat;
}

Vector estimate_mean(const Matrix& Y) {
    if (Y.rows() < 1) throw ParameterError("estimate_mean: needs n >= 1");
    return linalg::column_means(Y);
}

Vector estimate_mean(const DataMatrix& data) {
    if (data.has_missing())
        throw ParameterError("estimate_mean: data has missing entries; use the masked fit");
    return estimate_mean(data.Y);
}

Matrix regress_loadings(const Matrix& Ycentered, const Matrix& Zhat12) {
    if (Ycentered.rows() != Zhat12.rows())
        throw ParameterError("regress_loadings: Y has " + std::to_string(Ycentered.rows()) + " rows, Zhat12 " +
                             std::to_string(Zhat12.rows()));
    if (Zhat12.cols() == 0) return Matrix(Ycentered.cols(), 0);
    Eigen::ColPivHouseholderQR<Matrix> qr(Zhat12);
    qr.setThreshold(1e-10);
    if (qr.rank() < Zhat12.cols())
        throw DegeneracyError("regress_loadings: Zhat12 is column rank deficient");
    return qr.solve(Ycentered).transpose();
}

Matrix loading_variance(const Matrix& Zhat12, const Vector& PsiHat, Index j) {
    if (j < 0 || j >= PsiHat.size()) throw ParameterError("loading_variance: variable index out of range");
    const double n = static_cast<double>(Zhat12.rows());
    const Matrix Minv = linalg::spd_inverse(Zhat12.transpose() * Zhat12 / n, "loading_variance");
    return Minv * (PsiHat(j) / n);
}

Matrix residual_matrix(const Matrix& Ycentered, const Matrix& Zhat12) {
    const Index n = Ycentered.rows();
    if (Zhat12.rows() != n) throw ParameterError("residual_matrix: row mismatch between Y and Zhat12");
    Matrix basis(n, Zhat12.cols() + 1);
    basis.col(0).setOnes();
    basis.rightCols(Zhat12.cols()) = Zhat12;
    const Matrix Q = linalg::orthonormal_basis(basis, "residual_matrix: [1, Zhat12]");
    return linalg::project_out(Ycentered, Q);
}

Matrix factor_scores(const Matrix& R, const Matrix& Lambda3, const Vector& Psi) {
    if (Lambda3.rows() != R.cols() || Psi.size() != R.cols())
        throw ParameterError("factor_scores: loadings/Psi do not match the residual width");
    if (Lambda3.cols() == 0) return Matrix(R.rows(), 0);
    const Matrix weighted = Psi.cwiseInverse().asDiagonal() * Lambda3;
    const Matrix inner = linalg::spd_inverse(Lambda3.transpose() * weighted, "factor_scores");
    return R * weighted * inner;
}

double psi_variance(const Vector& PsiHat, Index j, Index n) {
    if (j < 0 || j >= PsiHat.size()) throw ParameterError("psi_variance: variable index out of range");
    if (n < 1) throw ParameterError("psi_variance: needs n >= 1");
    return 2.0 * PsiHat(j) * PsiHat(j) / static_cast<double>(n);
}

LoadingIntervals loading_confidence_intervals(const FactorFit& fit, const Matrix& Zhat12, double level) {
    if (!(level >= 0.0 && level < 1.0)) throw ParameterError("confidence level must lie in [0, 1)");
    const Index p = fit.Lambda12Hat.rows();
    const Index d = fit.Lambda12Hat.cols();
    if (Zhat12.cols() != d) throw ParameterError("loading_confidence_intervals: Zhat12 width mismatch");
    const double n = static_cast<double>(Zhat12.rows());
    const Matrix Minv = linalg::spd_inverse(Zhat12.transpose() * Zhat12 / n, "loading_confidence_intervals");
    Vector base = Minv.diagonal();
    if (fit.rotation) base = (fit.rotation->transpose() * Minv * *fit.rotation).diagonal();

    const double z = level == 0.0 ? 0.0
                                  : boost::math::quantile(boost::math::normal_distribution<double>(),
                                                          0.5 * (1.0 + level));
    LoadingIntervals out;
    out.level = level;
    out.estimate = fit.rotated_loadings();
    out.stdError.resize(p, d);
    for (Index j = 0; j < p; ++j)
        for (Index l = 0; l < d; ++l) out.stdError(j, l) = std::sqrt(base(l) * fit.PsiHat(j) / n);
    out.lower = out.estimate - z * out.stdError;
    out.upper = out.estimate + z * out.stdError;
    return out;
}

Matrix apply_varimax(FactorFit& fit, const Matrix& Zhat12) {
    const auto rot = varimax_rotate(fit.Lambda12Hat, Zhat12);
    fit.rotation = rot.rotation;
    return rot.Z;
}

FactorFit fit_factor_model(const Matrix& Y, const Matrix& Zhat12, int k3, const EmOptions& opts) {
    if (k3 < 0) throw ParameterError("k3 must be nonnegative");
    if (Y.rows() != Zhat12.rows()) throw ParameterError("fit_factor_model: Y and Zhat12 differ in n");
    FactorFit fit;
    fit.muHat = estimate_mean(Y);
    const Matrix Yc = Y.rowwise() - fit.muHat.transpose();
    fit.Lambda12Hat = regress_loadings(Yc, Zhat12);
    fit.residual = residual_matrix(Yc, Zhat12);
    auto em = em_factor_fit(fit.residual, k3, opts);
    fit.Lambda3Hat = std::move(em.Lambda3);
    fit.PsiHat = std::move(em.Psi);
    fit.emTrace = std::move(em.objective);
    fit.emIterations = em.iterations;
    fit.emConverged = em.converged;
    fit.psiFloorHits = em.psiFloorHits;
    fit.Zhat3 = factor_scores(fit.residual, fit.Lambda3Hat, fit.PsiHat);
    if (!fit.emConverged)
        fit.warnings.push_back("EM stopped at the iteration limit before reaching the tolerance");
    if (fit.psiFloorHits > 0)
        fit.warnings.push_back("EM floored " + std::to_string(fit.psiFloorHits) + " noise variance updates");
    return fit;
}

}  // namespace netfactor
