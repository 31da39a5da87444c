#include "netfactor/linalg.hpp"

#include "netfactor/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace netfactor::linalg {

SymmetricEigen sorted_symmetric_eigen(const Matrix& S, bool computeVectors) {
    SymmetricEigen out;
    const Index n = S.rows();
    if (n == 0) return out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, computeVectors ? Eigen::ComputeEigenvectors
                                                               : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
    out.values = es.eigenvalues().reverse();
    if (computeVectors) out.vectors = es.eigenvectors().rowwise().reverse();
    return out;
}

bool has_relative_tie(const Vector& descending, double relTol) {
    if (descending.size() < 2) return false;
    const double scale = descending.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    for (Index i = 0; i + 1 < descending.size(); ++i) {
        if (std::abs(descending(i) - descending(i + 1)) <= relTol * scale) return true;
    }
    return false;
}

Vector column_means(const Matrix& X) {
    if (X.rows() == 0) return Vector::Zero(X.cols());
    return X.colwise().mean().transpose();
}

Matrix center_columns(const Matrix& X) {
    if (X.rows() == 0) return X;
    return X.rowwise() - X.colwise().mean();
}

Matrix orthonormal_basis(const Matrix& X, const char* what, double rankTol) {
    if (X.cols() == 0) return Matrix(X.rows(), 0);
    if (X.cols() > X.rows())
        throw DegeneracyError(std::string(what) + ": more columns than rows");
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    qr.setThreshold(rankTol);
    if (qr.rank() < X.cols())
        throw DegeneracyError(std::string(what) + ": column rank " + std::to_string(qr.rank()) +
                              " < " + std::to_string(X.cols()));
    Matrix Q = qr.householderQ() * Matrix::Identity(X.rows(), X.cols());
    return Q;
}

Matrix project_out(const Matrix& X, const Matrix& Q) {
    if (Q.cols() == 0) return X;
    return X - Q * (Q.transpose() * X);
}

Vector fix_first_nonzero_signs(Matrix& Z, Matrix* partner) {
    Vector signs = Vector::Ones(Z.cols());
    for (Index c = 0; c < Z.cols(); ++c) {
        const double colMax = Z.col(c).cwiseAbs().maxCoeff();
        if (colMax == 0.0) continue;
        const double threshold = 1e-12 * colMax;
        for (Index r = 0; r < Z.rows(); ++r) {
            if (std::abs(Z(r, c)) > threshold) {
                if (Z(r, c) < 0) signs(c) = -1.0;
                break;
            }
        }
        if (signs(c) < 0) {
            Z.col(c) *= -1.0;
            if (partner != nullptr && partner->cols() > c) partner->col(c) *= -1.0;
        }
    }
    return signs;
}

Vector fix_largest_entry_signs(Matrix& X) {
    Vector signs = Vector::Ones(X.cols());
    for (Index c = 0; c < X.cols(); ++c) {
        Index best = 0;
        double bestAbs = -1.0;
        for (Index r = 0; r < X.rows(); ++r) {
            // strict comparison keeps the first entry among equal magnitudes
            if (std::abs(X(r, c)) > bestAbs) {
                bestAbs = std::abs(X(r, c));
                best = r;
            }
        }
        if (X.rows() > 0 && X(best, c) < 0) {
            signs(c) = -1.0;
            X.col(c) *= -1.0;
        }
    }
    return signs;
}

double max_abs(const Matrix& X) {
    return X.size() == 0 ? 0.0 : X.cwiseAbs().maxCoeff();
}

Matrix spd_inverse(const Matrix& G, const char* what) {
    const Index k = G.rows();
    if (k == 0) return Matrix(0, 0);
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14))
        throw DegeneracyError(std::string(what) + ": Gram matrix is singular");
    return llt.solve(Matrix::Identity(k, k));
}

}  // namespace netfactor::linalg
