#include "netfactor/error.hpp"
#include "netfactor/factor_fit.hpp"

#include <cmath>

namespace netfactor {

double varimax_criterion(const Matrix& Lambda) {
    const double p = static_cast<double>(Lambda.rows());
    if (Lambda.rows() == 0) return 0.0;
    double total = 0.0;
    for (Index c = 0; c < Lambda.cols(); ++c) {
        const auto sq = Lambda.col(c).array().square();
        const double mean = sq.sum() / p;
        total += sq.square().sum() / p - mean * mean;
    }
    return total;
}

VarimaxResult varimax_rotate(const Matrix& Lambda, const Matrix& Z) {
    const Index q = Lambda.cols();
    if (q < 1) throw ParameterError("varimax_rotate: needs at least one column");
    if (Z.cols() != q) throw ParameterError("varimax_rotate: Lambda and Z differ in width");
    const double p = static_cast<double>(Lambda.rows());

    VarimaxResult out;
    out.Lambda = Lambda;
    out.rotation = Matrix::Identity(q, q);
    constexpr int kMaxSweeps = 1000;
    constexpr double kAngleTol = 1e-12;
    bool converged = q == 1;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        double largest = 0.0;
        for (Index a = 0; a + 1 < q; ++a) {
            for (Index b = a + 1; b < q; ++b) {
                const auto x = out.Lambda.col(a).array();
                const auto y = out.Lambda.col(b).array();
                const Eigen::ArrayXd u = x.square() - y.square();
                const Eigen::ArrayXd v = 2.0 * x * y;
                const double A = u.sum();
                const double B = v.sum();
                const double C = (u.square() - v.square()).sum();
                const double D = 2.0 * (u * v).sum();
                const double angle = 0.25 * std::atan2(D - 2.0 * A * B / p, C - (A * A - B * B) / p);
                if (std::abs(angle) < kAngleTol) continue;
                largest = std::max(largest, std::abs(angle));
                const double c = std::cos(angle);
                const double s = std::sin(angle);
                const Vector la = out.Lambda.col(a);
                out.Lambda.col(a) = c * la + s * out.Lambda.col(b);
                out.Lambda.col(b) = -s * la + c * out.Lambda.col(b);
                const Vector ra = out.rotation.col(a);
                out.rotation.col(a) = c * ra + s * out.rotation.col(b);
                out.rotation.col(b) = -s * ra + c * out.rotation.col(b);
            }
        }
        out.sweeps = sweep + 1;
        converged = largest < 1e-10;
    }
    if (!converged) throw NumericError("varimax did not converge within 1000 sweeps");
    out.Lambda = Lambda * out.rotation;
    out.Z = Z * out.rotation;
    return out;
}

}  // namespace netfactor
