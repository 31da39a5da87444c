#include "netfactor/eigen_solver.hpp"

#include "netfactor/error.hpp"
#include "netfactor/linalg.hpp"
#include "netfactor/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace netfactor {

namespace {

void check_counts(Index n, Index nTop, Index nMagnitude) {
    if (nTop < 0 || nMagnitude < 0 || nTop > n || nMagnitude > n)
        throw ParameterError("eigensolver: requested " + std::to_string(std::max(nTop, nMagnitude)) +
                             " eigenvalues of a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
}

Vector top_magnitudes(const Vector& descending, Index count) {
    std::vector<double> mags(static_cast<std::size_t>(descending.size()));
    for (Index i = 0; i < descending.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(descending(i));
    std::sort(mags.begin(), mags.end(), std::greater<>());
    Vector out(count);
    for (Index i = 0; i < count; ++i) out(i) = mags[static_cast<std::size_t>(i)];
    return out;
}

// Orthogonalizes w against the first m columns of V twice (classical
// Gram-Schmidt with reorthogonalization).
void reorthogonalize(const Matrix& V, Index m, Vector& w) {
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= V.leftCols(m) * (V.leftCols(m).transpose() * w);
}

}  // namespace

PartialSpectrum dense_spectrum(const Matrix& S, Index nTop, Index nMagnitude) {
    if (S.rows() != S.cols()) throw ParameterError("eigensolver: matrix is not square");
    check_counts(S.rows(), nTop, nMagnitude);
    const auto eig = linalg::sorted_symmetric_eigen(S, nTop > 0);
    PartialSpectrum out;
    out.top = eig.values.head(nTop);
    if (nTop > 0) out.topVectors = eig.vectors.leftCols(nTop);
    out.magnitudes = top_magnitudes(eig.values, nMagnitude);
    return out;
}

PartialSpectrum lanczos_spectrum(const SymmetricOperator& op, Index n, Index nTop, Index nMagnitude,
                                 const EigenOptions& opts) {
    check_counts(n, nTop, nMagnitude);
    PartialSpectrum out;
    if (n == 0) return out;
    const Index cap = std::min(n, opts.maxBasis > 0 ? opts.maxBasis : n);
    const Index want = std::max(nTop, nMagnitude);
    Index target = std::min(cap, std::max<Index>(2 * want + 30, 60));

    Rng rng = make_rng(opts.seed, stream::kLanczos, 0);
    Matrix V(n, cap);
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[i] couples v_i and v_{i+1}
    Vector v = standard_normal(n, 1, rng);
    v.normalize();
    V.col(0) = v;
    Index m = 0;
    double betaLast = 0.0;

    while (true) {
        while (m < target) {
            Vector w = op(V.col(m));
            const double a = V.col(m).dot(w);
            alpha.push_back(a);
            reorthogonalize(V, m + 1, w);
            double b = w.norm();
            ++m;
            if (m == cap) {
                betaLast = b;
                break;
            }
            // An invariant subspace was found; continue from a fresh direction.
            int restarts = 0;
            while (b <= 1e-12 * std::max(1.0, std::abs(a))) {
                if (++restarts > 10) throw NumericError("Lanczos: failed to extend Krylov basis");
                w = standard_normal(n, 1, rng);
                reorthogonalize(V, m, w);
                const double nw = w.norm();
                if (nw > 1e-8) {
                    w /= nw;
                    b = 0.0;
                    break;
                }
            }
            beta.push_back(b);
            V.col(m) = b > 0.0 ? Vector(w / b) : w;
            betaLast = b;
        }

        Matrix T = Matrix::Zero(m, m);
        for (Index i = 0; i < m; ++i) T(i, i) = alpha[static_cast<std::size_t>(i)];
        for (Index i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Matrix> es(T);
        if (es.info() != Eigen::Success) throw NumericError("Lanczos: tridiagonal eigensolver failed");
        const Vector theta = es.eigenvalues();  // ascending
        const Matrix& S = es.eigenvectors();
        const double radius = std::max(std::abs(theta(0)), std::abs(theta(m - 1)));

        // Requested Ritz values sit at both ends of the spectrum.
        const Index fromTop = std::min(m, want);
        const Index fromBottom = std::min(m, nMagnitude);
        bool converged = true;
        const double resTol = opts.tol * std::max(radius, 1e-300);
        if (m < n) {
            // A restart on the last step leaves the newest direction outside T.
            converged = betaLast > 0.0;
            for (Index i = 0; i < fromTop && converged; ++i)
                converged = std::abs(betaLast * S(m - 1, m - 1 - i)) <= resTol;
            for (Index i = 0; i < fromBottom && converged; ++i)
                converged = std::abs(betaLast * S(m - 1, i)) <= resTol;
        }
        if (converged || m >= cap) {
            if (!converged)
                throw NumericError("Lanczos: Ritz pairs did not converge within a basis of " + std::to_string(m));
            Vector desc = theta.reverse();
            out.top = desc.head(nTop);
            if (nTop > 0) out.topVectors = V.leftCols(m) * S.rightCols(nTop).rowwise().reverse();
            for (Index c = 0; c < out.topVectors.cols(); ++c) out.topVectors.col(c).normalize();
            // Magnitudes need candidates from both ends.
            Vector ends(fromTop + fromBottom);
            ends << desc.head(fromTop), theta.head(fromBottom);
            out.magnitudes = top_magnitudes(ends, nMagnitude);
            out.lanczosSteps = static_cast<int>(m);
            return out;
        }
        target = std::min(cap, target + std::max<Index>(target / 2, 20));
    }
}

PartialSpectrum symmetric_spectrum(const Matrix& S, Index nTop, Index nMagnitude, const EigenOptions& opts) {
    const bool dense = opts.method == EigenMethod::Dense ||
                       (opts.method == EigenMethod::Auto && S.rows() <= opts.denseLimit);
    if (dense) return dense_spectrum(S, nTop, nMagnitude);
    return lanczos_spectrum([&S](const Matrix& x) { return Matrix(S * x); }, S.rows(), nTop, nMagnitude, opts);
}

PartialSpectrum symmetric_spectrum(const AdjacencyMatrix& A, Index nTop, Index nMagnitude,
                                   const EigenOptions& opts) {
    const bool dense = opts.method == EigenMethod::Dense ||
                       (opts.method == EigenMethod::Auto && A.n() <= opts.denseLimit);
    if (dense) return dense_spectrum(A.to_dense(), nTop, nMagnitude);
    return lanczos_spectrum([&A](const Matrix& x) { return A.multiply(x); }, A.n(), nTop, nMagnitude, opts);
}

}  // namespace netfactor
