#include "netfactor/network_embed.hpp"

#include "netfactor/error.hpp"
#include "netfactor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netfactor {

namespace {

void check_dim(Index n, int d) {
    if (d < 1 || d > n - 1)
        throw ParameterError("embedding dimension must satisfy 1 <= d <= n - 1, got d=" + std::to_string(d) +
                             " for n=" + std::to_string(n));
}

Embedding embed_from_spectrum(const PartialSpectrum& spec, int d) {
    Embedding out;
    const double radius = spec.magnitudes.size() > 0 ? spec.magnitudes(0) : 0.0;
    if (!(radius > 0.0)) throw NumericError("spectral_embed: matrix has no nonzero eigenvalue");
    for (int c = 0; c < d; ++c) {
        if (!(spec.top(c) > 1e-12 * radius))
            throw DegeneracyError("spectral_embed: only " + std::to_string(c) + " positive eigenvalues, need d=" +
                                  std::to_string(d));
    }
    out.eigenvalues = spec.top;
    out.topSingularValues = spec.magnitudes;
    out.X = spec.topVectors * spec.top.cwiseSqrt().asDiagonal();
    linalg::fix_largest_entry_signs(out.X);
    if (spec.magnitudes.size() > d &&
        std::abs(spec.magnitudes(d - 1) - spec.magnitudes(d)) <= 1e-10 * std::max(1.0, radius))
        out.warnings.push_back("spectral gap: singular values " + std::to_string(d) + " and " +
                               std::to_string(d + 1) + " coincide within 1e-10");
    return out;
}

template <class Input>
Embedding embed_impl(const Input& S, Index n, int d, const EigenOptions& opts) {
    check_dim(n, d);
    const Index extra = std::min<Index>(n, d + 2);
    return embed_from_spectrum(symmetric_spectrum(S, d, extra, opts), d);
}

NetworkFit fit_from_embedding(Embedding emb, Vector alphaHat, int d) {
    NetworkFit fit;
    fit.d = d;
    fit.Xhat = std::move(emb.X);
    fit.alphaHat = std::move(alphaHat);
    fit.topSingularValues = std::move(emb.topSingularValues);
    fit.warnings = std::move(emb.warnings);
    const Matrix centered = linalg::center_columns(fit.Xhat);
    const auto eig = linalg::sorted_symmetric_eigen(centered.transpose() * centered);
    if (d > 1 && linalg::has_relative_tie(eig.values, 1e-8))
        fit.warnings.push_back("centered embedding Gram has tied eigenvalues; rotation is not unique");
    fit.rotation = eig.vectors;
    fit.Zhat12 = centered * fit.rotation;
    const Vector signs = linalg::fix_first_nonzero_signs(fit.Zhat12);
    fit.rotation = fit.rotation * signs.asDiagonal();
    return fit;
}

// Clamped inner products of row i of X with every row.
Vector clamped_products(const Matrix& X, Index i) {
    return (X * X.row(i).transpose()).cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

Embedding spectral_embed(const AdjacencyMatrix& A, int d, const EigenOptions& opts) {
    return embed_impl(A, A.n(), d, opts);
}

Embedding spectral_embed(const Matrix& S, int d, const EigenOptions& opts) {
    if (S.rows() != S.cols()) throw ParameterError("spectral_embed: matrix is not square");
    return embed_impl(S, S.rows(), d, opts);
}

Vector estimate_alpha(const AdjacencyMatrix& A) {
    const Index n = A.n();
    if (n < 2) throw ParameterError("estimate_alpha: needs n >= 2");
    const Vector deg = A.degrees();
    return (deg.array() - 0.5 * deg.mean()) / static_cast<double>(n);
}

Vector estimate_alpha(const Matrix& S) {
    if (S.rows() != S.cols()) throw ParameterError("estimate_alpha: matrix is not square");
    const Index n = S.rows();
    if (n < 2) throw ParameterError("estimate_alpha: needs n >= 2");
    const Vector rowSums = S.rowwise().sum();
    return (rowSums.array() - 0.5 * rowSums.mean()) / static_cast<double>(n);
}

NetworkFit ase_fit(const AdjacencyMatrix& A, int d, const EigenOptions& opts) {
    return fit_from_embedding(spectral_embed(A, d, opts), estimate_alpha(A), d);
}

NetworkFit ase_fit(const Matrix& S, int d, const EigenOptions& opts) {
    return fit_from_embedding(spectral_embed(S, d, opts), estimate_alpha(S), d);
}

int profile_likelihood_elbow(const Vector& scree) {
    const Index m = scree.size();
    if (m < 2) throw SelectionError("profile likelihood elbow needs at least two values");
    const double scale = std::max(1.0, scree.cwiseAbs().maxCoeff());
    if (scree.maxCoeff() - scree.minCoeff() <= 1e-12 * scale)
        throw SelectionError("all singular values are equal; no elbow");
    if (m == 2) return 1;

    int best = 1;
    double bestLik = -std::numeric_limits<double>::infinity();
    for (Index q = 1; q < m; ++q) {
        const auto left = scree.head(q);
        const auto right = scree.tail(m - q);
        const double mu1 = left.mean();
        const double mu2 = right.mean();
        const double ss = (left.array() - mu1).square().sum() + (right.array() - mu2).square().sum();
        const double var = ss / static_cast<double>(m - 2);
        if (var <= 0.0) return static_cast<int>(q);
        // Profile log-likelihood up to constants; the residual sum of squares
        // term equals (m - 2) for every split.
        const double lik = -0.5 * static_cast<double>(m) * std::log(var) - 0.5 * ss / var;
        if (lik > bestLik) {
            bestLik = lik;
            best = static_cast<int>(q);
        }
    }
    return best;
}

namespace {

template <class Input>
int select_impl(const Input& S, Index n, int dmax, const EigenOptions& opts) {
    if (dmax < 1 || dmax > n - 2)
        throw ParameterError("select_embedding_dim: dmax must lie in [1, n - 2], got " + std::to_string(dmax));
    const Index m = std::max<Index>(2, std::min<Index>(dmax + 1, n / 2));
    const auto spec = symmetric_spectrum(S, 0, m, opts);
    return profile_likelihood_elbow(spec.magnitudes);
}

}  // namespace

int select_embedding_dim(const AdjacencyMatrix& A, int dmax, const EigenOptions& opts) {
    return select_impl(A, A.n(), dmax, opts);
}

int select_embedding_dim(const Matrix& S, int dmax, const EigenOptions& opts) {
    if (S.rows() != S.cols()) throw ParameterError("select_embedding_dim: matrix is not square");
    return select_impl(S, S.rows(), dmax, opts);
}

Matrix latent_position_variance(const NetworkFit& fit, Index i) {
    const Index n = fit.Xhat.rows();
    if (i < 0 || i >= n) throw ParameterError("latent_position_variance: node index out of range");
    const double nd = static_cast<double>(n);
    const Matrix Minv = linalg::spd_inverse(fit.Xhat.transpose() * fit.Xhat / nd, "latent_position_variance");
    Vector w = clamped_products(fit.Xhat, i);
    w = w.array() * (1.0 - w.array());
    w(i) = 0.0;
    const Matrix Q = fit.Xhat.transpose() * w.asDiagonal() * fit.Xhat / nd;
    const Matrix V = Minv * Q * Minv / nd;
    return fit.rotation.transpose() * V * fit.rotation;
}

double alpha_variance(const NetworkFit& fit, Index i) {
    const Index n = fit.Xhat.rows();
    if (i < 0 || i >= n) throw ParameterError("alpha_variance: node index out of range");
    const Vector c = clamped_products(fit.Xhat, i);
    double q = 0.0;
    for (Index j = 0; j < n; ++j)
        if (j != i) q += c(j) * (1.0 - c(j));
    return q / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace netfactor
