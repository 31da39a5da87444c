#include "netfactor/adjacency.hpp"
#include "netfactor/eigen_solver.hpp"
#include "netfactor/error.hpp"
#include "netfactor/model.hpp"
#include "netfactor/network_embed.hpp"
#include "netfactor/simulate.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace netfactor;
using namespace testsupport;

namespace {

AdjacencyMatrix random_graph(Index n, double prob, std::uint64_t seed) {
    Rng rng(seed);
    std::bernoulli_distribution edge(prob);
    std::vector<std::pair<Index, Index>> edges;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (edge(rng)) edges.emplace_back(i, j);
    return AdjacencyMatrix::from_edges(n, edges);
}

Matrix block_probability(Index n, int K, double within, double between) {
    Matrix P(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) P(i, j) = (i * K / n == j * K / n) ? within : between;
    return P;
}

}  // namespace

TEST_CASE("adjacency construction drops loops and merges duplicates") {
    AdjacencyMatrix::BuildStats stats;
    const auto A = AdjacencyMatrix::from_edges(4, {{0, 1}, {1, 0}, {2, 2}, {1, 2}, {0, 1}}, &stats);
    CHECK(stats.selfLoopsDropped == 1);
    CHECK(stats.duplicatesMerged == 2);
    CHECK(A.edge_count() == 2);
    CHECK(A.has_edge(1, 0));
    CHECK(A.has_edge(2, 1));
    CHECK_FALSE(A.has_edge(2, 2));
    CHECK(A.degree(1) == 2);
    CHECK(A.degree(3) == 0);
    const Matrix D = A.to_dense();
    CHECK(max_abs(D - D.transpose()) == 0.0);
    CHECK(D.diagonal().isZero());
    CHECK(AdjacencyMatrix::from_dense(D) == A);
    CHECK(A.density() == doctest::Approx(2.0 / 6.0));
    CHECK_THROWS_AS(AdjacencyMatrix::from_edges(3, {{0, 3}}), ParameterError);
}

TEST_CASE("adjacency from dense validates its input") {
    Matrix M = Matrix::Zero(3, 3);
    M(0, 1) = 1.0;
    CHECK_THROWS_AS(AdjacencyMatrix::from_dense(M), ParameterError);
    M(1, 0) = 1.0;
    CHECK_NOTHROW(AdjacencyMatrix::from_dense(M));
    M(2, 2) = 1.0;
    CHECK_THROWS_AS(AdjacencyMatrix::from_dense(M), ParameterError);
    M(2, 2) = 0.0;
    M(0, 2) = M(2, 0) = 0.5;
    CHECK_THROWS_AS(AdjacencyMatrix::from_dense(M), ParameterError);
}

TEST_CASE("sparse multiply matches dense product") {
    const auto A = random_graph(80, 0.1, 5);
    Rng rng(6);
    const Matrix X = standard_normal(80, 3, rng);
    CHECK(max_abs(A.multiply(X) - A.to_dense() * X) < 1e-12);
}

TEST_CASE("lanczos agrees with the dense eigensolver") {
    const auto A = random_graph(300, 0.05, 7);
    const Matrix D = A.to_dense();
    Eigen::SelfAdjointEigenSolver<Matrix> es(D);
    const Vector all = es.eigenvalues();
    EigenOptions opts;
    opts.method = EigenMethod::Lanczos;
    const auto spec = symmetric_spectrum(A, 4, 6, opts);
    for (Index k = 0; k < 4; ++k) CHECK(std::abs(spec.top(k) - all(299 - k)) < 1e-8);
    std::vector<double> mags(all.data(), all.data() + all.size());
    for (auto& v : mags) v = std::abs(v);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    for (Index k = 0; k < 6; ++k) CHECK(std::abs(spec.magnitudes(k) - mags[static_cast<std::size_t>(k)]) < 1e-8);
    for (Index k = 0; k < 4; ++k) {
        const Vector v = spec.topVectors.col(k);
        CHECK(std::abs(v.norm() - 1.0) < 1e-10);
        CHECK((D * v - spec.top(k) * v).norm() < 1e-7);
    }
    EigenOptions dense;
    dense.method = EigenMethod::Dense;
    const auto ref = symmetric_spectrum(A, 4, 6, dense);
    CHECK(max_abs(ref.top - spec.top) < 1e-8);
}

TEST_CASE("spectral embedding of an exact rank-one matrix") {
    Vector v(3);
    v << 0.6, 0.8, 0.0;
    const Matrix P = v * v.transpose();
    const auto emb = spectral_embed(P, 1);
    CHECK(max_abs(emb.X.col(0) - v) < 1e-12);
    const auto flipped = spectral_embed(Matrix(-(-P)), 1);
    CHECK(flipped.X(1, 0) > 0.0);
}

TEST_CASE("spectral embedding rejects degenerate input") {
    CHECK_THROWS_AS(spectral_embed(AdjacencyMatrix(5), 2), NumericError);
    CHECK_THROWS_AS(spectral_embed(Matrix(Matrix::Zero(4, 4)), 1), NumericError);
    // Star graph: one positive eigenvalue only.
    const auto star = AdjacencyMatrix::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK_THROWS_AS(spectral_embed(star, 2), DegeneracyError);
    CHECK_THROWS_AS(spectral_embed(star, 5), ParameterError);
}

TEST_CASE("spectral embedding of a two-block graph tracks the exact decomposition") {
    const Matrix P = block_probability(500, 2, 0.8, 0.2);
    Rng rng(11);
    const auto A = sample_adjacency(P, rng);
    const auto emb = spectral_embed(A, 2);
    Eigen::SelfAdjointEigenSolver<Matrix> es(P);
    const Matrix exact = es.eigenvectors().rightCols(2);
    CHECK(subspace_alignment(emb.X, exact) >= 0.95);
    CHECK(emb.topSingularValues.size() == 4);
}

TEST_CASE("alpha estimate arithmetic") {
    CHECK(estimate_alpha(AdjacencyMatrix(4)).isZero());
    Matrix J = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
    const Vector a = estimate_alpha(AdjacencyMatrix::from_dense(J));
    for (Index i = 0; i < 3; ++i) CHECK(a(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("alpha estimate is linear over disjoint edge sets") {
    const auto A = AdjacencyMatrix::from_edges(6, {{0, 1}, {2, 3}});
    const auto B = AdjacencyMatrix::from_edges(6, {{1, 4}, {3, 5}, {0, 5}});
    const auto AB = AdjacencyMatrix::from_edges(6, {{0, 1}, {2, 3}, {1, 4}, {3, 5}, {0, 5}});
    CHECK(max_abs(estimate_alpha(AB) - estimate_alpha(A) - estimate_alpha(B)) < 1e-15);
}

TEST_CASE("alpha estimate recovers a constant degree parameter") {
    const Index n = 2000;
    const Matrix P = Matrix::Constant(n, n, 0.2);
    Rng rng(12);
    const auto A = sample_adjacency(P, rng);
    CHECK((estimate_alpha(A).array() - 0.1).abs().maxCoeff() <= 0.05);
}

TEST_CASE("ase fit invariants") {
    SimConfig cfg;
    cfg.n = 300;
    cfg.dims = {1, 2, 0};
    cfg.seed = 13;
    const auto ds = generate_dataset(cfg);
    const auto fit = ase_fit(ds.A, 3);
    const double n = 300.0;
    for (Index c = 0; c < 3; ++c) CHECK(std::abs(fit.Zhat12.col(c).sum()) <= 1e-8 * n);
    const Matrix G = fit.Zhat12.transpose() * fit.Zhat12;
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(G(i, j)) <= 1e-8 * G.trace());
    CHECK(G(0, 0) > G(1, 1));
    CHECK(G(1, 1) > G(2, 2));
    CHECK(max_abs(fit.rotation.transpose() * fit.rotation - Matrix::Identity(3, 3)) < 1e-12);
    CHECK(max_abs(centered(fit.Xhat) * fit.rotation - fit.Zhat12) < 1e-12);
    CHECK(fit.topSingularValues.size() == 5);
    for (Index k = 1; k < fit.topSingularValues.size(); ++k)
        CHECK(fit.topSingularValues(k) <= fit.topSingularValues(k - 1));
    CHECK(fit.topSingularValues.minCoeff() >= 0.0);
}

TEST_CASE("ase fit on the exact probability matrix reproduces the latent decomposition") {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        SimConfig cfg;
        cfg.n = 200;
        cfg.dims = {1, 2, 0};
        cfg.seed = seed;
        const auto dcsbm = dcsbm_probability(cfg);
        const auto latent = decompose_probability(dcsbm.P);
        const auto fit = ase_fit(dcsbm.P, 3);
        CHECK(subspace_alignment(fit.Zhat12, latent.Z12) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(max_abs(fit.alphaHat - latent.alpha) < 1e-10);
    }
}

TEST_CASE("ase fit alignment grows with the network size") {
    double previous = 0.0;
    for (Index n : {500, 1000, 2000}) {
        SimConfig cfg;
        cfg.n = n;
        cfg.p = 10;
        cfg.dims = {1, 3, 0};
        cfg.seed = 24;
        const auto ds = generate_dataset(cfg);
        const double align = subspace_alignment(ase_fit(ds.A, 4).Zhat12, ds.truth.Z12());
        CHECK(align > previous);
        previous = align;
    }
    CHECK(previous >= 0.9);
}

TEST_CASE("profile likelihood elbow") {
    Vector scree(6);
    scree << 10, 9.5, 9, 0.1, 0.09, 0.08;
    CHECK(profile_likelihood_elbow(scree) == 3);
    CHECK_THROWS_AS(profile_likelihood_elbow(Vector::Constant(5, 2.0)), SelectionError);
    Vector two(2);
    two << 3.0, 1.0;
    CHECK(profile_likelihood_elbow(two) == 1);

    // Oracle: maximize the explicit two-segment Gaussian log-likelihood.
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        Vector s = standard_normal(12, 1, rng).cwiseAbs();
        std::sort(s.data(), s.data() + s.size(), std::greater<>());
        const Index m = s.size();
        double best = -1e300;
        int arg = 0;
        for (Index q = 1; q < m; ++q) {
            const double m1 = s.head(q).mean();
            const double m2 = s.tail(m - q).mean();
            const double ss = (s.head(q).array() - m1).square().sum() + (s.tail(m - q).array() - m2).square().sum();
            const double var = ss / static_cast<double>(m - 2);
            double ll = 0.0;
            for (Index i = 0; i < m; ++i) {
                const double mu = i < q ? m1 : m2;
                ll += -0.5 * std::log(2.0 * M_PI * var) - 0.5 * (s(i) - mu) * (s(i) - mu) / var;
            }
            if (ll > best + 1e-12) {
                best = ll;
                arg = static_cast<int>(q);
            }
        }
        CHECK(profile_likelihood_elbow(s) == arg);
    }
}

TEST_CASE("dimension selection on a rank-one signal") {
    const Index n = 200;
    Rng rng(32);
    Vector v = Vector::Constant(n, 0.5);
    Matrix S = v * v.transpose();
    Matrix noise = 1e-3 * standard_normal(n, n, rng);
    S += 0.5 * (noise + noise.transpose());
    CHECK(select_embedding_dim(S, 20) == 1);
    CHECK_THROWS_AS(select_embedding_dim(S, 199), ParameterError);
}

TEST_CASE("latent position variance closed forms") {
    NetworkFit fit;
    fit.d = 1;
    fit.Xhat = Matrix(2, 1);
    const double a = 0.6, b = 0.9;
    fit.Xhat << a, b;
    fit.rotation = Matrix::Identity(1, 1);
    const double c = a * b;
    const double expected = c * (1.0 - c) * b * b / ((a * a + b * b) * (a * a + b * b));
    CHECK(latent_position_variance(fit, 0)(0, 0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(alpha_variance(fit, 0) == doctest::Approx(c * (1.0 - c) / 4.0).epsilon(1e-14));

    NetworkFit orth;
    orth.d = 2;
    orth.Xhat = Matrix::Zero(4, 2);
    orth.Xhat(0, 0) = 1.0;
    orth.Xhat(1, 1) = 1.0;
    orth.Xhat(2, 0) = -1.0;
    orth.Xhat(3, 1) = -1.0;
    orth.rotation = Matrix::Identity(2, 2);
    CHECK(latent_position_variance(orth, 0).isZero());
    CHECK(alpha_variance(orth, 0) == 0.0);

    NetworkFit ones;
    ones.d = 1;
    ones.Xhat = Matrix::Ones(5, 1);
    ones.rotation = Matrix::Identity(1, 1);
    CHECK(alpha_variance(ones, 2) == 0.0);
}

TEST_CASE("dense and lanczos embeddings agree" * doctest::test_suite("slow")) {
    SimConfig cfg;
    cfg.n = 600;
    cfg.dims = {1, 2, 0};
    cfg.seed = 41;
    const auto ds = generate_dataset(cfg);
    EigenOptions dense;
    dense.method = EigenMethod::Dense;
    EigenOptions lanczos;
    lanczos.method = EigenMethod::Lanczos;
    const auto a = ase_fit(ds.A, 3, dense);
    const auto b = ase_fit(ds.A, 3, lanczos);
    CHECK(max_abs(a.topSingularValues - b.topSingularValues) < 1e-8);
    CHECK(max_abs(a.Zhat12 - b.Zhat12) < 1e-8);
}

TEST_CASE("scree selection finds three blocks" * doctest::test_suite("slow")) {
    const Matrix P = block_probability(500, 3, 0.8, 0.2);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(1000 + seed);
        const auto A = sample_adjacency(P, rng);
        if (select_embedding_dim(A, 50) == 3) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("latent position and alpha variance plug-ins match Monte Carlo" * doctest::test_suite("slow")) {
    // Fixed latent positions of a two-block model; node 0 is tracked.
    const Index n = 1000;
    const int reps = 200;
    Matrix X(n, 2);
    for (Index i = 0; i < n; ++i) {
        const bool first = i < n / 2;
        X(i, 0) = first ? 0.7 : 0.3;
        X(i, 1) = first ? 0.2 : 0.6;
    }
    const Matrix P = X * X.transpose();
    const Matrix Z = centered(X);
    Matrix dev(reps, 2);
    Vector devAlpha(reps);
    Matrix plugin = Matrix::Zero(2, 2);
    double pluginAlpha = 0.0;
    const Vector alphaTrue = estimate_alpha(P) ;
    for (int r = 0; r < reps; ++r) {
        Rng rng(5000 + r);
        const auto A = sample_adjacency(P, rng);
        const auto fit = ase_fit(A, 2);
        // Map the estimate onto the truth with the least-squares orthogonal alignment.
        Eigen::JacobiSVD<Matrix> svd(fit.Zhat12.transpose() * Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Matrix W = svd.matrixU() * svd.matrixV().transpose();
        const Vector zi = (fit.Zhat12 * W).row(0).transpose();
        dev.row(r) = std::sqrt(static_cast<double>(n)) * (zi - Z.row(0).transpose()).transpose();
        devAlpha(r) = std::sqrt(static_cast<double>(n)) * (fit.alphaHat(0) - alphaTrue(0));
        plugin += static_cast<double>(n) * W.transpose() * latent_position_variance(fit, 0) * W / reps;
        pluginAlpha += static_cast<double>(n) * alpha_variance(fit, 0) / reps;
    }
    const Matrix dc = centered(dev);
    const Matrix empirical = dc.transpose() * dc / (reps - 1);
    const double opDiff = Eigen::JacobiSVD<Matrix>(empirical - plugin).singularValues()(0);
    const double opPlug = Eigen::JacobiSVD<Matrix>(plugin).singularValues()(0);
    CHECK(opDiff <= 0.25 * opPlug);
    const double empAlpha = (devAlpha.array() - devAlpha.mean()).square().sum() / (reps - 1);
    CHECK(std::abs(empAlpha - pluginAlpha) <= 0.3 * pluginAlpha);
}
