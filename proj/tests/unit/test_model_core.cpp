#include "netfactor/error.hpp"
#include "netfactor/model.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace netfactor;
using namespace testsupport;

namespace {

Matrix mean_structure(const ModelParams& m) {
    Matrix out = Matrix::Zero(m.n(), m.p());
    out.rowwise() += m.mu.transpose();
    if (m.Lambda().cols() > 0) out += m.Z23() * m.Lambda().transpose();
    return out;
}

Matrix centered_signal(const ModelParams& m) {
    if (m.Lambda().cols() == 0) return Matrix::Zero(m.n(), m.p());
    return centered(m.Z23()) * m.Lambda().transpose();
}

}  // namespace

TEST_CASE("probability matrix of zero parameters is zero") {
    ModelParams m = random_params(6, 4, {1, 1, 0}, 3);
    m.alpha.setZero();
    m.Z1.setZero();
    m.Z2.setZero();
    CHECK(max_abs(model_probability_matrix(m)) == 0.0);
}

TEST_CASE("probability matrix two-node arithmetic") {
    ModelParams m;
    m.alpha = Vector(2);
    m.alpha << 0.1, 0.2;
    m.Z1 = Matrix(2, 1);
    m.Z1 << 0.3, 1.0;
    m.Z2 = Matrix(2, 0);
    m.Z3 = Matrix(2, 0);
    const Matrix P = model_probability_matrix(m);
    CHECK(P(0, 1) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(P(1, 0) == P(0, 1));
    CHECK(P(0, 0) == doctest::Approx(0.2 + 0.09));
}

TEST_CASE("probability matrix minus degree terms is PSD and exactly symmetric") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ModelParams m = random_params(40, 10, {2, 1, 1}, seed);
        const Matrix P = model_probability_matrix(m);
        CHECK(max_abs(P - P.transpose()) == 0.0);
        Matrix G = P;
        G.rowwise() -= m.alpha.transpose();
        G.colwise() -= m.alpha;
        CHECK(min_eigenvalue(G) >= -1e-10);
    }
}

TEST_CASE("probability matrix rejects mismatched shapes") {
    ModelParams m = random_params(6, 4, {1, 1, 0}, 3);
    m.Z1 = Matrix::Zero(5, 1);
    CHECK_THROWS_AS(model_probability_matrix(m), ParameterError);
}

TEST_CASE("covariance reduces to diag(Psi) without loadings") {
    ModelParams m = random_params(30, 8, {1, 2, 1}, 9);
    m.Lambda2.setZero();
    m.Lambda3.setZero();
    Matrix expected = m.Psi.asDiagonal();
    CHECK(max_abs(model_covariance(m) - expected) == 0.0);

    ModelParams none = random_params(30, 8, {2, 0, 0}, 9);
    expected = none.Psi.asDiagonal();
    CHECK(max_abs(model_covariance(none) - expected) == 0.0);
}

TEST_CASE("covariance matches direct formula and is PSD") {
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        const ModelParams m = random_params(50, 12, {1, 2, 2}, seed);
        const Matrix Zc = centered(m.Z23());
        const Matrix oracle = m.Lambda() * (Zc.transpose() * Zc / 50.0) * m.Lambda().transpose() +
                              Matrix(m.Psi.asDiagonal());
        const Matrix S = model_covariance(m);
        CHECK(max_abs(S - oracle) < 1e-12);
        CHECK(max_abs(S - S.transpose()) == 0.0);
        CHECK(min_eigenvalue(S - Matrix(m.Psi.asDiagonal())) >= -1e-10);
        for (Index j = 0; j < 12; ++j) CHECK(S(j, j) >= m.Psi(j));
    }
}

TEST_CASE("identifiability: constraints, equivalence and idempotence") {
    const IdentifiabilityScheme schemes[] = {IdentifiabilityScheme::Cor1_1, IdentifiabilityScheme::Cor1_3};
    for (auto scheme : schemes) {
        for (std::uint64_t seed = 20; seed < 26; ++seed) {
            CAPTURE(to_string(scheme));
            CAPTURE(seed);
            const ModelParams in = random_params(60, 15, {1, 2, 2}, seed);
            const ModelParams out = apply_identifiability(in, scheme);
            CHECK(identifiability_residuals(out, scheme).max() < 1e-10);
            CHECK(max_abs(model_probability_matrix(out) - model_probability_matrix(in)) < 1e-10);
            CHECK(max_abs(model_covariance(out) - model_covariance(in)) < 1e-10);
            CHECK(max_abs(mean_structure(out) - mean_structure(in)) < 1e-10);
            CHECK(max_abs(centered_signal(out) - centered_signal(in)) < 1e-10);
            const ModelParams twice = apply_identifiability(out, scheme);
            CHECK(max_abs(twice.Z12() - out.Z12()) < 1e-10);
            CHECK(max_abs(twice.Z3 - out.Z3) < 1e-10);
            CHECK(max_abs(twice.Lambda() - out.Lambda()) < 1e-10);
            CHECK(max_abs(twice.alpha - out.alpha) < 1e-10);
            CHECK(max_abs(twice.mu - out.mu) < 1e-10);
        }
    }
}

TEST_CASE("identifiability COR1_1 off-diagonals and cross products vanish") {
    const ModelParams out = apply_identifiability(random_params(80, 20, {2, 2, 1}, 31));
    const Matrix H = out.Lambda2.transpose() * out.Psi.cwiseInverse().asDiagonal() * out.Lambda2 / 20.0;
    CHECK(std::abs(H(0, 1)) < 1e-10);
    CHECK(max_abs(out.Z12().transpose() * out.Z3) < 1e-10);
    for (const Matrix* Z : {&out.Z1, &out.Z2, &out.Z3})
        for (Index c = 0; c < Z->cols(); ++c) CHECK(std::abs(Z->col(c).sum()) < 1e-10 * 80);
}

TEST_CASE("identifiability COR1_2 on orthogonal factors") {
    Rng rng(41);
    const Index n = 70;
    Matrix raw = centered(standard_normal(n, 4, rng));
    Eigen::HouseholderQR<Matrix> qr(raw);
    Matrix Q = qr.householderQ() * Matrix::Identity(n, 4);
    Q = centered(Q);
    ModelParams m;
    m.Z1 = Q.col(0) * 3.0;
    m.Z2 = Q.col(1) * 2.0;
    m.Z3 = Matrix(n, 2);
    m.Z3 << Q.col(2) * 1.5, Q.col(3) * 1.1;
    m.mu = standard_normal(10, 1, rng);
    m.Lambda2 = standard_normal(10, 1, rng);
    m.Lambda3 = standard_normal(10, 2, rng);
    m.Psi = Vector::Constant(10, 0.7);
    m.alpha = Vector::Constant(n, 0.2);
    const ModelParams out = apply_identifiability(m, IdentifiabilityScheme::Cor1_2);
    CHECK(identifiability_residuals(out, IdentifiabilityScheme::Cor1_2).max() < 1e-10);
    CHECK(max_abs(model_probability_matrix(out) - model_probability_matrix(m)) < 1e-10);
    CHECK(max_abs(centered_signal(out) - centered_signal(m)) < 1e-10);
    const ModelParams twice = apply_identifiability(out, IdentifiabilityScheme::Cor1_2);
    CHECK(max_abs(twice.Z3 - out.Z3) < 1e-10);
    CHECK(max_abs(twice.Lambda3 - out.Lambda3) < 1e-10);
}

TEST_CASE("identifiability fixed point") {
    const ModelParams once = apply_identifiability(random_params(50, 12, {1, 1, 1}, 51));
    const ModelParams again = apply_identifiability(once);
    CHECK(max_abs(again.Z1 - once.Z1) < 1e-12);
    CHECK(max_abs(again.Z2 - once.Z2) < 1e-12);
    CHECK(max_abs(again.Z3 - once.Z3) < 1e-12);
    CHECK(max_abs(again.Lambda2 - once.Lambda2) < 1e-12);
    CHECK(max_abs(again.Lambda3 - once.Lambda3) < 1e-12);
}

TEST_CASE("identifiability failure modes") {
    SUBCASE("rank-deficient Z12") {
        ModelParams m = random_params(30, 6, {1, 1, 0}, 61);
        m.Z2 = 2.0 * m.Z1;
        CHECK_THROWS_AS(apply_identifiability(m), DegeneracyError);
    }
    SUBCASE("tied loading Gram under COR1_1") {
        ModelParams m = random_params(30, 4, {0, 2, 0}, 62);
        m.Psi.setOnes();
        m.Lambda2 = Matrix::Zero(4, 2);
        m.Lambda2(0, 0) = 1.0;
        m.Lambda2(1, 1) = 1.0;
        CHECK_THROWS_AS(apply_identifiability(m), TieError);
    }
    SUBCASE("Z3 leaking into the network-only block") {
        ModelParams m = random_params(30, 6, {1, 1, 1}, 63);
        m.Z3 = m.Z1 + 0.1 * m.Z2;
        CHECK_THROWS_AS(apply_identifiability(m), DegeneracyError);
    }
    SUBCASE("dimension mismatch") {
        ModelParams m = random_params(30, 6, {1, 1, 1}, 64);
        m.Lambda3 = Matrix::Zero(5, 1);
        CHECK_THROWS_AS(apply_identifiability(m), ParameterError);
    }
}

TEST_CASE("subspace alignment basic values") {
    Rng rng(71);
    const Matrix X = standard_normal(40, 3, rng);
    CHECK(subspace_alignment(X, X) == doctest::Approx(1.0).epsilon(1e-14));

    Matrix E = Matrix::Zero(40, 2);
    E(0, 0) = 1.0;
    E(1, 1) = 1.0;
    Matrix F = Matrix::Zero(40, 1);
    F(5, 0) = 2.0;
    CHECK(subspace_alignment(E, F) == 0.0);

    CHECK_THROWS_AS(subspace_alignment(Matrix::Zero(40, 1), X), DegeneracyError);
    Matrix rankDef(40, 2);
    rankDef << X.col(0), 3.0 * X.col(0);
    CHECK_THROWS_AS(subspace_alignment(rankDef, X), DegeneracyError);
}

TEST_CASE("subspace alignment matches the pseudo-inverse projector and is invariant") {
    Rng rng(72);
    for (int rep = 0; rep < 5; ++rep) {
        const Matrix Xhat = standard_normal(60, 3, rng);
        const Matrix X = standard_normal(60, 2, rng);
        const double oracle = (X.transpose() * svd_projector(Xhat) * X).trace() / (X.transpose() * X).trace();
        const double value = subspace_alignment(Xhat, X);
        CHECK(value == doctest::Approx(oracle).epsilon(1e-12));

        const Matrix G = standard_normal(3, 3, rng) + 3.0 * Matrix::Identity(3, 3);
        CHECK(std::abs(subspace_alignment(Xhat * G, X) - value) < 1e-12);

        const double angle = 0.7;
        Matrix R(2, 2);
        R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
        CHECK(std::abs(subspace_alignment(Xhat, X * R) - value) < 1e-12);
    }
}

TEST_CASE("factor dims validation") {
    CHECK_THROWS_AS((FactorDims{-1, 0, 0}).validate(), ParameterError);
    CHECK_THROWS_AS((FactorDims{0, 0, 2}).validate(true), ParameterError);
    CHECK_NOTHROW((FactorDims{0, 0, 2}).validate());
    CHECK((FactorDims{1, 3, 1}).d() == 4);
    CHECK((FactorDims{1, 3, 1}).k() == 5);
}
