#include "netfactor/error.hpp"
#include "netfactor/model.hpp"
#include "netfactor/network_embed.hpp"
#include "netfactor/simulate.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace netfactor;
using namespace testsupport;

namespace {

SimConfig small_config(std::uint64_t seed, FactorDims dims = {1, 2, 1}) {
    SimConfig cfg;
    cfg.n = 120;
    cfg.p = 60;
    cfg.dims = dims;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("single block without degree heterogeneity") {
    SimConfig cfg;
    cfg.n = 10;
    cfg.dims = {1, 0, 0};
    cfg.degreeLow = cfg.degreeHigh = 1.0;
    for (double rho : {0.25, 1.0}) {
        cfg.rho = rho;
        const auto m = dcsbm_probability(cfg);
        CHECK(max_abs(m.P - Matrix::Constant(10, 10, 0.8 * rho)) < 1e-15);
    }
}

TEST_CASE("dcsbm structure") {
    SimConfig cfg;
    cfg.n = 103;
    cfg.dims = {1, 3, 0};
    const auto m = dcsbm_probability(cfg);
    CHECK(max_abs(m.P - m.P.transpose()) == 0.0);
    CHECK(min_eigenvalue(m.P) >= -1e-10);
    CHECK(m.P.minCoeff() >= 0.0);
    CHECK(m.P.maxCoeff() <= 1.0);
    std::vector<int> sizes(4, 0);
    for (int b : m.membership) ++sizes[static_cast<std::size_t>(b)];
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    CHECK((m.c.array() >= 0.2).all());
    CHECK((m.c.array() <= 1.0).all());
    // Rebuild P = rho C W B W' C from its factors.
    Matrix W = Matrix::Zero(103, 4);
    for (Index i = 0; i < 103; ++i) W(i, m.membership[static_cast<std::size_t>(i)]) = 1.0;
    const Matrix rebuilt = m.c.asDiagonal() * W * m.B * W.transpose() * m.c.asDiagonal();
    CHECK(max_abs(rebuilt - m.P) < 1e-15);

    for (std::uint64_t seed = 1; seed < 6; ++seed) {
        SimConfig c2 = cfg;
        c2.seed = seed;
        c2.betweenProb = 0.05 * static_cast<double>(seed);
        CHECK(min_eigenvalue(dcsbm_probability(c2).P) >= -1e-10);
    }
}

TEST_CASE("sampled network density") {
    SimConfig cfg;
    cfg.n = 500;
    cfg.p = 10;
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.seed = seed;
        total += generate_dataset(cfg).A.density();
    }
    const double mean = total / 5.0;
    CHECK(mean > 0.04);
    CHECK(mean < 0.07);
}

TEST_CASE("probability decomposition round trip") {
    for (std::uint64_t seed = 1; seed < 8; ++seed) {
        SimConfig cfg;
        cfg.n = 90 + static_cast<Index>(seed);
        cfg.dims = {static_cast<int>(seed % 3), 2, 0};
        cfg.seed = seed;
        const Matrix P = dcsbm_probability(cfg).P;
        const auto dec = decompose_probability(P);
        CHECK(dec.Z12.cols() == cfg.dims.d());
        Matrix rebuilt = dec.alpha * Vector::Ones(P.rows()).transpose() + Vector::Ones(P.rows()) * dec.alpha.transpose() +
                         dec.Z12 * dec.Z12.transpose();
        CHECK(max_abs(rebuilt - P) <= 1e-10);
        CHECK(max_abs(dec.Z12.colwise().sum()) <= 1e-10);
        const Matrix G = dec.Z12.transpose() * dec.Z12;
        for (Index a = 0; a < G.rows(); ++a) {
            if (a > 0) CHECK(G(a, a) < G(a - 1, a - 1));
            for (Index b = 0; b < G.cols(); ++b)
                if (a != b) CHECK(std::abs(G(a, b)) <= 1e-10 * G(0, 0));
        }
        // alpha = n^-1 (I - 11'/(2n)) P 1.
        const double n = static_cast<double>(P.rows());
        const Vector rowSums = P.rowwise().sum();
        CHECK(max_abs(dec.alpha - (rowSums.array() - rowSums.sum() / (2.0 * n)).matrix() / n) < 1e-14);
        const auto net = ase_fit(P, cfg.dims.d());
        CHECK(subspace_alignment(net.Zhat12, dec.Z12) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("decomposition is the identity on canonical latent positions") {
    SimConfig cfg = small_config(9, {1, 2, 0});
    const auto dec = decompose_probability(dcsbm_probability(cfg).P);
    ModelParams m;
    m.alpha = dec.alpha;
    m.Z1 = dec.Z12.leftCols(1);
    m.Z2 = dec.Z12.rightCols(2);
    m.Lambda2 = Matrix::Zero(3, 2);
    m.Lambda3 = Matrix::Zero(3, 0);
    m.Z3 = Matrix::Zero(cfg.n, 0);
    m.Psi = Vector::Ones(3);
    m.mu = Vector::Zero(3);
    const auto again = decompose_probability(model_probability_matrix(m));
    CHECK(max_abs(again.alpha - dec.alpha) <= 1e-10);
    CHECK(max_abs(again.Z12 - dec.Z12) <= 1e-10);
}

TEST_CASE("decomposition rejects invalid matrices") {
    Matrix P = Matrix::Identity(4, 4);
    P(0, 0) = -1.0;
    CHECK_THROWS_AS(decompose_probability(P), DecompositionError);
    Matrix asym = Matrix::Zero(3, 3);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(decompose_probability(asym), ParameterError);
    CHECK_THROWS_AS(decompose_probability(Matrix::Zero(3, 2)), ParameterError);
}

TEST_CASE("generated truth is valid and canonical") {
    for (std::uint64_t seed = 1; seed < 6; ++seed) {
        const auto ds = generate_dataset(small_config(seed));
        CHECK_NOTHROW(ds.truth.validate());
        CHECK(valid_for_sampling(ds.truth));
        CHECK((ds.truth.Psi.array() > 0.0).all());
        const Matrix Z = [&] {
            Matrix out(ds.truth.Z1.rows(), ds.truth.Z1.cols() + ds.truth.Z2.cols() + ds.truth.Z3.cols());
            out << ds.truth.Z1, ds.truth.Z2, ds.truth.Z3;
            return out;
        }();
        CHECK(max_abs(Z.colwise().sum()) <= 1e-10 * 120);
        CHECK(identifiability_residuals(ds.truth, IdentifiabilityScheme::Cor1_1).max() <= 1e-8);
        CHECK(max_abs(model_probability_matrix(ds.truth) - ds.P) <= 1e-10);
        // The adjacency is a simple graph.
        const Matrix A = ds.A.to_dense();
        CHECK(A == A.transpose());
        CHECK(A.diagonal().isZero());
    }
}

TEST_CASE("network-only factors sit across the widest Gram gap") {
    // Four blocks give three nearly tied community directions and one degree direction.
    for (auto dims : {FactorDims{1, 3, 1}, FactorDims{3, 1, 1}}) {
        SimConfig cfg = small_config(4, dims);
        const auto ds = generate_dataset(cfg);
        const auto dec = decompose_probability(ds.P);
        const Vector g = dec.Z12.colwise().squaredNorm().transpose();
        REQUIRE(g.size() == 4);
        const double tail = (g(2) - g(3)) / g(2);
        CHECK(tail > (g(0) - g(1)) / g(0));
        const Matrix expected = dims.k1 == 1 ? Matrix(dec.Z12.rightCols(1)) : Matrix(dec.Z12.leftCols(3));
        CHECK(subspace_alignment(ds.truth.Z1, expected) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("zero signal strength") {
    SimConfig cfg = small_config(3);
    cfg.kappa = 0.0;
    const auto ds = generate_dataset(cfg);
    CHECK(ds.truth.Lambda2.isZero());
    CHECK(ds.truth.Lambda3.isZero());
}

TEST_CASE("generation is deterministic") {
    const SimConfig cfg = small_config(17);
    const auto a = generate_dataset(cfg);
    const auto b = generate_dataset(cfg);
    CHECK(a.Y == b.Y);
    CHECK(a.A.edges() == b.A.edges());
    CHECK(a.truth.Lambda() == b.truth.Lambda());
    CHECK(a.truth.Z23() == b.truth.Z23());
    CHECK(a.truth.alpha == b.truth.alpha);
    SimConfig other = cfg;
    other.seed = 18;
    CHECK(generate_dataset(other).Y != a.Y);
}

TEST_CASE("uniform noise law has the target variances") {
    SimConfig cfg = small_config(4, {1, 1, 0});
    cfg.n = 4000;
    cfg.p = 5;
    cfg.kappa = 0.0;
    cfg.noise = NoiseLaw::Uniform;
    const auto ds = generate_dataset(cfg);
    const Matrix E = ds.Y.rowwise() - ds.truth.mu.transpose();
    for (Index j = 0; j < 5; ++j) {
        const double var = E.col(j).squaredNorm() / 4000.0;
        CHECK(std::abs(var - ds.truth.Psi(j)) < 0.08 * ds.truth.Psi(j));
        CHECK(E.col(j).cwiseAbs().maxCoeff() <= std::sqrt(3.0 * ds.truth.Psi(j)) + 1e-12);
    }
    CHECK(parse_noise_law("gaussian") == NoiseLaw::Gaussian);
    CHECK_THROWS_AS(parse_noise_law("cauchy"), ParameterError);
}

TEST_CASE("configuration validation") {
    SimConfig cfg;
    cfg.rho = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = SimConfig{};
    cfg.blocks = 7;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = SimConfig{};
    cfg.psiLow = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = SimConfig{};
    cfg.dims = {0, 0, 1};
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("benchmark summaries are consistent and thread invariant") {
    std::vector<BenchCell> cells;
    for (int k = 0; k < 2; ++k) {
        BenchCell cell;
        cell.label = "cell" + std::to_string(k);
        cell.series = "s";
        cell.x = k;
        cell.config = small_config(100 + k);
        cell.replicates = 3;
        cell.mode = k == 0 ? BenchMode::Estimation : BenchMode::Testing;
        cell.options.M = 49;
        cell.options.B = 49;
        cell.options.kmax = 3;
        cells.push_back(cell);
    }
    const auto one = run_benchmark(cells, 1);
    const auto four = run_benchmark(cells, 4);
    CHECK_NOTHROW(one.check_consistency());
    REQUIRE(one.records.size() == 6);
    REQUIRE(four.records.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(one.records[i].ok);
        CHECK(one.records[i].seed == four.records[i].seed);
        CHECK(one.records[i].alignZ == four.records[i].alignZ);
        CHECK(one.records[i].alignLambda == four.records[i].alignLambda);
        CHECK(one.records[i].selected.k1 == four.records[i].selected.k1);
        CHECK(one.records[i].selected.k3 == four.records[i].selected.k3);
    }
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(one.summaries[c].alignZ.mean == four.summaries[c].alignZ.mean);
        CHECK(one.summaries[c].fractionCorrect == four.summaries[c].fractionCorrect);
    }
    // Estimation mode pins the dimensions at the truth.
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(one.records[i].selected.k1 == 1);
        CHECK(one.records[i].selected.k3 == 1);
    }
    CHECK(one.summaries[0].fractionCorrect == 1.0);

    auto tampered = one;
    tampered.summaries[0].alignZ.mean += 1e-6;
    CHECK_THROWS_AS(tampered.check_consistency(), ParameterError);
}

TEST_CASE("failed replicates are recorded and excluded") {
    BenchCell cell;
    cell.label = "bad";
    cell.config = small_config(5);
    cell.replicates = 2;
    cell.mode = BenchMode::Estimation;
    cell.options.k3 = 500;  // overwritten by the mode
    cell.options.em.maxIter = 0;
    const auto res = run_benchmark({cell}, 1);
    REQUIRE(res.records.size() == 2);
    CHECK_FALSE(res.records[0].ok);
    CHECK_FALSE(res.records[0].error.empty());
    CHECK(res.summaries[0].failures == 2);
    CHECK(res.summaries[0].alignZ.count == 0);
}

TEST_CASE("metric summaries") {
    const auto s = summarize_values({1.0, 2.0, 3.0, std::nan("")});
    CHECK(s.count == 3);
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.sd == doctest::Approx(1.0));
    const auto empty = summarize_values({});
    CHECK(empty.count == 0);
}

TEST_CASE("sampled edges match the probabilities" * doctest::test_suite("slow")) {
    SimConfig cfg;
    cfg.n = 40;
    cfg.dims = {1, 1, 0};
    const Matrix P = dcsbm_probability(cfg).P;
    Matrix mean = Matrix::Zero(40, 40);
    const int reps = 500;
    for (int r = 0; r < reps; ++r) {
        Rng rng = make_rng(7, 1, static_cast<std::uint64_t>(r));
        mean += sample_adjacency(P, rng).to_dense();
    }
    mean /= reps;
    int pairs = 0, within = 0;
    double chi = 0.0;
    for (Index j = 0; j < 40; ++j)
        for (Index i = 0; i < j; ++i) {
            const double sd = std::sqrt(P(i, j) * (1.0 - P(i, j)) / reps);
            const double z = (mean(i, j) - P(i, j)) / sd;
            ++pairs;
            if (std::abs(z) <= 3.0) ++within;
            chi += z * z;
        }
    CHECK(within >= static_cast<int>(0.99 * pairs));
    // The standardized squares average one; 780 pairs give sd about 0.05.
    CHECK(chi / pairs == doctest::Approx(1.0).epsilon(0.2));
}
