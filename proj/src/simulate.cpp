#include "netfactor/simulate.hpp"

#include "netfactor/error.hpp"
#include "netfactor/linalg.hpp"
#include "netfactor/model.hpp"

#include <cmath>

namespace netfactor {

const char* to_string(NoiseLaw law) noexcept { return law == NoiseLaw::Gaussian ? "gaussian" : "uniform"; }

NoiseLaw parse_noise_law(const std::string& name) {
    if (name == "gaussian") return NoiseLaw::Gaussian;
    if (name == "uniform") return NoiseLaw::Uniform;
    throw ParameterError("unknown noise law '" + name + "' (expected gaussian or uniform)");
}

void SimConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ParameterError("SimConfig: " + what);
    };
    dims.validate(true);
    require(n >= 4, "n must be at least 4");
    require(p >= 1, "p must be at least 1");
    require(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
    require(kappa >= 0.0 && std::isfinite(kappa), "kappa must be a finite nonnegative number");
    require(blocks >= 0, "blocks must be nonnegative");
    require(block_count() == dims.d(), "the block count must equal k1 + k2 (the rank of the centered P)");
    require(block_count() <= n, "more blocks than nodes");
    require(withinProb >= 0.0 && withinProb <= 1.0 && betweenProb >= 0.0 && betweenProb <= 1.0,
            "block probabilities must lie in [0, 1]");
    require(rho * withinProb <= 1.0, "rho * withinProb exceeds 1");
    require(degreeLow > 0.0 && degreeLow <= degreeHigh, "degree law needs 0 < low <= high");
    require(z3Variance >= 0.0, "z3 variance must be nonnegative");
    require(psiLow > 0.0 && psiLow <= psiHigh, "psi law needs 0 < low <= high");
    require(dims.k3 < p, "k3 must be smaller than p");
}

DcsbmMatrices dcsbm_probability(const SimConfig& cfg, Rng& rng) {
    cfg.validate();
    const Index n = cfg.n;
    const int K = cfg.block_count();
    DcsbmMatrices out;
    std::uniform_real_distribution<double> degree(cfg.degreeLow, cfg.degreeHigh);
    out.c.resize(n);
    for (Index i = 0; i < n; ++i) out.c(i) = 1.0 / degree(rng);
    out.membership.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.membership[static_cast<std::size_t>(i)] = static_cast<int>(i * K / n);
    out.B = Matrix::Constant(K, K, cfg.betweenProb);
    out.B.diagonal().setConstant(cfg.withinProb);
    out.P.resize(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            out.P(i, j) = cfg.rho * out.c(i) * out.c(j) *
                          out.B(out.membership[static_cast<std::size_t>(i)], out.membership[static_cast<std::size_t>(j)]);
    return out;
}

DcsbmMatrices dcsbm_probability(const SimConfig& cfg) {
    Rng rng = make_rng(cfg.seed, stream::kGenerator, 0);
    return dcsbm_probability(cfg, rng);
}

namespace {

// Whether Z1 takes the trailing canonical columns instead of the leading ones.
// The column tests can only separate Z1 from Z2 across a clear gap in the Gram
// spectrum, so the boundary with the larger relative gap is used.
bool network_only_last(const Matrix& Z12, const FactorDims& dims) {
    if (dims.k1 == 0 || dims.k2 == 0 || dims.k1 == dims.k2) return false;
    const Vector g = Z12.colwise().squaredNorm().transpose();
    auto gap = [&](int a) { return (g(a - 1) - g(a)) / g(a - 1); };
    return gap(dims.k2) > gap(dims.k1);
}

}  // namespace

LatentDecomposition decompose_probability(const Matrix& P) {
    if (P.rows() != P.cols()) throw ParameterError("decompose_probability: matrix is not square");
    const Index n = P.rows();
    if (n < 2) throw ParameterError("decompose_probability: needs n >= 2");
    if (linalg::max_abs(P - P.transpose()) > 1e-12 * std::max(1.0, linalg::max_abs(P)))
        throw ParameterError("decompose_probability: matrix is not symmetric");
    LatentDecomposition out;
    out.alpha = estimate_alpha(P);
    const Vector rowMeans = P.rowwise().mean();
    const double grand = rowMeans.mean();
    Matrix H = P;
    H.colwise() -= rowMeans;
    H.rowwise() -= rowMeans.transpose();
    H.array() += grand;
    H = 0.5 * (H + H.transpose());
    const auto eig = linalg::sorted_symmetric_eigen(H);
    const double scale = std::max(1.0, eig.values(0));
    if (eig.values(n - 1) < -1e-8 * scale)
        throw DecompositionError("decompose_probability: centered matrix has eigenvalue " +
                                 std::to_string(eig.values(n - 1)) + " (not positive semidefinite)");
    Index rank = 0;
    while (rank < n && eig.values(rank) > 1e-8 * scale) ++rank;
    out.Z12 = eig.vectors.leftCols(rank) * eig.values.head(rank).cwiseSqrt().asDiagonal();
    out.Z12 = linalg::center_columns(out.Z12);
    linalg::fix_first_nonzero_signs(out.Z12);
    return out;
}

AdjacencyMatrix sample_adjacency(const Matrix& P, Rng& rng) {
    if (P.rows() != P.cols()) throw ParameterError("sample_adjacency: matrix is not square");
    const Index n = P.rows();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<Index, Index>> edges;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (unif(rng) < P(i, j)) edges.emplace_back(i, j);
    return AdjacencyMatrix::from_edges(n, edges);
}

Dataset generate_dataset(const SimConfig& cfg) {
    cfg.validate();
    Rng rng = make_rng(cfg.seed, stream::kGenerator, 0);
    const auto dcsbm = dcsbm_probability(cfg, rng);
    const auto latent = decompose_probability(dcsbm.P);
    const FactorDims dims = cfg.dims;
    if (latent.Z12.cols() != dims.d())
        throw DecompositionError("generate_dataset: centered P has rank " + std::to_string(latent.Z12.cols()) +
                                 ", expected k1 + k2 = " + std::to_string(dims.d()));
    const Index n = cfg.n;
    const Index p = cfg.p;

    ModelParams params;
    params.alpha = latent.alpha;
    if (network_only_last(latent.Z12, dims)) {
        params.Z2 = latent.Z12.leftCols(dims.k2);
        params.Z1 = latent.Z12.rightCols(dims.k1);
    } else {
        params.Z1 = latent.Z12.leftCols(dims.k1);
        params.Z2 = latent.Z12.rightCols(dims.k2);
    }
    params.Z3 = standard_normal(n, dims.k3, rng) * std::sqrt(cfg.z3Variance);
    params.Z3 = linalg::center_columns(params.Z3);
    if (dims.k1 > 0 && dims.k3 > 0)
        params.Z3 = linalg::project_out(params.Z3, linalg::orthonormal_basis(params.Z1, "generate_dataset: Z1"));
    params.Lambda2 = standard_normal(p, dims.k2, rng) * cfg.kappa;
    params.Lambda3 = standard_normal(p, dims.k3, rng) * cfg.kappa;
    std::uniform_real_distribution<double> psiLaw(cfg.psiLow, cfg.psiHigh);
    params.Psi.resize(p);
    for (Index j = 0; j < p; ++j) params.Psi(j) = psiLaw(rng);
    params.mu = standard_normal(p, 1, rng).col(0);

    Dataset ds;
    ds.truth = apply_identifiability(params, IdentifiabilityScheme::Cor1_1);
    ds.P = dcsbm.P;
    ds.membership = dcsbm.membership;
    ds.A = sample_adjacency(ds.P, rng);

    Matrix E(n, p);
    if (cfg.noise == NoiseLaw::Gaussian) {
        E = standard_normal(n, p, rng);
        E = E * ds.truth.Psi.cwiseSqrt().asDiagonal();
    } else {
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (Index j = 0; j < p; ++j) {
            const double half = std::sqrt(3.0 * ds.truth.Psi(j));
            for (Index i = 0; i < n; ++i) E(i, j) = half * unif(rng);
        }
    }
    ds.Y = E;
    ds.Y.rowwise() += ds.truth.mu.transpose();
    if (dims.k2 + dims.k3 > 0) ds.Y.noalias() += ds.truth.Z23() * ds.truth.Lambda().transpose();
    return ds;
}

}  // namespace netfactor
