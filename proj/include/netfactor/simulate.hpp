#pragma once

#include "netfactor/adjacency.hpp"
#include "netfactor/inference.hpp"
#include "netfactor/random.hpp"
#include "netfactor/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace netfactor {

enum class NoiseLaw { Gaussian, Uniform };
const char* to_string(NoiseLaw law) noexcept;
NoiseLaw parse_noise_law(const std::string& name);

/// Generator settings. The network is a degree-corrected block model with
/// k1 + k2 blocks unless `blocks` overrides it.
struct SimConfig {
    Index n = 500;
    Index p = 500;
    FactorDims dims{1, 3, 1};
    double rho = 1.0;
    double kappa = 1.0;
    int blocks = 0;  ///< 0 means k1 + k2
    double withinProb = 0.8;
    double betweenProb = 0.2;
    double degreeLow = 1.0;  ///< u_i ~ Uniform(degreeLow, degreeHigh), c_i = 1 / u_i
    double degreeHigh = 5.0;
    double z3Variance = 0.2;
    double psiLow = 0.5;  ///< Psi_jj ~ Uniform(psiLow, psiHigh)
    double psiHigh = 1.5;
    NoiseLaw noise = NoiseLaw::Gaussian;
    std::uint64_t seed = 1;

    int block_count() const { return blocks > 0 ? blocks : dims.d(); }
    void validate() const;
};

struct DcsbmMatrices {
    Matrix P;
    Vector c;                     ///< diagonal of C
    std::vector<int> membership;  ///< block label per node (contiguous, balanced)
    Matrix B;
};

/// P = rho C W B W' C with balanced contiguous blocks (sizes differ by at most
/// one when K does not divide n).
DcsbmMatrices dcsbm_probability(const SimConfig& cfg, Rng& rng);
DcsbmMatrices dcsbm_probability(const SimConfig& cfg);

struct LatentDecomposition {
    Vector alpha;
    Matrix Z12;  ///< centered, Gram diagonal descending, sign-fixed
};

/// alpha = n^-1 (I - P1/2) P 1 and Z12 from the eigendecomposition of
/// (I - P1) P (I - P1), keeping eigenvalues above 1e-8 max(1, lambda_max).
/// Throws DecompositionError when an eigenvalue is below -1e-8 max(1, lambda_max).
LatentDecomposition decompose_probability(const Matrix& P);

/// Independent Bernoulli(P_ij) edges for i < j.
AdjacencyMatrix sample_adjacency(const Matrix& P, Rng& rng);

struct Dataset {
    AdjacencyMatrix A;
    Matrix Y;
    ModelParams truth;  ///< satisfies scheme COR1_1
    Matrix P;
    std::vector<int> membership;
};

/// Draws a full dataset; identical configs give bit-identical datasets.
Dataset generate_dataset(const SimConfig& cfg);

enum class BenchMode {
    Estimation,  ///< d, k1, k3 fixed at the truth
    Testing,     ///< d fixed at the truth; k1 and k3 selected by the tests
    Full         ///< d selected from the scree as well
};
const char* to_string(BenchMode mode) noexcept;
BenchMode parse_bench_mode(const std::string& name);

struct BenchCell {
    std::string label;
    std::string series;  ///< curve name for trend plots
    double x = 0.0;      ///< abscissa for trend plots
    SimConfig config;
    int replicates = 50;
    BenchMode mode = BenchMode::Testing;
    PipelineOptions options;  ///< d/k1/k3 are overwritten according to `mode`
};

struct ReplicateRecord {
    std::string cell;
    int replicate = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double alignZ = 0.0;        ///< Tr([Zhat12 Zhat3], [Z12 Z3])
    double alignLambda = 0.0;   ///< Tr([Lambda12hat Lambda3hat], [0 Lambda2 Lambda3])
    double alignZ12 = 0.0;
    double alignZ3 = 0.0;       ///< NaN when either side is empty
    double alignLambda2 = 0.0;  ///< Tr(Lambda12hat, Lambda2); NaN when k2 = 0 or kappa = 0
    double alignLambda3 = 0.0;
    FactorDims selected;
    int d = 0;
    double seconds = 0.0;
};

struct MetricSummary {
    int count = 0;
    double mean = 0.0;
    double sd = 0.0;
};

struct CellSummary {
    std::string label;
    std::string series;
    double x = 0.0;
    FactorDims truth;
    int replicates = 0;
    int failures = 0;
    MetricSummary alignZ, alignLambda, alignZ12, alignZ3, alignLambda2, alignLambda3;
    MetricSummary k1, k2, k3, d;
    double fractionCorrect = 0.0;  ///< share of successful replicates with (k1, k3) equal to the truth
};

struct BenchResult {
    std::vector<BenchCell> cells;
    std::vector<ReplicateRecord> records;
    std::vector<CellSummary> summaries;

    /// Aggregates recomputed from the records.
    static std::vector<CellSummary> summarize(const std::vector<BenchCell>& cells,
                                              const std::vector<ReplicateRecord>& records);
    /// Throws ParameterError when `summaries` differ from summarize(cells, records).
    void check_consistency(double tol = 1e-12) const;
};

/// Sample mean and sd (n - 1 divisor) of the finite entries.
MetricSummary summarize_values(const std::vector<double>& values);

/// One replicate: generate, fit, score. Failures are captured in the record.
ReplicateRecord run_replicate(const BenchCell& cell, int replicate);

/// Replicates run in parallel on `threads` workers; seeds derive from each
/// cell's config seed and the replicate index, so output is thread-count
/// invariant.
BenchResult run_benchmark(const std::vector<BenchCell>& cells, int threads = 1);

}  // namespace netfactor
