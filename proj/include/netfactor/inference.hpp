#pragma once

#include "netfactor/adjacency.hpp"
#include "netfactor/eigen_solver.hpp"
#include "netfactor/error.hpp"
#include "netfactor/factor_fit.hpp"
#include "netfactor/network_embed.hpp"
#include "netfactor/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace netfactor {

/// Largest `count` eigenvalues (descending) of R'R / n.
Vector covariance_spectrum(const Matrix& R, Index count);

struct RatioStatistic {
    double value = 0.0;
    bool degenerate = false;  ///< zero denominator; value is +infinity, or 0 when the numerator also vanishes
};

/// r(l) = (phi_{l+1} - phi_{kmax+1}) / (phi_{kmax+1} - phi_{kmax+2}) with
/// 1-based indices into a descending spectrum of length >= kmax + 2.
RatioStatistic eigen_ratio_from_spectrum(const Vector& phi, int l, int kmax);
RatioStatistic eigen_ratio_statistic(const Matrix& R, int l, int kmax);

/// Ratio of a pure-noise spectrum aligned with hypothesis k3 = l: the noise
/// part of an observed spectrum with l spikes starts at phi_{l+1}, so the
/// observed indices (l+1, kmax+1, kmax+2) correspond to noise indices
/// (1, kmax+1-l, kmax+2-l).
double null_ratio_from_spectrum(const Vector& nu, int l, int kmax);

struct NullSpec {
    Index n = 0;           ///< rows of the residual
    Index p = 0;
    Index removedDim = 1;  ///< dimension of the projected-out column space (1 + d)
    Vector psi;            ///< column variances
};

/// M x (kmax + 2) matrix of the top eigenvalues of R'R/n for Gaussian R whose
/// rows have covariance diag(psi) after removing a fixed removedDim-dimensional
/// column space. Draw i uses the substream (seed, i), so the output does not
/// depend on `threads`.
Matrix simulate_null_spectra(const NullSpec& spec, int kmax, int M, std::uint64_t seed, int threads = 1);

/// Null sample of r(l) under k3 = l (see null_ratio_from_spectrum).
Vector simulate_null_ratios(const NullSpec& spec, int l, int kmax, int M, std::uint64_t seed, int threads = 1);

/// (1 + #{sample >= observed}) / (M + 1).
double upper_tail_pvalue(double observed, const Vector& sample);

/// Order statistic t with observed > t  =>  upper_tail_pvalue <= alpha.
double upper_tail_threshold(const Vector& sample, double alpha);

struct K3TestResult {
    std::vector<double> statistic;  ///< r(l), l = 0 .. kmax - 1 (stops after the first acceptance)
    std::vector<double> pValue;
    std::vector<double> threshold;
    std::vector<bool> degenerate;
    int k3Hat = 0;
    int kmax = 0;
    int M = 0;
    std::uint64_t seed = 0;
};

/// Sequential test of H0: k3 = l for l = 0, 1, ...; returns the first l that
/// is not rejected, or kmax. The null uses one set of M Gaussian draws with
/// column variances diag(R'R/n).
K3TestResult sequential_k3_test(const Matrix& R, int kmax, double alphaLevel, int M, std::uint64_t seed,
                                Index removedDim, int threads = 1);

/// S(l) = (2 sum_j V_jl^2)^{-1/2} sum_j (n lambda_jl^2 - V_jl) with
/// V_jl = (Z'Z/n)^-1_ll Psi_jj.
double column_test_statistic(const Matrix& Lambda12Hat, const Matrix& Zhat12, const Vector& PsiHat, int l);
Vector column_test_statistics(const Matrix& Lambda12Hat, const Matrix& Zhat12, const Vector& PsiHat);

/// Standard normal upper tail 0.5 erfc(s / sqrt 2).
double normal_upper_pvalue(double s);

struct FisherResult {
    double statistic = 0.0;
    double pValue = 1.0;
    bool floored = false;  ///< a zero p-value was replaced by 1e-300
};

/// Chi-square(2m) upper tail of -2 sum log p.
FisherResult fisher_global_test(const std::vector<double>& pvals);

enum class SplitCalibration { Permutation, Asymptotic };
const char* to_string(SplitCalibration c) noexcept;
SplitCalibration parse_calibration(const std::string& name);

struct SplitResult {
    SplitCalibration calibration = SplitCalibration::Permutation;
    Vector statistic;    ///< observed S(l)
    Vector pValue;       ///< normal upper tail of S(l)
    Vector threshold;    ///< rejection threshold per column
    Vector permutationPValue;  ///< (1 + #{permuted >= observed}) / (B + 1); empty for the asymptotic path
    std::vector<bool> shared;  ///< true: column assigned to Z2
    int k1Hat = 0;
    int k2Hat = 0;
    int B = 0;
    std::uint64_t seed = 0;
};

/// Z1/Z2 split calibrated by B row permutations. Each permutation relabels the
/// rows of Zhat12 against Y (equivalent to permuting Y), refits the loadings,
/// recomputes Psi from the permuted residual, and evaluates every S(l).
SplitResult permutation_split(const Matrix& Ycentered, const Matrix& Zhat12, const Vector& PsiHat, int B,
                              double alphaLevel, std::uint64_t seed, int threads = 1);

/// Z1/Z2 split with the standard normal (1 - alpha) threshold.
SplitResult asymptotic_split(const Matrix& Lambda12Hat, const Matrix& Zhat12, const Vector& PsiHat,
                             double alphaLevel);

struct PipelineOptions {
    std::optional<int> d;   ///< embedding dimension; selected from the scree when empty
    int dmax = 0;           ///< 0 means min(n / 10, 50)
    std::optional<int> k1;  ///< fixes k1 (k2 = d - k1) and skips the split
    std::optional<int> k3;  ///< fixes k3 and skips the sequential test
    int kmax = 8;
    double alpha = 0.05;
    int M = 1000;
    int B = 500;
    std::uint64_t seed = 1;
    SplitCalibration calibration = SplitCalibration::Permutation;
    EmOptions em;
    EigenOptions eig;
    int threads = 1;

    void validate() const;
};

struct TestReport {
    int d = 0;
    bool dSelected = false;
    std::optional<K3TestResult> k3Test;
    std::optional<SplitResult> split;
    FisherResult fisher;
    FactorDims selected;
    std::uint64_t seed = 0;
    int M = 0;
    int B = 0;
    std::vector<std::string> warnings;
};

struct PipelineResult {
    NetworkFit network;
    FactorFit factors;
    TestReport report;
    std::string completedStage;
};

/// Error from the end-to-end driver carrying the stages completed before the
/// failure.
class PipelineError : public Error {
public:
    PipelineError(ErrorKind kind, const std::string& stage, const std::string& what,
                  std::shared_ptr<PipelineResult> partial)
        : Error(kind, stage + ": " + what), stage_(stage), partial_(std::move(partial)) {}
    const std::string& stage() const noexcept { return stage_; }
    const PipelineResult* partial() const noexcept { return partial_.get(); }

private:
    std::string stage_;
    std::shared_ptr<PipelineResult> partial_;
};

/// Two-step estimation and inference: embedding (with dimension selection),
/// mean and loadings, sequential k3 test, EM factor fit, scores, Z1/Z2 split.
PipelineResult fit_generalized_factor_model(const AdjacencyMatrix& A, const DataMatrix& Y,
                                            const PipelineOptions& opts);
/// Same with a dense symmetric matrix in place of A (noiseless surrogates).
PipelineResult fit_generalized_factor_model(const Matrix& Asurrogate, const DataMatrix& Y,
                                            const PipelineOptions& opts);

}  // namespace netfactor
