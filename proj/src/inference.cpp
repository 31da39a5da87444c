#include "netfactor/inference.hpp"

#include "netfactor/linalg.hpp"
#include "netfactor/parallel.hpp"
#include "netfactor/random.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace netfactor {

namespace {

constexpr double kZeroGap = 1e-14;

Vector top_eigenvalues_of_gram(const Matrix& X, Index count, double divisor) {
    // Eigenvalues of X'X/divisor, using the smaller of the two Gram matrices.
    const bool wide = X.cols() > X.rows();
    const Index k = wide ? X.rows() : X.cols();
    Matrix G = Matrix::Zero(k, k);
    if (wide)
        G.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / divisor);
    else
        G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), 1.0 / divisor);
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("covariance spectrum: eigensolver failed");
    Vector out = Vector::Zero(count);
    const Vector& ev = es.eigenvalues();
    for (Index i = 0; i < std::min(count, k); ++i) out(i) = std::max(ev(k - 1 - i), 0.0);
    return out;
}

// Gaps are compared against the leading eigenvalue of the spectrum.
RatioStatistic ratio(double top, double mid, double low, double leading) {
    RatioStatistic r;
    const double gap = mid - low;
    const double tol = kZeroGap * std::abs(leading);
    if (std::abs(gap) <= tol) {
        // 0/0 means no eigenvalue separates from the tail.
        r.value = std::abs(top - mid) <= tol ? 0.0 : std::numeric_limits<double>::infinity();
        r.degenerate = true;
        return r;
    }
    r.value = (top - mid) / gap;
    return r;
}

void check_ratio_args(Index available, int l, int kmax) {
    if (kmax < 1 || l < 0 || l > kmax)
        throw ParameterError("eigen ratio: need 0 <= l <= kmax and kmax >= 1, got l=" + std::to_string(l) +
                             ", kmax=" + std::to_string(kmax));
    if (available < kmax + 2)
        throw ParameterError("eigen ratio: spectrum has " + std::to_string(available) +
                             " values, need kmax + 2 = " + std::to_string(kmax + 2));
}

}  // namespace

Vector covariance_spectrum(const Matrix& R, Index count) {
    if (R.rows() < 1) throw ParameterError("covariance_spectrum: empty residual");
    if (count > std::min(R.rows(), R.cols()))
        throw ParameterError("covariance_spectrum: requested more eigenvalues than min(n, p)");
    return top_eigenvalues_of_gram(R, count, static_cast<double>(R.rows()));
}

RatioStatistic eigen_ratio_from_spectrum(const Vector& phi, int l, int kmax) {
    check_ratio_args(phi.size(), l, kmax);
    return ratio(phi(l), phi(kmax), phi(kmax + 1), phi(0));
}

RatioStatistic eigen_ratio_statistic(const Matrix& R, int l, int kmax) {
    check_ratio_args(std::min(R.rows(), R.cols()), l, kmax);
    return eigen_ratio_from_spectrum(covariance_spectrum(R, kmax + 2), l, kmax);
}

double null_ratio_from_spectrum(const Vector& nu, int l, int kmax) {
    check_ratio_args(nu.size(), l, kmax);
    return ratio(nu(0), nu(kmax - l), nu(kmax + 1 - l), nu(0)).value;
}

Matrix simulate_null_spectra(const NullSpec& spec, int kmax, int M, std::uint64_t seed, int threads) {
    const Index m = spec.n - spec.removedDim;
    if (spec.psi.size() != spec.p) throw ParameterError("simulate_null_spectra: psi length differs from p");
    if (M < 1) throw ParameterError("simulate_null_spectra: M must be positive");
    if (spec.removedDim < 0 || m < kmax + 2 || spec.p < kmax + 2)
        throw ParameterError("simulate_null_spectra: effective size " + std::to_string(m) + "x" +
                             std::to_string(spec.p) + " too small for kmax=" + std::to_string(kmax));
    if ((spec.psi.array() < 0.0).any()) throw ParameterError("simulate_null_spectra: negative variance");
    const Vector sd = spec.psi.cwiseSqrt();
    const double divisor = static_cast<double>(spec.n);
    Matrix out(M, kmax + 2);
    parallel_for(static_cast<std::size_t>(M), threads, [&](std::size_t i) {
        Rng rng = make_rng(seed, stream::kNullDraws, i);
        Matrix E = standard_normal(m, spec.p, rng);
        E = E * sd.asDiagonal();
        out.row(static_cast<Index>(i)) = top_eigenvalues_of_gram(E, kmax + 2, divisor).transpose();
    });
    return out;
}

Vector simulate_null_ratios(const NullSpec& spec, int l, int kmax, int M, std::uint64_t seed, int threads) {
    if (l < 0 || l > kmax) throw ParameterError("simulate_null_ratios: need 0 <= l <= kmax");
    const Matrix spectra = simulate_null_spectra(spec, kmax, M, seed, threads);
    Vector out(M);
    for (Index i = 0; i < M; ++i) out(i) = null_ratio_from_spectrum(spectra.row(i).transpose(), l, kmax);
    return out;
}

double upper_tail_pvalue(double observed, const Vector& sample) {
    const Index count = (sample.array() >= observed).count();
    return (1.0 + static_cast<double>(count)) / (static_cast<double>(sample.size()) + 1.0);
}

double upper_tail_threshold(const Vector& sample, double alpha) {
    const Index M = sample.size();
    const auto k = static_cast<Index>(std::floor(alpha * static_cast<double>(M + 1) + 1e-9));
    if (k < 1) return std::numeric_limits<double>::infinity();
    std::vector<double> sorted(sample.data(), sample.data() + M);
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end(), std::greater<>());
    return sorted[static_cast<std::size_t>(k - 1)];
}

K3TestResult sequential_k3_test(const Matrix& R, int kmax, double alphaLevel, int M, std::uint64_t seed,
                                Index removedDim, int threads) {
    if (!(alphaLevel > 0.0 && alphaLevel < 1.0)) throw ParameterError("alpha level must lie in (0, 1)");
    const Index n = R.rows();
    const Index p = R.cols();
    if (kmax + 2 > std::min(n - removedDim, p))
        throw ParameterError("sequential_k3_test: kmax + 2 exceeds the residual rank");
    K3TestResult out;
    out.kmax = kmax;
    out.M = M;
    out.seed = seed;
    const Vector phi = covariance_spectrum(R, kmax + 2);
    NullSpec spec{n, p, removedDim, R.colwise().squaredNorm().transpose() / static_cast<double>(n)};
    const Matrix spectra = simulate_null_spectra(spec, kmax, M, seed, threads);

    out.k3Hat = kmax;
    for (int l = 0; l < kmax; ++l) {
        const RatioStatistic obs = eigen_ratio_from_spectrum(phi, l, kmax);
        Vector null(M);
        for (Index i = 0; i < M; ++i) null(i) = null_ratio_from_spectrum(spectra.row(i).transpose(), l, kmax);
        const double pv = upper_tail_pvalue(obs.value, null);
        out.statistic.push_back(obs.value);
        out.degenerate.push_back(obs.degenerate);
        out.pValue.push_back(pv);
        out.threshold.push_back(upper_tail_threshold(null, alphaLevel));
        if (pv > alphaLevel) {
            out.k3Hat = l;
            break;
        }
    }
    return out;
}

double column_test_statistic(const Matrix& Lambda12Hat, const Matrix& Zhat12, const Vector& PsiHat, int l) {
    if (l < 0 || l >= Zhat12.cols()) throw ParameterError("column_test_statistic: column index out of range");
    return column_test_statistics(Lambda12Hat, Zhat12, PsiHat)(l);
}

namespace {

Vector statistics_from(const Matrix& Lambda, const Vector& ginvDiagScaled, const Vector& Psi, double n) {
    // ginvDiagScaled(l) = (Z'Z/n)^-1_ll
    const Index d = Lambda.cols();
    Vector S(d);
    const double psiSq = Psi.squaredNorm();
    for (Index l = 0; l < d; ++l) {
        const double g = ginvDiagScaled(l);
        const double num = n * Lambda.col(l).squaredNorm() - g * Psi.sum();
        S(l) = num / std::sqrt(2.0 * g * g * psiSq);
    }
    return S;
}

}  // namespace

Vector column_test_statistics(const Matrix& Lambda12Hat, const Matrix& Zhat12, const Vector& PsiHat) {
    const Index d = Zhat12.cols();
    if (Lambda12Hat.cols() != d || Lambda12Hat.rows() != PsiHat.size())
        throw ParameterError("column_test_statistics: dimension mismatch");
    const double n = static_cast<double>(Zhat12.rows());
    const Matrix Minv = linalg::spd_inverse(Zhat12.transpose() * Zhat12 / n, "column_test_statistics");
    return statistics_from(Lambda12Hat, Minv.diagonal(), PsiHat, n);
}

double normal_upper_pvalue(double s) { return 0.5 * std::erfc(s / std::sqrt(2.0)); }

FisherResult fisher_global_test(const std::vector<double>& pvals) {
    if (pvals.empty()) throw ParameterError("fisher_global_test: no p-values");
    FisherResult out;
    for (double pv : pvals) {
        if (!(pv >= 0.0 && pv <= 1.0)) throw ParameterError("fisher_global_test: p-value outside [0, 1]");
        if (pv < 1e-300) {
            pv = 1e-300;
            out.floored = true;
        }
        out.statistic -= 2.0 * std::log(pv);
    }
    const boost::math::chi_squared_distribution<double> chi(2.0 * static_cast<double>(pvals.size()));
    out.pValue = out.statistic <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(chi, out.statistic));
    return out;
}

const char* to_string(SplitCalibration c) noexcept {
    return c == SplitCalibration::Permutation ? "permutation" : "asymptotic";
}

SplitCalibration parse_calibration(const std::string& name) {
    if (name == "permutation") return SplitCalibration::Permutation;
    if (name == "asymptotic") return SplitCalibration::Asymptotic;
    throw ParameterError("unknown split calibration '" + name + "' (expected permutation or asymptotic)");
}

namespace {

void finish_split(SplitResult& out) {
    const Index d = out.statistic.size();
    out.pValue.resize(d);
    out.shared.assign(static_cast<std::size_t>(d), false);
    out.k2Hat = 0;
    for (Index l = 0; l < d; ++l) {
        out.pValue(l) = normal_upper_pvalue(out.statistic(l));
        if (out.statistic(l) > out.threshold(l)) {
            out.shared[static_cast<std::size_t>(l)] = true;
            ++out.k2Hat;
        }
    }
    out.k1Hat = static_cast<int>(d) - out.k2Hat;
}

}  // namespace

SplitResult permutation_split(const Matrix& Ycentered, const Matrix& Zhat12, const Vector& PsiHat, int B,
                              double alphaLevel, std::uint64_t seed, int threads) {
    if (B < 1) throw ParameterError("permutation_split: B must be positive");
    if (!(alphaLevel > 0.0 && alphaLevel < 1.0)) throw ParameterError("alpha level must lie in (0, 1)");
    const Index n = Ycentered.rows();
    const Index p = Ycentered.cols();
    const Index d = Zhat12.cols();
    if (Zhat12.rows() != n || PsiHat.size() != p) throw ParameterError("permutation_split: dimension mismatch");
    const double nd = static_cast<double>(n);
    const Matrix gram = Zhat12.transpose() * Zhat12;
    const Matrix gramInv = linalg::spd_inverse(gram, "permutation_split");
    const Vector scaledDiag = gramInv.diagonal() * nd;
    const Vector colNorms = Ycentered.colwise().squaredNorm().transpose();

    SplitResult out;
    out.calibration = SplitCalibration::Permutation;
    out.B = B;
    out.seed = seed;
    out.statistic = statistics_from(regress_loadings(Ycentered, Zhat12), scaledDiag, PsiHat, nd);

    Matrix permuted(B, d);
    parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
        Rng rng = make_rng(seed, stream::kPermutations, b);
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        for (Index i = n - 1; i > 0; --i) {
            std::uniform_int_distribution<Index> pick(0, i);
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
        }
        Matrix Zp(n, d);
        for (Index i = 0; i < n; ++i) Zp.row(i) = Zhat12.row(order[static_cast<std::size_t>(i)]);
        const Matrix C = Zp.transpose() * Ycentered;  // d x p
        const Matrix LambdaT = gramInv * C;
        Vector psi(p);
        for (Index j = 0; j < p; ++j)
            psi(j) = std::max((colNorms(j) - C.col(j).dot(LambdaT.col(j))) / nd, 1e-12);
        permuted.row(static_cast<Index>(b)) = statistics_from(LambdaT.transpose(), scaledDiag, psi, nd).transpose();
    });

    out.threshold.resize(d);
    out.permutationPValue.resize(d);
    for (Index l = 0; l < d; ++l) {
        out.threshold(l) = upper_tail_threshold(permuted.col(l), alphaLevel);
        out.permutationPValue(l) = upper_tail_pvalue(out.statistic(l), permuted.col(l));
    }
    finish_split(out);
    return out;
}

SplitResult asymptotic_split(const Matrix& Lambda12Hat, const Matrix& Zhat12, const Vector& PsiHat,
                             double alphaLevel) {
    if (!(alphaLevel > 0.0 && alphaLevel < 1.0)) throw ParameterError("alpha level must lie in (0, 1)");
    SplitResult out;
    out.calibration = SplitCalibration::Asymptotic;
    out.statistic = column_test_statistics(Lambda12Hat, Zhat12, PsiHat);
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alphaLevel);
    out.threshold = Vector::Constant(out.statistic.size(), z);
    finish_split(out);
    return out;
}

}  // namespace netfactor
