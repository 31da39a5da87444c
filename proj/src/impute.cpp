#include "netfactor/error.hpp"
#include "netfactor/factor_fit.hpp"
#include "netfactor/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace netfactor {

namespace {

constexpr int kMaxImputeSweeps = 500;
constexpr double kImputeTol = 1e-11;

bool is_missing(const DataMatrix& data, Index i, Index j) {
    return data.missing.size() > 0 && data.missing(i, j);
}

}  // namespace

FactorFit fit_factor_model_masked(const DataMatrix& data, const Matrix& Zhat12, int k3, const EmOptions& opts) {
    data.validate();
    if (!data.has_missing()) return fit_factor_model(data.Y, Zhat12, k3, opts);
    const Index n = data.Y.rows();
    const Index p = data.Y.cols();
    if (Zhat12.rows() != n) throw ParameterError("fit_factor_model_masked: Y and Zhat12 differ in n");
    if (k3 < 0) throw ParameterError("k3 must be nonnegative");

    // Start from observed column means; fully masked columns stay at 0.
    Matrix Y = data.Y;
    std::vector<Index> fullyMasked;
    double scale = 1.0;
    for (Index j = 0; j < p; ++j) {
        double sum = 0.0;
        Index count = 0;
        for (Index i = 0; i < n; ++i) {
            if (is_missing(data, i, j)) continue;
            sum += data.Y(i, j);
            scale = std::max(scale, std::abs(data.Y(i, j)));
            ++count;
        }
        if (count == 0) fullyMasked.push_back(j);
        const double fill = count > 0 ? sum / static_cast<double>(count) : 0.0;
        for (Index i = 0; i < n; ++i)
            if (is_missing(data, i, j)) Y(i, j) = fill;
    }

    // Conditional-mean imputation: refit on the completed matrix and replace
    // the masked cells by the fitted mean structure until they settle.
    FactorFit fit;
    bool settled = false;
    int sweeps = 0;
    for (; sweeps < kMaxImputeSweeps && !settled; ++sweeps) {
        fit = fit_factor_model(Y, Zhat12, k3, opts);
        double change = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (!data.missing.col(j).any() || data.missing.col(j).all()) continue;
            for (Index i = 0; i < n; ++i) {
                if (!data.missing(i, j)) continue;
                double value = fit.muHat(j) + fit.Lambda12Hat.row(j).dot(Zhat12.row(i));
                if (k3 > 0) value += fit.Lambda3Hat.row(j).dot(fit.Zhat3.row(i));
                change = std::max(change, std::abs(value - Y(i, j)));
                Y(i, j) = value;
            }
        }
        settled = change <= kImputeTol * scale;
    }
    if (settled) fit = fit_factor_model(Y, Zhat12, k3, opts);
    fit.fullyMaskedColumns = fullyMasked;
    if (!fullyMasked.empty())
        fit.warnings.push_back(std::to_string(fullyMasked.size()) + " fully masked column(s) are imputed with 0");
    if (!settled)
        fit.warnings.push_back("masked entries did not settle within " + std::to_string(kMaxImputeSweeps) +
                               " refits");
    return fit;
}

ImputationResult impute_missing(const DataMatrix& data, const FactorFit& fit, const Matrix& Zhat12) {
    data.validate();
    const Index n = data.Y.rows();
    const Index p = data.Y.cols();
    if (Zhat12.rows() != n || fit.muHat.size() != p || fit.Lambda12Hat.rows() != p ||
        fit.Lambda12Hat.cols() != Zhat12.cols() || fit.Lambda3Hat.rows() != p || fit.Zhat3.rows() != n)
        throw ParameterError("impute_missing: fit does not match the data dimensions");
    ImputationResult out;
    out.Y = data.Y;
    if (!data.has_missing()) return out;
    std::vector<bool> fullyMasked(static_cast<std::size_t>(p), false);
    for (Index j = 0; j < p; ++j) {
        if (data.missing.col(j).all()) {
            fullyMasked[static_cast<std::size_t>(j)] = true;
            out.fullyMaskedColumns.push_back(j);
        }
    }
    for (Index j = 0; j < p; ++j) {
        for (Index i = 0; i < n; ++i) {
            if (!data.missing(i, j)) continue;
            if (fullyMasked[static_cast<std::size_t>(j)]) {
                out.Y(i, j) = 0.0;
                continue;
            }
            double value = fit.muHat(j) + fit.Lambda12Hat.row(j).dot(Zhat12.row(i));
            if (fit.Lambda3Hat.cols() > 0) value += fit.Lambda3Hat.row(j).dot(fit.Zhat3.row(i));
            out.Y(i, j) = value;
        }
    }
    return out;
}

}  // namespace netfactor
