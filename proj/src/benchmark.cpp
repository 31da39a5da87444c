#include "netfactor/error.hpp"
#include "netfactor/model.hpp"
#include "netfactor/parallel.hpp"
#include "netfactor/simulate.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <set>

namespace netfactor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double alignment_or_nan(const Matrix& Xhat, const Matrix& X) {
    if (Xhat.cols() == 0 || X.cols() == 0 || X.squaredNorm() == 0.0) return kNaN;
    try {
        return subspace_alignment(Xhat, X);
    } catch (const DegeneracyError&) {
        return kNaN;
    }
}

Matrix hcat(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

}  // namespace

const char* to_string(BenchMode mode) noexcept {
    switch (mode) {
    case BenchMode::Estimation: return "estimation";
    case BenchMode::Testing: return "testing";
    case BenchMode::Full: return "full";
    }
    return "?";
}

BenchMode parse_bench_mode(const std::string& name) {
    if (name == "estimation") return BenchMode::Estimation;
    if (name == "testing") return BenchMode::Testing;
    if (name == "full") return BenchMode::Full;
    throw ParameterError("unknown benchmark mode '" + name + "' (expected estimation, testing or full)");
}

MetricSummary summarize_values(const std::vector<double>& values) {
    MetricSummary s;
    double sum = 0.0;
    for (double v : values)
        if (std::isfinite(v)) {
            sum += v;
            ++s.count;
        }
    if (s.count == 0) {
        s.mean = kNaN;
        s.sd = kNaN;
        return s;
    }
    s.mean = sum / s.count;
    double ss = 0.0;
    for (double v : values)
        if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
    s.sd = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
    return s;
}

ReplicateRecord run_replicate(const BenchCell& cell, int replicate) {
    ReplicateRecord rec;
    rec.cell = cell.label;
    rec.replicate = replicate;
    rec.seed = derive_seed(cell.config.seed, stream::kReplicates, static_cast<std::uint64_t>(replicate));
    const auto start = std::chrono::steady_clock::now();
    try {
        SimConfig cfg = cell.config;
        cfg.seed = rec.seed;
        const Dataset ds = generate_dataset(cfg);
        const FactorDims truth = cfg.dims;

        PipelineOptions opts = cell.options;
        opts.seed = rec.seed;
        opts.threads = 1;
        opts.d.reset();
        opts.k1.reset();
        opts.k3.reset();
        if (cell.mode != BenchMode::Full) opts.d = truth.d();
        if (cell.mode == BenchMode::Estimation) {
            opts.k1 = truth.k1;
            opts.k3 = truth.k3;
        }
        const PipelineResult fit = fit_generalized_factor_model(ds.A, DataMatrix{ds.Y, {}}, opts);
        rec.selected = fit.report.selected;
        rec.d = fit.report.d;

        const Matrix& Zhat12 = fit.network.Zhat12;
        const Matrix& Zhat3 = fit.factors.Zhat3;
        const Matrix Z12 = ds.truth.Z12();
        rec.alignZ = alignment_or_nan(hcat(Zhat12, Zhat3), hcat(Z12, ds.truth.Z3));
        rec.alignZ12 = alignment_or_nan(Zhat12, Z12);
        rec.alignZ3 = alignment_or_nan(Zhat3, ds.truth.Z3);
        rec.alignLambda = alignment_or_nan(hcat(fit.factors.Lambda12Hat, fit.factors.Lambda3Hat),
                                           hcat(ds.truth.Lambda12(), ds.truth.Lambda3));
        rec.alignLambda2 = alignment_or_nan(fit.factors.Lambda12Hat, ds.truth.Lambda2);
        rec.alignLambda3 = alignment_or_nan(fit.factors.Lambda3Hat, ds.truth.Lambda3);
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::vector<CellSummary> BenchResult::summarize(const std::vector<BenchCell>& cells,
                                                const std::vector<ReplicateRecord>& records) {
    std::vector<CellSummary> out;
    for (const auto& cell : cells) {
        CellSummary s;
        s.label = cell.label;
        s.series = cell.series;
        s.x = cell.x;
        s.truth = cell.config.dims;
        std::vector<double> aZ, aL, aZ12, aZ3, aL2, aL3, k1, k2, k3, d;
        int correct = 0;
        for (const auto& r : records) {
            if (r.cell != cell.label) continue;
            ++s.replicates;
            if (!r.ok) {
                ++s.failures;
                continue;
            }
            aZ.push_back(r.alignZ);
            aL.push_back(r.alignLambda);
            aZ12.push_back(r.alignZ12);
            aZ3.push_back(r.alignZ3);
            aL2.push_back(r.alignLambda2);
            aL3.push_back(r.alignLambda3);
            k1.push_back(r.selected.k1);
            k2.push_back(r.selected.k2);
            k3.push_back(r.selected.k3);
            d.push_back(r.d);
            if (r.selected.k1 == s.truth.k1 && r.selected.k3 == s.truth.k3) ++correct;
        }
        s.alignZ = summarize_values(aZ);
        s.alignLambda = summarize_values(aL);
        s.alignZ12 = summarize_values(aZ12);
        s.alignZ3 = summarize_values(aZ3);
        s.alignLambda2 = summarize_values(aL2);
        s.alignLambda3 = summarize_values(aL3);
        s.k1 = summarize_values(k1);
        s.k2 = summarize_values(k2);
        s.k3 = summarize_values(k3);
        s.d = summarize_values(d);
        const int ok = s.replicates - s.failures;
        s.fractionCorrect = ok > 0 ? static_cast<double>(correct) / ok : kNaN;
        out.push_back(std::move(s));
    }
    return out;
}

void BenchResult::check_consistency(double tol) const {
    const auto fresh = summarize(cells, records);
    if (fresh.size() != summaries.size()) throw ParameterError("benchmark summaries do not match the cells");
    auto same = [tol](double a, double b) {
        if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
        return std::abs(a - b) <= tol * std::max(1.0, std::abs(a));
    };
    auto sameMetric = [&](const MetricSummary& a, const MetricSummary& b) {
        return a.count == b.count && same(a.mean, b.mean) && same(a.sd, b.sd);
    };
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        const auto& a = fresh[i];
        const auto& b = summaries[i];
        const bool ok = a.label == b.label && a.replicates == b.replicates && a.failures == b.failures &&
                        sameMetric(a.alignZ, b.alignZ) && sameMetric(a.alignLambda, b.alignLambda) &&
                        sameMetric(a.alignZ12, b.alignZ12) && sameMetric(a.alignZ3, b.alignZ3) &&
                        sameMetric(a.alignLambda2, b.alignLambda2) && sameMetric(a.alignLambda3, b.alignLambda3) &&
                        sameMetric(a.k1, b.k1) && sameMetric(a.k2, b.k2) && sameMetric(a.k3, b.k3) &&
                        sameMetric(a.d, b.d) && same(a.fractionCorrect, b.fractionCorrect);
        if (!ok) throw ParameterError("benchmark aggregates for cell '" + b.label + "' are not reproducible from its records");
    }
}

BenchResult run_benchmark(const std::vector<BenchCell>& cells, int threads) {
    std::set<std::string> labels;
    std::vector<std::pair<std::size_t, int>> jobs;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        if (!labels.insert(cell.label).second) throw ParameterError("duplicate benchmark cell label '" + cell.label + "'");
        if (cell.replicates < 0) throw ParameterError("replicate count must be nonnegative");
        cell.config.validate();
        cell.options.validate();
        for (int r = 0; r < cell.replicates; ++r) jobs.emplace_back(c, r);
    }
    BenchResult result;
    result.cells = cells;
    result.records.resize(jobs.size());
    parallel_for(jobs.size(), resolve_threads(threads), [&](std::size_t i) {
        result.records[i] = run_replicate(cells[jobs[i].first], jobs[i].second);
    });
    result.summaries = BenchResult::summarize(cells, result.records);
    return result;
}

}  // namespace netfactor
