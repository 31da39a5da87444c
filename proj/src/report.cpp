#include "netfactor/report.hpp"

#include "netfactor/error.hpp"
#include "netfactor/io.hpp"
#include "netfactor/svg.hpp"
#include "netfactor/version.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <sstream>

namespace netfactor::report {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

json vec(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

json vec(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

Matrix column(const Vector& v) { return Matrix(v); }

}  // namespace

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ResourceError("cannot create output directory '" + dir + "'");
}

void write_text(const std::string& path, const std::string& text) {
    auto out = io::open_output(path);
    out << text;
    if (!out) throw ResourceError("failed writing '" + path + "'");
}

void write_manifest(const std::string& dir, const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["version"] = kVersion;
    j["seed"] = m.seed;
    j["options"] = m.options;
    json inputs = json::array();
    for (const auto& [path, digest] : m.inputs) inputs.push_back({{"path", path}, {"digest", digest}});
    j["inputs"] = inputs;
    j["warnings"] = m.warnings;
    std::vector<std::string> outputs = m.outputs;
    std::sort(outputs.begin(), outputs.end());
    j["outputs"] = outputs;
    if (m.recordTimings) {
        json t = json::array();
        for (const auto& [stage, seconds] : m.timings) t.push_back({{"stage", stage}, {"seconds", seconds}});
        j["timings"] = t;
    }
    write_text(path_in(dir, "manifest.json"), j.dump(2) + "\n");
}

json test_report_json(const TestReport& r) {
    json j;
    j["d"] = r.d;
    j["d_selected"] = r.dSelected;
    j["selected"] = {{"k1", r.selected.k1}, {"k2", r.selected.k2}, {"k3", r.selected.k3}};
    j["seed"] = r.seed;
    if (r.k3Test) {
        const auto& t = *r.k3Test;
        json k;
        k["kmax"] = t.kmax;
        k["draws"] = t.M;
        k["statistic"] = vec(t.statistic);
        k["p_value"] = vec(t.pValue);
        k["threshold"] = vec(t.threshold);
        k["degenerate"] = t.degenerate;
        k["k3_hat"] = t.k3Hat;
        j["k3_test"] = k;
    } else {
        j["k3_test"] = nullptr;
    }
    if (r.split) {
        const auto& s = *r.split;
        json k;
        k["calibration"] = to_string(s.calibration);
        k["permutations"] = s.B;
        k["statistic"] = vec(s.statistic);
        k["p_value"] = vec(s.pValue);
        if (s.permutationPValue.size() > 0) k["permutation_p_value"] = vec(s.permutationPValue);
        k["threshold"] = vec(s.threshold);
        k["shared"] = s.shared;
        k["k1_hat"] = s.k1Hat;
        k["k2_hat"] = s.k2Hat;
        j["column_tests"] = k;
    } else {
        j["column_tests"] = nullptr;
    }
    j["fisher"] = {{"statistic", number(r.fisher.statistic)},
                   {"p_value", number(r.fisher.pValue)},
                   {"floored", r.fisher.floored}};
    j["warnings"] = r.warnings;
    return j;
}

std::vector<std::string> write_fit_artifacts(const std::string& dir, const PipelineResult& result,
                                             const FitArtifactOptions& opts) {
    ensure_directory(dir);
    std::vector<std::string> files;
    auto csv = [&](const std::string& name, const Matrix& M, const std::vector<std::string>& header,
                   const std::vector<std::string>& rows = {}, const std::string& rowName = "") {
        io::write_matrix_csv(path_in(dir, name), M, header, rows, rowName);
        files.push_back(name);
    };
    const NetworkFit& net = result.network;
    const FactorFit& fit = result.factors;
    const Index p = fit.muHat.size();
    const int d = net.d;
    const Index k3 = fit.Lambda3Hat.cols();
    std::vector<std::string> columns = opts.columns;
    if (static_cast<Index>(columns.size()) != p) columns = io::numbered("y", p);
    std::vector<std::string> nodeIds;
    for (Index i = 0; i < net.Zhat12.rows(); ++i) nodeIds.push_back(std::to_string(i));

    csv("alpha.csv", column(net.alphaHat), {"alpha"}, nodeIds, "node");
    csv("Zhat12.csv", net.Zhat12, io::numbered("z", d), nodeIds, "node");
    csv("Zhat3.csv", fit.Zhat3, io::numbered("z3_", k3), nodeIds, "node");
    csv("singular_values.csv", column(net.topSingularValues), {"singular_value"});
    csv("mu.csv", column(fit.muHat), {"mu"}, columns, "variable");
    csv("psi.csv", column(fit.PsiHat), {"psi"}, columns, "variable");
    csv("loadings12.csv", fit.Lambda12Hat, io::numbered("lambda", d), columns, "variable");
    csv("loadings3.csv", fit.Lambda3Hat, io::numbered("lambda3_", k3), columns, "variable");
    Matrix trace(static_cast<Index>(fit.emTrace.size()), 1);
    for (std::size_t i = 0; i < fit.emTrace.size(); ++i) trace(static_cast<Index>(i), 0) = fit.emTrace[i];
    csv("em_trace.csv", trace, {"objective"});
    if (fit.rotation) {
        csv("rotation.csv", *fit.rotation, io::numbered("r", d));
        csv("Zhat12_rotated.csv", net.Zhat12 * *fit.rotation, io::numbered("z", d), nodeIds, "node");
    }

    const LoadingIntervals ci = loading_confidence_intervals(fit, net.Zhat12, opts.ciLevel);
    {
        std::ostringstream o;
        o << "variable,factor,estimate,std_error,lower,upper,significant\n";
        for (Index j = 0; j < p; ++j)
            for (int l = 0; l < d; ++l)
                o << columns[static_cast<std::size_t>(j)] << ',' << l + 1 << ',' << io::format_double(ci.estimate(j, l))
                  << ',' << io::format_double(ci.stdError(j, l)) << ',' << io::format_double(ci.lower(j, l)) << ','
                  << io::format_double(ci.upper(j, l)) << ',' << (ci.significant(j, l) ? 1 : 0) << '\n';
        write_text(path_in(dir, "loading_intervals.csv"), o.str());
        files.push_back("loading_intervals.csv");
    }
    {
        std::ostringstream o;
        o << "factor,rank,variable,estimate,lower,upper,significant\n";
        const int top = static_cast<int>(std::min<Index>(opts.topCount, p));
        for (int l = 0; l < d; ++l) {
            std::vector<Index> order(static_cast<std::size_t>(p));
            std::iota(order.begin(), order.end(), Index{0});
            std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
                return std::abs(ci.estimate(a, l)) > std::abs(ci.estimate(b, l));
            });
            std::vector<svg::Bar> bars;
            for (int r = 0; r < top; ++r) {
                const Index j = order[static_cast<std::size_t>(r)];
                const auto& name = columns[static_cast<std::size_t>(j)];
                o << l + 1 << ',' << r + 1 << ',' << name << ',' << io::format_double(ci.estimate(j, l)) << ','
                  << io::format_double(ci.lower(j, l)) << ',' << io::format_double(ci.upper(j, l)) << ','
                  << (ci.significant(j, l) ? 1 : 0) << '\n';
                bars.push_back({name, ci.estimate(j, l), ci.significant(j, l)});
            }
            const std::string plot = "top_loadings_factor" + std::to_string(l + 1) + ".svg";
            write_text(path_in(dir, plot),
                       svg::bar_plot(bars, "Factor " + std::to_string(l + 1) + ": largest loadings", "loading"));
            files.push_back(plot);
        }
        write_text(path_in(dir, "top_loadings.csv"), o.str());
        files.push_back("top_loadings.csv");
    }
    write_text(path_in(dir, "test_report.json"), test_report_json(result.report).dump(2) + "\n");
    files.push_back("test_report.json");
    return files;
}

std::vector<std::string> write_benchmark(const std::string& dir, const BenchResult& result, bool recordTimings) {
    ensure_directory(dir);
    std::vector<std::string> files;
    using io::format_double;
    {
        std::ostringstream o;
        o << "cell,replicate,seed,ok,error,align_Z,align_Lambda,align_Z12,align_Z3,align_Lambda2,align_Lambda3,"
             "d,k1,k2,k3";
        if (recordTimings) o << ",seconds";
        o << '\n';
        for (const auto& r : result.records) {
            std::string err = r.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            o << r.cell << ',' << r.replicate << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',' << err << ','
              << format_double(r.alignZ) << ',' << format_double(r.alignLambda) << ',' << format_double(r.alignZ12)
              << ',' << format_double(r.alignZ3) << ',' << format_double(r.alignLambda2) << ','
              << format_double(r.alignLambda3) << ',' << r.d << ',' << r.selected.k1 << ',' << r.selected.k2 << ','
              << r.selected.k3;
            if (recordTimings) o << ',' << format_double(r.seconds);
            o << '\n';
        }
        write_text(path_in(dir, "records.csv"), o.str());
        files.push_back("records.csv");
    }
    auto metric = [](std::ostringstream& o, const MetricSummary& m) {
        o << ',' << format_double(m.mean) << ',' << format_double(m.sd);
    };
    {
        std::ostringstream o;
        o << "cell,series,x,k1,k2,k3,replicates,failures";
        for (const char* name : {"align_Z", "align_Lambda", "align_Z12", "align_Z3", "align_Lambda2", "align_Lambda3",
                                 "k1_hat", "k2_hat", "k3_hat", "d_hat"})
            o << ',' << name << "_mean," << name << "_sd";
        o << ",fraction_correct\n";
        for (const auto& s : result.summaries) {
            o << s.label << ',' << s.series << ',' << format_double(s.x) << ',' << s.truth.k1 << ',' << s.truth.k2
              << ',' << s.truth.k3 << ',' << s.replicates << ',' << s.failures;
            for (const auto* m : {&s.alignZ, &s.alignLambda, &s.alignZ12, &s.alignZ3, &s.alignLambda2,
                                  &s.alignLambda3, &s.k1, &s.k2, &s.k3, &s.d})
                metric(o, *m);
            o << ',' << format_double(s.fractionCorrect) << '\n';
        }
        write_text(path_in(dir, "summary.csv"), o.str());
        files.push_back("summary.csv");
    }
    {
        std::ostringstream o;
        o << "cell,k1,k2,k3,k1_hat_mean,k1_hat_sd,k3_hat_mean,k3_hat_sd\n";
        for (const auto& s : result.summaries) {
            o << s.label << ',' << s.truth.k1 << ',' << s.truth.k2 << ',' << s.truth.k3;
            metric(o, s.k1);
            metric(o, s.k3);
            o << '\n';
        }
        write_text(path_in(dir, "dims_table.csv"), o.str());
        files.push_back("dims_table.csv");
    }
    if (result.records.empty()) return files;

    std::map<std::string, std::vector<const CellSummary*>> bySeries;
    std::vector<std::string> seriesOrder;
    for (const auto& s : result.summaries) {
        if (!bySeries.count(s.series)) seriesOrder.push_back(s.series);
        bySeries[s.series].push_back(&s);
    }
    auto plot = [&](const std::string& name, const std::string& yLabel, auto pick) {
        std::vector<svg::Series> series;
        for (const auto& key : seriesOrder) {
            svg::Series sr;
            sr.name = key.empty() ? "all" : key;
            for (const auto* s : bySeries[key]) {
                const auto [mean, se] = pick(*s);
                sr.x.push_back(s->x);
                sr.y.push_back(mean);
                sr.err.push_back(se);
            }
            series.push_back(std::move(sr));
        }
        write_text(path_in(dir, name), svg::line_plot(series, yLabel, "x", yLabel));
        files.push_back(name);
    };
    auto withSe = [](const MetricSummary& m) {
        return std::pair<double, double>{m.mean, m.count > 0 ? m.sd / std::sqrt(static_cast<double>(m.count)) : 0.0};
    };
    plot("trend_align_Z.svg", "mean alignment of Z", [&](const CellSummary& s) { return withSe(s.alignZ); });
    plot("trend_align_Lambda.svg", "mean alignment of Lambda",
         [&](const CellSummary& s) { return withSe(s.alignLambda); });
    plot("trend_fraction_correct.svg", "fraction with correct (k1, k3)",
         [](const CellSummary& s) { return std::pair<double, double>{s.fractionCorrect, 0.0}; });
    return files;
}

std::vector<std::string> write_truth(const std::string& dir, const ModelParams& t) {
    ensure_directory(dir);
    std::vector<std::string> files;
    auto csv = [&](const std::string& name, const Matrix& M, const std::string& prefix) {
        io::write_matrix_csv(path_in(dir, name), M, io::numbered(prefix, M.cols()));
        files.push_back(name);
    };
    csv("mu.csv", column(t.mu), "mu");
    csv("alpha.csv", column(t.alpha), "alpha");
    csv("psi.csv", column(t.Psi), "psi");
    csv("Z1.csv", t.Z1, "z1_");
    csv("Z2.csv", t.Z2, "z2_");
    csv("Z3.csv", t.Z3, "z3_");
    csv("Lambda2.csv", t.Lambda2, "lambda2_");
    csv("Lambda3.csv", t.Lambda3, "lambda3_");
    return files;
}

}  // namespace netfactor::report
