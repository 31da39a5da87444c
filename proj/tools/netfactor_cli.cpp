#include "netfactor/error.hpp"
#include "netfactor/inference.hpp"
#include "netfactor/io.hpp"
#include "netfactor/parallel.hpp"
#include "netfactor/report.hpp"
#include "netfactor/simulate.hpp"
#include "netfactor/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <new>
#include <sstream>

namespace nf = netfactor;
using nlohmann::json;

namespace {

struct Common {
    std::uint64_t seed = 1;
    std::string out;
    std::string config;
    int threads = 0;
    bool recordTimings = false;
};

struct Inputs {
    std::string adjacency;
    std::string covariates;
    std::string format = "auto";
    std::string idColumn;
};

struct FitArgs {
    std::string dims = "auto";
    int d = 0;
    int dmax = 0;
    int kmax = 8;
    double alpha = 0.05;
    int draws = 1000;
    int permutations = 500;
    std::string calibration = "permutation";
    std::string eigenMethod = "auto";
    int emMaxIter = 1000;
    double emTol = 1e-8;
    bool varimax = false;
    double ciLevel = 0.95;
    int top = 15;
};

struct SimArgs {
    long n = 500;
    long p = 500;
    std::string dims = "1,3,1";
    double rho = 1.0;
    double kappa = 1.0;
    double within = 0.8;
    double between = 0.2;
    double degreeLow = 1.0;
    double degreeHigh = 5.0;
    double z3Variance = 0.2;
    double psiLow = 0.5;
    double psiHigh = 1.5;
    std::string noise = "gaussian";
    std::string format = "edge-list";
    double missingFraction = 0.0;
};

struct BenchArgs {
    std::string preset = "table3";
    std::string grid;
    int replicates = 0;
    long n = 0;
    long p = 0;
    int draws = 1000;
    int permutations = 500;
    std::string mode;
};

class Timer {
public:
    void stage(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        timings.emplace_back(name, std::chrono::duration<double>(now - last_).count());
        last_ = now;
    }
    std::vector<std::pair<std::string, double>> timings;

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

nf::FactorDims parse_dims(const std::string& text) {
    nf::FactorDims dims;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d,%d,%d%c", &dims.k1, &dims.k2, &dims.k3, &extra) != 3)
        throw nf::ParameterError("dims must look like k1,k2,k3, got '" + text + "'");
    dims.validate();
    return dims;
}

nf::EigenMethod parse_eigen_method(const std::string& s) {
    if (s == "auto") return nf::EigenMethod::Auto;
    if (s == "dense") return nf::EigenMethod::Dense;
    if (s == "lanczos") return nf::EigenMethod::Lanczos;
    throw nf::ParameterError("unknown eigen method '" + s + "'");
}

// Applies config-file values to options not given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw nf::ParseError("cannot open config '" + path + "'");
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw nf::ParseError("config '" + path + "': " + e.what());
    }
    if (!cfg.is_object()) throw nf::ParseError("config '" + path + "' must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        if (key == "config" || key == "out") throw nf::ParameterError("config key '" + key + "' is not allowed");
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr) throw nf::ParameterError("unknown config key '" + key + "' for " + sub->get_name());
        if (opt->count() > 0) continue;
        std::string text;
        if (value.is_string())
            text = value.get<std::string>();
        else if (value.is_boolean())
            text = value.get<bool>() ? "true" : "false";
        else if (value.is_number_unsigned())
            text = std::to_string(value.get<std::uint64_t>());
        else if (value.is_number_integer())
            text = std::to_string(value.get<std::int64_t>());
        else if (value.is_number_float())
            text = nf::io::format_double(value.get<double>());
        else
            throw nf::ParameterError("config key '" + key + "' must be a scalar");
        opt->add_result(text);
        opt->run_callback();
    }
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Root random seed");
    sub->add_option("--out", c.out, "Output directory")->required();
    sub->add_option("--config", c.config, "JSON file with option values (command-line flags win)");
    sub->add_option("--threads", c.threads, "Worker threads (default: NETFACTOR_THREADS or 1)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--record-timings", c.recordTimings, "Record wall-clock stage timings in the manifest");
}

void add_inputs(CLI::App* sub, Inputs& in) {
    sub->add_option("--adjacency", in.adjacency, "Edge list or MatrixMarket file")->required();
    sub->add_option("--covariates", in.covariates, "CSV covariate table with a header row")->required();
    sub->add_option("--format", in.format, "auto, edge-list or matrix-market");
    sub->add_option("--id-column", in.idColumn, "Covariate column holding node ids");
}

void add_fit(CLI::App* sub, FitArgs& f) {
    sub->add_option("--dims", f.dims, "auto or k1,k2,k3 (fixes all three)");
    sub->add_option("--d", f.d, "Fix the embedding dimension but keep the tests");
    sub->add_option("--dmax", f.dmax, "Largest dimension for scree selection (default min(n/10, 50))");
    sub->add_option("--kmax", f.kmax, "Largest k3 considered by the sequential test");
    sub->add_option("--alpha", f.alpha, "Test level");
    sub->add_option("--draws", f.draws, "Null draws for the k3 test");
    sub->add_option("--permutations", f.permutations, "Permutations for the Z1/Z2 split");
    sub->add_option("--calibration", f.calibration, "permutation or asymptotic");
    sub->add_option("--eigen-method", f.eigenMethod, "auto, dense or lanczos");
    sub->add_option("--em-max-iter", f.emMaxIter, "EM iteration limit");
    sub->add_option("--em-tol", f.emTol, "EM relative tolerance");
    sub->add_flag("--varimax", f.varimax, "Varimax-rotate the network loadings before reporting");
    sub->add_option("--ci-level", f.ciLevel, "Confidence level for loading intervals");
    sub->add_option("--top", f.top, "Rows per factor in the top-loading table");
}

json inputs_json(const Inputs& in) {
    return {{"adjacency", in.adjacency}, {"covariates", in.covariates}, {"format", in.format}, {"id-column", in.idColumn}};
}

json fit_json(const FitArgs& f) {
    return {{"dims", f.dims},       {"d", f.d},
            {"dmax", f.dmax},       {"kmax", f.kmax},
            {"alpha", f.alpha},     {"draws", f.draws},
            {"permutations", f.permutations}, {"calibration", f.calibration},
            {"eigen-method", f.eigenMethod},  {"em-max-iter", f.emMaxIter},
            {"em-tol", f.emTol},    {"varimax", f.varimax},
            {"ci-level", f.ciLevel}, {"top", f.top}};
}

nf::PipelineOptions pipeline_options(const FitArgs& f, const Common& c) {
    nf::PipelineOptions o;
    if (f.dims != "auto") {
        const auto dims = parse_dims(f.dims);
        dims.validate(true);
        o.d = dims.d();
        o.k1 = dims.k1;
        o.k3 = dims.k3;
        if (f.d > 0 && f.d != dims.d()) throw nf::ParameterError("--d conflicts with --dims");
    } else if (f.d > 0) {
        o.d = f.d;
    }
    o.dmax = f.dmax;
    o.kmax = f.kmax;
    o.alpha = f.alpha;
    o.M = f.draws;
    o.B = f.permutations;
    o.seed = c.seed;
    o.calibration = nf::parse_calibration(f.calibration);
    o.eig.method = parse_eigen_method(f.eigenMethod);
    o.em.maxIter = f.emMaxIter;
    o.em.tol = f.emTol;
    o.threads = nf::resolve_threads(c.threads);
    o.validate();
    return o;
}

struct LoadedInputs {
    nf::io::LoadedAdjacency adjacency;
    nf::io::LoadedCovariates covariates;
};

LoadedInputs load_inputs(const Inputs& in, nf::report::RunManifest& manifest) {
    LoadedInputs out;
    out.adjacency = nf::io::load_adjacency(in.adjacency, nf::io::parse_adjacency_format(in.format));
    out.covariates = nf::io::load_covariates(in.covariates, in.idColumn);
    nf::io::align_rows_to_nodes(out.covariates, out.adjacency.A.n(), out.adjacency.indexBase);
    if (out.covariates.data.Y.rows() != out.adjacency.A.n())
        throw nf::ParseError("covariates have " + std::to_string(out.covariates.data.Y.rows()) + " rows but the network has " +
                             std::to_string(out.adjacency.A.n()) + " nodes");
    manifest.inputs.emplace_back(in.adjacency, nf::io::file_digest(in.adjacency));
    manifest.inputs.emplace_back(in.covariates, nf::io::file_digest(in.covariates));
    for (const auto& w : out.adjacency.warnings) manifest.warnings.push_back("adjacency: " + w);
    for (const auto& w : out.covariates.warnings) manifest.warnings.push_back("covariates: " + w);
    return out;
}

void finish_manifest(nf::report::RunManifest& m, const Common& c, Timer& timer,
                     const std::vector<std::string>& outputs) {
    m.seed = c.seed;
    m.outputs = outputs;
    m.recordTimings = c.recordTimings;
    m.timings = timer.timings;
    nf::report::write_manifest(c.out, m);
}

int run_fit_like(const std::string& command, const Common& c, const Inputs& in, const FitArgs& f) {
    Timer timer;
    nf::report::RunManifest manifest;
    manifest.command = command;
    manifest.options = {{"inputs", inputs_json(in)}, {"fit", fit_json(f)}};
    nf::report::ensure_directory(c.out);
    const auto opts = pipeline_options(f, c);
    auto loaded = load_inputs(in, manifest);
    timer.stage("load");
    auto result = nf::fit_generalized_factor_model(loaded.adjacency.A, loaded.covariates.data, opts);
    timer.stage("fit");
    for (const auto& w : result.report.warnings) manifest.warnings.push_back(w);

    std::vector<std::string> outputs;
    if (command == "test") {
        nf::report::write_text(c.out + "/test_report.json", nf::report::test_report_json(result.report).dump(2) + "\n");
        outputs.push_back("test_report.json");
    } else {
        if (f.varimax && result.network.d > 1) nf::apply_varimax(result.factors, result.network.Zhat12);
        nf::report::FitArtifactOptions ao;
        ao.ciLevel = f.ciLevel;
        ao.topCount = f.top;
        ao.columns = loaded.covariates.columns;
        outputs = nf::report::write_fit_artifacts(c.out, result, ao);
        if (command == "impute") {
            const auto imputed = nf::impute_missing(loaded.covariates.data, result.factors, result.network.Zhat12);
            auto file = nf::io::open_output(c.out + "/imputed.csv");
            nf::io::write_covariates(file, nf::DataMatrix{imputed.Y, {}}, loaded.covariates.columns);
            outputs.push_back("imputed.csv");
            for (auto j : imputed.fullyMaskedColumns)
                manifest.warnings.push_back("column " + loaded.covariates.columns[static_cast<std::size_t>(j)] +
                                            " is fully masked; imputed with 0");
        }
    }
    timer.stage("write");
    finish_manifest(manifest, c, timer, outputs);
    std::cout << "selected dims (k1,k2,k3) = " << nf::to_string(result.report.selected) << "\n";
    return 0;
}

nf::SimConfig sim_config(const SimArgs& s, std::uint64_t seed) {
    nf::SimConfig cfg;
    cfg.n = s.n;
    cfg.p = s.p;
    cfg.dims = parse_dims(s.dims);
    cfg.rho = s.rho;
    cfg.kappa = s.kappa;
    cfg.withinProb = s.within;
    cfg.betweenProb = s.between;
    cfg.degreeLow = s.degreeLow;
    cfg.degreeHigh = s.degreeHigh;
    cfg.z3Variance = s.z3Variance;
    cfg.psiLow = s.psiLow;
    cfg.psiHigh = s.psiHigh;
    cfg.noise = nf::parse_noise_law(s.noise);
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

int run_simulate(const Common& c, const SimArgs& s) {
    Timer timer;
    nf::report::RunManifest manifest;
    manifest.command = "simulate";
    manifest.options = {{"n", s.n},
                        {"p", s.p},
                        {"dims", s.dims},
                        {"rho", s.rho},
                        {"kappa", s.kappa},
                        {"within", s.within},
                        {"between", s.between},
                        {"degree-low", s.degreeLow},
                        {"degree-high", s.degreeHigh},
                        {"z3-variance", s.z3Variance},
                        {"psi-low", s.psiLow},
                        {"psi-high", s.psiHigh},
                        {"noise", s.noise},
                        {"format", s.format},
                        {"missing-fraction", s.missingFraction}};
    if (!(s.missingFraction >= 0.0 && s.missingFraction < 1.0))
        throw nf::ParameterError("missing fraction must lie in [0, 1)");
    const auto format = nf::io::parse_adjacency_format(s.format);
    const auto cfg = sim_config(s, c.seed);
    nf::report::ensure_directory(c.out);
    const auto ds = nf::generate_dataset(cfg);
    timer.stage("generate");

    std::vector<std::string> outputs;
    const bool mtx = format == nf::io::AdjacencyFormat::MatrixMarket;
    const std::string adjName = mtx ? "adjacency.mtx" : "adjacency.edges";
    {
        auto file = nf::io::open_output(c.out + "/" + adjName);
        if (mtx)
            nf::io::write_matrix_market(file, ds.A);
        else
            nf::io::write_edge_list(file, ds.A);
        outputs.push_back(adjName);
    }
    const auto columns = nf::io::numbered("y", cfg.p);
    nf::DataMatrix data{ds.Y, {}};
    if (s.missingFraction > 0.0) {
        nf::Rng rng = nf::make_rng(c.seed, 0x6d61736b, 0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        data.missing = nf::Mask::Constant(ds.Y.rows(), ds.Y.cols(), false);
        for (nf::Index j = 0; j < ds.Y.cols(); ++j)
            for (nf::Index i = 0; i < ds.Y.rows(); ++i) data.missing(i, j) = u(rng) < s.missingFraction;
        auto full = nf::io::open_output(c.out + "/covariates_complete.csv");
        nf::io::write_covariates(full, nf::DataMatrix{ds.Y, {}}, columns);
        outputs.push_back("covariates_complete.csv");
    }
    {
        auto file = nf::io::open_output(c.out + "/covariates.csv");
        nf::io::write_covariates(file, data, columns);
        outputs.push_back("covariates.csv");
    }
    for (const auto& f : nf::report::write_truth(c.out + "/truth", ds.truth)) outputs.push_back("truth/" + f);
    timer.stage("write");
    finish_manifest(manifest, c, timer, outputs);
    std::cout << "wrote " << ds.A.n() << " nodes, " << ds.A.edge_count() << " edges, " << cfg.p << " covariates\n";
    return 0;
}

std::vector<nf::BenchCell> preset_cells(const BenchArgs& b, std::uint64_t seed) {
    auto base = [&](nf::FactorDims dims) {
        nf::BenchCell cell;
        cell.config.dims = dims;
        cell.config.n = b.n > 0 ? b.n : 500;
        cell.config.p = b.p > 0 ? b.p : cell.config.n;
        cell.config.seed = seed;
        cell.options.M = b.draws;
        cell.options.B = b.permutations;
        return cell;
    };
    std::vector<nf::BenchCell> cells;
    if (b.preset == "table3") {
        int x = 0;
        for (const auto dims : {nf::FactorDims{1, 1, 1}, nf::FactorDims{1, 1, 3}, nf::FactorDims{3, 1, 1}}) {
            auto cell = base(dims);
            cell.label = "dims" + nf::to_string(dims);
            cell.series = "table3";
            cell.x = ++x;
            cell.replicates = 50;
            cell.mode = nf::BenchMode::Testing;
            cell.config.seed = nf::derive_seed(seed, 0x7433, static_cast<std::uint64_t>(x));
            cells.push_back(cell);
        }
    } else if (b.preset == "fig2") {
        for (const double rho : {0.25, 0.5, 0.75, 1.0}) {
            auto cell = base({1, 3, 1});
            cell.label = "rho=" + nf::io::format_double(rho);
            cell.series = "rho";
            cell.x = rho;
            cell.replicates = 20;
            cell.mode = nf::BenchMode::Estimation;
            cell.config.rho = rho;
            cells.push_back(cell);
        }
    } else if (b.preset == "fig3") {
        for (const long n : {250L, 500L, 750L}) {
            auto cell = base({1, 3, 1});
            cell.config.n = n;
            cell.config.p = n;
            cell.label = "n=" + std::to_string(n);
            cell.series = "n";
            cell.x = static_cast<double>(n);
            cell.replicates = 20;
            cell.mode = nf::BenchMode::Estimation;
            cells.push_back(cell);
        }
    } else if (b.preset == "fig4") {
        for (const double kappa : {0.0, 0.1, 0.2, 0.3}) {
            auto cell = base({1, 3, 1});
            cell.label = "kappa=" + nf::io::format_double(kappa);
            cell.series = "kappa";
            cell.x = kappa;
            cell.replicates = 50;
            cell.mode = nf::BenchMode::Testing;
            cell.config.kappa = kappa;
            cells.push_back(cell);
        }
    } else if (b.preset == "empty") {
        return cells;
    } else {
        throw nf::ParameterError("unknown preset '" + b.preset + "' (table3, fig2, fig3, fig4, empty)");
    }
    return cells;
}

// Grid file: {"cells": [{"label": ..., "dims": "k1,k2,k3", "n": ..., ...}, ...]}
std::vector<nf::BenchCell> grid_cells(const BenchArgs& b, std::uint64_t seed) {
    std::ifstream in(b.grid);
    if (!in) throw nf::ParseError("cannot open grid '" + b.grid + "'");
    json g;
    try {
        in >> g;
    } catch (const json::exception& e) {
        throw nf::ParseError("grid '" + b.grid + "': " + e.what());
    }
    std::vector<nf::BenchCell> cells;
    if (!g.contains("cells") || !g["cells"].is_array()) throw nf::ParseError("grid needs a 'cells' array");
    int index = 0;
    for (const auto& c : g["cells"]) {
        nf::BenchCell cell;
        try {
            cell.label = c.value("label", "cell" + std::to_string(index + 1));
            cell.series = c.value("series", std::string());
            cell.x = c.value("x", static_cast<double>(index + 1));
            cell.config.dims = parse_dims(c.value("dims", std::string("1,3,1")));
            cell.config.n = c.value("n", 500L);
            cell.config.p = c.value("p", static_cast<long>(cell.config.n));
            cell.config.rho = c.value("rho", 1.0);
            cell.config.kappa = c.value("kappa", 1.0);
            cell.config.noise = nf::parse_noise_law(c.value("noise", std::string("gaussian")));
            cell.config.seed = nf::derive_seed(seed, 0x67726964, static_cast<std::uint64_t>(index));
            cell.replicates = c.value("replicates", 20);
            cell.mode = nf::parse_bench_mode(c.value("mode", std::string("testing")));
            cell.options.M = c.value("draws", b.draws);
            cell.options.B = c.value("permutations", b.permutations);
        } catch (const json::exception& e) {
            throw nf::ParseError("grid cell " + std::to_string(index + 1) + ": " + e.what());
        }
        cells.push_back(cell);
        ++index;
    }
    return cells;
}

int run_benchmark_cmd(const Common& c, const BenchArgs& b) {
    Timer timer;
    nf::report::RunManifest manifest;
    manifest.command = "benchmark";
    manifest.options = {{"preset", b.preset},   {"grid", b.grid},
                        {"replicates", b.replicates}, {"n", b.n},
                        {"p", b.p},             {"draws", b.draws},
                        {"permutations", b.permutations}, {"mode", b.mode}};
    auto cells = b.grid.empty() ? preset_cells(b, c.seed) : grid_cells(b, c.seed);
    for (auto& cell : cells) {
        if (b.replicates > 0) cell.replicates = b.replicates;
        if (!b.mode.empty()) cell.mode = nf::parse_bench_mode(b.mode);
    }
    if (!b.grid.empty()) manifest.inputs.emplace_back(b.grid, nf::io::file_digest(b.grid));
    nf::report::ensure_directory(c.out);
    const auto result = nf::run_benchmark(cells, nf::resolve_threads(c.threads));
    result.check_consistency();
    timer.stage("replicates");
    for (const auto& r : result.records)
        if (!r.ok) manifest.warnings.push_back(r.cell + " replicate " + std::to_string(r.replicate) + " failed: " + r.error);
    const auto outputs = nf::report::write_benchmark(c.out, result, c.recordTimings);
    timer.stage("write");
    finish_manifest(manifest, c, timer, outputs);
    for (const auto& s : result.summaries)
        std::cout << s.label << ": k1 " << s.k1.mean << " (" << s.k1.sd << "), k3 " << s.k3.mean << " (" << s.k3.sd
                  << "), align Z " << s.alignZ.mean << ", align Lambda " << s.alignLambda.mean << ", failures "
                  << s.failures << "\n";
    return 0;
}

int exit_code(nf::ErrorKind kind) {
    switch (kind) {
    case nf::ErrorKind::Parameter:
    case nf::ErrorKind::Parse: return 2;
    case nf::ErrorKind::Resource: return 4;
    default: return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized factor model for network-linked data"};
    app.set_version_flag("--version", std::string(nf::kVersion));
    app.require_subcommand(1);

    Common common;
    Inputs inputs;
    FitArgs fitArgs;
    SimArgs simArgs;
    BenchArgs benchArgs;

    auto* simulate = app.add_subcommand("simulate", "Draw a synthetic network and covariate matrix");
    add_common(simulate, common);
    simulate->add_option("--n", simArgs.n, "Nodes");
    simulate->add_option("--p", simArgs.p, "Covariates");
    simulate->add_option("--dims", simArgs.dims, "k1,k2,k3");
    simulate->add_option("--rho", simArgs.rho, "Network density multiplier");
    simulate->add_option("--kappa", simArgs.kappa, "Loading signal multiplier");
    simulate->add_option("--within", simArgs.within, "Within-block probability");
    simulate->add_option("--between", simArgs.between, "Between-block probability");
    simulate->add_option("--degree-low", simArgs.degreeLow, "Lower end of the degree law");
    simulate->add_option("--degree-high", simArgs.degreeHigh, "Upper end of the degree law");
    simulate->add_option("--z3-variance", simArgs.z3Variance, "Variance of covariate-only factors");
    simulate->add_option("--psi-low", simArgs.psiLow, "Lower end of the noise variance law");
    simulate->add_option("--psi-high", simArgs.psiHigh, "Upper end of the noise variance law");
    simulate->add_option("--noise", simArgs.noise, "gaussian or uniform");
    simulate->add_option("--format", simArgs.format, "edge-list or matrix-market");
    simulate->add_option("--missing-fraction", simArgs.missingFraction, "Share of covariate cells left empty");

    auto* fit = app.add_subcommand("fit", "Estimate the model and run all tests");
    add_common(fit, common);
    add_inputs(fit, inputs);
    add_fit(fit, fitArgs);

    auto* test = app.add_subcommand("test", "Run the dimension tests only");
    add_common(test, common);
    add_inputs(test, inputs);
    add_fit(test, fitArgs);

    auto* impute = app.add_subcommand("impute", "Fit on observed entries and fill empty covariate cells");
    add_common(impute, common);
    add_inputs(impute, inputs);
    add_fit(impute, fitArgs);

    auto* bench = app.add_subcommand("benchmark", "Replicate simulation studies");
    add_common(bench, common);
    bench->add_option("--preset", benchArgs.preset, "table3, fig2, fig3, fig4 or empty");
    bench->add_option("--grid", benchArgs.grid, "JSON grid file (overrides --preset)");
    bench->add_option("--replicates", benchArgs.replicates, "Replicates per cell (default from the preset)");
    bench->add_option("--n", benchArgs.n, "Nodes (default 500)");
    bench->add_option("--p", benchArgs.p, "Covariates (default n)");
    bench->add_option("--draws", benchArgs.draws, "Null draws for the k3 test");
    bench->add_option("--permutations", benchArgs.permutations, "Permutations for the split");
    bench->add_option("--mode", benchArgs.mode, "estimation, testing or full (default from the preset)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        apply_config(active, common.config);
        if (active == simulate) return run_simulate(common, simArgs);
        if (active == bench) return run_benchmark_cmd(common, benchArgs);
        return run_fit_like(active->get_name(), common, inputs, fitArgs);
    } catch (const nf::PipelineError& e) {
        std::cerr << "error (" << nf::to_string(e.kind()) << ") in stage " << e.stage() << ": " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const nf::Error& e) {
        std::cerr << "error (" << nf::to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
