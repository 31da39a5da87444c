#include "netfactor/inference.hpp"

#include "netfactor/linalg.hpp"
#include "netfactor/parallel.hpp"

#include <algorithm>

namespace netfactor {

void PipelineOptions::validate() const {
    if (d && *d < 1) throw ParameterError("d must be at least 1");
    if (dmax < 0) throw ParameterError("dmax must be nonnegative");
    if (k1 && (*k1 < 0 || (d && *k1 > *d))) throw ParameterError("k1 must lie in [0, d]");
    if (k3 && *k3 < 0) throw ParameterError("k3 must be nonnegative");
    if (kmax < 1) throw ParameterError("kmax must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    if (M < 1) throw ParameterError("M must be positive");
    if (B < 1) throw ParameterError("B must be positive");
    if (threads < 0) throw ParameterError("threads must be nonnegative");
}

namespace {

template <class Fn>
void run_stage(const char* stage, const std::shared_ptr<PipelineResult>& partial, Fn&& fn) {
    try {
        fn();
        partial->completedStage = stage;
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(e.kind(), stage, e.what(), partial);
    } catch (const std::bad_alloc&) {
        throw PipelineError(ErrorKind::Resource, stage, "out of memory", partial);
    }
}

double network_density(const AdjacencyMatrix& A) { return A.density(); }
double network_density(const Matrix&) { return 1.0; }

// Centered covariates; masked cells take the fitted values of the completed matrix.
Matrix centered_for_split(const DataMatrix& data, const FactorFit& fit, const Matrix& Zhat12) {
    if (!data.has_missing()) return data.Y.rowwise() - fit.muHat.transpose();
    return linalg::center_columns(impute_missing(data, fit, Zhat12).Y);
}

template <class Network>
PipelineResult run_pipeline(const Network& A, Index nNodes, const DataMatrix& data, const PipelineOptions& opts) {
    opts.validate();
    data.validate();
    if (data.Y.rows() != nNodes)
        throw ParameterError("network has " + std::to_string(nNodes) + " nodes but covariates have " +
                             std::to_string(data.Y.rows()) + " rows");
    const Index n = nNodes;
    const Index p = data.Y.cols();
    if (n < 4 || p < 1) throw ParameterError("need at least 4 nodes and one covariate");
    const int threads = resolve_threads(opts.threads);
    auto partial = std::make_shared<PipelineResult>();
    TestReport& report = partial->report;
    report.seed = opts.seed;

    run_stage("embedding", partial, [&] {
        if (opts.d) {
            report.d = *opts.d;
        } else {
            int dmax = opts.dmax > 0 ? opts.dmax : std::min<int>(static_cast<int>(n / 10), 50);
            dmax = std::clamp<int>(dmax, 1, static_cast<int>(n - 2));
            report.d = select_embedding_dim(A, dmax, opts.eig);
            report.dSelected = true;
        }
        partial->network = ase_fit(A, report.d, opts.eig);
        for (const auto& w : partial->network.warnings) report.warnings.push_back(w);
        if (network_density(A) < 1e-3)
            report.warnings.push_back("network is very sparse; embedding guarantees may not apply");
    });
    const int d = report.d;
    const Matrix& Zhat12 = partial->network.Zhat12;

    auto step2 = [&](int k3) {
        return data.has_missing() ? fit_factor_model_masked(data, Zhat12, k3, opts.em)
                                  : fit_factor_model(data.Y, Zhat12, k3, opts.em);
    };

    int k3Hat = 0;
    run_stage("k3-test", partial, [&] {
        partial->factors = step2(0);
        if (opts.k3) {
            k3Hat = *opts.k3;
            return;
        }
        const Index rank = std::min<Index>(n - 1 - d, p);
        const int kmax = static_cast<int>(std::min<Index>(opts.kmax, rank - 2));
        if (kmax < 1) {
            report.warnings.push_back("residual rank too small for the k3 test; k3 set to 0");
            return;
        }
        const FactorFit& base = partial->factors;
        const double signal = (base.residual + Zhat12 * base.Lambda12Hat.transpose()).norm();
        if (base.residual.norm() <= 1e-12 * signal) {
            report.warnings.push_back("residual vanishes after the network factors; k3 set to 0");
            return;
        }
        if (kmax < opts.kmax)
            report.warnings.push_back("kmax reduced to " + std::to_string(kmax) + " by the residual rank");
        report.k3Test = sequential_k3_test(partial->factors.residual, kmax, opts.alpha, opts.M, opts.seed,
                                           1 + d, threads);
        report.M = opts.M;
        k3Hat = report.k3Test->k3Hat;
    });

    run_stage("factor-fit", partial, [&] {
        if (k3Hat > 0) partial->factors = step2(k3Hat);
        for (const auto& w : partial->factors.warnings) report.warnings.push_back(w);
    });

    int k1Hat = 0;
    run_stage("split", partial, [&] {
        const FactorFit& fit = partial->factors;
        const Vector S = column_test_statistics(fit.Lambda12Hat, Zhat12, fit.PsiHat);
        std::vector<double> pv(static_cast<std::size_t>(d));
        for (int l = 0; l < d; ++l) pv[static_cast<std::size_t>(l)] = normal_upper_pvalue(S(l));
        report.fisher = fisher_global_test(pv);
        if (report.fisher.floored) report.warnings.push_back("a column p-value underflowed and was floored at 1e-300");
        if (opts.k1) {
            k1Hat = *opts.k1;
            if (k1Hat > d) throw ParameterError("k1 exceeds the embedding dimension");
            return;
        }
        if (opts.calibration == SplitCalibration::Permutation) {
            report.split = permutation_split(centered_for_split(data, fit, Zhat12), Zhat12, fit.PsiHat, opts.B,
                                             opts.alpha, opts.seed, threads);
            report.B = opts.B;
        } else {
            report.split = asymptotic_split(fit.Lambda12Hat, Zhat12, fit.PsiHat, opts.alpha);
        }
        k1Hat = report.split->k1Hat;
    });

    report.selected = FactorDims{k1Hat, d - k1Hat, k3Hat};
    partial->completedStage = "done";
    return std::move(*partial);
}

}  // namespace

PipelineResult fit_generalized_factor_model(const AdjacencyMatrix& A, const DataMatrix& Y,
                                            const PipelineOptions& opts) {
    return run_pipeline(A, A.n(), Y, opts);
}

PipelineResult fit_generalized_factor_model(const Matrix& Asurrogate, const DataMatrix& Y,
                                            const PipelineOptions& opts) {
    if (Asurrogate.rows() != Asurrogate.cols()) throw ParameterError("network matrix is not square");
    return run_pipeline(Asurrogate, Asurrogate.rows(), Y, opts);
}

}  // namespace netfactor
