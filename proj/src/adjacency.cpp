#include "netfactor/adjacency.hpp"

#include "netfactor/error.hpp"

#include <algorithm>

namespace netfactor {

AdjacencyMatrix::AdjacencyMatrix(Index n) : n_(n), offsets_(static_cast<std::size_t>(n) + 1, 0) {
    if (n < 0) throw ParameterError("AdjacencyMatrix: negative node count");
}

AdjacencyMatrix AdjacencyMatrix::from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges,
                                            BuildStats* stats) {
    AdjacencyMatrix A(n);
    BuildStats local;
    std::vector<std::pair<std::int64_t, std::int64_t>> arcs;
    arcs.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw ParameterError("AdjacencyMatrix: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                 ") outside [0, " + std::to_string(n) + ")");
        if (u == v) {
            ++local.selfLoopsDropped;
            continue;
        }
        arcs.emplace_back(u, v);
        arcs.emplace_back(v, u);
    }
    std::sort(arcs.begin(), arcs.end());
    const auto last = std::unique(arcs.begin(), arcs.end());
    local.duplicatesMerged = static_cast<std::size_t>(arcs.end() - last) / 2;
    arcs.erase(last, arcs.end());
    A.indices_.reserve(arcs.size());
    for (const auto& [u, v] : arcs) {
        ++A.offsets_[static_cast<std::size_t>(u) + 1];
        A.indices_.push_back(v);
    }
    for (std::size_t i = 1; i < A.offsets_.size(); ++i) A.offsets_[i] += A.offsets_[i - 1];
    if (stats != nullptr) *stats = local;
    return A;
}

AdjacencyMatrix AdjacencyMatrix::from_dense(const Matrix& M) {
    if (M.rows() != M.cols()) throw ParameterError("AdjacencyMatrix: matrix is not square");
    const Index n = M.rows();
    std::vector<std::pair<Index, Index>> edges;
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            const double a = M(i, j);
            if (a != 0.0 && a != 1.0)
                throw ParameterError("AdjacencyMatrix: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                     ") is not 0/1");
            if (a != M(j, i)) throw ParameterError("AdjacencyMatrix: matrix is not symmetric");
            if (i == j && a != 0.0) throw ParameterError("AdjacencyMatrix: nonzero diagonal entry");
            if (i < j && a == 1.0) edges.emplace_back(i, j);
        }
    }
    return from_edges(n, edges);
}

double AdjacencyMatrix::density() const noexcept {
    if (n_ < 2) return 0.0;
    return static_cast<double>(indices_.size()) / (static_cast<double>(n_) * static_cast<double>(n_ - 1));
}

Vector AdjacencyMatrix::degrees() const {
    Vector d(n_);
    for (Index i = 0; i < n_; ++i) d(i) = static_cast<double>(degree(i));
    return d;
}

bool AdjacencyMatrix::has_edge(Index i, Index j) const {
    return std::binary_search(neighbors_begin(i), neighbors_end(i), static_cast<std::int64_t>(j));
}

Matrix AdjacencyMatrix::multiply(const Matrix& X) const {
    if (X.rows() != n_) throw ParameterError("AdjacencyMatrix::multiply: row mismatch");
    Matrix out = Matrix::Zero(n_, X.cols());
    for (Index c = 0; c < X.cols(); ++c) {
        const double* x = X.col(c).data();
        double* y = out.col(c).data();
        for (Index i = 0; i < n_; ++i) {
            double s = 0.0;
            for (auto it = neighbors_begin(i); it != neighbors_end(i); ++it) s += x[*it];
            y[i] = s;
        }
    }
    return out;
}

Matrix AdjacencyMatrix::to_dense() const {
    Matrix A = Matrix::Zero(n_, n_);
    for (Index i = 0; i < n_; ++i)
        for (auto it = neighbors_begin(i); it != neighbors_end(i); ++it) A(i, *it) = 1.0;
    return A;
}

std::vector<std::pair<Index, Index>> AdjacencyMatrix::edges() const {
    std::vector<std::pair<Index, Index>> out;
    out.reserve(edge_count());
    for (Index i = 0; i < n_; ++i)
        for (auto it = neighbors_begin(i); it != neighbors_end(i); ++it)
            if (*it > i) out.emplace_back(i, static_cast<Index>(*it));
    return out;
}

}  // namespace netfactor
