#pragma once

#include "netfactor/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace netfactor {

/// Symmetric 0/1 adjacency matrix with zero diagonal, stored as sorted
/// neighbor lists (CSR).
class AdjacencyMatrix {
public:
    struct BuildStats {
        std::size_t selfLoopsDropped = 0;
        std::size_t duplicatesMerged = 0;
    };

    AdjacencyMatrix() = default;
    explicit AdjacencyMatrix(Index n);

    /// Undirected edges (u, v) with 0-based endpoints; each pair may appear in
    /// either orientation. Self loops are dropped and duplicates merged, both
    /// counted in `stats`.
    static AdjacencyMatrix from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges,
                                      BuildStats* stats = nullptr);

    /// Validates a dense 0/1 matrix: symmetric, binary, zero diagonal.
    static AdjacencyMatrix from_dense(const Matrix& A);

    Index n() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return indices_.size() / 2; }
    double density() const noexcept;

    /// Sorted neighbors of node i.
    const std::int64_t* neighbors_begin(Index i) const { return indices_.data() + offsets_[i]; }
    const std::int64_t* neighbors_end(Index i) const { return indices_.data() + offsets_[i + 1]; }
    Index degree(Index i) const { return static_cast<Index>(offsets_[i + 1] - offsets_[i]); }
    Vector degrees() const;
    bool has_edge(Index i, Index j) const;

    /// A * X.
    Matrix multiply(const Matrix& X) const;
    Matrix to_dense() const;

    /// Edge list with u < v, sorted lexicographically.
    std::vector<std::pair<Index, Index>> edges() const;

    friend bool operator==(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
        return a.n_ == b.n_ && a.offsets_ == b.offsets_ && a.indices_ == b.indices_;
    }

private:
    Index n_ = 0;
    std::vector<std::int64_t> offsets_{0};
    std::vector<std::int64_t> indices_;
};

}  // namespace netfactor
