#pragma once

#include "netfactor/adjacency.hpp"
#include "netfactor/factor_fit.hpp"
#include "netfactor/types.hpp"

#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace netfactor::io {

enum class AdjacencyFormat { Auto, EdgeList, MatrixMarket };
AdjacencyFormat parse_adjacency_format(const std::string& name);

struct LoadedAdjacency {
    AdjacencyMatrix A;
    int indexBase = 0;
    std::size_t selfLoopsDropped = 0;
    std::size_t duplicatesMerged = 0;
    std::vector<std::string> warnings;
};

/// Edge list: one "u v" pair per line (tab or space separated). Lines starting
/// with '#' are comments, except the directives "# index-base: 0|1" (default 0)
/// and "# nodes: N" (default: largest index + 1).
LoadedAdjacency parse_edge_list(std::istream& in);
/// MatrixMarket coordinate format (pattern, integer or real entries equal to
/// 0 or 1; symmetric or general).
LoadedAdjacency parse_matrix_market(std::istream& in);
/// Auto picks MatrixMarket for a ".mtx" extension and the edge list otherwise.
LoadedAdjacency load_adjacency(const std::string& path, AdjacencyFormat format = AdjacencyFormat::Auto);

void write_edge_list(std::ostream& out, const AdjacencyMatrix& A);
void write_matrix_market(std::ostream& out, const AdjacencyMatrix& A);

struct LoadedCovariates {
    DataMatrix data;
    std::vector<std::string> columns;  ///< header names (id column excluded)
    std::vector<std::string> ids;      ///< values of the id column, empty without one
    std::vector<std::string> warnings;
};

/// Comma-separated table with a header row. Empty cells become missing
/// entries. With a non-empty `idColumn`, that column is read as row ids.
LoadedCovariates parse_covariates(std::istream& in, const std::string& idColumn = "");
LoadedCovariates load_covariates(const std::string& path, const std::string& idColumn = "");

/// Reorders rows so that row i holds node i, reading ids as integer node
/// labels in the given index base. Throws ParseError unless the ids are a
/// permutation of the n nodes.
void align_rows_to_nodes(LoadedCovariates& cov, Index n, int indexBase);

/// Shortest decimal form that reads back to the same double ("%.17g").
std::string format_double(double v);

/// CSV with a header row; `rowLabels` (optional) becomes the first column.
void write_matrix_csv(std::ostream& out, const Matrix& M, const std::vector<std::string>& header,
                      const std::vector<std::string>& rowLabels = {}, const std::string& rowLabelName = "");
void write_matrix_csv(const std::string& path, const Matrix& M, const std::vector<std::string>& header,
                      const std::vector<std::string>& rowLabels = {}, const std::string& rowLabelName = "");

/// Covariate CSV with empty cells at missing entries.
void write_covariates(std::ostream& out, const DataMatrix& data, const std::vector<std::string>& columns);

/// Opens a file for writing or throws ResourceError.
std::ofstream open_output(const std::string& path);

/// "fnv1a64:<16 hex digits>" digest of a file's bytes.
std::string file_digest(const std::string& path);
std::string bytes_digest(const std::string& bytes);

/// Names "prefix1" ... "prefixK".
std::vector<std::string> numbered(const std::string& prefix, Index count);

}  // namespace netfactor::io
