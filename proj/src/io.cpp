#include "netfactor/io.hpp"

#include "netfactor/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace netfactor::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_long(const std::string& token, long long& value) {
    const char* first = token.data();
    const char* last = first + token.size();
    const auto res = std::from_chars(first, last, value);
    return res.ec == std::errc() && res.ptr == last;
}

bool parse_double(const std::string& token, double& value) {
    std::string t = token;
    const char* first = t.data();
    const char* last = first + t.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(value);
}

std::vector<std::string> split_whitespace(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return in;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

void summarize_adjacency_warnings(LoadedAdjacency& out) {
    if (out.selfLoopsDropped > 0)
        out.warnings.push_back("dropped " + std::to_string(out.selfLoopsDropped) + " self-loop(s)");
    if (out.duplicatesMerged > 0)
        out.warnings.push_back("merged " + std::to_string(out.duplicatesMerged) + " duplicate edge(s)");
}

}  // namespace

AdjacencyFormat parse_adjacency_format(const std::string& name) {
    if (name == "auto") return AdjacencyFormat::Auto;
    if (name == "edge-list" || name == "edgelist") return AdjacencyFormat::EdgeList;
    if (name == "matrix-market" || name == "mtx") return AdjacencyFormat::MatrixMarket;
    throw ParameterError("unknown adjacency format '" + name + "' (expected auto, edge-list or matrix-market)");
}

LoadedAdjacency parse_edge_list(std::istream& in) {
    LoadedAdjacency out;
    long long declaredNodes = -1;
    std::vector<std::pair<long long, long long>> raw;
    std::vector<long> rawLines;
    std::string line;
    long lineNo = 0;
    bool seenEdge = false;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::string body = trim(t.substr(1));
            const auto colon = body.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = lower(trim(body.substr(0, colon)));
            const std::string value = trim(body.substr(colon + 1));
            if (key == "index-base") {
                long long base = 0;
                if (seenEdge) throw ParseError("index-base directive must precede the edges", lineNo, 1);
                if (!parse_long(value, base) || (base != 0 && base != 1))
                    throw ParseError("index-base must be 0 or 1, got '" + value + "'", lineNo, 1);
                out.indexBase = static_cast<int>(base);
            } else if (key == "nodes") {
                if (!parse_long(value, declaredNodes) || declaredNodes < 0)
                    throw ParseError("nodes must be a nonnegative integer, got '" + value + "'", lineNo, 1);
            }
            continue;
        }
        const auto tokens = split_whitespace(t);
        if (tokens.size() != 2)
            throw ParseError("expected two node indices, found " + std::to_string(tokens.size()) + " field(s)", lineNo,
                             1);
        long long u = 0;
        long long v = 0;
        if (!parse_long(tokens[0], u)) throw ParseError("invalid node index '" + tokens[0] + "'", lineNo, 1);
        if (!parse_long(tokens[1], v))
            throw ParseError("invalid node index '" + tokens[1] + "'", lineNo,
                             static_cast<long>(t.find(tokens[1], tokens[0].size()) + 1));
        raw.emplace_back(u, v);
        rawLines.push_back(lineNo);
        seenEdge = true;
    }
    long long maxIndex = -1;
    std::vector<std::pair<Index, Index>> edges;
    edges.reserve(raw.size());
    for (std::size_t e = 0; e < raw.size(); ++e) {
        const long long u = raw[e].first - out.indexBase;
        const long long v = raw[e].second - out.indexBase;
        if (u < 0 || v < 0)
            throw ParseError("node index below the index base " + std::to_string(out.indexBase), rawLines[e], 1);
        if (declaredNodes >= 0 && (u >= declaredNodes || v >= declaredNodes))
            throw ParseError("node index exceeds the declared node count " + std::to_string(declaredNodes),
                             rawLines[e], 1);
        maxIndex = std::max({maxIndex, u, v});
        edges.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
    }
    const Index n = static_cast<Index>(declaredNodes >= 0 ? declaredNodes : maxIndex + 1);
    AdjacencyMatrix::BuildStats stats;
    out.A = AdjacencyMatrix::from_edges(n, edges, &stats);
    out.selfLoopsDropped = stats.selfLoopsDropped;
    out.duplicatesMerged = stats.duplicatesMerged;
    summarize_adjacency_warnings(out);
    return out;
}

LoadedAdjacency parse_matrix_market(std::istream& in) {
    LoadedAdjacency out;
    out.indexBase = 1;
    std::string line;
    long lineNo = 0;
    if (!std::getline(in, line)) throw ParseError("empty MatrixMarket file", 1, 1);
    ++lineNo;
    const auto header = split_whitespace(lower(line));
    if (header.size() != 5 || header[0] != "%%matrixmarket" || header[1] != "matrix" || header[2] != "coordinate")
        throw ParseError("expected '%%MatrixMarket matrix coordinate <field> <symmetry>' header", 1, 1);
    const std::string field = header[3];
    const std::string symmetry = header[4];
    if (field != "pattern" && field != "integer" && field != "real")
        throw ParseError("unsupported MatrixMarket field '" + field + "'", 1, 1);
    if (symmetry != "symmetric" && symmetry != "general")
        throw ParseError("unsupported MatrixMarket symmetry '" + symmetry + "'", 1, 1);

    long long rows = -1, cols = -1, nnz = -1;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;
        const auto tokens = split_whitespace(t);
        if (tokens.size() != 3 || !parse_long(tokens[0], rows) || !parse_long(tokens[1], cols) ||
            !parse_long(tokens[2], nnz))
            throw ParseError("expected 'rows cols entries' size line", lineNo, 1);
        break;
    }
    if (rows < 0) throw ParseError("missing size line", lineNo, 1);
    if (rows != cols) throw ParseError("adjacency matrix must be square", lineNo, 1);

    const std::size_t expectedFields = field == "pattern" ? 2 : 3;
    std::vector<std::pair<Index, Index>> edges;
    std::vector<std::pair<Index, Index>> directed;
    long long entries = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;
        const auto tokens = split_whitespace(t);
        if (tokens.size() != expectedFields)
            throw ParseError("expected " + std::to_string(expectedFields) + " fields", lineNo, 1);
        long long i = 0, j = 0;
        if (!parse_long(tokens[0], i) || !parse_long(tokens[1], j) || i < 1 || j < 1 || i > rows || j > rows)
            throw ParseError("invalid coordinate", lineNo, 1);
        ++entries;
        if (expectedFields == 3) {
            double value = 0.0;
            if (!parse_double(tokens[2], value) || (value != 0.0 && value != 1.0))
                throw ParseError("adjacency entries must be 0 or 1, got '" + tokens[2] + "'", lineNo, 1);
            if (value == 0.0) continue;
        }
        edges.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1));
        if (symmetry == "general" && i != j) directed.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1));
    }
    if (entries != nnz)
        throw ParseError("size line declares " + std::to_string(nnz) + " entries, found " + std::to_string(entries),
                         lineNo, 1);
    if (symmetry == "general") {
        std::sort(directed.begin(), directed.end());
        directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
        std::size_t unmatched = 0;
        for (const auto& [a, b] : directed)
            if (!std::binary_search(directed.begin(), directed.end(), std::make_pair(b, a))) ++unmatched;
        if (unmatched > 0)
            out.warnings.push_back("symmetrized " + std::to_string(unmatched) + " one-directional entr" +
                                   (unmatched == 1 ? "y" : "ies"));
    }
    AdjacencyMatrix::BuildStats stats;
    out.A = AdjacencyMatrix::from_edges(static_cast<Index>(rows), edges, &stats);
    out.selfLoopsDropped = stats.selfLoopsDropped;
    // A general matrix lists both orientations of each edge.
    out.duplicatesMerged = symmetry == "general" ? 0 : stats.duplicatesMerged;
    summarize_adjacency_warnings(out);
    return out;
}

LoadedAdjacency load_adjacency(const std::string& path, AdjacencyFormat format) {
    if (format == AdjacencyFormat::Auto) {
        const bool mtx = path.size() >= 4 && lower(path.substr(path.size() - 4)) == ".mtx";
        format = mtx ? AdjacencyFormat::MatrixMarket : AdjacencyFormat::EdgeList;
    }
    std::ifstream in = open_input(path);
    try {
        return format == AdjacencyFormat::MatrixMarket ? parse_matrix_market(in) : parse_edge_list(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_edge_list(std::ostream& out, const AdjacencyMatrix& A) {
    out << "# index-base: 0\n# nodes: " << A.n() << '\n';
    for (const auto& [u, v] : A.edges()) out << u << '\t' << v << '\n';
}

void write_matrix_market(std::ostream& out, const AdjacencyMatrix& A) {
    const auto edges = A.edges();
    out << "%%MatrixMarket matrix coordinate pattern symmetric\n";
    out << A.n() << ' ' << A.n() << ' ' << edges.size() << '\n';
    // Lower triangle, 1-based.
    for (const auto& [u, v] : edges) out << v + 1 << ' ' << u + 1 << '\n';
}

namespace {

std::vector<std::string> split_csv(const std::string& line, long lineNo) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", lineNo, static_cast<long>(line.size()));
    out.push_back(cur);
    return out;
}

}  // namespace

LoadedCovariates parse_covariates(std::istream& in, const std::string& idColumn) {
    LoadedCovariates out;
    std::string line;
    long lineNo = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!trim(line).empty()) {
            header = split_csv(line, lineNo);
            break;
        }
    }
    if (header.empty()) throw ParseError("covariate file has no header row");
    for (auto& h : header) h = trim(h);
    long idIndex = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!idColumn.empty() && header[c] == idColumn) {
            idIndex = static_cast<long>(c);
            continue;
        }
        out.columns.push_back(header[c]);
    }
    if (!idColumn.empty() && idIndex < 0) throw ParseError("id column '" + idColumn + "' not found in header", lineNo, 1);

    std::vector<std::vector<double>> rows;
    std::vector<std::vector<bool>> missing;
    const std::size_t width = header.size();
    while (std::getline(in, line)) {
        ++lineNo;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line, lineNo);
        if (cells.size() != width)
            throw ParseError("row has " + std::to_string(cells.size()) + " fields, header has " + std::to_string(width),
                             lineNo, 1);
        std::vector<double> values;
        std::vector<bool> miss;
        for (std::size_t c = 0; c < width; ++c) {
            const std::string cell = trim(cells[c]);
            if (static_cast<long>(c) == idIndex) {
                if (cell.empty()) throw ParseError("empty id", lineNo, static_cast<long>(c + 1));
                out.ids.push_back(cell);
                continue;
            }
            if (cell.empty()) {
                values.push_back(0.0);
                miss.push_back(true);
                continue;
            }
            double v = 0.0;
            if (!parse_double(cell, v))
                throw ParseError("non-numeric cell '" + cell + "'", lineNo, static_cast<long>(c + 1));
            values.push_back(v);
            miss.push_back(false);
        }
        rows.push_back(std::move(values));
        missing.push_back(std::move(miss));
    }
    const Index n = static_cast<Index>(rows.size());
    const Index p = static_cast<Index>(out.columns.size());
    out.data.Y.resize(n, p);
    Mask mask(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) {
            out.data.Y(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            mask(i, j) = missing[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    if (mask.any()) {
        out.data.missing = std::move(mask);
        out.warnings.push_back(std::to_string(out.data.missing_count()) + " empty cell(s) treated as missing");
    }
    return out;
}

LoadedCovariates load_covariates(const std::string& path, const std::string& idColumn) {
    std::ifstream in = open_input(path);
    try {
        return parse_covariates(in, idColumn);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void align_rows_to_nodes(LoadedCovariates& cov, Index n, int indexBase) {
    if (cov.ids.empty()) return;
    if (static_cast<Index>(cov.ids.size()) != n)
        throw ParseError("covariates have " + std::to_string(cov.ids.size()) + " rows for " + std::to_string(n) +
                         " nodes");
    std::vector<Index> target(cov.ids.size());
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (std::size_t r = 0; r < cov.ids.size(); ++r) {
        long long id = 0;
        if (!parse_long(cov.ids[r], id)) throw ParseError("id '" + cov.ids[r] + "' is not an integer node label");
        id -= indexBase;
        if (id < 0 || id >= n || seen[static_cast<std::size_t>(id)])
            throw ParseError("id '" + cov.ids[r] + "' is out of range or repeated");
        seen[static_cast<std::size_t>(id)] = true;
        target[r] = static_cast<Index>(id);
    }
    Matrix Y(cov.data.Y.rows(), cov.data.Y.cols());
    Mask mask;
    if (cov.data.missing.size() > 0) mask.resize(cov.data.missing.rows(), cov.data.missing.cols());
    std::vector<std::string> ids(cov.ids.size());
    for (std::size_t r = 0; r < target.size(); ++r) {
        Y.row(target[r]) = cov.data.Y.row(static_cast<Index>(r));
        if (mask.size() > 0) mask.row(target[r]) = cov.data.missing.row(static_cast<Index>(r));
        ids[static_cast<std::size_t>(target[r])] = cov.ids[r];
    }
    cov.data.Y = std::move(Y);
    cov.data.missing = std::move(mask);
    cov.ids = std::move(ids);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_matrix_csv(std::ostream& out, const Matrix& M, const std::vector<std::string>& header,
                      const std::vector<std::string>& rowLabels, const std::string& rowLabelName) {
    if (static_cast<Index>(header.size()) != M.cols()) throw ParameterError("write_matrix_csv: header width mismatch");
    const bool labels = !rowLabels.empty();
    if (labels && static_cast<Index>(rowLabels.size()) != M.rows())
        throw ParameterError("write_matrix_csv: row label count mismatch");
    bool first = true;
    if (labels) {
        out << csv_escape(rowLabelName);
        first = false;
    }
    for (const auto& h : header) {
        if (!first) out << ',';
        out << csv_escape(h);
        first = false;
    }
    out << '\n';
    for (Index i = 0; i < M.rows(); ++i) {
        first = true;
        if (labels) {
            out << csv_escape(rowLabels[static_cast<std::size_t>(i)]);
            first = false;
        }
        for (Index j = 0; j < M.cols(); ++j) {
            if (!first) out << ',';
            out << format_double(M(i, j));
            first = false;
        }
        out << '\n';
    }
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write '" + path + "'");
    return out;
}

void write_matrix_csv(const std::string& path, const Matrix& M, const std::vector<std::string>& header,
                      const std::vector<std::string>& rowLabels, const std::string& rowLabelName) {
    auto out = open_output(path);
    write_matrix_csv(out, M, header, rowLabels, rowLabelName);
    if (!out) throw ResourceError("failed writing '" + path + "'");
}

void write_covariates(std::ostream& out, const DataMatrix& data, const std::vector<std::string>& columns) {
    if (static_cast<Index>(columns.size()) != data.Y.cols()) throw ParameterError("write_covariates: header width mismatch");
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << csv_escape(columns[c]);
    out << '\n';
    const bool masked = data.missing.size() > 0;
    for (Index i = 0; i < data.Y.rows(); ++i) {
        for (Index j = 0; j < data.Y.cols(); ++j) {
            if (j) out << ',';
            if (!(masked && data.missing(i, j))) out << format_double(data.Y(i, j));
        }
        out << '\n';
    }
}

std::string bytes_digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

std::string file_digest(const std::string& path) {
    std::ifstream in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return bytes_digest(ss.str());
}

std::vector<std::string> numbered(const std::string& prefix, Index count) {
    std::vector<std::string> out;
    for (Index i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

}  // namespace netfactor::io
