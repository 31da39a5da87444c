#include "netfactor/error.hpp"
#include "netfactor/io.hpp"
#include "netfactor/report.hpp"
#include "netfactor/simulate.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

using namespace netfactor;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("netfactor_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NETFACTOR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Every regular file below `root`, keyed by its relative path.
std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file()) out[fs::relative(entry.path(), root).string()] = slurp(entry.path());
    return out;
}

}  // namespace

TEST_CASE("edge list parsing") {
    std::istringstream path("0 1\n1 2\n");
    const auto g = io::parse_edge_list(path);
    CHECK(g.A.n() == 3);
    CHECK(g.A.edge_count() == 2);
    CHECK(g.A.has_edge(1, 0));
    CHECK(g.A.has_edge(2, 1));
    CHECK_FALSE(g.A.has_edge(0, 2));

    std::istringstream loop("0 0\n0\t1\n1 0\n");
    const auto l = io::parse_edge_list(loop);
    CHECK(l.selfLoopsDropped == 1);
    CHECK(l.duplicatesMerged == 1);
    CHECK(l.A.edge_count() == 1);
    CHECK_FALSE(l.warnings.empty());

    std::istringstream oneBased("# index-base: 1\n# nodes: 5\n1 2\n4 5\n");
    const auto b = io::parse_edge_list(oneBased);
    CHECK(b.indexBase == 1);
    CHECK(b.A.n() == 5);
    CHECK(b.A.has_edge(0, 1));
    CHECK(b.A.has_edge(3, 4));

    std::istringstream bad("0 1\n# comment\n2 x\n");
    try {
        (void)io::parse_edge_list(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream three("0 1 2\n");
    CHECK_THROWS_AS(io::parse_edge_list(three), ParseError);
}

TEST_CASE("adjacency round trips") {
    SimConfig cfg;
    cfg.n = 150;
    cfg.p = 5;
    cfg.seed = 8;
    const auto ds = generate_dataset(cfg);
    std::stringstream el;
    io::write_edge_list(el, ds.A);
    CHECK(io::parse_edge_list(el).A.edges() == ds.A.edges());
    std::stringstream mm;
    io::write_matrix_market(mm, ds.A);
    const auto back = io::parse_matrix_market(mm);
    CHECK(back.A.n() == 150);
    CHECK(back.A.edges() == ds.A.edges());

    const fs::path dir = scratch_dir("adjacency");
    {
        std::ofstream out(dir / "g.mtx");
        io::write_matrix_market(out, ds.A);
    }
    CHECK(io::load_adjacency((dir / "g.mtx").string()).A.edges() == ds.A.edges());
    CHECK_THROWS_AS(io::load_adjacency((dir / "missing.edges").string()), ParseError);
    CHECK(io::parse_adjacency_format("matrix-market") == io::AdjacencyFormat::MatrixMarket);
    CHECK_THROWS_AS(io::parse_adjacency_format("graphml"), ParameterError);
}

TEST_CASE("covariate parsing") {
    std::istringstream two("a,b\n1.5,-2\n3,4e-3\n");
    const auto c = io::parse_covariates(two);
    CHECK(c.columns == std::vector<std::string>{"a", "b"});
    Matrix expected(2, 2);
    expected << 1.5, -2, 3, 4e-3;
    CHECK(c.data.Y == expected);
    CHECK_FALSE(c.data.has_missing());

    std::istringstream gap("a,b\n1,\n,4\n");
    const auto g = io::parse_covariates(gap);
    CHECK(g.data.missing_count() == 2);
    CHECK(g.data.missing(0, 1));
    CHECK(g.data.missing(1, 0));
    CHECK(g.data.Y(1, 1) == 4.0);

    std::istringstream ragged("a,b\n1,2\n3\n");
    try {
        (void)io::parse_covariates(ragged);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream text("a,b\n1,abc\n");
    try {
        (void)io::parse_covariates(text);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 2);
    }

    std::istringstream ids("id,x\n2,20\n0,0\n1,10\n");
    auto withIds = io::parse_covariates(ids, "id");
    io::align_rows_to_nodes(withIds, 3, 0);
    CHECK(withIds.data.Y.col(0) == Vector::LinSpaced(3, 0, 20));
    std::istringstream dup("id,x\n0,1\n0,2\n1,3\n");
    auto dupIds = io::parse_covariates(dup, "id");
    CHECK_THROWS_AS(io::align_rows_to_nodes(dupIds, 3, 0), ParseError);
}

TEST_CASE("covariate round trip is lossless") {
    SimConfig cfg;
    cfg.n = 80;
    cfg.p = 30;
    cfg.seed = 9;
    const auto ds = generate_dataset(cfg);
    DataMatrix data{ds.Y, Mask::Constant(80, 30, false)};
    data.missing(3, 4) = true;
    data.Y(3, 4) = std::numeric_limits<double>::quiet_NaN();
    std::stringstream s;
    io::write_covariates(s, data, io::numbered("y", 30));
    const auto back = io::parse_covariates(s);
    CHECK(back.data.missing(3, 4));
    CHECK(back.data.missing_count() == 1);
    for (Index j = 0; j < 30; ++j)
        for (Index i = 0; i < 80; ++i)
            if (!data.missing(i, j)) CHECK(back.data.Y(i, j) == ds.Y(i, j));

    Rng rng(10);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 2000; ++k) {
        const double v = k % 3 == 0 ? std::ldexp(u(rng), -900) : u(rng);
        CHECK(std::stod(io::format_double(v)) == v);
    }
}

TEST_CASE("digests") {
    CHECK(io::bytes_digest("") == "fnv1a64:cbf29ce484222325");
    CHECK(io::bytes_digest("a") == "fnv1a64:af63dc4c8601ec8c");
    CHECK(io::bytes_digest("foobar") == "fnv1a64:85944171f73967e8");
    const fs::path dir = scratch_dir("digest");
    {
        std::ofstream out(dir / "f.txt", std::ios::binary);
        out << "foobar";
    }
    CHECK(io::file_digest((dir / "f.txt").string()) == io::bytes_digest("foobar"));
}

TEST_CASE("empty benchmark writes header-only tables") {
    const fs::path dir = scratch_dir("empty_bench");
    const auto files = report::write_benchmark(dir.string(), BenchResult{}, false);
    CHECK_FALSE(files.empty());
    for (const auto& entry : fs::directory_iterator(dir)) {
        CHECK(entry.path().extension() != ".svg");
        const std::string body = slurp(entry.path());
        CHECK(std::count(body.begin(), body.end(), '\n') == 1);
    }
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch_dir("exit");
    const std::string out = (dir / "o").string();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("fit --bogus --out " + out) == 2);
    CHECK(run_cli("fit --adjacency " + (dir / "none.edges").string() + " --covariates x.csv --out " + out) == 2);
    CHECK(run_cli("simulate --n 30 --p 10 --dims 1,1 --out " + out) == 2);
    CHECK(run_cli("simulate --n 30 --p 10 --rho 3 --out " + out) == 2);

    // Rank-deficient embedding request: d exceeds the positive spectrum of a star.
    {
        std::ofstream g(dir / "star.edges");
        for (int i = 1; i < 12; ++i) g << 0 << ' ' << i << '\n';
        std::ofstream y(dir / "y.csv");
        y << "a,b,c\n";
        Rng rng(1);
        for (int i = 0; i < 12; ++i) {
            const Matrix r = standard_normal(1, 3, rng);
            y << io::format_double(r(0)) << ',' << io::format_double(r(1)) << ',' << io::format_double(r(2)) << '\n';
        }
    }
    CHECK(run_cli("fit --adjacency " + (dir / "star.edges").string() + " --covariates " + (dir / "y.csv").string() +
                  " --d 2 --out " + out) == 3);
}

TEST_CASE("command line config precedence") {
    const fs::path dir = scratch_dir("config");
    {
        std::ofstream c(dir / "cfg.json");
        c << R"({"seed": 5, "n": 40, "p": 12, "dims": "1,1,0"})";
        std::ofstream bad(dir / "bad.json");
        bad << R"({"nodes": 40})";
        std::ofstream outKey(dir / "out.json");
        outKey << R"({"out": "elsewhere"})";
    }
    const std::string cfg = (dir / "cfg.json").string();
    REQUIRE(run_cli("simulate --config " + cfg + " --seed 7 --out " + (dir / "a").string()) == 0);
    const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest["seed"] == 7);
    CHECK(manifest["options"]["n"] == 40);
    CHECK(manifest["options"]["p"] == 12);
    CHECK(run_cli("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "b").string()) == 2);
    CHECK(run_cli("simulate --config " + (dir / "out.json").string() + " --out " + (dir / "c").string()) == 2);
    CHECK(run_cli("simulate --config " + (dir / "none.json").string() + " --out " + (dir / "d").string()) == 2);
}

TEST_CASE("command line outputs are reproducible") {
    const fs::path dir = scratch_dir("repro");
    const std::string sim = (dir / "sim").string();
    REQUIRE(run_cli("simulate --n 80 --p 30 --dims 1,1,1 --seed 11 --missing-fraction 0.05 --out " + sim) == 0);
    const std::string inputs = " --adjacency " + sim + "/adjacency.edges --covariates " + sim + "/covariates.csv";
    const std::string opts = " --d 2 --kmax 3 --draws 49 --permutations 49 --seed 4";
    REQUIRE(run_cli("fit" + inputs + opts + " --threads 1 --out " + (dir / "f1").string()) == 0);
    REQUIRE(run_cli("fit" + inputs + opts + " --threads 1 --out " + (dir / "f2").string()) == 0);
    REQUIRE(run_cli("fit" + inputs + opts + " --threads 3 --out " + (dir / "f3").string()) == 0);
    const auto a = tree(dir / "f1");
    CHECK(a.count("manifest.json") == 1);
    CHECK(a.count("test_report.json") == 1);
    CHECK(a == tree(dir / "f2"));
    CHECK(a == tree(dir / "f3"));
    REQUIRE(run_cli("impute" + inputs + " --dims 0,2,1 --out " + (dir / "i").string()) == 0);
    const auto imputed = io::load_covariates((dir / "i" / "imputed.csv").string());
    CHECK_FALSE(imputed.data.has_missing());
}
