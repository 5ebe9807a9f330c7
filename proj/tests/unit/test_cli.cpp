#include <catch_amalgamated.hpp>

#include <cfgrid/cli/cli.hpp>
#include <cfgrid/cli/csv_table.hpp>
#include <cfgrid/cli/plot.hpp>
#include <cfgrid/error.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace cfgrid;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "cfgrid");
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("cfgrid_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::size_t count(const std::string& text, const std::string& what) {
    std::size_t n = 0;
    for (auto pos = text.find(what); pos != std::string::npos; pos = text.find(what, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("powerflow writes bus and coefficient tables", "[cli]") {
    TempDir tmp;
    const std::string wscc = testing::case_path("wscc9.json").string();
    auto r = run({"powerflow", wscc, "--out", tmp / "pf.csv", "--coeffs", tmp / "co.csv"});
    REQUIRE(r.code == 0);
    auto buses = cli::read_csv_table(fs::path(tmp / "pf.csv"));
    CHECK(buses.header == std::vector<std::string>{"bus", "kind", "v_mag", "v_ang", "p_inj", "q_inj"});
    CHECK(buses.rows.size() == 9);
    auto co = cli::read_csv_table(fs::path(tmp / "co.csv"));
    CHECK(co.index("coef_re") == 5);
    std::size_t eta_rows = 0;
    for (const auto& row : co.rows) eta_rows += row[co.index("kind")] == "c_eta";
    CHECK(eta_rows == 18);

    // Determinism: a second run is byte-identical.
    REQUIRE(run({"powerflow", wscc, "--out", tmp / "pf2.csv", "--coeffs", tmp / "co2.csv"}).code == 0);
    CHECK(slurp(tmp / "pf.csv") == slurp(tmp / "pf2.csv"));
    CHECK(slurp(tmp / "co.csv") == slurp(tmp / "co2.csv"));
}

TEST_CASE("simulate and analyze", "[cli]") {
    TempDir tmp;
    const std::string dc = testing::case_path("mtdc_dc.json").string();
    auto r = run({"simulate", dc, "--tstop", "0.01", "--dt", "1e-4", "--out", tmp / "t.csv"});
    REQUIRE(r.code == 0);
    auto traj = cli::read_csv_table(fs::path(tmp / "t.csv"));
    CHECK(traj.rows.size() == 101);
    CHECK(traj.header.front() == "t");
    CHECK_NOTHROW(traj.index("v_mag:N3"));

    r = run({"analyze", dc, "--traj", tmp / "t.csv", "--bus", "N3", "--out", tmp / "d.csv", "--report",
             tmp / "r.txt"});
    REQUIRE(r.code == 0);
    auto dec = cli::read_csv_table(fs::path(tmp / "d.csv"));
    CHECK(dec.header == std::vector<std::string>{"time", "bus", "kind", "counterpart", "element", "entry", "coef_re",
                                                 "coef_im", "cf_re", "cf_im"});
    for (const auto& row : dec.rows) CHECK(row[1] == "N3");
    CHECK(slurp(tmp / "r.txt").find("N3") != std::string::npos);

    r = run({"analyze", dc, "--traj", tmp / "t.csv", "--bus", "N3", "--out", tmp / "d2.csv", "--report",
             tmp / "r2.txt"});
    CHECK(slurp(tmp / "d.csv") == slurp(tmp / "d2.csv"));
}

TEST_CASE("exit codes", "[cli]") {
    TempDir tmp;
    auto r = run({"powerflow", tmp / "missing.json"});
    CHECK(r.code == 3);
    auto err = nlohmann::json::parse(r.err.substr(r.err.find('{')));
    CHECK(err["error"] == "IoError");
    CHECK(err["exit_code"] == 3);

    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"simulate", testing::case_path("wscc9.json").string()}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"--help"}).code == 0);

    {
        std::ofstream(tmp / "bad.json") << R"({"base_mva": 100, "f_nom_hz": 50, "buses": []})";
    }
    CHECK(run({"powerflow", tmp / "bad.json"}).code == 2);

    {
        std::ofstream(tmp / "heavy.json") << R"({
          "base_mva": 100, "f_nom_hz": 50,
          "buses": [{"id": "a", "kind": "AC", "base_kv": 20}, {"id": "b", "kind": "AC", "base_kv": 20}],
          "branches": [{"id": "l", "model": "ConstantY", "from": "a", "to": "b", "X": 0.5}],
          "devices": [{"id": "g", "bus": "a", "model": "SynchronousMachine", "role": "slack"},
                      {"id": "p", "bus": "b", "model": "ConstantPowerLoad", "P": 10}]})";
    }
    r = run({"powerflow", tmp / "heavy.json"});
    CHECK(r.code == 4);

    {
        std::ofstream(tmp / "empty.csv") << "t,x\n";
    }
    CHECK(run({"plot", tmp / "empty.csv", "--columns", "x", "--out", tmp / "p.svg"}).code == 3);
    CHECK(run({"plot", tmp / "empty.csv", "--columns", "y", "--out", tmp / "p.svg"}).code == 2);
}

TEST_CASE("two-column plot", "[cli]") {
    TempDir tmp;
    {
        std::ofstream f(tmp / "two.csv");
        f << "t,a,b\n";
        for (int k = 0; k <= 50; ++k) f << k * 0.01 << "," << std::sin(k * 0.2) << "," << std::cos(k * 0.2) << "\n";
    }
    auto r = run({"plot", tmp / "two.csv", "--columns", "a,b", "--out", tmp / "p.svg", "--title", "demo"});
    REQUIRE(r.code == 0);
    const std::string svg = slurp(tmp / "p.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find("demo") != std::string::npos);

    REQUIRE(run({"plot", tmp / "two.csv", "--columns", "a,b", "--out", tmp / "p2.svg", "--title", "demo"}).code == 0);
    CHECK(svg == slurp(tmp / "p2.svg"));
}

TEST_CASE("long-format plot selection", "[cli]") {
    std::istringstream in("time,bus,kind,coef_re\n0,N1,c_eta,1\n0,N2,c_eta,2\n1,N1,c_eta,3\n1,N2,c_xi,4\n");
    auto table = cli::read_csv_table(in);
    cli::PlotSpec spec;
    spec.x = "time";
    spec.columns = {"coef_re"};
    spec.where = {{"kind", "c_eta"}};
    spec.series_by = "bus";
    auto series = cli::select_series(spec, table);
    REQUIRE(series.size() == 2);
    CHECK(series[0].y == std::vector<double>{1, 3});
    CHECK(series[1].y == std::vector<double>{2});

    spec.where = {{"kind", "nothing"}};
    CHECK_THROWS_AS(cli::select_series(spec, table), Error);
    spec.columns = {"missing"};
    try {
        cli::select_series(spec, table);
        FAIL("unknown column accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ColumnNotFound);
    }
}
