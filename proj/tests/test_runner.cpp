#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pflab/runner.hpp"
#include "pflab/version.hpp"

using namespace pflab;
using cli::ConfigError;
using cli::Json;
using cli::RunConfig;

namespace {

namespace fs = std::filesystem;

Json base_config() {
    return Json{{"modes", Json::array({Json{{"k", {0.0, 0.0, 1.0}},
                                            {"lambda", 1},
                                            {"weight", 1.0},
                                            {"eps", {1.0, 0.0, 0.0}}}})},
                {"n_max", 1},
                {"e", 0.0},
                {"checks", {"kramers"}},
                {"seed", 7}};
}

Json fiber_config() {
    return Json{{"kpoints", Json::array({Json::array({0.0, 0.0, 1.0, 1.0})})},
                {"n_max", 2},
                {"P", {0.0, 0.0, 0.3}},
                {"e", 0.5},
                {"checks", {"algebra", "kramers", "semigroup", "jreal", "negative_control"}},
                {"t_values", {0.1, 1.0}},
                {"seed", 11}};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pflab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string write_config(const fs::path& dir, const Json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream out(p);
    out << j.dump(2) << "\n";
    return p.string();
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("pflab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return cli::main_impl(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_SUITE("runner") {

TEST_CASE("config validation diagnostics") {
    CHECK_THROWS_AS((void)cli::parse_config(Json::array()), ConfigError);
    CHECK_THROWS_AS((void)cli::parse_config(Json{{"n_max", 1}}), ConfigError); // no modes

    Json both = base_config();
    both["kpoints"] = Json::array({Json::array({0.0, 0.0, 1.0, 1.0})});
    CHECK_THROWS_AS((void)cli::parse_config(both), ConfigError);

    Json neg = base_config();
    neg["n_max"] = -1;
    CHECK_THROWS_WITH_AS((void)cli::parse_config(neg), "n_max must be a non-negative integer",
                         ConfigError);

    Json unknown = base_config();
    unknown["nmax"] = 2;
    CHECK_THROWS_AS((void)cli::parse_config(unknown), ConfigError);

    Json badcheck = base_config();
    badcheck["checks"] = {"krammers"};
    CHECK_THROWS_AS((void)cli::parse_config(badcheck), ConfigError);

    Json badgap = base_config();
    badgap["gap"] = 0.0;
    CHECK_THROWS_AS((void)cli::parse_config(badgap), ConfigError);

    Json badgrid = base_config();
    badgrid["grid"] = Json{{"half_width", 1}, {"spacing", 0.5}, {"potential", {0.0, 0.0, 0.0}},
                           {"extra", 1}};
    CHECK_THROWS_AS((void)cli::parse_config(badgrid), ConfigError);
}

TEST_CASE("kpoints are loadable from a row file") {
    const fs::path dir = fresh_dir("kpfile");
    const fs::path kpath = dir / "kpoints.txt";
    std::ofstream(kpath) << "# kx ky kz weight\n0 0 1 1.0\n1 0.5 -0.3 0.7\n";

    Json cfg{{"kpoints_file", kpath.string()}, {"n_max", 1}, {"checks", {"kramers"}}};
    const RunConfig parsed = cli::parse_config(cfg);
    REQUIRE(parsed.kpoints.size() == 2);
    CHECK(parsed.kpoints[1].second == 0.7);
    const cli::ReportRecord rec = cli::run(parsed);
    CHECK(rec.all_pass);
    CHECK(rec.report["config"]["kpoints_file"].get<std::string>() == kpath.string());
    CHECK(rec.report["config"]["kpoints"].size() == 2);

    Json missing{{"kpoints_file", (dir / "nope.txt").string()}, {"n_max", 1}};
    CHECK_THROWS_AS((void)cli::parse_config(missing), ConfigError);
    std::ofstream(dir / "bad.txt") << "0 0 1\n";
    Json bad{{"kpoints_file", (dir / "bad.txt").string()}, {"n_max", 1}};
    CHECK_THROWS_AS((void)cli::parse_config(bad), ConfigError);
}

TEST_CASE("minimal run: block doubling shows up as multiplicity-2 clusters") {
    const RunConfig cfg = cli::parse_config(base_config());
    const cli::ReportRecord rec = cli::run(cfg);
    CHECK(rec.all_pass);
    CHECK(rec.report["pass"].get<bool>());
    CHECK(rec.report["schema_version"].get<int>() == kReportSchemaVersion);
    REQUIRE(!rec.cluster_rows.empty());
    for (const auto& row : rec.cluster_rows) CHECK(row.multiplicity == 2);
    CHECK(rec.report["checks"]["kramers"]["degeneracy_asserted"].get<bool>());
}

TEST_CASE("full check set passes on a fiber configuration") {
    const RunConfig cfg = cli::parse_config(fiber_config());
    const cli::ReportRecord rec = cli::run(cfg);
    CHECK(rec.all_pass);
    for (const std::string name :
         {"algebra", "kramers", "semigroup", "jreal", "negative_control"}) {
        INFO(name);
        CHECK(rec.report["checks"][name]["pass"].get<bool>());
    }
    // the probe must have failed as expected, not accidentally commuted
    CHECK(rec.report["checks"]["negative_control"]["observed_failure"].get<bool>());
    CHECK(!rec.report["checks"]["negative_control"]["degeneracy_asserted"].get<bool>());
    // audit-completeness: asserted passes carry their measured values
    CHECK(rec.report["checks"]["kramers"].contains("max_pairing"));
    CHECK(rec.report["checks"]["kramers"].contains("pairing_tol"));
}

TEST_CASE("reports are deterministic up to the wall-time field") {
    const RunConfig cfg = cli::parse_config(fiber_config());
    Json a = cli::run(cfg).report;
    Json b = cli::run(cfg).report;
    a.erase("wall_time_ms");
    b.erase("wall_time_ms");
    CHECK(a.dump() == b.dump());
}

TEST_CASE("grid configs: even potential passes, odd potential fails kramers") {
    Json cfg = base_config();
    cfg["e"] = 0.3;
    cfg["n_max"] = 2;
    Json grid{{"half_width", 2}, {"spacing", 0.5}};
    Json even = Json::array(), odd = Json::array();
    for (int g = -2; g <= 2; ++g) {
        const double x = 0.5 * g;
        even.push_back(x * x);
        odd.push_back(x);
    }
    grid["potential"] = even;
    cfg["grid"] = grid;
    const cli::ReportRecord pass_rec = cli::run(cli::parse_config(cfg));
    CHECK(pass_rec.all_pass);
    CHECK(pass_rec.report["checks"]["kramers"]["potential_even"].get<bool>());

    grid["potential"] = odd;
    cfg["grid"] = grid;
    const cli::ReportRecord fail_rec = cli::run(cli::parse_config(cfg));
    CHECK(!fail_rec.all_pass);
    CHECK(!fail_rec.report["checks"]["kramers"]["potential_even"].get<bool>());
    CHECK(!fail_rec.report["checks"]["kramers"]["degeneracy_asserted"].get<bool>());
    CHECK(fail_rec.report["checks"]["kramers"]["commutator_residual"].get<double>() > 1e-2);
}

TEST_CASE("n-spin configs through the runner") {
    Json cfg = base_config();
    cfg["n_max"] = 2;
    cfg["e"] = 0.4;
    cfg["n_spins"] = 3;
    const cli::ReportRecord odd_rec = cli::run(cli::parse_config(cfg));
    CHECK(odd_rec.all_pass);
    CHECK(odd_rec.report["hamiltonian"]["theta_sign"].get<int>() == -1);
    CHECK(odd_rec.report["checks"]["kramers"]["all_even"].get<bool>());

    cfg["n_spins"] = 2;
    const cli::ReportRecord even_rec = cli::run(cli::parse_config(cfg));
    CHECK(even_rec.all_pass); // diagnostics only, no assertion
    CHECK(even_rec.report["hamiltonian"]["theta_sign"].get<int>() == +1);
    CHECK(!even_rec.report["checks"]["kramers"]["degeneracy_asserted"].get<bool>());

    cfg["checks"] = {"semigroup"};
    CHECK_THROWS_AS((void)cli::run(cli::parse_config(cfg)), ConfigError);
}

TEST_CASE("sweep writes manifest, summary and per-point reports") {
    const fs::path dir = fresh_dir("sweep");
    const RunConfig cfg = cli::parse_config(base_config());
    const cli::SweepResult sr = cli::sweep(cfg, "e", {0.0, 0.25, 0.5}, dir.string());
    CHECK(sr.all_pass);
    CHECK(sr.manifest["points"].size() == 3);
    for (const auto& p : sr.manifest["points"]) {
        CHECK(p["status"].get<std::string>() == "pass");
        CHECK(fs::exists(dir / p["report"].get<std::string>()));
    }
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "summary.csv"));

    std::ifstream csv(dir / "summary.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "value,mean_1,mean_2,mean_3,mean_4,mean_5,mean_6,mult_1,mult_2,mult_3,mult_4,mult_5,"
          "mult_6,max_pairing_residual");

    SUBCASE("empty value list gives an empty passing manifest") {
        const fs::path dir2 = fresh_dir("sweep_empty");
        const cli::SweepResult empty = cli::sweep(cfg, "e", {}, dir2.string());
        CHECK(empty.all_pass);
        CHECK(empty.manifest["points"].empty());
    }
    SUBCASE("per-point errors are recorded without aborting") {
        const fs::path dir3 = fresh_dir("sweep_err");
        const cli::SweepResult mixed = cli::sweep(cfg, "N_max", {1.0, 2.5}, dir3.string());
        CHECK(!mixed.all_pass);
        CHECK(mixed.manifest["points"][0]["status"].get<std::string>() == "pass");
        CHECK(mixed.manifest["points"][1]["status"].get<std::string>() == "error");
    }
    SUBCASE("unknown axis is rejected") {
        CHECK_THROWS_AS((void)cli::sweep(cfg, "P_x", {0.0}, (dir / "bad").string()),
                        ConfigError);
    }
}

TEST_CASE("triplet export is parseable and faithful") {
    const RunConfig cfg = cli::parse_config(base_config());
    const cli::BuiltSystem sys = cli::build_system(cfg);
    std::ostringstream os;
    cli::export_matrix_triplets(sys.H, os);

    std::istringstream in(os.str());
    std::string line;
    Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(sys.H.dim(), sys.H.dim());
    int prev_row = -1, prev_col = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int r, c;
        double re, im;
        REQUIRE(static_cast<bool>(ls >> r >> c >> re >> im));
        const bool ordered = r > prev_row || (r == prev_row && c > prev_col);
        CHECK(ordered);
        prev_row = r;
        prev_col = c;
        rebuilt(r, c) = cplx(re, im);
    }
    CHECK(max_abs(Eigen::MatrixXcd(rebuilt - sys.H.dense())) == 0.0);
}

TEST_CASE("cli exit codes") {
    const fs::path dir = fresh_dir("cli");
    const std::string good = write_config(dir, fiber_config());

    CHECK(run_cli({"build", "-c", good}) == 0);
    CHECK(run_cli({"kramers", "-c", good, "-o", (dir / "out_k").string()}) == 0);
    CHECK(fs::exists(dir / "out_k/report.json"));
    CHECK(fs::exists(dir / "out_k/clusters.csv"));

    // malformed config: nonzero exit with a parse diagnostic
    Json bad = base_config();
    bad["n_max"] = -1;
    const fs::path badp = dir / "bad.json";
    std::ofstream(badp) << bad.dump();
    CHECK(run_cli({"kramers", "-c", badp.string(), "-o", (dir / "out_bad").string()}) == 2);
    CHECK(run_cli({"kramers", "-c", (dir / "missing.json").string()}) == 2);

    // an odd grid potential is a check violation, exit 1
    Json oddcfg = base_config();
    oddcfg["n_max"] = 1;
    oddcfg["e"] = 0.3;
    oddcfg["grid"] =
        Json{{"half_width", 1}, {"spacing", 0.5}, {"potential", {-0.5, 0.0, 0.5}}};
    const std::string oddp = write_config(fresh_dir("cli_odd"), oddcfg);
    CHECK(run_cli({"kramers", "-c", oddp, "-o", (dir / "out_odd").string()}) == 1);

    CHECK(run_cli({"spectrum", "-c", good, "-o", (dir / "out_s").string()}) == 0);
    CHECK(fs::exists(dir / "out_s/clusters.csv"));
    CHECK(run_cli({"export-matrix", "-c", good, "-o", (dir / "h.txt").string()}) == 0);
    CHECK(fs::exists(dir / "h.txt"));
    CHECK(run_cli({"sweep", "-c", good, "--axis", "e", "--values", "0,0.5", "-o",
                   (dir / "out_sw").string()}) == 0);
    CHECK(run_cli({"run", "-c", good, "-o", (dir / "out_r").string()}) == 0);
}

} // TEST_SUITE
