// runner.hpp — configuration, check orchestration, report and CSV emission,
// sweeps, and the CLI entry point
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "pflab/fock.hpp"
#include "pflab/operators.hpp"
#include "pflab/symmetry.hpp"

namespace pflab::cli {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pinned pass thresholds for the orchestrated checks.
inline constexpr double kPairingTol = 1e-9;
inline constexpr double kPartnerTol = 1e-8;
inline constexpr double kVacuumTol = 1e-12;
inline constexpr double kQuadraticTol = 1e-10;
inline constexpr double kFunctionTol = 1e-10;
inline constexpr double kProbeFloor = 1e-2;

struct GridConfig {
    int half_width{0};
    double spacing{1.0};
    std::vector<double> potential;
};

struct RunConfig {
    // Exactly one of kpoints / explicit_modes must be non-empty; kpoints may
    // have been loaded from kpoints_file (rows "kx ky kz weight").
    std::vector<std::pair<Eigen::Vector3d, double>> kpoints;
    std::string kpoints_file;
    std::vector<fock::Mode> explicit_modes;
    int n_max{0};
    Eigen::Vector3d P{0.0, 0.0, 0.0};
    double e{0.0};
    std::optional<double> g_spin; // empty = e/2
    std::optional<GridConfig> grid;
    int n_spins{1};
    std::vector<std::string> checks{"kramers"};
    double gap{1e-8};
    std::vector<double> t_values{0.1, 1.0, 10.0};
    std::uint64_t seed{1};
    std::size_t dim_cap{kDefaultDimCap};
};

RunConfig parse_config(const Json& j);
RunConfig load_config(const std::string& path);
// Whitespace-separated "kx ky kz weight" rows; '#' starts a comment line.
std::vector<std::pair<Eigen::Vector3d, double>> load_kpoints_file(const std::string& path);
Json config_echo(const RunConfig& cfg);

// Everything run() assembles before checks start.
struct BuiltSystem {
    fock::ModeSet modes;
    fock::FockBasis basis;
    ops::FieldOperators field;
    ops::HermitianOperator H;
    sym::Involution j; // on the non-spin factor
    sym::AntiunitaryOperator theta;
};

BuiltSystem build_system(const RunConfig& cfg);

struct ClusterRow {
    double mean;
    int multiplicity;
    double spread;
};

struct ReportRecord {
    Json report;
    bool all_pass{true};
    std::vector<ClusterRow> cluster_rows;
};

// Builds the requested space and Hamiltonian and runs the requested checks in
// dependency order. Deterministic: identical config + seed give identical
// reports up to the wall_time_ms field.
ReportRecord run(const RunConfig& cfg);

// report.json plus clusters.csv (when a spectrum was computed) under out_dir.
void write_report(const ReportRecord& rec, const std::string& out_dir);

struct SweepResult {
    Json manifest;
    bool all_pass{true};
};

// One run per axis value under out_dir/point_NNN; per-point failures are
// recorded in the manifest without aborting the sweep. Axis is one of
// "e", "P_z", "N_max".
SweepResult sweep(const RunConfig& base, const std::string& axis,
                  const std::vector<double>& values, const std::string& out_dir);

// Sparse triplet text: one "row col re im" line per stored entry, 17
// significant digits, sorted by (row, col). Lines starting with '#' are
// comments.
void export_matrix_triplets(const ops::HermitianOperator& H, std::ostream& os);

// Exit codes: 0 = all requested checks pass (expected-failure probes count as
// pass when they fail as expected); 1 = check violation; 2 = config or build
// error.
int main_impl(int argc, const char* const* argv);

} // namespace pflab::cli
