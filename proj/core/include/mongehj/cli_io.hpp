#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mongehj/problem.hpp"
#include "mongehj/semigroup_solver.hpp"

namespace mongehj {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int verdict_fail = 1;
inline constexpr int hypothesis = 2;
inline constexpr int no_oracle = 3;
inline constexpr int usage = 64;
inline constexpr int integrity = 65;
inline constexpr int io = 74;
} // namespace exit_code

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parsed problem config:
//   {"graph": path | {...}, "hamiltonian": path | {...}, "u0": number | expr | {"table", "h"},
//    "grid": {"h", "dt", "T"}, "route": "eikonal" | "general" | "auto",
//    "exact": expr?, "seed": n?, "subcell_samples": n?}
// Relative paths resolve against the config file's directory.
struct ProblemConfig {
    nlohmann::json raw;
    Problem problem; // route left as requested until resolve_config_route
    std::string route_request = "auto";
    double h = 0.01;
    double dt = 0.01;
    double T = 1.0;
    std::uint64_t seed = 1;
    int subcell_samples = 32;

    SolveConfig solve_config(int threads = 1) const;
};

ProblemConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ProblemConfig load_config(const std::filesystem::path& path);

// Runs the audit and fixes problem.route; throws HypothesisError.
AssumptionAudit resolve_config_route(ProblemConfig& cfg);

void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

// slice_00000.csv ... plus manifest.json.
void write_field(const SpaceTimeField& field, const nlohmann::json& manifest_extra, const std::filesystem::path& dir);
nlohmann::json read_manifest(const std::filesystem::path& dir);
// Rebuilds the mesh from the problem and h; hash mismatches throw IntegrityError.
SpaceTimeField load_field(const std::filesystem::path& dir, const Problem& problem, double h);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mongehj
