#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "mongehj/cli_io.hpp"
#include "mongehj/monge_checker.hpp"

using namespace mongehj;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = MONGEHJ_CONFIG_DIR;

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("mongehj_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name() + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string operator/(const std::string& s) const { return (path_ / s).string(); }

private:
    fs::path path_;
};

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json small_eikonal() {
    return {{"graph", {{"vertices", {"a", "b"}}, {"edges", {{{"u", "a"}, {"v", "b"}, {"len", 1.0}}}}}},
            {"hamiltonian", {{"form", "eikonal"}, {"f", 0}}},
            {"u0", "x"},
            {"exact", "max(x - t, 0)"},
            {"grid", {{"h", 0.05}, {"dt", 0.05}, {"T", 1.0}}},
            {"route", "auto"}};
}

} // namespace

TEST(CliAudit, PowerPasses) {
    TempDir d;
    const CliRun r = cli({"audit", "--config", (kConfigs / "power_segment.json").string(), "--out", d.path().string()});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(d.path() / "audit.json"));
    EXPECT_EQ(j.at("route").get<std::string>(), "general");
}

TEST(CliAudit, EikonalOnGeneralRouteFails) {
    TempDir d;
    nlohmann::json cfg = small_eikonal();
    cfg["route"] = "general";
    write(d.path() / "cfg.json", cfg.dump());
    const CliRun r = cli({"audit", "--config", d / "cfg.json", "--out", d.path().string()});
    EXPECT_EQ(r.code, exit_code::hypothesis);
    EXPECT_NE(r.err.find("coercivity"), std::string::npos) << r.err;
}

TEST(CliAudit, MalformedJsonIsUsageError) {
    TempDir d;
    write(d.path() / "bad.json", "{\"graph\": ");
    EXPECT_EQ(cli({"audit", "--config", d / "bad.json"}).code, exit_code::usage);
}

TEST(CliAudit, MissingConfigIsIoError) {
    EXPECT_EQ(cli({"audit", "--config", "/nonexistent/cfg.json"}).code, exit_code::io);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, exit_code::usage);
    EXPECT_EQ(cli({"frobnicate"}).code, exit_code::usage);
    EXPECT_EQ(cli({"solve"}).code, exit_code::usage);
    EXPECT_EQ(cli({"--help"}).code, exit_code::ok);
}

TEST(CliSolve, WritesSlicesAndManifest) {
    TempDir d;
    const CliRun r = cli({"solve", "--config", (kConfigs / "eikonal_segment.json").string(), "--out", d / "field"});
    ASSERT_EQ(r.code, 0) << r.err;
    int slices = 0;
    for (const auto& e : fs::directory_iterator(d.path() / "field"))
        if (e.path().extension() == ".csv") ++slices;
    EXPECT_EQ(slices, 200);
    const auto m = nlohmann::json::parse(slurp(d.path() / "field" / "manifest.json"));
    for (const char* key : {"mesh_hash", "config_hash", "grid", "constants"}) EXPECT_TRUE(m.contains(key)) << key;
    for (const char* key : {"L0", "L1", "R", "k"}) EXPECT_TRUE(m.at("constants").contains(key)) << key;
}

TEST(CliSolve, RerunIsByteIdentical) {
    TempDir d;
    write(d.path() / "cfg.json", small_eikonal().dump());
    ASSERT_EQ(cli({"solve", "--config", d / "cfg.json", "--out", d / "a"}).code, 0);
    ASSERT_EQ(cli({"solve", "--config", d / "cfg.json", "--out", d / "b", "--threads", "3"}).code, 0);
    for (const auto& e : fs::directory_iterator(d.path() / "a"))
        EXPECT_EQ(slurp(e.path()), slurp(d.path() / "b" / e.path().filename())) << e.path().filename();
}

TEST(CliSolve, ConstantDataGivesEqualSlices) {
    TempDir d;
    nlohmann::json cfg = small_eikonal();
    cfg["u0"] = 1.25;
    write(d.path() / "cfg.json", cfg.dump());
    ASSERT_EQ(cli({"solve", "--config", d / "cfg.json", "--out", d / "f"}).code, 0);
    const ProblemConfig pc = load_config(d.path() / "cfg.json");
    Problem p = pc.problem;
    p.route = Route::Eikonal;
    const SpaceTimeField F = load_field(d.path() / "f", p, pc.h);
    for (const auto& s : F.slices) EXPECT_EQ(s, F.slices.front());
}

TEST(CliSolve, AuditFailureExits2) {
    TempDir d;
    nlohmann::json cfg = small_eikonal();
    cfg["route"] = "general";
    write(d.path() / "cfg.json", cfg.dump());
    EXPECT_EQ(cli({"solve", "--config", d / "cfg.json", "--out", d / "f"}).code, exit_code::hypothesis);
}

TEST(CliSolve, UnwritableOutputIsIoError) {
    TempDir d;
    write(d.path() / "cfg.json", small_eikonal().dump());
    write(d.path() / "blocker", "x");
    EXPECT_EQ(cli({"solve", "--config", d / "cfg.json", "--out", d / "blocker"}).code, exit_code::io);
}

TEST(FieldIo, RoundTripIsExact) {
    TempDir d;
    ProblemConfig pc = load_config(kConfigs / "star_eikonal.json");
    resolve_config_route(pc);
    const SpaceTimeField F = solve(pc.problem, pc.solve_config());
    write_field(F, nlohmann::json::object(), d.path());
    const SpaceTimeField G = load_field(d.path(), pc.problem, pc.h);
    EXPECT_EQ(F.slices, G.slices);
    EXPECT_EQ(F.radius_factor, G.radius_factor);
    EXPECT_EQ(F.grid.n_steps, G.grid.n_steps);
}

TEST(CliCheck, SolverFieldPassesAllKinds) {
    TempDir d;
    const std::string cfg = (kConfigs / "star_eikonal.json").string();
    ASSERT_EQ(cli({"solve", "--config", cfg, "--out", d.path().string()}).code, 0);
    const CliRun r = cli({"check", "--config", cfg, "--out", d.path().string(), "--kinds", "all"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    for (const char* kind : {"bounds", "initial", "lipschitz", "monge", "curve", "comparison", "equivalence"}) {
        const auto v = nlohmann::json::parse(slurp(d.path() / (std::string("verdict_") + kind + ".json")));
        EXPECT_TRUE(v.at("pass").get<bool>()) << kind;
        for (const char* key : {"kind", "measurements", "witnesses", "config_hash", "seed"}) EXPECT_TRUE(v.contains(key));
    }
}

TEST(CliCheck, NoisyFieldFailsWithWitnesses) {
    TempDir d;
    write(d.path() / "cfg.json", small_eikonal().dump());
    ASSERT_EQ(cli({"solve", "--config", d / "cfg.json", "--out", d / "f"}).code, 0);
    // rewrite one slice with noise, keeping the point columns intact
    const fs::path slice = d.path() / "f" / "slice_00010.csv";
    std::istringstream in(slurp(slice));
    std::ostringstream out;
    std::string line;
    std::getline(in, line);
    out << line << "\n";
    std::mt19937_64 rng(1);
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        const double v = std::stod(line.substr(pos + 1)) + std::uniform_real_distribution<double>(-0.1, 0.1)(rng);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << line.substr(0, pos + 1) << buf << "\n";
    }
    write(slice, out.str());
    const CliRun r = cli({"check", "--config", d / "cfg.json", "--out", d / "f", "--kinds", "bounds,monge"});
    EXPECT_EQ(r.code, exit_code::verdict_fail);
    const auto v = nlohmann::json::parse(slurp(d.path() / "f" / "verdict_bounds.json"));
    EXPECT_FALSE(v.at("pass").get<bool>());
    EXPECT_FALSE(v.at("witnesses").empty());
}

TEST(CliCheck, UnknownKindIsUsageError) {
    TempDir d;
    write(d.path() / "cfg.json", small_eikonal().dump());
    ASSERT_EQ(cli({"solve", "--config", d / "cfg.json", "--out", d / "f"}).code, 0);
    EXPECT_EQ(cli({"check", "--config", d / "cfg.json", "--out", d / "f", "--kinds", "bounds,shape"}).code,
              exit_code::usage);
}

TEST(CliCheck, HashMismatchIsIntegrityError) {
    TempDir d;
    write(d.path() / "cfg.json", small_eikonal().dump());
    ASSERT_EQ(cli({"solve", "--config", d / "cfg.json", "--out", d / "f"}).code, 0);
    nlohmann::json other = small_eikonal();
    other["u0"] = "2 * x";
    write(d.path() / "other.json", other.dump());
    EXPECT_EQ(cli({"check", "--config", d / "other.json", "--out", d / "f", "--kinds", "bounds"}).code,
              exit_code::integrity);
    nlohmann::json finer = small_eikonal();
    finer["grid"]["h"] = 0.025;
    write(d.path() / "finer.json", finer.dump());
    EXPECT_EQ(cli({"check", "--config", d / "finer.json", "--out", d / "f", "--kinds", "bounds"}).code,
              exit_code::integrity);
}

TEST(CliConverge, ThreeGridEikonal) {
    TempDir d;
    const CliRun r = cli({"converge", "--config", (kConfigs / "eikonal_segment.json").string(), "--out", d.path().string(),
                       "--grids", "1/50:1/50,1/100:1/100,1/200:1/200"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("rate: exact"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(d.path() / "convergence.csv"));
}

TEST(CliConverge, SingleGridRateNotAvailable) {
    TempDir d;
    write(d.path() / "cfg.json", small_eikonal().dump());
    const CliRun r = cli({"converge", "--config", d / "cfg.json", "--out", d.path().string(), "--grids", "0.05:0.05"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("rate: n/a"), std::string::npos);
}

TEST(CliConverge, NoOracleExits3) {
    TempDir d;
    const CliRun r = cli({"converge", "--config", (kConfigs / "star_eikonal.json").string(), "--out", d.path().string()});
    EXPECT_EQ(r.code, exit_code::no_oracle);
    EXPECT_NE(r.err.find("no oracle; run cmd_check instead"), std::string::npos);
}

TEST(CliConverge, BadGridListIsUsageError) {
    TempDir d;
    write(d.path() / "cfg.json", small_eikonal().dump());
    EXPECT_EQ(cli({"converge", "--config", d / "cfg.json", "--grids", "0.05"}).code, exit_code::usage);
}
