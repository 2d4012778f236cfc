#include "mongehj/cli_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mongehj/monge_checker.hpp"
#include "mongehj/verifier.hpp"

namespace fs = std::filesystem;

namespace mongehj {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) {
    const std::string text = read_text(p);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("malformed JSON in " + p.string() + ": " + e.what());
    }
}

// A string names a file; an object is taken inline.
nlohmann::json inline_or_file(const nlohmann::json& j, const fs::path& base, const char* what) {
    if (j.is_string()) {
        fs::path p = j.get<std::string>();
        if (p.is_relative()) p = base / p;
        return read_json(p);
    }
    if (!j.is_object()) throw UsageError(std::string(what) + " must be a path or an object");
    return j;
}

const std::vector<std::string> kAllKinds{"bounds", "initial", "lipschitz", "monge", "curve", "comparison", "equivalence"};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

double parse_number(const std::string& s) {
    const auto slash = s.find('/');
    std::size_t used = 0;
    try {
        if (slash != std::string::npos) {
            const double a = std::stod(s.substr(0, slash), &used);
            const std::string rest = s.substr(slash + 1);
            std::size_t used2 = 0;
            const double b = std::stod(rest, &used2);
            if (used != slash || used2 != rest.size()) throw UsageError("bad number: " + s);
            return a / b;
        }
        const double v = std::stod(s, &used);
        if (used != s.size()) throw UsageError("bad number: " + s);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("bad number: " + s);
    }
}

std::vector<std::pair<double, double>> parse_grids(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    for (const auto& item : split(s, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("grid must be h:dt, got " + item);
        out.emplace_back(parse_number(item.substr(0, colon)), parse_number(item.substr(colon + 1)));
    }
    if (out.empty()) throw UsageError("--grids is empty");
    return out;
}

} // namespace

SolveConfig ProblemConfig::solve_config(int threads) const {
    SolveConfig c;
    c.h = h;
    c.dt = dt;
    c.subcell_samples = subcell_samples;
    c.threads = threads;
    return c;
}

ProblemConfig parse_config(const nlohmann::json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    for (const char* key : {"graph", "hamiltonian", "u0", "grid"})
        if (!j.contains(key)) throw UsageError(std::string("config is missing \"") + key + "\"");
    ProblemConfig cfg;
    cfg.raw = j;
    try {
        const auto& grid = j.at("grid");
        cfg.h = grid.at("h").get<double>();
        cfg.dt = grid.at("dt").get<double>();
        cfg.T = grid.value("T", 1.0);
        cfg.route_request = j.value("route", std::string("auto"));
        cfg.seed = j.value("seed", std::uint64_t{1});
        cfg.subcell_samples = j.value("subcell_samples", 32);
        if (cfg.route_request != "auto" && cfg.route_request != "eikonal" && cfg.route_request != "general")
            throw UsageError("route must be eikonal, general or auto");

        auto g = std::make_shared<const MetricGraph>(MetricGraph::from_json(inline_or_file(j.at("graph"), base_dir, "graph")));
        nlohmann::json hj = inline_or_file(j.at("hamiltonian"), base_dir, "hamiltonian");
        hj["T"] = cfg.T;
        Problem& p = cfg.problem;
        p.graph = g;
        p.hamiltonian = std::make_shared<const HamiltonianSpec>(HamiltonianSpec::from_json(hj, g));
        p.u0 = ScalarFunction::from_json(j.at("u0"), g);
        p.route = cfg.route_request == "general" ? Route::General : Route::Eikonal;
        p.name = j.value("name", std::string("config"));
        if (j.contains("exact")) {
            const ScalarFunction ex = ScalarFunction::from_expression(j.at("exact").get<std::string>(), g);
            p.exact = [ex](const Point& x, double t) { return ex(x, t); };
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("bad config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        // DomainError, ParseError, CoercivityError and friends.
        throw UsageError(std::string("bad config: ") + e.what());
    }
    return cfg;
}

ProblemConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("config not found: " + path.string());
    return parse_config(read_json(path), path.parent_path());
}

AssumptionAudit resolve_config_route(ProblemConfig& cfg) {
    AssumptionAudit audit = audit_assumptions(*cfg.problem.hamiltonian, *cfg.problem.graph);
    cfg.problem.route = resolve_route(cfg.route_request, audit);
    return audit;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

void write_field(const SpaceTimeField& field, const nlohmann::json& manifest_extra, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create " + dir.string());
    const Mesh& mesh = *field.mesh;
    char name[32];
    char row[128];
    for (int n = 0; n < field.n_slices(); ++n) {
        std::string text = "point_id,edge_id,offset,value\n";
        text.reserve(static_cast<std::size_t>(mesh.size()) * 48);
        for (int i = 0; i < mesh.size(); ++i) {
            const Point& p = mesh.point(i);
            std::snprintf(row, sizeof row, "%d,%d,%.17g,%.17g\n", i, p.edge, p.offset, field.value(i, n));
            text += row;
        }
        std::snprintf(name, sizeof name, "slice_%05d.csv", n);
        write_text_atomic(dir / name, text);
    }
    nlohmann::json m = manifest_extra;
    m["mesh_hash"] = hex64(mesh.hash());
    m["config_hash"] = hex64(field.problem_hash);
    m["grid"] = {{"h", mesh.spacing()}, {"dt", field.dt()}, {"T", field.grid.T}, {"n_steps", field.grid.n_steps}};
    m["n_slices"] = field.n_slices();
    m["n_points"] = mesh.size();
    m["radius_factor"] = field.radius_factor;
    m["subcell_samples"] = field.subcell_samples;
    m["k_shift"] = field.k_shift;
    nlohmann::json constants = field.constants;
    const nlohmann::json extra_constants = manifest_extra.value("constants", nlohmann::json::object());
    for (auto it = extra_constants.begin(); it != extra_constants.end(); ++it) constants[it.key()] = it.value();
    m["constants"] = constants;
    write_json_atomic(dir / "manifest.json", m);
}

nlohmann::json read_manifest(const fs::path& dir) {
    const fs::path p = dir / "manifest.json";
    if (!fs::exists(p)) throw IoError("no manifest in " + dir.string());
    try {
        return nlohmann::json::parse(read_text(p));
    } catch (const nlohmann::json::parse_error& e) {
        throw IntegrityError(std::string("corrupt manifest: ") + e.what());
    }
}

SpaceTimeField load_field(const fs::path& dir, const Problem& problem, double h) {
    const nlohmann::json m = read_manifest(dir);
    SpaceTimeField F;
    try {
        auto mesh = std::make_shared<const Mesh>(*problem.graph, h);
        if (m.at("mesh_hash").get<std::string>() != hex64(mesh->hash()))
            throw IntegrityError("mesh hash mismatch: manifest " + m.at("mesh_hash").get<std::string>() + ", config " +
                                 hex64(mesh->hash()));
        if (m.at("config_hash").get<std::string>() != hex64(problem_hash(problem)))
            throw IntegrityError("config hash mismatch: field was produced by a different problem");
        F.mesh = mesh;
        F.grid.T = m.at("grid").at("T").get<double>();
        F.grid.n_steps = m.at("grid").at("n_steps").get<int>();
        F.problem_hash = problem_hash(problem);
        F.radius_factor = m.at("radius_factor").get<double>();
        F.subcell_samples = m.at("subcell_samples").get<int>();
        F.k_shift = m.value("k_shift", 0.0);
        F.constants = m.value("constants", nlohmann::json::object());
        const int n_slices = m.at("n_slices").get<int>();
        char name[32];
        for (int n = 0; n < n_slices; ++n) {
            std::snprintf(name, sizeof name, "slice_%05d.csv", n);
            std::istringstream in(read_text(dir / name));
            std::string line;
            std::getline(in, line);
            std::vector<double> vals;
            vals.reserve(static_cast<std::size_t>(mesh->size()));
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const auto cols = split(line, ',');
                if (cols.size() != 4) throw IntegrityError(std::string(name) + ": bad row '" + line + "'");
                const int id = std::stoi(cols[0]);
                if (id != static_cast<int>(vals.size()) || id >= mesh->size())
                    throw IntegrityError(std::string(name) + ": unexpected point id " + cols[0]);
                const Point& p = mesh->point(id);
                if (std::stoi(cols[1]) != p.edge || std::strtod(cols[2].c_str(), nullptr) != p.offset)
                    throw IntegrityError(std::string(name) + ": point " + cols[0] + " does not match the mesh");
                vals.push_back(std::strtod(cols[3].c_str(), nullptr));
            }
            if (static_cast<int>(vals.size()) != mesh->size()) throw IntegrityError(std::string(name) + ": row count mismatch");
            F.slices.push_back(std::move(vals));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("corrupt manifest: ") + e.what());
    } catch (const std::logic_error& e) {
        throw IntegrityError(std::string("corrupt slice file: ") + e.what());
    }
    return F;
}

namespace {

struct CliState {
    std::string config;
    std::string out = ".";
    std::string grids;
    std::string kinds = "all";
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

int cmd_audit(const CliState& s, std::ostream& out, std::ostream& err) {
    ProblemConfig cfg = load_config(s.config);
    const AssumptionAudit audit = audit_assumptions(*cfg.problem.hamiltonian, *cfg.problem.graph);
    nlohmann::json j = audit.to_json();
    j["route_request"] = cfg.route_request;
    int code = exit_code::ok;
    try {
        const Route r = resolve_route(cfg.route_request, audit);
        j["route"] = to_string(r);
        out << "audit: route " << to_string(r) << " admissible\n";
    } catch (const HypothesisError& e) {
        j["route"] = nullptr;
        j["error"] = e.what();
        err << "audit: " << e.what() << "\n";
        code = exit_code::hypothesis;
    }
    fs::create_directories(s.out);
    write_json_atomic(fs::path(s.out) / "audit.json", j);
    return code;
}

int cmd_solve(const CliState& s, std::ostream& out, std::ostream&) {
    ProblemConfig cfg = load_config(s.config);
    resolve_config_route(cfg);
    const SpaceTimeField field = solve(cfg.problem, cfg.solve_config(s.threads));
    const ScalarFunction& f = cfg.problem.f();
    nlohmann::json constants = field.constants;
    if (field.n_slices() >= 2)
        constants["k"] = estimate_k(field, cfg.problem.route == Route::Eikonal ? &f : nullptr).k;
    if (cfg.problem.route == Route::Eikonal && constants.contains("sup_f")) {
        constants["L0"] = constants["sup_f"];
        constants["L1"] = constants["sup_f"];
    }
    nlohmann::json extra{{"route", to_string(cfg.problem.route)}, {"config", cfg.raw}, {"constants", constants}};
    write_field(field, extra, s.out);
    out << "solve: " << field.n_slices() << " slices, " << field.mesh->size() << " points -> " << s.out << "\n";
    return exit_code::ok;
}

int cmd_check(const CliState& s, std::ostream& out, std::ostream& err) {
    std::vector<std::string> kinds;
    for (const auto& k : split(s.kinds, ',')) {
        if (k == "all") {
            kinds.insert(kinds.end(), kAllKinds.begin(), kAllKinds.end());
            continue;
        }
        if (std::find(kAllKinds.begin(), kAllKinds.end(), k) == kAllKinds.end()) throw UsageError("unknown kind: " + k);
        kinds.push_back(k);
    }
    if (kinds.empty()) throw UsageError("no kinds requested");
    ProblemConfig cfg = load_config(s.config);
    resolve_config_route(cfg);
    const std::uint64_t seed = s.seed.value_or(cfg.seed);
    const SpaceTimeField field = load_field(s.out, cfg.problem, cfg.h);
    if (std::abs(field.dt() - cfg.dt) > 1e-12 * cfg.dt) throw IntegrityError("field dt differs from the config");
    const Problem& p = cfg.problem;
    bool all_pass = true;
    for (const auto& kind : kinds) {
        VerdictReport r;
        if (kind == "bounds") {
            r = check_bounds(field, p);
        } else if (kind == "initial") {
            r = check_initial_layer(field, p);
        } else if (kind == "lipschitz") {
            r = check_lipschitz(field, p);
        } else if (kind == "monge") {
            MongeVerdictOptions o;
            o.threads = s.threads;
            r = monge_verdict(field, p, o);
        } else if (kind == "curve") {
            CurveOptions o;
            o.seed = seed;
            r = curve_residual(field, p, o);
        } else if (kind == "comparison") {
            ComparisonOptions o;
            o.seed = seed;
            r = comparison_experiment(p, cfg.solve_config(s.threads), o);
        } else {
            r = equivalence_on_field(field, p, seed);
        }
        r.seed = seed;
        write_json_atomic(fs::path(s.out) / ("verdict_" + kind + ".json"), r.to_json());
        out << kind << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
        if (!r.pass) {
            all_pass = false;
            if (!r.witnesses.empty()) err << kind << " witness: " << r.witnesses.front().dump() << "\n";
        }
    }
    return all_pass ? exit_code::ok : exit_code::verdict_fail;
}

int cmd_converge(const CliState& s, std::ostream& out, std::ostream& err) {
    ProblemConfig cfg = load_config(s.config);
    const auto grids = s.grids.empty() ? std::vector<std::pair<double, double>>{{cfg.h, cfg.dt}} : parse_grids(s.grids);
    resolve_config_route(cfg);
    const auto oracle = resolve_oracle(cfg.problem);
    if (!oracle) {
        err << "no oracle; run cmd_check instead\n";
        return exit_code::no_oracle;
    }
    const ConvergenceTable tab = convergence_study(cfg.problem, *oracle, grids, cfg.solve_config(s.threads));
    fs::create_directories(s.out);
    write_text_atomic(fs::path(s.out) / "convergence.csv", tab.to_csv());
    out << tab.to_csv();
    out << "rate: " << tab.rate_string() << "\n";
    return exit_code::ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hamilton-Jacobi solver and Monge-solution checker on metric graphs", "mongehj"};
    app.require_subcommand(1);
    CliState s;
    auto add_common = [&s](CLI::App* sub) {
        sub->add_option("--config", s.config, "problem config JSON")->required();
        sub->add_option("--out", s.out, "output directory");
        sub->add_option("--seed", s.seed, "RNG seed (overrides the config)");
        sub->add_option("--threads", s.threads, "worker threads")->check(CLI::PositiveNumber);
    };
    CLI::App* audit = app.add_subcommand("audit", "check the structural conditions on H");
    CLI::App* solve_cmd = app.add_subcommand("solve", "run the scheme and write slices plus manifest");
    CLI::App* check = app.add_subcommand("check", "run verdicts on a stored field");
    CLI::App* converge = app.add_subcommand("converge", "error table against an oracle");
    for (CLI::App* sub : {audit, solve_cmd, check, converge}) add_common(sub);
    check->add_option("--kinds", s.kinds, "comma list of verdict kinds, or all");
    converge->add_option("--grids", s.grids, "h1:dt1,h2:dt2,...");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }

    try {
        if (*audit) return cmd_audit(s, out, err);
        if (*solve_cmd) return cmd_solve(s, out, err);
        if (*check) return cmd_check(s, out, err);
        return cmd_converge(s, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const IntegrityError& e) {
        err << "integrity error: " << e.what() << "\n";
        return exit_code::integrity;
    } catch (const HypothesisError& e) {
        err << "hypothesis failure: " << e.what() << "\n";
        return exit_code::hypothesis;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return exit_code::hypothesis;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_code::usage;
    }
}

} // namespace mongehj
