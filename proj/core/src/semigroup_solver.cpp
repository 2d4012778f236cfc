#include "mongehj/semigroup_solver.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace mongehj {

TimeGrid TimeGrid::from_dt(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("T and dt must be positive");
    const long long n = std::llround(T / dt);
    if (n < 1 || std::abs(static_cast<double>(n) * dt - T) > 1e-9 * T)
        throw ConfigError("dt must divide the horizon T");
    return {T, static_cast<int>(n)};
}

double SpaceTimeField::at_time(const Point& x, double t) const {
    const double s = t / dt();
    const int last = n_slices() - 1;
    int n0 = static_cast<int>(std::floor(s + 1e-12));
    n0 = std::clamp(n0, 0, last);
    const double w = s - n0;
    if (n0 == last || w <= 1e-12) return at(x, n0);
    return (1.0 - w) * at(x, n0) + w * at(x, n0 + 1);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t problem_hash(const Problem& p) {
    nlohmann::json j;
    j["graph"] = p.graph->to_json();
    j["hamiltonian"] = p.hamiltonian->to_json();
    j["u0"] = p.u0.to_json();
    j["route"] = to_string(p.route);
    return fnv1a(j.dump());
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n < 2 * threads) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const int lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

StepOperator::StepOperator(const Problem& problem, const Mesh& mesh, double dt, double radius_factor, int subcell_samples)
    : problem_(&problem), mesh_(&mesh), dt_(dt), subcell_(std::max(1, subcell_samples)) {
    if (problem.route == Route::Eikonal) {
        radius_ = dt;
        interior_ = !problem.f().is_constant();
        time_dependent_ = problem.f().time_dependent();
    } else {
        radius_ = radius_factor * dt;
        interior_ = true;
        time_dependent_ = problem.hamiltonian->time_dependent();
    }
}

std::vector<Candidate> ball_candidates(const Mesh& mesh, const Point& x, double r, int subcell_samples, bool interior) {
    const MetricGraph& g = mesh.graph();
    const int m = std::max(1, subcell_samples);
    std::vector<Candidate> out;
    out.push_back({mesh.locate(x), x, 0.0});
    for (const CellPiece& pc : mesh.reach(x, r)) {
        const double cw = pc.cell_hi - pc.cell_lo;
        auto add = [&](double o) {
            double d = pc.hi > pc.lo ? pc.d_lo + (pc.d_hi - pc.d_lo) * (o - pc.lo) / (pc.hi - pc.lo) : pc.d_lo;
            d = std::clamp(d, 0.0, r);
            const double w = (o - pc.cell_lo) / cw;
            Interp ip{pc.node_a, pc.node_b, w};
            if (w <= 0.0) ip = {pc.node_a, pc.node_a, 0.0};
            else if (w >= 1.0) ip = {pc.node_b, pc.node_b, 0.0};
            out.push_back({ip, g.point(pc.edge, std::clamp(o, 0.0, g.edge(pc.edge).len)), d});
        };
        add(pc.lo);
        if (pc.hi > pc.lo) add(pc.hi);
        if (interior) {
            for (int j = 1; j < m; ++j) {
                const double o = pc.cell_lo + cw * j / m;
                if (o > pc.lo && o < pc.hi) add(o);
            }
        }
    }
    return out;
}

std::vector<Candidate> StepOperator::candidates(const Point& x) const {
    return ball_candidates(*mesh_, x, radius_, subcell_, interior_);
}

double StepOperator::cost(const Point& x, const Candidate& c, double t_arr) const {
    if (problem_->route == Route::General) return dt_ * problem_->hamiltonian->legendre_L(x, t_arr, c.d / dt_);
    const ScalarFunction& f = problem_->f();
    if (f.is_constant()) return f.constant_value() * dt_;
    const MetricGraph& g = mesh_->graph();
    const Geodesic geo = g.geodesic(x, c.y);
    const double h = mesh_->spacing();
    const int N = std::max(1, static_cast<int>(std::ceil(std::max(c.d, dt_) / h - 1e-9)));
    double sum = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double sigma = dt_ * k / N;
        const double wgt = (k == 0 || k == N) ? 0.5 : 1.0;
        sum += wgt * f(geo.at(g, geo.length * k / N), t_arr - sigma);
    }
    return sum * dt_ / N;
}

HopChoice StepOperator::apply(const Point& x, double t_arr, const std::vector<double>& prev) const {
    HopChoice best;
    for (const Candidate& c : candidates(x)) {
        const double cst = cost(x, c, t_arr);
        const double v = combine(c, cst, prev);
        if (v < best.value) {
            best.value = v;
            best.y = c.y;
            best.d = c.d;
            best.cost = cst;
        }
    }
    return best;
}

double slice_lipschitz(const Mesh& mesh, const std::vector<double>& u) {
    double lip = 0.0;
    for (int i = 0; i < mesh.size(); ++i)
        for (const auto& nb : mesh.neighbors(i))
            lip = std::max(lip, std::abs(u[static_cast<std::size_t>(i)] - u[static_cast<std::size_t>(nb.node)]) / nb.gap);
    return lip;
}

namespace {

struct RunResult {
    SpaceTimeField field;
    double needed_radius = 0.0;
    bool radius_exceeded = false;
};

void validate_config(const Problem& problem, const SolveConfig& config) {
    if (!(config.h > 0.0) || !(config.dt > 0.0)) throw ConfigError("h and dt must be positive");
    if (config.h > config.dt * (1.0 + 1e-12)) throw ConfigError("mesh spacing h must not exceed dt");
    if (config.subcell_samples < 1) throw ConfigError("subcell_samples must be at least 1");
    (void)TimeGrid::from_dt(problem.horizon(), config.dt);
}

std::vector<double> initial_slice(const Problem& problem, const Mesh& mesh) {
    std::vector<double> u(static_cast<std::size_t>(mesh.size()));
    for (int i = 0; i < mesh.size(); ++i) {
        u[static_cast<std::size_t>(i)] = problem.u0(mesh.point(i), 0.0);
        if (!std::isfinite(u[static_cast<std::size_t>(i)])) throw DomainError("u0 is not finite on the mesh");
    }
    return u;
}

// Runs the time loop; when view is given, stops early once the measured
// Lipschitz constant needs a larger radius than radius_factor.
RunResult run(const Problem& problem, const SolveConfig& config, std::shared_ptr<const Mesh> mesh, double radius_factor,
              const LagrangianView* view) {
    RunResult res;
    SpaceTimeField& F = res.field;
    F.mesh = mesh;
    F.grid = TimeGrid::from_dt(problem.horizon(), config.dt);
    F.problem_hash = problem_hash(problem);
    F.radius_factor = radius_factor;
    F.subcell_samples = config.subcell_samples;
    F.slices.reserve(static_cast<std::size_t>(F.grid.n_steps));
    F.slices.push_back(initial_slice(problem, *mesh));

    const StepOperator op(problem, *mesh, config.dt, radius_factor, config.subcell_samples);
    const int N = mesh->size();
    std::vector<std::vector<Candidate>> cands(static_cast<std::size_t>(N));
    std::vector<std::vector<double>> costs(static_cast<std::size_t>(N));
    parallel_for(N, config.threads, [&](int i) { cands[static_cast<std::size_t>(i)] = op.candidates(mesh->point(i)); });
    auto fill_costs = [&](double t_arr) {
        parallel_for(N, config.threads, [&](int i) {
            const auto& cs = cands[static_cast<std::size_t>(i)];
            auto& out = costs[static_cast<std::size_t>(i)];
            out.resize(cs.size());
            for (std::size_t c = 0; c < cs.size(); ++c) out[c] = op.cost(mesh->point(i), cs[c], t_arr);
        });
    };

    for (int n = 1; n < F.grid.n_steps; ++n) {
        const double t_arr = F.grid.time(n);
        if (n == 1 || op.cost_time_dependent()) fill_costs(t_arr);
        const auto& prev = F.slices.back();
        std::vector<double> next(static_cast<std::size_t>(N));
        parallel_for(N, config.threads, [&](int i) {
            const auto& cs = cands[static_cast<std::size_t>(i)];
            const auto& cc = costs[static_cast<std::size_t>(i)];
            double best = kInf;
            for (std::size_t c = 0; c < cs.size(); ++c) best = std::min(best, StepOperator::combine(cs[c], cc[c], prev));
            next[static_cast<std::size_t>(i)] = best;
        });
        for (double v : next)
            if (!std::isfinite(v)) throw SolverError("non-finite value produced by the step");
        if (view) {
            double rate = 0.0;
            for (int i = 0; i < N; ++i)
                rate = std::max(rate, std::abs(next[static_cast<std::size_t>(i)] - prev[static_cast<std::size_t>(i)]) / config.dt);
            const double C = std::max(slice_lipschitz(*mesh, next), rate);
            const double need = search_radius(*view, C);
            if (need > radius_factor * (1.0 + 1e-6)) {
                res.radius_exceeded = true;
                res.needed_radius = need;
                return res;
            }
        }
        F.slices.push_back(std::move(next));
    }
    return res;
}

double sup_abs_f_on_grid(const Problem& problem, const Mesh& mesh, const TimeGrid& grid) {
    double s = 0.0;
    const ScalarFunction& f = problem.f();
    if (f.is_constant()) return std::abs(f.constant_value());
    for (int n = 0; n <= grid.n_steps; ++n) {
        const double t = std::min(grid.time(n), grid.T);
        for (int i = 0; i < mesh.size(); ++i) {
            const double v = f(mesh.point(i), t);
            if (!std::isfinite(v)) throw DomainError("unbounded f sample");
            s = std::max(s, std::abs(v));
        }
        if (!f.time_dependent()) break;
    }
    return s;
}

} // namespace

SpaceTimeField solve_eikonal(const Problem& problem, const SolveConfig& config) {
    if (problem.hamiltonian->form() != HForm::Eikonal) throw ConfigError("eikonal solver needs an eikonal Hamiltonian");
    validate_config(problem, config);
    Problem p = problem;
    p.route = Route::Eikonal;
    auto mesh = std::make_shared<const Mesh>(*p.graph, config.h);
    const double supf = sup_abs_f_on_grid(p, *mesh, TimeGrid::from_dt(p.horizon(), config.dt));
    RunResult r = run(p, config, mesh, 1.0, nullptr);
    r.field.constants = {{"route", "eikonal"}, {"sup_f", supf}, {"R", 1.0}};
    return std::move(r.field);
}

SpaceTimeField solve_general(const Problem& problem, const SolveConfig& config) {
    validate_config(problem, config);
    Problem p = problem;
    p.route = Route::General;
    const AssumptionAudit audit = audit_assumptions(*p.hamiltonian, *p.graph);
    if (auto fail = audit.first_failure("general"))
        throw HypothesisError("general solver refused: " + *fail + " fails (" + audit.verdict(*fail).detail + ")");
    const LagrangianView view(p.hamiltonian, *p.graph);
    auto mesh = std::make_shared<const Mesh>(*p.graph, config.h);

    const std::vector<double> u0 = initial_slice(p, *mesh);
    const double lip0 = slice_lipschitz(*mesh, u0);
    double C = lip0;
    for (const auto& [x, t] : view.samples()) {
        C = std::max(C, std::abs(p.hamiltonian->eval_H(x, t, lip0)));
        C = std::max(C, std::abs(p.hamiltonian->eval_H(x, t, 0.0)));
    }
    double R = search_radius(view, C);
    for (int attempt = 0;; ++attempt) {
        RunResult r = run(p, config, mesh, R, &view);
        if (!r.radius_exceeded) {
            r.field.constants = {{"route", "general"}, {"L0", view.L0()}, {"L1", view.L1()}, {"R", R},
                                 {"C_initial", C},     {"retries", attempt}};
            return std::move(r.field);
        }
        if (attempt >= config.max_retries)
            throw SolverError("radius policy unresolvable: measured Lipschitz growth needs R = " +
                              std::to_string(r.needed_radius));
        R = r.needed_radius;
    }
}

SpaceTimeField solve(const Problem& problem, const SolveConfig& config) {
    return problem.route == Route::Eikonal ? solve_eikonal(problem, config) : solve_general(problem, config);
}

double hopflax_direct(const LagrangianView& view, const MetricGraph& g, const Mesh& mesh, const ScalarFunction& u0,
                      const Point& x, double t) {
    if (!view.xt_independent()) throw DomainError("Hopf-Lax formula needs L independent of (x, t)");
    if (t <= 0.0) return u0(x, 0.0);
    double best = kInf;
    for (int i = 0; i < mesh.size(); ++i) {
        const Point& y = mesh.point(i);
        const double L = view.L(x, t, g.distance(x, y) / t);
        if (!std::isfinite(L)) continue;
        best = std::min(best, u0(y, 0.0) + t * L);
    }
    return best;
}

HopfLaxOracle::HopfLaxOracle(const Problem& problem, double h_fine) : problem_(problem), spec_(problem.hamiltonian) {
    if (!spec_->xt_independent()) throw DomainError("Hopf-Lax oracle needs L independent of (x, t)");
    mesh_ = std::make_shared<const Mesh>(*problem_.graph, h_fine);
    u0_.resize(static_cast<std::size_t>(mesh_->size()));
    for (int i = 0; i < mesh_->size(); ++i) u0_[static_cast<std::size_t>(i)] = problem_.u0(mesh_->point(i), 0.0);
}

double HopfLaxOracle::operator()(const Point& x, double t) const {
    if (t <= 0.0) return problem_.u0(x, 0.0);
    const MetricGraph& g = *problem_.graph;
    const HamiltonianSpec& H = *spec_;
    auto objective = [&](const Point& y, double u0y) { return u0y + t * H.legendre_L(x, t, g.distance(x, y) / t); };
    double best = kInf;
    int bi = -1;
    for (int i = 0; i < mesh_->size(); ++i) {
        const double v = objective(mesh_->point(i), u0_[static_cast<std::size_t>(i)]);
        if (v < best) {
            best = v;
            bi = i;
        }
    }
    if (bi < 0) return best;
    // Golden-section search inside each cell adjacent to the best node.
    const Point& pb = mesh_->point(bi);
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& nodes = mesh_->edge_nodes(e);
        const auto& offs = mesh_->edge_offsets(e);
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
            if (nodes[k] != bi && nodes[k + 1] != bi) continue;
            double lo = offs[k], hi = offs[k + 1];
            auto F = [&](double o) {
                const Point y = g.point(e, o);
                return objective(y, problem_.u0(y, 0.0));
            };
            const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
            double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
            double fc = F(c), fd = F(d);
            for (int it = 0; it < 80; ++it) {
                if (fc <= fd) {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - phi * (hi - lo);
                    fc = F(c);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + phi * (hi - lo);
                    fd = F(d);
                }
            }
            best = std::min({best, fc, fd});
        }
    }
    (void)pb;
    return best;
}

void ResidualReport::finalize() {
    std::vector<double> a;
    a.reserve(entries.size());
    for (const auto& e : entries) a.push_back(std::abs(e.residual));
    max_abs = 0.0;
    median_abs = 0.0;
    if (a.empty()) return;
    max_abs = *std::max_element(a.begin(), a.end());
    std::sort(a.begin(), a.end());
    const std::size_t m = a.size() / 2;
    median_abs = a.size() % 2 ? a[m] : 0.5 * (a[m - 1] + a[m]);
}

nlohmann::json ResidualReport::to_json() const {
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const auto& e : entries)
        j["points"].push_back({{"id", e.node}, {"slice", e.n}, {"value", e.value}, {"reference", e.reference}, {"residual", e.residual}});
    j["aggregate"] = {{"max_abs", max_abs}, {"median_abs", median_abs}};
    return j;
}

ResidualReport dpp_residual(const SpaceTimeField& field, const Problem& problem,
                            const std::vector<std::pair<int, int>>& samples) {
    const StepOperator op(problem, *field.mesh, field.dt(), field.radius_factor, field.subcell_samples);
    ResidualReport rep;
    for (auto [node, n] : samples) {
        if (n < 1 || n >= field.n_slices()) throw DomainError("dpp sample needs 1 <= slice < n_slices");
        const double ref = op.apply(field.mesh->point(node), field.time(n), field.slices[static_cast<std::size_t>(n - 1)]).value;
        const double v = field.value(node, n);
        rep.entries.push_back({node, n, v, ref, v - ref});
    }
    rep.finalize();
    return rep;
}

} // namespace mongehj
