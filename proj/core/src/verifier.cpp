#include "mongehj/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace mongehj {

namespace {

nlohmann::json point_witness(const SpaceTimeField& field, int node, int n) {
    const Point& p = field.mesh->point(node);
    return {{"id", node}, {"edge", p.edge}, {"offset", p.offset}, {"slice", n}, {"t", field.time(n)}, {"value", field.value(node, n)}};
}

Point random_point(const MetricGraph& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, g.total_length());
    double s = U(rng);
    for (int e = 0; e < g.num_edges(); ++e) {
        const double len = g.edge(e).len;
        if (s <= len || e + 1 == g.num_edges()) return g.point(e, std::clamp(s, 0.0, len));
        s -= len;
    }
    return g.vertex_point(0);
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

void VerdictReport::fail(nlohmann::json witness) {
    pass = false;
    if (witnesses.size() < 10) witnesses.push_back(std::move(witness));
}

nlohmann::json VerdictReport::to_json() const {
    return {{"kind", kind},
            {"pass", pass},
            {"measurements", measurements},
            {"witnesses", witnesses},
            {"config_hash", hex(config_hash)},
            {"seed", seed}};
}

double sup_abs_f(const Problem& problem, const Mesh& mesh, const TimeGrid& grid) {
    const ScalarFunction& f = problem.f();
    if (f.is_constant()) return std::abs(f.constant_value());
    const Mesh fine(mesh.graph(), mesh.spacing() / 8.0);
    const int nt = f.time_dependent() ? 8 * grid.n_steps : 0;
    double sup = 0.0, jump = 0.0;
    std::vector<double> prev;
    for (int k = 0; k <= nt; ++k) {
        const double t = grid.T * k / std::max(1, 8 * grid.n_steps);
        std::vector<double> vals(static_cast<std::size_t>(fine.size()));
        for (int i = 0; i < fine.size(); ++i) {
            const double v = f(fine.point(i), t);
            if (!std::isfinite(v)) throw DomainError("unbounded f sample");
            vals[static_cast<std::size_t>(i)] = v;
            sup = std::max(sup, std::abs(v));
            if (!prev.empty()) jump = std::max(jump, std::abs(v - prev[static_cast<std::size_t>(i)]));
        }
        for (int i = 0; i < fine.size(); ++i)
            for (const auto& nb : fine.neighbors(i))
                jump = std::max(jump, std::abs(vals[static_cast<std::size_t>(i)] - vals[static_cast<std::size_t>(nb.node)]));
        prev = std::move(vals);
    }
    return sup + jump + 1e-12 * (1.0 + sup);
}

PredictedConstants predicted_constants(const SpaceTimeField& field, const Problem& problem) {
    PredictedConstants pc;
    const Mesh& mesh = *field.mesh;
    const double C0 = slice_lipschitz(mesh, field.slices.front());
    const double T = problem.horizon();
    if (problem.route == Route::Eikonal) {
        const double supf = sup_abs_f(problem, mesh, field.grid);
        const ScalarFunction& f = problem.f();
        double lip_x = 0.0, lip_t = 0.0;
        if (!f.is_constant()) {
            const int nt = f.time_dependent() ? field.grid.n_steps : 1;
            std::vector<double> prev;
            for (int n = 0; n < nt; ++n) {
                std::vector<double> vals(static_cast<std::size_t>(mesh.size()));
                for (int i = 0; i < mesh.size(); ++i) vals[static_cast<std::size_t>(i)] = f(mesh.point(i), field.time(n));
                lip_x = std::max(lip_x, slice_lipschitz(mesh, vals));
                if (!prev.empty())
                    for (std::size_t i = 0; i < vals.size(); ++i)
                        lip_t = std::max(lip_t, std::abs(vals[i] - prev[i]) / field.dt());
                prev = std::move(vals);
            }
        }
        const double Lf = std::min(lip_x, lip_t);
        pc.K = C0 + 2.0 * supf + T * Lf;
        pc.K_space = pc.K + supf;
        pc.detail = {{"C0", C0}, {"sup_f", supf}, {"L_f", Lf}, {"L1", supf}};
        return pc;
    }
    const LagrangianView view(problem.hamiltonian, *problem.graph);
    const AssumptionAudit audit = audit_assumptions(*problem.hamiltonian, *problem.graph);
    const double L0 = view.L0(), L1 = view.L1(), CT = audit.C_T;
    double Rt = 0.0;
    for (double q = 0.0; q < 1e7; q += std::max(0.01, q * 1e-3)) {
        if (view.m(q) > L0 + T * CT + 1.0 + C0 * q) break;
        Rt = q;
    }
    pc.K = L0 + C0 * Rt + T * CT + view.sup_abs_m(Rt);
    pc.K_space = pc.K + L1;
    pc.detail = {{"C0", C0}, {"L0", L0}, {"L1", L1}, {"C_T", CT}, {"R_t", Rt}, {"sup_m", view.sup_abs_m(Rt)}};
    return pc;
}

VerdictReport check_bounds(const SpaceTimeField& field, const Problem& problem) {
    VerdictReport rep;
    rep.kind = "bounds";
    rep.config_hash = field.problem_hash;
    const auto& u0 = field.slices.front();
    const double inf_u0 = *std::min_element(u0.begin(), u0.end());
    double sup_u0 = 0.0;
    for (double v : u0) sup_u0 = std::max(sup_u0, std::abs(v));
    double L0 = 0.0;
    std::optional<double> eik_bound;
    if (problem.route == Route::Eikonal) {
        const double supf = sup_abs_f(problem, *field.mesh, field.grid);
        L0 = supf;
        eik_bound = sup_u0 + problem.horizon() * supf;
        rep.measurements["sup_f"] = supf;
        rep.measurements["sup_bound"] = *eik_bound;
    } else {
        L0 = LagrangianView(problem.hamiltonian, *problem.graph).L0();
    }
    rep.measurements["L0"] = L0;
    rep.measurements["inf_u0"] = inf_u0;
    long violations = 0;
    double sup_u = 0.0;
    for (int n = 0; n < field.n_slices(); ++n) {
        const double t = field.time(n);
        for (int i = 0; i < field.mesh->size(); ++i) {
            const double u = field.value(i, n);
            const double lo = -L0 * t + inf_u0;
            const double hi = L0 * t + u0[static_cast<std::size_t>(i)];
            sup_u = std::max(sup_u, std::abs(u));
            const bool bad_sandwich = u < lo || u > hi;
            const bool bad_sup = eik_bound && std::abs(u) > *eik_bound;
            if (bad_sandwich || bad_sup) {
                ++violations;
                auto w = point_witness(field, i, n);
                w["lower"] = lo;
                w["upper"] = hi;
                if (eik_bound) w["sup_bound"] = *eik_bound;
                rep.fail(w);
            }
        }
    }
    rep.measurements["violations"] = violations;
    rep.measurements["sup_abs_u"] = sup_u;
    return rep;
}

VerdictReport check_initial_layer(const SpaceTimeField& field, const Problem& problem) {
    VerdictReport rep;
    rep.kind = "initial";
    rep.config_hash = field.problem_hash;
    const PredictedConstants pc = predicted_constants(field, problem);
    const auto& u0 = field.slices.front();
    double K_meas = 0.0;
    int wn = -1, wi = -1;
    nlohmann::json profile = nlohmann::json::array();
    for (int n = 1; n < field.n_slices(); ++n) {
        double sup = 0.0;
        int si = 0;
        for (int i = 0; i < field.mesh->size(); ++i) {
            const double e = std::abs(field.value(i, n) - u0[static_cast<std::size_t>(i)]);
            if (e > sup) {
                sup = e;
                si = i;
            }
        }
        const double ratio = sup / field.time(n);
        if (ratio > K_meas) {
            K_meas = ratio;
            wn = n;
            wi = si;
        }
        if (n <= 10) profile.push_back({{"t", field.time(n)}, {"sup_err", sup}});
    }
    rep.measurements = {{"K_meas", K_meas}, {"K_pred", pc.K}, {"slack", 1.5}, {"predicted", pc.detail}, {"early_profile", profile}};
    if (K_meas > 1.5 * pc.K) {
        auto w = point_witness(field, wi, wn);
        w["u0"] = u0[static_cast<std::size_t>(wi)];
        w["ratio"] = K_meas;
        rep.fail(w);
    }
    return rep;
}

VerdictReport check_lipschitz(const SpaceTimeField& field, const Problem& problem) {
    VerdictReport rep;
    rep.kind = "lipschitz";
    rep.config_hash = field.problem_hash;
    const PredictedConstants pc = predicted_constants(field, problem);
    double Kt = 0.0, Kx = 0.0;
    int tn = -1, ti = -1, xn = -1;
    for (int n = 0; n < field.n_slices(); ++n) {
        const double lx = slice_lipschitz(*field.mesh, field.slices[static_cast<std::size_t>(n)]);
        if (lx > Kx) {
            Kx = lx;
            xn = n;
        }
        if (n + 1 < field.n_slices())
            for (int i = 0; i < field.mesh->size(); ++i) {
                const double r = std::abs(field.value(i, n + 1) - field.value(i, n)) / field.dt();
                if (r > Kt) {
                    Kt = r;
                    tn = n;
                    ti = i;
                }
            }
    }
    rep.measurements = {{"K_time", Kt}, {"K_space", Kx}, {"K_pred", pc.K}, {"K_space_pred", pc.K_space},
                        {"slack", 1.5}, {"predicted", pc.detail}};
    if (Kt > 1.5 * pc.K) {
        auto w = point_witness(field, ti, tn);
        w["next_value"] = field.value(ti, tn + 1);
        w["rate"] = Kt;
        rep.fail(w);
    }
    if (Kx > 1.5 * pc.K_space) rep.fail({{"slice", xn}, {"t", field.time(xn)}, {"space_lipschitz", Kx}});
    return rep;
}

VerdictReport comparison_experiment(const Problem& problem, const SolveConfig& config, const ComparisonOptions& opts) {
    VerdictReport rep;
    rep.kind = "comparison";
    rep.seed = opts.seed;
    rep.config_hash = problem_hash(problem);
    const SpaceTimeField u = solve(problem, config);
    const Route route = problem.route;
    const ScalarFunction& f = problem.f();
    const double k = estimate_k(u, route == Route::Eikonal ? &f : nullptr).k;
    const SpaceTimeField v = shift_v(u, k);
    const std::vector<double> deltas = default_deltas(u);
    const double dmax = deltas.empty() ? u.dt() : deltas.front();

    std::mt19937_64 rng(opts.seed);
    auto pool = interior_points(u, dmax, problem.horizon());
    std::shuffle(pool.begin(), pool.end(), rng);
    if (static_cast<int>(pool.size()) > opts.sample_points) pool.resize(static_cast<std::size_t>(opts.sample_points));

    const HamiltonianSpec& H = *problem.hamiltonian;
    const LagrangianFn L = [&H](const Point& x, double t, double q) { return H.legendre_L(x, t, q); };
    auto estimate = [&](const SpaceTimeField& w, int node, int n) {
        return route == Route::Eikonal ? subslope(w, node, n, deltas).value : lagrangian_subslope(w, L, node, n, deltas).value;
    };
    std::vector<double> base;
    for (auto [node, n] : pool) base.push_back(estimate(v, node, n));

    double worst_shift_err = 0.0;
    long order_viol_eps = 0;
    for (double eps : opts.epsilons) {
        const SpaceTimeField ue = add_linear_in_time(u, -eps);
        for (int n = 0; n < u.n_slices(); ++n)
            for (int i = 0; i < u.mesh->size(); ++i)
                if (ue.value(i, n) > u.value(i, n)) {
                    ++order_viol_eps;
                    rep.fail({{"check", "perturbation order"}, {"eps", eps}, {"point", point_witness(u, i, n)}});
                }
        const SpaceTimeField ve = add_linear_in_time(v, -eps);
        for (std::size_t p = 0; p < pool.size(); ++p) {
            const double drop = base[p] - estimate(ve, pool[p].first, pool[p].second);
            const double err = std::abs(drop - eps);
            worst_shift_err = std::max(worst_shift_err, err);
            if (err > 1e-9)
                rep.fail({{"check", "perturbation slope"}, {"eps", eps}, {"drop", drop},
                          {"point", point_witness(v, pool[p].first, pool[p].second)}});
        }
    }

    const double s = opts.data_shift;
    struct Pair {
        std::string name;
        Problem lower;
    };
    std::vector<Pair> pairs;
    pairs.push_back({"u0", problem.with_u0(problem.u0.shifted(-s))});
    if (H.form() != HForm::Tabulated) {
        pairs.push_back({"f", problem.with_hamiltonian(H.with_f(f.shifted(-s)))});
        Problem both = problem.with_hamiltonian(H.with_f(f.shifted(-s)));
        both = both.with_u0(problem.u0.shifted(-s));
        pairs.push_back({"u0+f", both});
    }
    nlohmann::json data = nlohmann::json::array();
    for (auto& pr : pairs) {
        pr.lower.route = route;
        const SpaceTimeField ul = solve(pr.lower, config);
        long viol = 0;
        double min_gap = kInf;
        for (int n = 0; n < u.n_slices(); ++n)
            for (int i = 0; i < u.mesh->size(); ++i) {
                const double gap = u.value(i, n) - ul.value(i, n);
                min_gap = std::min(min_gap, gap);
                if (gap < 0.0) {
                    ++viol;
                    auto w = point_witness(u, i, n);
                    w["lower_value"] = ul.value(i, n);
                    w["pair"] = pr.name;
                    rep.fail(w);
                }
            }
        data.push_back({{"pair", pr.name}, {"violations", viol}, {"min_gap", min_gap}});
    }
    rep.measurements = {{"k", k},
                        {"epsilons", opts.epsilons},
                        {"sample_points", pool.size()},
                        {"max_slope_shift_error", worst_shift_err},
                        {"perturbation_order_violations", order_viol_eps},
                        {"data_monotonicity", data}};
    return rep;
}

namespace {

// Running cost of a constant-speed stretch along geo from arc s0, duration tau,
// starting (in backward time) at t_start.
double segment_cost(const Problem& problem, const Geodesic& geo, double s0, double dist, double tau, double t_start,
                    double h, double dt) {
    const MetricGraph& g = *problem.graph;
    const double q = dist / tau;
    if (problem.route == Route::General) {
        const int M = std::max(1, static_cast<int>(std::ceil(tau / dt - 1e-9)));
        double c = 0.0;
        for (int j = 0; j < M; ++j) {
            const double sigma = tau * j / M;
            c += (tau / M) * problem.hamiltonian->legendre_L(geo.at(g, s0 + q * sigma), t_start - sigma, q);
        }
        return c;
    }
    const ScalarFunction& f = problem.f();
    if (f.is_constant()) return f.constant_value() * tau;
    const int N = std::max(1, static_cast<int>(std::ceil(std::max(dist, tau) / h - 1e-9)));
    double sum = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double sigma = tau * k / N;
        const double w = (k == 0 || k == N) ? 0.5 : 1.0;
        sum += w * f(geo.at(g, s0 + q * sigma), t_start - sigma);
    }
    return sum * tau / N;
}

} // namespace

VerdictReport curve_residual(const SpaceTimeField& field, const Problem& problem, const CurveOptions& opts) {
    VerdictReport rep;
    rep.kind = "curve";
    rep.seed = opts.seed;
    rep.config_hash = field.problem_hash;
    const MetricGraph& g = *problem.graph;
    const double h = field.mesh->spacing(), dt = field.dt();
    const double tol = opts.tol.value_or(3.0 * (h + dt));
    const double vmax = problem.route == Route::Eikonal ? 1.0 : field.radius_factor;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    std::uniform_int_distribution<int> slice_dist(1, std::max(1, field.n_slices() - 1));
    std::uniform_int_distribution<int> seg_dist(3, 8);

    double worst_sub = -kInf;
    long sub_fail = 0;
    for (int c = 0; c < opts.n_curves; ++c) {
        const int n0 = slice_dist(rng);
        const double t0 = field.time(n0);
        const Point x0 = random_point(g, rng);
        Point cur = x0;
        double elapsed = 0.0, cost = 0.0;
        const int S = seg_dist(rng);
        nlohmann::json path = nlohmann::json::array();
        for (int sgm = 0; sgm < S; ++sgm) {
            double tau = dt + 3.0 * dt * U01(rng);
            if (elapsed + tau > t0) tau = t0 - elapsed;
            if (tau <= 1e-15) break;
            const double speed = vmax * U01(rng);
            const Point target = random_point(g, rng);
            const Geodesic geo = g.geodesic(cur, target);
            const double dist = std::min(speed * tau, geo.length);
            cost += segment_cost(problem, geo, 0.0, dist, tau, t0 - elapsed, h, dt);
            cur = geo.at(g, dist);
            elapsed += tau;
            path.push_back({{"tau", tau}, {"dist", dist}});
        }
        const double lhs = field.at(x0, n0);
        const double rhs = cost + field.at_time(cur, t0 - elapsed);
        const double gap = lhs - rhs;
        worst_sub = std::max(worst_sub, gap);
        if (gap > tol) {
            ++sub_fail;
            rep.fail({{"check", "subsolution"}, {"x_edge", x0.edge}, {"x_offset", x0.offset}, {"t", t0}, {"u", lhs},
                      {"cost_plus_end", rhs}, {"segments", path}});
        }
    }

    const StepOperator op(problem, *field.mesh, dt, field.radius_factor, field.subcell_samples);
    std::uniform_int_distribution<int> node_dist(0, field.mesh->size() - 1);
    double worst_super = -kInf;
    long super_fail = 0;
    for (int c = 0; c < opts.super_points && field.n_slices() > 1; ++c) {
        const int node = node_dist(rng);
        const int n0 = slice_dist(rng);
        Point x = field.mesh->point(node);
        int n = n0;
        double total = 0.0;
        const int hops = std::min(opts.chain_hops, n0);
        for (int j = 0; j < hops; ++j) {
            const HopChoice hc = op.apply(x, field.time(n), field.slices[static_cast<std::size_t>(n - 1)]);
            total += hc.cost;
            x = hc.y;
            --n;
        }
        const double chain = total + field.at(x, n);
        const double gap = chain - field.value(node, n0);
        worst_super = std::max(worst_super, gap);
        if (gap > tol) {
            ++super_fail;
            auto w = point_witness(field, node, n0);
            w["check"] = "supersolution";
            w["chain_value"] = chain;
            w["hops"] = hops;
            rep.fail(w);
        }
    }
    rep.measurements = {{"tol_curve", tol},          {"n_curves", opts.n_curves}, {"max_sub_gap", worst_sub},
                        {"sub_failures", sub_fail},  {"super_points", opts.super_points},
                        {"max_super_gap", worst_super}, {"super_failures", super_fail}, {"speed_cap", vmax}};
    return rep;
}

double own_hop_chain_gap(const SpaceTimeField& field, const Problem& problem, int n_chains, std::uint64_t seed) {
    const StepOperator op(problem, *field.mesh, field.dt(), field.radius_factor, field.subcell_samples);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> node_dist(0, field.mesh->size() - 1);
    std::uniform_int_distribution<int> slice_dist(1, std::max(1, field.n_slices() - 1));
    double worst = -kInf;
    for (int c = 0; c < n_chains; ++c) {
        const int start = node_dist(rng);
        const int n0 = slice_dist(rng);
        const int hops = std::min(4, n0);
        std::vector<double> costs;
        int x = start;
        for (int j = 0; j < hops; ++j) {
            std::vector<Candidate> nodes;
            for (const Candidate& cd : op.candidates(field.mesh->point(x)))
                if (cd.ip.w == 0.0) nodes.push_back(cd);
            std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
            const Candidate& cd = nodes[pick(rng)];
            costs.push_back(op.cost(field.mesh->point(x), cd, field.time(n0 - j)));
            x = cd.ip.a;
        }
        double S = field.value(x, n0 - hops);
        for (int j = hops - 1; j >= 0; --j) S = S + costs[static_cast<std::size_t>(j)];
        worst = std::max(worst, field.value(start, n0) - S);
    }
    return worst;
}

std::vector<std::pair<int, int>> sample_interior(const SpaceTimeField& field, double t_margin, int max_points) {
    const double T = field.grid.T;
    const auto all = interior_points(field, t_margin, T - t_margin);
    if (max_points <= 0 || static_cast<int>(all.size()) <= max_points) return all;
    std::vector<std::pair<int, int>> out;
    const double stride = static_cast<double>(all.size()) / max_points;
    for (int i = 0; i < max_points; ++i) out.push_back(all[static_cast<std::size_t>(i * stride)]);
    return out;
}

VerdictReport monge_verdict(const SpaceTimeField& field, const Problem& problem, const MongeVerdictOptions& opts) {
    VerdictReport rep;
    rep.kind = "monge";
    rep.config_hash = field.problem_hash;
    const auto pts = sample_interior(field, opts.t_margin, opts.max_points);
    MongeOptions mo;
    mo.threads = opts.threads;
    const MongeResidualReport r = monge_residual(field, problem, problem.route, pts, mo);
    int plateau = 0;
    for (const auto& e : r.entries) plateau += e.plateau_ok ? 1 : 0;
    rep.measurements = {{"route", to_string(r.route)},
                        {"k", r.k},
                        {"points", r.entries.size()},
                        {"excluded", r.excluded},
                        {"median_abs", r.median_abs},
                        {"max_abs", r.max_abs},
                        {"median_tol", opts.median_tol},
                        {"max_tol", opts.max_tol},
                        {"plateau_ok_fraction", r.entries.empty() ? 1.0 : static_cast<double>(plateau) / r.entries.size()}};
    if (r.median_abs > opts.median_tol || r.max_abs > opts.max_tol) {
        const MongeResidualEntry* worst = nullptr;
        for (const auto& e : r.entries)
            if (!worst || std::abs(e.residual) > std::abs(worst->residual)) worst = &e;
        auto w = point_witness(field, worst->node, worst->n);
        w["estimate"] = worst->estimate;
        w["target"] = worst->target;
        w["residual"] = worst->residual;
        rep.fail(w);
    }
    return rep;
}

VerdictReport equivalence_on_field(const SpaceTimeField& field, const Problem& problem, std::uint64_t seed, int n_curves) {
    const double scale = field.mesh->spacing() + field.dt();
    MongeVerdictOptions mo;
    mo.median_tol = 10.0 * scale;
    mo.max_tol = 30.0 * scale;
    const VerdictReport mv = monge_verdict(field, problem, mo);
    CurveOptions co;
    co.seed = seed;
    co.n_curves = n_curves;
    co.super_points = 100;
    const VerdictReport cv = curve_residual(field, problem, co);
    VerdictReport rep;
    rep.kind = "equivalence";
    rep.seed = seed;
    rep.config_hash = field.problem_hash;
    rep.pass = mv.pass && cv.pass;
    rep.measurements = {{"h", field.mesh->spacing()},
                        {"dt", field.dt()},
                        {"monge", mv.measurements},
                        {"monge_pass", mv.pass},
                        {"curve", cv.measurements},
                        {"curve_pass", cv.pass},
                        {"red_flag", mv.pass != cv.pass}};
    for (const auto& w : mv.witnesses) rep.witnesses.push_back({{"certificate", "monge"}, {"witness", w}});
    for (const auto& w : cv.witnesses) rep.witnesses.push_back({{"certificate", "curve"}, {"witness", w}});
    return rep;
}

VerdictReport equivalence_crosscheck(const Problem& problem, const std::vector<std::pair<double, double>>& grids,
                                     const SolveConfig& base, std::uint64_t seed) {
    const AssumptionAudit audit = audit_assumptions(*problem.hamiltonian, *problem.graph);
    const std::string route = to_string(problem.route);
    if (auto fail = audit.first_failure(route)) throw HypothesisError("hypothesis " + *fail + " fails for route " + route);
    {
        const Mesh fine(*problem.graph, 1e-3);
        std::vector<double> u0(static_cast<std::size_t>(fine.size()));
        for (int i = 0; i < fine.size(); ++i) u0[static_cast<std::size_t>(i)] = problem.u0(fine.point(i), 0.0);
        for (double v : u0)
            if (!std::isfinite(v)) throw HypothesisError("hypothesis 'u0 bounded' fails");
        if (!std::isfinite(slice_lipschitz(fine, u0))) throw HypothesisError("hypothesis 'u0 Lipschitz' fails");
    }
    VerdictReport rep;
    rep.kind = "equivalence";
    rep.seed = seed;
    rep.config_hash = problem_hash(problem);
    rep.measurements["grids"] = nlohmann::json::array();
    bool red = false;
    for (auto [h, dt] : grids) {
        SolveConfig cfg = base;
        cfg.h = h;
        cfg.dt = dt;
        const SpaceTimeField field = solve(problem, cfg);
        const VerdictReport r = equivalence_on_field(field, problem, seed);
        rep.measurements["grids"].push_back(r.measurements);
        red = red || r.measurements.at("red_flag").get<bool>();
        if (!r.pass) {
            rep.pass = false;
            for (const auto& w : r.witnesses)
                if (rep.witnesses.size() < 10) rep.witnesses.push_back({{"h", h}, {"dt", dt}, {"witness", w}});
        }
    }
    rep.measurements["red_flag"] = red;
    return rep;
}

std::optional<Oracle> resolve_oracle(const Problem& problem, double h_fine) {
    if (problem.exact) return Oracle(*problem.exact);
    if (!problem.hamiltonian->xt_independent()) return std::nullopt;
    if (problem.route == Route::General && !std::isinf(problem.hamiltonian->speed_cap())) return std::nullopt;
    auto oracle = std::make_shared<const HopfLaxOracle>(problem, h_fine);
    return Oracle([oracle](const Point& x, double t) { return (*oracle)(x, t); });
}

double max_error(const SpaceTimeField& field, const Oracle& oracle) {
    double err = 0.0;
    for (int n = 0; n < field.n_slices(); ++n)
        for (int i = 0; i < field.mesh->size(); ++i)
            err = std::max(err, std::abs(field.value(i, n) - oracle(field.mesh->point(i), field.time(n))));
    return err;
}

std::string ConvergenceTable::rate_string() const {
    if (exact) return "exact";
    if (!rate) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *rate);
    return buf;
}

std::string ConvergenceTable::to_csv() const {
    std::ostringstream os;
    os << "h,dt,max_error,rate\n";
    char buf[160];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string r = "n/a";
        if (i > 0 && rows[i].max_error > 1e-12 && rows[i - 1].max_error > 1e-12) {
            const double s = std::log(rows[i - 1].max_error / rows[i].max_error) /
                             std::log((rows[i - 1].h + rows[i - 1].dt) / (rows[i].h + rows[i].dt));
            std::snprintf(buf, sizeof buf, "%.6f", s);
            r = buf;
        } else if (i > 0 && rows[i].max_error <= 1e-12 && rows[i - 1].max_error <= 1e-12) {
            r = "exact";
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", rows[i].h, rows[i].dt, rows[i].max_error);
        os << buf << r << "\n";
    }
    return os.str();
}

ConvergenceTable convergence_study(const Problem& problem, const Oracle& oracle,
                                   const std::vector<std::pair<double, double>>& grids, const SolveConfig& base) {
    ConvergenceTable tab;
    for (auto [h, dt] : grids) {
        SolveConfig cfg = base;
        cfg.h = h;
        cfg.dt = dt;
        const SpaceTimeField field = solve(problem, cfg);
        tab.rows.push_back({h, dt, max_error(field, oracle)});
    }
    std::vector<double> xs, ys;
    bool all_zero = !tab.rows.empty();
    for (const auto& r : tab.rows) {
        if (r.max_error > 1e-12) {
            all_zero = false;
            xs.push_back(std::log(r.h + r.dt));
            ys.push_back(std::log(r.max_error));
        }
    }
    if (tab.rows.size() >= 2 && all_zero) {
        tab.exact = true;
    } else if (xs.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        if (sxx > 0.0) tab.rate = sxy / sxx;
    }
    return tab;
}

} // namespace mongehj
