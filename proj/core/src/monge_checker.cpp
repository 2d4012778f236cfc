#include "mongehj/monge_checker.hpp"

#include <algorithm>
#include <cmath>

namespace mongehj {

namespace {

int steps_of(const SpaceTimeField& v, double delta) {
    const double s = delta / v.dt();
    const long long k = std::llround(s);
    if (k < 1 || std::abs(s - static_cast<double>(k)) > 1e-9 * std::max(1.0, s))
        throw ConfigError("delta is not a positive multiple of dt");
    if (delta < v.mesh->spacing() * (1.0 - 1e-12)) throw ConfigError("delta must be at least h");
    return static_cast<int>(k);
}

void finish(SlopeEstimate& est) {
    const std::size_t n = est.values.size();
    if (n == 0) return;
    // deltas are sorted decreasingly, so the smallest sit at the back.
    est.value = est.values[n - 1];
    if (n >= 2) {
        est.value = std::max(est.values[n - 1], est.values[n - 2]);
        const double a = est.values[n - 1], b = est.values[n - 2];
        est.plateau_ok = std::abs(a - b) <= 0.05 + 0.05 * std::abs(est.value);
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += est.deltas[i];
            my += est.values[i];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sxy += (est.deltas[i] - mx) * (est.values[i] - my);
            sxx += (est.deltas[i] - mx) * (est.deltas[i] - mx);
        }
        est.trend = sxx > 0.0 ? sxy / sxx : 0.0;
    }
}

SlopeEstimate start(const SpaceTimeField& v, int node, int n, std::vector<double> deltas) {
    if (node < 0 || node >= v.mesh->size() || n < 0 || n >= v.n_slices()) throw DomainError("point outside the field");
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    SlopeEstimate est;
    est.node = node;
    est.n = n;
    est.z = {v.mesh->point(node), v.time(n)};
    est.deltas = std::move(deltas);
    for (double d : est.deltas) {
        const int k = steps_of(v, d);
        if (k > n) throw ConfigError("t - delta must be nonnegative");
    }
    return est;
}

} // namespace

SkEstimate estimate_k(const SpaceTimeField& field, const ScalarFunction* f) {
    if (field.n_slices() < 2) throw DomainError("estimate_k needs at least two slices");
    SkEstimate s;
    double rate = -kInf;
    for (int n = 0; n + 1 < field.n_slices(); ++n)
        for (int i = 0; i < field.mesh->size(); ++i) {
            const double r = (field.value(i, n) - field.value(i, n + 1)) / field.dt();
            if (r > rate) {
                rate = r;
                s.witness_node = i;
                s.witness_slice = n;
            }
        }
    s.measured_rate = rate;
    s.k = std::max(0.0, rate) * 1.05;
    if (f) {
        double inf_f = kInf;
        for (int n = 0; n < field.n_slices(); ++n) {
            for (int i = 0; i < field.mesh->size(); ++i) inf_f = std::min(inf_f, (*f)(field.mesh->point(i), field.time(n)));
            if (!f->time_dependent()) break;
        }
        s.k = std::max(s.k, -inf_f);
        s.margin = s.k + inf_f;
    }
    return s;
}

SpaceTimeField add_linear_in_time(const SpaceTimeField& field, double c) {
    SpaceTimeField v = field;
    for (int n = 0; n < v.n_slices(); ++n) {
        const double shift = c * v.time(n);
        for (double& x : v.slices[static_cast<std::size_t>(n)]) x += shift;
    }
    v.k_shift += c;
    return v;
}

SpaceTimeField shift_v(const SpaceTimeField& field, double k) {
    if (!(k >= 0.0)) throw DomainError("k must be nonnegative");
    const SkEstimate est = estimate_k(field);
    if (k < est.measured_rate - 1e-12 * (1.0 + std::abs(est.measured_rate))) {
        nlohmann::json w{{"node", est.witness_node},
                         {"slice", est.witness_slice},
                         {"t", field.time(est.witness_slice)},
                         {"decrease_rate", est.measured_rate},
                         {"k", k}};
        throw ShiftError("k is below the measured decrease rate", w);
    }
    return add_linear_in_time(field, k);
}

std::vector<double> default_deltas(const SpaceTimeField& field) {
    std::vector<double> out;
    for (int m : {8, 4, 2, 1}) {
        const double d = m * field.dt();
        if (d >= field.mesh->spacing() * (1.0 - 1e-12)) out.push_back(d);
    }
    return out;
}

SlopeEstimate subslope(const SpaceTimeField& v, int node, int n, const std::vector<double>& deltas) {
    SlopeEstimate est = start(v, node, n, deltas);
    const Point& x = est.z.x;
    const double vx = v.value(node, n);
    for (double delta : est.deltas) {
        const int k = steps_of(v, delta);
        const auto& prev = v.slices[static_cast<std::size_t>(n - k)];
        double best = -kInf;
        for (const Candidate& c : ball_candidates(*v.mesh, x, delta, v.subcell_samples, true))
            best = std::max(best, (vx - StepOperator::combine(c, 0.0, prev)) / delta);
        est.values.push_back(best);
    }
    finish(est);
    return est;
}

SlopeEstimate subslope(const SpaceTimeField& v, const SpaceTimePoint& z, const std::vector<double>& deltas) {
    const auto node = v.mesh->node_of(z.x);
    if (!node) throw ConfigError("point is not a mesh node");
    const double s = z.t / v.dt();
    const long long n = std::llround(s);
    if (std::abs(s - static_cast<double>(n)) > 1e-9 * std::max(1.0, s)) throw ConfigError("time is not on the grid");
    return subslope(v, *node, static_cast<int>(n), deltas);
}

SlopeEstimate subslope_relaxed(const SpaceTimeField& v, int node, int n, const std::vector<double>& deltas) {
    SlopeEstimate est = start(v, node, n, deltas);
    const Point& x = est.z.x;
    const double vx = v.value(node, n);
    for (double delta : est.deltas) {
        const int k = steps_of(v, delta);
        const auto cands = ball_candidates(*v.mesh, x, delta, v.subcell_samples, true);
        double best = 0.0;
        for (int j = 0; j <= k; ++j) {
            const auto& prev = v.slices[static_cast<std::size_t>(n - j)];
            for (const Candidate& c : cands) best = std::max(best, (vx - StepOperator::combine(c, 0.0, prev)) / delta);
        }
        est.values.push_back(best);
    }
    finish(est);
    return est;
}

SlopeEstimate lagrangian_subslope(const SpaceTimeField& v, const LagrangianFn& L, int node, int n,
                                  const std::vector<double>& deltas) {
    SlopeEstimate est = start(v, node, n, deltas);
    const Point& x = est.z.x;
    const double t = est.z.t;
    const double vx = v.value(node, n);
    for (double delta : est.deltas) {
        const int k = steps_of(v, delta);
        const auto cands = ball_candidates(*v.mesh, x, delta, v.subcell_samples, true);
        double best = -kInf;
        for (int j = 1; j <= k; ++j) {
            const auto& prev = v.slices[static_cast<std::size_t>(n - j)];
            const double lag = t - v.time(n - j);
            for (const Candidate& c : cands) {
                const double l = L(x, t, c.d / lag);
                if (!std::isfinite(l)) continue;
                best = std::max(best, (vx - StepOperator::combine(c, 0.0, prev)) / lag - l);
            }
        }
        est.values.push_back(best);
    }
    finish(est);
    return est;
}

nlohmann::json MongeResidualReport::to_json() const {
    nlohmann::json j;
    j["route"] = to_string(route);
    j["k"] = k;
    j["points"] = nlohmann::json::array();
    for (const auto& e : entries)
        j["points"].push_back({{"id", e.node},
                               {"t", e.t},
                               {"estimate", e.estimate},
                               {"target", e.target},
                               {"residual", e.residual},
                               {"trend", e.trend},
                               {"plateau_ok", e.plateau_ok}});
    j["aggregate"] = {{"max_abs", max_abs}, {"median_abs", median_abs}};
    j["excluded"] = excluded;
    return j;
}

MongeResidualReport monge_residual(const SpaceTimeField& u, const Problem& problem, Route route,
                                   const std::vector<std::pair<int, int>>& points, const MongeOptions& opts) {
    MongeResidualReport rep;
    rep.route = route;
    const std::vector<double> deltas = opts.deltas.empty() ? default_deltas(u) : opts.deltas;
    if (deltas.empty()) throw ConfigError("no admissible delta: h exceeds 8 dt");
    const double dmax = *std::max_element(deltas.begin(), deltas.end());
    const ScalarFunction& f = problem.f();
    rep.k = opts.k ? *opts.k : estimate_k(u, route == Route::Eikonal ? &f : nullptr).k;
    const SpaceTimeField v = shift_v(u, rep.k);

    std::vector<std::pair<int, int>> kept;
    for (auto [node, n] : points) {
        if (u.time(n) < dmax * (1.0 - 1e-12)) {
            ++rep.excluded;
            continue;
        }
        kept.emplace_back(node, n);
    }
    rep.entries.resize(kept.size());
    const HamiltonianSpec& H = *problem.hamiltonian;
    const LagrangianFn L = [&H](const Point& x, double t, double q) { return H.legendre_L(x, t, q); };
    parallel_for(static_cast<int>(kept.size()), opts.threads, [&](int i) {
        auto [node, n] = kept[static_cast<std::size_t>(i)];
        const SlopeEstimate est = route == Route::Eikonal ? subslope(v, node, n, deltas) : lagrangian_subslope(v, L, node, n, deltas);
        MongeResidualEntry& e = rep.entries[static_cast<std::size_t>(i)];
        e.node = node;
        e.n = n;
        e.t = u.time(n);
        e.estimate = est.value;
        e.target = route == Route::Eikonal ? f(u.mesh->point(node), e.t) + rep.k : rep.k;
        e.residual = e.estimate - e.target;
        e.trend = est.trend;
        e.plateau_ok = est.plateau_ok;
    });
    std::vector<double> a;
    for (const auto& e : rep.entries) a.push_back(std::abs(e.residual));
    if (!a.empty()) {
        rep.max_abs = *std::max_element(a.begin(), a.end());
        std::sort(a.begin(), a.end());
        const std::size_t m = a.size() / 2;
        rep.median_abs = a.size() % 2 ? a[m] : 0.5 * (a[m - 1] + a[m]);
    }
    return rep;
}

std::vector<std::pair<int, int>> interior_points(const SpaceTimeField& field, double t_lo, double t_hi) {
    std::vector<std::pair<int, int>> out;
    const MetricGraph& g = field.mesh->graph();
    for (int n = 0; n < field.n_slices(); ++n) {
        const double t = field.time(n);
        if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
        for (int i = 0; i < field.mesh->size(); ++i) {
            const Point& p = field.mesh->point(i);
            if (p.is_vertex() && g.incident(p.vertex).size() < 2) continue;
            out.emplace_back(i, n);
        }
    }
    return out;
}

} // namespace mongehj
