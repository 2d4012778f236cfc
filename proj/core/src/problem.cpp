#include "mongehj/problem.hpp"

#include <algorithm>
#include <cmath>

namespace mongehj {

std::string to_string(Route r) { return r == Route::Eikonal ? "eikonal" : "general"; }

Route route_from_string(const std::string& s) {
    if (s == "eikonal") return Route::Eikonal;
    if (s == "general") return Route::General;
    throw DomainError("unknown route: " + s);
}

Problem Problem::with_u0(ScalarFunction u) const {
    Problem p = *this;
    p.u0 = std::move(u);
    p.exact.reset();
    return p;
}

Problem Problem::with_hamiltonian(HamiltonianSpec h) const {
    Problem p = *this;
    p.hamiltonian = std::make_shared<const HamiltonianSpec>(std::move(h));
    p.exact.reset();
    return p;
}

Route resolve_route(const std::string& requested, const AssumptionAudit& audit) {
    std::string route = requested;
    if (route == "auto") {
        if (audit.route_hint == "none") {
            auto fail = audit.first_failure("general");
            throw HypothesisError("no admissible route: " + fail.value_or("H1") + " fails");
        }
        route = audit.route_hint;
    }
    const Route r = route_from_string(route);
    if (auto fail = audit.first_failure(route)) {
        std::string msg = "route " + route + " requires " + *fail + ", which fails: " + audit.verdict(*fail).detail;
        throw HypothesisError(msg);
    }
    return r;
}

Problem eikonal_segment_problem() {
    auto g = std::make_shared<const MetricGraph>(MetricGraph::segment(1.0));
    Problem p;
    p.graph = g;
    p.hamiltonian = std::make_shared<const HamiltonianSpec>(HamiltonianSpec::eikonal(ScalarFunction::constant(0.0), 1.0));
    p.u0 = ScalarFunction::from_expression("x", g);
    p.route = Route::Eikonal;
    p.exact = [](const Point& x, double t) { return std::max(x.offset - t, 0.0); };
    p.name = "eikonal-segment";
    return p;
}

Problem power_segment_problem() {
    auto g = std::make_shared<const MetricGraph>(MetricGraph::segment(1.0));
    Problem p;
    p.graph = g;
    p.hamiltonian = std::make_shared<const HamiltonianSpec>(
        HamiltonianSpec::power(ScalarFunction::constant(1.0), 2.0, ScalarFunction::constant(0.0), 1.0));
    p.u0 = ScalarFunction::from_expression("abs(x - 0.5)", g);
    p.route = Route::General;
    p.name = "power-segment";
    return p;
}

Problem star_eikonal_problem() {
    auto g = std::make_shared<const MetricGraph>(MetricGraph::star({1.0, 0.7, 1.3}));
    Problem p;
    p.graph = g;
    p.hamiltonian = std::make_shared<const HamiltonianSpec>(
        HamiltonianSpec::eikonal(ScalarFunction::from_expression("0.5 + 0.25 * sin(3 * x) * (1 + e) / 3", g), 1.0));
    p.u0 = ScalarFunction::from_expression("0.3 * cos(2 * x) + 0.2 * x * (e - 1)", g);
    p.route = Route::Eikonal;
    p.name = "star-eikonal";
    return p;
}

} // namespace mongehj
