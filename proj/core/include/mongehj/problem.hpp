#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "mongehj/hamiltonian.hpp"
#include "mongehj/metric_graph.hpp"
#include "mongehj/scalar_function.hpp"

namespace mongehj {

enum class Route { Eikonal, General };

std::string to_string(Route r);
Route route_from_string(const std::string& s);

using ExactSolution = std::function<double(const Point&, double)>;

struct Problem {
    std::shared_ptr<const MetricGraph> graph;
    std::shared_ptr<const HamiltonianSpec> hamiltonian;
    ScalarFunction u0;
    Route route = Route::Eikonal;
    std::optional<ExactSolution> exact;
    std::string name;

    double horizon() const { return hamiltonian->horizon(); }
    const ScalarFunction& f() const { return hamiltonian->f(); }

    Problem with_u0(ScalarFunction u) const;
    Problem with_hamiltonian(HamiltonianSpec h) const;
};

// Route for a spec: "eikonal", "general", or "auto" (resolved by the audit).
// Throws HypothesisError when the audit rules the requested route out.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Route resolve_route(const std::string& requested, const AssumptionAudit& audit);

// Reference problems with known solutions.
Problem eikonal_segment_problem();  // f = 0, u0 = x, u = max(x - t, 0)
Problem power_segment_problem();    // H = p^2, u0 = |x - 1/2|
Problem star_eikonal_problem();     // three edges, smooth u0 and f

} // namespace mongehj
