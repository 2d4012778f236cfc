#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mongehj/monge_checker.hpp"
#include "mongehj/problem.hpp"
#include "mongehj/semigroup_solver.hpp"

namespace mongehj {

struct VerdictReport {
    std::string kind;
    bool pass = true;
    nlohmann::json measurements = nlohmann::json::object();
    nlohmann::json witnesses = nlohmann::json::array();
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;

    void fail(nlohmann::json witness);
    nlohmann::json to_json() const;
};

struct PredictedConstants {
    double K = 0.0;       // time-Lipschitz / initial-layer constant
    double K_space = 0.0; // space-Lipschitz constant
    nlohmann::json detail = nlohmann::json::object();
};

PredictedConstants predicted_constants(const SpaceTimeField& field, const Problem& problem);

// sup |f| over a refined sample of the mesh and time grid.
double sup_abs_f(const Problem& problem, const Mesh& mesh, const TimeGrid& grid);

VerdictReport check_bounds(const SpaceTimeField& field, const Problem& problem);
VerdictReport check_initial_layer(const SpaceTimeField& field, const Problem& problem);
VerdictReport check_lipschitz(const SpaceTimeField& field, const Problem& problem);

struct ComparisonOptions {
    std::vector<double> epsilons{0.0, 0.01, 0.1};
    double data_shift = 0.5;
    int sample_points = 60;
    std::uint64_t seed = 1;
};

VerdictReport comparison_experiment(const Problem& problem, const SolveConfig& config, const ComparisonOptions& opts = {});

struct CurveOptions {
    int n_curves = 1000;
    std::uint64_t seed = 1;
    std::optional<double> tol; // default 3 (h + dt)
    int super_points = 200;
    int chain_hops = 4;
};

VerdictReport curve_residual(const SpaceTimeField& field, const Problem& problem, const CurveOptions& opts = {});

// Largest u(x,t) - (sum of hop costs + u(end)) over random chains of the
// solver's own node-to-node hops; never positive for solver output.
double own_hop_chain_gap(const SpaceTimeField& field, const Problem& problem, int n_chains, std::uint64_t seed);

struct MongeVerdictOptions {
    double median_tol = 0.1;
    double max_tol = 0.3;
    double t_margin = 0.1;
    int max_points = 400;
    int threads = 1;
};

// Evenly thinned interior points with t in [t_margin, T - t_margin].
std::vector<std::pair<int, int>> sample_interior(const SpaceTimeField& field, double t_margin, int max_points);

VerdictReport monge_verdict(const SpaceTimeField& field, const Problem& problem, const MongeVerdictOptions& opts = {});

// Monge and curve certificates on one field with tolerances 10 (h+dt) for the
// median, 30 (h+dt) for the max and 3 (h+dt) for curves.
VerdictReport equivalence_on_field(const SpaceTimeField& field, const Problem& problem, std::uint64_t seed = 1,
                                   int n_curves = 300);

// Refuses (HypothesisError) when the problem is outside the supported hypothesis class.
VerdictReport equivalence_crosscheck(const Problem& problem, const std::vector<std::pair<double, double>>& grids,
                                     const SolveConfig& base = {}, std::uint64_t seed = 1);

using Oracle = std::function<double(const Point&, double)>;

// Closed form when the problem carries one, Hopf-Lax when L ignores (x, t).
std::optional<Oracle> resolve_oracle(const Problem& problem, double h_fine = 1e-3);

double max_error(const SpaceTimeField& field, const Oracle& oracle);

struct ConvergenceRow {
    double h = 0.0;
    double dt = 0.0;
    double max_error = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::optional<double> rate; // least-squares slope of log error against log (h + dt)
    bool exact = false;         // every error below 1e-12

    std::string rate_string() const;
    std::string to_csv() const;
};

ConvergenceTable convergence_study(const Problem& problem, const Oracle& oracle,
                                   const std::vector<std::pair<double, double>>& grids, const SolveConfig& base = {});

} // namespace mongehj
