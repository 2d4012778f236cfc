#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "mongehj/problem.hpp"
#include "mongehj/semigroup_solver.hpp"

namespace mongehj {

struct SkEstimate {
    double k = 0.0;
    double measured_rate = 0.0;   // max one-step decrease rate
    std::optional<double> margin; // k + inf f
    int witness_node = -1;
    int witness_slice = -1;
};

class ShiftError : public std::invalid_argument {
public:
    ShiftError(const std::string& msg, nlohmann::json witness)
        : std::invalid_argument(msg), witness(std::move(witness)) {}
    nlohmann::json witness;
};

SkEstimate estimate_k(const SpaceTimeField& field, const ScalarFunction* f = nullptr);

// v = u + k t; rejects k below the measured decrease rate.
SpaceTimeField shift_v(const SpaceTimeField& field, double k);
// u + c t with no admissibility check.
SpaceTimeField add_linear_in_time(const SpaceTimeField& field, double c);

struct SlopeEstimate {
    SpaceTimePoint z;
    int node = -1;
    int n = -1;
    std::vector<double> deltas; // decreasing
    std::vector<double> values;
    double value = 0.0;         // max over the two smallest deltas
    double trend = 0.0;         // least-squares slope of value against delta
    bool plateau_ok = true;
};

using LagrangianFn = std::function<double(const Point&, double, double)>;

// {8, 4, 2, 1} dt restricted to delta >= h.
std::vector<double> default_deltas(const SpaceTimeField& field);

SlopeEstimate subslope(const SpaceTimeField& v, int node, int n, const std::vector<double>& deltas);
SlopeEstimate subslope(const SpaceTimeField& v, const SpaceTimePoint& z, const std::vector<double>& deltas);
// Relaxed form: all lags 0 <= t - s <= delta, positive part of the increment.
SlopeEstimate subslope_relaxed(const SpaceTimeField& v, int node, int n, const std::vector<double>& deltas);
SlopeEstimate lagrangian_subslope(const SpaceTimeField& v, const LagrangianFn& L, int node, int n,
                                  const std::vector<double>& deltas);

struct MongeResidualEntry {
    int node = -1;
    int n = -1;
    double t = 0.0;
    double estimate = 0.0;
    double target = 0.0;
    double residual = 0.0;
    double trend = 0.0;
    bool plateau_ok = true;
};

struct MongeResidualReport {
    Route route = Route::Eikonal;
    double k = 0.0;
    std::vector<MongeResidualEntry> entries;
    int excluded = 0; // points with t below the largest delta
    double max_abs = 0.0;
    double median_abs = 0.0;
    nlohmann::json to_json() const;
};

struct MongeOptions {
    std::vector<double> deltas;   // empty: default_deltas
    std::optional<double> k;      // empty: estimate_k
    int threads = 1;
};

MongeResidualReport monge_residual(const SpaceTimeField& u, const Problem& problem, Route route,
                                   const std::vector<std::pair<int, int>>& points, const MongeOptions& opts = {});

// (node, slice) pairs with the node off the degree-1 vertices and the slice
// time in [t_lo, t_hi].
std::vector<std::pair<int, int>> interior_points(const SpaceTimeField& field, double t_lo, double t_hi);

} // namespace mongehj
