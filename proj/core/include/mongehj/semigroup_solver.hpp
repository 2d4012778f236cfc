#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "mongehj/hamiltonian.hpp"
#include "mongehj/metric_graph.hpp"
#include "mongehj/problem.hpp"

namespace mongehj {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TimeGrid {
    double T = 1.0;
    int n_steps = 1;

    double dt() const { return T / n_steps; }
    double time(int n) const { return T * n / n_steps; }
    static TimeGrid from_dt(double T, double dt);
};

struct SolveConfig {
    double h = 0.01;
    double dt = 0.01;
    int subcell_samples = 32; // interior hop targets per mesh cell
    int max_retries = 3;
    int threads = 1;
};

// Values per (mesh node, time slice); slice n lives at time n dt, n < n_steps.
struct SpaceTimeField {
    std::shared_ptr<const Mesh> mesh;
    TimeGrid grid;
    std::vector<std::vector<double>> slices;
    std::uint64_t problem_hash = 0;
    double k_shift = 0.0;
    double radius_factor = 1.0; // hop radius in units of dt
    int subcell_samples = 32;
    nlohmann::json constants = nlohmann::json::object();

    int n_slices() const { return static_cast<int>(slices.size()); }
    double dt() const { return grid.dt(); }
    double time(int n) const { return grid.time(n); }
    double value(int node, int n) const {
        return slices[static_cast<std::size_t>(n)][static_cast<std::size_t>(node)];
    }
    double at(const Point& x, int n) const { return mesh->interpolate(slices[static_cast<std::size_t>(n)], x); }
    // Linear in time between slices; t in [0, (n_slices-1) dt].
    double at_time(const Point& x, double t) const;
};

std::uint64_t fnv1a(const std::string& s);
std::uint64_t problem_hash(const Problem& p);

struct Candidate {
    Interp ip;
    Point y;
    double d = 0.0;
};

// Points of the continuum ball {y : d(x, y) <= r}: x itself, the ends of every
// linear distance piece and, when interior is set, the cell points at j/m.
std::vector<Candidate> ball_candidates(const Mesh& mesh, const Point& x, double r, int subcell_samples, bool interior);

struct HopChoice {
    double value = kInf;
    Point y;
    double d = 0.0;
    double cost = 0.0;
};

// One dynamic-programming step: u(x, t) = min over hop targets y of
// cost(x -> y over one dt) + u(y, t - dt), u(., t - dt) interpolated on the mesh.
class StepOperator {
public:
    StepOperator(const Problem& problem, const Mesh& mesh, double dt, double radius_factor, int subcell_samples);

    double radius() const { return radius_; }
    bool cost_time_dependent() const { return time_dependent_; }
    std::vector<Candidate> candidates(const Point& x) const;
    double cost(const Point& x, const Candidate& c, double t_arr) const;
    HopChoice apply(const Point& x, double t_arr, const std::vector<double>& prev) const;

    static double combine(const Candidate& c, double cost, const std::vector<double>& prev) {
        const double ua = prev[static_cast<std::size_t>(c.ip.a)];
        const double u = c.ip.w == 0.0 ? ua : (1.0 - c.ip.w) * ua + c.ip.w * prev[static_cast<std::size_t>(c.ip.b)];
        return u + cost;
    }

private:
    const Problem* problem_;
    const Mesh* mesh_;
    double dt_;
    double radius_;
    int subcell_;
    bool interior_;
    bool time_dependent_;
};

// Discrete Lipschitz constant of a slice along mesh edges.
double slice_lipschitz(const Mesh& mesh, const std::vector<double>& u);

SpaceTimeField solve_eikonal(const Problem& problem, const SolveConfig& config);
SpaceTimeField solve_general(const Problem& problem, const SolveConfig& config);
SpaceTimeField solve(const Problem& problem, const SolveConfig& config);

// inf over mesh nodes y of u0(y) + t L(d(x, y) / t); L must not depend on (x, t).
double hopflax_direct(const LagrangianView& view, const MetricGraph& g, const Mesh& mesh, const ScalarFunction& u0,
                      const Point& x, double t);

// hopflax_direct on a fine mesh with cached u0 values and golden-section
// refinement inside the cells next to the best node.
class HopfLaxOracle {
public:
    HopfLaxOracle(const Problem& problem, double h_fine);
    double operator()(const Point& x, double t) const;

private:
    Problem problem_;
    std::shared_ptr<const HamiltonianSpec> spec_;
    std::shared_ptr<const Mesh> mesh_;
    std::vector<double> u0_;
};

struct ResidualEntry {
    int node = -1;
    int n = -1;
    double value = 0.0;
    double reference = 0.0;
    double residual = 0.0;
};

struct ResidualReport {
    std::vector<ResidualEntry> entries;
    double max_abs = 0.0;
    double median_abs = 0.0;
    nlohmann::json to_json() const;
    void finalize();
};

// |u(x, t) - one-step minimum| at the sampled (node, slice) pairs, n >= 1.
ResidualReport dpp_residual(const SpaceTimeField& field, const Problem& problem,
                            const std::vector<std::pair<int, int>>& samples);

void parallel_for(int n, int threads, const std::function<void(int)>& fn);

} // namespace mongehj
