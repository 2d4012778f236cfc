#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mongehj/metric_graph.hpp"
#include "mongehj/scalar_function.hpp"

namespace mongehj {

class CoercivityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class HForm { Eikonal, Power, QuadLin, Tabulated };

std::string to_string(HForm f);

struct TabulatedH {
    std::vector<double> p;
    std::vector<double> raw;      // as given
    std::vector<double> hull_p;   // after convex and monotone repair
    std::vector<double> hull_H;
    std::vector<std::string> repairs;
};

// c(a, alpha) in L(q) = c q^{alpha/(alpha-1)} for H(p) = a p^alpha.
double power_conjugate_coefficient(double a, double alpha);

class HamiltonianSpec {
public:
    static HamiltonianSpec eikonal(ScalarFunction f, double T);
    static HamiltonianSpec power(ScalarFunction a, double alpha, ScalarFunction f, double T);
    static HamiltonianSpec quadlin(ScalarFunction a, ScalarFunction b, ScalarFunction f, double alpha, double T);
    static HamiltonianSpec tabulated(std::vector<double> p, std::vector<double> H, double T);
    static HamiltonianSpec from_json(const nlohmann::json& j, std::shared_ptr<const MetricGraph> g);
    nlohmann::json to_json() const;

    HForm form() const { return form_; }
    double alpha() const { return alpha_; }
    double horizon() const { return T_; }
    const ScalarFunction& a() const { return a_; }
    const ScalarFunction& b() const { return b_; }
    const ScalarFunction& f() const { return f_; }
    const TabulatedH& table() const { return table_; }

    double eval_H(const Point& x, double t, double p) const;
    // Tabulated specs: interpolation of the unrepaired table. Otherwise eval_H.
    double eval_H_raw(const Point& x, double t, double p) const;
    // sup_{p >= 0} (p q - H), closed form; +inf where the supremum diverges.
    double legendre_L(const Point& x, double t, double q) const;

    // Largest speed with finite L (1 for eikonal, +inf for superlinear forms).
    double speed_cap() const;
    bool xt_independent() const;
    bool time_dependent() const;

    HamiltonianSpec with_f(ScalarFunction f) const;

private:
    HForm form_ = HForm::Eikonal;
    double alpha_ = 2.0;
    double T_ = 1.0;
    ScalarFunction a_ = ScalarFunction::constant(1.0);
    ScalarFunction b_ = ScalarFunction::constant(0.0);
    ScalarFunction f_ = ScalarFunction::constant(0.0);
    TabulatedH table_;
};

// sup over s in [0, hi] of a concave objective: {0} U geometric grid of 512
// points, then golden-section refinement around the best grid point.
double concave_sup(const std::function<double(double)>& objective, double hi, double* argmax = nullptr);

// Numerical sup_{p >= 0} (p q - H) with p_max grown until (H(p)-H(0))/p >= q+1.
double numeric_legendre_L(const HamiltonianSpec& spec, const Point& x, double t, double q);

struct AuditSampling {
    int interior_per_edge = 3;
    int t_samples = 9;
    int pq_samples = 64;
};

class LagrangianView {
public:
    LagrangianView(std::shared_ptr<const HamiltonianSpec> spec, const MetricGraph& g, AuditSampling s = {});

    double L(const Point& x, double t, double q) const { return spec_->legendre_L(x, t, q); }
    double m(double q) const;
    double speed_cap() const { return spec_->speed_cap(); }
    bool superlinear() const { return !std::isfinite(speed_cap()); }
    bool xt_independent() const { return spec_->xt_independent(); }
    double L0() const { return L0_; }
    double L1() const { return L1_; }
    const HamiltonianSpec& spec() const { return *spec_; }
    std::shared_ptr<const HamiltonianSpec> spec_ptr() const { return spec_; }
    const std::vector<std::pair<Point, double>>& samples() const { return samples_; }
    const std::vector<double>& hull_q() const { return hull_q_; }
    const std::vector<double>& hull_m() const { return hull_m_; }
    // sup over the sampled (x, t) of |m| on [0, r].
    double sup_abs_m(double r) const;

private:
    std::shared_ptr<const HamiltonianSpec> spec_;
    std::vector<std::pair<Point, double>> samples_;
    std::vector<double> hull_q_;
    std::vector<double> hull_m_;
    double m_cap_ = kInf;
    double L0_ = 0.0;
    double L1_ = 0.0;
};

std::vector<std::pair<Point, double>> audit_samples(const MetricGraph& g, double T, const AuditSampling& s);

double legendre_H_back(const LagrangianView& view, const Point& x, double t, double p);

// Smallest R0 with C (q+1) - m(q) <= 0 for q >= R0, returned as 2 max(R0, 1).
double search_radius(const LagrangianView& view, double C);

struct Verdict {
    std::string name;
    bool pass = true;
    std::string detail;
    nlohmann::json witness;
};

struct AssumptionAudit {
    std::vector<Verdict> verdicts;
    std::vector<std::pair<double, double>> coercivity_profile; // (R, inf H/p over p >= R)
    std::vector<std::pair<double, double>> modulus;            // (r, sampled omega_L(r))
    double C_T = 0.0;
    double L0 = 0.0;
    double L1 = 0.0;
    std::optional<double> R;
    std::string route_hint; // "general", "eikonal" or "none"
    std::vector<std::string> repairs;
    std::string sampled_region;

    const Verdict& verdict(const std::string& name) const;
    bool passes(const std::string& name) const { return verdict(name).pass; }
    // Names of the conditions a route requires.
    static std::vector<std::string> required_for(const std::string& route);
    std::optional<std::string> first_failure(const std::string& route) const;
    nlohmann::json to_json() const;
};

AssumptionAudit audit_assumptions(const HamiltonianSpec& spec, const MetricGraph& g, AuditSampling s = {});

} // namespace mongehj
