#include "mongehj/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mongehj {

namespace {

std::vector<double> geometric(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double ratio = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo * std::exp(ratio * i);
    g.back() = hi;
    return g;
}

// Lower convex hull of points sorted by x; +inf values are skipped.
void lower_hull(const std::vector<double>& x, const std::vector<double>& y, std::vector<double>& hx,
                std::vector<double>& hy) {
    hx.clear();
    hy.clear();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(y[i])) continue;
        while (hx.size() >= 2) {
            const std::size_t k = hx.size();
            const double cross = (hx[k - 1] - hx[k - 2]) * (y[i] - hy[k - 2]) - (hy[k - 1] - hy[k - 2]) * (x[i] - hx[k - 2]);
            if (cross <= 0.0) {
                hx.pop_back();
                hy.pop_back();
            } else {
                break;
            }
        }
        hx.push_back(x[i]);
        hy.push_back(y[i]);
    }
}

double piecewise_linear(const std::vector<double>& x, const std::vector<double>& y, double s) {
    if (x.size() == 1) return y[0];
    auto it = std::upper_bound(x.begin(), x.end(), s);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    i = std::clamp<std::size_t>(i, 1, x.size() - 1);
    const double slope = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + slope * (s - x[i - 1]);
}

nlohmann::json point_json(const Point& x) {
    nlohmann::json j;
    if (x.is_vertex()) j["vertex"] = x.vertex;
    j["edge"] = x.edge;
    j["offset"] = x.offset;
    return j;
}

void require_nonneg(double p, const char* what) {
    if (!(p >= 0.0)) throw DomainError(std::string(what) + " must be nonnegative");
}

} // namespace

std::string to_string(HForm f) {
    switch (f) {
    case HForm::Eikonal: return "eikonal";
    case HForm::Power: return "power";
    case HForm::QuadLin: return "quadlin";
    case HForm::Tabulated: return "tabulated";
    }
    return "unknown";
}

double power_conjugate_coefficient(double a, double alpha) {
    if (!(a > 0.0)) throw DomainError("coefficient a must be positive");
    if (!(alpha > 1.0)) throw DomainError("alpha must exceed 1");
    return (alpha - 1.0) * std::pow(alpha, -alpha / (alpha - 1.0)) * std::pow(a, -1.0 / (alpha - 1.0));
}

HamiltonianSpec HamiltonianSpec::eikonal(ScalarFunction f, double T) {
    if (!(T > 0.0)) throw DomainError("horizon T must be positive");
    HamiltonianSpec s;
    s.form_ = HForm::Eikonal;
    s.f_ = std::move(f);
    s.T_ = T;
    return s;
}

HamiltonianSpec HamiltonianSpec::power(ScalarFunction a, double alpha, ScalarFunction f, double T) {
    if (!(T > 0.0)) throw DomainError("horizon T must be positive");
    if (!(alpha > 1.0)) throw DomainError("alpha must exceed 1");
    if (a.is_constant() && !(a.constant_value() > 0.0)) throw DomainError("coefficient a must be positive");
    HamiltonianSpec s;
    s.form_ = HForm::Power;
    s.a_ = std::move(a);
    s.alpha_ = alpha;
    s.f_ = std::move(f);
    s.T_ = T;
    return s;
}

HamiltonianSpec HamiltonianSpec::quadlin(ScalarFunction a, ScalarFunction b, ScalarFunction f, double alpha, double T) {
    HamiltonianSpec s = power(std::move(a), alpha, std::move(f), T);
    if (b.is_constant() && b.constant_value() < 0.0) throw DomainError("coefficient b must be nonnegative");
    s.form_ = HForm::QuadLin;
    s.b_ = std::move(b);
    return s;
}

HamiltonianSpec HamiltonianSpec::tabulated(std::vector<double> p, std::vector<double> H, double T) {
    if (!(T > 0.0)) throw DomainError("horizon T must be positive");
    if (p.size() < 2 || p.size() != H.size()) throw DomainError("table needs matching p and H arrays of length >= 2");
    if (p.front() != 0.0) throw DomainError("table must start at p = 0");
    for (std::size_t i = 1; i < p.size(); ++i)
        if (!(p[i] > p[i - 1])) throw DomainError("table p values must increase strictly");
    for (double v : H)
        if (!std::isfinite(v)) throw DomainError("table H values must be finite");

    HamiltonianSpec s;
    s.form_ = HForm::Tabulated;
    s.T_ = T;
    TabulatedH& tb = s.table_;
    tb.p = std::move(p);
    tb.raw = std::move(H);
    lower_hull(tb.p, tb.raw, tb.hull_p, tb.hull_H);
    for (std::size_t i = 0; i < tb.p.size(); ++i) {
        const double h = piecewise_linear(tb.hull_p, tb.hull_H, tb.p[i]);
        if (tb.raw[i] > h + 1e-12 * (1.0 + std::abs(h))) {
            std::ostringstream os;
            os << "convex repair at p=" << tb.p[i] << ": " << tb.raw[i] << " -> " << h;
            tb.repairs.push_back(os.str());
        }
    }
    const auto kmin = static_cast<std::size_t>(std::min_element(tb.hull_H.begin(), tb.hull_H.end()) - tb.hull_H.begin());
    if (kmin > 0) {
        const double hmin = tb.hull_H[kmin];
        const double pmin = tb.hull_p[kmin];
        std::vector<double> np{0.0}, nh{hmin};
        for (std::size_t i = kmin; i < tb.hull_p.size(); ++i) {
            np.push_back(tb.hull_p[i]);
            nh.push_back(tb.hull_H[i]);
        }
        tb.hull_p = std::move(np);
        tb.hull_H = std::move(nh);
        std::ostringstream os;
        os << "monotone repair on [0, " << pmin << "]: H clamped to " << hmin;
        tb.repairs.push_back(os.str());
    }
    return s;
}

HamiltonianSpec HamiltonianSpec::from_json(const nlohmann::json& j, std::shared_ptr<const MetricGraph> g) {
    if (!j.is_object() || !j.contains("form")) throw DomainError("hamiltonian config needs \"form\"");
    const std::string form = j.at("form").get<std::string>();
    const double T = j.value("T", 1.0);
    auto fn = [&](const char* key, double dflt) {
        return j.contains(key) ? ScalarFunction::from_json(j.at(key), g) : ScalarFunction::constant(dflt);
    };
    if (form == "eikonal") return eikonal(fn("f", 0.0), T);
    if (form == "power") return power(fn("a", 1.0), j.value("alpha", 2.0), fn("f", 0.0), T);
    if (form == "quadlin") return quadlin(fn("a", 1.0), fn("b", 0.0), fn("f", 0.0), j.value("alpha", 2.0), T);
    if (form == "tabulated") {
        if (!j.contains("table")) throw DomainError("tabulated form needs \"table\": {\"p\": [...], \"H\": [...]}");
        const auto& t = j.at("table");
        return tabulated(t.at("p").get<std::vector<double>>(), t.at("H").get<std::vector<double>>(), T);
    }
    throw DomainError("unknown hamiltonian form: " + form);
}

nlohmann::json HamiltonianSpec::to_json() const {
    nlohmann::json j;
    j["form"] = to_string(form_);
    j["T"] = T_;
    switch (form_) {
    case HForm::Eikonal:
        j["f"] = f_.to_json();
        break;
    case HForm::QuadLin:
        j["b"] = b_.to_json();
        [[fallthrough]];
    case HForm::Power:
        j["alpha"] = alpha_;
        j["a"] = a_.to_json();
        j["f"] = f_.to_json();
        break;
    case HForm::Tabulated:
        j["table"] = {{"p", table_.p}, {"H", table_.raw}};
        break;
    }
    return j;
}

double HamiltonianSpec::eval_H(const Point& x, double t, double p) const {
    require_nonneg(p, "p");
    switch (form_) {
    case HForm::Eikonal:
        return p - f_(x, t);
    case HForm::Power: {
        const double a = a_(x, t);
        if (!(a > 0.0)) throw DomainError("coefficient a must be positive");
        return a * std::pow(p, alpha_) - f_(x, t);
    }
    case HForm::QuadLin: {
        const double a = a_(x, t);
        if (!(a > 0.0)) throw DomainError("coefficient a must be positive");
        return a * std::pow(p, alpha_) + b_(x, t) * p - f_(x, t);
    }
    case HForm::Tabulated:
        return piecewise_linear(table_.hull_p, table_.hull_H, p);
    }
    return 0.0;
}

double HamiltonianSpec::eval_H_raw(const Point& x, double t, double p) const {
    if (form_ != HForm::Tabulated) return eval_H(x, t, p);
    require_nonneg(p, "p");
    return piecewise_linear(table_.p, table_.raw, p);
}

double HamiltonianSpec::legendre_L(const Point& x, double t, double q) const {
    require_nonneg(q, "q");
    switch (form_) {
    case HForm::Eikonal:
        return q <= 1.0 ? f_(x, t) : kInf;
    case HForm::Power: {
        const double c = power_conjugate_coefficient(a_(x, t), alpha_);
        return c * std::pow(q, alpha_ / (alpha_ - 1.0)) + f_(x, t);
    }
    case HForm::QuadLin: {
        const double b = b_(x, t);
        const double f = f_(x, t);
        if (q <= b) return f;
        const double c = power_conjugate_coefficient(a_(x, t), alpha_);
        return c * std::pow(q - b, alpha_ / (alpha_ - 1.0)) + f;
    }
    case HForm::Tabulated: {
        if (q > speed_cap()) return kInf;
        double best = -kInf;
        for (std::size_t i = 0; i < table_.hull_p.size(); ++i)
            best = std::max(best, table_.hull_p[i] * q - table_.hull_H[i]);
        return best;
    }
    }
    return 0.0;
}

double HamiltonianSpec::speed_cap() const {
    switch (form_) {
    case HForm::Eikonal:
        return 1.0;
    case HForm::Tabulated: {
        const auto& x = table_.hull_p;
        const auto& y = table_.hull_H;
        const std::size_t n = x.size();
        if (n < 2) return 0.0;
        return (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    }
    default:
        return kInf;
    }
}

bool HamiltonianSpec::xt_independent() const {
    switch (form_) {
    case HForm::Eikonal:
        return f_.is_constant();
    case HForm::Power:
        return a_.is_constant() && f_.is_constant();
    case HForm::QuadLin:
        return a_.is_constant() && b_.is_constant() && f_.is_constant();
    case HForm::Tabulated:
        return true;
    }
    return false;
}

bool HamiltonianSpec::time_dependent() const {
    return a_.time_dependent() || b_.time_dependent() || f_.time_dependent();
}

HamiltonianSpec HamiltonianSpec::with_f(ScalarFunction f) const {
    HamiltonianSpec s = *this;
    s.f_ = std::move(f);
    return s;
}

double concave_sup(const std::function<double(double)>& objective, double hi, double* argmax) {
    double best_s = 0.0;
    double best = objective(0.0);
    if (!(hi > 0.0)) {
        if (argmax) *argmax = 0.0;
        return best;
    }
    constexpr int n = 511;
    std::vector<double> grid{0.0};
    if (hi > 1e-3) {
        auto g = geometric(1e-3, hi, n);
        grid.insert(grid.end(), g.begin(), g.end());
    } else {
        for (int i = 1; i <= n; ++i) grid.push_back(hi * i / n);
    }
    std::size_t bi = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = objective(grid[i]);
        if (v > best) {
            best = v;
            bi = i;
        }
    }
    best_s = grid[bi];
    double lo = grid[bi == 0 ? 0 : bi - 1];
    double up = grid[std::min(bi + 1, grid.size() - 1)];
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = up - phi * (up - lo);
    double d = lo + phi * (up - lo);
    double fc = objective(c), fd = objective(d);
    for (int it = 0; it < 200 && (up - lo) > 1e-15 * (1.0 + up); ++it) {
        if (fc >= fd) {
            up = d;
            d = c;
            fd = fc;
            c = up - phi * (up - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (up - lo);
            fd = objective(d);
        }
    }
    for (auto [s, v] : {std::pair{c, fc}, std::pair{d, fd}}) {
        if (v > best) {
            best = v;
            best_s = s;
        }
    }
    if (argmax) *argmax = best_s;
    return best;
}

double numeric_legendre_L(const HamiltonianSpec& spec, const Point& x, double t, double q) {
    require_nonneg(q, "q");
    const double h0 = spec.eval_H(x, t, 0.0);
    double pm = 1.0;
    while ((spec.eval_H(x, t, pm) - h0) / pm < q + 1.0) {
        pm *= 2.0;
        if (pm > 1e15) throw CoercivityError("Legendre supremum diverges: H is not coercive");
    }
    return concave_sup([&](double p) { return p * q - spec.eval_H(x, t, p); }, pm);
}

std::vector<std::pair<Point, double>> audit_samples(const MetricGraph& g, double T, const AuditSampling& s) {
    if (s.interior_per_edge < 3 || s.t_samples < 3 || s.pq_samples < 3)
        throw DomainError("audit sample counts must be at least 3 per axis");
    std::vector<Point> pts;
    for (int v = 0; v < g.num_vertices(); ++v) pts.push_back(g.vertex_point(v));
    for (int e = 0; e < g.num_edges(); ++e)
        for (int i = 1; i <= s.interior_per_edge; ++i)
            pts.push_back(g.point(e, g.edge(e).len * i / (s.interior_per_edge + 1)));
    std::vector<std::pair<Point, double>> out;
    for (const Point& p : pts)
        for (int k = 0; k < s.t_samples; ++k) out.emplace_back(p, T * k / s.t_samples);
    return out;
}

LagrangianView::LagrangianView(std::shared_ptr<const HamiltonianSpec> spec, const MetricGraph& g, AuditSampling s)
    : spec_(std::move(spec)) {
    samples_ = audit_samples(g, spec_->horizon(), s);
    const bool single = spec_->xt_independent();
    const std::size_t ns = single ? 1 : samples_.size();
    const double cap = spec_->speed_cap();
    m_cap_ = cap;

    std::vector<double> qs;
    for (int i = 0; i <= 16 * 256; ++i) qs.push_back(i / 256.0);
    for (double q : geometric(16.0, 1e4, 257))
        if (q > 16.0) qs.push_back(q);
    if (std::isfinite(cap)) {
        std::erase_if(qs, [cap](double q) { return q > cap; });
        if (qs.empty() || qs.back() < cap) qs.push_back(std::max(cap, 0.0));
    }
    std::vector<double> inf_L(qs.size(), kInf);
    for (std::size_t k = 0; k < ns; ++k) {
        const auto& [x, t] = samples_[k];
        for (std::size_t i = 0; i < qs.size(); ++i) inf_L[i] = std::min(inf_L[i], spec_->legendre_L(x, t, qs[i]));
    }
    // Chords of a convex function overshoot it between knots by at most
    // len * (slope spread) / 4; lower each knot by the larger adjacent bound.
    const std::size_t nq = qs.size();
    if (nq >= 3) {
        std::vector<double> sl(nq - 1);
        for (std::size_t i = 0; i + 1 < nq; ++i) sl[i] = (inf_L[i + 1] - inf_L[i]) / (qs[i + 1] - qs[i]);
        auto slope = [&](std::ptrdiff_t i) {
            const auto last = static_cast<std::ptrdiff_t>(sl.size()) - 1;
            if (i < 0) return 2.0 * sl[0] - sl[1];
            if (i > last) return 2.0 * sl[static_cast<std::size_t>(last)] - sl[static_cast<std::size_t>(last - 1)];
            return sl[static_cast<std::size_t>(i)];
        };
        std::vector<double> gap(nq - 1);
        for (std::size_t i = 0; i + 1 < nq; ++i) {
            const auto ii = static_cast<std::ptrdiff_t>(i);
            gap[i] = std::max(0.0, (qs[i + 1] - qs[i]) * (slope(ii + 1) - slope(ii - 1)) / 4.0);
        }
        for (std::size_t k = 0; k < nq; ++k) {
            if (!std::isfinite(inf_L[k])) continue;
            const double g = std::max(k > 0 ? gap[k - 1] : 0.0, k + 1 < nq ? gap[k] : 0.0);
            inf_L[k] -= g + 1e-12 * (1.0 + std::abs(inf_L[k]));
        }
    }
    lower_hull(qs, inf_L, hull_q_, hull_m_);

    // L0 and L1 with a margin for variation between neighbouring samples.
    auto bound = [&](double q) {
        double sup = 0.0;
        for (std::size_t k = 0; k < ns; ++k) {
            const auto& [x, t] = samples_[k];
            sup = std::max(sup, std::abs(spec_->legendre_L(x, t, q)));
        }
        if (single || !std::isfinite(sup)) return sup;
        double jump = 0.0;
        const int nt = s.t_samples;
        const std::size_t npts = samples_.size() / static_cast<std::size_t>(nt);
        std::vector<double> vals(samples_.size());
        for (std::size_t k = 0; k < samples_.size(); ++k) vals[k] = spec_->legendre_L(samples_[k].first, samples_[k].second, q);
        double spacing = 0.0;
        for (int e = 0; e < g.num_edges(); ++e) spacing = std::max(spacing, g.edge(e).len / (s.interior_per_edge + 1));
        for (std::size_t i = 0; i < npts; ++i) {
            for (int k = 0; k + 1 < nt; ++k)
                jump = std::max(jump, std::abs(vals[i * nt + k + 1] - vals[i * nt + k]));
            for (std::size_t j = i + 1; j < npts; ++j) {
                if (g.distance(samples_[i * nt].first, samples_[j * nt].first) > spacing * (1.0 + 1e-9)) continue;
                for (int k = 0; k < nt; ++k)
                    jump = std::max(jump, std::abs(vals[i * nt + k] - vals[j * nt + k]));
            }
        }
        return sup + jump;
    };
    L0_ = bound(0.0);
    L1_ = bound(1.0);
    L0_ += 1e-12 * (1.0 + L0_);
    L1_ += 1e-12 * (1.0 + L1_);
}

double LagrangianView::m(double q) const {
    if (q > m_cap_) return kInf;
    if (q < 0.0) q = 0.0;
    return piecewise_linear(hull_q_, hull_m_, q);
}

double LagrangianView::sup_abs_m(double r) const {
    double s = std::abs(m(0.0));
    for (std::size_t i = 0; i < hull_q_.size() && hull_q_[i] <= r; ++i) s = std::max(s, std::abs(hull_m_[i]));
    return std::max(s, std::abs(m(std::min(r, m_cap_))));
}

double legendre_H_back(const LagrangianView& view, const Point& x, double t, double p) {
    require_nonneg(p, "p");
    double hi = view.speed_cap();
    if (!std::isfinite(hi)) {
        const double l0 = view.L(x, t, 0.0);
        hi = 1.0;
        while ((view.L(x, t, hi) - l0) / hi < p + 1.0 && hi < 1e15) hi *= 2.0;
    }
    return concave_sup([&](double q) { return p * q - view.L(x, t, q); }, hi);
}

double search_radius(const LagrangianView& view, double C) {
    if (!view.superlinear()) throw DomainError("eikonal view has no search radius: use unit radius");
    if (!(C >= 0.0)) throw DomainError("Lipschitz bound C must be nonnegative");
    const auto& q = view.hull_q();
    const auto& m = view.hull_m();
    const std::size_t n = q.size();
    if (n < 2) throw CoercivityError("envelope m too coarse for a search radius");
    auto g = [&](std::size_t i) { return C * (q[i] + 1.0) - m[i]; };
    const double tail = (m[n - 1] - m[n - 2]) / (q[n - 1] - q[n - 2]);
    if (tail < C || (tail == C && g(n - 1) > 0.0))
        throw CoercivityError("envelope m grows too slowly: search radius unresolvable");
    double R0 = 0.0;
    for (std::size_t j = n; j-- > 0;) {
        const double gj = g(j);
        if (gj <= 0.0) continue;
        if (j == n - 1) {
            R0 = q[j] + gj / (tail - C);
        } else {
            const double gk = g(j + 1);
            R0 = q[j] + gj / (gj - gk) * (q[j + 1] - q[j]);
        }
        break;
    }
    return 2.0 * std::max(R0, 1.0);
}

const Verdict& AssumptionAudit::verdict(const std::string& name) const {
    for (const auto& v : verdicts)
        if (v.name == name) return v;
    throw DomainError("no verdict named " + name);
}

std::vector<std::string> AssumptionAudit::required_for(const std::string& route) {
    if (route == "eikonal") return {"H1", "H3"};
    return {"H1", "coercivity", "H2", "H3", "H4", "H5"};
}

std::optional<std::string> AssumptionAudit::first_failure(const std::string& route) const {
    for (const auto& n : required_for(route))
        if (!passes(n)) return n;
    return std::nullopt;
}

nlohmann::json AssumptionAudit::to_json() const {
    nlohmann::json j;
    j["verdicts"] = nlohmann::json::object();
    for (const auto& v : verdicts) {
        nlohmann::json e{{"verdict", v.pass ? "PASS" : "FAIL"}, {"detail", v.detail}};
        if (!v.witness.is_null()) e["witness"] = v.witness;
        j["verdicts"][v.name] = e;
    }
    j["constants"] = {{"L0", L0}, {"L1", L1}, {"R", R ? nlohmann::json(*R) : nlohmann::json(nullptr)}, {"C_T", C_T}};
    j["coercivity_profile"] = nlohmann::json::array();
    for (auto [r, v] : coercivity_profile) j["coercivity_profile"].push_back({{"R", r}, {"inf_H_over_p", v}});
    j["modulus"] = nlohmann::json::array();
    for (auto [r, w] : modulus) j["modulus"].push_back({{"r", r}, {"omega", w}});
    j["route_hint"] = route_hint;
    j["repairs"] = repairs;
    j["sampled_region"] = sampled_region;
    return j;
}

AssumptionAudit audit_assumptions(const HamiltonianSpec& spec, const MetricGraph& g, AuditSampling s) {
    AssumptionAudit A;
    auto spec_ptr = std::make_shared<const HamiltonianSpec>(spec);
    const LagrangianView view(spec_ptr, g, s);
    const auto& samples = view.samples();
    const bool single = spec.xt_independent();
    const std::size_t ns = single ? 1 : samples.size();
    const double cap = spec.speed_cap();

    {
        std::ostringstream os;
        os << "x: " << samples.size() / static_cast<std::size_t>(s.t_samples) << " graph points (all vertices + "
           << s.interior_per_edge << " interior per edge); t: " << s.t_samples << " points in [0, T); p,q: "
           << s.pq_samples << " points";
        A.sampled_region = os.str();
    }
    A.repairs = spec.table().repairs;

    // (H1) convexity and monotonicity in p.
    std::vector<double> ps{0.0};
    for (double p : geometric(1e-2, 1e2, s.pq_samples - 1)) ps.push_back(p);
    if (spec.form() == HForm::Tabulated) {
        ps.insert(ps.end(), spec.table().p.begin(), spec.table().p.end());
        std::sort(ps.begin(), ps.end());
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    }
    Verdict h1{"H1", true, "convex and nondecreasing in p on all samples", nullptr};
    for (std::size_t k = 0; k < ns && h1.pass; ++k) {
        const auto& [x, t] = samples[k];
        std::vector<double> H(ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i) H[i] = spec.eval_H_raw(x, t, ps[i]);
        for (std::size_t i = 0; i + 1 < ps.size() && h1.pass; ++i) {
            if (H[i + 1] < H[i] - 1e-12 * (1.0 + std::abs(H[i]))) {
                h1.pass = false;
                h1.detail = "H decreases in p";
                h1.witness = {{"x", point_json(x)}, {"t", t}, {"p1", ps[i]}, {"p2", ps[i + 1]}, {"H1", H[i]}, {"H2", H[i + 1]}};
            }
        }
        for (std::size_t i = 0; i < ps.size() && h1.pass; ++i)
            for (std::size_t j = i + 1; j < ps.size() && h1.pass; ++j) {
                const double mid = 0.5 * (ps[i] + ps[j]);
                const double hm = spec.eval_H_raw(x, t, mid);
                const double chord = 0.5 * (H[i] + H[j]);
                if (hm > chord + 1e-10 * (1.0 + std::abs(H[i]) + std::abs(H[j]))) {
                    h1.pass = false;
                    h1.detail = "midpoint convexity fails";
                    h1.witness = {{"x", point_json(x)}, {"t", t},     {"p1", ps[i]},     {"p2", ps[j]},
                                  {"H_p1", H[i]},       {"H_p2", H[j]}, {"H_mid", hm}, {"chord_mid", chord}};
                }
            }
    }
    A.verdicts.push_back(h1);

    // Coercivity profile R -> inf H/p over p >= R.
    Verdict co{"coercivity", true, "", nullptr};
    double sec_mid = 0.0, sec_top = 0.0;
    for (int i = 0; i <= 20; ++i) {
        const double R = std::ldexp(1.0, i);
        double inf_ratio = kInf, secant = kInf;
        for (std::size_t k = 0; k < ns; ++k) {
            const auto& [x, t] = samples[k];
            for (double p : {R, 2 * R, 4 * R, 8 * R}) inf_ratio = std::min(inf_ratio, spec.eval_H(x, t, p) / p);
            secant = std::min(secant, (spec.eval_H(x, t, 8 * R) - spec.eval_H(x, t, 4 * R)) / (4 * R));
        }
        A.coercivity_profile.emplace_back(R, inf_ratio);
        if (i == 10) sec_mid = secant;
        if (i == 20) sec_top = secant;
    }
    const double top = A.coercivity_profile.back().second;
    if (!(sec_top >= 1.01 * sec_mid) || !(sec_top > 0.0)) {
        co.pass = false;
        std::ostringstream os;
        os << "inf H/p levels off at " << top << " (growth of H is at most linear)";
        co.detail = os.str();
        co.witness = {{"R", std::ldexp(1.0, 20)}, {"p", std::ldexp(1.0, 23)}, {"inf_H_over_p", top},
                      {"secant_slope_R1024", sec_mid}, {"secant_slope_R1048576", sec_top}};
        if (spec.form() == HForm::Eikonal) co.detail += "; eikonal route required";
    } else {
        co.detail = "inf H/p grows without bound on the sampled profile";
    }
    A.verdicts.push_back(co);

    // (H2) coercive convex minorant m.
    Verdict h2{"H2", true, "", nullptr};
    std::vector<double> qs{0.0};
    for (double q : geometric(1e-2, 1e2, s.pq_samples - 1)) qs.push_back(q);
    if (std::isfinite(cap)) {
        h2.pass = false;
        h2.detail = "L is +infinity beyond q = " + std::to_string(cap) + "; no finite coercive minorant";
        const double qw = std::max(2.0 * cap, cap + 1.0);
        h2.witness = {{"x", point_json(samples[0].first)}, {"t", samples[0].second}, {"q", qw}, {"L", "inf"}};
    } else {
        const double r_mid = view.m(1e2) / 1e2;
        const double r_top = view.m(1e4) / 1e4;
        if (!(r_top > 1.01 * r_mid) || !(r_top > 0.0)) {
            h2.pass = false;
            h2.detail = "m(q)/q does not grow";
            h2.witness = {{"q", 1e4}, {"m_over_q", r_top}, {"m_over_q_at_100", r_mid}};
        }
        for (std::size_t k = 0; k < ns && h2.pass; ++k)
            for (double q : qs) {
                const double L = spec.legendre_L(samples[k].first, samples[k].second, q);
                if (L < view.m(q) - 1e-9 * (1.0 + std::abs(L))) {
                    h2.pass = false;
                    h2.detail = "L below fitted minorant m";
                    h2.witness = {{"x", point_json(samples[k].first)}, {"t", samples[k].second}, {"q", q}, {"L", L}, {"m", view.m(q)}};
                    break;
                }
            }
        if (h2.pass) h2.detail = "L >= m on all samples and m(q)/q grows";
    }
    A.verdicts.push_back(h2);

    // (H3) sup L(., ., 0) finite.
    Verdict h3{"H3", true, "", nullptr};
    double sup0 = -kInf;
    for (std::size_t k = 0; k < ns; ++k) {
        const double L = spec.legendre_L(samples[k].first, samples[k].second, 0.0);
        if (!std::isfinite(L)) {
            h3.pass = false;
            h3.witness = {{"x", point_json(samples[k].first)}, {"t", samples[k].second}, {"q", 0.0}, {"L", "inf"}};
        }
        sup0 = std::max(sup0, L);
    }
    h3.detail = h3.pass ? "sup L(x,t,0) = " + std::to_string(sup0) : "L(x,t,0) unbounded";
    A.verdicts.push_back(h3);

    // (H4) sampled modulus and (H5) time-Lipschitz constant, on the finite region of L.
    std::vector<double> qf;
    for (double q : qs)
        if (q <= cap) qf.push_back(q);
    std::vector<std::vector<double>> table(ns, std::vector<double>(qf.size()));
    for (std::size_t k = 0; k < ns; ++k)
        for (std::size_t i = 0; i < qf.size(); ++i) table[k][i] = spec.legendre_L(samples[k].first, samples[k].second, qf[i]);

    Verdict h4{"H4", true, "", nullptr};
    std::vector<std::pair<double, double>> pair_ratio;
    for (std::size_t a = 0; a < ns && h4.pass; ++a)
        for (std::size_t b = a + 1; b < ns; ++b) {
            const double r = g.distance(samples[a].first, samples[b].first) + std::abs(samples[a].second - samples[b].second);
            double w = 0.0;
            for (std::size_t i = 0; i < qf.size(); ++i) {
                const double ratio = std::abs(table[a][i] - table[b][i]) / (1.0 + std::abs(view.m(qf[i])));
                if (!std::isfinite(ratio)) {
                    h4.pass = false;
                    h4.detail = "non-finite L difference";
                    h4.witness = {{"x", point_json(samples[a].first)}, {"t", samples[a].second}, {"y", point_json(samples[b].first)},
                                  {"s", samples[b].second}, {"q", qf[i]}};
                    break;
                }
                w = std::max(w, ratio);
            }
            pair_ratio.emplace_back(r, w);
        }
    if (h4.pass) {
        double rmax = 0.0;
        for (auto [r, w] : pair_ratio) rmax = std::max(rmax, r);
        for (int k = 5; k >= 0 && rmax > 0.0; --k) {
            const double r = rmax * std::ldexp(1.0, -k);
            double w = 0.0;
            for (auto [rr, ww] : pair_ratio)
                if (rr <= r * (1.0 + 1e-12)) w = std::max(w, ww);
            A.modulus.emplace_back(r, w);
        }
        h4.detail = "sampled modulus finite" + std::string(std::isfinite(cap) ? " (on q <= speed cap)" : "");
    }
    A.verdicts.push_back(h4);

    Verdict h5{"H5", true, "", nullptr};
    if (!single) {
        const int nt = s.t_samples;
        const double dt = spec.horizon() / nt;
        for (std::size_t k = 0; k + 1 < ns; ++k) {
            if ((k + 1) % static_cast<std::size_t>(nt) == 0) continue;
            for (std::size_t i = 0; i < qf.size(); ++i) {
                const double c = std::abs(table[k + 1][i] - table[k][i]) / dt;
                if (!std::isfinite(c)) {
                    h5.pass = false;
                    h5.witness = {{"x", point_json(samples[k].first)}, {"t", samples[k].second}, {"q", qf[i]}};
                }
                A.C_T = std::max(A.C_T, c);
            }
        }
    }
    h5.detail = h5.pass ? "sampled C_T = " + std::to_string(A.C_T) : "non-finite time variation of L";
    A.verdicts.push_back(h5);

    A.L0 = view.L0();
    A.L1 = view.L1();
    if (h1.pass && co.pass) {
        A.route_hint = "general";
        try {
            A.R = search_radius(view, 1.0);
        } catch (const std::exception&) {
            A.R.reset();
        }
    } else if (spec.form() == HForm::Eikonal && h1.pass) {
        A.route_hint = "eikonal";
    } else {
        A.route_hint = "none";
    }
    return A;
}

} // namespace mongehj
