#include <gtest/gtest.h>

#include <random>

#include "mongehj/hamiltonian.hpp"
#include "oracles.hpp"

using namespace mongehj;

namespace {

const MetricGraph& seg() {
    static const MetricGraph g = MetricGraph::segment(1.0);
    return g;
}

Point mid() { return seg().point(0, 0.5); }

std::shared_ptr<const HamiltonianSpec> share(HamiltonianSpec s) { return std::make_shared<const HamiltonianSpec>(std::move(s)); }

HamiltonianSpec power(double a, double alpha, double f = 0.0) {
    return HamiltonianSpec::power(ScalarFunction::constant(a), alpha, ScalarFunction::constant(f), 1.0);
}

HamiltonianSpec quadlin(double a, double b, double alpha, double f = 0.0) {
    return HamiltonianSpec::quadlin(ScalarFunction::constant(a), ScalarFunction::constant(b), ScalarFunction::constant(f), alpha, 1.0);
}

} // namespace

TEST(Hamiltonian, EvalForms) {
    EXPECT_DOUBLE_EQ(power(2.0, 2.0, 0.5).eval_H(mid(), 0.0, 3.0), 2.0 * 9.0 - 0.5);
    EXPECT_DOUBLE_EQ(quadlin(1.0, 0.5, 2.0).eval_H(mid(), 0.0, 2.0), 4.0 + 1.0);
    const HamiltonianSpec e = HamiltonianSpec::eikonal(ScalarFunction::constant(0.25), 1.0);
    EXPECT_DOUBLE_EQ(e.eval_H(mid(), 0.0, 2.0), 1.75);
    EXPECT_THROW(e.eval_H(mid(), 0.0, -1.0), DomainError);
    EXPECT_THROW(power(1.0, 1.0), DomainError);
    EXPECT_THROW(power(-1.0, 2.0), DomainError);
}

TEST(Hamiltonian, PowerConjugateCoefficient) {
    // H = p^2 has L = q^2 / 4
    EXPECT_NEAR(power_conjugate_coefficient(1.0, 2.0), 0.25, 1e-15);
    // H = p^3 / 3 has L = (2/3) q^{3/2}
    EXPECT_NEAR(power_conjugate_coefficient(1.0 / 3.0, 3.0), 2.0 / 3.0, 1e-14);
}

// Closed-form L against a brute grid supremum of p q - H(p).
TEST(Hamiltonian, LegendreMatchesGridSup) {
    const std::vector<HamiltonianSpec> specs{power(1.0, 1.5), power(1.0, 2.0), power(0.7, 3.0, 0.2),
                                             quadlin(1.0, 0.5, 2.0), quadlin(2.0, 1.0, 1.5, -0.3)};
    for (const auto& s : specs)
        for (double q : {0.0, 0.1, 0.5, 1.0, 2.5, 6.0}) {
            const double want = oracle::grid_sup([&](double p) { return p * q - s.eval_H(mid(), 0.0, p); }, 40.0, 400000);
            EXPECT_NEAR(s.legendre_L(mid(), 0.0, q), want, 1e-5 * (1.0 + std::abs(want))) << to_string(s.form()) << " q=" << q;
        }
}

TEST(Hamiltonian, EikonalLagrangian) {
    const HamiltonianSpec e = HamiltonianSpec::eikonal(ScalarFunction::constant(0.3), 1.0);
    EXPECT_DOUBLE_EQ(e.legendre_L(mid(), 0.0, 0.0), 0.3);
    EXPECT_DOUBLE_EQ(e.legendre_L(mid(), 0.0, 1.0), 0.3);
    EXPECT_TRUE(std::isinf(e.legendre_L(mid(), 0.0, 1.0 + 1e-9)));
    EXPECT_EQ(e.speed_cap(), 1.0);
}

TEST(Hamiltonian, NumericLegendreAgreesWithClosedForm) {
    for (const auto& s : {power(1.0, 2.0), power(1.0, 1.5), quadlin(1.0, 0.5, 2.0)})
        for (double q : {0.0, 0.3, 1.0, 4.0})
            EXPECT_NEAR(numeric_legendre_L(s, mid(), 0.0, q), s.legendre_L(mid(), 0.0, q), 1e-8);
}

// Round trip H = L* on p in [0, 10] to 1e-6 for every listed spec.
TEST(HamiltonianProperty, BiconjugateRoundTrip) {
    for (const auto& s : {power(1.0, 1.5), power(1.0, 2.0), power(1.0, 3.0), quadlin(1.0, 0.5, 2.0)}) {
        const LagrangianView view(share(s), seg());
        double worst = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double p = 10.0 * i / 200.0;
            worst = std::max(worst, std::abs(legendre_H_back(view, mid(), 0.0, p) - s.eval_H(mid(), 0.0, p)));
        }
        EXPECT_LE(worst, 1e-6) << to_string(s.form()) << " alpha " << s.alpha();
    }
}

TEST(HamiltonianProperty, FenchelYoung) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> P(0.0, 10.0), Q(0.0, 20.0);
    for (const auto& s : {power(1.0, 1.5), power(1.0, 2.0), power(1.0, 3.0), quadlin(1.0, 0.5, 2.0)}) {
        for (int k = 0; k < 10000; ++k) {
            const double p = P(rng), q = Q(rng);
            EXPECT_GE(s.legendre_L(mid(), 0.0, q) + s.eval_H(mid(), 0.0, p) - p * q, -1e-9);
        }
    }
}

TEST(HamiltonianProperty, EnvelopeIsMinorant) {
    auto g = std::make_shared<const MetricGraph>(MetricGraph::segment(1.0));
    const auto s = share(HamiltonianSpec::power(ScalarFunction::from_expression("1 + 0.5 * x", g), 2.0,
                                                ScalarFunction::from_expression("0.2 * t", g), 1.0));
    const LagrangianView view(s, *g);
    std::mt19937_64 rng(4);
    for (int k = 0; k < 2000; ++k) {
        const Point x = g->point(0, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double q = std::uniform_real_distribution<double>(0.0, 50.0)(rng);
        EXPECT_LE(view.m(q), s->legendre_L(x, t, q) + 1e-9);
    }
    EXPECT_GT(view.m(1e4) / 1e4, view.m(100.0) / 100.0);
}

TEST(Hamiltonian, TabulatedRepair) {
    // a dip at p = 1 breaks convexity; the hull drops it
    const HamiltonianSpec s = HamiltonianSpec::tabulated({0.0, 1.0, 2.0, 3.0}, {0.0, -0.5, 1.0, 3.0}, 1.0);
    EXPECT_FALSE(s.table().repairs.empty());
    for (std::size_t i = 1; i + 1 < s.table().hull_p.size(); ++i) {
        const auto& p = s.table().hull_p;
        const auto& H = s.table().hull_H;
        const double left = (H[i] - H[i - 1]) / (p[i] - p[i - 1]);
        const double right = (H[i + 1] - H[i]) / (p[i + 1] - p[i]);
        EXPECT_LE(left, right + 1e-12);
        EXPECT_GE(left, 0.0);
    }
    EXPECT_THROW(HamiltonianSpec::tabulated({0.0, 0.0}, {0.0, 1.0}, 1.0), DomainError);
    EXPECT_THROW(HamiltonianSpec::tabulated({1.0, 2.0}, {0.0, 1.0}, 1.0), DomainError);
}

TEST(Hamiltonian, JsonRoundTrip) {
    auto g = std::make_shared<const MetricGraph>(MetricGraph::segment(1.0));
    for (const auto& s : {power(1.0, 2.0), quadlin(1.0, 0.5, 2.0)}) {
        const HamiltonianSpec r = HamiltonianSpec::from_json(s.to_json(), g);
        EXPECT_EQ(r.to_json(), s.to_json());
    }
    EXPECT_THROW(HamiltonianSpec::from_json({{"form", "cubic"}}, g), DomainError);
}

TEST(Audit, PowerPassesEverything) {
    for (double alpha : {1.5, 2.0, 3.0}) {
        const AssumptionAudit a = audit_assumptions(power(1.0, alpha), seg());
        for (const auto& v : a.verdicts) EXPECT_TRUE(v.pass) << v.name << ": " << v.detail;
        EXPECT_EQ(a.route_hint, "general");
        ASSERT_TRUE(a.R.has_value());
        EXPECT_GE(*a.R, 2.0);
    }
}

TEST(Audit, EikonalRoutesToEikonal) {
    const AssumptionAudit a = audit_assumptions(HamiltonianSpec::eikonal(ScalarFunction::constant(0.0), 1.0), seg());
    EXPECT_EQ(a.route_hint, "eikonal");
    EXPECT_TRUE(a.passes("H1"));
    EXPECT_FALSE(a.passes("coercivity"));
    EXPECT_FALSE(a.first_failure("eikonal").has_value());
    EXPECT_EQ(a.first_failure("general").value(), "coercivity");
}

TEST(Audit, NonConvexTableFailsH1WithWitness) {
    const HamiltonianSpec s = HamiltonianSpec::tabulated({0.0, 1.0, 2.0, 3.0}, {0.0, 2.0, 2.1, 6.0}, 1.0);
    const AssumptionAudit a = audit_assumptions(s, seg());
    EXPECT_FALSE(a.passes("H1"));
    EXPECT_FALSE(a.verdict("H1").witness.is_null());
    EXPECT_EQ(a.route_hint, "none");
}

TEST(SearchRadius, CoversTheEnvelopeCrossing) {
    const LagrangianView view(share(power(1.0, 2.0)), seg());
    for (double C : {0.0, 1.0, 3.0}) {
        const double R = search_radius(view, C);
        // m(q) = q^2 / 4 up to hull error: C (q + 1) <= m(q) for q >= R / 2
        for (double q = R / 2.0; q < 4.0 * R; q += 0.01) EXPECT_LE(C * (q + 1.0), view.m(q) + 1e-6);
        EXPECT_GE(R, 2.0);
    }
    const LagrangianView ev(share(HamiltonianSpec::eikonal(ScalarFunction::constant(0.0), 1.0)), seg());
    EXPECT_THROW(search_radius(ev, 1.0), DomainError);
}

TEST(ConcaveSup, FindsInteriorMaximum) {
    double arg = 0.0;
    const double v = concave_sup([](double q) { return -(q - 3.3) * (q - 3.3) + 2.0; }, 10.0, &arg);
    EXPECT_NEAR(v, 2.0, 1e-12);
    EXPECT_NEAR(arg, 3.3, 1e-6);
}
