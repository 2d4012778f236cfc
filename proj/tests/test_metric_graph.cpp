#include <gtest/gtest.h>

#include <random>

#include "mongehj/metric_graph.hpp"
#include "oracles.hpp"

using namespace mongehj;

namespace {

struct RandomGraph {
    MetricGraph g;
    std::vector<oracle::E> edges;
    int nv;
};

RandomGraph random_graph(std::mt19937_64& rng, int nv, int extra) {
    std::uniform_real_distribution<double> len(0.2, 2.0);
    std::vector<std::string> names;
    for (int i = 0; i < nv; ++i) names.push_back("v" + std::to_string(i));
    std::vector<EdgeSpec> specs;
    std::vector<oracle::E> es;
    // spanning tree, then chords (parallel edges and loops allowed)
    for (int i = 1; i < nv; ++i) {
        const int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
        const double l = len(rng);
        specs.push_back({names[i], names[j], l});
        es.push_back({i, j, l});
    }
    for (int k = 0; k < extra; ++k) {
        const int a = std::uniform_int_distribution<int>(0, nv - 1)(rng);
        const int b = std::uniform_int_distribution<int>(0, nv - 1)(rng);
        const double l = len(rng);
        specs.push_back({names[a], names[b], l});
        es.push_back({a, b, l});
    }
    return {MetricGraph(names, specs), es, nv};
}

Point random_point(const MetricGraph& g, std::mt19937_64& rng) {
    const int e = std::uniform_int_distribution<int>(0, g.num_edges() - 1)(rng);
    return g.point(e, std::uniform_real_distribution<double>(0.0, g.edge(e).len)(rng));
}

} // namespace

TEST(MetricGraph, SegmentDistances) {
    const MetricGraph g = MetricGraph::segment(1.0);
    EXPECT_DOUBLE_EQ(g.distance(g.point(0, 0.2), g.point(0, 0.9)), 0.7);
    EXPECT_DOUBLE_EQ(g.distance(g.vertex_point(0), g.vertex_point(1)), 1.0);
    EXPECT_TRUE(g.point(0, 0.0).is_vertex());
    EXPECT_TRUE(g.point(0, 1.0).is_vertex());
}

TEST(MetricGraph, StarDistanceThroughCenter) {
    const MetricGraph g = MetricGraph::star({1.0, 0.7, 1.3});
    EXPECT_NEAR(g.distance(g.point(0, 0.4), g.point(2, 1.0)), 1.4, 1e-15);
    EXPECT_NEAR(g.distance(g.point(1, 0.7), g.point(2, 1.3)), 2.0, 1e-15);
}

TEST(MetricGraph, CycleTakesShorterArc) {
    const MetricGraph g({"a", "b", "c"}, {{"a", "b", 1.0}, {"b", "c", 1.0}, {"c", "a", 1.0}});
    EXPECT_NEAR(g.distance(g.point(0, 0.1), g.point(2, 0.9)), 0.2, 1e-15);
    EXPECT_NEAR(g.distance(g.point(0, 0.5), g.point(1, 0.5)), 1.0, 1e-15);
    EXPECT_NEAR(g.distance(g.point(0, 0.5), g.point(2, 0.5)), 1.0, 1e-15);
}

TEST(MetricGraph, SelfLoopEdge) {
    const MetricGraph g({"a", "b"}, {{"a", "a", 2.0}, {"a", "b", 1.0}});
    EXPECT_NEAR(g.distance(g.point(0, 0.5), g.point(0, 1.5)), 1.0, 1e-15);
    EXPECT_NEAR(g.distance(g.point(0, 0.3), g.vertex_point(1)), 1.3, 1e-15);
}

TEST(MetricGraph, DisconnectedRaises) {
    const MetricGraph g({"a", "b", "c", "d"}, {{"a", "b", 1.0}, {"c", "d", 1.0}});
    EXPECT_FALSE(g.connected());
    EXPECT_THROW(g.distance(g.point(0, 0.5), g.point(1, 0.5)), InfiniteDistanceError);
}

TEST(MetricGraph, InvalidInputs) {
    EXPECT_THROW(MetricGraph({"a", "b"}, {{"a", "b", 0.0}}), DomainError);
    EXPECT_THROW(MetricGraph({"a", "b"}, {{"a", "b", -1.0}}), DomainError);
    EXPECT_THROW(MetricGraph({"a", "a"}, {}), DomainError);
    EXPECT_THROW(MetricGraph({"a", "b"}, {{"a", "x", 1.0}}), DomainError);
    const MetricGraph g = MetricGraph::segment(1.0);
    EXPECT_THROW(g.point(0, 1.5), DomainError);
    EXPECT_THROW(g.point(3, 0.5), DomainError);
    EXPECT_THROW(g.validate(Point{-1, 0, 2.0}), DomainError);
}

TEST(MetricGraph, JsonRoundTrip) {
    const MetricGraph g = MetricGraph::star({1.0, 0.7, 1.3});
    const MetricGraph h = MetricGraph::from_json(g.to_json());
    EXPECT_EQ(g.to_json(), h.to_json());
    EXPECT_THROW(MetricGraph::from_json(nlohmann::json::object()), DomainError);
}

// Distances agree with simple-path enumeration on random small graphs.
TEST(MetricGraphProperty, MatchesPathEnumeration) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        auto rg = random_graph(rng, 3 + trial % 4, trial % 4);
        const auto vd = oracle::path_enumeration(rg.nv, rg.edges);
        for (int k = 0; k < 40; ++k) {
            const int a = std::uniform_int_distribution<int>(0, rg.g.num_edges() - 1)(rng);
            const int b = std::uniform_int_distribution<int>(0, rg.g.num_edges() - 1)(rng);
            const double oa = std::uniform_real_distribution<double>(0.0, rg.edges[a].len)(rng);
            const double ob = std::uniform_real_distribution<double>(0.0, rg.edges[b].len)(rng);
            const double got = rg.g.distance(rg.g.point(a, oa), rg.g.point(b, ob));
            EXPECT_NEAR(got, oracle::point_distance(vd, rg.edges, a, oa, b, ob), 1e-12);
        }
    }
}

TEST(MetricGraphProperty, MetricAxioms) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto rg = random_graph(rng, 5, 3);
        for (int k = 0; k < 60; ++k) {
            const Point p = random_point(rg.g, rng), q = random_point(rg.g, rng), r = random_point(rg.g, rng);
            EXPECT_EQ(rg.g.distance(p, p), 0.0);
            EXPECT_NEAR(rg.g.distance(p, q), rg.g.distance(q, p), 1e-12);
            EXPECT_LE(rg.g.distance(p, r), rg.g.distance(p, q) + rg.g.distance(q, r) + 1e-12);
        }
    }
}

TEST(MetricGraphProperty, GeodesicRealizesDistance) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        auto rg = random_graph(rng, 6, 3);
        for (int k = 0; k < 30; ++k) {
            const Point p = random_point(rg.g, rng), q = random_point(rg.g, rng);
            const Geodesic geo = rg.g.geodesic(p, q);
            const double d = rg.g.distance(p, q);
            EXPECT_NEAR(geo.length, d, 1e-12);
            double legs = 0.0;
            for (const Leg& l : geo.legs) legs += l.length();
            EXPECT_NEAR(legs, d, 1e-12);
            // walking s along the geodesic lands at distance s from p and d - s from q
            for (double frac : {0.0, 0.25, 0.5, 0.9, 1.0}) {
                const Point z = geo.at(rg.g, frac * d);
                EXPECT_NEAR(rg.g.distance(p, z), frac * d, 1e-9);
                EXPECT_NEAR(rg.g.distance(z, q), (1.0 - frac) * d, 1e-9);
            }
        }
    }
}

TEST(MetricGraph, SpacetimeDistanceIsMax) {
    const MetricGraph g = MetricGraph::segment(1.0);
    EXPECT_DOUBLE_EQ(spacetime_distance(g, {g.point(0, 0.1), 0.5}, {g.point(0, 0.4), 0.6}), 0.3);
    EXPECT_DOUBLE_EQ(spacetime_distance(g, {g.point(0, 0.1), 0.1}, {g.point(0, 0.2), 0.6}), 0.5);
}

TEST(Mesh, NodeCountsAndSpacing) {
    const MetricGraph g = MetricGraph::star({1.0, 0.7, 1.3});
    const Mesh m(g, 0.1);
    // 4 vertices, interior nodes 9 + 6 + 12
    EXPECT_EQ(m.size(), 4 + 9 + 6 + 12);
    for (int i = 0; i < m.size(); ++i)
        for (const auto& nb : m.neighbors(i)) EXPECT_LE(nb.gap, 0.1 + 1e-12);
    EXPECT_THROW(Mesh(g, 0.0), DomainError);
}

TEST(Mesh, InterpolationReproducesLinear) {
    const MetricGraph g = MetricGraph::segment(1.0);
    const Mesh m(g, 0.05);
    std::vector<double> v;
    for (const Point& p : m.points()) v.push_back(3.0 * p.offset - 1.0);
    for (double o : {0.013, 0.5, 0.77, 0.999}) EXPECT_NEAR(m.interpolate(v, g.point(0, o)), 3.0 * o - 1.0, 1e-14);
}

TEST(Mesh, HashDependsOnSpacing) {
    const MetricGraph g = MetricGraph::segment(1.0);
    EXPECT_EQ(Mesh(g, 0.1).hash(), Mesh(g, 0.1).hash());
    EXPECT_NE(Mesh(g, 0.1).hash(), Mesh(g, 0.05).hash());
}

// Every node inside the continuum ball is covered by a reach piece with the
// right distance, and nothing outside is.
TEST(MeshProperty, ReachMatchesBruteBall) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 8; ++trial) {
        auto rg = random_graph(rng, 5, 2);
        const Mesh m(rg.g, 0.07);
        for (int k = 0; k < 10; ++k) {
            const Point p = random_point(rg.g, rng);
            const double r = std::uniform_real_distribution<double>(0.05, 1.5)(rng);
            const auto pieces = m.reach(p, r);
            for (const CellPiece& pc : pieces) {
                EXPECT_LE(pc.d_lo, r + 1e-12);
                EXPECT_LE(pc.d_hi, r + 1e-12);
                for (double o : {pc.lo, 0.5 * (pc.lo + pc.hi), pc.hi}) {
                    const double d = pc.hi > pc.lo ? pc.d_lo + (pc.d_hi - pc.d_lo) * (o - pc.lo) / (pc.hi - pc.lo) : pc.d_lo;
                    EXPECT_NEAR(d, rg.g.distance(p, rg.g.point(pc.edge, o)), 1e-9);
                }
            }
            for (int i = 0; i < m.size(); ++i) {
                const Point& y = m.point(i);
                const double d = rg.g.distance(p, y);
                if (d > r - 1e-9) continue;
                bool covered = false;
                for (const CellPiece& pc : pieces) {
                    if (y.is_vertex()) {
                        const Edge& e = rg.g.edge(pc.edge);
                        covered |= (e.u == y.vertex && pc.lo <= 1e-12) || (e.v == y.vertex && pc.hi >= e.len - 1e-12);
                    } else {
                        covered |= pc.edge == y.edge && pc.lo <= y.offset + 1e-12 && y.offset <= pc.hi + 1e-12;
                    }
                }
                EXPECT_TRUE(covered) << "node " << i << " at distance " << d << " < " << r;
            }
            for (const BallEntry& b : ball(rg.g, m, p, r)) EXPECT_LE(b.distance, r + 1e-12);
        }
    }
}
