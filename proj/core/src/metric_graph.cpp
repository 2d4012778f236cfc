#include "mongehj/metric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>

namespace mongehj {

namespace {

struct End {
    int vertex;
    double cost;
    double offset; // offset on the point's own edge that reaches this vertex
};

std::vector<End> ends_of(const MetricGraph& g, const Point& p) {
    if (p.is_vertex()) return {{p.vertex, 0.0, p.offset}};
    const Edge& e = g.edge(p.edge);
    return {{e.u, p.offset, 0.0}, {e.v, e.len - p.offset, e.len}};
}

} // namespace

MetricGraph::MetricGraph(std::vector<std::string> vertex_names, const std::vector<EdgeSpec>& edges)
    : names_(std::move(vertex_names)) {
    if (names_.empty()) throw DomainError("graph needs at least one vertex");
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (!index_.emplace(names_[i], static_cast<int>(i)).second)
            throw DomainError("duplicate vertex name: " + names_[i]);
    }
    incident_.resize(names_.size());
    for (const auto& es : edges) {
        if (!(es.len > 0.0) || !std::isfinite(es.len))
            throw DomainError("edge length must be positive and finite");
        Edge e{vertex_index(es.u), vertex_index(es.v), es.len};
        const int id = static_cast<int>(edges_.size());
        edges_.push_back(e);
        incident_[static_cast<std::size_t>(e.u)].push_back(id);
        if (e.v != e.u) incident_[static_cast<std::size_t>(e.v)].push_back(id);
    }

    const std::size_t n = names_.size();
    dist_.assign(n * n, kInf);
    pred_edge_.assign(n * n, -1);
    using Item = std::pair<double, int>;
    for (std::size_t s = 0; s < n; ++s) {
        double* d = &dist_[s * n];
        int* pred = &pred_edge_[s * n];
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        d[s] = 0.0;
        pq.emplace(0.0, static_cast<int>(s));
        while (!pq.empty()) {
            auto [du, u] = pq.top();
            pq.pop();
            if (du > d[u]) continue;
            for (int eid : incident_[static_cast<std::size_t>(u)]) {
                const Edge& e = edges_[static_cast<std::size_t>(eid)];
                const int w = e.u == u ? e.v : e.u;
                const double nd = du + e.len;
                if (nd < d[w]) {
                    d[w] = nd;
                    pred[w] = eid;
                    pq.emplace(nd, w);
                }
            }
        }
    }

    std::vector<int> comp(n, -1);
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        for (std::size_t v = 0; v < n; ++v)
            if (std::isfinite(dist_[s * n + v])) comp[v] = components_;
        ++components_;
    }
}

MetricGraph MetricGraph::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
        throw DomainError("graph JSON needs \"vertices\" and \"edges\"");
    std::vector<std::string> names;
    for (const auto& v : j.at("vertices")) names.push_back(v.get<std::string>());
    std::vector<EdgeSpec> edges;
    for (const auto& e : j.at("edges"))
        edges.push_back({e.at("u").get<std::string>(), e.at("v").get<std::string>(), e.at("len").get<double>()});
    return MetricGraph(std::move(names), edges);
}

MetricGraph MetricGraph::segment(double len) {
    return MetricGraph({"a", "b"}, {{"a", "b", len}});
}

MetricGraph MetricGraph::star(const std::vector<double>& lens) {
    std::vector<std::string> names{"c"};
    std::vector<EdgeSpec> edges;
    for (std::size_t i = 0; i < lens.size(); ++i) {
        names.push_back("l" + std::to_string(i));
        edges.push_back({"c", names.back(), lens[i]});
    }
    return MetricGraph(std::move(names), edges);
}

nlohmann::json MetricGraph::to_json() const {
    nlohmann::json j;
    j["vertices"] = names_;
    j["edges"] = nlohmann::json::array();
    for (const auto& e : edges_)
        j["edges"].push_back({{"u", names_[static_cast<std::size_t>(e.u)]},
                              {"v", names_[static_cast<std::size_t>(e.v)]},
                              {"len", e.len}});
    return j;
}

int MetricGraph::vertex_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw DomainError("unknown vertex: " + name);
    return it->second;
}

double MetricGraph::total_length() const {
    double s = 0.0;
    for (const auto& e : edges_) s += e.len;
    return s;
}

Point MetricGraph::vertex_point(int v) const {
    if (v < 0 || v >= num_vertices()) throw DomainError("vertex index out of range");
    Point p;
    p.vertex = v;
    const auto& inc = incident_[static_cast<std::size_t>(v)];
    if (!inc.empty()) {
        p.edge = inc.front();
        const Edge& e = edges_[static_cast<std::size_t>(p.edge)];
        p.offset = e.u == v ? 0.0 : e.len;
    }
    return p;
}

Point MetricGraph::point(int e, double offset) const {
    if (e < 0 || e >= num_edges()) throw DomainError("edge index out of range");
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    const double tol = 1e-12 * ed.len;
    if (!std::isfinite(offset) || offset < -tol || offset > ed.len + tol)
        throw DomainError("offset outside edge");
    if (offset <= 0.0) return vertex_point(ed.u);
    if (offset >= ed.len) return vertex_point(ed.v);
    Point p;
    p.edge = e;
    p.offset = offset;
    return p;
}

void MetricGraph::validate(const Point& p) const {
    if (p.is_vertex()) {
        if (p.vertex >= num_vertices()) throw DomainError("vertex index out of range");
        return;
    }
    if (p.edge < 0 || p.edge >= num_edges()) throw DomainError("edge index out of range");
    const double len = edges_[static_cast<std::size_t>(p.edge)].len;
    if (!(p.offset > 0.0 && p.offset < len)) throw DomainError("interior point offset outside (0, len)");
}

double MetricGraph::distance(const Point& p, const Point& q) const {
    validate(p);
    validate(q);
    if (p == q) return 0.0;
    double best = kInf;
    for (const End& a : ends_of(*this, p))
        for (const End& b : ends_of(*this, q))
            best = std::min(best, a.cost + vertex_distance(a.vertex, b.vertex) + b.cost);
    if (!p.is_vertex() && !q.is_vertex() && p.edge == q.edge)
        best = std::min(best, std::abs(p.offset - q.offset));
    if (!std::isfinite(best)) throw InfiniteDistanceError("points lie in different components");
    return best;
}

MetricGraph::EdgeView MetricGraph::edge_view(const Point& p, int e) const {
    EdgeView ev;
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    for (const End& a : ends_of(*this, p)) {
        ev.to_u = std::min(ev.to_u, a.cost + vertex_distance(a.vertex, ed.u));
        ev.to_v = std::min(ev.to_v, a.cost + vertex_distance(a.vertex, ed.v));
    }
    if (!p.is_vertex() && p.edge == e) ev.on_edge = p.offset;
    return ev;
}

double MetricGraph::distance_on_edge(const EdgeView& ev, int e, double o) const {
    const double len = edges_[static_cast<std::size_t>(e)].len;
    double d = std::min(ev.to_u + o, ev.to_v + (len - o));
    if (ev.on_edge) d = std::min(d, std::abs(o - *ev.on_edge));
    return d;
}

std::vector<int> MetricGraph::vertex_route(int a, int b) const {
    std::vector<int> route;
    const std::size_t n = names_.size();
    int cur = b;
    while (cur != a) {
        const int eid = pred_edge_[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(cur)];
        if (eid < 0) throw InfiniteDistanceError("no route between vertices");
        route.push_back(eid);
        const Edge& e = edges_[static_cast<std::size_t>(eid)];
        cur = e.u == cur ? e.v : e.u;
    }
    std::reverse(route.begin(), route.end());
    return route;
}

Geodesic MetricGraph::geodesic(const Point& p, const Point& q) const {
    validate(p);
    validate(q);
    Geodesic g;
    g.start = p;
    g.end = q;
    if (p == q) return g;

    double best = kInf;
    std::optional<End> ba, bb;
    for (const End& a : ends_of(*this, p))
        for (const End& b : ends_of(*this, q)) {
            const double c = a.cost + vertex_distance(a.vertex, b.vertex) + b.cost;
            if (c < best) {
                best = c;
                ba = a;
                bb = b;
            }
        }
    if (!p.is_vertex() && !q.is_vertex() && p.edge == q.edge && std::abs(p.offset - q.offset) <= best) {
        g.legs.push_back({p.edge, p.offset, q.offset});
        g.length = std::abs(p.offset - q.offset);
        return g;
    }
    if (!std::isfinite(best)) throw InfiniteDistanceError("points lie in different components");

    if (!p.is_vertex()) g.legs.push_back({p.edge, p.offset, ba->offset});
    int cur = ba->vertex;
    for (int eid : vertex_route(ba->vertex, bb->vertex)) {
        const Edge& e = edges_[static_cast<std::size_t>(eid)];
        if (e.u == cur) {
            g.legs.push_back({eid, 0.0, e.len});
            cur = e.v;
        } else {
            g.legs.push_back({eid, e.len, 0.0});
            cur = e.u;
        }
    }
    if (!q.is_vertex()) g.legs.push_back({q.edge, bb->offset, q.offset});
    g.length = best;
    return g;
}

Point Geodesic::at(const MetricGraph& g, double s) const {
    if (legs.empty() || s <= 0.0) return start;
    if (s >= length) return end;
    double acc = 0.0;
    for (const Leg& leg : legs) {
        const double l = leg.length();
        if (s <= acc + l) {
            const double o = leg.from + (leg.to > leg.from ? 1.0 : -1.0) * (s - acc);
            return g.point(leg.edge, std::clamp(o, 0.0, g.edge(leg.edge).len));
        }
        acc += l;
    }
    return end;
}

std::vector<Point> MetricGraph::geodesic_path(const Point& p, const Point& q, double step) const {
    if (!(step > 0.0)) throw DomainError("step must be positive");
    const Geodesic geo = geodesic(p, q);
    std::vector<Point> out{p};
    for (const Leg& leg : geo.legs) {
        const int n = std::max(1, static_cast<int>(std::ceil(leg.length() / step - 1e-12)));
        for (int i = 1; i <= n; ++i) {
            const double o = i == n ? leg.to : leg.from + (leg.to - leg.from) * i / n;
            out.push_back(point(leg.edge, o));
        }
    }
    return out;
}

double spacetime_distance(const MetricGraph& g, const SpaceTimePoint& z1, const SpaceTimePoint& z2) {
    return std::max(g.distance(z1.x, z2.x), std::abs(z1.t - z2.t));
}

Mesh::Mesh(const MetricGraph& g, double h) : graph_(&g), h_(h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("mesh spacing must be positive");
    for (int v = 0; v < g.num_vertices(); ++v) points_.push_back(g.vertex_point(v));
    edge_nodes_.resize(static_cast<std::size_t>(g.num_edges()));
    edge_offsets_.resize(static_cast<std::size_t>(g.num_edges()));
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        const int n = std::max(1, static_cast<int>(std::ceil(ed.len / h - 1e-12)));
        auto& nodes = edge_nodes_[static_cast<std::size_t>(e)];
        auto& offs = edge_offsets_[static_cast<std::size_t>(e)];
        nodes.push_back(ed.u);
        offs.push_back(0.0);
        for (int i = 1; i < n; ++i) {
            const double o = ed.len * i / n;
            Point p;
            p.edge = e;
            p.offset = o;
            nodes.push_back(static_cast<int>(points_.size()));
            offs.push_back(o);
            points_.push_back(p);
        }
        nodes.push_back(ed.v);
        offs.push_back(ed.len);
    }
    adjacency_.resize(points_.size());
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& nodes = edge_nodes_[static_cast<std::size_t>(e)];
        const auto& offs = edge_offsets_[static_cast<std::size_t>(e)];
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            const double gap = offs[i + 1] - offs[i];
            adjacency_[static_cast<std::size_t>(nodes[i])].push_back({nodes[i + 1], gap});
            adjacency_[static_cast<std::size_t>(nodes[i + 1])].push_back({nodes[i], gap});
        }
    }
}

Mesh sample_mesh(const MetricGraph& g, double h) { return Mesh(g, h); }

std::optional<int> Mesh::node_of(const Point& p) const {
    if (p.is_vertex()) return p.vertex;
    const auto& offs = edge_offsets_.at(static_cast<std::size_t>(p.edge));
    auto it = std::lower_bound(offs.begin(), offs.end(), p.offset);
    if (it != offs.end() && *it == p.offset)
        return edge_nodes_[static_cast<std::size_t>(p.edge)][static_cast<std::size_t>(it - offs.begin())];
    return std::nullopt;
}

Interp Mesh::locate(const Point& p) const {
    if (p.is_vertex()) return {p.vertex, p.vertex, 0.0};
    const auto& offs = edge_offsets_.at(static_cast<std::size_t>(p.edge));
    const auto& nodes = edge_nodes_[static_cast<std::size_t>(p.edge)];
    auto it = std::upper_bound(offs.begin(), offs.end(), p.offset);
    std::size_t i = static_cast<std::size_t>(it - offs.begin());
    i = std::clamp<std::size_t>(i, 1, offs.size() - 1) - 1;
    const double w = (p.offset - offs[i]) / (offs[i + 1] - offs[i]);
    if (w <= 0.0) return {nodes[i], nodes[i], 0.0};
    if (w >= 1.0) return {nodes[i + 1], nodes[i + 1], 0.0};
    return {nodes[i], nodes[i + 1], w};
}

double Mesh::interpolate(const std::vector<double>& values, const Point& p) const {
    const Interp ip = locate(p);
    const double ua = values[static_cast<std::size_t>(ip.a)];
    if (ip.w == 0.0) return ua;
    return (1.0 - ip.w) * ua + ip.w * values[static_cast<std::size_t>(ip.b)];
}

std::vector<CellPiece> Mesh::reach(const Point& p, double r) const {
    std::vector<CellPiece> out;
    const MetricGraph& g = *graph_;
    std::vector<double> cuts;
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto ev = g.edge_view(p, e);
        const double len = g.edge(e).len;
        double dmin = std::min(ev.to_u, ev.to_v);
        if (ev.on_edge) dmin = 0.0;
        if (dmin > r) continue;

        const auto& offs = edge_offsets_[static_cast<std::size_t>(e)];
        const auto& nodes = edge_nodes_[static_cast<std::size_t>(e)];
        cuts.assign(offs.begin(), offs.end());
        auto add_cut = [&](double o) {
            if (o > 0.0 && o < len && std::isfinite(o)) cuts.push_back(o);
        };
        add_cut((ev.to_v + len - ev.to_u) / 2.0);
        if (ev.on_edge) {
            const double ox = *ev.on_edge;
            add_cut(ox);
            add_cut((ox - ev.to_u) / 2.0);
            add_cut((ev.to_v + len + ox) / 2.0);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        std::size_t cell = 0;
        double d0 = g.distance_on_edge(ev, e, cuts[0]);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double a = cuts[i], b = cuts[i + 1];
            const double d1 = g.distance_on_edge(ev, e, b);
            while (cell + 2 < offs.size() && offs[cell + 1] <= a) ++cell;
            const double da = d0;
            d0 = d1;
            if (da > r && d1 > r) continue;
            CellPiece pc;
            pc.edge = e;
            pc.cell = static_cast<int>(cell);
            pc.node_a = nodes[cell];
            pc.node_b = nodes[cell + 1];
            pc.cell_lo = offs[cell];
            pc.cell_hi = offs[cell + 1];
            pc.lo = a;
            pc.hi = b;
            pc.d_lo = da;
            pc.d_hi = d1;
            if (da > r) {
                pc.lo = a + (da - r) / (da - d1) * (b - a);
                pc.d_lo = r;
            } else if (d1 > r) {
                pc.hi = a + (r - da) / (d1 - da) * (b - a);
                pc.d_hi = r;
            }
            out.push_back(pc);
        }
    }
    return out;
}

std::uint64_t Mesh::hash() const {
    std::uint64_t hsh = 1469598103934665603ULL;
    auto mix = [&](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hsh ^= bytes[i];
            hsh *= 1099511628211ULL;
        }
    };
    mix(&h_, sizeof h_);
    const MetricGraph& g = *graph_;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        mix(&ed.u, sizeof ed.u);
        mix(&ed.v, sizeof ed.v);
        mix(&ed.len, sizeof ed.len);
    }
    for (const Point& p : points_) {
        mix(&p.vertex, sizeof p.vertex);
        mix(&p.edge, sizeof p.edge);
        mix(&p.offset, sizeof p.offset);
    }
    return hsh;
}

std::vector<BallEntry> ball(const MetricGraph& g, const Mesh& m, const Point& p, double r) {
    std::vector<BallEntry> out;
    for (int i = 0; i < m.size(); ++i) {
        const double d = g.distance(p, m.point(i));
        if (d <= r) out.push_back({i, d});
    }
    return out;
}

} // namespace mongehj
