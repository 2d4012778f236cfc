#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace mongehj {

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InfiniteDistanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// A location on the graph. Vertex points keep a reference edge (the first
// incident one) so that edge-offset coordinates are always available.
struct Point {
    int vertex = -1;
    int edge = -1;
    double offset = 0.0;

    bool is_vertex() const { return vertex >= 0; }
    friend bool operator==(const Point& a, const Point& b) {
        if (a.is_vertex() || b.is_vertex()) return a.vertex == b.vertex;
        return a.edge == b.edge && a.offset == b.offset;
    }
};

struct Edge {
    int u = 0;
    int v = 0;
    double len = 1.0;
};

struct EdgeSpec {
    std::string u;
    std::string v;
    double len = 1.0;
};

// A stretch of a single edge traversed between two offsets.
struct Leg {
    int edge = -1;
    double from = 0.0;
    double to = 0.0;
    double length() const { return from < to ? to - from : from - to; }
};

class MetricGraph;

// A shortest path realized as consecutive legs; at(s) walks arc length s.
struct Geodesic {
    Point start;
    Point end;
    std::vector<Leg> legs;
    double length = 0.0;

    Point at(const MetricGraph& g, double s) const;
};

class MetricGraph {
public:
    MetricGraph(std::vector<std::string> vertex_names, const std::vector<EdgeSpec>& edges);

    static MetricGraph from_json(const nlohmann::json& j);
    static MetricGraph segment(double len = 1.0);
    static MetricGraph star(const std::vector<double>& lens);

    nlohmann::json to_json() const;

    int num_vertices() const { return static_cast<int>(names_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
    const std::string& vertex_name(int v) const { return names_.at(static_cast<std::size_t>(v)); }
    int vertex_index(const std::string& name) const;
    const std::vector<int>& incident(int v) const { return incident_.at(static_cast<std::size_t>(v)); }
    bool connected() const { return components_ == 1; }
    double total_length() const;

    Point vertex_point(int v) const;
    Point point(int e, double offset) const;
    void validate(const Point& p) const;

    // Vertex-to-vertex distance; kInf across components.
    double vertex_distance(int a, int b) const {
        return dist_[static_cast<std::size_t>(a) * names_.size() + static_cast<std::size_t>(b)];
    }

    double distance(const Point& p, const Point& q) const;
    Geodesic geodesic(const Point& p, const Point& q) const;
    std::vector<Point> geodesic_path(const Point& p, const Point& q, double step) const;

    // Distance from p to the vertices u and v of edge e (kInf when unreachable),
    // and the offset of p on e if p lies on e.
    struct EdgeView {
        double to_u = kInf;
        double to_v = kInf;
        std::optional<double> on_edge;
    };
    EdgeView edge_view(const Point& p, int e) const;

    // Distance from p to the point at offset o on edge e, given its EdgeView.
    double distance_on_edge(const EdgeView& ev, int e, double o) const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> incident_;
    std::vector<double> dist_;
    std::vector<int> pred_edge_;
    int components_ = 0;

    std::vector<int> vertex_route(int a, int b) const;
};

struct SpaceTimePoint {
    Point x;
    double t = 0.0;
};

double spacetime_distance(const MetricGraph& g, const SpaceTimePoint& z1, const SpaceTimePoint& z2);

// A linear piece of the distance profile from a fixed point, restricted to one
// mesh cell: on offsets [lo, hi] of the edge, d(o) = d_lo + slope * (o - lo).
struct CellPiece {
    int edge = -1;
    int cell = -1;   // index of the cell along the edge
    int node_a = -1; // mesh node at the lower offset of the cell
    int node_b = -1;
    double cell_lo = 0.0;
    double cell_hi = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double d_lo = 0.0;
    double d_hi = 0.0;
};

struct Interp {
    int a = -1;
    int b = -1;
    double w = 0.0; // value = (1-w) * u[a] + w * u[b]
};

struct MeshNeighbor {
    int node = -1;
    double gap = 0.0;
};

class Mesh {
public:
    Mesh(const MetricGraph& g, double h);

    const MetricGraph& graph() const { return *graph_; }
    double spacing() const { return h_; }
    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<Point>& points() const { return points_; }
    const Point& point(int i) const { return points_.at(static_cast<std::size_t>(i)); }
    const std::vector<int>& edge_nodes(int e) const { return edge_nodes_.at(static_cast<std::size_t>(e)); }
    const std::vector<double>& edge_offsets(int e) const { return edge_offsets_.at(static_cast<std::size_t>(e)); }
    const std::vector<MeshNeighbor>& neighbors(int i) const { return adjacency_.at(static_cast<std::size_t>(i)); }

    std::optional<int> node_of(const Point& p) const;
    Interp locate(const Point& p) const;
    double interpolate(const std::vector<double>& values, const Point& p) const;

    // Cell pieces of the continuum ball {y : d(p, y) <= r}.
    std::vector<CellPiece> reach(const Point& p, double r) const;

    std::uint64_t hash() const;

private:
    const MetricGraph* graph_;
    double h_;
    std::vector<Point> points_;
    std::vector<std::vector<int>> edge_nodes_;
    std::vector<std::vector<double>> edge_offsets_;
    std::vector<std::vector<MeshNeighbor>> adjacency_;
};

Mesh sample_mesh(const MetricGraph& g, double h);

struct BallEntry {
    int node = -1;
    double distance = 0.0;
};

std::vector<BallEntry> ball(const MetricGraph& g, const Mesh& m, const Point& p, double r);

} // namespace mongehj
