#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mongehj/expression.hpp"
#include "mongehj/metric_graph.hpp"

namespace mongehj {

// A real function of (x, t) on a graph. Built from an expression, a constant,
// a mesh table (linear interpolation along edges) or an arbitrary callable.
class ScalarFunction {
public:
    using Fn = std::function<double(const Point&, double)>;

    ScalarFunction()
        : fn_([](const Point&, double) { return 0.0; }), constant_(0.0), label_("0"), json_(0.0) {}

    static ScalarFunction constant(double c);
    static ScalarFunction from_expression(const std::string& src, std::shared_ptr<const MetricGraph> g);
    static ScalarFunction from_callable(Fn fn, bool time_dependent, std::string label = "callable");
    static ScalarFunction from_table(std::shared_ptr<const Mesh> mesh, std::vector<double> values);
    // Accepts a number, an expression string, or {"table": [...], "h": spacing}.
    static ScalarFunction from_json(const nlohmann::json& j, std::shared_ptr<const MetricGraph> g);

    double operator()(const Point& x, double t = 0.0) const { return fn_(x, t); }

    bool is_constant() const { return constant_.has_value(); }
    double constant_value() const { return constant_.value_or(0.0); }
    bool time_dependent() const { return time_dependent_; }
    const std::string& label() const { return label_; }
    nlohmann::json to_json() const;

    ScalarFunction shifted(double c) const;

private:
    struct constant_tag {};
    explicit ScalarFunction(constant_tag) {}

    Fn fn_;
    std::optional<double> constant_;
    bool time_dependent_ = false;
    std::string label_;
    nlohmann::json json_;
};

} // namespace mongehj
