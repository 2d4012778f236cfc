#include "mongehj/scalar_function.hpp"

#include <sstream>

namespace mongehj {

ScalarFunction ScalarFunction::constant(double c) {
    ScalarFunction f = from_callable([c](const Point&, double) { return c; }, false);
    f.constant_ = c;
    std::ostringstream os;
    os.precision(17);
    os << c;
    f.label_ = os.str();
    f.json_ = c;
    return f;
}

ScalarFunction ScalarFunction::from_expression(const std::string& src, std::shared_ptr<const MetricGraph> g) {
    Expression ex = Expression::parse(src);
    if (ex.is_constant()) {
        ScalarFunction f = constant(ex.eval({}));
        f.label_ = src;
        f.json_ = src;
        return f;
    }
    const bool td = ex.uses_t();
    ScalarFunction f = from_callable(
        [ex = std::move(ex), g = std::move(g)](const Point& x, double t) {
            return ex.eval({g.get(), x, t});
        },
        td, src);
    f.json_ = src;
    return f;
}

ScalarFunction ScalarFunction::from_callable(Fn fn, bool time_dependent, std::string label) {
    ScalarFunction f(constant_tag{});
    f.fn_ = std::move(fn);
    f.time_dependent_ = time_dependent;
    f.label_ = std::move(label);
    f.json_ = f.label_;
    return f;
}

ScalarFunction ScalarFunction::from_table(std::shared_ptr<const Mesh> mesh, std::vector<double> values) {
    if (static_cast<int>(values.size()) != mesh->size())
        throw DomainError("table size does not match mesh size");
    nlohmann::json j;
    j["table"] = values;
    j["h"] = mesh->spacing();
    ScalarFunction f = from_callable(
        [mesh, values = std::move(values)](const Point& x, double) { return mesh->interpolate(values, x); },
        false, "table");
    f.json_ = std::move(j);
    return f;
}

ScalarFunction ScalarFunction::from_json(const nlohmann::json& j, std::shared_ptr<const MetricGraph> g) {
    if (j.is_number()) return constant(j.get<double>());
    if (j.is_string()) return from_expression(j.get<std::string>(), std::move(g));
    if (j.is_object() && j.contains("table")) {
        if (!j.contains("h")) throw DomainError("table function needs \"h\"");
        auto owner = g;
        auto mesh = std::shared_ptr<const Mesh>(new Mesh(*g, j.at("h").get<double>()), [owner](const Mesh* m) { delete m; });
        return from_table(std::move(mesh), j.at("table").get<std::vector<double>>());
    }
    throw DomainError("function spec must be a number, an expression string or a table object");
}

nlohmann::json ScalarFunction::to_json() const { return json_; }

ScalarFunction ScalarFunction::shifted(double c) const {
    if (constant_) return constant(*constant_ + c);
    ScalarFunction f = from_callable([fn = fn_, c](const Point& x, double t) { return fn(x, t) + c; }, time_dependent_,
                                     "(" + label_ + ")+" + std::to_string(c));
    return f;
}

} // namespace mongehj
