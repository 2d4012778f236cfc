#pragma once

#include <memory>
#include <string>

#include "mongehj/metric_graph.hpp"

namespace mongehj {

class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EvalContext {
    const MetricGraph* graph = nullptr;
    Point point;
    double t = 0.0;
};

// Small arithmetic language over x (edge offset), e (edge id) and t.
//   numbers, + - * / ^, unary minus, comparisons (< <= > >= == !=),
//   min max abs exp log sqrt sin cos pow if(c,a,b) dist("vertex")
class Expression {
public:
    struct Node;

    static Expression parse(const std::string& src);

    double eval(const EvalContext& ctx) const;
    const std::string& source() const { return src_; }
    bool uses_t() const { return uses_t_; }
    bool uses_space() const { return uses_space_; }
    bool is_constant() const { return !uses_t_ && !uses_space_; }

private:
    std::string src_;
    std::shared_ptr<const Node> root_;
    bool uses_t_ = false;
    bool uses_space_ = false;
};

} // namespace mongehj
