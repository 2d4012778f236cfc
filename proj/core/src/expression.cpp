#include "mongehj/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace mongehj {

struct Expression::Node {
    enum Kind { Num, VarX, VarT, VarE, Neg, Bin, Call, Dist } kind = Num;
    double value = 0.0;
    std::string op;
    std::string name;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodeP = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    bool uses_t = false;
    bool uses_space = false;

    NodeP parse_all() {
        NodeP n = comparison();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " at position " + std::to_string(pos_) + " in '" + s_ + "'");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(const std::string& tok) {
        skip();
        if (s_.compare(pos_, tok.size(), tok) == 0) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }
    static NodeP bin(const std::string& op, NodeP a, NodeP b) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Bin;
        n->op = op;
        n->args = {std::move(a), std::move(b)};
        return n;
    }

    NodeP comparison() {
        NodeP lhs = additive();
        for (const char* op : {"<=", ">=", "==", "!=", "<", ">"}) {
            if (eat(op)) return bin(op, lhs, additive());
        }
        return lhs;
    }
    NodeP additive() {
        NodeP n = multiplicative();
        for (;;) {
            if (eat("+")) n = bin("+", n, multiplicative());
            else if (eat("-")) n = bin("-", n, multiplicative());
            else return n;
        }
    }
    NodeP multiplicative() {
        NodeP n = unary();
        for (;;) {
            if (eat("*")) n = bin("*", n, unary());
            else if (eat("/")) n = bin("/", n, unary());
            else return n;
        }
    }
    NodeP unary() {
        if (eat("-")) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Neg;
            n->args = {unary()};
            return n;
        }
        if (eat("+")) return unary();
        return power();
    }
    NodeP power() {
        NodeP base = primary();
        if (eat("^")) return bin("^", base, unary());
        return base;
    }
    NodeP primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodeP n = comparison();
            if (!eat(")")) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Node>();
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            skip();
            if (pos_ < s_.size() && s_[pos_] == '(') return call(id);
            auto n = std::make_shared<Node>();
            if (id == "x") {
                n->kind = Node::VarX;
                uses_space = true;
            } else if (id == "t") {
                n->kind = Node::VarT;
                uses_t = true;
            } else if (id == "e") {
                n->kind = Node::VarE;
                uses_space = true;
            } else if (id == "pi") {
                n->value = M_PI;
            } else {
                fail("unknown identifier '" + id + "'");
            }
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
    NodeP call(const std::string& id) {
        eat("(");
        auto n = std::make_shared<Node>();
        n->name = id;
        if (id == "dist") {
            skip();
            if (pos_ >= s_.size() || s_[pos_] != '"') fail("dist expects a quoted vertex name");
            const std::size_t close = s_.find('"', pos_ + 1);
            if (close == std::string::npos) fail("unterminated string");
            n->kind = Node::Dist;
            n->op = s_.substr(pos_ + 1, close - pos_ - 1);
            pos_ = close + 1;
            if (!eat(")")) fail("expected ')'");
            uses_space = true;
            return n;
        }
        n->kind = Node::Call;
        std::vector<NodeP> args;
        if (!eat(")")) {
            do {
                args.push_back(comparison());
            } while (eat(","));
            if (!eat(")")) fail("expected ')'");
        }
        struct Arity {
            const char* name;
            std::size_t lo, hi;
        };
        static const Arity table[] = {{"min", 1, 64}, {"max", 1, 64}, {"abs", 1, 1},  {"exp", 1, 1},
                                      {"log", 1, 1},  {"sqrt", 1, 1}, {"sin", 1, 1},  {"cos", 1, 1},
                                      {"pow", 2, 2},  {"if", 3, 3}};
        bool known = false;
        for (const auto& a : table) {
            if (id == a.name) {
                known = true;
                if (args.size() < a.lo || args.size() > a.hi) fail("wrong argument count for " + id);
            }
        }
        if (!known) fail("unknown function '" + id + "'");
        n->args = std::move(args);
        return n;
    }
};

double eval_node(const Node& n, const EvalContext& ctx) {
    switch (n.kind) {
    case Node::Num:
        return n.value;
    case Node::VarX:
        return ctx.point.offset;
    case Node::VarT:
        return ctx.t;
    case Node::VarE:
        return static_cast<double>(ctx.point.edge);
    case Node::Neg:
        return -eval_node(*n.args[0], ctx);
    case Node::Dist: {
        if (!ctx.graph) throw DomainError("dist() needs a graph");
        const int v = ctx.graph->vertex_index(n.op);
        return ctx.graph->distance(ctx.point, ctx.graph->vertex_point(v));
    }
    case Node::Bin: {
        const double a = eval_node(*n.args[0], ctx);
        const double b = eval_node(*n.args[1], ctx);
        const std::string& op = n.op;
        if (op == "+") return a + b;
        if (op == "-") return a - b;
        if (op == "*") return a * b;
        if (op == "/") return a / b;
        if (op == "^") return std::pow(a, b);
        if (op == "<") return a < b;
        if (op == "<=") return a <= b;
        if (op == ">") return a > b;
        if (op == ">=") return a >= b;
        if (op == "==") return a == b;
        return a != b;
    }
    case Node::Call: {
        const std::string& f = n.name;
        if (f == "if") return eval_node(*n.args[0], ctx) != 0.0 ? eval_node(*n.args[1], ctx) : eval_node(*n.args[2], ctx);
        std::vector<double> v;
        v.reserve(n.args.size());
        for (const auto& a : n.args) v.push_back(eval_node(*a, ctx));
        if (f == "min") {
            double r = v[0];
            for (double x : v) r = std::min(r, x);
            return r;
        }
        if (f == "max") {
            double r = v[0];
            for (double x : v) r = std::max(r, x);
            return r;
        }
        if (f == "abs") return std::abs(v[0]);
        if (f == "exp") return std::exp(v[0]);
        if (f == "log") return std::log(v[0]);
        if (f == "sqrt") return std::sqrt(v[0]);
        if (f == "sin") return std::sin(v[0]);
        if (f == "cos") return std::cos(v[0]);
        return std::pow(v[0], v[1]);
    }
    }
    return 0.0;
}

} // namespace

Expression Expression::parse(const std::string& src) {
    Parser p(src);
    Expression e;
    e.src_ = src;
    e.root_ = p.parse_all();
    e.uses_t_ = p.uses_t;
    e.uses_space_ = p.uses_space;
    return e;
}

double Expression::eval(const EvalContext& ctx) const { return eval_node(*root_, ctx); }

} // namespace mongehj
