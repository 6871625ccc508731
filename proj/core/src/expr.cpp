#include "superbsde/expr.hpp"
#include "superbsde/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace superbsde {

namespace {

enum class Op {
    Const, VarT, VarX, VarY, VarZ,
    Add, Sub, Mul, Div, Neg,
    Abs, Exp, Sin, Cos,
    Pow, Min, Max,
};

} // namespace

struct Expr::Node {
    Op op = Op::Const;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_const(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != s_.size())
            fail("trailing input");
        return e;
    }

private:
    const std::string& s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression parse error at offset " + std::to_string(pos_) +
                          ": " + what + " in '" + s_ + "'");
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+')) lhs = make(Op::Add, lhs, term());
            else if (eat('-')) lhs = make(Op::Sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make(Op::Mul, lhs, unary());
            else if (eat('/')) lhs = make(Op::Div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Op::Neg, unary());
        if (eat('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        if (eat('(')) {
            NodePtr e = expression();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        fail("unexpected character");
    }

    NodePtr number() {
        const char* start = s_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(start, &end);
        if (end == start) fail("malformed number");
        pos_ += static_cast<size_t>(end - start);
        return make_const(v);
    }

    NodePtr identifier() {
        size_t begin = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name = s_.substr(begin, pos_ - begin);
        if (name == "t") return make(Op::VarT);
        if (name == "x") return make(Op::VarX);
        if (name == "y") return make(Op::VarY);
        if (name == "z") return make(Op::VarZ);
        if (name == "pi") return make_const(M_PI);
        if (name == "abs") return call1(Op::Abs);
        if (name == "exp") return call1(Op::Exp);
        if (name == "sin") return call1(Op::Sin);
        if (name == "cos") return call1(Op::Cos);
        if (name == "pow") return call2(Op::Pow);
        if (name == "min") return call2(Op::Min);
        if (name == "max") return call2(Op::Max);
        fail("unknown identifier '" + name + "'");
    }

    NodePtr call1(Op op) {
        if (!eat('(')) fail("expected '('");
        NodePtr a = expression();
        if (!eat(')')) fail("expected ')'");
        return make(op, a);
    }

    NodePtr call2(Op op) {
        if (!eat('(')) fail("expected '('");
        NodePtr a = expression();
        if (!eat(',')) fail("expected ','");
        NodePtr b = expression();
        if (!eat(')')) fail("expected ')'");
        return make(op, a, b);
    }
};

double eval_node(const Expr::Node& n, double t, double x, double y, double z) {
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::VarT: return t;
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::VarZ: return z;
    case Op::Add: return eval_node(*n.a, t, x, y, z) + eval_node(*n.b, t, x, y, z);
    case Op::Sub: return eval_node(*n.a, t, x, y, z) - eval_node(*n.b, t, x, y, z);
    case Op::Mul: return eval_node(*n.a, t, x, y, z) * eval_node(*n.b, t, x, y, z);
    case Op::Div: return eval_node(*n.a, t, x, y, z) / eval_node(*n.b, t, x, y, z);
    case Op::Neg: return -eval_node(*n.a, t, x, y, z);
    case Op::Abs: return std::abs(eval_node(*n.a, t, x, y, z));
    case Op::Exp: return std::exp(eval_node(*n.a, t, x, y, z));
    case Op::Sin: return std::sin(eval_node(*n.a, t, x, y, z));
    case Op::Cos: return std::cos(eval_node(*n.a, t, x, y, z));
    case Op::Pow: return std::pow(eval_node(*n.a, t, x, y, z), eval_node(*n.b, t, x, y, z));
    case Op::Min: return std::min(eval_node(*n.a, t, x, y, z), eval_node(*n.b, t, x, y, z));
    case Op::Max: return std::max(eval_node(*n.a, t, x, y, z), eval_node(*n.b, t, x, y, z));
    }
    return 0.0; // unreachable
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.root_ = Parser(text).run();
    e.text_ = text;
    return e;
}

double Expr::eval(double t, double x, double y, double z) const {
    if (!root_)
        throw EvaluationError("empty expression evaluated");
    return eval_node(*root_, t, x, y, z);
}

} // namespace superbsde
