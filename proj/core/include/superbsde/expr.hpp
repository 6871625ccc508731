#pragma once

#include <memory>
#include <string>

namespace superbsde {

// Small arithmetic expression over the variables t, x, y, z.
// Grammar: constants, + - * /, abs, pow, exp, sin, cos, min, max,
// unary minus and parentheses. Parsed once, evaluated many times.
class Expr {
public:
    Expr() = default;
    static Expr parse(const std::string& text);

    double eval(double t, double x, double y, double z) const;
    bool empty() const { return !root_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace superbsde
