#pragma once

// Rational expressions as hash-consed straight-line programs.
//
// Every expression is a topologically ordered sequence of nodes; operands of
// a node always refer to strictly earlier nodes. Node kinds are constants,
// variables and the four field operations. Integer powers are expanded by
// binary powering while the DAG is built, so the evaluation and reverse-mode
// rules only ever see + - * /.

#include "nondim/rational.hpp"

#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace nondim {

using NodeId = std::uint32_t;
using Assignment = std::map<std::string, Rational>;
using SymbolTable = std::set<std::string>;

enum class Op : std::uint8_t { constant, variable, add, sub, mul, div };

struct Node {
    Op op = Op::constant;
    NodeId lhs = 0;
    NodeId rhs = 0;
    Rational value;     // Op::constant
    std::string symbol; // Op::variable

    bool is_arithmetic() const { return op != Op::constant && op != Op::variable; }
};

/// Raised when a division by zero is met during evaluation. It is a
/// recoverable signal: point samplers catch it and draw again.
class PoleError : public std::domain_error {
  public:
    explicit PoleError(NodeId node, const std::string &what = "division by zero")
        : std::domain_error(what + " at node " + std::to_string(node)), node_(node) {}
    NodeId node() const { return node_; }

  private:
    NodeId node_;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &message, int line, int column)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          message_(message), line_(line), column_(column) {}
    const std::string &message() const { return message_; }
    int line() const { return line_; }
    int column() const { return column_; }

  private:
    std::string message_;
    int line_;
    int column_;
};

class DagBuilder;

/// Immutable expression DAG. Copies share the node storage.
class ExprDag {
  public:
    ExprDag() : ExprDag(zero_nodes(), 0) {}

    NodeId root() const { return root_; }
    const std::vector<Node> &nodes() const { return *nodes_; }
    const Node &node(NodeId i) const { return (*nodes_)[i]; }
    std::size_t size() const { return nodes_->size(); }

    /// Number of arithmetic operations (the straight-line program length).
    std::size_t length() const {
        std::size_t n = 0;
        for (const auto &nd : *nodes_)
            n += nd.is_arithmetic();
        return n;
    }

    SymbolTable variables() const {
        SymbolTable vars;
        for (const auto &nd : *nodes_)
            if (nd.op == Op::variable)
                vars.insert(nd.symbol);
        return vars;
    }

    std::optional<Rational> constant_value() const {
        const Node &r = node(root_);
        if (r.op == Op::constant)
            return r.value;
        return std::nullopt;
    }

    bool structurally_equal(const ExprDag &other) const {
        if (size() != other.size() || root_ != other.root_)
            return false;
        for (std::size_t i = 0; i < size(); ++i) {
            const Node &a = (*nodes_)[i];
            const Node &b = other.nodes()[i];
            if (a.op != b.op || a.lhs != b.lhs || a.rhs != b.rhs || a.value != b.value ||
                a.symbol != b.symbol)
                return false;
        }
        return true;
    }

  private:
    friend class DagBuilder;
    ExprDag(std::shared_ptr<const std::vector<Node>> nodes, NodeId root)
        : nodes_(std::move(nodes)), root_(root) {}

    static std::shared_ptr<const std::vector<Node>> zero_nodes() {
        static const auto zero = std::make_shared<const std::vector<Node>>(1, Node{});
        return zero;
    }

    std::shared_ptr<const std::vector<Node>> nodes_;
    NodeId root_;
};

/// Single-owner DAG construction with hash-consing and light constant folding.
class DagBuilder {
  public:
    NodeId constant(const Rational &value) {
        Node n;
        n.op = Op::constant;
        n.value = value;
        return intern(std::move(n), value.get_str());
    }

    NodeId variable(const std::string &symbol) {
        Node n;
        n.op = Op::variable;
        n.symbol = symbol;
        return intern(std::move(n), symbol);
    }

    NodeId add(NodeId a, NodeId b) {
        if (auto r = fold(Op::add, a, b))
            return *r;
        if (is_const(a, 0))
            return b;
        if (is_const(b, 0))
            return a;
        return binary(Op::add, std::min(a, b), std::max(a, b));
    }

    NodeId sub(NodeId a, NodeId b) {
        if (auto r = fold(Op::sub, a, b))
            return *r;
        if (is_const(b, 0))
            return a;
        return binary(Op::sub, a, b);
    }

    NodeId mul(NodeId a, NodeId b) {
        if (auto r = fold(Op::mul, a, b))
            return *r;
        if (is_const(a, 0) || is_const(b, 0))
            return constant(0);
        if (is_const(a, 1))
            return b;
        if (is_const(b, 1))
            return a;
        return binary(Op::mul, std::min(a, b), std::max(a, b));
    }

    NodeId div(NodeId a, NodeId b) {
        if (auto r = fold(Op::div, a, b))
            return *r;
        if (is_const(b, 1))
            return a;
        return binary(Op::div, a, b);
    }

    NodeId neg(NodeId a) { return sub(constant(0), a); }

    /// Binary powering: (x+1)^5 becomes e2 = e1*e1, e3 = e2*e2, e = e3*e1.
    NodeId pow(NodeId base, long exponent) {
        if (exponent == 0)
            return constant(1);
        if (exponent < 0)
            return div(constant(1), pow(base, -exponent));
        int top = 62;
        while (((exponent >> top) & 1L) == 0)
            --top;
        NodeId acc = base;
        for (int bit = top - 1; bit >= 0; --bit) {
            acc = mul(acc, acc);
            if ((exponent >> bit) & 1L)
                acc = mul(acc, base);
        }
        return acc;
    }

    /// Copies `dag` into this builder, replacing variables found in `images`.
    NodeId import(const ExprDag &dag, const std::map<std::string, NodeId> &images = {}) {
        return import_with(dag, [&](const std::string &symbol) {
            auto it = images.find(symbol);
            return it != images.end() ? it->second : variable(symbol);
        });
    }

    /// Imports `dag`, asking `resolve` for the node of each variable when it
    /// is first reached, so node order follows `dag`.
    template <class Resolve>
    NodeId import_with(const ExprDag &dag, Resolve &&resolve) {
        std::vector<NodeId> map(dag.size());
        for (std::size_t i = 0; i < dag.size(); ++i) {
            const Node &n = dag.node(static_cast<NodeId>(i));
            switch (n.op) {
            case Op::constant:
                map[i] = constant(n.value);
                break;
            case Op::variable:
                map[i] = resolve(n.symbol);
                break;
            case Op::add:
                map[i] = add(map[n.lhs], map[n.rhs]);
                break;
            case Op::sub:
                map[i] = sub(map[n.lhs], map[n.rhs]);
                break;
            case Op::mul:
                map[i] = mul(map[n.lhs], map[n.rhs]);
                break;
            case Op::div:
                map[i] = div(map[n.lhs], map[n.rhs]);
                break;
            }
        }
        return map[dag.root()];
    }

    const Node &node(NodeId i) const { return nodes_[i]; }
    std::size_t size() const { return nodes_.size(); }

    /// Extracts the sub-DAG reachable from `root`, renumbered compactly.
    ExprDag finish(NodeId root) const {
        if (root >= nodes_.size())
            throw std::out_of_range("DagBuilder::finish: bad root");
        std::vector<bool> live(root + 1, false);
        live[root] = true;
        for (NodeId i = root + 1; i-- > 0;) {
            if (!live[i] || !nodes_[i].is_arithmetic())
                continue;
            live[nodes_[i].lhs] = true;
            live[nodes_[i].rhs] = true;
        }
        auto out = std::make_shared<std::vector<Node>>();
        std::vector<NodeId> renumber(root + 1, 0);
        for (NodeId i = 0; i <= root; ++i) {
            if (!live[i])
                continue;
            Node n = nodes_[i];
            if (n.is_arithmetic()) {
                n.lhs = renumber[n.lhs];
                n.rhs = renumber[n.rhs];
            }
            renumber[i] = static_cast<NodeId>(out->size());
            out->push_back(std::move(n));
        }
        return ExprDag(std::move(out), renumber[root]);
    }

  private:
    using Key = std::tuple<Op, NodeId, NodeId, std::string>;

    bool is_const(NodeId i, long v) const {
        return nodes_[i].op == Op::constant && nodes_[i].value == v;
    }

    std::optional<NodeId> fold(Op op, NodeId a, NodeId b) {
        const Node &x = nodes_[a];
        const Node &y = nodes_[b];
        if (x.op != Op::constant || y.op != Op::constant)
            return std::nullopt;
        switch (op) {
        case Op::add:
            return constant(x.value + y.value);
        case Op::sub:
            return constant(x.value - y.value);
        case Op::mul:
            return constant(x.value * y.value);
        case Op::div:
            // 1/0 stays a node so that evaluation reports the pole.
            if (y.value == 0)
                return std::nullopt;
            return constant(x.value / y.value);
        default:
            return std::nullopt;
        }
    }

    NodeId binary(Op op, NodeId a, NodeId b) {
        Node n;
        n.op = op;
        n.lhs = a;
        n.rhs = b;
        return intern(std::move(n), {});
    }

    NodeId intern(Node n, std::string text) {
        Key key{n.op, n.lhs, n.rhs, std::move(text)};
        auto it = index_.find(key);
        if (it != index_.end())
            return it->second;
        auto id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back(std::move(n));
        index_.emplace(std::move(key), id);
        return id;
    }

    std::vector<Node> nodes_;
    std::map<Key, NodeId> index_;
};

inline ExprDag make_constant(const Rational &value) {
    DagBuilder b;
    return b.finish(b.constant(value));
}

inline ExprDag make_variable(const std::string &symbol) {
    DagBuilder b;
    return b.finish(b.variable(symbol));
}

inline bool is_zero_divisor(const Rational &r) { return r == 0; }

/// Straight-line interpretation over any field-like value type T. `lift`
/// turns constant nodes into T.
template <class T, class Lift>
T evaluate(const ExprDag &dag, const std::map<std::string, T> &point, Lift &&lift) {
    std::vector<T> v;
    v.reserve(dag.size());
    for (std::size_t i = 0; i < dag.size(); ++i) {
        const Node &n = dag.node(static_cast<NodeId>(i));
        switch (n.op) {
        case Op::constant:
            v.push_back(lift(n.value));
            break;
        case Op::variable: {
            auto it = point.find(n.symbol);
            if (it == point.end())
                throw std::out_of_range("unbound symbol '" + n.symbol + "'");
            v.push_back(it->second);
            break;
        }
        case Op::add:
            v.push_back(v[n.lhs] + v[n.rhs]);
            break;
        case Op::sub:
            v.push_back(v[n.lhs] - v[n.rhs]);
            break;
        case Op::mul:
            v.push_back(v[n.lhs] * v[n.rhs]);
            break;
        case Op::div:
            if (is_zero_divisor(v[n.rhs]))
                throw PoleError(static_cast<NodeId>(i));
            v.push_back(v[n.lhs] / v[n.rhs]);
            break;
        }
    }
    return v[dag.root()];
}

inline Rational evaluate(const ExprDag &dag, const Assignment &point) {
    return evaluate<Rational>(dag, point, [](const Rational &c) { return c; });
}

template <class T>
struct Gradient {
    T value;
    std::map<std::string, T> partials; // one entry per bound symbol
    std::size_t operations = 0;        // field operations performed
};

/// Value and gradient by the reverse-mode transformation of the program.
/// The forward sweep costs one operation per node and the adjoint sweep at
/// most four, so `operations` never exceeds 5 * length().
template <class T, class Lift>
Gradient<T> gradient(const ExprDag &dag, const std::map<std::string, T> &point, Lift &&lift) {
    const std::size_t size = dag.size();
    std::size_t ops = 0;
    std::vector<T> v;
    v.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        const Node &n = dag.node(static_cast<NodeId>(i));
        switch (n.op) {
        case Op::constant:
            v.push_back(lift(n.value));
            break;
        case Op::variable: {
            auto it = point.find(n.symbol);
            if (it == point.end())
                throw std::out_of_range("unbound symbol '" + n.symbol + "'");
            v.push_back(it->second);
            break;
        }
        case Op::add:
            v.push_back(v[n.lhs] + v[n.rhs]);
            ++ops;
            break;
        case Op::sub:
            v.push_back(v[n.lhs] - v[n.rhs]);
            ++ops;
            break;
        case Op::mul:
            v.push_back(v[n.lhs] * v[n.rhs]);
            ++ops;
            break;
        case Op::div:
            if (is_zero_divisor(v[n.rhs]))
                throw PoleError(static_cast<NodeId>(i));
            v.push_back(v[n.lhs] / v[n.rhs]);
            ++ops;
            break;
        }
    }

    std::vector<std::optional<T>> adj(size);
    adj[dag.root()] = lift(Rational(1));
    auto passive = [&](NodeId j) { return dag.node(j).op == Op::constant; };
    auto accumulate = [&](NodeId j, T x) {
        if (passive(j))
            return;
        if (adj[j]) {
            *adj[j] += x;
            ++ops;
        } else {
            adj[j] = std::move(x);
        }
    };
    auto accumulate_neg = [&](NodeId j, const T &x) {
        if (passive(j))
            return;
        if (adj[j])
            *adj[j] -= x;
        else
            adj[j] = lift(Rational(0)) - x;
        ++ops;
    };

    for (std::size_t k = size; k-- > 0;) {
        const Node &n = dag.node(static_cast<NodeId>(k));
        if (!n.is_arithmetic() || !adj[k])
            continue;
        const T a = *adj[k];
        switch (n.op) {
        case Op::add:
            accumulate(n.lhs, a);
            accumulate(n.rhs, a);
            break;
        case Op::sub:
            accumulate(n.lhs, a);
            accumulate_neg(n.rhs, a);
            break;
        case Op::mul:
            if (n.lhs == n.rhs) {
                if (passive(n.lhs))
                    break;
                T x = a * v[n.lhs];
                T twice = x + x;
                ops += 2;
                accumulate(n.lhs, std::move(twice));
            } else {
                if (!passive(n.lhs)) {
                    T x = a * v[n.rhs];
                    ++ops;
                    accumulate(n.lhs, std::move(x));
                }
                if (!passive(n.rhs)) {
                    T x = a * v[n.lhs];
                    ++ops;
                    accumulate(n.rhs, std::move(x));
                }
            }
            break;
        case Op::div: {
            T q = a / v[n.rhs];
            ++ops;
            if (!passive(n.rhs)) {
                T x = q * v[k];
                ++ops;
                accumulate_neg(n.rhs, x);
            }
            accumulate(n.lhs, std::move(q));
            break;
        }
        default:
            break;
        }
    }

    Gradient<T> g{v[dag.root()], {}, ops};
    std::map<std::string, NodeId> var_nodes;
    for (std::size_t i = 0; i < size; ++i)
        if (dag.node(static_cast<NodeId>(i)).op == Op::variable)
            var_nodes.emplace(dag.node(static_cast<NodeId>(i)).symbol, static_cast<NodeId>(i));
    for (const auto &[symbol, value] : point) {
        auto it = var_nodes.find(symbol);
        if (it != var_nodes.end() && adj[it->second])
            g.partials.emplace(symbol, *adj[it->second]);
        else
            g.partials.emplace(symbol, lift(Rational(0)));
    }
    return g;
}

inline Gradient<Rational> gradient(const ExprDag &dag, const Assignment &point) {
    return gradient<Rational>(dag, point, [](const Rational &c) { return c; });
}

/// Replaces each mapped variable by its image; unmapped variables stay.
inline ExprDag substitute(const ExprDag &dag, const std::map<std::string, ExprDag> &images) {
    DagBuilder b;
    std::map<std::string, NodeId> roots;
    NodeId root = b.import_with(dag, [&](const std::string &symbol) {
        auto it = images.find(symbol);
        if (it == images.end())
            return b.variable(symbol);
        auto done = roots.find(symbol);
        if (done == roots.end())
            done = roots.emplace(symbol, b.import(it->second)).first;
        return done->second;
    });
    return b.finish(root);
}

// ---------------------------------------------------------------------------
// Text front end.

namespace detail {

class ExprParser {
  public:
    ExprParser(const std::string &text, const SymbolTable &symbols, int line, int column)
        : text_(text), symbols_(symbols), line_(line), column_(column) {}

    ExprDag parse() {
        skip_space();
        NodeId root = expr();
        skip_space();
        if (pos_ < text_.size())
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return builder_.finish(root);
    }

  private:
    NodeId expr() {
        NodeId acc = term();
        for (;;) {
            skip_space();
            if (accept('+'))
                acc = builder_.add(acc, term());
            else if (accept('-'))
                acc = builder_.sub(acc, term());
            else
                return acc;
        }
    }

    NodeId term() {
        NodeId acc = factor();
        for (;;) {
            skip_space();
            if (accept('*'))
                acc = builder_.mul(acc, factor());
            else if (accept('/'))
                acc = builder_.div(acc, factor());
            else
                return acc;
        }
    }

    NodeId factor() {
        skip_space();
        if (accept('-'))
            return builder_.neg(factor());
        NodeId base = atom();
        skip_space();
        if (!accept('^'))
            return base;
        skip_space();
        int line = line_, column = column_;
        bool negative = accept('-');
        skip_space();
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw ParseError("non-integer exponent", line, column);
        std::string digits = read_digits();
        if (pos_ < text_.size() && text_[pos_] == '.')
            throw ParseError("non-integer exponent", line, column);
        if (digits.size() > 9)
            throw ParseError("exponent too large", line, column);
        long e = std::stol(digits);
        return builder_.pow(base, negative ? -e : e);
    }

    NodeId atom() {
        skip_space();
        if (pos_ >= text_.size())
            fail("unexpected end of expression");
        char c = text_[pos_];
        if (c == '(') {
            advance();
            NodeId inner = expr();
            skip_space();
            if (!accept(')'))
                fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits = read_digits();
            if (pos_ < text_.size() && text_[pos_] == '.')
                fail("decimal literals are not supported; write a fraction");
            return builder_.constant(parse_rational(digits));
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            int line = line_, column = column_;
            std::string id;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                           text_[pos_] == '_')) {
                id.push_back(text_[pos_]);
                advance();
            }
            if (!symbols_.contains(id))
                throw ParseError("undeclared identifier '" + id + "'", line, column);
            return builder_.variable(id);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string read_digits() {
        std::string digits;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            digits.push_back(text_[pos_]);
            advance();
        }
        return digits;
    }

    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            advance();
            return true;
        }
        return false;
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            advance();
    }

    [[noreturn]] void fail(const std::string &message) { throw ParseError(message, line_, column_); }

    const std::string &text_;
    const SymbolTable &symbols_;
    DagBuilder builder_;
    std::size_t pos_ = 0;
    int line_;
    int column_;
};

} // namespace detail

/// Parses the expression grammar (+ - * / unary minus, ^ with an integer
/// literal exponent). `line`/`column` give the position of the first
/// character for error reporting.
inline ExprDag parse_expr(const std::string &text, const SymbolTable &symbols, int line = 1,
                          int column = 1) {
    return detail::ExprParser(text, symbols, line, column).parse();
}

namespace detail {

enum Precedence { prec_sum = 1, prec_product = 2, prec_unary = 3, prec_atom = 4 };

struct Rendered {
    std::string text;
    int prec;
};

inline std::string wrap(const Rendered &r, int min_prec) {
    return r.prec < min_prec ? "(" + r.text + ")" : r.text;
}

} // namespace detail

/// Renders a DAG as text accepted by parse_expr. Shared nodes are expanded.
inline std::string render(const ExprDag &dag) {
    using namespace detail;
    std::vector<Rendered> out(dag.size());
    for (std::size_t i = 0; i < dag.size(); ++i) {
        const Node &n = dag.node(static_cast<NodeId>(i));
        switch (n.op) {
        case Op::constant: {
            if (n.value < 0)
                out[i] = {n.value.get_str(), is_integer(n.value) ? prec_unary : prec_sum};
            else
                out[i] = {n.value.get_str(), is_integer(n.value) ? prec_atom : prec_product};
            break;
        }
        case Op::variable:
            out[i] = {n.symbol, prec_atom};
            break;
        case Op::add:
            out[i] = {out[n.lhs].text + " + " + wrap(out[n.rhs], prec_sum + 1), prec_sum};
            break;
        case Op::sub: {
            const Node &l = dag.node(n.lhs);
            if (l.op == Op::constant && l.value == 0)
                out[i] = {"-" + wrap(out[n.rhs], prec_unary), prec_unary};
            else
                out[i] = {wrap(out[n.lhs], prec_sum) + " - " + wrap(out[n.rhs], prec_sum + 1),
                          prec_sum};
            break;
        }
        case Op::mul:
            if (n.lhs == n.rhs)
                out[i] = {wrap(out[n.lhs], prec_atom) + "^2", prec_unary};
            else
                out[i] = {wrap(out[n.lhs], prec_product) + "*" + wrap(out[n.rhs], prec_product + 1),
                          prec_product};
            break;
        case Op::div:
            out[i] = {wrap(out[n.lhs], prec_product) + "/" + wrap(out[n.rhs], prec_product + 1),
                      prec_product};
            break;
        }
    }
    return out[dag.root()].text;
}

} // namespace nondim
