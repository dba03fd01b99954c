#pragma once

// Parametric ODE systems  dX/dt = F(t, X, Theta)  and their text format:
//
//   model verhulst;          # optional
//   time t;                  # optional, defaults to t
//   state x;
//   param a, b, c;
//   d/dt x = x*(a - b*x) - c*x;

#include "nondim/expr.hpp"
#include "nondim/poly.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nondim {

struct Model {
    std::string name;
    std::string time = "t";
    std::vector<std::string> states;
    std::vector<std::string> params;
    std::vector<ExprDag> rhs; // rhs[i] is d(states[i])/dt

    std::size_t n() const { return states.size(); }
    std::size_t l() const { return params.size(); }

    /// Canonical coordinate order (t, x1..xn, theta1..theta_l); every exponent
    /// vector is indexed against it.
    std::vector<std::string> coordinates() const {
        std::vector<std::string> c{time};
        c.insert(c.end(), states.begin(), states.end());
        c.insert(c.end(), params.begin(), params.end());
        return c;
    }

    std::size_t coordinate_count() const { return 1 + n() + l(); }

    std::optional<std::size_t> coordinate_index(const std::string &symbol) const {
        auto coords = coordinates();
        for (std::size_t i = 0; i < coords.size(); ++i)
            if (coords[i] == symbol)
                return i;
        return std::nullopt;
    }

    SymbolTable symbols() const {
        auto c = coordinates();
        return {c.begin(), c.end()};
    }

    /// Throws std::invalid_argument when the structural invariants fail.
    void validate() const {
        if (states.empty())
            throw std::invalid_argument("model has no state variables");
        if (rhs.size() != states.size())
            throw std::invalid_argument("model needs one equation per state");
        std::set<std::string> seen;
        for (const auto &s : coordinates())
            if (!seen.insert(s).second)
                throw std::invalid_argument("duplicate symbol '" + s + "'");
        for (const auto &f : rhs)
            for (const auto &v : f.variables())
                if (!seen.contains(v))
                    throw std::invalid_argument("undeclared symbol '" + v + "' in right-hand side");
    }
};

class ControlVariablesUnsupported : public ParseError {
  public:
    ControlVariablesUnsupported(int line, int column)
        : ParseError("control variables unsupported (time-dependent inputs are out of scope)", line,
                     column) {}
};

namespace detail {

struct Statement {
    std::string text;
    int line;
    int column;
};

// Splits on ';' with comments blanked out, remembering where each statement
// starts.
inline std::vector<Statement> split_statements(const std::string &text, int &end_line, int &end_column) {
    std::vector<Statement> out;
    Statement cur{"", 1, 1};
    bool started = false;
    int line = 1, column = 1;
    bool in_comment = false;
    for (char c : text) {
        if (in_comment && c != '\n') {
            ++column;
            continue;
        }
        in_comment = false;
        if (c == '#') {
            in_comment = true;
            ++column;
            continue;
        }
        if (c == ';') {
            out.push_back(cur);
            cur = {"", line, column + 1};
            started = false;
            ++column;
            continue;
        }
        if (!started && !std::isspace(static_cast<unsigned char>(c))) {
            cur.line = line;
            cur.column = column;
            started = true;
        }
        if (started)
            cur.text.push_back(c);
        if (c == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    end_line = line;
    end_column = column;
    if (started) {
        bool blank = true;
        for (char c : cur.text)
            blank = blank && std::isspace(static_cast<unsigned char>(c));
        if (!blank)
            throw ParseError("missing ';' after statement", cur.line, cur.column);
    }
    return out;
}

inline bool is_identifier(const std::string &s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0])))
        return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
            return false;
    return true;
}

inline std::string trim(const std::string &s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

// Column/line of offset `k` inside statement `st`.
inline std::pair<int, int> position_in(const Statement &st, std::size_t k) {
    int line = st.line, column = st.column;
    for (std::size_t i = 0; i < k && i < st.text.size(); ++i) {
        if (st.text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

inline std::vector<std::string> identifier_list(const Statement &st, std::size_t from) {
    std::vector<std::string> ids;
    std::string rest = st.text.substr(from);
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = rest.find(',', start);
        std::string item = trim(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!is_identifier(item)) {
            auto [l, c] = position_in(st, from + start);
            throw ParseError("expected identifier, got '" + item + "'", l, c);
        }
        ids.push_back(item);
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return ids;
}

} // namespace detail

inline Model parse_model(const std::string &text) {
    using namespace detail;
    int end_line = 1, end_column = 1;
    auto statements = split_statements(text, end_line, end_column);

    Model m;
    bool time_declared = false;
    std::vector<std::pair<std::string, Statement>> declarations;

    struct Equation {
        std::string state;
        Statement expr;
        Statement head;
    };
    std::vector<Equation> equations;

    for (const auto &st : statements) {
        std::string body = trim(st.text);
        if (body.empty())
            continue;
        std::size_t ws = 0;
        while (ws < st.text.size() && !std::isspace(static_cast<unsigned char>(st.text[ws])))
            ++ws;
        std::string keyword = st.text.substr(0, ws);
        if (keyword == "model") {
            std::string name = trim(st.text.substr(ws));
            if (!is_identifier(name))
                throw ParseError("expected model name", st.line, st.column);
            m.name = name;
        } else if (keyword == "time") {
            if (time_declared)
                throw ParseError("time declared twice", st.line, st.column);
            auto ids = identifier_list(st, ws);
            if (ids.size() != 1)
                throw ParseError("exactly one time symbol expected", st.line, st.column);
            m.time = ids[0];
            time_declared = true;
        } else if (keyword == "state") {
            for (auto &id : identifier_list(st, ws)) {
                m.states.push_back(id);
                declarations.emplace_back(id, st);
            }
        } else if (keyword == "param") {
            for (auto &id : identifier_list(st, ws)) {
                m.params.push_back(id);
                declarations.emplace_back(id, st);
            }
        } else if (keyword == "input" || keyword == "control") {
            throw ControlVariablesUnsupported(st.line, st.column);
        } else if (st.text.rfind("d/d", 0) == 0) {
            std::size_t eq = st.text.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected '=' in equation", st.line, st.column);
            std::string head = st.text.substr(0, eq);
            std::size_t sp = 3;
            while (sp < head.size() && !std::isspace(static_cast<unsigned char>(head[sp])))
                ++sp;
            std::string tvar = head.substr(3, sp - 3);
            std::string state = trim(head.substr(sp));
            if (!is_identifier(tvar) || !is_identifier(state))
                throw ParseError("expected 'd/d<time> <state> = <expr>'", st.line, st.column);
            auto [l, c] = position_in(st, eq + 1);
            Statement expr{st.text.substr(eq + 1), l, c};
            Statement where{tvar, st.line, st.column};
            equations.push_back({state, expr, where});
        } else {
            throw ParseError("unknown statement '" + keyword + "'", st.line, st.column);
        }
    }

    std::set<std::string> declared{m.time};
    for (const auto &[id, st] : declarations)
        if (!declared.insert(id).second)
            throw ParseError("duplicate symbol '" + id + "'", st.line, st.column);
    if (m.states.empty())
        throw ParseError("no state variables declared", end_line, end_column);

    SymbolTable symbols = m.symbols();
    std::map<std::string, ExprDag> rhs;
    for (const auto &eq : equations) {
        if (eq.head.text != m.time)
            throw ParseError("derivative must be taken with respect to '" + m.time + "'", eq.head.line,
                             eq.head.column);
        if (std::find(m.states.begin(), m.states.end(), eq.state) == m.states.end())
            throw ParseError("equation for '" + eq.state + "', which is not a declared state", eq.head.line,
                             eq.head.column);
        if (rhs.contains(eq.state))
            throw ParseError("duplicate equation for '" + eq.state + "'", eq.head.line, eq.head.column);
        rhs.emplace(eq.state, parse_expr(eq.expr.text, symbols, eq.expr.line, eq.expr.column));
    }
    for (const auto &s : m.states) {
        auto it = rhs.find(s);
        if (it == rhs.end())
            throw ParseError("missing equation for state '" + s + "'", end_line, end_column);
        m.rhs.push_back(it->second);
    }
    return m;
}

/// Emits a model in the text format. With `normalized`, each right-hand
/// side is written as a reduced fraction of expanded polynomials (falls back
/// to the DAG form past the normalization size bound).
inline std::string render_model(const Model &m, bool normalized = false) {
    auto join = [](const std::vector<std::string> &v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + v[i];
        return s;
    };
    std::string out;
    if (!m.name.empty())
        out += "model " + m.name + ";\n";
    out += "time " + m.time + ";\n";
    out += "state " + join(m.states) + ";\n";
    if (!m.params.empty())
        out += "param " + join(m.params) + ";\n";
    for (std::size_t i = 0; i < m.n(); ++i) {
        std::string body;
        if (normalized) {
            try {
                body = render(normalize(m.rhs[i]));
            } catch (const SizeBoundExceeded &) {
                body = render(m.rhs[i]);
            }
        } else {
            body = render(m.rhs[i]);
        }
        out += "d/d" + m.time + " " + m.states[i] + " = " + body + ";\n";
    }
    return out;
}

} // namespace nondim
