#pragma once

// Sparse multivariate polynomials over Q and reduced rational functions.
// Used to put emitted expressions in a canonical form; the symmetry
// computations themselves never expand anything.

#include "nondim/expr.hpp"
#include "nondim/rational.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nondim {

/// Power product: (symbol, exponent > 0) pairs sorted by symbol.
using Monomial = std::vector<std::pair<std::string, unsigned>>;

inline unsigned total_degree(const Monomial &m) {
    unsigned d = 0;
    for (const auto &[s, e] : m)
        d += e;
    return d;
}

/// Lexicographic order with variables ranked alphabetically.
inline int lex_compare(const Monomial &a, const Monomial &b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first == b[j].first) {
            if (a[i].second != b[j].second)
                return a[i].second > b[j].second ? 1 : -1;
            ++i;
            ++j;
        } else if (a[i].first < b[j].first) {
            return 1;
        } else {
            return -1;
        }
    }
    if (i < a.size())
        return 1;
    if (j < b.size())
        return -1;
    return 0;
}

struct MonomialLess {
    bool operator()(const Monomial &a, const Monomial &b) const { return lex_compare(a, b) < 0; }
};

inline Monomial monomial_mul(const Monomial &a, const Monomial &b) {
    Monomial r;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
            r.push_back(a[i++]);
        else if (i == a.size() || b[j].first < a[i].first)
            r.push_back(b[j++]);
        else {
            r.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

inline std::optional<Monomial> monomial_div(const Monomial &a, const Monomial &b) {
    Monomial r;
    std::size_t i = 0;
    for (const auto &[s, e] : b) {
        while (i < a.size() && a[i].first < s)
            r.push_back(a[i++]);
        if (i == a.size() || a[i].first != s || a[i].second < e)
            return std::nullopt;
        if (a[i].second > e)
            r.emplace_back(s, a[i].second - e);
        ++i;
    }
    while (i < a.size())
        r.push_back(a[i++]);
    return r;
}

class Polynomial {
  public:
    using Terms = std::map<Monomial, Rational, MonomialLess>;

    Polynomial() = default;
    Polynomial(const Rational &c) {
        if (c != 0)
            terms_.emplace(Monomial{}, c);
    }
    Polynomial(long c) : Polynomial(Rational(c)) {}

    static Polynomial variable(const std::string &s, unsigned e = 1) {
        Polynomial p;
        p.terms_.emplace(e == 0 ? Monomial{} : Monomial{{s, e}}, Rational(1));
        return p;
    }

    static Polynomial term(Monomial m, const Rational &c) {
        Polynomial p;
        if (c != 0)
            p.terms_.emplace(std::move(m), c);
        return p;
    }

    const Terms &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
    Rational constant_term() const {
        auto it = terms_.find(Monomial{});
        return it == terms_.end() ? Rational(0) : it->second;
    }

    /// Leading term in lex order.
    const std::pair<const Monomial, Rational> &leading() const {
        if (terms_.empty())
            throw std::domain_error("leading term of zero polynomial");
        return *terms_.rbegin();
    }

    std::set<std::string> variables() const {
        std::set<std::string> v;
        for (const auto &[m, c] : terms_)
            for (const auto &[s, e] : m)
                v.insert(s);
        return v;
    }

    unsigned degree_in(const std::string &s) const {
        unsigned d = 0;
        for (const auto &[m, c] : terms_)
            for (const auto &[v, e] : m)
                if (v == s)
                    d = std::max(d, e);
        return d;
    }

    /// Coefficients when viewed as a univariate polynomial in `s`.
    std::map<unsigned, Polynomial> coefficients_in(const std::string &s) const {
        std::map<unsigned, Polynomial> out;
        for (const auto &[m, c] : terms_) {
            unsigned e = 0;
            Monomial rest;
            for (const auto &[v, k] : m) {
                if (v == s)
                    e = k;
                else
                    rest.emplace_back(v, k);
            }
            out[e].terms_.emplace(std::move(rest), c);
        }
        return out;
    }

    Polynomial &operator+=(const Polynomial &o) {
        for (const auto &[m, c] : o.terms_) {
            auto [it, inserted] = terms_.emplace(m, c);
            if (!inserted) {
                it->second += c;
                if (it->second == 0)
                    terms_.erase(it);
            }
        }
        return *this;
    }

    Polynomial &operator-=(const Polynomial &o) {
        for (const auto &[m, c] : o.terms_) {
            auto [it, inserted] = terms_.emplace(m, -c);
            if (!inserted) {
                it->second -= c;
                if (it->second == 0)
                    terms_.erase(it);
            }
        }
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial &b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial &b) { return a -= b; }
    friend Polynomial operator-(const Polynomial &a) { return Polynomial() - a; }

    friend Polynomial operator*(const Polynomial &a, const Polynomial &b) {
        Polynomial r;
        for (const auto &[ma, ca] : a.terms_)
            for (const auto &[mb, cb] : b.terms_) {
                Monomial m = monomial_mul(ma, mb);
                auto [it, inserted] = r.terms_.emplace(std::move(m), ca * cb);
                if (!inserted) {
                    it->second += ca * cb;
                    if (it->second == 0)
                        r.terms_.erase(it);
                }
            }
        return r;
    }

    Polynomial scaled(const Rational &k) const {
        if (k == 0)
            return {};
        Polynomial r = *this;
        for (auto &[m, c] : r.terms_)
            c *= k;
        return r;
    }

    friend bool operator==(const Polynomial &a, const Polynomial &b) { return a.terms_ == b.terms_; }

    /// Exact quotient a / b, or nullopt when b does not divide a.
    friend std::optional<Polynomial> exact_divide(Polynomial a, const Polynomial &b) {
        if (b.is_zero())
            throw std::domain_error("polynomial division by zero");
        Polynomial q;
        const auto &[lm_b, lc_b] = b.leading();
        while (!a.is_zero()) {
            const auto &[lm_a, lc_a] = a.leading();
            auto m = monomial_div(lm_a, lm_b);
            if (!m)
                return std::nullopt;
            Polynomial t = term(*m, lc_a / lc_b);
            q += t;
            a -= t * b;
        }
        return q;
    }

    /// Rescales to coprime integer coefficients with a positive leading
    /// coefficient; returns the (possibly negative) factor applied.
    Rational make_primitive() {
        if (terms_.empty())
            return 1;
        Integer den = 1;
        for (const auto &[m, c] : terms_)
            den = lcm(den, c.get_den());
        Integer g = 0;
        for (const auto &[m, c] : terms_)
            g = gcd(g, Rational(c * den).get_num());
        Rational factor = Rational(den) / Rational(g);
        if (leading().second < 0)
            factor = -factor;
        for (auto &[m, c] : terms_)
            c *= factor;
        return factor;
    }

  private:
    Terms terms_;
};

inline Polynomial from_coefficients(const std::string &s, const std::map<unsigned, Polynomial> &coeffs) {
    Polynomial r;
    for (const auto &[e, c] : coeffs)
        r += c * Polynomial::variable(s, e);
    return r;
}

inline Polynomial polynomial_gcd(const Polynomial &a, const Polynomial &b);

namespace detail {

inline Polynomial content_in(const Polynomial &p, const std::string &s) {
    Polynomial g;
    for (const auto &[e, c] : p.coefficients_in(s)) {
        g = polynomial_gcd(g, c);
        if (g.is_constant())
            return Polynomial(1);
    }
    return g;
}

inline Polynomial primitive_part_in(const Polynomial &p, const std::string &s) {
    if (p.is_zero())
        return p;
    auto q = exact_divide(p, content_in(p, s));
    return *q;
}

// Pseudo-remainder of a by b as univariate polynomials in s.
inline Polynomial pseudo_remainder(Polynomial a, const Polynomial &b, const std::string &s) {
    const unsigned db = b.degree_in(s);
    const Polynomial lc_b = b.coefficients_in(s).rbegin()->second;
    while (!a.is_zero() && a.degree_in(s) >= db) {
        unsigned da = a.degree_in(s);
        Polynomial lc_a = a.coefficients_in(s).rbegin()->second;
        a = a * lc_b - lc_a * Polynomial::variable(s, da - db) * b;
    }
    return a;
}

} // namespace detail

/// Greatest common divisor over Q[vars], normalized to primitive integer
/// coefficients with positive leading coefficient. Recursive primitive
/// polynomial remainder sequence on the alphabetically first variable.
inline Polynomial polynomial_gcd(const Polynomial &a, const Polynomial &b) {
    if (a.is_zero() && b.is_zero())
        return {};
    if (a.is_zero() || b.is_zero()) {
        Polynomial g = a.is_zero() ? b : a;
        g.make_primitive();
        return g;
    }
    if (a.is_constant() || b.is_constant())
        return Polynomial(1);
    auto va = a.variables();
    auto vb = b.variables();
    std::string s = std::min(*va.begin(), *vb.begin());
    if (!va.contains(s))
        return polynomial_gcd(a, detail::content_in(b, s));
    if (!vb.contains(s))
        return polynomial_gcd(detail::content_in(a, s), b);

    Polynomial ca = detail::content_in(a, s);
    Polynomial cb = detail::content_in(b, s);
    Polynomial c = polynomial_gcd(ca, cb);
    Polynomial A = *exact_divide(a, ca);
    Polynomial B = *exact_divide(b, cb);
    if (A.degree_in(s) < B.degree_in(s))
        std::swap(A, B);
    Polynomial g;
    for (;;) {
        Polynomial r = detail::pseudo_remainder(A, B, s);
        if (r.is_zero()) {
            g = B;
            break;
        }
        if (r.degree_in(s) == 0) {
            g = Polynomial(1);
            break;
        }
        A = std::move(B);
        B = detail::primitive_part_in(r, s);
    }
    Polynomial result = c * detail::primitive_part_in(g, s);
    result.make_primitive();
    return result;
}

/// Reduced fraction num/den with gcd(num, den) = 1 and den primitive with a
/// positive leading coefficient. The representation is unique.
class RationalFunction {
  public:
    RationalFunction() : den_(1) {}
    RationalFunction(Polynomial num) : num_(std::move(num)), den_(1) {}
    RationalFunction(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero())
            throw std::domain_error("rational function with zero denominator");
        reduce();
    }

    const Polynomial &num() const { return num_; }
    const Polynomial &den() const { return den_; }

    friend RationalFunction operator+(const RationalFunction &a, const RationalFunction &b) {
        if (a.den_ == b.den_)
            return {a.num_ + b.num_, a.den_};
        return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend RationalFunction operator-(const RationalFunction &a, const RationalFunction &b) {
        if (a.den_ == b.den_)
            return {a.num_ - b.num_, a.den_};
        return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
    }
    friend RationalFunction operator*(const RationalFunction &a, const RationalFunction &b) {
        return {a.num_ * b.num_, a.den_ * b.den_};
    }
    friend RationalFunction operator/(const RationalFunction &a, const RationalFunction &b) {
        if (b.num_.is_zero())
            throw std::domain_error("rational function division by zero");
        return {a.num_ * b.den_, a.den_ * b.num_};
    }
    friend bool operator==(const RationalFunction &a, const RationalFunction &b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

  private:
    void reduce() {
        if (num_.is_zero()) {
            den_ = Polynomial(1);
            return;
        }
        if (!den_.is_constant()) {
            Polynomial g = polynomial_gcd(num_, den_);
            if (!g.is_constant()) {
                num_ = *exact_divide(num_, g);
                den_ = *exact_divide(den_, g);
            }
        }
        Rational f = den_.make_primitive();
        num_ = num_.scaled(f);
    }

    Polynomial num_;
    Polynomial den_;
};

class SizeBoundExceeded : public std::length_error {
  public:
    SizeBoundExceeded(std::size_t size, std::size_t bound)
        : std::length_error("expression has " + std::to_string(size) + " nodes, bound is " +
                            std::to_string(bound)) {}
};

inline constexpr std::size_t default_normalize_bound = 10000;

/// Expands a DAG into a single reduced fraction of polynomials.
inline RationalFunction normalize(const ExprDag &dag, std::size_t bound = default_normalize_bound) {
    if (dag.size() > bound)
        throw SizeBoundExceeded(dag.size(), bound);
    std::vector<RationalFunction> v;
    v.reserve(dag.size());
    for (const auto &n : dag.nodes()) {
        switch (n.op) {
        case Op::constant:
            v.emplace_back(Polynomial(n.value));
            break;
        case Op::variable:
            v.emplace_back(Polynomial::variable(n.symbol));
            break;
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
            v.push_back(v[n.lhs] / v[n.rhs]);
            break;
        }
    }
    return v[dag.root()];
}

namespace detail {

inline std::string render_monomial(const Monomial &m) {
    std::string s;
    for (const auto &[v, e] : m) {
        if (!s.empty())
            s += "*";
        s += v;
        if (e > 1)
            s += "^" + std::to_string(e);
    }
    return s;
}

} // namespace detail

/// Terms ordered by ascending total degree, then by descending lex order.
inline std::string render(const Polynomial &p) {
    if (p.is_zero())
        return "0";
    std::vector<std::pair<Monomial, Rational>> terms(p.terms().begin(), p.terms().end());
    std::stable_sort(terms.begin(), terms.end(), [](const auto &a, const auto &b) {
        unsigned da = total_degree(a.first), db = total_degree(b.first);
        if (da != db)
            return da < db;
        return lex_compare(a.first, b.first) > 0;
    });
    std::string out;
    for (const auto &[m, c] : terms) {
        Rational mag = abs(c);
        bool negative = c < 0;
        if (out.empty())
            out += negative ? "-" : "";
        else
            out += negative ? " - " : " + ";
        if (m.empty()) {
            out += mag.get_str();
            continue;
        }
        if (mag != 1) {
            if (is_integer(mag))
                out += mag.get_str() + "*";
            else
                out += "(" + mag.get_str() + ")*";
        }
        out += detail::render_monomial(m);
    }
    return out;
}

inline std::string render(const RationalFunction &f) {
    std::string num = render(f.num());
    if (f.den() == Polynomial(1))
        return num;
    bool simple_num = f.num().terms().size() == 1;
    bool simple_den = f.den().terms().size() == 1 && f.den().terms().begin()->second == 1 &&
                      f.den().terms().begin()->first.size() == 1;
    std::string n = simple_num ? num : "(" + num + ")";
    std::string d = render(f.den());
    if (!simple_den)
        d = "(" + d + ")";
    return n + "/" + d;
}

} // namespace nondim
