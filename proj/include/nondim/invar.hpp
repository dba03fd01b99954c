#pragma once

// Rational invariants and the normalizing substitution. With A the m x m
// block of generator exponents on the pivot parameters, the group element
// lambda = theta_hat^(-A^-1) sends every pivot to the identity value, and
// every other coordinate y to
//
//   scale:        y * prod_j theta_hat_j ^ c_j(y)
//   translation:  y + sum_j c_j(y) theta_hat_j        with c(y) = -a_y A^-1.

#include "nondim/expr.hpp"
#include "nondim/generator.hpp"
#include "nondim/linalg.hpp"
#include "nondim/poly.hpp"
#include "nondim/rational.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nondim {

class NormalizationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Parameter rows of the generator matrix with an identity block appended.
struct ExponentMatrix {
    std::vector<std::string> params;
    std::size_t m = 0;
    Matrix entries; // l x (m + l)

    Rational a(std::size_t param, std::size_t generator) const { return entries(param, generator); }
};

inline ExponentMatrix exponent_matrix(const SymmetryBasis &basis, const std::vector<std::string> &params) {
    ExponentMatrix e{params, basis.m(), Matrix(params.size(), basis.m() + params.size())};
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto it = std::find(basis.coordinates.begin(), basis.coordinates.end(), params[p]);
        if (it == basis.coordinates.end())
            throw std::invalid_argument("parameter '" + params[p] + "' is not a coordinate of the basis");
        auto col = static_cast<std::size_t>(it - basis.coordinates.begin());
        for (std::size_t g = 0; g < basis.m(); ++g)
            e.entries(p, g) = basis.generators[g].alpha[col];
        e.entries(p, basis.m() + p) = 1;
    }
    return e;
}

enum class TieOrder { declaration, reverse_declaration };

/// m parameters whose exponent block is invertible, taking as many of
/// `prefer` as possible; remaining choices follow `order`.
inline std::vector<std::string> select_pivots(const SymmetryBasis &basis, const std::vector<std::string> &params,
                                              const std::vector<std::string> &prefer = {},
                                              TieOrder order = TieOrder::declaration) {
    if (basis.m() == 0)
        throw std::invalid_argument("select_pivots: empty symmetry basis");
    for (const auto &p : prefer)
        if (std::find(params.begin(), params.end(), p) == params.end())
            throw std::invalid_argument("preferred symbol '" + p + "' is not a parameter");
    ExponentMatrix e = exponent_matrix(basis, params);

    std::vector<std::size_t> idx(params.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = order == TieOrder::declaration ? i : idx.size() - 1 - i;
    std::stable_partition(idx.begin(), idx.end(), [&](std::size_t i) {
        return std::find(prefer.begin(), prefer.end(), params[i]) != prefer.end();
    });

    Matrix chosen(0, basis.m());
    std::vector<std::size_t> picked;
    for (std::size_t i : idx) {
        if (picked.size() == basis.m())
            break;
        Matrix trial = chosen;
        std::vector<Rational> row(basis.m());
        for (std::size_t g = 0; g < basis.m(); ++g)
            row[g] = e.a(i, g);
        trial.append_row(row);
        if (rank(trial) > picked.size()) {
            chosen = std::move(trial);
            picked.push_back(i);
        }
    }
    if (picked.size() < basis.m())
        throw NormalizationError("cannot normalize onto parameters only: the " + std::to_string(basis.m()) +
                                 " generators have rank " + std::to_string(picked.size()) +
                                 " on the parameters and act on time or states alone");
    std::sort(picked.begin(), picked.end());
    std::vector<std::string> out;
    for (auto i : picked)
        out.push_back(params[i]);
    return out;
}

struct EliminationResult {
    std::vector<std::string> params;
    std::vector<std::string> pivots;
    std::vector<std::string> others; // non-pivot parameters, declaration order
    Matrix gamma;                    // m x l, nonzero only on pivot columns
    Matrix beta;                     // (l - m) x l, row k belongs to others[k]
};

inline EliminationResult eliminate(const ExponentMatrix &e, const std::vector<std::string> &pivots) {
    const std::size_t m = e.m, l = e.params.size();
    if (pivots.size() != m)
        throw std::invalid_argument("eliminate: need exactly one pivot per generator");
    std::vector<std::size_t> pidx;
    for (const auto &p : pivots) {
        auto it = std::find(e.params.begin(), e.params.end(), p);
        if (it == e.params.end())
            throw std::invalid_argument("eliminate: pivot '" + p + "' is not a parameter");
        pidx.push_back(static_cast<std::size_t>(it - e.params.begin()));
    }
    Matrix block(m, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t g = 0; g < m; ++g)
            block(j, g) = e.a(pidx[j], g);
    Matrix inv = inverse(block); // throws when the block is singular

    EliminationResult r{e.params, pivots, {}, Matrix(m, l), Matrix(0, l)};
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            r.gamma(i, pidx[j]) = inv(i, j);
    for (std::size_t p = 0; p < l; ++p) {
        if (std::find(pidx.begin(), pidx.end(), p) != pidx.end())
            continue;
        std::vector<Rational> row(l);
        row[p] = 1;
        for (std::size_t c = 0; c < l; ++c)
            for (std::size_t g = 0; g < m; ++g)
                row[c] -= e.a(p, g) * r.gamma(g, c);
        r.others.push_back(e.params[p]);
        r.beta.append_row(row);
    }
    return r;
}

/// Image of one coordinate under the normalizing substitution.
struct Image {
    std::string symbol;
    Kind kind = Kind::scale;
    std::vector<std::pair<std::string, Rational>> terms; // (pivot, c), c != 0
    bool is_pivot = false;

    /// True when the image is a rational function (always for translations).
    bool integral() const {
        if (kind == Kind::translation)
            return true;
        return std::all_of(terms.begin(), terms.end(), [](const auto &t) { return is_integer(t.second); });
    }

    Integer denominator_lcm() const {
        Integer d = 1;
        if (kind == Kind::translation)
            return d;
        for (const auto &[s, c] : terms)
            d = lcm(d, c.get_den());
        return d;
    }

    ExprDag dag() const {
        if (!integral())
            throw std::logic_error("image of '" + symbol + "' has fractional exponents");
        DagBuilder b;
        NodeId acc = b.variable(symbol);
        for (const auto &[s, c] : terms) {
            if (kind == Kind::scale)
                acc = b.mul(acc, b.pow(b.variable(s), c.get_num().get_si()));
            else
                acc = b.add(acc, b.mul(b.constant(c), b.variable(s)));
        }
        return b.finish(acc);
    }

    /// Empty when a fractional power has no rational value at the point.
    std::optional<Rational> evaluate(const Assignment &point) const {
        Rational v = point.at(symbol);
        for (const auto &[s, c] : terms) {
            if (kind == Kind::translation) {
                v += c * point.at(s);
                continue;
            }
            auto f = rational_power(point.at(s), c);
            if (!f)
                return std::nullopt;
            v *= *f;
        }
        return v;
    }

    /// Multiplier (scale) or offset (translation) applied to the symbol.
    std::optional<Rational> factor(const Assignment &point) const {
        Rational v = kind == Kind::scale ? Rational(1) : Rational(0);
        for (const auto &[s, c] : terms) {
            if (kind == Kind::translation) {
                v += c * point.at(s);
                continue;
            }
            auto f = rational_power(point.at(s), c);
            if (!f)
                return std::nullopt;
            v *= *f;
        }
        return v;
    }

    std::string render() const {
        if (integral()) {
            try {
                return nondim::render(normalize(dag()));
            } catch (const SizeBoundExceeded &) {
                return nondim::render(dag());
            }
        }
        std::string s = symbol;
        for (const auto &[p, c] : terms)
            s += "*" + p + "^(" + to_string(c) + ")";
        return s;
    }
};

struct InvariantSet {
    Kind kind = Kind::scale;
    std::vector<std::string> pivots;
    std::vector<Image> images;                          // one per coordinate, coordinate order
    std::vector<std::vector<Rational>> param_invariants; // primitive integer exponent vectors over params
    std::vector<std::string> assumptions;

    const Image &image(const std::string &symbol) const {
        for (const auto &im : images)
            if (im.symbol == symbol)
                return im;
        throw std::out_of_range("no image for '" + symbol + "'");
    }

    /// Exponent (scale) or coefficient (translation) vector of an image over
    /// the basis coordinates.
    std::vector<Rational> weight_vector(const Image &im, const std::vector<std::string> &coordinates) const {
        std::vector<Rational> w(coordinates.size());
        for (std::size_t c = 0; c < coordinates.size(); ++c) {
            if (coordinates[c] == im.symbol)
                w[c] += 1;
            for (const auto &[s, k] : im.terms)
                if (coordinates[c] == s)
                    w[c] += k;
        }
        return w;
    }
};

inline InvariantSet normalizing_substitution(const EliminationResult &r, const SymmetryBasis &basis) {
    const std::size_t m = r.pivots.size();
    InvariantSet inv;
    inv.kind = basis.kind;
    inv.pivots = r.pivots;
    std::vector<std::size_t> pivot_cols;
    for (const auto &p : r.pivots)
        pivot_cols.push_back(static_cast<std::size_t>(std::find(r.params.begin(), r.params.end(), p) - r.params.begin()));

    bool fractional = false;
    for (std::size_t y = 0; y < basis.coordinates.size(); ++y) {
        Image im;
        im.symbol = basis.coordinates[y];
        im.kind = basis.kind;
        im.is_pivot = std::find(r.pivots.begin(), r.pivots.end(), im.symbol) != r.pivots.end();
        for (std::size_t j = 0; j < m; ++j) {
            Rational c = 0;
            for (std::size_t g = 0; g < m; ++g)
                c -= basis.generators[g].alpha[y] * r.gamma(g, pivot_cols[j]);
            if (c != 0) {
                im.terms.emplace_back(r.pivots[j], c);
                fractional = fractional || !is_integer(c);
            }
        }
        inv.images.push_back(std::move(im));
    }
    for (std::size_t k = 0; k < r.beta.rows(); ++k)
        inv.param_invariants.push_back(primitive_integer(r.beta.row_vector(k)));
    if (basis.kind == Kind::scale) {
        for (const auto &p : r.pivots)
            inv.assumptions.push_back(p + " != 0");
        if (fractional)
            for (const auto &p : r.pivots)
                inv.assumptions.push_back(p + " > 0");
    }
    return inv;
}

} // namespace nondim
