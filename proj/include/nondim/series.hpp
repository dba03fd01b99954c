#pragma once

// Truncated power series solutions of the linear variational system
//
//   Xi'        = F(t, Xi, Theta)
//   (dXi/dX)'  = dF/dX (dXi/dX)
//   (dXi/dTh)' = dF/dX (dXi/dTh) + dF/dTh
//   (dXi/dt0)' = dF/dX (dXi/dt0) + dF/dt
//
// around one specialization, and the jet-order infinitesimal conditions built
// from their coefficients. Serves as an independent route to the symmetry
// spaces computed from order-zero conditions at many points.

#include "nondim/expr.hpp"
#include "nondim/generator.hpp"
#include "nondim/odesys.hpp"

#include <stdexcept>
#include <vector>

namespace nondim {

/// Dense truncated series c0 + c1 t + ... + ck t^k.
class Series {
  public:
    Series() = default;
    Series(std::size_t order, const Rational &c0 = 0) : c_(order + 1) { c_[0] = c0; }
    explicit Series(std::vector<Rational> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty())
            throw std::invalid_argument("Series: empty coefficient vector");
    }

    std::size_t order() const { return c_.size() - 1; }
    const Rational &operator[](std::size_t k) const { return c_[k]; }
    Rational &operator[](std::size_t k) { return c_[k]; }
    const std::vector<Rational> &coefficients() const { return c_; }

    Series &operator+=(const Series &o) {
        check(o);
        for (std::size_t k = 0; k < c_.size(); ++k)
            c_[k] += o.c_[k];
        return *this;
    }
    Series &operator-=(const Series &o) {
        check(o);
        for (std::size_t k = 0; k < c_.size(); ++k)
            c_[k] -= o.c_[k];
        return *this;
    }
    friend Series operator+(Series a, const Series &b) { return a += b; }
    friend Series operator-(Series a, const Series &b) { return a -= b; }

    friend Series operator*(const Series &a, const Series &b) {
        a.check(b);
        Series r(a.order());
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i] == 0)
                continue;
            for (std::size_t j = 0; i + j < a.c_.size(); ++j)
                r.c_[i + j] += a.c_[i] * b.c_[j];
        }
        return r;
    }

    friend Series operator/(const Series &a, const Series &b) {
        a.check(b);
        if (b.c_[0] == 0)
            throw std::domain_error("series division by a series with zero constant term");
        Series q(a.order());
        for (std::size_t k = 0; k < a.c_.size(); ++k) {
            Rational acc = a.c_[k];
            for (std::size_t i = 0; i < k; ++i)
                acc -= q.c_[i] * b.c_[k - i];
            q.c_[k] = acc / b.c_[0];
        }
        return q;
    }

    /// Coefficient k of a*b without forming the whole product.
    static Rational product_coefficient(const Series &a, const Series &b, std::size_t k) {
        Rational s = 0;
        for (std::size_t i = 0; i <= k; ++i)
            s += a.c_[i] * b.c_[k - i];
        return s;
    }

    /// Term-by-term derivative, truncated to the same order.
    Series derivative() const {
        Series d(order());
        for (std::size_t k = 1; k < c_.size(); ++k)
            d.c_[k - 1] = c_[k] * static_cast<long>(k);
        return d;
    }

    friend bool operator==(const Series &, const Series &) = default;

  private:
    void check(const Series &o) const {
        if (o.c_.size() != c_.size())
            throw std::invalid_argument("Series: truncation order mismatch");
    }

    std::vector<Rational> c_{Rational(0)};
};

inline bool is_zero_divisor(const Series &s) { return s[0] == 0; }

struct SeriesSolution {
    std::size_t order = 0;
    Assignment point;
    std::vector<Series> xi;                       // xi[i] = sum D^j x_i t^j / j!
    std::vector<std::vector<Series>> dxi_dX;      // [i][k] = d xi_i / d x_k
    std::vector<std::vector<Series>> dxi_dTheta;  // [i][p] = d xi_i / d theta_p
    std::vector<Series> dxi_dt;                   // [i] = d xi_i / d t0

    /// D^j x_i at the specialization.
    Rational derivative(std::size_t i, std::size_t j) const { return xi[i][j] * factorial(j); }

    static Rational factorial(std::size_t j) {
        Integer f = 1;
        for (std::size_t k = 2; k <= j; ++k)
            f *= static_cast<unsigned long>(k);
        return Rational(f);
    }
};

/// Integrates the variational system order by order in exact arithmetic.
/// Throws PoleError if the right-hand side is singular at the point.
inline SeriesSolution variational_series(const Model &model, const Assignment &point, std::size_t order) {
    const std::size_t n = model.n(), l = model.l();
    SeriesSolution sol;
    sol.order = order;
    sol.point = point;
    auto at = [&](const std::string &s) {
        auto it = point.find(s);
        if (it == point.end())
            throw std::out_of_range("specialization does not bind '" + s + "'");
        return it->second;
    };
    for (std::size_t i = 0; i < n; ++i) {
        sol.xi.emplace_back(order, at(model.states[i]));
        sol.dxi_dX.emplace_back();
        for (std::size_t k = 0; k < n; ++k)
            sol.dxi_dX[i].emplace_back(order, Rational(i == k ? 1 : 0));
        sol.dxi_dTheta.emplace_back(l, Series(order));
        sol.dxi_dt.emplace_back(order);
    }
    auto lift = [order](const Rational &c) { return Series(order, c); };

    Series time(order, at(model.time));
    if (order > 0)
        time[1] = 1;
    std::vector<Series> params;
    for (const auto &p : model.params)
        params.emplace_back(order, at(p));

    for (std::size_t k = 0; k < order; ++k) {
        std::map<std::string, Series> values;
        values.emplace(model.time, time);
        for (std::size_t i = 0; i < n; ++i)
            values.emplace(model.states[i], sol.xi[i]);
        for (std::size_t p = 0; p < l; ++p)
            values.emplace(model.params[p], params[p]);

        std::vector<Gradient<Series>> grads;
        for (std::size_t i = 0; i < n; ++i)
            grads.push_back(gradient<Series>(model.rhs[i], values, lift));

        const Rational step = Rational(1) / static_cast<long>(k + 1);
        auto next = sol;
        for (std::size_t i = 0; i < n; ++i) {
            const auto &g = grads[i];
            next.xi[i][k + 1] = g.value[k] * step;
            for (std::size_t c = 0; c < n; ++c) {
                Rational acc = 0;
                for (std::size_t m = 0; m < n; ++m)
                    acc += Series::product_coefficient(g.partials.at(model.states[m]), sol.dxi_dX[m][c], k);
                next.dxi_dX[i][c][k + 1] = acc * step;
            }
            for (std::size_t p = 0; p < l; ++p) {
                Rational acc = g.partials.at(model.params[p])[k];
                for (std::size_t m = 0; m < n; ++m)
                    acc += Series::product_coefficient(g.partials.at(model.states[m]), sol.dxi_dTheta[m][p], k);
                next.dxi_dTheta[i][p][k + 1] = acc * step;
            }
            Rational acc = g.partials.at(model.time)[k];
            for (std::size_t m = 0; m < n; ++m)
                acc += Series::product_coefficient(g.partials.at(model.states[m]), sol.dxi_dt[m], k);
            next.dxi_dt[i][k + 1] = acc * step;
        }
        sol = std::move(next);
    }
    return sol;
}

/// Jet conditions for derivative orders j = 1..j_max, one row per (j, i),
/// over the coordinate order (t, X, Theta). For scalings the row encodes
///   sum_y alpha_y y d(D^j x_i)/dy - (alpha_{x_i} - j alpha_t) D^j x_i = 0,
/// for translations  sum_y alpha_y d(D^j x_i)/dy = 0. The j = 1 rows are the
/// order-zero conditions on F itself.
inline std::vector<std::vector<Rational>> jet_condition_rows(const Model &model, const SeriesSolution &sol,
                                                             Kind kind, std::size_t j_max) {
    if (j_max > sol.order)
        throw std::invalid_argument("jet order exceeds series truncation order");
    const std::size_t n = model.n(), l = model.l();
    std::vector<std::vector<Rational>> rows;
    for (std::size_t j = 1; j <= j_max; ++j) {
        const Rational fact = SeriesSolution::factorial(j);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<Rational> row(1 + n + l);
            const Rational djx = sol.xi[i][j] * fact;
            if (kind == Kind::scale) {
                row[0] = sol.point.at(model.time) * sol.dxi_dt[i][j] * fact + djx * static_cast<long>(j);
                for (std::size_t k = 0; k < n; ++k)
                    row[1 + k] = sol.point.at(model.states[k]) * sol.dxi_dX[i][k][j] * fact;
                row[1 + i] -= djx;
                for (std::size_t p = 0; p < l; ++p)
                    row[1 + n + p] = sol.point.at(model.params[p]) * sol.dxi_dTheta[i][p][j] * fact;
            } else {
                row[0] = sol.dxi_dt[i][j] * fact;
                for (std::size_t k = 0; k < n; ++k)
                    row[1 + k] = sol.dxi_dX[i][k][j] * fact;
                for (std::size_t p = 0; p < l; ++p)
                    row[1 + n + p] = sol.dxi_dTheta[i][p][j] * fact;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace nondim
