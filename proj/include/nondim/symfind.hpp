#pragma once

// Scale and translation symmetry detection from the order-zero
// infinitesimal conditions
//
//   scale:        sum_y alpha_y y df_i/dy + (alpha_t - alpha_{x_i}) f_i = 0
//   translation:  sum_y alpha_y df_i/dy = 0
//
// specialized at random integer points, followed by an exact kernel
// computation over Q and fresh-point verification of every kernel vector.

#include "nondim/expr.hpp"
#include "nondim/generator.hpp"
#include "nondim/linalg.hpp"
#include "nondim/odesys.hpp"
#include "nondim/poly.hpp"
#include "nondim/series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nondim {

struct ConditionMatrix {
    Kind kind = Kind::scale;
    Matrix rows;
    std::vector<Assignment> points;
};

namespace detail {

inline bool pole_free(const Model &model, const Assignment &point) {
    try {
        for (const auto &f : model.rhs)
            (void)gradient(f, point);
        return true;
    } catch (const PoleError &) {
        return false;
    }
}

inline Rng stream(std::uint64_t seed, Kind kind, std::uint64_t purpose, std::uint64_t index) {
    std::uint64_t s = Rng::mix(seed);
    s = Rng::mix(s ^ (kind == Kind::scale ? 0x5ca1eULL : 0x7a45ULL));
    s = Rng::mix(s ^ purpose);
    return Rng(s ^ Rng::mix(index));
}

enum : std::uint64_t { purpose_kernel = 1, purpose_verify = 2 };

} // namespace detail

/// Nonzero integer point in [-bound, bound] at which every f_i and its
/// gradient are defined.
inline Assignment sample_point(const Model &model, Rng &rng, long bound = 65536, int max_retries = 64) {
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        Assignment p;
        for (const auto &y : model.coordinates())
            p[y] = Rational(rng.nonzero(bound));
        if (detail::pole_free(model, p))
            return p;
    }
    throw SamplingExhausted(max_retries);
}

/// The n order-zero condition rows at one point, over (t, X, Theta).
inline std::vector<std::vector<Rational>> condition_rows(const Model &model, Kind kind, const Assignment &point) {
    const auto coords = model.coordinates();
    std::vector<std::vector<Rational>> rows;
    for (std::size_t i = 0; i < model.n(); ++i) {
        auto g = gradient(model.rhs[i], point);
        std::vector<Rational> row(coords.size());
        for (std::size_t c = 0; c < coords.size(); ++c) {
            const Rational &d = g.partials.at(coords[c]);
            row[c] = kind == Kind::scale ? point.at(coords[c]) * d : d;
        }
        if (kind == Kind::scale) {
            row[0] += g.value;
            row[1 + i] -= g.value;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ConditionMatrix assemble(const Model &model, Kind kind, const std::vector<Assignment> &points) {
    ConditionMatrix cm{kind, Matrix(0, model.coordinate_count()), points};
    for (const auto &p : points)
        for (const auto &r : condition_rows(model, kind, p))
            cm.rows.append_row(r);
    return cm;
}

namespace detail {

// Shifting time is a symmetry of every autonomous system and tells nothing
// about the parameters, so it is excluded from translation bases.
inline Matrix with_time_constraint(Matrix m, Kind kind) {
    if (kind != Kind::translation)
        return m;
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (m(r, 0) != 0)
            return m;
    std::vector<Rational> et(m.cols());
    et[0] = 1;
    m.append_row(et);
    return m;
}

inline void canonical_sign(std::vector<Rational> &v) {
    for (const auto &x : v) {
        if (x == 0)
            continue;
        if (x < 0)
            for (auto &y : v)
                y = -y;
        return;
    }
}

inline bool annihilates(const std::vector<std::vector<Rational>> &rows, const std::vector<Rational> &alpha) {
    for (const auto &r : rows)
        if (dot(r, alpha) != 0)
            return false;
    return true;
}

} // namespace detail

/// Kernel of the condition matrix; each vector primitive integer with a
/// positive leading entry. The result is unverified.
inline SymmetryBasis kernel_basis(const ConditionMatrix &cm, const std::vector<std::string> &coordinates) {
    SymmetryBasis b;
    b.kind = cm.kind;
    b.coordinates = coordinates;
    b.points = cm.points;
    Matrix k = nullspace(detail::with_time_constraint(cm.rows, cm.kind));
    for (std::size_t i = 0; i < k.rows(); ++i) {
        b.generators.push_back({cm.kind, primitive_integer(k.row_vector(i))});
        b.verified.push_back(false);
    }
    return b;
}

/// Checks the condition rows at `trials` fresh points; returns the first
/// point where g fails, if any.
inline std::optional<Assignment> find_witness(const Model &model, const Generator &g, Rng &rng, int trials,
                                              long bound = 65536, int max_retries = 64) {
    for (int k = 0; k < trials; ++k) {
        Assignment p = sample_point(model, rng, bound, max_retries);
        if (!detail::annihilates(condition_rows(model, g.kind, p), g.alpha))
            return p;
    }
    return std::nullopt;
}

inline bool verify_generator(const Model &model, const Generator &g, Rng &rng, int trials = 8,
                             long bound = 65536, int max_retries = 64) {
    return !find_witness(model, g, rng, trials, bound, max_retries);
}

/// Exact check of the group action itself: substitutes y -> lambda^alpha_y y
/// (or y -> y + alpha_y lambda) and compares normalized rational functions.
/// Integer generators only.
inline bool verify_generator_exact(const Model &model, const Generator &g) {
    const auto coords = model.coordinates();
    std::string lambda = "lambda";
    while (model.coordinate_index(lambda))
        lambda += "_";
    std::map<std::string, ExprDag> images;
    for (std::size_t c = 0; c < coords.size(); ++c) {
        if (!is_integer(g.alpha[c]))
            throw std::invalid_argument("exact verification needs an integer generator");
        DagBuilder b;
        NodeId y = b.variable(coords[c]);
        long a = g.alpha[c].get_num().get_si();
        NodeId img = g.kind == Kind::scale ? b.mul(b.pow(b.variable(lambda), a), y)
                                           : b.add(y, b.mul(b.constant(a), b.variable(lambda)));
        images.emplace(coords[c], b.finish(img));
    }
    for (std::size_t i = 0; i < model.n(); ++i) {
        RationalFunction lhs = normalize(substitute(model.rhs[i], images));
        RationalFunction rhs = normalize(model.rhs[i]);
        if (g.kind == Kind::scale) {
            Rational w = g.alpha[1 + i] - g.alpha[0];
            long e = w.get_num().get_si();
            Polynomial lam = Polynomial::variable(lambda, static_cast<unsigned>(e < 0 ? -e : e));
            rhs = e >= 0 ? rhs * RationalFunction(lam, Polynomial(1)) : rhs * RationalFunction(Polynomial(1), lam);
        }
        if (!(lhs == rhs))
            return false;
    }
    return true;
}

/// Size reduction (or full LLL) of an integer basis; the lattice and its
/// span are unchanged.
inline SymmetryBasis reduce_exponents(SymmetryBasis basis, bool full_lll = false) {
    if (basis.generators.size() < 2)
        return basis;
    std::vector<std::vector<Rational>> b;
    for (const auto &g : basis.generators)
        b.push_back(g.alpha);
    b = full_lll ? lll_reduce(std::move(b)) : size_reduce(std::move(b));
    for (std::size_t i = 0; i < b.size(); ++i) {
        detail::canonical_sign(b[i]);
        basis.generators[i].alpha = std::move(b[i]);
    }
    return basis;
}

namespace detail {

inline std::vector<std::vector<Rational>> backend_rows(const Model &model, Kind kind, const Assignment &p,
                                                       const SymmetryConfig &cfg) {
    if (cfg.backend == Backend::points)
        return condition_rows(model, kind, p);
    std::size_t j = cfg.jet_order > 0 ? static_cast<std::size_t>(cfg.jet_order) : model.coordinate_count();
    return jet_condition_rows(model, variational_series(model, p, j), kind, j);
}

// Series backend points must also survive series division.
inline Assignment sample_backend_point(const Model &model, Kind kind, Rng &rng, const SymmetryConfig &cfg,
                                       std::vector<std::vector<Rational>> &rows) {
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        Assignment p = sample_point(model, rng, cfg.bound, cfg.max_retries);
        try {
            rows = backend_rows(model, kind, p, cfg);
            return p;
        } catch (const std::domain_error &) {
        }
    }
    throw SamplingExhausted(cfg.max_retries);
}

} // namespace detail

/// Verified basis of the scale (or translation) exponent space.
inline SymmetryBasis find_symmetries(const Model &model, Kind kind, const SymmetryConfig &cfg = {}) {
    model.validate();
    const std::size_t n = model.n(), dim = model.coordinate_count();
    const std::size_t specializations =
        cfg.backend == Backend::points ? (dim + n - 1) / n + 1 : 1;

    ConditionMatrix cm{kind, Matrix(0, dim), {}};
    std::uint64_t next_point = 0;
    auto add_point = [&](Rng &rng) {
        std::vector<std::vector<Rational>> rows;
        cm.points.push_back(detail::sample_backend_point(model, kind, rng, cfg, rows));
        for (const auto &r : rows)
            cm.rows.append_row(r);
    };
    for (; next_point < specializations; ++next_point) {
        Rng rng = detail::stream(cfg.seed, kind, detail::purpose_kernel, next_point);
        add_point(rng);
    }

    for (int round = 0; round < cfg.rounds; ++round) {
        SymmetryBasis basis = kernel_basis(cm, model.coordinates());
        Rng vrng = detail::stream(cfg.seed, kind, detail::purpose_verify, static_cast<std::uint64_t>(round));
        std::vector<Assignment> witnesses;
        for (std::size_t g = 0; g < basis.m(); ++g) {
            auto w = find_witness(model, basis.generators[g], vrng, cfg.trials, cfg.bound, cfg.max_retries);
            basis.verified[g] = !w;
            if (w)
                witnesses.push_back(*w);
        }
        if (witnesses.empty()) {
            basis = reduce_exponents(std::move(basis), cfg.full_lll);
            basis.points = cm.points;
            return basis;
        }
        // Spurious kernel vectors: the sampled points were not generic.
        // Rows at the witnesses cut them out; fresh points add insurance.
        for (const auto &w : witnesses) {
            for (const auto &r : detail::backend_rows(model, kind, w, cfg))
                cm.rows.append_row(r);
            cm.points.push_back(w);
        }
        Rng rng = detail::stream(cfg.seed, kind, detail::purpose_kernel, next_point++);
        add_point(rng);
    }
    throw VerificationUnstable(cfg.rounds);
}

} // namespace nondim
