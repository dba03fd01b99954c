#pragma once

// Translation stage, then scaling stage. Each stage renames the surviving
// coordinates to their invariants, replaces pivots by 1 (scale) or 0
// (translation) and is checked by exact evaluation before it is accepted.

#include "nondim/expr.hpp"
#include "nondim/generator.hpp"
#include "nondim/invar.hpp"
#include "nondim/odesys.hpp"
#include "nondim/poly.hpp"
#include "nondim/symfind.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nondim {

struct ReduceConfig {
    SymmetryConfig symmetry;
    std::vector<std::string> prefer;
    std::string prefix = "v_";
    int check_trials = 16;
};

/// An expression over the original model's symbols.
struct Definition {
    std::optional<ExprDag> dag; // absent when fractional powers occur
    std::string text;
};

struct CheckReport {
    bool chain_rule = true;
    bool invariance = true;
    std::optional<Assignment> witness;
    std::string message;

    bool passed() const { return chain_rule && invariance; }
};

struct Stage {
    Kind kind = Kind::scale;
    SymmetryBasis found;  // everything find_symmetries returned
    SymmetryBasis basis;  // generators acting on parameters, used for reduction
    EliminationResult elimination;
    InvariantSet invariants;
    Model input;
    Model output;
    std::map<std::string, std::string> renamed; // input symbol -> output symbol
    CheckReport check;
};

struct ReductionResult {
    Model original;
    std::vector<Stage> stages;
    Model reduced;
    std::vector<std::string> eliminated;          // stage symbols sent to 1 or 0
    std::vector<std::string> eliminated_original; // the same, over the original symbols
    std::vector<std::string> assumptions;
    std::size_t total_m = 0;
    std::map<std::string, Definition> coordinates; // reduced symbol -> original expression
    std::vector<std::string> diagnostics;
    CheckReport check;
};

class CheckFailed : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Basis of the generators whose action on the parameters is nontrivial:
// reduced row echelon form with parameter columns first, keeping rows with a
// parameter pivot.
inline SymmetryBasis parameter_acting(const SymmetryBasis &b, std::size_t first_param) {
    const std::size_t dim = b.coordinates.size();
    std::vector<std::size_t> perm;
    for (std::size_t c = first_param; c < dim; ++c)
        perm.push_back(c);
    for (std::size_t c = 0; c < first_param; ++c)
        perm.push_back(c);
    Matrix a(0, dim);
    for (const auto &g : b.generators) {
        std::vector<Rational> row(dim);
        for (std::size_t c = 0; c < dim; ++c)
            row[c] = g.alpha[perm[c]];
        a.append_row(row);
    }
    SymmetryBasis out = b;
    out.generators.clear();
    out.verified.clear();
    if (a.rows() == 0)
        return out;
    Echelon e = rref(a);
    std::vector<std::vector<Rational>> kept;
    for (std::size_t i = 0; i < e.pivots.size(); ++i) {
        if (e.pivots[i] >= dim - first_param)
            continue;
        std::vector<Rational> row(dim);
        for (std::size_t c = 0; c < dim; ++c)
            row[perm[c]] = e.reduced(i, c);
        kept.push_back(primitive_integer(row));
    }
    if (kept.size() == b.m())
        return b; // nothing dropped: keep the reduced original basis
    kept = size_reduce(kept);
    for (auto &v : kept) {
        canonical_sign(v);
        out.generators.push_back({b.kind, v});
        out.verified.push_back(true);
    }
    return out;
}

inline std::string fresh_name(const std::string &base, const std::set<std::string> &taken) {
    std::string s = base;
    while (taken.contains(s))
        s += "_";
    return s;
}

inline std::string render_normalized(const ExprDag &dag) {
    try {
        return render(normalize(dag));
    } catch (const SizeBoundExceeded &) {
        return render(dag);
    }
}

inline std::string parenthesize(const std::string &s) {
    bool simple = std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
    return simple ? s : "(" + s + ")";
}

// Image of a stage symbol, written over the original model's symbols.
inline Definition compose(const Image &im, const std::map<std::string, Definition> &defs) {
    bool dags = defs.at(im.symbol).dag.has_value();
    for (const auto &[s, c] : im.terms)
        dags = dags && defs.at(s).dag.has_value();
    if (im.integral() && dags) {
        std::map<std::string, ExprDag> subst;
        subst.emplace(im.symbol, *defs.at(im.symbol).dag);
        for (const auto &[s, c] : im.terms)
            subst.emplace(s, *defs.at(s).dag);
        ExprDag d = substitute(im.dag(), subst);
        return {d, render_normalized(d)};
    }
    std::string text = parenthesize(defs.at(im.symbol).text);
    for (const auto &[s, c] : im.terms) {
        if (im.kind == Kind::translation)
            text += " + (" + to_string(c) + ")*" + parenthesize(defs.at(s).text);
        else
            text += "*" + parenthesize(defs.at(s).text) + "^(" + to_string(c) + ")";
    }
    return {std::nullopt, text};
}

// Output model of a stage: every symbol renamed to its invariant, pivots
// replaced by the identity value of the group.
inline Model stage_output(const Model &in, const InvariantSet &inv, const std::map<std::string, std::string> &renamed) {
    Model out;
    out.name = in.name;
    out.time = renamed.at(in.time);
    for (const auto &s : in.states)
        out.states.push_back(renamed.at(s));
    for (const auto &p : in.params)
        if (std::find(inv.pivots.begin(), inv.pivots.end(), p) == inv.pivots.end())
            out.params.push_back(renamed.at(p));
    std::map<std::string, ExprDag> subst;
    for (const auto &y : in.coordinates()) {
        bool pivot = std::find(inv.pivots.begin(), inv.pivots.end(), y) != inv.pivots.end();
        subst.emplace(y, pivot ? make_constant(inv.kind == Kind::scale ? 1 : 0) : make_variable(renamed.at(y)));
    }
    for (const auto &f : in.rhs)
        out.rhs.push_back(substitute(f, subst));
    return out;
}

inline Integer exponent_denominator(const InvariantSet &inv) {
    Integer d = 1;
    for (const auto &im : inv.images)
        d = lcm(d, im.denominator_lcm());
    return d;
}

// Stage-input point: pivots are perfect D-th powers so every fractional
// power in the images is rational.
inline Assignment check_point(const Model &in, const InvariantSet &inv, Rng &rng, long bound) {
    Integer d = exponent_denominator(inv);
    Assignment p;
    for (const auto &y : in.coordinates()) {
        bool pivot = std::find(inv.pivots.begin(), inv.pivots.end(), y) != inv.pivots.end();
        if (pivot && d > 1 && inv.kind == Kind::scale) {
            Integer base = rng.uniform(2, 64);
            Integer v;
            mpz_pow_ui(v.get_mpz_t(), base.get_mpz_t(), d.get_ui());
            p[y] = Rational(v);
        } else {
            p[y] = Rational(rng.nonzero(bound));
        }
    }
    return p;
}

} // namespace detail

/// Checks one stage at `trials` random points of the stage input:
/// (a) d(image x_i)/d(image t) computed through the input system equals the
///     output right-hand side at the image point;
/// (b) every image has zero weight under the stage generators, and the
///     pulled-back output right-hand side is annihilated by them.
inline CheckReport check_stage(const Stage &stage, const Model &output, Rng &rng, int trials, long bound = 65536,
                               int max_retries = 64) {
    CheckReport rep;
    const Model &in = stage.input;
    const auto &inv = stage.invariants;
    const auto coords = in.coordinates();

    for (const auto &g : stage.basis.generators)
        for (const auto &im : inv.images)
            if (dot(inv.weight_vector(im, coords), g.alpha) != 0) {
                rep.invariance = false;
                rep.message = "image of '" + im.symbol + "' is not invariant";
                return rep;
            }

    int done = 0;
    for (int attempt = 0; done < trials; ++attempt) {
        if (attempt >= trials * max_retries)
            throw SamplingExhausted(attempt);
        Assignment p = detail::check_point(in, inv, rng, bound);
        Assignment q; // image point, over output symbols
        std::map<std::string, Rational> factors;
        bool ok = true;
        for (const auto &im : inv.images) {
            auto v = im.evaluate(p);
            auto f = im.factor(p);
            if (!v || !f) {
                ok = false;
                break;
            }
            factors[im.symbol] = *f;
            if (!im.is_pivot)
                q[stage.renamed.at(im.symbol)] = *v;
        }
        if (!ok)
            continue;
        std::vector<Rational> lhs, rhs;
        std::vector<Gradient<Rational>> grads;
        try {
            for (std::size_t i = 0; i < in.n(); ++i) {
                Rational fi = evaluate(in.rhs[i], p);
                grads.push_back(gradient(output.rhs[i], q));
                if (inv.kind == Kind::scale) {
                    lhs.push_back(factors.at(in.states[i]) * fi);
                    rhs.push_back(factors.at(in.time) * grads.back().value);
                } else {
                    lhs.push_back(fi);
                    rhs.push_back(grads.back().value);
                }
            }
        } catch (const PoleError &) {
            continue;
        } catch (const std::out_of_range &e) {
            rep.chain_rule = false;
            rep.witness = p;
            rep.message = std::string("reduced system uses a symbol outside the invariants: ") + e.what();
            return rep;
        }
        ++done;
        for (std::size_t i = 0; i < in.n(); ++i) {
            if (lhs[i] != rhs[i]) {
                rep.chain_rule = false;
                rep.witness = p;
                rep.message = "chain rule mismatch in equation for '" + in.states[i] + "'";
                return rep;
            }
        }
        // S(g_i o I) = sum_z dg_i/dz * S(I_z), with S(I_z) = weight * I_z for
        // monomial images and the weight itself for affine ones.
        for (const auto &g : stage.basis.generators) {
            for (std::size_t i = 0; i < in.n(); ++i) {
                Rational s = 0;
                for (const auto &im : inv.images) {
                    if (im.is_pivot)
                        continue;
                    const std::string &z = stage.renamed.at(im.symbol);
                    Rational w = dot(inv.weight_vector(im, coords), g.alpha);
                    s += grads[i].partials.at(z) * (inv.kind == Kind::scale ? w * q.at(z) : w);
                }
                if (s != 0) {
                    rep.invariance = false;
                    rep.witness = p;
                    rep.message = "reduced equation for '" + in.states[i] + "' is not invariant";
                    return rep;
                }
            }
        }
    }
    return rep;
}

/// Checks every stage; the last stage is checked against result.reduced.
inline CheckReport check_reduction(const ReductionResult &result, Rng &rng, int trials = 16, long bound = 65536) {
    CheckReport total;
    for (std::size_t k = 0; k < result.stages.size(); ++k) {
        const Stage &st = result.stages[k];
        const Model &out = k + 1 == result.stages.size() ? result.reduced : st.output;
        if (out.n() != st.input.n()) {
            total.chain_rule = false;
            total.message = "reduced system has a different number of equations";
            return total;
        }
        CheckReport r = check_stage(st, out, rng, trials, bound);
        if (!r.passed()) {
            r.message = to_string(st.kind) + " stage: " + r.message;
            return r;
        }
    }
    return total;
}

inline ReductionResult reduce_system(const Model &model, const ReduceConfig &cfg = {}) {
    model.validate();
    for (const auto &p : cfg.prefer)
        if (std::find(model.params.begin(), model.params.end(), p) == model.params.end())
            throw std::invalid_argument("--prefer: '" + p + "' is not a parameter of the model");

    ReductionResult res;
    res.original = model;
    std::set<std::string> taken;
    for (const auto &y : model.coordinates())
        taken.insert(y);
    std::map<std::string, Definition> defs;   // current symbol -> original expression
    std::map<std::string, std::string> origin; // current symbol -> original symbol
    std::set<std::string> fresh;               // symbols introduced by a stage
    for (const auto &y : model.coordinates()) {
        defs[y] = {make_variable(y), y};
        origin[y] = y;
    }

    Model current = model;
    for (Kind kind : {Kind::translation, Kind::scale}) {
        Stage st;
        st.kind = kind;
        st.input = current;
        st.found = find_symmetries(current, kind, cfg.symmetry);
        st.basis = detail::parameter_acting(st.found, 1 + current.n());
        if (st.basis.m() < st.found.m())
            res.diagnostics.push_back(to_string(kind) + ": " + std::to_string(st.found.m() - st.basis.m()) +
                                      " generator(s) act on time or states only and are not used");
        if (st.basis.m() == 0) {
            if (st.found.m() == 0)
                res.diagnostics.push_back(to_string(kind) + ": no symmetry found");
            continue;
        }
        std::vector<std::string> prefer;
        for (const auto &p : current.params)
            if (std::find(cfg.prefer.begin(), cfg.prefer.end(), origin.at(p)) != cfg.prefer.end())
                prefer.push_back(p);
        // Translations are normalized onto the last declared parameters so
        // that the leading ones survive as differences (a - c rather than c - a).
        auto pivots = select_pivots(st.basis, current.params, prefer,
                                    kind == Kind::scale ? TieOrder::declaration : TieOrder::reverse_declaration);
        st.elimination = eliminate(exponent_matrix(st.basis, current.params), pivots);
        st.invariants = normalizing_substitution(st.elimination, st.basis);

        std::map<std::string, Definition> next_defs;
        std::map<std::string, std::string> next_origin;
        const bool fractional = kind == Kind::scale && detail::exponent_denominator(st.invariants) > 1;
        for (const auto &im : st.invariants.images) {
            if (im.is_pivot) {
                const std::string &text = defs.at(im.symbol).text;
                if (kind == Kind::scale) {
                    res.assumptions.push_back(text + " != 0");
                    if (fractional)
                        res.assumptions.push_back(text + " > 0");
                }
                res.eliminated.push_back(im.symbol);
                res.eliminated_original.push_back(text);
                continue;
            }
            Definition d = detail::compose(im, defs);
            std::string name = fresh.contains(im.symbol) ? im.symbol
                                                         : detail::fresh_name(cfg.prefix + origin.at(im.symbol), taken);
            taken.insert(name);
            fresh.insert(name);
            st.renamed[im.symbol] = name;
            next_defs[name] = std::move(d);
            next_origin[name] = origin.at(im.symbol);
        }
        st.output = detail::stage_output(current, st.invariants, st.renamed);
        Rng rng = detail::stream(cfg.symmetry.seed, kind, 3, 0);
        st.check = check_stage(st, st.output, rng, cfg.check_trials, cfg.symmetry.bound);
        if (!st.check.passed())
            throw CheckFailed(to_string(kind) + " stage failed its check: " + st.check.message);
        res.total_m += st.basis.m();
        defs = std::move(next_defs);
        origin = std::move(next_origin);
        current = st.output;
        res.stages.push_back(std::move(st));
    }
    res.reduced = current;
    for (const auto &y : res.reduced.coordinates())
        res.coordinates[y] = defs.at(y);
    Rng rng = detail::stream(cfg.symmetry.seed, Kind::scale, 4, 0);
    res.check = check_reduction(res, rng, cfg.check_trials, cfg.symmetry.bound);
    return res;
}

} // namespace nondim
