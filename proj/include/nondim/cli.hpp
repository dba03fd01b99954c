#pragma once

// Front end of the `nondim` tool. Needs CLI11.hpp and json.hpp on the
// include path.

#include "nondim/reduce.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace nondim::cli {

enum Exit : int { ok = 0, input_error = 2, no_symmetry = 3, check_failure = 4 };

struct RunConfig {
    std::string command;
    std::string file;
    std::string kind = "both";
    std::vector<std::string> prefer;
    std::optional<std::uint64_t> seed;
    long bound = 65536;
    int trials = 8;
    std::string backend = "points";
    int jet_order = 0;
    bool lll = false;
    bool check = false;
    bool json = false;

    SymmetryConfig symmetry(std::uint64_t resolved_seed) const {
        SymmetryConfig c;
        c.seed = resolved_seed;
        c.bound = bound;
        c.trials = trials;
        c.backend = backend == "series" ? Backend::series : Backend::points;
        c.jet_order = jet_order;
        c.full_lll = lll;
        return c;
    }
};

using nlohmann::ordered_json;

inline ordered_json rational_json(const Rational &q) {
    if (is_integer(q) && q.get_num().fits_slong_p())
        return q.get_num().get_si();
    return to_string(q);
}

inline ordered_json vector_json(const std::vector<Rational> &v) {
    ordered_json a = ordered_json::array();
    for (const auto &x : v)
        a.push_back(rational_json(x));
    return a;
}

inline ordered_json basis_json(const SymmetryBasis &b) {
    ordered_json g = ordered_json::array();
    for (const auto &gen : b.generators)
        g.push_back(vector_json(gen.alpha));
    return {{"kind", to_string(b.kind)}, {"m", b.m()}, {"generators", g}};
}

inline std::string pass(bool b) { return b ? "pass" : "fail"; }

inline ordered_json report_json(const ReductionResult &r, std::uint64_t seed) {
    ordered_json stages = ordered_json::array();
    for (const auto &st : r.stages) {
        ordered_json s = basis_json(st.basis);
        s["coordinates"] = st.basis.coordinates;
        s["pivots"] = st.invariants.pivots;
        ordered_json inv = ordered_json::array();
        for (const auto &im : st.invariants.images) {
            if (im.is_pivot)
                continue;
            inv.push_back({{"symbol", st.renamed.at(im.symbol)}, {"expression", im.render()}});
        }
        s["invariants"] = inv;
        ordered_json pi = ordered_json::array();
        for (const auto &v : st.invariants.param_invariants)
            pi.push_back(vector_json(v));
        s["parameter_invariants"] = pi;
        stages.push_back(s);
    }
    ordered_json coords = ordered_json::object();
    for (const auto &y : r.reduced.coordinates())
        coords[y] = r.coordinates.at(y).text;
    return {
        {"command", "reduce"},
        {"model", r.original.name},
        {"seed", seed},
        {"stages", stages},
        {"total_m", r.total_m},
        {"eliminated", r.eliminated},
        {"eliminated_original", r.eliminated_original},
        {"coordinates", coords},
        {"reduced_model_text", render_model(r.reduced, true)},
        {"assumptions", r.assumptions},
        {"checks", {{"chain_rule", pass(r.check.chain_rule)}, {"invariance", pass(r.check.invariance)}}},
        {"diagnostics", r.diagnostics},
    };
}

inline std::string generator_table(const SymmetryBasis &b) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({""});
    for (const auto &c : b.coordinates)
        cells.back().push_back(c);
    for (std::size_t g = 0; g < b.m(); ++g) {
        cells.push_back({(b.kind == Kind::scale ? "S" : "T") + std::to_string(g + 1)});
        for (const auto &a : b.generators[g].alpha)
            cells.back().push_back(to_string(a));
    }
    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto &row : cells)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());
    std::ostringstream os;
    for (const auto &row : cells) {
        os << "  " << std::left << std::setw(static_cast<int>(width[0])) << row[0];
        for (std::size_t c = 1; c < row.size(); ++c)
            os << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
        os << "\n";
    }
    return os.str();
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline int cmd_symmetries(const Model &model, const RunConfig &cfg, std::uint64_t seed, std::ostream &out) {
    std::vector<Kind> kinds;
    if (cfg.kind != "translation")
        kinds.push_back(Kind::scale);
    if (cfg.kind != "scale")
        kinds.push_back(Kind::translation);
    std::size_t total = 0;
    ordered_json found = ordered_json::array();
    std::ostringstream text;
    const std::string name = model.name.empty() ? cfg.file : model.name;
    for (Kind k : kinds) {
        SymmetryBasis b = find_symmetries(model, k, cfg.symmetry(seed));
        total += b.m();
        found.push_back(basis_json(b));
        if (b.m() == 0) {
            text << name << ": " << to_string(k) << " symmetries: none found\n";
        } else {
            text << name << ": " << to_string(k) << " symmetries, m = " << b.m() << "\n" << generator_table(b);
        }
    }
    if (cfg.json) {
        ordered_json j = {{"command", "symmetries"},
                          {"model", model.name},
                          {"seed", seed},
                          {"coordinates", model.coordinates()},
                          {"symmetries", found}};
        out << j.dump(2) << "\n";
    } else {
        out << text.str() << "seed " << seed << "\n";
    }
    return total > 0 ? ok : no_symmetry;
}

inline int cmd_reduce(const Model &model, const RunConfig &cfg, std::uint64_t seed, std::ostream &out,
                      std::ostream &err) {
    ReduceConfig rc;
    rc.symmetry = cfg.symmetry(seed);
    rc.prefer = cfg.prefer;
    ReductionResult r = reduce_system(model, rc);
    if (cfg.check) {
        Rng rng(Rng::mix(seed) ^ 0xc4ecULL);
        CheckReport again = check_reduction(r, rng, 16, cfg.bound);
        if (!again.passed())
            r.check = again;
    }
    for (const auto &d : r.diagnostics)
        err << "note: " << d << "\n";
    if (cfg.json) {
        out << report_json(r, seed).dump(2) << "\n";
    } else {
        out << render_model(r.reduced, true);
        out << "# " << r.total_m << " parameter(s) eliminated";
        if (!r.eliminated.empty()) {
            out << ":";
            for (std::size_t i = 0; i < r.eliminated.size(); ++i)
                out << (i ? ", " : " ") << r.eliminated_original[i];
        }
        out << "\n";
        if (r.total_m > 0) {
            out << "# coordinates:\n";
            for (const auto &y : r.reduced.coordinates())
                out << "#   " << y << " = " << r.coordinates.at(y).text << "\n";
        }
        if (!r.assumptions.empty()) {
            out << "# assuming:\n";
            for (const auto &a : r.assumptions)
                out << "#   " << a << "\n";
        }
        if (cfg.check)
            out << "# check: chain rule " << pass(r.check.chain_rule) << ", invariance " << pass(r.check.invariance)
                << "\n";
        out << "# seed " << seed << "\n";
    }
    if (!r.check.passed()) {
        err << "error: check failed: " << r.check.message << "\n";
        return check_failure;
    }
    return r.total_m > 0 ? ok : no_symmetry;
}

/// Runs one command line (without the program name).
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Scale and translation symmetries of parametric ODE systems, and the reduced systems they give.",
                 "nondim"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::uint64_t seed_value = 0;

    auto common = [&](CLI::App *sub) {
        sub->add_option("file", cfg.file, "model file")->required();
        sub->add_option("--seed", seed_value, "64-bit seed (default: drawn from entropy)");
        sub->add_option("--bound", cfg.bound, "sample coordinates from [-B, B] without 0")
            ->check(CLI::Range(1L, 1L << 40));
        sub->add_option("--trials", cfg.trials, "fresh points per generator verification")
            ->check(CLI::Range(1, 1000));
        sub->add_option("--backend", cfg.backend, "condition rows from many points or one series")
            ->check(CLI::IsMember({"points", "series"}));
        sub->add_option("--jet-order", cfg.jet_order, "series backend derivative order (0: n + l + 1)")
            ->check(CLI::Range(0, 64));
        sub->add_flag("--lll", cfg.lll, "full LLL reduction of the exponent basis");
        sub->add_flag("--json", cfg.json, "machine-readable output");
    };
    CLI::App *sym = app.add_subcommand("symmetries", "list scale and translation symmetries");
    common(sym);
    sym->add_option("--kind", cfg.kind, "symmetry kind")->check(CLI::IsMember({"scale", "translation", "both"}));
    CLI::App *red = app.add_subcommand("reduce", "rewrite the system in invariant coordinates");
    common(red);
    red->add_option("--prefer", cfg.prefer, "parameters to eliminate first")->delimiter(',');
    red->add_flag("--check", cfg.check, "recheck the reduction and report it");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }
    cfg.command = sym->parsed() ? "symmetries" : "reduce";
    CLI::App *active = sym->parsed() ? sym : red;
    if (active->count("--seed"))
        cfg.seed = seed_value;
    const std::uint64_t seed = cfg.seed ? *cfg.seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();

    Model model;
    try {
        model = parse_model(read_file(cfg.file));
        model.validate();
    } catch (const ParseError &e) {
        err << cfg.file << ":" << e.what() << "\n";
        return input_error;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }

    try {
        return cfg.command == "symmetries" ? cmd_symmetries(model, cfg, seed, out) : cmd_reduce(model, cfg, seed, out, err);
    } catch (const CheckFailed &e) {
        err << "error: " << e.what() << "\n";
        return check_failure;
    } catch (const SamplingExhausted &e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const VerificationUnstable &e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }
}

} // namespace nondim::cli
