#pragma once

#include "nondim/expr.hpp"
#include "nondim/linalg.hpp"
#include "nondim/rational.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nondim {

/// Scalings y -> lambda^alpha_y * y, or translations y -> y + alpha_y * lambda.
enum class Kind { scale, translation };

inline std::string to_string(Kind k) { return k == Kind::scale ? "scale" : "translation"; }

inline Kind parse_kind(const std::string &s) {
    if (s == "scale")
        return Kind::scale;
    if (s == "translation")
        return Kind::translation;
    throw std::invalid_argument("unknown symmetry kind '" + s + "'");
}

/// One infinitesimal generator: exponent (or shift) vector over the model's
/// coordinate order (t, X, Theta).
struct Generator {
    Kind kind = Kind::scale;
    std::vector<Rational> alpha;

    friend bool operator==(const Generator &, const Generator &) = default;
};

struct SymmetryBasis {
    Kind kind = Kind::scale;
    std::vector<std::string> coordinates;
    std::vector<Generator> generators;
    std::vector<bool> verified;
    std::vector<Assignment> points; // specializations the kernel came from

    std::size_t m() const { return generators.size(); }

    Matrix matrix() const {
        Matrix a(0, coordinates.size());
        for (const auto &g : generators)
            a.append_row(g.alpha);
        return a;
    }
};

enum class Backend { points, series };

struct SymmetryConfig {
    std::uint64_t seed = 0;
    long bound = 65536;   // coordinates drawn from [-bound, bound] \ {0}
    int trials = 8;       // fresh points per generator verification
    int max_retries = 64; // redraws on division by zero
    int rounds = 3;       // kernel/verify rounds before giving up
    Backend backend = Backend::points;
    int jet_order = 0;    // series backend; 0 means n + l + 1
    bool full_lll = false;
};

class SamplingExhausted : public std::runtime_error {
  public:
    explicit SamplingExhausted(int attempts)
        : std::runtime_error("no pole-free specialization found after " + std::to_string(attempts) +
                             " attempts; the system's denominators vanish on every sampled point") {}
};

class VerificationUnstable : public std::runtime_error {
  public:
    explicit VerificationUnstable(int rounds)
        : std::runtime_error("symmetry verification did not stabilize after " + std::to_string(rounds) +
                             " rounds (probable degenerate input)") {}
};

/// Deterministic random source. Streams derived from one 64-bit seed are
/// independent of scheduling.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    Rng split(std::uint64_t stream) { return Rng(next() ^ mix(stream)); }

    std::uint64_t next() { return engine_(); }

    /// Uniform on [-bound, bound] \ {0}.
    long nonzero(long bound) {
        if (bound < 1)
            throw std::invalid_argument("sampling bound must be positive");
        auto span = static_cast<std::uint64_t>(2 * bound);
        long v = static_cast<long>(next() % span) - bound;
        return v >= 0 ? v + 1 : v;
    }

    /// Uniform on [lo, hi].
    long uniform(long lo, long hi) {
        auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<long>(next() % span);
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace nondim
