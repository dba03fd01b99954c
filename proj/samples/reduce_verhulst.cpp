// Reduces the logistic model with linear predation and prints the result.

#include "nondim/nondim.hpp"

#include <iostream>

int main() {
    const char *text = R"(
        model verhulst;
        state x;
        param a, b, c;
        d/dt x = x*(a - b*x) - c*x;
    )";
    nondim::Model model = nondim::parse_model(text);

    nondim::ReduceConfig cfg;
    cfg.symmetry.seed = 1;
    nondim::ReductionResult r = nondim::reduce_system(model, cfg);

    std::cout << nondim::render_model(r.reduced, true);
    for (const auto &y : r.reduced.coordinates())
        std::cout << "# " << y << " = " << r.coordinates.at(y).text << "\n";
    for (const auto &a : r.assumptions)
        std::cout << "# assuming " << a << "\n";
    return r.check.passed() ? 0 : 1;
}
