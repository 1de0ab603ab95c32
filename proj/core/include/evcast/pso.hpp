#pragma once

#include "evcast/numerics.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace evcast {

/// Global-best particle swarm settings. The defaults are the tuning used for
/// the exploration inner loop: 20 particles, 100 iterations, cognitive and
/// social factors 2, inertia 0.7.
struct PsoConfig {
    std::size_t population = 20;
    std::size_t iterations = 100;
    double cognitive = 2.0;
    double social = 2.0;
    double inertia = 0.7;
};

struct PsoResult {
    Tensor best_x;
    double best_value = 0.0;
    /// Global best value after initialization and after each iteration;
    /// monotone nonincreasing by construction.
    std::vector<double> trace;
};

/// Minimizes f over the box given by per-dimension (lower, upper) bounds.
/// Velocities are clamped to 20% of each dimension's range and positions are
/// clamped back into the box, so every evaluated point respects the bounds.
/// The objective is evaluated population * (iterations + 1) times. Ties in
/// the global-best reduction go to the lowest particle index. Throws
/// NumericError if f returns a non-finite value.
PsoResult pso_minimize(const std::function<double(const Tensor&)>& f,
                       const std::vector<std::pair<double, double>>& bounds,
                       const PsoConfig& cfg, RngStream& rng);

} // namespace evcast
