#include "evcast/pso.hpp"

#include "evcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace evcast {

namespace {

std::string point_text(const Tensor& x) {
    std::string s = "[";
    char buf[40];
    for (std::size_t d = 0; d < x.size(); ++d) {
        std::snprintf(buf, sizeof buf, "%.17g", x[d]);
        if (d > 0) s += ", ";
        s += buf;
    }
    s += "]";
    return s;
}

double checked_eval(const std::function<double(const Tensor&)>& f, const Tensor& x) {
    const double v = f(x);
    if (!std::isfinite(v))
        throw NumericError("pso_minimize: objective is not finite at " + point_text(x));
    return v;
}

} // namespace

PsoResult pso_minimize(const std::function<double(const Tensor&)>& f,
                       const std::vector<std::pair<double, double>>& bounds,
                       const PsoConfig& cfg, RngStream& rng) {
    if (!f) throw ValidationError("pso_minimize: missing objective");
    if (bounds.empty()) throw ValidationError("pso_minimize: no dimensions");
    if (cfg.population == 0) throw ValidationError("pso_minimize: population must be positive");
    for (const auto& [lo, hi] : bounds) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw ValidationError("pso_minimize: bounds must be finite with lower < upper");
    }
    if (!std::isfinite(cfg.inertia) || !std::isfinite(cfg.cognitive) || !std::isfinite(cfg.social))
        throw ValidationError("pso_minimize: non-finite swarm factors");

    const std::size_t dim = bounds.size();
    const std::size_t pop = cfg.population;

    std::vector<Tensor> x(pop, Tensor(dim, 0.0));
    std::vector<Tensor> v(pop, Tensor(dim, 0.0));
    std::vector<Tensor> pbest(pop);
    Tensor pbest_val(pop, 0.0);

    for (std::size_t p = 0; p < pop; ++p) {
        for (std::size_t d = 0; d < dim; ++d) {
            const auto [lo, hi] = bounds[d];
            x[p][d] = lo + rng.next_unit() * (hi - lo);
        }
        pbest[p] = x[p];
        pbest_val[p] = checked_eval(f, x[p]);
    }

    std::size_t gbest = 0;
    for (std::size_t p = 1; p < pop; ++p)
        if (pbest_val[p] < pbest_val[gbest]) gbest = p;
    Tensor gbest_x = pbest[gbest];
    double gbest_val = pbest_val[gbest];

    PsoResult result;
    result.trace.reserve(cfg.iterations + 1);
    result.trace.push_back(gbest_val);

    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        for (std::size_t p = 0; p < pop; ++p) {
            for (std::size_t d = 0; d < dim; ++d) {
                const auto [lo, hi] = bounds[d];
                const double range = hi - lo;
                const double r1 = rng.next_unit();
                const double r2 = rng.next_unit();
                double vel = cfg.inertia * v[p][d] + cfg.cognitive * r1 * (pbest[p][d] - x[p][d]) +
                             cfg.social * r2 * (gbest_x[d] - x[p][d]);
                const double vmax = 0.2 * range;
                vel = std::clamp(vel, -vmax, vmax);
                v[p][d] = vel;
                x[p][d] = std::clamp(x[p][d] + vel, lo, hi);
            }
            const double val = checked_eval(f, x[p]);
            if (val < pbest_val[p]) {
                pbest_val[p] = val;
                pbest[p] = x[p];
            }
        }
        std::size_t best = 0;
        for (std::size_t p = 1; p < pop; ++p)
            if (pbest_val[p] < pbest_val[best]) best = p;
        gbest_x = pbest[best];
        gbest_val = pbest_val[best];
        result.trace.push_back(gbest_val);
    }

    result.best_x = gbest_x;
    result.best_value = gbest_val;
    return result;
}

} // namespace evcast
