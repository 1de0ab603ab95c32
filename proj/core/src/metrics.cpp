#include "evcast/metrics.hpp"

#include "evcast/error.hpp"
#include "evcast/numerics.hpp"

#include <cmath>
#include <string>

namespace evcast {

namespace {

constexpr double kInvSqrtPi = 0.5641895835477563;

void require_forecast(const GaussianForecast& f, const char* op) {
    if (!std::isfinite(f.mu) || !std::isfinite(f.delta))
        throw ValidationError(std::string(op) + ": forecast must be finite");
    if (!(f.delta > 0.0))
        throw ValidationError(std::string(op) + ": delta must be positive");
}

/// Iterative adaptive Simpson with an explicit segment stack. Structured
/// differently from any recursive variant on purpose; this copy backs the
/// oracle, so it should not share failure modes with other integrators.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double eps) {
    if (a >= b) return 0.0;
    struct Segment {
        double a, b, fa, fm, fb, whole, eps;
    };
    auto simpson = [](double a0, double b0, double fa, double fm, double fb) {
        return (b0 - a0) / 6.0 * (fa + 4.0 * fm + fb);
    };

    std::vector<Segment> stack;
    {
        const double m = 0.5 * (a + b);
        const double fa = f(a), fm = f(m), fb = f(b);
        stack.push_back({a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), eps});
    }
    double total = 0.0;
    std::size_t expansions = 0;
    while (!stack.empty()) {
        const Segment s = stack.back();
        stack.pop_back();
        const double m = 0.5 * (s.a + s.b);
        const double lm = 0.5 * (s.a + m);
        const double rm = 0.5 * (m + s.b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = simpson(s.a, m, s.fa, flm, s.fm);
        const double right = simpson(m, s.b, s.fm, frm, s.fb);
        const double diff = left + right - s.whole;
        if (std::fabs(diff) <= 15.0 * s.eps) {
            total += left + right + diff / 15.0;
            continue;
        }
        if (++expansions > 2000000)
            throw NumericError("crps_oracle: quadrature failed to converge");
        stack.push_back({s.a, m, s.fa, flm, s.fm, left, 0.5 * s.eps});
        stack.push_back({m, s.b, s.fm, frm, s.fb, right, 0.5 * s.eps});
    }
    return total;
}

} // namespace

double crps_gaussian(const GaussianForecast& f, double y) {
    require_forecast(f, "crps_gaussian");
    if (!std::isfinite(y)) throw ValidationError("crps_gaussian: y must be finite");
    const double z = (y - f.mu) / f.delta;
    return f.delta * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

double crps_oracle(const GaussianForecast& f, double y) {
    require_forecast(f, "crps_oracle");
    if (!std::isfinite(y)) throw ValidationError("crps_oracle: y must be finite");

    const double lo = std::min(f.mu, y) - 10.0 * f.delta;
    const double hi = std::max(f.mu, y) + 10.0 * f.delta;
    auto cdf = [&f](double x) { return normal_cdf((x - f.mu) / f.delta); };
    auto below = [&cdf](double x) {
        const double c = cdf(x);
        return c * c;
    };
    auto above = [&cdf](double x) {
        const double c = 1.0 - cdf(x);
        return c * c;
    };
    return adaptive_simpson(below, lo, y, 5e-9) + adaptive_simpson(above, y, hi, 5e-9);
}

double winkler(const GaussianForecast& f, double y, double p, double alpha, double delta_param,
               bool conventional) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("winkler: alpha must be in (0,1)");
    const PiBand band = pi_bounds(f, p);
    const double base = conventional ? band.upper - band.lower : delta_param;
    if (y < band.lower) return 2.0 * (band.lower - y) / alpha + base;
    if (y > band.upper) return 2.0 * (y - band.upper) / alpha + base;
    return base;
}

double pinball_loss(double q, double y, double y_hat) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("pinball_loss: q must be in (0,1)");
    if (y_hat < y) return (y - y_hat) * q;
    return (y_hat - y) * (1.0 - q);
}

PinballResult pinball(const GaussianForecast& f, double y, const std::vector<double>& quantiles) {
    require_forecast(f, "pinball");
    if (quantiles.empty()) throw ValidationError("pinball: quantile set must not be empty");

    PinballResult out;
    out.per_q.reserve(quantiles.size());
    double acc = 0.0;
    for (const double q : quantiles) {
        const double y_hat = f.mu + f.delta * normal_inv_cdf(q);
        const double v = pinball_loss(q, y, y_hat);
        out.per_q.push_back(v);
        acc += v;
    }
    out.average = acc / static_cast<double>(quantiles.size());
    return out;
}

PiBand pi_bounds(const GaussianForecast& f, double p) {
    require_forecast(f, "pi_bounds");
    if (!(p > 0.0 && p < 100.0))
        throw ValidationError("pi_bounds: p must lie strictly between 0 and 100");

    PiBand band;
    band.p = p;
    band.lower = f.mu + f.delta * normal_inv_cdf((1.0 - p / 100.0) / 2.0);
    band.upper = f.mu + f.delta * normal_inv_cdf((1.0 + p / 100.0) / 2.0);
    return band;
}

std::vector<double> quantile_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(static_cast<double>(i) * 0.05);
    return grid;
}

std::vector<double> pi_pair_quantiles(double p) {
    if (!(p > 0.0 && p < 100.0))
        throw ValidationError("pi_pair_quantiles: p must lie strictly between 0 and 100");
    return {(1.0 - p / 100.0) / 2.0, (1.0 + p / 100.0) / 2.0};
}

} // namespace evcast
