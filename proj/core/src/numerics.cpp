#include "evcast/numerics.hpp"

#include "evcast/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace evcast {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;

void require(bool cond, const char* msg) {
    if (!cond) throw ValidationError(msg);
}

} // namespace

void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
    require(x.size() == m.cols && out.size() == m.rows, "matvec: shape mismatch");
    const double* row = m.a.data();
    for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
}

void matvec_transpose_add(const Matrix& m, std::span<const double> g, std::span<double> out) {
    require(g.size() == m.rows && out.size() == m.cols, "matvec_transpose_add: shape mismatch");
    const double* row = m.a.data();
    for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
        const double gi = g[i];
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j] * gi;
    }
}

void outer_add(Matrix& m, std::span<const double> g, std::span<const double> z) {
    require(g.size() == m.rows && z.size() == m.cols, "outer_add: shape mismatch");
    double* row = m.a.data();
    for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
        const double gi = g[i];
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += gi * z[j];
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

double mean_of(std::span<const double> xs) {
    require(!xs.empty(), "mean_of: empty input");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double stddev_of(std::span<const double> xs) {
    const double mu = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads,
               AdamState& state,
               double lr) {
    require(params.size() == grads.size(), "adam_step: params/grads count mismatch");
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t k = 0; k < params.size(); ++k) {
            state.m[k].assign(params[k]->size(), 0.0);
            state.v[k].assign(params[k]->size(), 0.0);
        }
    }
    require(state.m.size() == params.size(), "adam_step: state tracks a different parameter set");

    state.step_count += 1;
    const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        require(p.size() == g.size() && p.size() == state.m[k].size(),
                "adam_step: tensor shape mismatch");
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i];
            if (!std::isfinite(gi)) throw NumericError("adam_step: non-finite gradient");
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
            const double mhat = m[i] / corr1;
            const double vhat = v[i] / corr2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / kSqrt2);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / kSqrt2Pi;
}

double normal_inv_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ValidationError("normal_inv_cdf: p must lie strictly inside (0,1), got " +
                              std::to_string(p));
    }

    // Rational approximation due to Acklam; relative error below 1.2e-9
    // before refinement.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    const double p_high = 1.0 - p_low;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= p_high) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step against the exact CDF. Skipped if the intermediate
    // overflows in the far tails, where the initializer is already at the
    // limit of double precision.
    const double e = normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    if (std::isfinite(u)) {
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

namespace {

/// 64-bit finalizer with full avalanche (the splitmix64 output stage).
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    key_ = mix64(seed_ + kGolden) ^ mix64(stream_id_ + 0xD1B54A32D192ED03ULL);
}

std::uint64_t RngStream::next_u64() {
    counter_ += 1;
    return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_unit() {
    // 53 significant bits, shifted into the open interval by the half-ulp
    // offset so inverse-CDF transforms never see 0 or 1.
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

RngStream RngStream::split(std::uint64_t child) const {
    RngStream out;
    out.seed_ = seed_;
    out.stream_id_ = mix64(stream_id_ + kGolden) ^ mix64(child + 0x8CB92BA72F3D8DD7ULL);
    out.counter_ = 0;
    out.key_ = mix64(out.seed_ + kGolden) ^ mix64(out.stream_id_ + 0xD1B54A32D192ED03ULL);
    return out;
}

double rng_gaussian(RngStream& g, double mean, double sd) {
    if (!(sd >= 0.0)) throw ValidationError("rng_gaussian: sd must be >= 0");
    return mean + sd * normal_inv_cdf(g.next_unit());
}

} // namespace evcast
