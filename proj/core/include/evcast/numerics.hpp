#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace evcast {

/// Flat numeric buffer. All model parameters and gradients are stored as
/// tensors so the optimizer can treat them uniformly.
using Tensor = std::vector<double>;

/// Dense row-major matrix over double.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Tensor a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    std::size_t size() const { return a.size(); }
};

/// out = M x
void matvec(const Matrix& m, std::span<const double> x, std::span<double> out);

/// out += M^T g. Used by backward passes to push a row-space gradient back
/// into the column space.
void matvec_transpose_add(const Matrix& m, std::span<const double> g, std::span<double> out);

/// M += g z^T
void outer_add(Matrix& m, std::span<const double> g, std::span<const double> z);

double dot(std::span<const double> x, std::span<const double> y);

/// Arithmetic mean. Throws ValidationError on empty input.
double mean_of(std::span<const double> xs);

/// Population standard deviation (divide by n).
double stddev_of(std::span<const double> xs);

/// First-moment/second-moment state for the Adam optimizer. One AdamState
/// instance tracks one fixed set of parameter tensors; the moment buffers are
/// allocated lazily on the first step.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

/// One Adam update over a set of parameter tensors with matching gradient
/// tensors. Applies bias correction with the shared step counter. Throws
/// ValidationError on shape mismatch and NumericError on non-finite
/// gradients.
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads,
               AdamState& state,
               double lr);

/// Standard normal CDF.
double normal_cdf(double z);

/// Standard normal density.
double normal_pdf(double z);

/// Inverse standard normal CDF on (0, 1). Rational initial guess refined by
/// one Halley step; absolute error of the round trip cdf(inv_cdf(p)) - p is
/// below 1e-9 across the open interval. Throws ValidationError outside (0,1).
double normal_inv_cdf(double p);

/// log(1 + exp(x)) computed without overflow.
double softplus(double x);

/// Counter-based deterministic random stream. The state is the triple
/// (seed, stream_id, counter); every draw hashes the triple, so streams can
/// be split hierarchically without any correlation between parent and child
/// and a stream's output depends only on its identity, never on global call
/// order.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();

    /// Uniform draw strictly inside (0, 1), suitable for inverse-CDF
    /// transforms.
    double next_unit();

    /// Derive an independent child stream. Deterministic in
    /// (seed, stream_id, child); does not advance this stream.
    RngStream split(std::uint64_t child) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t counter_ = 0;
    std::uint64_t key_ = 0;
};

/// Gaussian draw via the inverse-CDF transform, so one uniform consumes one
/// counter tick and the mapping from uniforms to normals is reproducible
/// across platforms. sd must be >= 0.
double rng_gaussian(RngStream& g, double mean, double sd);

} // namespace evcast
