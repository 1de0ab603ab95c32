#pragma once

#include <vector>

namespace evcast {

/// Gaussian predictive distribution N(mu, delta^2); delta is the scale that
/// standardizes (y - mu)/delta everywhere in the scoring rules.
struct GaussianForecast {
    double mu = 0.0;
    double delta = 1.0;
};

/// Central prediction interval at probability p percent.
struct PiBand {
    double p = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Closed-form CRPS of a Gaussian forecast:
/// delta * ( z (2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi) ), z = (y - mu)/delta.
double crps_gaussian(const GaussianForecast& f, double y);

/// CRPS straight from its integral definition, evaluated by adaptive
/// quadrature: the squared CDF below the observation plus the squared
/// survival above it, integrated over a domain wide enough to cover both the
/// forecast and the observation. Absolute error at most 1e-8. Exists as an
/// independent check of the closed form.
double crps_oracle(const GaussianForecast& f, double y);

/// Interval score with the constant in-band penalty delta_param (the
/// literal published form). conventional=true swaps the constant for the
/// interval width, giving the textbook Winkler score.
double winkler(const GaussianForecast& f, double y, double p, double alpha = 0.1,
               double delta_param = 1.0, bool conventional = false);

/// Quantile loss for one quantile level against a realized value.
double pinball_loss(double q, double y, double y_hat);

struct PinballResult {
    std::vector<double> per_q;
    double average = 0.0;
};

/// Pinball losses at the forecast's quantiles y_hat_q = mu + delta *
/// inv_cdf(q) for each q in the set, plus their plain average.
PinballResult pinball(const GaussianForecast& f, double y, const std::vector<double>& quantiles);

/// Central interval: lower/upper quantiles at probabilities (1 -+ p/100)/2.
PiBand pi_bounds(const GaussianForecast& f, double p);

/// The default quantile grid for aggregate pinball reporting:
/// {0.05, 0.10, ..., 0.95}.
std::vector<double> quantile_grid();

/// The two quantiles bounding the central p-percent interval.
std::vector<double> pi_pair_quantiles(double p);

} // namespace evcast
