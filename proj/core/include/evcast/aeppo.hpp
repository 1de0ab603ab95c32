#pragma once

#include "evcast/env.hpp"
#include "evcast/numerics.hpp"
#include "evcast/ppo.hpp"
#include "evcast/pso.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace evcast {

/// Blend weights that trade mean reward against reward spread while training
/// progresses. The pair moves along a quarter circle from (0, 1) to (1, 0):
/// early iterations put all weight on the spread of rewards (exploration),
/// late iterations on their mean (exploitation).
struct BPair {
    double b1 = 0.0;
    double b2 = 1.0;
};

/// b1 ramps linearly from 0 at k = 0 to 1 at k = n_e, and b2 follows the
/// circle constraint (b1 - 1)^2 + (b2 - 1)^2 = 1. The two weights cross at
/// 1 - 1/sqrt(2). Throws ValidationError when n_e is zero or k exceeds n_e.
BPair b_schedule(std::size_t k, std::size_t n_e);

/// Sample statistics of a batch of action rewards.
struct MomentEstimate {
    double r_mean = 0.0;
    double r_var = 0.0;
    std::size_t n_samples = 0;
};

/// Mean and unbiased sample variance (n - 1 denominator). Requires at least
/// two rewards.
MomentEstimate moments_from_rewards(std::span<const double> rewards);

/// Draws n_a actions from a Gaussian centered on a_mean with the given scale
/// as standard deviation, scores each with the episode's reward at its
/// current step, and returns the reward moments. The episode never advances.
MomentEstimate reward_moments(const Episode& ep, double a_mean, double scale,
                              std::size_t n_a, RngStream& rng);

/// f = b1 * r_mean + b2 * r_var, linear in both moments.
double exploration_fitness(const BPair& b, const MomentEstimate& m);

/// One state of the exploration objective: the actor mean at that state plus
/// the forecast and outcome needed to score candidate actions there.
struct ExplorationPoint {
    double a_mean = 0.0;
    double y_hat_next = 0.0;
    double y_next = 0.0;
};

/// Deterministic objective for the sampling-scale search. The standard normal
/// draws are fixed up front, so every candidate scale is scored against the
/// same noise and the objective is an ordinary function of the scale.
struct ExplorationProblem {
    BPair b;
    double zeta = 0.75;
    std::size_t n_a = 0;
    std::vector<ExplorationPoint> points;
    /// One row of n_a standard normal draws per point.
    std::vector<Tensor> draws;

    /// Mean exploration fitness over the points when actions are sampled as
    /// a_mean + scale * z.
    double fitness(double scale) const;
};

/// Samples state_batch records with replacement, evaluates the actor mean at
/// each, and freezes the noise draws for the scale search.
ExplorationProblem make_exploration_problem(std::span<const EnvRecord> records,
                                            const MlpParams& actor, const BPair& b,
                                            double zeta, std::size_t n_a,
                                            std::size_t state_batch, RngStream& rng);

/// Maximizes the exploration fitness over the sampling scale within
/// [scale_min, scale_max] using particle swarm search. Repeated evaluations
/// at an identical scale are served from a cache.
double optimize_exploration(const ExplorationProblem& problem, double scale_min,
                            double scale_max, const PsoConfig& pso, RngStream& rng);

/// Settings for the per-iteration sampling-scale search.
struct ExploreConfig {
    std::size_t n_a = 32;
    std::size_t state_batch = 16;
    double scale_min = 1e-4;
    /// Upper bound of the search interval. Zero means derive it from the
    /// records as (2 * stddev of the targets) squared.
    double scale_max = 0.0;
    PsoConfig pso;
};

struct AeppoConfig {
    /// Number of training iterations.
    std::size_t n_e = 10000;
    /// Episode length in steps; episodes tile the records back to back.
    std::size_t t_ep = 168;
    /// Reward weight passed through to the environment.
    double zeta = 0.75;
    std::size_t mlp_hidden = 64;
    /// True runs the adaptive schedule: a shared sampling scale is optimized
    /// each iteration and the actor's scale head stays frozen. False runs
    /// the plain comparator that samples from the actor's own scale head.
    bool adaptive = true;
    std::uint64_t seed = 0;
    ExploreConfig explore;
    PpoConfig ppo;
};

/// One row of the training log.
struct AeppoIterationLog {
    std::size_t k = 0;
    double b1 = 0.0;
    double b2 = 0.0;
    /// Sampling scale used for this iteration's rollout. In adaptive mode the
    /// optimized shared scale, otherwise the mean of the actor head scales.
    double scale = 0.0;
    /// Mean total reward per episode.
    double mean_reward = 0.0;
    double actor_loss = 0.0;
    double critic_loss = 0.0;
};

struct AeppoResult {
    PpoAgent agent;
    std::vector<AeppoIterationLog> history;
};

/// Trains actor and critic on episodes tiled over the records. Each iteration
/// computes the blend weights, in adaptive mode optimizes the sampling scale
/// on a freshly sampled state batch, collects a rollout over every episode,
/// and applies one policy update. Non-finite losses abort with the iteration
/// index in the error message. n_e = 0 returns the initialized agent.
AeppoResult train_aeppo(const std::vector<EnvRecord>& records, const AeppoConfig& cfg);

} // namespace evcast
