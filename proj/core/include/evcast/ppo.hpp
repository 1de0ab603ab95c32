#pragma once

#include "evcast/env.hpp"
#include "evcast/numerics.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace evcast {

/// Fully connected [input -> hidden -> hidden -> out] network with tanh
/// hidden activations and a linear output layer.
struct MlpParams {
    std::size_t input = 0;
    std::size_t hidden = 0;
    std::size_t out = 0;
    Matrix w1, w2, w3;
    Tensor b1, b2, b3;
};

/// Gradients in the same shapes as MlpParams.
struct MlpGrads {
    Matrix w1, w2, w3;
    Tensor b1, b2, b3;
};

/// Weights uniform in +-1/sqrt(fan_in), biases zero.
MlpParams init_mlp(std::size_t input, std::size_t out, RngStream& rng, std::size_t hidden = 64);

MlpGrads zero_grads_like(const MlpParams& p);

/// Parameter and gradient tensors in matching order, for the optimizer.
std::vector<Tensor*> mlp_param_tensors(MlpParams& p);
std::vector<const Tensor*> mlp_grad_tensors(const MlpGrads& g);

Tensor mlp_forward(const MlpParams& p, const Tensor& s);

/// Gaussian policy head read from a two-output network: the first output is
/// the action mean, the second maps through softplus(raw) + 1e-6 to the
/// strictly positive scale of the action distribution.
struct ActorOut {
    double a_mean = 0.0;
    double a_scale = 0.0;
    double raw_scale = 0.0;
};

ActorOut actor_eval(const MlpParams& actor, const Tensor& s);
double critic_eval(const MlpParams& critic, const Tensor& s);

struct LogProb {
    double logp = 0.0;
    double d_mean = 0.0;
};

/// Log density of N(a_mean, a_var^2) at a, where a_var is the scale, together
/// with its derivative in the mean, (a - a_mean) / a_var^2.
LogProb gaussian_log_prob_grad(double a, double a_mean, double a_var);

struct Experience {
    Tensor s;
    double a_raw = 0.0;
    double r = 0.0;
    Tensor s_next;
    double logp_old = 0.0;
    bool done = false;
    /// Scale the action was sampled with; the surrogate reuses it when the
    /// actor's own scale head is held fixed.
    double sample_scale = 0.0;
};

struct Trajectory {
    std::vector<Experience> steps;
    Tensor returns;
    Tensor advantages;
};

/// Runs every episode to completion under the current policy. Actions are
/// sampled from N(a_mean, scale^2) where scale is the actor's own head when
/// exploration_scale is empty and the supplied value otherwise; logp_old is
/// recorded under the sampling distribution either way.
Trajectory collect_rollout(std::vector<Episode> episodes, const MlpParams& actor,
                           std::optional<double> exploration_scale, RngStream& rng);

/// Fills returns with the discounted reward-to-go of each step inside its
/// episode and advantages with returns minus the critic's value, centered and
/// scaled to unit standard deviation over the batch (centering only when the
/// spread is degenerate). literal_returns switches to the alternative reading
/// that discounts the accumulated past instead of the future:
/// U_j = gamma^(T-j) * sum_{m<=j} gamma^m r_m within an episode of length T.
void returns_and_advantages(Trajectory& traj, const MlpParams& critic, double gamma,
                            bool literal_returns = false);

struct PpoConfig {
    double clip = 0.1;
    double actor_lr = 1e-4;
    double critic_lr = 1e-4;
    double gamma = 0.99;
    std::size_t epochs_per_update = 4;
    /// When false the ratio's new log probability keeps each step's recorded
    /// sample_scale, so only the mean head receives gradient and the scale
    /// head stays frozen.
    bool train_scale_head = true;
    bool literal_returns = false;
};

/// Mean clipped-surrogate loss -E[min(ratio * A, clip(ratio) * A)] over the
/// trajectory. Pure in the actor parameters.
double actor_surrogate_loss(const MlpParams& actor, const Trajectory& traj, const PpoConfig& cfg);

/// Same loss, also accumulating its gradient into out. Returns the loss.
double actor_surrogate_grads(const MlpParams& actor, const Trajectory& traj, const PpoConfig& cfg,
                             MlpGrads& out);

/// One-step bootstrap targets r + gamma * V(s_next) * (1 - done), treated as
/// constants by the regression below.
Tensor critic_td_targets(const MlpParams& critic, const Trajectory& traj, double gamma);

/// Mean squared error of V(s) against fixed targets.
double critic_regression_loss(const MlpParams& critic, const Trajectory& traj,
                              const Tensor& targets);

double critic_regression_grads(const MlpParams& critic, const Trajectory& traj,
                               const Tensor& targets, MlpGrads& out);

/// Actor, critic and their persistent optimizer states.
struct PpoAgent {
    MlpParams actor;
    MlpParams critic;
    AdamState actor_adam;
    AdamState critic_adam;
};

struct PpoUpdateStats {
    double actor_loss = 0.0;
    double critic_loss = 0.0;
};

/// epochs_per_update whole-batch passes: each recomputes the surrogate and
/// the bootstrap targets, then applies one Adam step to each network.
/// Reported losses are averaged over the epochs. Throws NumericError when a
/// loss stops being finite.
PpoUpdateStats ppo_update(PpoAgent& agent, const Trajectory& traj, const PpoConfig& cfg);

/// Versioned JSON weight serialization; parsing rejects version or shape
/// mismatches.
std::string serialize_mlp(const MlpParams& p);
MlpParams parse_mlp(const std::string& text);

} // namespace evcast
