#include "evcast/aeppo.hpp"

#include "evcast/error.hpp"
#include "evcast/metrics.hpp"

#include <bit>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>

namespace evcast {

namespace {

double point_reward(const ExplorationPoint& pt, double zeta, double a_raw) {
    return -zeta * crps_gaussian({pt.y_hat_next, delta_from_raw(a_raw)}, pt.y_next);
}

} // namespace

BPair b_schedule(std::size_t k, std::size_t n_e) {
    if (n_e == 0) throw ValidationError("b_schedule: n_e must be positive");
    if (k > n_e)
        throw ValidationError("b_schedule: k " + std::to_string(k) + " exceeds n_e " +
                              std::to_string(n_e));
    const double b1 = static_cast<double>(k) / static_cast<double>(n_e);
    const double u = b1 - 1.0;
    const double b2 = 1.0 - std::sqrt(1.0 - u * u);
    return {b1, b2};
}

MomentEstimate moments_from_rewards(std::span<const double> rewards) {
    if (rewards.size() < 2)
        throw ValidationError("moments_from_rewards: need at least two rewards");
    const double mean = mean_of(rewards);
    double acc = 0.0;
    for (const double r : rewards) {
        const double d = r - mean;
        acc += d * d;
    }
    return {mean, acc / static_cast<double>(rewards.size() - 1), rewards.size()};
}

MomentEstimate reward_moments(const Episode& ep, double a_mean, double scale,
                              std::size_t n_a, RngStream& rng) {
    if (n_a < 2) throw ValidationError("reward_moments: n_a must be at least two");
    if (!std::isfinite(a_mean)) throw ValidationError("reward_moments: a_mean is not finite");
    if (!std::isfinite(scale) || scale <= 0.0)
        throw ValidationError("reward_moments: scale must be positive");
    std::vector<double> rewards(n_a, 0.0);
    for (std::size_t i = 0; i < n_a; ++i)
        rewards[i] = env_peek_reward(ep, rng_gaussian(rng, a_mean, scale));
    return moments_from_rewards(rewards);
}

double exploration_fitness(const BPair& b, const MomentEstimate& m) {
    return b.b1 * m.r_mean + b.b2 * m.r_var;
}

double ExplorationProblem::fitness(double scale) const {
    if (!std::isfinite(scale) || scale <= 0.0)
        throw ValidationError("ExplorationProblem: scale must be positive");
    if (points.empty() || points.size() != draws.size())
        throw ValidationError("ExplorationProblem: points and draws are misaligned");
    std::vector<double> rewards(n_a, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Tensor& z = draws[i];
        if (z.size() != n_a)
            throw ValidationError("ExplorationProblem: draw row does not hold n_a values");
        for (std::size_t j = 0; j < n_a; ++j)
            rewards[j] = point_reward(points[i], zeta, points[i].a_mean + scale * z[j]);
        acc += exploration_fitness(b, moments_from_rewards(rewards));
    }
    return acc / static_cast<double>(points.size());
}

ExplorationProblem make_exploration_problem(std::span<const EnvRecord> records,
                                            const MlpParams& actor, const BPair& b,
                                            double zeta, std::size_t n_a,
                                            std::size_t state_batch, RngStream& rng) {
    if (records.empty()) throw ValidationError("make_exploration_problem: no records");
    if (n_a < 2) throw ValidationError("make_exploration_problem: n_a must be at least two");
    if (state_batch == 0)
        throw ValidationError("make_exploration_problem: state batch must be nonempty");
    if (!std::isfinite(zeta) || zeta <= 0.0)
        throw ValidationError("make_exploration_problem: zeta must be positive");

    ExplorationProblem problem;
    problem.b = b;
    problem.zeta = zeta;
    problem.n_a = n_a;
    problem.points.reserve(state_batch);
    problem.draws.reserve(state_batch);
    for (std::size_t s = 0; s < state_batch; ++s) {
        const EnvRecord& rec = records[rng.next_u64() % records.size()];
        const ActorOut head = actor_eval(actor, rec.cell);
        problem.points.push_back({head.a_mean, rec.y_hat_next, rec.y_next});
        Tensor z(n_a, 0.0);
        for (double& v : z) v = rng_gaussian(rng, 0.0, 1.0);
        problem.draws.push_back(std::move(z));
    }
    return problem;
}

double optimize_exploration(const ExplorationProblem& problem, double scale_min,
                            double scale_max, const PsoConfig& pso, RngStream& rng) {
    if (!std::isfinite(scale_min) || !std::isfinite(scale_max) || scale_min <= 0.0 ||
        scale_max <= scale_min)
        throw ValidationError("optimize_exploration: scale bounds must satisfy 0 < min < max");

    std::unordered_map<std::uint64_t, double> cache;
    const auto objective = [&](const Tensor& x) {
        const double scale = x[0];
        const std::uint64_t key = std::bit_cast<std::uint64_t>(scale);
        const auto hit = cache.find(key);
        if (hit != cache.end()) return hit->second;
        const double value = -problem.fitness(scale);
        cache.emplace(key, value);
        return value;
    };
    return pso_minimize(objective, {{scale_min, scale_max}}, pso, rng).best_x[0];
}

AeppoResult train_aeppo(const std::vector<EnvRecord>& records, const AeppoConfig& cfg) {
    if (records.empty()) throw ValidationError("train_aeppo: no records");
    const std::size_t width = records[0].cell.size();
    if (width == 0) throw ValidationError("train_aeppo: records hold empty cell states");
    for (const EnvRecord& rec : records)
        if (rec.cell.size() != width)
            throw ValidationError("train_aeppo: records disagree on cell width");
    if (cfg.t_ep == 0) throw ValidationError("train_aeppo: t_ep must be positive");
    if (!std::isfinite(cfg.zeta) || cfg.zeta <= 0.0)
        throw ValidationError("train_aeppo: zeta must be positive");

    AeppoResult out;
    {
        RngStream actor_rng(cfg.seed, 201);
        out.agent.actor = init_mlp(width, 2, actor_rng, cfg.mlp_hidden);
    }
    {
        RngStream critic_rng(cfg.seed, 202);
        out.agent.critic = init_mlp(width, 1, critic_rng, cfg.mlp_hidden);
    }
    if (cfg.n_e == 0) return out;

    const std::size_t n_episodes = records.size() / cfg.t_ep;
    if (n_episodes == 0)
        throw ValidationError("train_aeppo: fewer records than one episode of t_ep steps");
    const std::size_t covered = n_episodes * cfg.t_ep;
    const std::span<const EnvRecord> pool(records.data(), covered);

    double scale_max = cfg.explore.scale_max;
    if (cfg.adaptive && scale_max == 0.0) {
        std::vector<double> targets;
        targets.reserve(covered);
        for (std::size_t i = 0; i < covered; ++i) targets.push_back(records[i].y_next);
        const double sd = stddev_of(targets);
        scale_max = (2.0 * sd) * (2.0 * sd);
        if (!(scale_max > cfg.explore.scale_min))
            throw ValidationError(
                "train_aeppo: targets are too uniform to derive a scale upper bound");
    }

    PpoConfig pcfg = cfg.ppo;
    pcfg.train_scale_head = !cfg.adaptive;

    const RngStream root(cfg.seed, 301);
    out.history.reserve(cfg.n_e);
    for (std::size_t k = 1; k <= cfg.n_e; ++k) {
        try {
            const BPair b = b_schedule(k, cfg.n_e);
            const RngStream iter = root.split(k);

            double scale_used = 0.0;
            std::optional<double> rollout_scale;
            if (cfg.adaptive) {
                RngStream explore_rng = iter.split(1);
                const ExplorationProblem problem =
                    make_exploration_problem(pool, out.agent.actor, b, cfg.zeta, cfg.explore.n_a,
                                             cfg.explore.state_batch, explore_rng);
                scale_used = optimize_exploration(problem, cfg.explore.scale_min, scale_max,
                                                  cfg.explore.pso, explore_rng);
                rollout_scale = scale_used;
            }

            std::vector<Episode> episodes;
            episodes.reserve(n_episodes);
            for (std::size_t e = 0; e < n_episodes; ++e)
                episodes.push_back(env_reset(records, e * cfg.t_ep, cfg.t_ep, cfg.zeta));

            RngStream rollout_rng = iter.split(2);
            Trajectory traj =
                collect_rollout(std::move(episodes), out.agent.actor, rollout_scale, rollout_rng);
            returns_and_advantages(traj, out.agent.critic, pcfg.gamma, pcfg.literal_returns);
            const PpoUpdateStats stats = ppo_update(out.agent, traj, pcfg);

            double total = 0.0;
            for (const Experience& e : traj.steps) total += e.r;
            if (!cfg.adaptive) {
                double acc = 0.0;
                for (const Experience& e : traj.steps) acc += e.sample_scale;
                scale_used = acc / static_cast<double>(traj.steps.size());
            }
            out.history.push_back({k, b.b1, b.b2, scale_used,
                                   total / static_cast<double>(n_episodes), stats.actor_loss,
                                   stats.critic_loss});
        } catch (const NumericError& err) {
            throw NumericError("train_aeppo: iteration " + std::to_string(k) + ": " +
                               err.what());
        }
    }
    return out;
}

} // namespace evcast
