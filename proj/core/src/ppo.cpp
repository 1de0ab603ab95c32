#include "evcast/ppo.hpp"

#include "evcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

namespace evcast {

using json = nlohmann::json;

namespace {

constexpr double kScaleFloor = 1e-6;
constexpr double kLogSqrt2Pi = 0.91893853320467274;

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void check_shapes(const MlpParams& p) {
    if (p.input == 0 || p.hidden == 0 || p.out == 0 || p.w1.rows != p.hidden ||
        p.w1.cols != p.input || p.w2.rows != p.hidden || p.w2.cols != p.hidden ||
        p.w3.rows != p.out || p.w3.cols != p.hidden || p.b1.size() != p.hidden ||
        p.b2.size() != p.hidden || p.b3.size() != p.out) {
        throw ValidationError("mlp: parameter shapes are inconsistent");
    }
}

/// Intermediates of one forward pass, reused by the backward pass.
struct MlpCache {
    Tensor h1, h2, out;
};

void forward_cached(const MlpParams& p, const Tensor& s, MlpCache& c) {
    if (s.size() != p.input)
        throw ValidationError("mlp_forward: state width " + std::to_string(s.size()) +
                              " does not match input width " + std::to_string(p.input));
    c.h1.assign(p.hidden, 0.0);
    matvec(p.w1, s, c.h1);
    for (std::size_t k = 0; k < p.hidden; ++k) c.h1[k] = std::tanh(c.h1[k] + p.b1[k]);

    c.h2.assign(p.hidden, 0.0);
    matvec(p.w2, c.h1, c.h2);
    for (std::size_t k = 0; k < p.hidden; ++k) c.h2[k] = std::tanh(c.h2[k] + p.b2[k]);

    c.out.assign(p.out, 0.0);
    matvec(p.w3, c.h2, c.out);
    for (std::size_t k = 0; k < p.out; ++k) {
        c.out[k] += p.b3[k];
        if (!std::isfinite(c.out[k]))
            throw NumericError("mlp_forward: non-finite output component " + std::to_string(k));
    }
}

/// Accumulates the gradient of a scalar loss into g, given d loss / d out.
void backward_cached(const MlpParams& p, const Tensor& s, const MlpCache& c, const Tensor& dout,
                     MlpGrads& g) {
    for (std::size_t k = 0; k < p.out; ++k) g.b3[k] += dout[k];
    outer_add(g.w3, dout, c.h2);

    Tensor dh2(p.hidden, 0.0);
    matvec_transpose_add(p.w3, dout, dh2);
    for (std::size_t k = 0; k < p.hidden; ++k) dh2[k] *= 1.0 - c.h2[k] * c.h2[k];
    for (std::size_t k = 0; k < p.hidden; ++k) g.b2[k] += dh2[k];
    outer_add(g.w2, dh2, c.h1);

    Tensor dh1(p.hidden, 0.0);
    matvec_transpose_add(p.w2, dh2, dh1);
    for (std::size_t k = 0; k < p.hidden; ++k) dh1[k] *= 1.0 - c.h1[k] * c.h1[k];
    for (std::size_t k = 0; k < p.hidden; ++k) g.b1[k] += dh1[k];
    outer_add(g.w1, dh1, s);
}

void require_scored(const Trajectory& traj, const char* who) {
    if (traj.steps.empty()) throw ValidationError(std::string(who) + ": empty trajectory");
    if (traj.advantages.size() != traj.steps.size())
        throw ValidationError(std::string(who) +
                              ": advantages are missing; fill returns and advantages first");
}

/// Shared implementation of the clipped-surrogate loss; accumulates gradients
/// when out is non-null.
double surrogate_core(const MlpParams& actor, const Trajectory& traj, const PpoConfig& cfg,
                      MlpGrads* out) {
    require_scored(traj, "actor_surrogate");
    if (actor.out != 2) throw ValidationError("actor_surrogate: actor must have two outputs");
    if (!(cfg.clip > 0.0) || !(cfg.clip < 1.0))
        throw ValidationError("actor_surrogate: clip must lie in (0, 1)");

    const std::size_t n = traj.steps.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double lo = 1.0 - cfg.clip;
    const double hi = 1.0 + cfg.clip;

    double loss = 0.0;
    MlpCache cache;
    Tensor dout(2, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const Experience& e = traj.steps[k];
        forward_cached(actor, e.s, cache);
        const double mean = cache.out[0];
        const double raw = cache.out[1];
        const double head_scale = softplus(raw) + kScaleFloor;
        const double scale = cfg.train_scale_head ? head_scale : e.sample_scale;
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw ValidationError("actor_surrogate: step " + std::to_string(k) +
                                  " has no positive sampling scale");

        const double z = (e.a_raw - mean) / scale;
        const double logp = -0.5 * z * z - std::log(scale) - kLogSqrt2Pi;
        const double ratio = std::exp(logp - e.logp_old);
        const double adv = traj.advantages[k];
        const double unclipped = ratio * adv;
        const double clipped = std::clamp(ratio, lo, hi) * adv;
        const double objective = std::min(unclipped, clipped);
        loss -= objective * inv_n;

        if (out != nullptr) {
            const double dobj_dratio = unclipped <= clipped ? adv : 0.0;
            const double dloss_dlogp = -inv_n * dobj_dratio * ratio;
            dout[0] = dloss_dlogp * (z / scale);
            dout[1] = 0.0;
            if (cfg.train_scale_head) {
                const double dlogp_dscale = (z * z - 1.0) / scale;
                dout[1] = dloss_dlogp * dlogp_dscale * sigmoid(raw);
            }
            backward_cached(actor, e.s, cache, dout, *out);
        }
    }
    return loss;
}

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"a", m.a}};
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* name) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.a = j.at("a").get<Tensor>();
    if (m.rows != rows || m.cols != cols || m.a.size() != rows * cols)
        throw ValidationError(std::string("parse_mlp: ") + name + " has the wrong shape");
    return m;
}

Tensor vector_from_json(const json& j, std::size_t size, const char* name) {
    Tensor v = j.get<Tensor>();
    if (v.size() != size)
        throw ValidationError(std::string("parse_mlp: ") + name + " has the wrong length");
    return v;
}

} // namespace

MlpParams init_mlp(std::size_t input, std::size_t out, RngStream& rng, std::size_t hidden) {
    if (input == 0 || out == 0 || hidden == 0)
        throw ValidationError("init_mlp: widths must be positive");

    MlpParams p;
    p.input = input;
    p.hidden = hidden;
    p.out = out;
    p.w1 = Matrix(hidden, input);
    p.w2 = Matrix(hidden, hidden);
    p.w3 = Matrix(out, hidden);
    p.b1.assign(hidden, 0.0);
    p.b2.assign(hidden, 0.0);
    p.b3.assign(out, 0.0);

    const auto fill = [&rng](Matrix& m) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols));
        for (double& w : m.a) w = (2.0 * rng.next_unit() - 1.0) * bound;
    };
    fill(p.w1);
    fill(p.w2);
    fill(p.w3);
    return p;
}

MlpGrads zero_grads_like(const MlpParams& p) {
    MlpGrads g;
    g.w1 = Matrix(p.w1.rows, p.w1.cols);
    g.w2 = Matrix(p.w2.rows, p.w2.cols);
    g.w3 = Matrix(p.w3.rows, p.w3.cols);
    g.b1.assign(p.b1.size(), 0.0);
    g.b2.assign(p.b2.size(), 0.0);
    g.b3.assign(p.b3.size(), 0.0);
    return g;
}

std::vector<Tensor*> mlp_param_tensors(MlpParams& p) {
    return {&p.w1.a, &p.w2.a, &p.w3.a, &p.b1, &p.b2, &p.b3};
}

std::vector<const Tensor*> mlp_grad_tensors(const MlpGrads& g) {
    return {&g.w1.a, &g.w2.a, &g.w3.a, &g.b1, &g.b2, &g.b3};
}

Tensor mlp_forward(const MlpParams& p, const Tensor& s) {
    check_shapes(p);
    MlpCache cache;
    forward_cached(p, s, cache);
    return cache.out;
}

ActorOut actor_eval(const MlpParams& actor, const Tensor& s) {
    if (actor.out != 2) throw ValidationError("actor_eval: actor must have two outputs");
    const Tensor o = mlp_forward(actor, s);
    return {o[0], softplus(o[1]) + kScaleFloor, o[1]};
}

double critic_eval(const MlpParams& critic, const Tensor& s) {
    if (critic.out != 1) throw ValidationError("critic_eval: critic must have one output");
    return mlp_forward(critic, s)[0];
}

LogProb gaussian_log_prob_grad(double a, double a_mean, double a_var) {
    if (!(a_var > 0.0) || !std::isfinite(a_var))
        throw ValidationError("gaussian_log_prob_grad: scale must be positive and finite");
    const double z = (a - a_mean) / a_var;
    return {-0.5 * z * z - std::log(a_var) - kLogSqrt2Pi, z / a_var};
}

Trajectory collect_rollout(std::vector<Episode> episodes, const MlpParams& actor,
                           std::optional<double> exploration_scale, RngStream& rng) {
    if (episodes.empty()) throw ValidationError("collect_rollout: no episodes");
    if (exploration_scale &&
        (!(*exploration_scale > 0.0) || !std::isfinite(*exploration_scale)))
        throw ValidationError("collect_rollout: exploration scale must be positive and finite");

    Trajectory traj;
    for (Episode& ep : episodes) {
        if (ep.cursor != 0) throw ValidationError("collect_rollout: episode already started");
        traj.steps.reserve(traj.steps.size() + ep.horizon);
        while (ep.cursor < ep.horizon) {
            Tensor s = env_state(ep);
            const ActorOut head = actor_eval(actor, s);
            const double scale = exploration_scale ? *exploration_scale : head.a_scale;
            const double a_raw = rng_gaussian(rng, head.a_mean, scale);
            const double logp = gaussian_log_prob_grad(a_raw, head.a_mean, scale).logp;
            StepResult st = env_step(ep, a_raw);
            traj.steps.push_back({std::move(s), a_raw, st.reward, std::move(st.next_state), logp,
                                  st.done, scale});
        }
    }
    return traj;
}

void returns_and_advantages(Trajectory& traj, const MlpParams& critic, double gamma,
                            bool literal_returns) {
    const std::size_t n = traj.steps.size();
    if (n == 0) throw ValidationError("returns_and_advantages: empty trajectory");
    if (!(gamma >= 0.0) || !(gamma <= 1.0))
        throw ValidationError("returns_and_advantages: gamma must lie in [0, 1]");

    traj.returns.assign(n, 0.0);
    if (!literal_returns) {
        double acc = 0.0;
        for (std::size_t i = n; i-- > 0;) {
            if (traj.steps[i].done) acc = 0.0;
            acc = traj.steps[i].r + gamma * acc;
            traj.returns[i] = acc;
        }
    } else {
        std::size_t begin = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!traj.steps[i].done && i + 1 < n) continue;
            const std::size_t len = i - begin + 1;
            double weighted = 0.0;
            double gpow = 1.0;
            for (std::size_t j = 0; j < len; ++j) {
                weighted += gpow * traj.steps[begin + j].r;
                gpow *= gamma;
                traj.returns[begin + j] =
                    std::pow(gamma, static_cast<double>(len - j)) * weighted;
            }
            begin = i + 1;
        }
    }

    traj.advantages.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        traj.advantages[i] = traj.returns[i] - critic_eval(critic, traj.steps[i].s);

    const double mean = mean_of(traj.advantages);
    const double sd = stddev_of(traj.advantages);
    for (double& a : traj.advantages) {
        a -= mean;
        if (sd > 1e-12) a /= sd;
    }
}

double actor_surrogate_loss(const MlpParams& actor, const Trajectory& traj,
                            const PpoConfig& cfg) {
    return surrogate_core(actor, traj, cfg, nullptr);
}

double actor_surrogate_grads(const MlpParams& actor, const Trajectory& traj, const PpoConfig& cfg,
                             MlpGrads& out) {
    return surrogate_core(actor, traj, cfg, &out);
}

Tensor critic_td_targets(const MlpParams& critic, const Trajectory& traj, double gamma) {
    if (traj.steps.empty()) throw ValidationError("critic_td_targets: empty trajectory");
    Tensor targets(traj.steps.size(), 0.0);
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const Experience& e = traj.steps[i];
        targets[i] = e.r;
        if (!e.done) targets[i] += gamma * critic_eval(critic, e.s_next);
    }
    return targets;
}

double critic_regression_loss(const MlpParams& critic, const Trajectory& traj,
                              const Tensor& targets) {
    if (targets.size() != traj.steps.size())
        throw ValidationError("critic_regression: target count mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const double d = critic_eval(critic, traj.steps[i].s) - targets[i];
        loss += d * d;
    }
    return loss / static_cast<double>(traj.steps.size());
}

double critic_regression_grads(const MlpParams& critic, const Trajectory& traj,
                               const Tensor& targets, MlpGrads& out) {
    if (targets.size() != traj.steps.size())
        throw ValidationError("critic_regression: target count mismatch");
    const double inv_n = 1.0 / static_cast<double>(traj.steps.size());
    double loss = 0.0;
    MlpCache cache;
    Tensor dout(1, 0.0);
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        forward_cached(critic, traj.steps[i].s, cache);
        const double d = cache.out[0] - targets[i];
        loss += d * d * inv_n;
        dout[0] = 2.0 * d * inv_n;
        backward_cached(critic, traj.steps[i].s, cache, dout, out);
    }
    return loss;
}

PpoUpdateStats ppo_update(PpoAgent& agent, const Trajectory& traj, const PpoConfig& cfg) {
    require_scored(traj, "ppo_update");
    if (cfg.epochs_per_update == 0)
        throw ValidationError("ppo_update: epochs_per_update must be positive");

    PpoUpdateStats stats;
    for (std::size_t epoch = 1; epoch <= cfg.epochs_per_update; ++epoch) {
        try {
            MlpGrads ga = zero_grads_like(agent.actor);
            const double actor_loss = actor_surrogate_grads(agent.actor, traj, cfg, ga);
            if (!std::isfinite(actor_loss))
                throw NumericError("non-finite actor loss");
            adam_step(mlp_param_tensors(agent.actor), mlp_grad_tensors(ga), agent.actor_adam,
                      cfg.actor_lr);

            const Tensor targets = critic_td_targets(agent.critic, traj, cfg.gamma);
            MlpGrads gc = zero_grads_like(agent.critic);
            const double critic_loss = critic_regression_grads(agent.critic, traj, targets, gc);
            if (!std::isfinite(critic_loss))
                throw NumericError("non-finite critic loss");
            adam_step(mlp_param_tensors(agent.critic), mlp_grad_tensors(gc), agent.critic_adam,
                      cfg.critic_lr);

            stats.actor_loss += actor_loss;
            stats.critic_loss += critic_loss;
        } catch (const NumericError& e) {
            throw NumericError("ppo_update: epoch " + std::to_string(epoch) + ": " + e.what());
        }
    }
    stats.actor_loss /= static_cast<double>(cfg.epochs_per_update);
    stats.critic_loss /= static_cast<double>(cfg.epochs_per_update);
    return stats;
}

std::string serialize_mlp(const MlpParams& p) {
    check_shapes(p);
    json j;
    j["format"] = "evcast-mlp";
    j["version"] = 1;
    j["input"] = p.input;
    j["hidden"] = p.hidden;
    j["out"] = p.out;
    j["w1"] = matrix_to_json(p.w1);
    j["w2"] = matrix_to_json(p.w2);
    j["w3"] = matrix_to_json(p.w3);
    j["b1"] = p.b1;
    j["b2"] = p.b2;
    j["b3"] = p.b3;
    return j.dump();
}

MlpParams parse_mlp(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("parse_mlp: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "evcast-mlp")
            throw ValidationError("parse_mlp: unrecognized format tag");
        if (j.at("version").get<int>() != 1)
            throw ValidationError("parse_mlp: unsupported version");

        MlpParams p;
        p.input = j.at("input").get<std::size_t>();
        p.hidden = j.at("hidden").get<std::size_t>();
        p.out = j.at("out").get<std::size_t>();
        p.w1 = matrix_from_json(j.at("w1"), p.hidden, p.input, "w1");
        p.w2 = matrix_from_json(j.at("w2"), p.hidden, p.hidden, "w2");
        p.w3 = matrix_from_json(j.at("w3"), p.out, p.hidden, "w3");
        p.b1 = vector_from_json(j.at("b1"), p.hidden, "b1");
        p.b2 = vector_from_json(j.at("b2"), p.hidden, "b2");
        p.b3 = vector_from_json(j.at("b3"), p.out, "b3");
        check_shapes(p);
        return p;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("parse_mlp: malformed weight file: ") + e.what());
    }
}

} // namespace evcast
