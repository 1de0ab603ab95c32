#include <doctest.h>

#include "evcast/error.hpp"
#include "evcast/lstm.hpp"
#include "test_oracles.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace evcast;

namespace {

LstmParams zero_params(std::size_t hidden, std::size_t input) {
    LstmParams p;
    p.hidden = hidden;
    p.input = input;
    p.readout = true;
    const std::size_t cols = hidden + input;
    p.w_i = Matrix(hidden, cols);
    p.w_f = Matrix(hidden, cols);
    p.w_o = Matrix(hidden, cols);
    p.w_c = Matrix(hidden, cols);
    p.b_i.assign(hidden, 0.0);
    p.b_f.assign(hidden, 0.0);
    p.b_o.assign(hidden, 0.0);
    p.b_c.assign(hidden, 0.0);
    p.w_y.assign(hidden, 0.0);
    p.b_y = 0.0;
    return p;
}

// Straight-line re-evaluation of the recurrence plus readout, written with
// plain nested loops and its own sigmoid so it shares nothing with the
// library path.
double naive_window_eval(const LstmParams& p, const Matrix& x) {
    const std::size_t H = p.hidden;
    std::vector<double> h(H, 0.0), c(H, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r) {
        std::vector<double> z;
        for (std::size_t k = 0; k < H; ++k) z.push_back(h[k]);
        for (std::size_t k = 0; k < x.cols; ++k) z.push_back(x(r, k));
        std::vector<double> hn(H), cn(H);
        for (std::size_t k = 0; k < H; ++k) {
            double ai = p.b_i[k], af = p.b_f[k], ao = p.b_o[k], ac = p.b_c[k];
            for (std::size_t j = 0; j < z.size(); ++j) {
                ai += p.w_i(k, j) * z[j];
                af += p.w_f(k, j) * z[j];
                ao += p.w_o(k, j) * z[j];
                ac += p.w_c(k, j) * z[j];
            }
            const double gi = 1.0 / (1.0 + std::exp(-ai));
            const double gf = 1.0 / (1.0 + std::exp(-af));
            const double go = 1.0 / (1.0 + std::exp(-ao));
            const double gg = std::tanh(ac);
            cn[k] = gf * c[k] + gi * gg;
            hn[k] = go * std::tanh(cn[k]);
        }
        h = hn;
        c = cn;
    }
    double y = p.b_y;
    for (std::size_t k = 0; k < H; ++k) y += p.w_y[k] * h[k];
    return y;
}

struct NamedTensor {
    std::string name;
    Tensor* data;
};

} // namespace

TEST_SUITE("lstm") {

TEST_CASE("forward_step fixed points of the zero network") {
    auto p = zero_params(2, 3);
    LstmState s0 = zero_state(p);
    const std::vector<double> x = {0.4, -1.0, 2.5};

    auto s1 = forward_step(p, x, s0);
    CHECK(s1.c[0] == 0.0);
    CHECK(s1.h[0] == 0.0);

    s0.c = {1.0, 1.0};
    s1 = forward_step(p, x, s0);
    CHECK(s1.c[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::fabs(s1.h[0] - 0.231059) <= 1e-6);
}

TEST_CASE("saturated forget gate preserves the cell") {
    auto p = zero_params(1, 2);
    p.b_f[0] = 50.0;
    LstmState s;
    s.h = {0.0};
    s.c = {0.7};
    const std::vector<double> x = {0.3, -0.2};
    const auto next = forward_step(p, x, s);
    CHECK(std::fabs(next.c[0] - (0.7 + 0.5 * 0.0)) <= 1e-12);

    p.w_c(0, 1) = 2.0;
    const auto next2 = forward_step(p, x, s);
    const double expect = 0.7 + 0.5 * std::tanh(2.0 * 0.3);
    CHECK(std::fabs(next2.c[0] - expect) <= 1e-9);
}

TEST_CASE("predict_window readout passthroughs") {
    auto p = zero_params(4, 3);
    Matrix x(3, 3);
    CHECK(predict_window(p, x).y_hat == 0.0);
    p.b_y = 7.0;
    CHECK(predict_window(p, x).y_hat == 7.0);
}

TEST_CASE("predict_window matches the straight-line oracle") {
    RngStream rng(1, 0);
    auto p = init_lstm(4, 3, rng);
    for (double& w : p.w_y) w = 0.3;
    p.b_y = -0.1;

    Matrix x(3, 3);
    for (double& v : x.a) v = rng_gaussian(rng, 0.0, 1.0);

    const double got = predict_window(p, x).y_hat;
    const double want = naive_window_eval(p, x);
    CHECK(std::fabs(got - want) <= 1e-12);
}

TEST_CASE("hidden state stays strictly inside (-1, 1)") {
    RngStream rng(3, 0);
    auto p = init_lstm(6, 3, rng);
    Matrix x(20, 3);
    for (double& v : x.a) v = rng_gaussian(rng, 0.0, 5.0);
    std::vector<LstmStepCache> cache;
    predict_window(p, x, &cache);
    for (const auto& step : cache) {
        for (double hk : step.h) {
            CHECK(hk > -1.0);
            CHECK(hk < 1.0);
        }
    }
}

TEST_CASE("backward_window trivial identities") {
    RngStream rng(7, 0);
    auto p = init_lstm(4, 3, rng);
    Matrix x(3, 3);
    for (double& v : x.a) v = rng_gaussian(rng, 0.0, 1.0);

    std::vector<LstmStepCache> cache;
    const auto r = predict_window(p, x, &cache);

    const auto zero_grads = backward_window(p, cache, r.y_hat);
    for (double v : zero_grads.w_i.a) CHECK(v == 0.0);
    for (double v : zero_grads.w_y) CHECK(v == 0.0);
    CHECK(zero_grads.b_y == 0.0);

    const auto g = backward_window(p, cache, r.y_hat - 2.0);
    CHECK(g.b_y == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RngStream rng(seed, 0);
        auto p = init_lstm(4, 3, rng);
        for (double& w : p.w_y) w = rng_gaussian(rng, 0.0, 0.5);
        p.b_y = 0.2;

        Matrix x(3, 3);
        for (double& v : x.a) v = rng_gaussian(rng, 0.0, 1.0);
        const double target = rng_gaussian(rng, 0.0, 1.0);

        std::vector<LstmStepCache> cache;
        predict_window(p, x, &cache);
        const auto g = backward_window(p, cache, target);

        Tensor b_y_param = {p.b_y};
        Tensor b_y_grad = {g.b_y};
        std::vector<NamedTensor> params = {
            {"w_i", &p.w_i.a}, {"w_f", &p.w_f.a}, {"w_o", &p.w_o.a}, {"w_c", &p.w_c.a},
            {"b_i", &p.b_i},   {"b_f", &p.b_f},   {"b_o", &p.b_o},   {"b_c", &p.b_c},
            {"w_y", &p.w_y},   {"b_y", &b_y_param}};
        std::vector<const Tensor*> analytic = {&g.w_i.a, &g.w_f.a, &g.w_o.a, &g.w_c.a,
                                               &g.b_i,   &g.b_f,   &g.b_o,   &g.b_c,
                                               &g.w_y,   &b_y_grad};

        auto loss = [&]() {
            p.b_y = b_y_param[0];
            const double d = predict_window(p, x).y_hat - target;
            return 0.5 * d * d;
        };
        for (std::size_t k = 0; k < params.size(); ++k) {
            const auto fd = testoracle::central_diff(loss, *params[k].data, 1e-5);
            const double err = testoracle::rel_l2_error(*analytic[k], fd);
            INFO("tensor ", params[k].name, " seed ", seed);
            CHECK(err <= 1e-5);
        }
    }
}

TEST_CASE("no-readout mode forecasts the hidden state itself") {
    RngStream rng(5, 0);
    auto p = init_lstm(1, 3, rng, false);
    Matrix x(4, 3);
    for (double& v : x.a) v = rng_gaussian(rng, 0.0, 1.0);

    std::vector<LstmStepCache> cache;
    const auto r = predict_window(p, x, &cache);
    CHECK(r.y_hat == r.state.h[0]);

    const auto g = backward_window(p, cache, r.y_hat + 1.0);
    for (double v : g.w_y) CHECK(v == 0.0);
    CHECK(g.b_y == 0.0);
    bool any_nonzero = false;
    for (double v : g.w_c.a) any_nonzero = any_nonzero || v != 0.0;
    CHECK(any_nonzero);

    CHECK_THROWS_AS(init_lstm(2, 3, rng, false), ValidationError);
}

TEST_CASE("no-readout gradients also match finite differences") {
    RngStream rng(11, 0);
    auto p = init_lstm(1, 3, rng, false);
    Matrix x(3, 3);
    for (double& v : x.a) v = rng_gaussian(rng, 0.0, 1.0);
    const double target = 0.4;

    std::vector<LstmStepCache> cache;
    predict_window(p, x, &cache);
    const auto g = backward_window(p, cache, target);

    auto loss = [&]() {
        const double d = predict_window(p, x).y_hat - target;
        return 0.5 * d * d;
    };
    const auto fd = testoracle::central_diff(loss, p.w_f.a, 1e-5);
    CHECK(testoracle::rel_l2_error(g.w_f.a, fd) <= 1e-5);
}

namespace {

std::vector<WindowedSample> sinusoid_samples(std::size_t hours, double noise,
                                             std::uint64_t seed, std::size_t n_h = 12) {
    RngStream rng(seed, 77);
    std::vector<FeatureFrame> frames(hours);
    for (std::size_t i = 0; i < hours; ++i) {
        frames[i].t = static_cast<long>(i);
        frames[i].energy_kwh =
            std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(i) / 24.0) +
            rng_gaussian(rng, 0.0, noise);
        frames[i].charger_hours = std::cos(2.0 * 3.14159265358979323846 * static_cast<double>(i) / 24.0);
        frames[i].satisfaction_pct = 0.0;
    }
    return make_windows(frames, n_h);
}

} // namespace

TEST_CASE("train_lstm is deterministic and respects 0 epochs") {
    const auto samples = sinusoid_samples(120, 0.1, 4);
    LstmTrainConfig cfg;
    cfg.hidden = 6;
    cfg.epochs = 3;
    cfg.seed = 9;

    const auto a = train_lstm(samples, cfg);
    const auto b = train_lstm(samples, cfg);
    CHECK(serialize_lstm(a.params) == serialize_lstm(b.params));
    CHECK(a.history.size() == b.history.size());

    cfg.epochs = 0;
    const auto untrained = train_lstm(samples, cfg);
    RngStream rng(cfg.seed, 101);
    const auto fresh = init_lstm(cfg.hidden, 3, rng);
    CHECK(serialize_lstm(untrained.params) == serialize_lstm(fresh));
    CHECK(untrained.history.empty());
}

TEST_CASE("train_lstm validates splits and fractions") {
    const auto samples = sinusoid_samples(40, 0.1, 4);
    LstmTrainConfig cfg;
    cfg.train_frac = 0.5;
    cfg.valid_frac = 0.2;
    cfg.test_frac = 0.2;
    CHECK_THROWS_AS(train_lstm(samples, cfg), ValidationError);

    cfg = LstmTrainConfig{};
    std::vector<WindowedSample> tiny(samples.begin(), samples.begin() + 8);
    CHECK_THROWS_AS(train_lstm(tiny, cfg), ValidationError);
}

TEST_CASE("sinusoid training cuts the train MSE by 10x") {
    const auto samples = sinusoid_samples(400, 0.05, 1);
    LstmTrainConfig cfg;
    cfg.hidden = 16;
    cfg.epochs = 200;
    cfg.seed = 1;
    const auto r = train_lstm(samples, cfg);
    REQUIRE(!r.history.empty());
    CHECK(r.history.back().train_mse <= 0.1 * r.history.front().train_mse);
}

TEST_CASE("pure-noise targets do not leak into validation") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RngStream rng(seed, 123);
        std::vector<FeatureFrame> frames(260);
        std::vector<double> targets;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            frames[i].t = static_cast<long>(i);
            frames[i].energy_kwh = rng_gaussian(rng, 0.0, 1.0);
            frames[i].charger_hours = rng_gaussian(rng, 0.0, 1.0);
            frames[i].satisfaction_pct = rng_gaussian(rng, 0.0, 1.0);
        }
        const auto samples = make_windows(frames, 12);
        const std::size_t n_train = static_cast<std::size_t>(0.8 * samples.size());
        const std::size_t n_valid = static_cast<std::size_t>(0.1 * samples.size());
        for (std::size_t i = n_train; i < n_train + n_valid; ++i)
            targets.push_back(samples[i].target);
        double var = stddev_of(targets);
        var *= var;

        LstmTrainConfig cfg;
        cfg.hidden = 8;
        cfg.epochs = 30;
        cfg.seed = seed;
        const auto r = train_lstm(samples, cfg);
        double best_valid = r.history.front().valid_mse;
        for (const auto& e : r.history) best_valid = std::min(best_valid, e.valid_mse);
        CHECK(best_valid >= 0.8 * var);
    }
}

TEST_CASE("extract_cell_states aligns with predict_window") {
    RngStream rng(13, 0);
    const auto p = init_lstm(5, 3, rng);

    std::vector<FeatureFrame> frames(13);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        frames[i].t = 100 + static_cast<long>(i);
        frames[i].energy_kwh = std::sin(0.3 * static_cast<double>(i));
        frames[i].charger_hours = 0.5;
        frames[i].satisfaction_pct = -0.2;
    }

    const auto records = extract_cell_states(p, frames, 12);
    REQUIRE(records.size() == 1);
    CHECK(records[0].t == 111);

    Matrix x(12, 3);
    for (std::size_t r = 0; r < 12; ++r) {
        x(r, 0) = frames[r].energy_kwh;
        x(r, 1) = frames[r].charger_hours;
        x(r, 2) = frames[r].satisfaction_pct;
    }
    const auto w = predict_window(p, x);
    CHECK(records[0].y_hat_next == w.y_hat);
    CHECK(records[0].cell == w.state.c);

    const auto zero = zero_params(5, 3);
    auto zp = zero;
    zp.b_y = 3.5;
    const auto zrec = extract_cell_states(zp, frames, 12);
    for (double ck : zrec[0].cell) CHECK(ck == 0.0);
    CHECK(zrec[0].y_hat_next == 3.5);
}

TEST_CASE("weight serialization round trips and rejects mismatch") {
    RngStream rng(17, 0);
    const auto p = init_lstm(3, 3, rng);
    const auto text = serialize_lstm(p);
    const auto back = parse_lstm(text);
    CHECK(serialize_lstm(back) == text);
    CHECK(back.w_f.a == p.w_f.a);
    CHECK(back.b_y == p.b_y);

    std::string tampered = text;
    const auto pos = tampered.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    tampered.replace(pos, 11, "\"version\":9");
    CHECK_THROWS_AS(parse_lstm(tampered), ValidationError);
    CHECK_THROWS_AS(parse_lstm("{}"), ValidationError);
    CHECK_THROWS_AS(parse_lstm("not json"), ValidationError);
}

} // TEST_SUITE
