#include <doctest.h>

#include "evcast/env.hpp"
#include "evcast/error.hpp"
#include "evcast/metrics.hpp"

#include <cmath>
#include <vector>

using namespace evcast;

namespace {

std::vector<EnvRecord> toy_series(std::size_t n) {
    std::vector<EnvRecord> series;
    for (std::size_t i = 0; i < n; ++i) {
        const double base = static_cast<double>(i);
        series.push_back({{base, base + 0.25, -base}, 0.1 * base, 0.1 * base + 0.05});
    }
    return series;
}

std::vector<FeatureFrame> toy_frames(long t0, std::size_t n) {
    std::vector<FeatureFrame> frames;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(i);
        frames.push_back({t0 + static_cast<long>(i), std::sin(0.3 * u) + 2.0, 0.5 + 0.01 * u,
                          40.0 + std::cos(0.7 * u)});
    }
    return frames;
}

} // namespace

TEST_SUITE("env") {

TEST_CASE("action map is floored, anchored and monotone") {
    CHECK(std::fabs(delta_from_raw(-50.0) - 1e-3) <= 1e-12);
    CHECK(std::fabs(delta_from_raw(0.0) - 0.694147) <= 1e-6);
    CHECK(delta_from_raw(1.0) < delta_from_raw(2.0));
    CHECK(delta_from_raw(-3.0) > 0.0);
}

TEST_CASE("reset copies the window and validates it") {
    const auto series = toy_series(6);

    const Episode one = env_reset(series, 2, 1);
    CHECK(one.horizon == 1);
    CHECK(one.cursor == 0);
    CHECK(env_state(one) == series[2].cell);

    const Episode again = env_reset(series, 2, 1);
    CHECK(again.records.size() == one.records.size());
    for (std::size_t i = 0; i < one.records.size(); ++i) {
        CHECK(again.records[i].cell == one.records[i].cell);
        CHECK(again.records[i].y_hat_next == one.records[i].y_hat_next);
        CHECK(again.records[i].y_next == one.records[i].y_next);
    }

    CHECK_THROWS_AS(env_reset(series, 3, 4), ValidationError);
    CHECK_THROWS_AS(env_reset(series, 0, 0), ValidationError);
    CHECK_THROWS_AS(env_reset(series, 0, 3, 0.0), ValidationError);

    auto broken = series;
    broken[1].y_next = std::nan("");
    CHECK_THROWS_AS(env_reset(broken, 0, 3), ValidationError);

    auto uneven = series;
    uneven[2].cell.push_back(0.0);
    CHECK_THROWS_AS(env_reset(uneven, 0, 4), ValidationError);
}

TEST_CASE("step rewards are exactly the scaled score") {
    const auto series = toy_series(8);
    Episode ep = env_reset(series, 1, 3);

    const double a_raw = 0.4;
    const double expected =
        -0.75 * crps_gaussian({series[1].y_hat_next, delta_from_raw(a_raw)}, series[1].y_next);
    const StepResult st = env_step(ep, a_raw);
    CHECK(st.reward == expected);
    CHECK(st.reward <= 0.0);
    CHECK_FALSE(st.done);
    CHECK(st.next_state == series[2].cell);
    CHECK(env_state(ep) == series[2].cell);
}

TEST_CASE("unit forecast on a hit reproduces the known score") {
    std::vector<EnvRecord> series(2, EnvRecord{{0.0}, 0.0, 0.0});
    Episode ep = env_reset(series, 0, 1);
    const double a_unit = std::log(std::expm1(0.999));
    CHECK(std::fabs(delta_from_raw(a_unit) - 1.0) <= 1e-12);
    const StepResult st = env_step(ep, a_unit);
    CHECK(std::fabs(st.reward - (-0.175271)) <= 1e-5);
}

TEST_CASE("a better scale strictly improves the reward") {
    std::vector<EnvRecord> series(2, EnvRecord{{0.0}, 0.0, 0.0});
    const Episode ep = env_reset(series, 0, 1);
    const double a_half = std::log(std::expm1(0.499));
    const double a_unit = std::log(std::expm1(0.999));
    CHECK(env_peek_reward(ep, a_half) > env_peek_reward(ep, a_unit));
}

TEST_CASE("episode termination and the terminal next state") {
    const auto series = toy_series(6);

    Episode tail = env_reset(series, 3, 3);
    CHECK(tail.records.size() == 3);
    env_step(tail, 0.0);
    env_step(tail, 0.0);
    const StepResult last = env_step(tail, 0.0);
    CHECK(last.done);
    CHECK(last.next_state == series[5].cell);
    CHECK_THROWS_AS(env_step(tail, 0.0), ValidationError);
    CHECK_THROWS_AS(env_state(tail), ValidationError);

    Episode inner = env_reset(series, 0, 2);
    CHECK(inner.records.size() == 3);
    env_step(inner, 0.0);
    const StepResult done = env_step(inner, 0.0);
    CHECK(done.done);
    CHECK(done.next_state == series[2].cell);
}

TEST_CASE("peeking never advances the episode") {
    const auto series = toy_series(5);
    Episode ep = env_reset(series, 0, 4);
    env_step(ep, 0.1);
    const std::size_t cursor_before = ep.cursor;

    const double peeked = env_peek_reward(ep, -0.3);
    const double at2 = env_peek_reward_at(ep, 2, -0.3);
    CHECK(ep.cursor == cursor_before);
    CHECK(env_state_at(ep, 2) == series[2].cell);

    const StepResult st = env_step(ep, -0.3);
    CHECK(st.reward == peeked);
    CHECK(env_peek_reward(ep, -0.3) == at2);

    CHECK_THROWS_AS(env_peek_reward_at(ep, 4, 0.0), ValidationError);
    CHECK_THROWS_AS(env_state_at(ep, 4), ValidationError);
}

TEST_CASE("reward has a unique interior maximum over the action") {
    std::vector<EnvRecord> series(2, EnvRecord{{1.0, 2.0}, 0.3, 1.1});
    const Episode ep = env_reset(series, 0, 1);

    std::vector<double> rewards;
    for (double a = -8.0; a <= 6.0; a += 0.05) rewards.push_back(env_peek_reward(ep, a));

    std::size_t best = 0;
    for (std::size_t i = 1; i < rewards.size(); ++i)
        if (rewards[i] > rewards[best]) best = i;
    REQUIRE(best > 0);
    REQUIRE(best + 1 < rewards.size());
    for (std::size_t i = 0; i < best; ++i) CHECK(rewards[i] < rewards[i + 1]);
    for (std::size_t i = best; i + 1 < rewards.size(); ++i) CHECK(rewards[i] > rewards[i + 1]);
}

TEST_CASE("records join cell extractions with the realized series") {
    const auto frames = toy_frames(100, 16);
    RngStream rng(5, 0);
    const LstmParams p = init_lstm(4, 3, rng);
    const std::string frozen = serialize_lstm(p);

    const auto cells = extract_cell_states(p, frames, 12);
    REQUIRE(cells.size() == 4);
    const auto records = make_env_records(cells, frames);
    REQUIRE(records.size() == cells.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].cell == cells[i].cell);
        CHECK(records[i].y_hat_next == cells[i].y_hat_next);
        CHECK(records[i].y_next == frames[12 + i].energy_kwh);
    }

    Episode ep = env_reset(records, 0, records.size());
    while (ep.cursor < ep.horizon) env_step(ep, 0.2);
    CHECK(serialize_lstm(p) == frozen);

    auto gap = frames;
    gap.erase(gap.begin() + 14);
    CHECK_THROWS_AS(make_env_records(cells, gap), ValidationError);
    const std::vector<FeatureFrame> other = toy_frames(500, 16);
    CHECK_THROWS_AS(make_env_records(cells, other), ValidationError);
}

} // TEST_SUITE
