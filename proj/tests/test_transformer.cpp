#include <doctest.h>

#include "evcast/error.hpp"
#include "evcast/sessions.hpp"
#include "evcast/transformer.hpp"
#include "session_minute_oracle.hpp"

#include <cmath>

using namespace evcast;

namespace {

ChargingSession worked_session() {
    ChargingSession s;
    s.charger_id = 1;
    s.t_arr = 2.5;
    s.t_dc = 5.2;
    s.t_de = 6.8;
    s.e_arr = 10.0;
    s.e_dc = 26.5;
    s.e_de = 26.5;
    s.e_user = 30.0;
    s.hourly_energy = {{3, 14.0}, {4, 20.0}, {5, 26.0}, {6, 26.5}};
    return s;
}

} // namespace

TEST_SUITE("transformer") {

TEST_CASE("worked session features match the hand computation") {
    const auto f = session_features(worked_session());
    REQUIRE(f.size() == 5);

    CHECK(f.at(3).energy_kwh == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(f.at(4).energy_kwh == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(f.at(5).energy_kwh == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(f.at(6).energy_kwh == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.at(7).energy_kwh == doctest::Approx(0.0).epsilon(1e-12));

    CHECK(f.at(3).charger_hours == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.at(4).charger_hours == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.at(5).charger_hours == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.at(6).charger_hours == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.at(7).charger_hours == doctest::Approx(0.8).epsilon(1e-10));

    CHECK(f.at(3).satisfaction_pct == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(f.at(4).satisfaction_pct == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(f.at(5).satisfaction_pct == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(f.at(6).satisfaction_pct == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f.at(7).satisfaction_pct == doctest::Approx(0.0).epsilon(1e-12));

    double total = 0.0;
    for (const auto& [t, v] : f) total += v.energy_kwh;
    CHECK(std::fabs(total - 16.5) <= 1e-9);
}

TEST_CASE("strict paper mode zeroes the undefined boundary hours") {
    const auto f = session_features(worked_session(), true);
    CHECK(f.at(3).energy_kwh == doctest::Approx(4.0));
    CHECK(f.at(6).energy_kwh == 0.0);
    CHECK(f.at(7).charger_hours == 0.0);
    double total = 0.0;
    for (const auto& [t, v] : f) total += v.energy_kwh;
    CHECK(total == doctest::Approx(16.0));
}

TEST_CASE("session features conserve energy on synthetic data") {
    SynthConfig cfg;
    cfg.horizon_hours = 300;
    cfg.chargers = 4;
    cfg.arrival_rate = 0.12;
    cfg.noise_std = 0.3;
    cfg.seed = 21;
    const auto sessions = generate_synthetic(cfg);
    REQUIRE(sessions.size() > 20);
    for (const auto& s : sessions) {
        const auto f = session_features(s);
        double total = 0.0;
        for (const auto& [t, v] : f) {
            total += v.energy_kwh;
            CHECK(v.energy_kwh >= -1e-12);
            CHECK(v.charger_hours > 0.0);
            CHECK(v.charger_hours <= 1.0 + 1e-12);
        }
        CHECK(std::fabs(total - (s.e_dc - s.e_arr)) <= 1e-9);
    }
}

TEST_CASE("session features match the minute-resolution oracle") {
    SynthConfig cfg;
    cfg.horizon_hours = 300;
    cfg.chargers = 3;
    cfg.arrival_rate = 0.1;
    cfg.noise_std = 0.25;
    cfg.seed = 5;
    const auto sessions = generate_synthetic(cfg);
    REQUIRE(!sessions.empty());
    for (const auto& s : sessions) {
        const auto got = session_features(s);
        const auto want = testoracle::session_features_by_minutes(s);
        REQUIRE(got.size() == want.size());
        for (const auto& [t, w] : want) {
            REQUIRE(got.count(t) == 1);
            CHECK(std::fabs(got.at(t).energy_kwh - w.energy_kwh) <= 1e-6);
            CHECK(std::fabs(got.at(t).charger_hours - w.charger_hours) <= 1e-6);
            CHECK(std::fabs(got.at(t).satisfaction_pct - w.satisfaction_pct) <= 1e-6);
        }
    }
}

TEST_CASE("aggregate_frames sums, ranges, and zero-fills") {
    const auto empty = aggregate_frames({}, 0, 5);
    REQUIRE(empty.size() == 5);
    for (const auto& f : empty) {
        CHECK(f.energy_kwh == 0.0);
        CHECK(f.charger_hours == 0.0);
        CHECK(f.satisfaction_pct == 0.0);
    }

    auto a = worked_session();
    auto b = worked_session();
    b.charger_id = 2;
    const auto doubled = aggregate_frames({a, b}, 0, 10);
    const auto single = aggregate_frames({a}, 0, 10);
    REQUIRE(doubled.size() == 10);
    for (std::size_t i = 0; i < doubled.size(); ++i) {
        CHECK(doubled[i].energy_kwh == doctest::Approx(2.0 * single[i].energy_kwh));
        CHECK(doubled[i].charger_hours == doctest::Approx(2.0 * single[i].charger_hours));
        CHECK(doubled[i].satisfaction_pct == doctest::Approx(2.0 * single[i].satisfaction_pct));
    }

    auto shifted = worked_session();
    shifted.t_arr += 20;
    shifted.t_dc += 20;
    shifted.t_de += 20;
    std::map<long, double> moved;
    for (const auto& [t, v] : shifted.hourly_energy) moved[t + 20] = v;
    shifted.hourly_energy = moved;
    const auto unioned = aggregate_frames({a, shifted}, 0, 30);
    CHECK(unioned[3].energy_kwh == doctest::Approx(4.0));
    CHECK(unioned[23].energy_kwh == doctest::Approx(4.0));
    CHECK(unioned[15].energy_kwh == 0.0);

    const auto clipped = aggregate_frames({a}, 4, 6);
    REQUIRE(clipped.size() == 2);
    CHECK(clipped[0].t == 4);
    CHECK(clipped[0].energy_kwh == doctest::Approx(6.0));

    CHECK_THROWS_AS(aggregate_frames({}, 5, 4), ValidationError);
}

TEST_CASE("make_windows counts and contents") {
    std::vector<FeatureFrame> frames(13);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        frames[i].t = static_cast<long>(i);
        frames[i].energy_kwh = static_cast<double>(i);
        frames[i].charger_hours = 2.0;
        frames[i].satisfaction_pct = 3.0;
    }
    auto w = make_windows(frames, 12);
    REQUIRE(w.size() == 1);
    CHECK(w[0].t_target == 12);
    CHECK(w[0].target == 12.0);
    CHECK(w[0].x.rows == 12);
    CHECK(w[0].x.cols == 3);
    CHECK(w[0].x(0, 0) == 0.0);
    CHECK(w[0].x(11, 0) == 11.0);
    CHECK(w[0].x(5, 1) == 2.0);

    frames.resize(100);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        frames[i].t = static_cast<long>(i);
        frames[i].energy_kwh = std::sin(0.1 * static_cast<double>(i));
    }
    w = make_windows(frames, 12);
    CHECK(w.size() == 88);
    CHECK(w.front().t_target == 12);
    CHECK(w.back().t_target == 99);

    CHECK_THROWS_AS(make_windows(std::vector<FeatureFrame>(12), 12), ValidationError);
    CHECK_THROWS_AS(make_windows(frames, 0), ValidationError);
}

TEST_CASE("normalizer round trip and training statistics") {
    SynthConfig cfg;
    cfg.horizon_hours = 200;
    cfg.chargers = 3;
    cfg.arrival_rate = 0.2;
    cfg.seed = 9;
    const auto frames = aggregate_frames(generate_synthetic(cfg), 0, 200);
    const auto n = fit_normalizer(frames);

    const auto forward = normalize_frames(frames, n);
    std::vector<double> es;
    for (const auto& f : forward) es.push_back(f.energy_kwh);
    CHECK(std::fabs(mean_of(es)) <= 1e-9);
    CHECK(std::fabs(stddev_of(es) - 1.0) <= 1e-9);

    const auto back = denormalize_frames(forward, n);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(std::fabs(back[i].energy_kwh - frames[i].energy_kwh) <= 1e-12 * std::max(1.0, std::fabs(frames[i].energy_kwh)));
        CHECK(std::fabs(back[i].charger_hours - frames[i].charger_hours) <= 1e-12 * std::max(1.0, std::fabs(frames[i].charger_hours)));
    }

    CHECK(denormalize_energy(0.0, n) == doctest::Approx(n.mean[0]));
    CHECK(normalize_energy(denormalize_energy(1.7, n), n) == doctest::Approx(1.7));
    CHECK(denormalize_scale(1.0, n) == doctest::Approx(n.stddev[0]));

    std::vector<FeatureFrame> constant(50);
    for (auto& f : constant) {
        f.energy_kwh = 2.0;
        f.charger_hours = 1.0;
        f.satisfaction_pct = 10.0;
    }
    CHECK_THROWS_AS(fit_normalizer(constant), ValidationError);
}

} // TEST_SUITE
