#include "evcast/env.hpp"

#include "evcast/error.hpp"
#include "evcast/metrics.hpp"

#include <cmath>
#include <string>

namespace evcast {

namespace {

bool record_is_finite(const EnvRecord& r) {
    if (!std::isfinite(r.y_hat_next) || !std::isfinite(r.y_next)) return false;
    for (double v : r.cell)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace

std::vector<EnvRecord> make_env_records(const std::vector<CellRecord>& cells,
                                        const std::vector<FeatureFrame>& frames) {
    std::vector<EnvRecord> out;
    out.reserve(cells.size());
    std::size_t j = 0;
    for (const CellRecord& rec : cells) {
        while (j < frames.size() && frames[j].t < rec.t) ++j;
        if (j >= frames.size() || frames[j].t != rec.t)
            throw ValidationError("make_env_records: hour " + std::to_string(rec.t) +
                                  " is missing from the frame series");
        if (j + 1 >= frames.size() || frames[j + 1].t != rec.t + 1)
            throw ValidationError("make_env_records: hour " + std::to_string(rec.t) +
                                  " has no contiguous successor frame");
        out.push_back({rec.cell, rec.y_hat_next, frames[j + 1].energy_kwh});
    }
    return out;
}

Episode env_reset(const std::vector<EnvRecord>& series, std::size_t start, std::size_t t_ep,
                  double zeta) {
    if (t_ep == 0) throw ValidationError("env_reset: horizon must be positive");
    if (!std::isfinite(zeta) || !(zeta > 0.0))
        throw ValidationError("env_reset: zeta must be positive and finite");
    if (start > series.size() || t_ep > series.size() - start)
        throw ValidationError("env_reset: window [" + std::to_string(start) + ", " +
                              std::to_string(start + t_ep) + ") overruns the " +
                              std::to_string(series.size()) + "-record series");

    Episode ep;
    ep.horizon = t_ep;
    ep.zeta = zeta;
    const std::size_t stop = std::min(series.size(), start + t_ep + 1);
    ep.records.assign(series.begin() + static_cast<std::ptrdiff_t>(start),
                      series.begin() + static_cast<std::ptrdiff_t>(stop));

    const std::size_t width = ep.records.front().cell.size();
    if (width == 0) throw ValidationError("env_reset: empty cell vector");
    for (std::size_t i = 0; i < ep.records.size(); ++i) {
        if (ep.records[i].cell.size() != width)
            throw ValidationError("env_reset: record " + std::to_string(start + i) +
                                  " has mismatched cell width");
        if (!record_is_finite(ep.records[i]))
            throw ValidationError("env_reset: record " + std::to_string(start + i) +
                                  " holds non-finite values");
    }
    return ep;
}

const Tensor& env_state(const Episode& ep) {
    if (ep.cursor >= ep.horizon) throw ValidationError("env_state: episode is done");
    return ep.records[ep.cursor].cell;
}

const Tensor& env_state_at(const Episode& ep, std::size_t index) {
    if (index >= ep.horizon)
        throw ValidationError("env_state_at: index " + std::to_string(index) +
                              " is outside the horizon " + std::to_string(ep.horizon));
    return ep.records[index].cell;
}

double delta_from_raw(double a_raw) {
    return softplus(a_raw) + 1e-3;
}

double env_peek_reward_at(const Episode& ep, std::size_t index, double a_raw) {
    if (index >= ep.horizon)
        throw ValidationError("env_peek_reward_at: index " + std::to_string(index) +
                              " is outside the horizon " + std::to_string(ep.horizon));
    const EnvRecord& rec = ep.records[index];
    const double delta = delta_from_raw(a_raw);
    return -ep.zeta * crps_gaussian({rec.y_hat_next, delta}, rec.y_next);
}

double env_peek_reward(const Episode& ep, double a_raw) {
    return env_peek_reward_at(ep, ep.cursor, a_raw);
}

StepResult env_step(Episode& ep, double a_raw) {
    if (ep.cursor >= ep.horizon) throw ValidationError("env_step: episode is done");

    StepResult res;
    res.reward = env_peek_reward_at(ep, ep.cursor, a_raw);
    const std::size_t next = ep.cursor + 1;
    res.next_state = next < ep.records.size() ? ep.records[next].cell : ep.records[ep.cursor].cell;
    ep.cursor = next;
    res.done = ep.cursor == ep.horizon;
    return res;
}

} // namespace evcast
