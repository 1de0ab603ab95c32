#pragma once

// Brute-force reference for the hourly session features: reconstructs the
// cumulative energy curve as a piecewise-linear interpolation through every
// known anchor point, then re-bins it minute by minute. Deliberately shares
// no code with the library's telescoping implementation.

#include "evcast/sessions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace testoracle {

struct MinuteFeatures {
    double energy_kwh = 0.0;
    double charger_hours = 0.0;
    double satisfaction_pct = 0.0;
};

class SessionCurve {
public:
    explicit SessionCurve(const evcast::ChargingSession& s) : s_(s) {
        anchors_.push_back({s.t_arr, s.e_arr});
        for (const auto& [t, v] : s.hourly_energy) {
            anchors_.push_back({static_cast<double>(t), v});
        }
        anchors_.push_back({s.t_dc, s.e_dc});
        anchors_.push_back({s.t_de, s.e_dc});
        std::sort(anchors_.begin(), anchors_.end());
        anchors_.erase(std::unique(anchors_.begin(), anchors_.end(),
                                   [](const auto& a, const auto& b) { return a.first == b.first; }),
                       anchors_.end());
    }

    double eval(double u) const {
        if (u <= anchors_.front().first) return anchors_.front().second;
        if (u >= anchors_.back().first) return anchors_.back().second;
        for (std::size_t i = 1; i < anchors_.size(); ++i) {
            if (u <= anchors_[i].first) {
                const auto& [t0, v0] = anchors_[i - 1];
                const auto& [t1, v1] = anchors_[i];
                return v0 + (v1 - v0) * (u - t0) / (t1 - t0);
            }
        }
        return anchors_.back().second;
    }

private:
    const evcast::ChargingSession& s_;
    std::vector<std::pair<double, double>> anchors_;
};

/// Minute-by-minute rebinning of one session into hourly features.
inline std::map<long, MinuteFeatures> session_features_by_minutes(
    const evcast::ChargingSession& s) {
    const SessionCurve curve(s);
    const long first = static_cast<long>(std::floor(s.t_arr)) + 1;
    const long last = static_cast<long>(std::ceil(s.t_de));

    std::map<long, MinuteFeatures> out;
    for (long t = first; t <= last; ++t) {
        MinuteFeatures f;
        for (int m = 0; m < 60; ++m) {
            const double a = static_cast<double>(t - 1) + m / 60.0;
            const double b = static_cast<double>(t - 1) + (m + 1) / 60.0;
            f.energy_kwh += curve.eval(b) - curve.eval(a);
            f.charger_hours += std::max(0.0, std::min(b, s.t_de) - std::max(a, s.t_arr));
        }
        f.satisfaction_pct = f.energy_kwh / (s.e_user - s.e_arr) * 100.0;
        out[t] = f;
    }
    return out;
}

} // namespace testoracle
