#include "evcast/transformer.hpp"

#include "evcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

namespace evcast {

namespace {

/// Cumulative reading extended to any integer instant.
double reading_at(const ChargingSession& s, long u) {
    const double uu = static_cast<double>(u);
    if (uu <= s.t_arr) return s.e_arr;
    if (uu >= s.t_dc) return s.e_dc;
    return s.hourly_energy.at(u);
}

} // namespace

std::map<long, SessionHourFeatures> session_features(const ChargingSession& s,
                                                     bool strict_paper) {
    require_valid_session(s, "session_features");
    if (!(s.e_user > s.e_arr))
        throw ValidationError("session_features: e_user must exceed e_arr");

    const long first = static_cast<long>(std::floor(s.t_arr)) + 1;
    const long last = static_cast<long>(std::ceil(s.t_de));
    const double denom = s.e_user - s.e_arr;

    std::map<long, SessionHourFeatures> out;
    for (long t = first; t <= last; ++t) {
        const double td = static_cast<double>(t);
        SessionHourFeatures f;

        if (!strict_paper) {
            f.energy_kwh = reading_at(s, t) - reading_at(s, t - 1);
            f.charger_hours =
                std::clamp(std::min(s.t_de, td) - std::max(s.t_arr, td - 1.0), 0.0, 1.0);
        } else {
            const bool arrival_hour = s.t_arr > td - 1.0 && s.t_arr <= td;
            if (arrival_hour) {
                f.energy_kwh = reading_at(s, t) - s.e_arr;
            } else if (td - 1.0 >= s.t_arr && td <= s.t_dc) {
                f.energy_kwh = reading_at(s, t) - reading_at(s, t - 1);
            } else {
                f.energy_kwh = 0.0;
            }
            if (arrival_hour) {
                f.charger_hours = std::min(td, s.t_de) - s.t_arr;
            } else if (td - 1.0 >= s.t_arr && td <= s.t_de) {
                f.charger_hours = 1.0;
            } else {
                f.charger_hours = 0.0;
            }
        }
        f.satisfaction_pct = f.energy_kwh / denom * 100.0;
        out[t] = f;
    }
    return out;
}

std::vector<FeatureFrame> aggregate_frames(const std::vector<ChargingSession>& sessions,
                                           long hour_begin, long hour_end,
                                           bool strict_paper) {
    if (hour_end < hour_begin)
        throw ValidationError("aggregate_frames: hour range must not be reversed");

    std::vector<FeatureFrame> frames(static_cast<std::size_t>(hour_end - hour_begin));
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i].t = hour_begin + static_cast<long>(i);

    for (std::size_t k = 0; k < sessions.size(); ++k) {
        const auto features = session_features(sessions[k], strict_paper);
        for (const auto& [t, f] : features) {
            if (t < hour_begin || t >= hour_end) continue;
            FeatureFrame& frame = frames[static_cast<std::size_t>(t - hour_begin)];
            frame.energy_kwh += f.energy_kwh;
            frame.charger_hours += f.charger_hours;
            frame.satisfaction_pct += f.satisfaction_pct;
        }
    }
    return frames;
}

Normalizer fit_normalizer(std::span<const FeatureFrame> frames) {
    if (frames.empty()) throw ValidationError("fit_normalizer: no frames");

    Normalizer n;
    std::vector<double> channel(frames.size());
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const FeatureFrame& f = frames[i];
            channel[i] = c == 0 ? f.energy_kwh : c == 1 ? f.charger_hours : f.satisfaction_pct;
        }
        n.mean[static_cast<std::size_t>(c)] = mean_of(channel);
        n.stddev[static_cast<std::size_t>(c)] = stddev_of(channel);
        if (!(n.stddev[static_cast<std::size_t>(c)] > 1e-12))
            throw ValidationError("fit_normalizer: channel " + std::to_string(c) +
                                  " is constant on the training split");
    }
    return n;
}

namespace {

std::vector<FeatureFrame> transform_frames(const std::vector<FeatureFrame>& frames,
                                           const Normalizer& n, bool inverse) {
    std::vector<FeatureFrame> out = frames;
    for (FeatureFrame& f : out) {
        double* vals[3] = {&f.energy_kwh, &f.charger_hours, &f.satisfaction_pct};
        for (std::size_t c = 0; c < 3; ++c) {
            if (inverse) {
                *vals[c] = *vals[c] * n.stddev[c] + n.mean[c];
            } else {
                *vals[c] = (*vals[c] - n.mean[c]) / n.stddev[c];
            }
        }
    }
    return out;
}

} // namespace

std::vector<FeatureFrame> normalize_frames(const std::vector<FeatureFrame>& frames,
                                           const Normalizer& n) {
    return transform_frames(frames, n, false);
}

std::vector<FeatureFrame> denormalize_frames(const std::vector<FeatureFrame>& frames,
                                             const Normalizer& n) {
    return transform_frames(frames, n, true);
}

double normalize_energy(double value, const Normalizer& n) {
    return (value - n.mean[0]) / n.stddev[0];
}

double denormalize_energy(double value, const Normalizer& n) {
    return value * n.stddev[0] + n.mean[0];
}

double denormalize_scale(double scale, const Normalizer& n) {
    return scale * n.stddev[0];
}

std::vector<WindowedSample> make_windows(const std::vector<FeatureFrame>& frames,
                                         std::size_t n_h) {
    if (n_h == 0) throw ValidationError("make_windows: n_h must be positive");
    if (frames.size() <= n_h)
        throw ValidationError("make_windows: need more than " + std::to_string(n_h) +
                              " frames, got " + std::to_string(frames.size()));

    std::vector<WindowedSample> out;
    out.reserve(frames.size() - n_h);
    for (std::size_t i = n_h; i < frames.size(); ++i) {
        WindowedSample s;
        s.x = Matrix(n_h, 3);
        for (std::size_t r = 0; r < n_h; ++r) {
            const FeatureFrame& f = frames[i - n_h + r];
            s.x(r, 0) = f.energy_kwh;
            s.x(r, 1) = f.charger_hours;
            s.x(r, 2) = f.satisfaction_pct;
        }
        s.target = frames[i].energy_kwh;
        s.t_target = frames[i].t;
        out.push_back(std::move(s));
    }
    return out;
}

std::string frames_to_csv(const std::vector<FeatureFrame>& frames) {
    std::ostringstream out;
    out << "t,energy_kwh,charger_hours,satisfaction_pct\n";
    char buf[32];
    const auto fmt = [&buf](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const FeatureFrame& f : frames) {
        out << f.t << "," << fmt(f.energy_kwh) << "," << fmt(f.charger_hours) << ","
            << fmt(f.satisfaction_pct) << "\n";
    }
    return out.str();
}

std::vector<FeatureFrame> parse_frames_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("frames CSV: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,energy_kwh,charger_hours,satisfaction_pct")
        throw ValidationError("frames CSV: unexpected header '" + line + "'");

    std::vector<FeatureFrame> frames;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        FeatureFrame f;
        std::size_t begin = 0;
        double cols[4] = {0.0, 0.0, 0.0, 0.0};
        for (int c = 0; c < 4; ++c) {
            const std::size_t end = line.find(',', begin);
            if ((end == std::string::npos) != (c == 3))
                throw ValidationError("frames CSV: row " + std::to_string(row) +
                                      " does not have four columns");
            const std::string field =
                line.substr(begin, end == std::string::npos ? end : end - begin);
            try {
                std::size_t used = 0;
                cols[c] = std::stod(field, &used);
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw ValidationError("frames CSV: row " + std::to_string(row) +
                                      " column " + std::to_string(c + 1) +
                                      " is not a number: '" + field + "'");
            }
            begin = end == std::string::npos ? line.size() : end + 1;
        }
        f.t = static_cast<long>(cols[0]);
        if (static_cast<double>(f.t) != cols[0])
            throw ValidationError("frames CSV: row " + std::to_string(row) +
                                  " hour is not an integer");
        f.energy_kwh = cols[1];
        f.charger_hours = cols[2];
        f.satisfaction_pct = cols[3];
        frames.push_back(f);
    }
    return frames;
}

} // namespace evcast
