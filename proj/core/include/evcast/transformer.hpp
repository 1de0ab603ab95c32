#pragma once

#include "evcast/numerics.hpp"
#include "evcast/sessions.hpp"

#include <array>
#include <map>
#include <span>
#include <vector>

namespace evcast {

/// Aggregated station features for one hour t (the interval (t-1, t]):
/// energy delivered, charger-hours occupied, and percent of requested energy
/// satisfied, summed over all sessions active that hour.
struct FeatureFrame {
    long t = 0;
    double energy_kwh = 0.0;
    double charger_hours = 0.0;
    double satisfaction_pct = 0.0;
};

/// Per-session slice of the three features for one hour.
struct SessionHourFeatures {
    double energy_kwh = 0.0;
    double charger_hours = 0.0;
    double satisfaction_pct = 0.0;
};

/// Supervised sample: x holds N_h consecutive (normalized) feature rows for
/// hours t_target-N_h .. t_target-1; target is the normalized energy at
/// t_target.
struct WindowedSample {
    Matrix x;
    double target = 0.0;
    long t_target = 0;
};

/// Z-score statistics per feature channel (energy, charger-hours,
/// satisfaction), fitted on the training split only. The forecast target
/// shares the energy channel's statistics.
struct Normalizer {
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    std::array<double, 3> stddev{1.0, 1.0, 1.0};
};

/// Splits one session into per-hour features. The cumulative reading is
/// extended to every integer instant u as e_arr for u <= t_arr, e_dc for
/// u >= t_dc and the stored hourly reading in between, so hourly energies
/// telescope and sum exactly to e_dc - e_arr. The hour containing t_dc
/// receives the residual energy; the departure hour reports the occupied
/// fraction t_de - (t-1). strict_paper disables both boundary fixes and
/// emits 0 where the piecewise definitions say nothing.
std::map<long, SessionHourFeatures> session_features(const ChargingSession& s,
                                                     bool strict_paper = false);

/// Sums session features per hour over [hour_begin, hour_end). Hours without
/// any activity yield explicit zero frames so downstream windows stay
/// contiguous. All sessions must validate.
std::vector<FeatureFrame> aggregate_frames(const std::vector<ChargingSession>& sessions,
                                           long hour_begin, long hour_end,
                                           bool strict_paper = false);

/// Fits per-channel mean and population standard deviation. Rejects constant
/// channels (stddev would be zero).
Normalizer fit_normalizer(std::span<const FeatureFrame> frames);

std::vector<FeatureFrame> normalize_frames(const std::vector<FeatureFrame>& frames,
                                           const Normalizer& n);
std::vector<FeatureFrame> denormalize_frames(const std::vector<FeatureFrame>& frames,
                                             const Normalizer& n);

/// Energy-channel scalar transforms for forecast targets: mean moves and
/// rescales, a distribution scale only rescales.
double normalize_energy(double value, const Normalizer& n);
double denormalize_energy(double value, const Normalizer& n);
double denormalize_scale(double scale, const Normalizer& n);

/// One sample per hour i in [n_h, len): x stacks hours i-n_h .. i-1, target
/// is the energy at hour i. Frames are used as given; normalize first.
std::vector<WindowedSample> make_windows(const std::vector<FeatureFrame>& frames,
                                         std::size_t n_h);

/// Frames as CSV with full round-trip precision, and back. Header:
/// t,energy_kwh,charger_hours,satisfaction_pct.
std::string frames_to_csv(const std::vector<FeatureFrame>& frames);
std::vector<FeatureFrame> parse_frames_csv(const std::string& text);

} // namespace evcast
