#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace evcast {

/// One charger's record of a single EV visit. Times are fractional hours on
/// a shared hourly timeline; energies are cumulative battery readings in kWh.
/// hourly_energy maps each integer instant t strictly between t_arr and t_de
/// to the cumulative reading e_t at that instant, where hour t labels the
/// interval (t-1, t].
struct ChargingSession {
    int charger_id = 0;
    double t_arr = 0.0;
    double t_dc = 0.0;
    double t_de = 0.0;
    double e_arr = 0.0;
    double e_dc = 0.0;
    double e_de = 0.0;
    double e_user = 0.0;
    std::map<long, double> hourly_energy;
};

/// One failed invariant: which field broke which rule. Violations are data,
/// not exceptions, so callers can collect and report all of them at once.
struct Violation {
    std::string field;
    std::string rule;
};

/// Checks every ChargingSession invariant. Returns an empty list iff the
/// session is well formed.
std::vector<Violation> validate_session(const ChargingSession& s);

/// Throws ValidationError listing all violations, prefixed with the
/// caller-supplied record label (row number or array index).
void require_valid_session(const ChargingSession& s, const std::string& label);

/// Parses the canonical JSON array or the 10-column CSV, autodetected from
/// the first non-space character. Every returned session is validated;
/// malformed input names the offending record and field.
std::vector<ChargingSession> parse_sessions(const std::string& text);
std::vector<ChargingSession> parse_sessions_json(const std::string& text);
std::vector<ChargingSession> parse_sessions_csv(const std::string& text);

std::string serialize_sessions_json(const std::vector<ChargingSession>& sessions);

/// One row per (session, hour); sessions with no interior hourly readings
/// emit a single row with empty hour columns.
std::string serialize_sessions_csv(const std::vector<ChargingSession>& sessions);

/// Configuration of the synthetic session generator, a desk-scale stand-in
/// for a real charging-network export.
struct SynthConfig {
    long horizon_hours = 720;
    int chargers = 5;
    double arrival_rate = 0.1;
    double mean_stay_hours = 8.0;
    double mean_demand_kwh = 20.0;
    double charge_rate_kw = 6.0;
    double noise_std = 0.0;
    std::uint64_t seed = 0;
};

/// Poisson arrivals per charger, exponential stays, truncated-normal demand,
/// constant-rate charging until demand or departure. A charger that is still
/// occupied shifts the next arrival to its departure instant, which keeps the
/// arrival count intact; shifted arrivals falling past the horizon are
/// dropped. Deterministic in cfg.seed. Every emitted session validates.
std::vector<ChargingSession> generate_synthetic(const SynthConfig& cfg);

/// Outcome summary of an ACN-style import.
struct AcnReport {
    std::size_t records_seen = 0;
    std::size_t sessions_kept = 0;
    std::vector<std::string> dropped;
    std::vector<std::pair<std::string, int>> charger_ids;
    long long origin_epoch_seconds = 0;
};

/// Maps ACN charging-session exports (array of objects, or an object whose
/// "_items" holds one) onto ChargingSession. Field mapping:
///   connectionTime -> t_arr, doneChargingTime -> t_dc (null: disconnectTime),
///   disconnectTime -> t_de, kWhDelivered -> e_dc - e_arr with e_arr = 0,
///   kWhRequested -> e_user (absent: kWhDelivered).
/// Station identifiers are assigned dense charger ids in first-seen order.
/// Timestamps accept RFC 1123 and ISO 8601 and are rebased to hours since
/// midnight UTC of the earliest connection day. Cumulative hourly readings
/// are reconstructed as a linear ramp between arrival and done-charging.
/// Records that cannot form a valid session are dropped and reported.
std::vector<ChargingSession> acn_to_sessions(const std::string& text, AcnReport* report = nullptr);

/// Calendar month (1..12, UTC) of the instant origin_epoch_seconds plus
/// hour * 3600. Lets hourly scores be grouped by season when the timeline's
/// calendar origin is known.
int month_of_hour(long long origin_epoch_seconds, long hour);

} // namespace evcast
