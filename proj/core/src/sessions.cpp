#include "evcast/sessions.hpp"

#include "evcast/error.hpp"
#include "evcast/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace evcast {

namespace {

using nlohmann::json;

constexpr double kTol = 1e-9;

double scaled_tol(double x) { return kTol * std::max(1.0, std::fabs(x)); }

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

long first_interior_hour(double t_arr) { return static_cast<long>(std::floor(t_arr)) + 1; }

} // namespace

std::vector<Violation> validate_session(const ChargingSession& s) {
    std::vector<Violation> out;
    auto flag = [&out](std::string field, std::string rule) {
        out.push_back({std::move(field), std::move(rule)});
    };

    const double scalars[] = {s.t_arr, s.t_dc, s.t_de, s.e_arr, s.e_dc, s.e_de, s.e_user};
    const char* names[] = {"t_arr", "t_dc", "t_de", "e_arr", "e_dc", "e_de", "e_user"};
    for (int i = 0; i < 7; ++i) {
        if (!std::isfinite(scalars[i])) flag(names[i], "must be finite");
    }
    if (!out.empty()) return out;

    if (s.charger_id < 1) flag("charger_id", "must be a positive charger index");
    if (!(s.t_arr < s.t_dc)) flag("t_dc", "t_arr < t_dc must hold");
    if (!(s.t_dc <= s.t_de)) flag("t_de", "t_dc <= t_de must hold");
    if (!(s.e_arr <= s.e_dc)) flag("e_dc", "e_arr <= e_dc must hold");
    if (std::fabs(s.e_de - s.e_dc) > scaled_tol(s.e_dc))
        flag("e_de", "must equal e_dc (no energy change after charging ends)");
    if (!(s.e_user > s.e_arr)) flag("e_user", "must exceed e_arr (demand denominator)");

    double prev = s.e_arr;
    for (const auto& [t, v] : s.hourly_energy) {
        const std::string key = "hourly_energy[" + std::to_string(t) + "]";
        if (!std::isfinite(v)) {
            flag(key, "must be finite");
            continue;
        }
        if (!(static_cast<double>(t) > s.t_arr && static_cast<double>(t) < s.t_de))
            flag(key, "timestamp outside (t_arr, t_de)");
        if (v < prev - scaled_tol(prev)) flag(key, "cumulative reading must be nondecreasing");
        if (v < s.e_arr - scaled_tol(s.e_arr) || v > s.e_dc + scaled_tol(s.e_dc))
            flag(key, "reading outside [e_arr, e_dc]");
        if (static_cast<double>(t) >= s.t_dc && std::fabs(v - s.e_dc) > scaled_tol(s.e_dc))
            flag(key, "reading after t_dc must equal e_dc");
        prev = v;
    }
    if (s.t_de > s.t_arr) {
        for (long t = first_interior_hour(s.t_arr); t < s.t_de; ++t) {
            if (!s.hourly_energy.count(t))
                flag("hourly_energy", "missing reading at t=" + std::to_string(t));
        }
    }
    return out;
}

void require_valid_session(const ChargingSession& s, const std::string& label) {
    const auto violations = validate_session(s);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << label << ": invalid session:";
    for (const auto& v : violations) msg << " [" << v.field << ": " << v.rule << "]";
    throw ValidationError(msg.str());
}

namespace {

double json_number(const json& obj, const char* key, const std::string& label) {
    if (!obj.contains(key))
        throw ValidationError(label + "." + key + ": missing required field");
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ValidationError(label + "." + key + ": expected a number");
    return v.get<double>();
}

} // namespace

std::vector<ChargingSession> parse_sessions_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("sessions JSON: ") + e.what());
    }
    if (!root.is_array()) throw ValidationError("sessions JSON: top level must be an array");

    std::vector<ChargingSession> out;
    out.reserve(root.size());
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string label = "sessions[" + std::to_string(i) + "]";
        const json& rec = root[i];
        if (!rec.is_object()) throw ValidationError(label + ": expected an object");

        ChargingSession s;
        if (!rec.contains("charger_id") || !rec.at("charger_id").is_number_integer())
            throw ValidationError(label + ".charger_id: expected an integer");
        s.charger_id = rec.at("charger_id").get<int>();
        s.t_arr = json_number(rec, "t_arr", label);
        s.t_dc = json_number(rec, "t_dc", label);
        s.t_de = json_number(rec, "t_de", label);
        s.e_arr = json_number(rec, "e_arr", label);
        s.e_dc = json_number(rec, "e_dc", label);
        s.e_de = json_number(rec, "e_de", label);
        s.e_user = json_number(rec, "e_user", label);

        if (!rec.contains("hourly_energy") || !rec.at("hourly_energy").is_object())
            throw ValidationError(label + ".hourly_energy: expected an object");
        for (const auto& [k, v] : rec.at("hourly_energy").items()) {
            std::size_t pos = 0;
            long t = 0;
            try {
                t = std::stol(k, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != k.size())
                throw ValidationError(label + ".hourly_energy: key '" + k +
                                      "' is not an integer timestamp");
            if (!v.is_number())
                throw ValidationError(label + ".hourly_energy['" + k + "']: expected a number");
            s.hourly_energy[t] = v.get<double>();
        }

        require_valid_session(s, label);
        out.push_back(std::move(s));
    }
    return out;
}

std::string serialize_sessions_json(const std::vector<ChargingSession>& sessions) {
    json root = json::array();
    for (const auto& s : sessions) {
        json rec;
        rec["charger_id"] = s.charger_id;
        rec["t_arr"] = s.t_arr;
        rec["t_dc"] = s.t_dc;
        rec["t_de"] = s.t_de;
        rec["e_arr"] = s.e_arr;
        rec["e_dc"] = s.e_dc;
        rec["e_de"] = s.e_de;
        rec["e_user"] = s.e_user;
        json he = json::object();
        for (const auto& [t, v] : s.hourly_energy) he[std::to_string(t)] = v;
        rec["hourly_energy"] = std::move(he);
        root.push_back(std::move(rec));
    }
    return root.dump(2) + "\n";
}

namespace {

const char* kCsvHeader = "charger_id,t_arr,t_dc,t_de,e_arr,e_dc,e_de,e_user,hour,e_hour";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_field(const std::string& text, const char* field, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("sessions CSV line " + std::to_string(line_no) + ": field '" +
                              field + "' is not a number: '" + text + "'");
    }
}

} // namespace

std::vector<ChargingSession> parse_sessions_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ValidationError("sessions CSV: empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw ValidationError("sessions CSV: header must be '" + std::string(kCsvHeader) + "'");

    std::vector<ChargingSession> out;
    std::vector<std::string> prev_key;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 10)
            throw ValidationError("sessions CSV line " + std::to_string(line_no) +
                                  ": expected 10 columns, got " + std::to_string(fields.size()));

        std::vector<std::string> key(fields.begin(), fields.begin() + 8);
        if (key != prev_key) {
            ChargingSession s;
            s.charger_id = static_cast<int>(parse_double_field(fields[0], "charger_id", line_no));
            s.t_arr = parse_double_field(fields[1], "t_arr", line_no);
            s.t_dc = parse_double_field(fields[2], "t_dc", line_no);
            s.t_de = parse_double_field(fields[3], "t_de", line_no);
            s.e_arr = parse_double_field(fields[4], "e_arr", line_no);
            s.e_dc = parse_double_field(fields[5], "e_dc", line_no);
            s.e_de = parse_double_field(fields[6], "e_de", line_no);
            s.e_user = parse_double_field(fields[7], "e_user", line_no);
            out.push_back(std::move(s));
            prev_key = std::move(key);
        }
        if (!fields[8].empty() || !fields[9].empty()) {
            const long hour =
                static_cast<long>(parse_double_field(fields[8], "hour", line_no));
            out.back().hourly_energy[hour] = parse_double_field(fields[9], "e_hour", line_no);
        }
    }

    for (std::size_t i = 0; i < out.size(); ++i) {
        require_valid_session(out[i], "sessions CSV record " + std::to_string(i));
    }
    return out;
}

std::string serialize_sessions_csv(const std::vector<ChargingSession>& sessions) {
    std::ostringstream out;
    out << kCsvHeader << "\n";
    for (const auto& s : sessions) {
        const std::string prefix = std::to_string(s.charger_id) + "," + fmt17(s.t_arr) + "," +
                                   fmt17(s.t_dc) + "," + fmt17(s.t_de) + "," + fmt17(s.e_arr) +
                                   "," + fmt17(s.e_dc) + "," + fmt17(s.e_de) + "," +
                                   fmt17(s.e_user);
        if (s.hourly_energy.empty()) {
            out << prefix << ",,\n";
        } else {
            for (const auto& [t, v] : s.hourly_energy) {
                out << prefix << "," << t << "," << fmt17(v) << "\n";
            }
        }
    }
    return out.str();
}

std::vector<ChargingSession> parse_sessions(const std::string& text) {
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        if (ch == '[') return parse_sessions_json(text);
        break;
    }
    return parse_sessions_csv(text);
}

std::vector<ChargingSession> generate_synthetic(const SynthConfig& cfg) {
    if (cfg.horizon_hours < 48)
        throw ValidationError("generate_synthetic: horizon_hours must be >= 48");
    if (cfg.chargers < 1) throw ValidationError("generate_synthetic: chargers must be >= 1");
    if (!(cfg.arrival_rate >= 0.0))
        throw ValidationError("generate_synthetic: arrival_rate must be >= 0");
    if (!(cfg.mean_stay_hours > 0.0 && cfg.mean_demand_kwh > 0.0 && cfg.charge_rate_kw > 0.0))
        throw ValidationError("generate_synthetic: stay, demand and rate must be positive");
    if (!(cfg.noise_std >= 0.0)) throw ValidationError("generate_synthetic: noise_std must be >= 0");

    std::vector<ChargingSession> out;
    if (cfg.arrival_rate == 0.0) return out;

    RngStream root(cfg.seed, 0);
    const double horizon = static_cast<double>(cfg.horizon_hours);

    for (int c = 1; c <= cfg.chargers; ++c) {
        RngStream arrivals = root.split(static_cast<std::uint64_t>(c));
        double clock = 0.0;
        double prev_departure = 0.0;
        std::uint64_t ordinal = 0;

        while (true) {
            clock += -std::log(arrivals.next_unit()) / cfg.arrival_rate;
            if (clock >= horizon) break;
            RngStream draw = root.split(static_cast<std::uint64_t>(c)).split(1 + ordinal);
            ++ordinal;

            const double t_arr = std::max(clock, prev_departure);
            if (t_arr >= horizon) continue;

            const double stay = -cfg.mean_stay_hours * std::log(draw.next_unit());
            double demand = 0.0;
            for (int attempt = 0; attempt < 100; ++attempt) {
                demand = rng_gaussian(draw, cfg.mean_demand_kwh, 0.25 * cfg.mean_demand_kwh);
                if (demand > 1e-6) break;
                demand = 0.0;
            }
            if (demand == 0.0) demand = cfg.mean_demand_kwh;

            ChargingSession s;
            s.charger_id = c;
            s.t_arr = t_arr;
            s.t_de = t_arr + stay;
            const double charge_hours = std::min(demand / cfg.charge_rate_kw, stay);
            s.t_dc = t_arr + charge_hours;
            s.e_arr = 10.0 * draw.next_unit();
            s.e_user = s.e_arr + demand;
            s.e_dc = s.e_arr + cfg.charge_rate_kw * charge_hours;
            s.e_de = s.e_dc;

            double prev_reading = s.e_arr;
            for (long t = first_interior_hour(s.t_arr); t < s.t_de; ++t) {
                const double charged =
                    std::clamp(static_cast<double>(t) - s.t_arr, 0.0, charge_hours);
                double reading = s.e_arr + cfg.charge_rate_kw * charged;
                if (cfg.noise_std > 0.0 && static_cast<double>(t) < s.t_dc) {
                    reading += rng_gaussian(draw, 0.0, cfg.noise_std);
                    reading = std::clamp(reading, prev_reading, s.e_dc);
                }
                s.hourly_energy[t] = reading;
                prev_reading = reading;
            }

            prev_departure = s.t_de;
            require_valid_session(s, "generate_synthetic");
            out.push_back(std::move(s));
        }
    }
    return out;
}

namespace {

long long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

int month_from_name(const std::string& name) {
    static const char* names[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                  "jul", "aug", "sep", "oct", "nov", "dec"};
    if (name.size() < 3) return 0;
    std::string key = name.substr(0, 3);
    for (char& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    for (int i = 0; i < 12; ++i) {
        if (key == names[i]) return i + 1;
    }
    return 0;
}

/// Parses an ISO 8601 or RFC 1123 timestamp to fractional UTC epoch seconds.
bool parse_timestamp(const std::string& raw, double& epoch_seconds) {
    std::string s = raw;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) return false;

    int year = 0, mon = 0, day = 0, hh = 0, mm = 0;
    double ss = 0.0;
    int off_min = 0;
    std::string rest;

    if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
        year = std::atoi(s.substr(0, 4).c_str());
        mon = std::atoi(s.substr(5, 2).c_str());
        day = std::atoi(s.substr(8, 2).c_str());
        rest = s.substr(10);
        if (!rest.empty() && (rest[0] == 'T' || rest[0] == ' ')) rest.erase(rest.begin());
    } else {
        std::string body = s;
        const auto comma = body.find(',');
        if (comma != std::string::npos) body = body.substr(comma + 1);
        std::istringstream in(body);
        std::string mon_name;
        if (!(in >> day >> mon_name >> year)) return false;
        mon = month_from_name(mon_name);
        if (mon == 0) return false;
        std::getline(in, rest);
        while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front())))
            rest.erase(rest.begin());
    }
    if (mon < 1 || mon > 12 || day < 1 || day > 31) return false;

    if (!rest.empty()) {
        std::size_t i = 0;
        auto read_int = [&](int digits_min, int& out_val) {
            int val = 0, digits = 0;
            while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) {
                val = val * 10 + (rest[i] - '0');
                ++i;
                ++digits;
            }
            if (digits < digits_min) return false;
            out_val = val;
            return true;
        };
        if (!read_int(1, hh)) return false;
        if (i >= rest.size() || rest[i] != ':') return false;
        ++i;
        if (!read_int(1, mm)) return false;
        if (i < rest.size() && rest[i] == ':') {
            ++i;
            int whole = 0;
            if (!read_int(1, whole)) return false;
            ss = whole;
            if (i < rest.size() && rest[i] == '.') {
                ++i;
                double scale = 0.1;
                while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) {
                    ss += (rest[i] - '0') * scale;
                    scale *= 0.1;
                    ++i;
                }
            }
        }
        while (i < rest.size() && rest[i] == ' ') ++i;
        if (i < rest.size()) {
            std::string zone = rest.substr(i);
            while (!zone.empty() && std::isspace(static_cast<unsigned char>(zone.back())))
                zone.pop_back();
            if (zone == "Z" || zone == "GMT" || zone == "UTC" || zone == "z") {
                off_min = 0;
            } else if (!zone.empty() && (zone[0] == '+' || zone[0] == '-')) {
                const int sign = zone[0] == '-' ? -1 : 1;
                std::string digits;
                for (std::size_t k = 1; k < zone.size(); ++k) {
                    if (zone[k] != ':') digits.push_back(zone[k]);
                }
                if (digits.size() == 2) digits += "00";
                if (digits.size() != 4 ||
                    !std::all_of(digits.begin(), digits.end(),
                                 [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
                    return false;
                off_min = sign * (std::atoi(digits.substr(0, 2).c_str()) * 60 +
                                  std::atoi(digits.substr(2, 2).c_str()));
            } else {
                return false;
            }
        }
    }
    if (hh > 23 || mm > 59 || ss >= 61.0) return false;

    epoch_seconds = static_cast<double>(days_from_civil(year, static_cast<unsigned>(mon),
                                                        static_cast<unsigned>(day))) *
                        86400.0 +
                    hh * 3600.0 + mm * 60.0 + ss - off_min * 60.0;
    return true;
}

struct AcnRecord {
    double conn = 0.0, done = 0.0, disc = 0.0;
    double delivered = 0.0, requested = 0.0;
    bool has_requested = false;
    std::string station;
};

} // namespace

std::vector<ChargingSession> acn_to_sessions(const std::string& text, AcnReport* report) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("ACN JSON: ") + e.what());
    }
    const json* items = &root;
    if (root.is_object()) {
        if (!root.contains("_items") || !root.at("_items").is_array())
            throw ValidationError("ACN JSON: object form requires an '_items' array");
        items = &root.at("_items");
    } else if (!root.is_array()) {
        throw ValidationError("ACN JSON: top level must be an array or an '_items' object");
    }

    AcnReport local;
    AcnReport& rep = report ? *report : local;
    rep = AcnReport{};
    rep.records_seen = items->size();

    auto drop = [&rep](std::size_t i, const std::string& why) {
        rep.dropped.push_back("records[" + std::to_string(i) + "]: " + why);
    };

    std::vector<std::pair<std::size_t, AcnRecord>> kept;
    for (std::size_t i = 0; i < items->size(); ++i) {
        const json& rec = (*items)[i];
        if (!rec.is_object()) {
            drop(i, "not an object");
            continue;
        }
        AcnRecord r;
        auto time_field = [&](const char* key, double& out_val) {
            if (!rec.contains(key) || !rec.at(key).is_string()) return false;
            return parse_timestamp(rec.at(key).get<std::string>(), out_val);
        };
        if (!time_field("connectionTime", r.conn)) {
            drop(i, "missing or unparseable connectionTime");
            continue;
        }
        if (!time_field("disconnectTime", r.disc)) {
            drop(i, "missing or unparseable disconnectTime");
            continue;
        }
        if (rec.contains("doneChargingTime") && rec.at("doneChargingTime").is_string()) {
            if (!parse_timestamp(rec.at("doneChargingTime").get<std::string>(), r.done)) {
                drop(i, "unparseable doneChargingTime");
                continue;
            }
        } else {
            r.done = r.disc;
        }
        if (!rec.contains("kWhDelivered") || !rec.at("kWhDelivered").is_number()) {
            drop(i, "missing kWhDelivered");
            continue;
        }
        r.delivered = rec.at("kWhDelivered").get<double>();
        if (rec.contains("kWhRequested") && rec.at("kWhRequested").is_number()) {
            r.requested = rec.at("kWhRequested").get<double>();
            r.has_requested = true;
        }
        for (const char* key : {"stationID", "spaceID", "stationId", "spaceId"}) {
            if (rec.contains(key) && rec.at(key).is_string()) {
                r.station = rec.at(key).get<std::string>();
                break;
            }
        }
        if (r.station.empty()) r.station = "unknown";

        if (!(r.delivered > 0.0)) {
            drop(i, "kWhDelivered must be positive");
            continue;
        }
        if (!(r.disc > r.conn)) {
            drop(i, "disconnectTime must be after connectionTime");
            continue;
        }
        if (!(r.done > r.conn)) {
            drop(i, "doneChargingTime must be after connectionTime");
            continue;
        }
        r.done = std::min(r.done, r.disc);
        kept.push_back({i, std::move(r)});
    }

    std::vector<ChargingSession> out;
    if (kept.empty()) return out;

    double earliest = kept.front().second.conn;
    for (const auto& [i, r] : kept) earliest = std::min(earliest, r.conn);
    const double origin = std::floor(earliest / 86400.0) * 86400.0;
    rep.origin_epoch_seconds = static_cast<long long>(origin);

    std::map<std::string, int> charger_ids;
    for (const auto& [i, r] : kept) {
        ChargingSession s;
        auto found = charger_ids.find(r.station);
        if (found == charger_ids.end()) {
            const int id = static_cast<int>(charger_ids.size()) + 1;
            charger_ids.emplace(r.station, id);
            rep.charger_ids.push_back({r.station, id});
            s.charger_id = id;
        } else {
            s.charger_id = found->second;
        }

        s.t_arr = (r.conn - origin) / 3600.0;
        s.t_dc = (r.done - origin) / 3600.0;
        s.t_de = (r.disc - origin) / 3600.0;
        s.e_arr = 0.0;
        s.e_dc = r.delivered;
        s.e_de = r.delivered;
        s.e_user = (r.has_requested && r.requested > 0.0) ? r.requested : r.delivered;

        const double charge_hours = s.t_dc - s.t_arr;
        double prev_reading = s.e_arr;
        for (long t = first_interior_hour(s.t_arr); t < s.t_de; ++t) {
            const double charged = std::clamp(static_cast<double>(t) - s.t_arr, 0.0, charge_hours);
            double reading = s.e_arr + (s.e_dc - s.e_arr) * (charged / charge_hours);
            if (static_cast<double>(t) >= s.t_dc) reading = s.e_dc;
            reading = std::clamp(reading, prev_reading, s.e_dc);
            s.hourly_energy[t] = reading;
            prev_reading = reading;
        }

        const auto violations = validate_session(s);
        if (!violations.empty()) {
            drop(i, "mapped session failed validation on field '" + violations.front().field + "'");
            continue;
        }
        out.push_back(std::move(s));
    }
    rep.sessions_kept = out.size();
    return out;
}

int month_of_hour(long long origin_epoch_seconds, long hour) {
    const long long seconds = origin_epoch_seconds + static_cast<long long>(hour) * 3600;
    long long days = seconds / 86400;
    if (seconds % 86400 < 0) --days;
    const long long z = days + 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    return static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
}

} // namespace evcast
