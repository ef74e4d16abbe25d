#pragma once

#include <array>
#include <istream>
#include <map>
#include <string>
#include <string_view>

#include "rtoi/classify/classify.hpp"
#include "rtoi/core/csv.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/mdio/calendar.hpp"
#include "rtoi/panel/panel.hpp"
#include "rtoi/studies/eventstudy.hpp"
#include "rtoi/studies/longshort.hpp"

namespace rtoi::cli {

// Every module knob reachable from the command line, validated on set.
// `values` keeps the canonical text of every key (defaults included) so the
// manifest can hash the effective configuration.
struct RunConfig {
    ClassifyConfig classify;
    WeekRule week_rule = WeekRule::CalendarWeek;
    ReturnMode mode = ReturnMode::BidAsk;
    bool universe = true;
    studies::LongShortConfig longshort;
    studies::EventStudyConfig event;
    std::map<std::string, std::string> values;

    RunConfig() {
        for (const auto& [k, v] : defaults()) set(k, v);
    }

    static const std::map<std::string, std::string>& defaults() {
        static const std::map<std::string, std::string> d = {
            {"qmp.delay_ns", "0"},
            {"qmp.band_low", "0.4"},
            {"qmp.band_high", "0.6"},
            {"bjzz.buy_low", "0.6"},
            {"bjzz.sell_high", "0.4"},
            {"calendar.week_rule", "calendar"},
            {"panel.return_mode", "bidask"},
            {"panel.universe", "on"},
            {"longshort.factor_aggregation", "compound"},
            {"longshort.sort", "dmean"},
            {"eventstudy.cutoffs", "1,5,9"},
        };
        static const std::map<std::string, std::string> all = [] {
            auto m = d;
            for (const char* c : {"symbol", "date", "ts", "price", "size", "ex", "bid", "ask", "bsz", "asz", "close",
                                  "shrout", "shrcd", "be", "vol", "pilot", "week_id", "mkt_rf", "smb", "hml", "rf"}) {
                m[std::string("schema.") + c] = c;
            }
            return m;
        }();
        return all;
    }

    // Input column renames: schema.<canonical>=<header in the file>.
    csv::Schema schema;

    void set(const std::string& key, const std::string& value) {
        if (!defaults().count(key)) throw ConfigError("UnknownKey", "unknown config key '" + key + "'");
        const auto line = std::size_t{0};
        if (key.rfind("schema.", 0) == 0) {
            if (value.empty()) throw ConfigError("InvalidValue", key + " needs a column name");
            const std::string canonical = key.substr(7);
            if (value == canonical) schema.rename.erase(canonical);
            else schema.rename[canonical] = value;
        } else if (key == "qmp.delay_ns") {
            try {
                classify.delay_ns = csv::parse_int(value, line, key.c_str());
            } catch (const DataError&) {
                throw ConfigError("InvalidValue", key + " must be an integer, got '" + value + "'");
            }
        } else if (key == "qmp.band_low") {
            classify.band_low = number(key, value);
        } else if (key == "qmp.band_high") {
            classify.band_high = number(key, value);
        } else if (key == "bjzz.buy_low") {
            classify.bjzz_buy_low = number(key, value);
        } else if (key == "bjzz.sell_high") {
            classify.bjzz_sell_high = number(key, value);
        } else if (key == "calendar.week_rule") {
            if (value == "calendar") week_rule = WeekRule::CalendarWeek;
            else if (value == "rolling5") week_rule = WeekRule::RollingFiveDay;
            else throw ConfigError("InvalidValue", key + " must be calendar or rolling5");
        } else if (key == "panel.return_mode") {
            mode = parse_return_mode(value);
        } else if (key == "panel.universe") {
            if (value == "on") universe = true;
            else if (value == "off") universe = false;
            else throw ConfigError("InvalidValue", key + " must be on or off");
        } else if (key == "longshort.factor_aggregation") {
            longshort.aggregation = studies::parse_factor_aggregation(value);
        } else if (key == "longshort.sort") {
            longshort.sort = studies::parse_sort_variable(value);
        } else if (key == "eventstudy.cutoffs") {
            auto parts = csv::split(value);
            if (parts.size() != 3) throw ConfigError("InvalidValue", key + " needs three decile cutoffs");
            std::array<int, 3> c{};
            for (std::size_t i = 0; i < 3; ++i) {
                try {
                    c[i] = static_cast<int>(csv::parse_int(csv::trim(parts[i]), line, key.c_str()));
                } catch (const DataError&) {
                    throw ConfigError("InvalidValue", key + " must be integers");
                }
            }
            if (!(0 < c[0] && c[0] <= c[1] && c[1] <= c[2] && c[2] < studies::kDeciles)) {
                throw ConfigError("InvalidValue", key + " must satisfy 0 < a <= b <= c < 10");
            }
            event.cutoffs = c;
        }
        values[key] = value;
    }

    // Cross-key checks, run once every assignment is in.
    void validate() const { classify.validate(); }

    // key=value lines; blank lines and '#' comments are skipped.
    void load(std::istream& in) {
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            auto t = csv::trim(line);
            if (t.empty() || t.front() == '#') continue;
            auto eq = t.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("Malformed", "config line " + std::to_string(n) + " is not key=value");
            }
            set(std::string(csv::trim(t.substr(0, eq))), std::string(csv::trim(t.substr(eq + 1))));
        }
    }

    void apply(const std::string& assignment) {
        auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ConfigError("Malformed", "expected key=value, got '" + assignment + "'");
        set(std::string(csv::trim(std::string_view(assignment).substr(0, eq))),
            std::string(csv::trim(std::string_view(assignment).substr(eq + 1))));
    }

    // Canonical text: sorted key=value lines.
    std::string canonical() const {
        std::string s;
        for (const auto& [k, v] : values) s += k + "=" + v + "\n";
        return s;
    }

private:
    static double number(const std::string& key, const std::string& value) {
        try {
            return csv::parse_double(value, 0, key.c_str());
        } catch (const DataError&) {
            throw ConfigError("InvalidValue", key + " must be a number, got '" + value + "'");
        }
    }
};

}  // namespace rtoi::cli
