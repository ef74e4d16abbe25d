#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rtoi/aggregate/aggregate.hpp"
#include "rtoi/classify/classify.hpp"
#include "rtoi/cli/run_config.hpp"
#include "rtoi/mdio/calendar.hpp"
#include "rtoi/mdio/parse.hpp"
#include "rtoi/mdio/universe.hpp"
#include "rtoi/panel/panel.hpp"
#include "rtoi/studies/tables.hpp"

// Stage drivers shared by the command-line tool and the end-to-end tests.
// Inputs and outputs are whole file contents; output maps are keyed by file
// name so callers decide where they land.
namespace rtoi::cli {

using Files = std::map<std::string, std::string>;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("Io", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream out;
    fn(out);
    return out.str();
}

// ---- classify

inline Files classify_stage(const std::string& trades_csv, const std::string& quotes_csv,
                            const std::vector<Method>& methods, const RunConfig& cfg, unsigned threads,
                            std::optional<Date> default_date = std::nullopt) {
    TickSchema schema{cfg.schema, default_date};
    std::istringstream ti(trades_csv), qi(quotes_csv);
    auto trades = parse_trades(ti, schema);
    auto quotes = parse_quotes(qi, schema);
    auto days = classify_days(trades, quotes, cfg.classify, threads);
    Files out;
    for (Method m : methods) {
        out[std::string("signed_") + to_string(m) + ".csv"] =
            render([&](std::ostream& o) { write_signed(o, signed_stream(days, m)); });
    }
    out["classify_report.csv"] = render([&](std::ostream& o) {
        o << "symbol,date,trades,identified,bjzz_signed,bjzz_unsigned,qmp_signed,qmp_unsigned,qmp_no_quote\n";
        for (const auto& d : days) {
            o << d.symbol << ',' << d.date.to_string() << ',' << d.trades << ',' << d.identified << ','
              << d.bjzz.size() << ',' << d.bjzz_unsigned << ',' << d.qmp.size() << ',' << d.qmp_unsigned << ','
              << d.qmp_no_quote << '\n';
        }
    });
    return out;
}

// ---- aggregate

// Whole calendar years spanned by some dates, as one period.
inline Period span_period(Date first, Date last) {
    return parse_period(std::to_string(first.year()) + ":" + std::to_string(last.year()));
}

inline Files aggregate_stage(const std::vector<std::string>& signed_csvs, std::vector<Period> periods,
                             unsigned threads) {
    std::map<Method, std::vector<SignedRetailTrade>> by_method;
    for (const auto& text : signed_csvs) {
        std::istringstream in(text);
        for (auto& s : read_signed(in)) by_method[s.method].push_back(std::move(s));
    }
    Files out;
    std::map<Method, std::vector<DailyFlow>> flows;
    for (auto& [m, trades] : by_method) {
        flows[m] = accumulate_flows(trades, m, threads);
        out[std::string("dailyflow_") + to_string(m) + ".csv"] =
            render([&](std::ostream& o) { write_flows(o, flows[m]); });
    }
    if (flows.count(Method::Bjzz) && flows.count(Method::Qmp)) {
        if (periods.empty()) {
            std::optional<Date> lo, hi;
            for (const auto& [m, fs] : flows) {
                for (const auto& f : fs) {
                    if (!lo || f.date < *lo) lo = f.date;
                    if (!hi || *hi < f.date) hi = f.date;
                }
            }
            if (lo) periods.push_back(span_period(*lo, *hi));
        }
        std::vector<SummaryRow> rows;
        for (const auto& p : periods) {
            auto r = summary_table(flows[Method::Bjzz], flows[Method::Qmp], p);
            rows.insert(rows.end(), r.begin(), r.end());
        }
        out["table1.csv"] = render([&](std::ostream& o) { write_summary(o, rows); });
    }
    return out;
}

// ---- panel

struct PanelInputs {
    std::string daily_csv;
    std::vector<std::string> flow_csvs;
    std::optional<std::string> calendar_csv;
};

struct BuiltPanels {
    TradingCalendar calendar;
    std::map<Method, PanelBuild> panels;
};

inline BuiltPanels build_panels(const PanelInputs& in, const RunConfig& cfg, unsigned threads) {
    std::istringstream di(in.daily_csv);
    auto daily = parse_daily(di, cfg.schema);
    BuiltPanels b;
    if (in.calendar_csv) {
        std::istringstream ci(*in.calendar_csv);
        b.calendar = parse_calendar(ci, cfg.schema);
    } else {
        std::set<Date> dates;
        for (const auto& d : daily) dates.insert(d.date);
        b.calendar = TradingCalendar::from_dates({dates.begin(), dates.end()}, cfg.week_rule);
    }
    std::map<Method, std::vector<DailyFlow>> flows;
    for (const auto& text : in.flow_csvs) {
        std::istringstream fi(text);
        for (auto& f : read_flows(fi)) flows[f.method].push_back(std::move(f));
    }
    SecurityHistory history(std::move(daily));
    std::optional<Universe> universe;
    if (cfg.universe) universe = Universe::build(history);
    for (const auto& [m, fs] : flows) {
        auto weekly = weekly_imbalances(fs, b.calendar);
        b.panels[m] = assemble_panel(history, b.calendar, weekly, universe ? &*universe : nullptr, cfg.mode, threads);
    }
    return b;
}

inline std::string panel_file_name(Method m, ReturnMode mode) {
    return std::string("panel_") + to_string(m) + "_" + to_string(mode) + ".csv";
}

inline Files panel_stage(const PanelInputs& in, const RunConfig& cfg, unsigned threads) {
    auto b = build_panels(in, cfg, threads);
    Files out;
    for (const auto& [m, pb] : b.panels) {
        out[panel_file_name(m, cfg.mode)] = render([&](std::ostream& o) { write_panel(o, pb.panel); });
    }
    return out;
}

// ---- study

struct StudyRequest {
    std::optional<PanelInputs> inputs;        // daily + flows (+ calendar)
    std::optional<std::string> panel_csv;     // or a prebuilt panel
    std::optional<std::string> factors_csv;
    std::optional<std::string> market_csv;    // date,ret; replaces the value-weighted market
    std::vector<int> tables = {2, 3, 4, 5, 6, 7, 8};
    std::vector<Method> methods = {Method::Bjzz, Method::Qmp};
    std::vector<Period> periods;              // empty: the years the panel spans
    std::vector<studies::Measure> measures = {studies::Measure::Vol, studies::Measure::Trd};
};

inline Series read_market(const std::string& text, const TradingCalendar& cal) {
    std::istringstream in(text);
    csv::Reader r(in);
    Series s(cal.size());
    if (r.empty_input()) return s;
    const auto i_date = r.require("date"), i_ret = r.require("ret");
    std::vector<std::string_view> f;
    while (r.next(f)) {
        Date d;
        try {
            d = Date::parse(f[i_date]);
        } catch (const DataError& e) {
            throw DataError(e.code(), e.what(), r.line());
        }
        if (auto day = cal.index_of(d)) s[*day] = csv::parse_optional_double(f[i_ret], r.line(), "ret");
    }
    return s;
}

inline Period panel_span(const Panel& p) {
    if (p.rows().empty()) throw DataError("EmptySeries", "panel has no rows");
    Date lo = p.rows().front().week_start, hi = lo;
    for (const auto& o : p.rows()) {
        lo = std::min(lo, o.week_start);
        hi = std::max(hi, o.week_start);
    }
    return span_period(lo, hi);
}

inline Files study_stage(const StudyRequest& req, const RunConfig& cfg, unsigned threads) {
    using namespace studies;
    for (int t : req.tables) {
        if (t < 2 || t > 8) throw ConfigError("InvalidValue", "tables must be in 2..8, got " + std::to_string(t));
    }
    std::map<Method, Panel> panels;
    std::optional<BuiltPanels> built;
    if (req.panel_csv) {
        if (req.methods.size() != 1) throw ConfigError("InvalidValue", "a panel file needs exactly one --method");
        std::istringstream pi(*req.panel_csv);
        panels[req.methods.front()] = read_panel(pi);
    } else if (req.inputs) {
        built = build_panels(*req.inputs, cfg, threads);
        for (Method m : req.methods) {
            auto it = built->panels.find(m);
            if (it == built->panels.end()) {
                throw ConfigError("MissingInput", std::string("no daily flows for method ") + to_string(m));
            }
            panels[m] = it->second.panel;
        }
    } else {
        throw ConfigError("MissingInput", "study needs --panel or --daily with --dailyflow");
    }
    const bool wants8 = std::count(req.tables.begin(), req.tables.end(), 8) > 0;
    const bool wants6 = std::count(req.tables.begin(), req.tables.end(), 6) > 0;
    if (wants8 && !built) throw ConfigError("MissingInput", "table 8 needs daily returns (--daily)");
    if (wants6 && !req.factors_csv) throw ConfigError("MissingInput", "table 6 needs --factors");
    std::vector<FactorRecord> factor_rows;
    if (req.factors_csv) {
        std::istringstream fi(*req.factors_csv);
        factor_rows = parse_factors(fi, cfg.schema);
    }
    if (built && req.market_csv) {
        auto market = read_market(*req.market_csv, built->calendar);
        for (auto& [m, pb] : built->panels) pb.daily.market = market;
    }

    std::vector<Tagged<econ::FMResult>> t2;
    std::vector<Tagged<PredictionResult>> t3;
    std::vector<Tagged<std::vector<SubgroupBlock>>> t4;
    std::vector<Tagged<std::vector<HorizonCell>>> t5;
    std::vector<Tagged<std::vector<PortfolioSeries>>> t6;
    std::vector<Tagged<DecompResult>> t7;
    std::vector<Tagged<EventStudyResult>> t8;
    auto wants = [&](int t) { return std::count(req.tables.begin(), req.tables.end(), t) > 0; };

    for (const auto& [m, panel] : panels) {
        auto periods = req.periods;
        if (periods.empty()) periods.push_back(panel_span(panel));
        std::vector<std::optional<WeeklyFactors>> factors;
        if (wants6) factors = built ? weekly_factors(factor_rows, built->calendar)
                                    : weekly_factors(factor_rows, panel_week_starts(panel));
        for (const auto& period : periods) {
            for (auto measure : req.measures) {
                StudySpec spec;
                spec.method = m;
                spec.period = period;
                spec.measure = measure;
                spec.mode = cfg.mode;
                spec.threads = threads;
                const Panel& p = panel;
                if (wants(2)) t2.push_back(tagged(spec, [&] { return determinants(p, spec); }));
                if (wants(3)) t3.push_back(tagged(spec, [&] { return prediction(p, spec); }));
                if (wants(4)) t4.push_back(tagged(spec, [&] { return subgroup_blocks(p, spec); }));
                if (wants(5)) t5.push_back(tagged(spec, [&] { return horizon_prediction(p, spec); }));
                if (wants(6)) t6.push_back(tagged(spec, [&] { return longshort(p, factors, spec, cfg.longshort); }));
                if (wants(7)) t7.push_back(tagged(spec, [&] { return decompose(p, spec); }));
                if (wants(8)) {
                    const auto& pb = built->panels.at(m);
                    t8.push_back(tagged(spec, [&] { return eventstudy(p, built->calendar, pb.daily, spec, cfg.event); }));
                }
            }
        }
    }
    Files out;
    if (wants(2)) out["table2.csv"] = render([&](std::ostream& o) { write_table2(o, t2); });
    if (wants(3)) out["table3.csv"] = render([&](std::ostream& o) { write_table3(o, t3); });
    if (wants(4)) out["table4.csv"] = render([&](std::ostream& o) { write_table4(o, t4); });
    if (wants(5)) out["table5.csv"] = render([&](std::ostream& o) { write_table5(o, t5); });
    if (wants(6)) out["table6.csv"] = render([&](std::ostream& o) { write_table6(o, t6); });
    if (wants(7)) out["table7.csv"] = render([&](std::ostream& o) { write_table7(o, t7); });
    if (wants(8)) out["table8.csv"] = render([&](std::ostream& o) { write_table8(o, t8); });
    return out;
}

}  // namespace rtoi::cli
