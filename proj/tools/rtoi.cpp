// Command-line driver: classify -> aggregate -> panel -> study, plus the
// synthetic-data generators and the self-check.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rtoi/cli/manifest.hpp"
#include "rtoi/cli/pipeline.hpp"
#include "rtoi/cli/verify.hpp"
#include "rtoi/synth/market.hpp"
#include "rtoi/synth/panel_gen.hpp"

namespace fs = std::filesystem;
using namespace rtoi;
using namespace rtoi::cli;

namespace {

struct Globals {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string config_file;
    std::vector<std::string> sets;
    std::string out_dir = ".";
};

RunConfig load_config(const Globals& g) {
    RunConfig cfg;
    if (!g.config_file.empty()) {
        std::istringstream in(read_file(g.config_file));
        cfg.load(in);
    }
    for (const auto& s : g.sets) cfg.apply(s);
    cfg.validate();
    return cfg;
}

// Records inputs by file name and the arguments with directories stripped,
// so the manifest depends on content and options only.
class Run {
public:
    Run(std::string command, const Globals& g) : g_(g) { m_.command = std::move(command); }

    std::string input(const std::string& role, const std::string& path) {
        std::string bytes = read_file(path);
        std::string key = fs::path(path).filename().string();
        if (m_.inputs.count(key)) key = role + ":" + key;
        m_.inputs[key] = sha256_hex(bytes);
        m_.args.push_back("--" + role + "=" + fs::path(path).filename().string());
        return bytes;
    }
    void arg(const std::string& name, const std::string& value) { m_.args.push_back("--" + name + "=" + value); }

    void finish(const Files& files, const RunConfig* cfg) {
        fs::create_directories(g_.out_dir);
        for (const auto& [name, bytes] : files) {
            write(name, bytes);
            m_.outputs[name] = sha256_hex(bytes);
        }
        if (cfg) {
            m_.config = cfg->values;
            m_.config_text = cfg->canonical();
        }
        write("manifest.json", m_.to_json());
        for (const auto& [name, bytes] : files) std::cout << (fs::path(g_.out_dir) / name).string() << '\n';
    }

private:
    void write(const std::string& name, const std::string& bytes) {
        const auto path = fs::path(g_.out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        out << bytes;
        if (!out) throw DataError("Io", "cannot write " + path.string());
    }

    const Globals& g_;
    Manifest m_;
};

std::vector<Method> parse_methods(const std::string& s) {
    if (s == "both") return {Method::Bjzz, Method::Qmp};
    try {
        return {parse_method(s)};
    } catch (const DataError&) {
        throw ConfigError("InvalidValue", "--method must be bjzz, qmp or both");
    }
}

std::vector<studies::Measure> parse_measures(const std::string& s) {
    if (s == "both") return {studies::Measure::Vol, studies::Measure::Trd};
    if (s == "vol") return {studies::Measure::Vol};
    if (s == "trd") return {studies::Measure::Trd};
    throw ConfigError("InvalidValue", "--measure must be vol, trd or both");
}

std::vector<int> parse_tables(const std::string& s) {
    std::vector<int> out;
    for (auto part : csv::split(s)) {
        try {
            out.push_back(static_cast<int>(csv::parse_int(csv::trim(part), 0, "table")));
        } catch (const DataError&) {
            throw ConfigError("InvalidValue", "--tables must be a comma list of 2..8");
        }
    }
    return out;
}

std::vector<Period> parse_periods(const std::vector<std::string>& ss) {
    std::vector<Period> out;
    for (const auto& s : ss) {
        try {
            out.push_back(parse_period(s));
        } catch (const DataError& e) {
            throw ConfigError("InvalidValue", e.what());
        }
    }
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retail order-flow imbalance toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--threads", g.threads, "Worker threads (outputs do not depend on it)")
        ->check(CLI::Range(1u, 1024u));
    app.add_option("--config", g.config_file, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--set", g.sets, "Override one config key: --set key=value (repeatable)");
    app.add_option("--out", g.out_dir, "Output directory");

    std::string current = "rtoi";
    std::function<void()> action;

    // classify
    auto* cl = app.add_subcommand("classify", "Sign retail trades with the subpenny and quote-midpoint rules");
    std::string trades_path, quotes_path, method = "both", date_text;
    cl->add_option("--trades", trades_path, "Trade CSV")->required()->check(CLI::ExistingFile);
    cl->add_option("--quotes", quotes_path, "Quote CSV")->required()->check(CLI::ExistingFile);
    cl->add_option("--method", method, "bjzz | qmp | both");
    cl->add_option("--date", date_text, "Date for tick files without a date column (YYYY-MM-DD)");
    cl->callback([&] {
        action = [&] {
            auto cfg = load_config(g);
            auto methods = parse_methods(method);
            std::optional<Date> date;
            if (!date_text.empty()) date = Date::parse(date_text);
            Run run("classify", g);
            auto t = run.input("trades", trades_path);
            auto q = run.input("quotes", quotes_path);
            run.arg("method", method);
            if (date) run.arg("date", date_text);
            run.finish(classify_stage(t, q, methods, cfg, g.threads, date), &cfg);
        };
    });

    // aggregate
    auto* ag = app.add_subcommand("aggregate", "Daily retail flows per stock; summary table when both methods given");
    std::vector<std::string> signed_paths, period_texts;
    ag->add_option("--signed", signed_paths, "Signed-trade CSV (repeatable)")->required()->check(CLI::ExistingFile);
    ag->add_option("--period", period_texts, "Summary period YYYY:YYYY (repeatable)");
    ag->callback([&] {
        action = [&] {
            auto cfg = load_config(g);
            auto periods = parse_periods(period_texts);
            Run run("aggregate", g);
            std::vector<std::string> texts;
            for (const auto& p : signed_paths) texts.push_back(run.input("signed", p));
            if (!period_texts.empty()) run.arg("period", join(period_texts));
            run.finish(aggregate_stage(texts, periods, g.threads), &cfg);
        };
    });

    // panel
    auto* pa = app.add_subcommand("panel", "Assemble the stock-week panel");
    std::string daily_path, calendar_path;
    std::vector<std::string> flow_paths;
    pa->add_option("--daily", daily_path, "Daily security CSV")->required()->check(CLI::ExistingFile);
    pa->add_option("--dailyflow", flow_paths, "Daily flow CSV (repeatable)")->required()->check(CLI::ExistingFile);
    pa->add_option("--calendar", calendar_path, "Trading calendar CSV (date,week_id)")->check(CLI::ExistingFile);
    auto panel_inputs = [&](Run& run) {
        PanelInputs in;
        in.daily_csv = run.input("daily", daily_path);
        for (const auto& p : flow_paths) in.flow_csvs.push_back(run.input("dailyflow", p));
        if (!calendar_path.empty()) in.calendar_csv = run.input("calendar", calendar_path);
        return in;
    };
    pa->callback([&] {
        action = [&] {
            auto cfg = load_config(g);
            Run run("panel", g);
            auto in = panel_inputs(run);
            run.finish(panel_stage(in, cfg, g.threads), &cfg);
        };
    });

    // study
    auto* st = app.add_subcommand("study", "Regression, portfolio and event-study tables (table2..table8)");
    std::string panel_path, factors_path, market_path, tables = "2,3,4,5,6,7,8", measure = "both";
    std::string study_method = "both";
    std::vector<std::string> study_periods;
    st->add_option("--daily", daily_path, "Daily security CSV")->check(CLI::ExistingFile);
    st->add_option("--dailyflow", flow_paths, "Daily flow CSV (repeatable)")->check(CLI::ExistingFile);
    st->add_option("--calendar", calendar_path, "Trading calendar CSV")->check(CLI::ExistingFile);
    st->add_option("--panel", panel_path, "Prebuilt panel CSV (one method)")->check(CLI::ExistingFile);
    st->add_option("--factors", factors_path, "Factor CSV (date,mkt_rf,smb,hml,rf)")->check(CLI::ExistingFile);
    st->add_option("--market", market_path, "Market return CSV (date,ret) for the event study")
        ->check(CLI::ExistingFile);
    st->add_option("--tables", tables, "Comma list of tables 2..8");
    st->add_option("--method", study_method, "bjzz | qmp | both");
    st->add_option("--period", study_periods, "Sample period YYYY:YYYY (repeatable)");
    st->add_option("--measure", measure, "vol | trd | both");
    st->callback([&] {
        action = [&] {
            auto cfg = load_config(g);
            StudyRequest req;
            req.tables = parse_tables(tables);
            req.methods = parse_methods(study_method);
            req.periods = parse_periods(study_periods);
            req.measures = parse_measures(measure);
            Run run("study", g);
            if (!panel_path.empty()) {
                req.panel_csv = run.input("panel", panel_path);
            } else if (!daily_path.empty()) {
                req.inputs = panel_inputs(run);
            }
            if (!factors_path.empty()) req.factors_csv = run.input("factors", factors_path);
            if (!market_path.empty()) req.market_csv = run.input("market", market_path);
            run.arg("tables", tables);
            run.arg("method", study_method);
            run.arg("measure", measure);
            if (!study_periods.empty()) run.arg("period", join(study_periods));
            run.finish(study_stage(req, cfg, g.threads), &cfg);
        };
    });

    // synth
    auto* sy = app.add_subcommand("synth", "Generate synthetic inputs with known ground truth");
    sy->require_subcommand(1);
    auto* sm = sy->add_subcommand("market", "Quotes, trades, daily records, factors and planted trade sides");
    synth::MarketScenario ms;
    std::string spread = "penny", start_text = "2019-01-02";
    sm->add_option("--seed", ms.seed, "Random seed");
    sm->add_option("--symbols", ms.symbols, "Number of symbols")->check(CLI::PositiveNumber);
    sm->add_option("--days", ms.days, "Trading days")->check(CLI::PositiveNumber);
    sm->add_option("--events", ms.events_per_day, "Quote/trade events per symbol-day")->check(CLI::PositiveNumber);
    sm->add_option("--spread", spread, "penny | wide");
    sm->add_option("--start", start_text, "First calendar date");
    sm->add_option("--retail-share", ms.retail_share, "Share of retail prints")->check(CLI::Range(0.0, 1.0));
    sm->add_option("--band-share", ms.band_share, "Retail prints inside the exclusion band")
        ->check(CLI::Range(0.0, 1.0));
    sm->add_flag("--full-improvement", ms.full_improvement, "Draw improvement anywhere in the cent");
    sm->callback([&] {
        action = [&] {
            if (spread == "penny") ms.spread = synth::SpreadMode::Penny;
            else if (spread == "wide") ms.spread = synth::SpreadMode::Wide;
            else throw ConfigError("InvalidValue", "--spread must be penny or wide");
            ms.start = Date::parse(start_text);
            auto md = synth::gen_market(ms);
            Files f;
            f["trades.csv"] = render([&](std::ostream& o) { write_trades(o, md.trades); });
            f["quotes.csv"] = render([&](std::ostream& o) { write_quotes(o, md.quotes); });
            f["daily.csv"] = render([&](std::ostream& o) { write_daily(o, md.daily); });
            f["factors.csv"] = render([&](std::ostream& o) { write_factors(o, md.factors); });
            f["calendar.csv"] = render([&](std::ostream& o) { write_calendar(o, md.calendar); });
            f["truth.csv"] = render([&](std::ostream& o) { synth::write_truth(o, md.truth); });
            f["scenario.txt"] = "seed=" + std::to_string(ms.seed) + "\nsymbols=" + std::to_string(ms.symbols) +
                                "\ndays=" + std::to_string(ms.days) + "\nevents=" + std::to_string(ms.events_per_day) +
                                "\nspread=" + spread + "\nstart=" + ms.start.to_string() +
                                "\nretail_share=" + csv::format_double(ms.retail_share) +
                                "\nband_share=" + csv::format_double(ms.band_share) +
                                "\nfull_improvement=" + (ms.full_improvement ? "1" : "0") + "\n";
            Run run("synth market", g);
            run.finish(f, nullptr);
        };
    });
    auto* sp = sy->add_subcommand("panel", "A stock-week panel with planted regression coefficients");
    synth::PanelScenario ps;
    std::string scenario = "planted";
    double alpha = 0.001;
    sp->add_option("--seed", ps.seed, "Random seed");
    sp->add_option("--firms", ps.firms, "Number of firms")->check(CLI::PositiveNumber);
    sp->add_option("--weeks", ps.weeks, "Number of weeks")->check(CLI::PositiveNumber);
    sp->add_option("--scenario", scenario, "planted | zero | horizon | factor");
    sp->add_option("--alpha", alpha, "Weekly alpha of the factor scenario");
    sp->add_flag("--factors", ps.factors, "Add a three-factor component to returns");
    sp->callback([&] {
        action = [&] {
            synth::PanelScenario s = ps;
            if (scenario == "zero") s = synth::zero_signal(ps);
            else if (scenario == "horizon") s = synth::horizon_scenario(ps);
            else if (scenario == "factor") s = synth::factor_scenario(ps, alpha);
            else if (scenario != "planted") {
                throw ConfigError("InvalidValue", "--scenario must be planted, zero, horizon or factor");
            }
            auto sp_out = synth::gen_panel(s);
            Files f;
            f["panel.csv"] = render([&](std::ostream& o) { write_panel(o, sp_out.panel); });
            f["factors.csv"] = render([&](std::ostream& o) { write_factors(o, sp_out.factors); });
            f["scenario.txt"] = render([&](std::ostream& o) { synth::write_manifest(o, s); });
            Run run("synth panel", g);
            run.finish(f, nullptr);
        };
    });

    // verify
    auto* ve = app.add_subcommand("verify", "Check the estimators and classifiers against reference computations");
    ve->callback([&] {
        action = [&] {
            bool ok = true;
            for (const auto& c : verify_all()) {
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
                ok = ok && c.pass;
            }
            if (!ok) throw NumericalError("VerifyFailed", "one or more reference checks failed");
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error kind=config code=Usage command=rtoi: " << e.what() << '\n';
        return exit_code(ErrorKind::Config);
    }
    for (auto* sub : app.get_subcommands()) {
        current = sub->get_name();
        for (auto* inner : sub->get_subcommands()) current += " " + inner->get_name();
    }
    try {
        action();
    } catch (const Error& e) {
        std::cerr << "error kind=" << to_string(e.kind()) << " code=" << e.code() << " command=" << current << ": "
                  << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error kind=internal code=Unexpected command=" << current << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
