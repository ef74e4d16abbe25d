#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtoi/aggregate/aggregate.hpp"
#include "rtoi/econ/fama_macbeth.hpp"
#include "rtoi/econ/magnitude.hpp"
#include "rtoi/panel/panel.hpp"
#include "rtoi/studies/spec.hpp"

namespace rtoi::studies {

using Getter = std::function<std::optional<double>(const PanelObservation&)>;

struct Column {
    std::string label;
    Getter get;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline Getter imbalance_now(Measure m) {
    return m == Measure::Vol ? Getter([](const PanelObservation& o) { return o.mroibvol; })
                             : Getter([](const PanelObservation& o) { return o.mroibtrd; });
}
inline Getter imbalance_lag1(Measure m) {
    return m == Measure::Vol ? Getter([](const PanelObservation& o) { return o.mroibvol_lag1; })
                             : Getter([](const PanelObservation& o) { return o.mroibtrd_lag1; });
}
inline Getter imbalance_lag2(Measure m) {
    return m == Measure::Vol ? Getter([](const PanelObservation& o) { return o.mroibvol_lag2; })
                             : Getter([](const PanelObservation& o) { return o.mroibtrd_lag2; });
}

inline Column col_ret_lag1() { return {"Ret(w-1)", [](const PanelObservation& o) { return o.ret_lag1; }}; }
inline Column col_ret_lag2() { return {"Ret(w-2)", [](const PanelObservation& o) { return o.ret_lag2; }}; }
inline Column col_ret_m1() { return {"Ret(m-1)", [](const PanelObservation& o) { return o.ret_m1; }}; }
inline Column col_ret_m7_m2() { return {"Ret(m-7,m-2)", [](const PanelObservation& o) { return o.ret_m7_m2; }}; }

inline std::vector<Column> firm_controls() {
    return {{"Lmto", [](const PanelObservation& o) { return o.lmto; }},
            {"Lvol", [](const PanelObservation& o) { return o.lvol; }},
            {"Size", [](const PanelObservation& o) { return o.size; }},
            {"Lbm", [](const PanelObservation& o) { return o.lbm; }}};
}

// Mroib(w-1), Ret(w-1), Ret(m-1), Ret(m-7,m-2), Lmto, Lvol, Size, Lbm.
inline std::vector<Column> weekly_regressors(Measure m) {
    std::vector<Column> cols = {{"Mroib(w-1)", imbalance_lag1(m)}, col_ret_lag1(), col_ret_m1(), col_ret_m7_m2()};
    for (auto& c : firm_controls()) cols.push_back(std::move(c));
    return cols;
}

inline std::vector<std::string> labels_with_intercept(const std::vector<Column>& cols) {
    std::vector<std::string> out = {"Intercept"};
    for (const auto& c : cols) out.push_back(c.label);
    return out;
}

// Coefficient row names, intercept first, for the weekly regressions.
inline std::vector<std::string> weekly_names() { return labels_with_intercept(weekly_regressors(Measure::Vol)); }

inline bool in_period(const PanelObservation& o, const Period& p) { return p.contains(o.week_start); }

using RowFilter = std::function<bool(const PanelObservation&)>;

// A cross-section per panel week, intercept first. Missing values become NaN
// and are dropped listwise inside the estimator.
struct Design {
    std::vector<std::string> names;
    std::vector<econ::CrossSection> sections;
    std::map<std::int64_t, std::vector<const PanelObservation*>> complete;  // rows with no missing value, per week
};

inline Design build_design(const Panel& panel, const Period& period, const Getter& dependent,
                           const std::vector<Column>& regressors, const RowFilter& keep = {}) {
    Design d;
    d.names.push_back("Intercept");
    for (const auto& c : regressors) d.names.push_back(c.label);
    const Eigen::Index p = static_cast<Eigen::Index>(d.names.size());
    for (std::size_t w = 0; w < panel.week_count(); ++w) {
        auto [a, b] = panel.week_rows(w);
        std::vector<const PanelObservation*> rows;
        for (std::size_t i = a; i < b; ++i) {
            const auto& o = panel.rows()[i];
            if (!in_period(o, period)) continue;
            if (keep && !keep(o)) continue;
            rows.push_back(&o);
        }
        if (rows.empty()) continue;
        econ::CrossSection cs;
        cs.period = static_cast<std::int64_t>(w);
        cs.X.resize(static_cast<Eigen::Index>(rows.size()), p);
        cs.y.resize(static_cast<Eigen::Index>(rows.size()));
        auto& comp = d.complete[cs.period];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            bool ok = true;
            auto y = dependent(*rows[i]);
            cs.y(ii) = y ? *y : kNaN;
            ok = ok && y.has_value();
            cs.X(ii, 0) = 1.0;
            for (std::size_t j = 0; j < regressors.size(); ++j) {
                auto v = regressors[j].get(*rows[i]);
                cs.X(ii, static_cast<Eigen::Index>(j + 1)) = v ? *v : kNaN;
                ok = ok && v.has_value();
            }
            if (ok) comp.push_back(rows[i]);
        }
        d.sections.push_back(std::move(cs));
    }
    return d;
}

// Pooled values of a column over the complete rows of the periods an FM fit used.
inline std::vector<double> pooled(const Design& d, const econ::FMResult& fm, const Getter& get) {
    std::vector<double> out;
    for (auto period : fm.periods) {
        auto it = d.complete.find(period);
        if (it == d.complete.end()) continue;
        for (const auto* o : it->second) {
            if (auto v = get(*o)) out.push_back(*v);
        }
    }
    return out;
}

// Mroib(w) on its own lag, last week's return and controls.
inline econ::FMResult determinants(const Panel& panel, const StudySpec& spec) {
    auto d = build_design(panel, spec.period, imbalance_now(spec.measure), weekly_regressors(spec.measure));
    return econ::fama_macbeth(std::move(d.sections), d.names, spec.lags_or(kDeterminantsLags), spec.threads);
}

struct PredictionResult {
    econ::FMResult fm;
    double iqr = kNaN;  // pooled Mroib(w-1)
    econ::Magnitude magnitude;
};

inline PredictionResult prediction_on(const Panel& panel, const StudySpec& spec, const Getter& dependent,
                                      const RowFilter& keep = {}) {
    auto cols = weekly_regressors(spec.measure);
    auto d = build_design(panel, spec.period, dependent, cols, keep);
    PredictionResult r;
    r.fm = econ::fama_macbeth(std::move(d.sections), d.names, spec.lags_or(kPredictionLags), spec.threads);
    auto values = pooled(d, r.fm, cols[0].get);
    if (!values.empty()) {
        r.iqr = iqr(values);
        r.magnitude = econ::economic_magnitude(r.fm.mean(1), r.iqr);
    }
    return r;
}

// Ret(w) on Mroib(w-1) and controls, with the IQR magnitude of the imbalance.
inline PredictionResult prediction(const Panel& panel, const StudySpec& spec, const RowFilter& keep = {}) {
    return prediction_on(panel, spec, [](const PanelObservation& o) { return o.ret; }, keep);
}

inline std::array<const char*, 3> group_labels(Characteristic c) {
    if (c == Characteristic::Cap) return {"Small", "Medium", "Big"};
    return {"Low", "Medium", "High"};
}

struct SubgroupCell {
    std::string label;
    std::optional<PredictionResult> result;
    std::string flag;  // set when the cell could not be estimated
};

inline constexpr int kSubgroupCount = 3;

// The predictive regression run inside each tercile of a previous month-end
// characteristic. A cell that cannot be estimated is flagged; the others
// are still produced.
inline std::vector<SubgroupCell> subgroup_prediction(const Panel& panel, const StudySpec& spec, Characteristic c) {
    Panel labeled = panel;
    assign_subgroups(labeled, c, kSubgroupCount);
    std::vector<SubgroupCell> cells;
    auto labels = group_labels(c);
    for (int g = 0; g < kSubgroupCount; ++g) {
        SubgroupCell cell{labels[static_cast<std::size_t>(g)], std::nullopt, ""};
        try {
            cell.result = prediction(labeled, spec, [c, g](const PanelObservation& o) { return o.group(c) == g; });
        } catch (const NumericalError& e) {
            cell.flag = e.code();
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

struct HorizonCell {
    int horizon = 1;
    std::optional<econ::FMResult> fm;
    std::string flag;
};

// Regressors dated w-1 against the single-week return k-1 weeks after week
// w, so horizon 1 is exactly the predictive regression.
inline std::vector<HorizonCell> horizon_prediction(const Panel& panel, const StudySpec& spec,
                                                   const std::vector<int>& horizons = default_horizons()) {
    std::vector<HorizonCell> out;
    for (int k : horizons) {
        if (k < 1) throw ConfigError("InvalidValue", "horizons must be >= 1");
        HorizonCell cell{k, std::nullopt, ""};
        Getter dep = [&panel, k](const PanelObservation& o) {
            return panel.weekly_return(o.symbol, o.week + static_cast<std::size_t>(k) - 1);
        };
        try {
            auto d = build_design(panel, spec.period, dep, weekly_regressors(spec.measure));
            cell.fm = econ::fama_macbeth(std::move(d.sections), d.names, spec.lags_or(kPredictionLags), spec.threads);
        } catch (const NumericalError& e) {
            cell.flag = e.code();
        }
        out.push_back(std::move(cell));
    }
    return out;
}

struct Components {
    std::string symbol;
    std::size_t week = 0;
    double mroib = 0;  // Mroib(w-1), the projected variable
    double pers = 0;
    double cont = 0;
    double other = 0;
};

struct DecompResult {
    econ::FMResult first;
    econ::FMResult second;
    std::vector<Components> rows;
    std::array<double, 3> iqr{kNaN, kNaN, kNaN};  // PERS, CONT, OTHER
    std::array<econ::Magnitude, 3> magnitude{};
};

inline const std::array<const char*, 3>& component_labels() {
    static const std::array<const char*, 3> l = {"PERS", "CONT", "OTHER"};
    return l;
}

inline std::vector<Column> first_stage_regressors(Measure m) {
    return {{"Mroib(w-2)", imbalance_lag2(m)}, col_ret_lag2(), col_ret_m1(), col_ret_m7_m2()};
}

inline std::vector<std::string> first_stage_names() { return labels_with_intercept(first_stage_regressors(Measure::Vol)); }

inline std::vector<std::string> second_stage_names() {
    std::vector<std::string> out = {"Intercept", "PERS", "CONT", "OTHER", "Ret(w-1)", "Ret(m-1)", "Ret(m-7,m-2)"};
    for (const auto& c : firm_controls()) out.push_back(c.label);
    return out;
}

// First stage: each week, Mroib(w-1) on Mroib(w-2), Ret(w-2), Ret(m-1) and
// Ret(m-7,m-2). PERS is that week's persistence slope times Mroib(w-2), CONT
// the fitted return terms, OTHER the remainder (intercept plus residual), so
// the three add back to Mroib(w-1). Second stage: the predictive regression
// with the imbalance replaced by the three components.
inline DecompResult decompose(const Panel& panel, const StudySpec& spec) {
    const int lags = spec.lags_or(kPredictionLags);
    const Getter y1 = imbalance_lag1(spec.measure);
    const Getter x_pers = imbalance_lag2(spec.measure);
    const auto first_cols = first_stage_regressors(spec.measure);
    auto d1 = build_design(panel, spec.period, y1, first_cols);

    DecompResult r;
    r.first = econ::fama_macbeth(d1.sections, d1.names, lags, spec.threads);

    std::map<std::pair<std::string, std::size_t>, std::size_t> where;
    for (std::size_t t = 0; t < r.first.periods.size(); ++t) {
        const auto period = r.first.periods[t];
        const Eigen::VectorXd& b = r.first.per_period[t];
        for (const auto* o : d1.complete[period]) {
            Components c;
            c.symbol = o->symbol;
            c.week = o->week;
            c.mroib = *y1(*o);
            c.pers = b(1) * *x_pers(*o);
            c.cont = b(2) * *o->ret_lag2 + b(3) * *o->ret_m1 + b(4) * *o->ret_m7_m2;
            c.other = c.mroib - c.pers - c.cont;
            where[{c.symbol, c.week}] = r.rows.size();
            r.rows.push_back(std::move(c));
        }
    }

    auto component = [&](int which) -> Getter {
        return [&, which](const PanelObservation& o) -> std::optional<double> {
            auto it = where.find({o.symbol, o.week});
            if (it == where.end()) return std::nullopt;
            const auto& c = r.rows[it->second];
            return which == 0 ? c.pers : which == 1 ? c.cont : c.other;
        };
    };
    std::vector<Column> second_cols = {{"PERS", component(0)}, {"CONT", component(1)}, {"OTHER", component(2)},
                                       col_ret_lag1(),         col_ret_m1(),           col_ret_m7_m2()};
    for (auto& c : firm_controls()) second_cols.push_back(std::move(c));
    auto d2 = build_design(panel, spec.period, [](const PanelObservation& o) { return o.ret; }, second_cols);
    r.second = econ::fama_macbeth(std::move(d2.sections), d2.names, lags, spec.threads);
    for (int j = 0; j < 3; ++j) {
        auto values = pooled(d2, r.second, second_cols[static_cast<std::size_t>(j)].get);
        if (values.empty()) continue;
        r.iqr[static_cast<std::size_t>(j)] = iqr(values);
        r.magnitude[static_cast<std::size_t>(j)] =
            econ::economic_magnitude(r.second.mean(j + 1), r.iqr[static_cast<std::size_t>(j)]);
    }
    return r;
}

}  // namespace rtoi::studies
