#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rtoi/core/csv.hpp"
#include "rtoi/econ/fama_macbeth.hpp"
#include "rtoi/studies/eventstudy.hpp"
#include "rtoi/studies/longshort.hpp"
#include "rtoi/studies/regressions.hpp"
#include "rtoi/studies/spec.hpp"

namespace rtoi::studies {

// A study result tagged with its table panel and imbalance measure. When
// the whole block could not be estimated, result is empty and flag holds
// the error code; the table still gets its full row structure.
template <class T>
struct Tagged {
    std::string panel;
    Measure measure = Measure::Vol;
    std::optional<T> result;
    std::string flag;
};

// Runs fn and tags the outcome; numerical failures become a flagged block.
template <class Fn>
auto tagged(const StudySpec& spec, Fn&& fn) -> Tagged<decltype(fn())> {
    Tagged<decltype(fn())> t{spec.panel_label(), spec.measure, std::nullopt, ""};
    try {
        t.result = fn();
    } catch (const NumericalError& e) {
        t.flag = e.code();
    }
    return t;
}

inline constexpr const char* kAdjR2 = "Adj.R2";
inline constexpr const char* kIqrRow = "IQR";
inline constexpr const char* kIqrDiffRow = "IQR w. ret. diff";

inline const std::vector<std::string>& table2_header() {
    static const std::vector<std::string> h = {"panel", "measure", "variable", "coef", "tstat", "flag"};
    return h;
}
inline const std::vector<std::string>& table3_header() {
    static const std::vector<std::string> h = {"panel", "measure", "variable", "coef", "tstat", "annual_pct", "flag"};
    return h;
}
inline const std::vector<std::string>& table4_header() {
    static const std::vector<std::string> h = {"panel", "measure", "subgroup", "group", "coef",
                                               "tstat", "iqr",     "wr_diff",  "flag"};
    return h;
}
inline const std::vector<std::string>& table5_header() {
    static const std::vector<std::string> h = {"panel", "measure", "horizon", "coef", "tstat", "flag"};
    return h;
}
inline const std::vector<std::string>& table6_header() {
    static const std::vector<std::string> h = {"panel",      "measure", "horizon",     "universe", "mean",
                                               "mean_tstat", "alpha",   "alpha_tstat", "flag"};
    return h;
}
inline const std::vector<std::string>& table7_header() {
    static const std::vector<std::string> h = {"panel", "measure", "stage", "variable", "coef",
                                               "tstat", "iqr",     "r_diff", "flag"};
    return h;
}
inline const std::vector<std::string>& table8_header() {
    static const std::vector<std::string> h = {"panel", "measure", "return_type", "k",    "group",
                                               "mean",  "tstat",   "stars",       "flag"};
    return h;
}

namespace detail {

inline std::string num(double v) { return csv::format_double(v); }

// Coefficient rows then the Adj.R2 row. `between` cells sit between the
// t-statistic and the flag.
inline void fm_rows(std::ostream& out, const std::vector<std::string>& lead, const std::vector<std::string>& names,
                    const econ::FMResult* fm, std::size_t between, const std::string& flag) {
    auto emit = [&](const std::string& name, const std::string& coef, const std::string& t) {
        std::vector<std::string> row = lead;
        row.push_back(name);
        row.push_back(coef);
        row.push_back(t);
        row.insert(row.end(), between, "");
        row.push_back(flag);
        csv::write_row(out, row);
    };
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        emit(names[j], fm ? num(fm->mean(jj)) : "", fm ? num(fm->t(jj)) : "");
    }
    emit(kAdjR2, fm ? num(fm->mean_adj_r2) : "", "");
}

}  // namespace detail

// Determinants: coefficient rows then the mean adjusted R-squared.
inline void write_table2(std::ostream& out, const std::vector<Tagged<econ::FMResult>>& rs) {
    csv::write_row(out, table2_header());
    for (const auto& r : rs) {
        detail::fm_rows(out, {r.panel, to_string(r.measure)}, weekly_names(), r.result ? &*r.result : nullptr, 0,
                        r.flag);
    }
}

// Prediction: as above plus the imbalance IQR and its implied weekly return
// difference (percent, with the annualized figure alongside).
inline void write_table3(std::ostream& out, const std::vector<Tagged<PredictionResult>>& rs) {
    csv::write_row(out, table3_header());
    for (const auto& r : rs) {
        const std::string m = to_string(r.measure);
        detail::fm_rows(out, {r.panel, m}, weekly_names(), r.result ? &r.result->fm : nullptr, 1, r.flag);
        const bool ok = r.result.has_value();
        csv::write_row(out, {r.panel, m, kIqrRow, ok ? detail::num(r.result->iqr) : "", "", "", r.flag});
        csv::write_row(out, {r.panel, m, kIqrDiffRow, ok ? detail::num(r.result->magnitude.weekly_pct) : "", "",
                             ok ? detail::num(r.result->magnitude.annual_pct) : "", r.flag});
    }
}

inline const char* subgroup_title(Characteristic c) {
    switch (c) {
        case Characteristic::Cap: return "Market-Cap";
        case Characteristic::Price: return "Share-Price";
        case Characteristic::Turnover: return "Turnover";
    }
    return "";
}

inline constexpr Characteristic kCharacteristics[] = {Characteristic::Cap, Characteristic::Price,
                                                      Characteristic::Turnover};

struct SubgroupBlock {
    Characteristic characteristic = Characteristic::Cap;
    std::vector<SubgroupCell> cells;
    std::string flag;  // the whole characteristic failed (e.g. too few symbols)
};

// All three characteristics; a characteristic that cannot be split keeps
// its three rows with the error as flag.
inline std::vector<SubgroupBlock> subgroup_blocks(const Panel& panel, const StudySpec& spec) {
    std::vector<SubgroupBlock> out;
    for (auto c : kCharacteristics) {
        SubgroupBlock b{c, {}, ""};
        try {
            b.cells = subgroup_prediction(panel, spec, c);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Config) throw;
            b.flag = e.code();
            for (const char* l : group_labels(c)) b.cells.push_back({l, std::nullopt, e.code()});
        }
        out.push_back(std::move(b));
    }
    return out;
}

inline void write_table4(std::ostream& out, const std::vector<Tagged<std::vector<SubgroupBlock>>>& rs) {
    csv::write_row(out, table4_header());
    for (const auto& r : rs) {
        if (!r.result) {
            for (auto c : kCharacteristics) {
                for (const char* l : group_labels(c)) {
                    csv::write_row(out, {r.panel, to_string(r.measure), subgroup_title(c), l, "", "", "", "", r.flag});
                }
            }
            continue;
        }
        for (const auto& block : *r.result) {
            for (const auto& c : block.cells) {
                std::vector<std::string> row = {r.panel, to_string(r.measure), subgroup_title(block.characteristic),
                                                c.label};
                if (c.result) {
                    const auto& fm = c.result->fm;
                    row.push_back(detail::num(fm.mean(1)));
                    row.push_back(detail::num(fm.t(1)));
                    row.push_back(detail::num(c.result->iqr));
                    row.push_back(detail::num(c.result->magnitude.weekly_pct));
                } else {
                    row.insert(row.end(), 4, "");
                }
                row.push_back(c.flag);
                csv::write_row(out, row);
            }
        }
    }
}

inline void write_table5(std::ostream& out, const std::vector<Tagged<std::vector<HorizonCell>>>& rs) {
    csv::write_row(out, table5_header());
    for (const auto& r : rs) {
        if (!r.result) continue;  // horizon cells carry their own flags
        for (const auto& c : *r.result) {
            std::vector<std::string> row = {r.panel, to_string(r.measure), std::to_string(c.horizon)};
            if (c.fm) {
                row.push_back(detail::num(c.fm->mean(1)));
                row.push_back(detail::num(c.fm->t(1)));
            } else {
                row.insert(row.end(), 2, "");
            }
            row.push_back(c.flag);
            csv::write_row(out, row);
        }
    }
}

// The raw mean is reported for the full sample only, alphas for every
// size sample.
inline void write_table6(std::ostream& out, const std::vector<Tagged<std::vector<PortfolioSeries>>>& rs) {
    csv::write_row(out, table6_header());
    for (const auto& r : rs) {
        if (!r.result) continue;
        for (const auto& s : *r.result) {
            const bool all = s.universe == SizeSample::All;
            csv::write_row(out, {r.panel, to_string(r.measure), std::to_string(s.horizon), to_string(s.universe),
                                 all ? detail::num(s.mean) : "", all ? detail::num(s.mean_t) : "",
                                 detail::num(s.alpha), detail::num(s.alpha_t), s.flag});
        }
    }
}

inline void write_table7(std::ostream& out, const std::vector<Tagged<DecompResult>>& rs) {
    csv::write_row(out, table7_header());
    for (const auto& r : rs) {
        const std::string m = to_string(r.measure);
        const DecompResult* d = r.result ? &*r.result : nullptr;
        detail::fm_rows(out, {r.panel, m, "first"}, first_stage_names(), d ? &d->first : nullptr, 2, r.flag);
        detail::fm_rows(out, {r.panel, m, "second"}, second_stage_names(), d ? &d->second : nullptr, 2, r.flag);
        for (std::size_t j = 0; j < 3; ++j) {
            csv::write_row(out, {r.panel, m, "magnitude", component_labels()[j], "", "",
                                 d ? detail::num(d->iqr[j]) : "", d ? detail::num(d->magnitude[j].weekly_pct) : "",
                                 r.flag});
        }
    }
}

inline void write_table8(std::ostream& out, const std::vector<Tagged<EventStudyResult>>& rs) {
    csv::write_row(out, table8_header());
    for (const auto& r : rs) {
        if (!r.result) continue;
        for (const auto& c : r.result->cells) {
            csv::write_row(out, {r.panel, to_string(r.measure), to_string(c.type), std::to_string(c.offset),
                                 to_string(c.group), detail::num(c.mean), detail::num(c.t), c.stars, c.flag});
        }
    }
}

}  // namespace rtoi::studies
