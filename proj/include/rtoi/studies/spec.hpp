#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "rtoi/aggregate/aggregate.hpp"
#include "rtoi/classify/classify.hpp"
#include "rtoi/panel/panel.hpp"

namespace rtoi::studies {

enum class Measure { Vol, Trd };

inline const char* to_string(Measure m) { return m == Measure::Vol ? "Mroibvol" : "Mroibtrd"; }

inline constexpr Measure kMeasures[] = {Measure::Vol, Measure::Trd};

// Default Newey-West lags per study. The long-short study uses k-1 for
// horizon k instead.
inline constexpr int kDeterminantsLags = 6;
inline constexpr int kPredictionLags = 5;
inline constexpr int kEventStudyLags = 4;

inline const std::vector<int>& default_horizons() {
    static const std::vector<int> h = {1, 2, 4, 6, 8, 10, 12};
    return h;
}

inline const std::vector<int>& default_event_offsets() {
    static const std::vector<int> k = {-20, -15, -10, -5, 0, 5, 10, 15, 20};
    return k;
}

struct StudySpec {
    Method method = Method::Bjzz;
    Period period{"all", Date(-1000000), Date(1000000)};
    Measure measure = Measure::Vol;
    ReturnMode mode = ReturnMode::BidAsk;
    int lags = -1;  // negative: the study's default
    unsigned threads = 1;

    int lags_or(int fallback) const { return lags >= 0 ? lags : fallback; }

    // Table panel label, e.g. "BJZZ 2010-2015".
    std::string panel_label() const {
        std::string m = rtoi::to_string(method);
        for (auto& ch : m) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        return m + " " + period.label;
    }
};

}  // namespace rtoi::studies
