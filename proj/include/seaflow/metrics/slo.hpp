#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "seaflow/core/time.hpp"
#include "seaflow/metrics/registry.hpp"

namespace seaflow::metrics {

enum class SloAggregation { Rate, Value, P95 };
enum class SloBound { AtMost, AtLeast };

/// An objective over one metric. `labels` is a matcher: a series matches when
/// every listed pair is present; an empty matcher matches every series of the
/// metric.
struct SloRule {
    std::string id;
    std::string metric;
    Labels labels;
    SloAggregation aggregation = SloAggregation::Value;
    SloBound bound = SloBound::AtMost;
    double threshold = 0.0;
    std::int64_t window_s = 60;
};

struct SloBreach {
    std::string rule_id;
    std::string metric;
    Labels labels;
    double observed = 0.0;
    double threshold = 0.0;
    TimestampMs at = 0;
};

/**
 * SloEvaluator - checks rules against registry snapshots.
 *
 * Rate needs history, so the evaluator remembers past counter values per
 * (rule, series). When the window has fewer than two points the oldest point
 * available is used, which shortens the effective window instead of skipping
 * the rule. At most one breach per (rule, series) per evaluation.
 */
class SloEvaluator {
public:
    explicit SloEvaluator(std::vector<SloRule> rules);

    std::vector<SloBreach> evaluate(const Registry& registry, TimestampMs now);

    const std::vector<SloRule>& rules() const { return rules_; }

private:
    struct HistoryPoint {
        TimestampMs at;
        double value;
    };
    struct SeriesHistory {
        std::deque<HistoryPoint> points;
    };

    std::vector<SloRule> rules_;
    // keyed by rule index then series labels
    std::vector<std::map<Labels, SeriesHistory>> history_;
};

/// 95th percentile estimate from cumulative bucket counts with linear
/// interpolation inside the winning bucket; empty histogram yields nullopt.
std::optional<double> histogram_quantile(const HistogramData& h, double q);

bool labels_match(const Labels& matcher, const Labels& series);

}  // namespace seaflow::metrics
