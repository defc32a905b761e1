#include "seaflow/metrics/slo.hpp"

#include <algorithm>
#include <cmath>

namespace seaflow::metrics {

bool labels_match(const Labels& matcher, const Labels& series) {
    for (const auto& [k, v] : matcher) {
        auto it = series.find(k);
        if (it == series.end() || it->second != v) return false;
    }
    return true;
}

std::optional<double> histogram_quantile(const HistogramData& h, double q) {
    if (h.count == 0) return std::nullopt;
    const double target = q * static_cast<double>(h.count);
    double lower = 0.0;
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i <= h.bounds.size(); ++i) {
        std::uint64_t cum = h.cumulative[i];
        if (static_cast<double>(cum) >= target) {
            if (i == h.bounds.size()) {
                // open-ended bucket: best estimate is its lower bound
                return h.bounds.empty() ? h.sum / static_cast<double>(h.count)
                                        : h.bounds.back();
            }
            const double upper = h.bounds[i];
            const auto in_bucket = static_cast<double>(cum - prev);
            if (in_bucket <= 0.0) return upper;
            const double frac = (target - static_cast<double>(prev)) / in_bucket;
            return lower + (upper - lower) * frac;
        }
        prev = cum;
        if (i < h.bounds.size()) lower = h.bounds[i];
    }
    return h.bounds.empty() ? std::nullopt : std::optional<double>(h.bounds.back());
}

SloEvaluator::SloEvaluator(std::vector<SloRule> rules) : rules_(std::move(rules)) {
    history_.resize(rules_.size());
}

std::vector<SloBreach> SloEvaluator::evaluate(const Registry& registry, TimestampMs now) {
    std::vector<SloBreach> breaches;
    auto samples = registry.snapshot();
    for (std::size_t r = 0; r < rules_.size(); ++r) {
        const SloRule& rule = rules_[r];
        for (const Sample& s : samples) {
            if (s.name != rule.metric || !labels_match(rule.labels, s.labels)) continue;

            std::optional<double> observed;
            switch (rule.aggregation) {
                case SloAggregation::Value:
                    observed = s.value;
                    break;
                case SloAggregation::Rate: {
                    SeriesHistory& hist = history_[r][s.labels];
                    hist.points.push_back({now, s.value});
                    const TimestampMs cutoff = now - rule.window_s * kMsPerSecond;
                    // keep one point at or before the cutoff as the baseline
                    while (hist.points.size() >= 2 && hist.points[1].at <= cutoff) {
                        hist.points.pop_front();
                    }
                    const HistoryPoint& base = hist.points.front();
                    const double window =
                        static_cast<double>(rule.window_s);
                    if (window > 0.0 && now > base.at) {
                        observed = (s.value - base.value) / window;
                    } else {
                        observed = s.value > base.value ? (s.value - base.value) : 0.0;
                    }
                    break;
                }
                case SloAggregation::P95:
                    if (s.kind == MetricKind::Histogram) {
                        observed = histogram_quantile(s.histogram, 0.95);
                    }
                    break;
            }
            if (!observed) continue;

            const bool breached = rule.bound == SloBound::AtMost
                                      ? *observed > rule.threshold
                                      : *observed < rule.threshold;
            if (breached) {
                breaches.push_back({rule.id.empty() ? rule.metric : rule.id, s.name,
                                    s.labels, *observed, rule.threshold, now});
            }
        }
    }
    return breaches;
}

}  // namespace seaflow::metrics
