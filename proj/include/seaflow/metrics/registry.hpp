#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "seaflow/core/error.hpp"

namespace seaflow::metrics {

using Labels = std::map<std::string, std::string>;

enum class MetricKind { Counter, Gauge, Histogram };

struct HistogramData {
    std::vector<double> bounds;  // strictly increasing; +Inf bucket implicit
    std::vector<std::uint64_t> cumulative;  // one per bound, plus +Inf at the end
    double sum = 0.0;
    std::uint64_t count = 0;
};

struct Sample {
    std::string name;
    Labels labels;
    MetricKind kind = MetricKind::Counter;
    double value = 0.0;          // counters and gauges
    HistogramData histogram;     // histograms only
};

/**
 * Registry - KPI store instrumented by every pipeline stage.
 *
 * Series auto-create on first touch. Counter decrements are rejected, never
 * clamped, so instrumentation bugs surface as errors in the run report.
 */
class Registry {
public:
    Registry();

    /// Histogram bucket bounds are fixed per metric name; call before first
    /// observe or the default latency buckets apply.
    void declare_histogram(const std::string& name, std::vector<double> bounds);

    Expected<void> counter_inc(const std::string& name, const Labels& labels, double delta);
    void gauge_set(const std::string& name, const Labels& labels, double value);
    void histogram_observe(const std::string& name, const Labels& labels, double value);

    double counter_value(const std::string& name, const Labels& labels) const;
    double gauge_value(const std::string& name, const Labels& labels) const;

    /// Consistent snapshot of all series, sorted by (name, labels).
    std::vector<Sample> snapshot() const;

    /// Prometheus text exposition format v0.0.4; byte-deterministic for a
    /// given registry state.
    std::string render_exposition() const;

private:
    struct Key {
        std::string name;
        Labels labels;
        bool operator<(const Key& o) const {
            if (name != o.name) return name < o.name;
            return labels < o.labels;
        }
    };
    struct Series {
        MetricKind kind;
        double value = 0.0;
        HistogramData hist;
    };

    mutable std::mutex mu_;
    std::map<Key, Series> series_;
    std::map<std::string, std::vector<double>> histogram_bounds_;
};

/// Renders one label set as {k="v",...} with Prometheus escaping; empty labels
/// render as an empty string.
std::string render_labels(const Labels& labels);

}  // namespace seaflow::metrics
