#include "seaflow/metrics/registry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace seaflow::metrics {

namespace {

const std::vector<double> kDefaultLatencyBounds = {0.005, 0.01, 0.05, 0.1, 0.5,
                                                   1.0,   5.0,  10.0, 30.0};

// Shortest representation that round-trips; integral values print bare.
std::string format_value(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "+Inf" : "-Inf";
    if (v == std::floor(v) && std::abs(v) < 9.007199254740992e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string escape_label_value(const std::string& v) {
    std::string out;
    out.reserve(v.size());
    for (char c : v) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_labels(const Labels& labels) {
    if (labels.empty()) return "";
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : labels) {
        if (!first) out += ",";
        first = false;
        out += k;
        out += "=\"";
        out += escape_label_value(v);
        out += "\"";
    }
    out += "}";
    return out;
}

Registry::Registry() = default;

void Registry::declare_histogram(const std::string& name, std::vector<double> bounds) {
    std::lock_guard lock(mu_);
    std::sort(bounds.begin(), bounds.end());
    histogram_bounds_[name] = std::move(bounds);
}

Expected<void> Registry::counter_inc(const std::string& name, const Labels& labels,
                                     double delta) {
    if (delta < 0.0) {
        return Error{Errc::NegativeCounterDelta,
                     "counter " + name + " delta " + format_value(delta)};
    }
    std::lock_guard lock(mu_);
    auto [it, inserted] = series_.try_emplace(Key{name, labels});
    if (inserted) it->second.kind = MetricKind::Counter;
    it->second.value += delta;
    return {};
}

void Registry::gauge_set(const std::string& name, const Labels& labels, double value) {
    std::lock_guard lock(mu_);
    auto [it, inserted] = series_.try_emplace(Key{name, labels});
    if (inserted) it->second.kind = MetricKind::Gauge;
    it->second.value = value;
}

void Registry::histogram_observe(const std::string& name, const Labels& labels,
                                 double value) {
    std::lock_guard lock(mu_);
    auto [it, inserted] = series_.try_emplace(Key{name, labels});
    Series& s = it->second;
    if (inserted) {
        s.kind = MetricKind::Histogram;
        auto bit = histogram_bounds_.find(name);
        s.hist.bounds = bit != histogram_bounds_.end() ? bit->second : kDefaultLatencyBounds;
        s.hist.cumulative.assign(s.hist.bounds.size() + 1, 0);
    }
    for (std::size_t i = 0; i < s.hist.bounds.size(); ++i) {
        if (value <= s.hist.bounds[i]) s.hist.cumulative[i] += 1;
    }
    s.hist.cumulative.back() += 1;
    s.hist.sum += value;
    s.hist.count += 1;
}

double Registry::counter_value(const std::string& name, const Labels& labels) const {
    std::lock_guard lock(mu_);
    auto it = series_.find(Key{name, labels});
    return it == series_.end() ? 0.0 : it->second.value;
}

double Registry::gauge_value(const std::string& name, const Labels& labels) const {
    std::lock_guard lock(mu_);
    auto it = series_.find(Key{name, labels});
    return it == series_.end() ? 0.0 : it->second.value;
}

std::vector<Sample> Registry::snapshot() const {
    std::lock_guard lock(mu_);
    std::vector<Sample> out;
    out.reserve(series_.size());
    for (const auto& [key, s] : series_) {
        Sample sm;
        sm.name = key.name;
        sm.labels = key.labels;
        sm.kind = s.kind;
        sm.value = s.value;
        sm.histogram = s.hist;
        out.push_back(std::move(sm));
    }
    return out;
}

std::string Registry::render_exposition() const {
    auto samples = snapshot();
    std::string out;
    std::string last_name;
    for (const Sample& s : samples) {
        if (s.name != last_name) {
            out += "# TYPE " + s.name + " ";
            switch (s.kind) {
                case MetricKind::Counter: out += "counter"; break;
                case MetricKind::Gauge: out += "gauge"; break;
                case MetricKind::Histogram: out += "histogram"; break;
            }
            out += "\n";
            last_name = s.name;
        }
        if (s.kind == MetricKind::Histogram) {
            const HistogramData& h = s.histogram;
            for (std::size_t i = 0; i <= h.bounds.size(); ++i) {
                Labels with_le = s.labels;
                with_le["le"] = i < h.bounds.size() ? format_value(h.bounds[i]) : "+Inf";
                out += s.name + "_bucket" + render_labels(with_le) + " " +
                       std::to_string(h.cumulative[i]) + "\n";
            }
            out += s.name + "_sum" + render_labels(s.labels) + " " + format_value(h.sum) + "\n";
            out += s.name + "_count" + render_labels(s.labels) + " " +
                   std::to_string(h.count) + "\n";
        } else {
            out += s.name + render_labels(s.labels) + " " + format_value(s.value) + "\n";
        }
    }
    return out;
}

}  // namespace seaflow::metrics
