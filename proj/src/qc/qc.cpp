#include "seaflow/qc/qc.hpp"

#include <algorithm>
#include <cmath>

#include "seaflow/core/time.hpp"

namespace seaflow::qc {

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::string flag_summary(const QCReport& qc) {
    std::string s;
    s += "accuracy=";
    s += flag_name(qc.accuracy);
    s += " completeness=";
    s += flag_name(qc.completeness);
    s += " consistency=";
    s += flag_name(qc.consistency);
    s += " currentness=";
    s += flag_name(qc.currentness);
    s += " overall=";
    s += flag_name(qc.overall);
    return s;
}

}  // namespace

const char* alarm_kind_name(AlarmKind k) {
    switch (k) {
        case AlarmKind::MissingData: return "MissingData";
        case AlarmKind::QcBad: return "QcBad";
        case AlarmKind::SessionFailed: return "SessionFailed";
        case AlarmKind::LowBattery: return "LowBattery";
    }
    return "MissingData";
}

std::string key_text(const StreamKey& key) {
    return key.sensor_id + "/" + key.parameter;
}

Expected<void> validate_qc_config(const QcConfig& cfg) {
    std::string problems;
    auto bad = [&](const char* what) {
        problems += problems.empty() ? what : std::string(", ") + what;
    };
    if (!(cfg.spike_k > 0)) bad("spike_k must be positive");
    if (cfg.stuck_n < 1) bad("stuck_n must be at least 1");
    if (cfg.window_w < 5) bad("window_w must be at least 5");
    if (!(cfg.gap_tolerance_factor > 0)) bad("gap_tolerance_factor must be positive");
    if (cfg.currentness_max_age_s < 0) bad("currentness_max_age_s must not be negative");
    if (cfg.alarm_horizon_s <= 0) bad("alarm_horizon_s must be positive");
    if (!(cfg.consistency.neighbor_radius_m > 0)) bad("neighbor_radius_m must be positive");
    if (!(cfg.consistency.max_delta > 0)) bad("max_delta must be positive");
    if (!problems.empty()) return Error{Errc::ConfigError, problems};
    return {};
}

AttributeFlag check_accuracy(const Observation& obs, const StreamState& st,
                             const QcConfig& cfg) {
    if (!obs.value) return AttributeFlag::NotEvaluated;
    const double v = *obs.value;
    if (st.valid_range &&
        (v < st.valid_range->min_value || v > st.valid_range->max_value))
        return AttributeFlag::Bad;

    // run length including this value; frozen output flags even mid warm-up
    const int run = (st.last_value && *st.last_value == v) ? st.stuck_run + 1 : 1;
    if (run >= cfg.stuck_n) return AttributeFlag::ProbablyBad;

    if (static_cast<int>(st.window.size()) < cfg.window_w)
        return AttributeFlag::ProbablyGood;

    std::vector<double> values;
    values.reserve(st.window.size());
    for (const WindowSample& s : st.window) values.push_back(s.value);
    const double med = median_of(values);
    for (double& x : values) x = std::fabs(x - med);
    const double mad = median_of(std::move(values));
    if (std::fabs(v - med) > cfg.spike_k * mad) return AttributeFlag::ProbablyBad;
    return AttributeFlag::Good;
}

MissingBatch check_completeness(StreamState& st, TimestampMs now,
                                const QcConfig& cfg, TimestampMs wall_now) {
    MissingBatch out;
    if (st.last_seen < 0 || st.expected_interval_s <= 0) return out;
    if (wall_now < 0) wall_now = now;

    const TimestampMs interval = st.expected_interval_s * 1000;
    const TimestampMs gap = now - st.last_seen;
    const auto tolerance =
        static_cast<TimestampMs>(std::llround(cfg.gap_tolerance_factor * interval));
    if (gap <= tolerance) return out;

    TimestampMs count = (gap - tolerance) / interval + 1;
    count = std::min(count, gap / interval);  // never synthesize past now
    const TimestampMs alarm_cutoff = wall_now - cfg.alarm_horizon_s * 1000;

    for (TimestampMs k = 1; k <= count; ++k) {
        const TimestampMs at = st.last_seen + k * interval;
        Observation m;
        m.org_id = st.org_id;
        m.platform_id = st.platform_id;
        m.sensor_id = st.key.sensor_id;
        m.parameter = st.key.parameter;
        m.unit = st.unit;
        m.location = st.location;
        m.measured_at = at;
        m.ingested_at = wall_now;
        m.qc.completeness = AttributeFlag::Missing;
        m.qc.finalize();
        m.observation_id =
            make_observation_id(m.org_id, m.platform_id, m.sensor_id, at);
        m.lineage.push_back(
            {"qc", wall_now, "synthesized for silent stream " + key_text(st.key)});
        out.missing.push_back(std::move(m));
        if (at >= alarm_cutoff)
            out.alarms.push_back({AlarmKind::MissingData, key_text(st.key),
                                  wall_now,
                                  "expected sample at " + format_iso8601(at) +
                                      " never arrived"});
    }
    st.last_seen += count * interval;
    return out;
}

AttributeFlag check_consistency(const Observation& obs,
                                const std::vector<Observation>& neighbors,
                                const QcConfig& cfg) {
    if (!obs.value) return AttributeFlag::NotEvaluated;
    std::vector<double> values;
    for (const Observation& n : neighbors) {
        if (!n.value) continue;
        if (n.parameter != obs.parameter) continue;
        if (n.sensor_id == obs.sensor_id) continue;  // not your own echo
        values.push_back(*n.value);
    }
    if (values.empty()) return AttributeFlag::NotEvaluated;
    const double med = median_of(std::move(values));
    return std::fabs(*obs.value - med) > cfg.consistency.max_delta
               ? AttributeFlag::ProbablyBad
               : AttributeFlag::Good;
}

AttributeFlag check_currentness(const Observation& obs, TimestampMs now,
                                const QcConfig& cfg,
                                std::int64_t expected_interval_s) {
    std::int64_t max_age_s = cfg.currentness_max_age_s;
    if (max_age_s <= 0) max_age_s = 2 * expected_interval_s;
    if (max_age_s <= 0) return AttributeFlag::NotEvaluated;
    const TimestampMs age = now - obs.measured_at;
    if (age <= max_age_s * 1000) return AttributeFlag::Good;
    if (age <= 10 * max_age_s * 1000) return AttributeFlag::ProbablyBad;
    return AttributeFlag::Bad;
}

QcResult run_qc(const Observation& obs, StreamState& st, TimestampMs now,
                const QcConfig& cfg,
                const std::vector<Observation>& neighbors) {
    QcResult result{obs, {}};
    Observation& o = result.obs;

    o.qc.accuracy = check_accuracy(o, st, cfg);
    o.qc.completeness =
        o.value ? AttributeFlag::Good : AttributeFlag::Missing;
    o.qc.consistency = check_consistency(o, neighbors, cfg);
    o.qc.currentness = check_currentness(o, now, cfg, st.expected_interval_s);
    o.qc.finalize();

    const std::string summary = flag_summary(o.qc);
    TimestampMs at = now;
    if (!o.lineage.empty()) at = std::max(at, o.lineage.back().at);
    if (auto next = append_lineage(o, "qc", at, summary); next.ok())
        o = std::move(*next);

    if (o.qc.overall == AttributeFlag::Bad)
        result.alarms.push_back(
            {AlarmKind::QcBad, key_text(st.key), now, summary});

    st.last_seen = std::max(st.last_seen, o.measured_at);
    if (o.value) {
        const double v = *o.value;
        st.stuck_run = (st.last_value && *st.last_value == v) ? st.stuck_run + 1 : 1;
        st.last_value = v;
        auto pos = std::upper_bound(
            st.window.begin(), st.window.end(), o.measured_at,
            [](TimestampMs t, const WindowSample& s) { return t < s.measured_at; });
        st.window.insert(pos, {o.measured_at, v});
        while (static_cast<int>(st.window.size()) > cfg.window_w)
            st.window.pop_front();
        st.org_id = o.org_id;
        st.platform_id = o.platform_id;
        st.unit = o.unit;
        st.location = o.location;
    }
    return result;
}

void QcEngine::register_stream(const StreamKey& key,
                               std::int64_t expected_interval_s,
                               std::optional<ValueRange> valid_range) {
    StreamState& st = streams_[key];
    st.key = key;
    st.expected_interval_s = expected_interval_s;
    st.valid_range = valid_range;
}

StreamState& QcEngine::state_for(const StreamKey& key) {
    StreamState& st = streams_[key];
    st.key = key;
    return st;
}

const StreamState* QcEngine::state(const StreamKey& key) const {
    auto it = streams_.find(key);
    return it == streams_.end() ? nullptr : &it->second;
}

void QcEngine::count_flags(const Observation& obs) {
    if (metrics_ == nullptr) return;
    auto count = [&](const char* attribute, AttributeFlag f) {
        (void)metrics_->counter_inc(
            "qc_flag_total",
            {{"attribute", attribute}, {"flag", flag_name(f)}}, 1);
    };
    count("accuracy", obs.qc.accuracy);
    count("completeness", obs.qc.completeness);
    count("consistency", obs.qc.consistency);
    count("currentness", obs.qc.currentness);
    count("overall", obs.qc.overall);
}

QcEngine::Outcome QcEngine::process(const Observation& obs, TimestampMs now,
                                    const std::vector<Observation>& neighbors) {
    StreamState& st = state_for({obs.sensor_id, obs.parameter});

    Outcome out;
    MissingBatch gaps = check_completeness(st, obs.measured_at, cfg_, now);
    out.missing = std::move(gaps.missing);
    out.alarms = std::move(gaps.alarms);

    QcResult checked = run_qc(obs, st, now, cfg_, neighbors);
    out.obs = std::move(checked.obs);
    for (Alarm& a : checked.alarms) out.alarms.push_back(std::move(a));

    count_flags(out.obs);
    for (const Observation& m : out.missing) count_flags(m);
    if (metrics_ != nullptr) {
        for (const Alarm& a : out.alarms) {
            (void)metrics_->counter_inc(
                "alarms_total", {{"kind", alarm_kind_name(a.kind)}}, 1);
            if (a.kind == AlarmKind::MissingData)
                (void)metrics_->counter_inc("missing_alarms_total",
                                            {{"org", st.org_id}}, 1);
        }
    }
    return out;
}

MissingBatch QcEngine::sweep(TimestampMs now) {
    MissingBatch out;
    for (auto& [key, st] : streams_) {
        MissingBatch got = check_completeness(st, now, cfg_, now);
        for (Observation& m : got.missing) {
            count_flags(m);
            out.missing.push_back(std::move(m));
        }
        for (Alarm& a : got.alarms) {
            if (metrics_ != nullptr) {
                (void)metrics_->counter_inc(
                    "alarms_total", {{"kind", alarm_kind_name(a.kind)}}, 1);
                (void)metrics_->counter_inc("missing_alarms_total",
                                            {{"org", st.org_id}}, 1);
            }
            out.alarms.push_back(std::move(a));
        }
    }
    return out;
}

}  // namespace seaflow::qc
