#include "seaflow/store/data_space.hpp"

#include <algorithm>
#include <cmath>

#include "seaflow/core/json_codec.hpp"

namespace seaflow::store {

namespace {

constexpr double kEarthRadiusM = 6371000.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

const DataCategory kAllCategories[] = {
    DataCategory::OpenAccess,
    DataCategory::BusinessCritical,
    DataCategory::LegallyRestricted,
};

}  // namespace

double haversine_m(const Location& a, const Location& b) {
    const double lat1 = a.lat * kDegToRad;
    const double lat2 = b.lat * kDegToRad;
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad;
    const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) *
                         std::sin(dlon / 2);
    return 2 * kEarthRadiusM * std::asin(std::sqrt(std::min(1.0, s)));
}

bool row_quarantined(const Observation& obs) {
    for (auto it = obs.lineage.rbegin(); it != obs.lineage.rend(); ++it) {
        if (it->stage != "triage") continue;
        const std::string& d = it->detail;
        const std::string mark = "quarantined";
        return d.size() >= mark.size() &&
               d.compare(d.size() - mark.size(), mark.size(), mark) == 0;
    }
    return false;
}

Expected<DataSpace> DataSpace::open(const std::string& journal_path) {
    DataSpace ds;
    ds.journal_path_ = journal_path;

    std::ifstream in(journal_path);
    if (in) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto obs = observation_from_line(line);
            if (!obs.ok())
                return Error{Errc::ConfigError,
                             journal_path + ":" + std::to_string(line_no) +
                                 ": " + obs.error().message};
            // replay through append semantics, but without re-journaling
            const DedupKey key = dedup_key(*obs);
            auto it = ds.rows_.find(key);
            if (it == ds.rows_.end()) {
                ds.rows_.emplace(key, std::move(*obs));
                ++ds.stats_.appended;
            } else if (obs->lineage.size() > it->second.lineage.size()) {
                it->second = std::move(*obs);
                ++ds.stats_.replaced;
            } else {
                ++ds.stats_.ignored;
            }
        }
    }

    ds.journal_ = std::make_unique<std::ofstream>(
        journal_path, std::ios::out | std::ios::app);
    if (!*ds.journal_)
        return Error{Errc::ConfigError, "cannot open journal " + journal_path};
    return ds;
}

Expected<void> DataSpace::journal_write(const Observation& obs) {
    if (journal_ == nullptr) return {};
    *journal_ << observation_to_line(obs) << '\n';
    journal_->flush();
    if (!*journal_)
        return Error{Errc::ConfigError, "journal write failed: " + journal_path_};
    return {};
}

Expected<void> DataSpace::append(const Observation& obs) {
    const DedupKey key = dedup_key(obs);
    auto it = rows_.find(key);
    if (it == rows_.end()) {
        rows_.emplace(key, obs);
        ++stats_.appended;
        return journal_write(obs);
    }
    if (obs.lineage.size() > it->second.lineage.size()) {
        it->second = obs;  // reprocessing wins
        ++stats_.replaced;
        return journal_write(obs);
    }
    ++stats_.ignored;
    return {};
}

const Observation* DataSpace::find(const DedupKey& key) const {
    auto it = rows_.find(key);
    return it == rows_.end() ? nullptr : &it->second;
}

Expected<std::vector<Observation>> DataSpace::query(
    const Selector& sel, const auth::AuthContext& ctx) const {
    std::set<DataCategory> readable;
    for (DataCategory c : kAllCategories)
        if (auth::authorize_category(ctx, auth::Action::QueryPull, c).allow)
            readable.insert(c);

    if (sel.categories) {
        // naming a category is a claim; an uncovered one fails loudly
        for (DataCategory c : *sel.categories)
            if (!readable.count(c))
                return Error{Errc::NotAuthorized,
                             std::string("no QueryPull grant covers ") +
                                 category_name(c)};
    }

    const bool operators_eyes =
        sel.include_quarantined && ctx.principal.roles.count(auth::Role::Operator);

    std::vector<Observation> out;
    for (const auto& [key, obs] : rows_) {
        if (!readable.count(obs.category)) continue;
        if (sel.categories && !sel.categories->count(obs.category)) continue;
        if (sel.org_id && obs.org_id != *sel.org_id) continue;
        if (sel.platform_id && obs.platform_id != *sel.platform_id) continue;
        if (sel.parameter && obs.parameter != *sel.parameter) continue;
        if (obs.measured_at < sel.from || obs.measured_at >= sel.to) continue;
        if (row_quarantined(obs) && !operators_eyes) continue;
        out.push_back(obs);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Observation& a, const Observation& b) {
                         if (a.measured_at != b.measured_at)
                             return a.measured_at < b.measured_at;
                         return a.sensor_id < b.sensor_id;
                     });
    return out;
}

std::vector<Observation> DataSpace::latest(const std::string& parameter,
                                           const Location& near,
                                           double radius_m) const {
    std::map<std::string, const Observation*> best;
    for (const auto& [key, obs] : rows_) {
        if (obs.parameter != parameter) continue;
        if (!obs.value) continue;
        if (row_quarantined(obs)) continue;
        if (haversine_m(obs.location, near) > radius_m) continue;
        auto [it, fresh] = best.try_emplace(obs.sensor_id, &obs);
        if (!fresh && obs.measured_at > it->second->measured_at)
            it->second = &obs;
    }
    std::vector<Observation> out;
    out.reserve(best.size());
    for (const auto& [sensor, obs] : best) out.push_back(*obs);
    return out;
}

}  // namespace seaflow::store
