#pragma once

#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seaflow/auth/identity.hpp"
#include "seaflow/core/observation.hpp"

namespace seaflow::store {

/// Great-circle distance in metres; depth does not enter the distance.
double haversine_m(const Location& a, const Location& b);

/**
 * Selector - pull-side query filter. Absent fields match everything; a
 * present category set is an explicit claim and fails the query when it
 * names a category the caller may not read. The time range is [from, to).
 */
struct Selector {
    std::optional<std::string> org_id;
    std::optional<std::string> platform_id;
    std::optional<std::string> parameter;
    std::optional<std::set<DataCategory>> categories;
    TimestampMs from = 0;
    TimestampMs to = std::numeric_limits<TimestampMs>::max();
    bool include_quarantined = false;  // honored for Operators only
};

/// True when the record's latest triage step sent it to quarantine.
bool row_quarantined(const Observation& obs);

struct StoreStats {
    std::uint64_t appended = 0;
    std::uint64_t replaced = 0;
    std::uint64_t ignored = 0;  // duplicate with no longer lineage
};

/**
 * DataSpace - append-only observation store: an ordered in-memory index over
 * (sensor_id, measured_at) plus an optional JSON-lines journal replayed on
 * open. Appends are idempotent; a reprocessed record with a longer lineage
 * replaces its predecessor, anything else is ignored.
 */
class DataSpace {
public:
    DataSpace() = default;

    /// Opens (creating if needed) a journal-backed store, replaying history.
    static Expected<DataSpace> open(const std::string& journal_path);

    Expected<void> append(const Observation& obs);

    Expected<std::vector<Observation>> query(const Selector& sel,
                                             const auth::AuthContext& ctx) const;

    /// Most recent usable (valued, unquarantined) record per sensor of this
    /// parameter within radius_m of `near`.
    std::vector<Observation> latest(const std::string& parameter,
                                    const Location& near, double radius_m) const;

    const Observation* find(const DedupKey& key) const;
    std::size_t size() const { return rows_.size(); }
    const StoreStats& stats() const { return stats_; }
    const std::string& journal_path() const { return journal_path_; }

    DataSpace(DataSpace&&) = default;
    DataSpace& operator=(DataSpace&&) = default;

private:
    Expected<void> journal_write(const Observation& obs);

    std::map<DedupKey, Observation> rows_;
    StoreStats stats_;
    std::string journal_path_;
    std::unique_ptr<std::ofstream> journal_;
};

}  // namespace seaflow::store
