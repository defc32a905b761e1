#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seaflow/core/error.hpp"
#include "seaflow/core/time.hpp"

namespace seaflow::ingest {

enum class SourceFormat : std::uint8_t { JsonV1, XmlV1 };

const char* source_format_name(SourceFormat f);

/**
 * One producer record exactly as it crossed the wire: field names verbatim,
 * every scalar kept as a string. Typing happens later in the transform
 * stage, never here.
 */
struct RawRecord {
    std::string org_id;
    SourceFormat source_format = SourceFormat::JsonV1;
    std::vector<std::pair<std::string, std::string>> fields;  // in wire order
    TimestampMs received_at = 0;
    std::string ingest_trace;  // "push", "fetch" or "edge"

    const std::string* field(const std::string& name) const {
        for (const auto& [k, v] : fields)
            if (k == name) return &v;
        return nullptr;
    }

    bool operator==(const RawRecord&) const = default;
};

/// Station the record came from, for ingest topic routing.
std::string record_platform(const RawRecord& rec);

struct ParseReject {
    std::size_t index = 0;  // position within the batch
    std::string reason;
};

struct ParseOutcome {
    std::vector<RawRecord> records;
    std::vector<ParseReject> rejects;
};

/**
 * JsonV1 batches look like {"station":"n1","records":[{...},...]}; scalar
 * keys beside "records" are shared by every record in the batch. XmlV1
 * batches are <batch station="n1"><rec .../>...</batch> with root attributes
 * shared the same way. A payload that is not a batch at all fails whole;
 * a record with non-scalar or duplicate fields becomes one reject.
 */
Expected<ParseOutcome> parse_json(const std::string& payload,
                                  const std::string& org_id,
                                  TimestampMs received_at);
Expected<ParseOutcome> parse_xml(const std::string& payload,
                                 const std::string& org_id,
                                 TimestampMs received_at);
Expected<ParseOutcome> parse_payload(SourceFormat format,
                                     const std::string& payload,
                                     const std::string& org_id,
                                     TimestampMs received_at);

/**
 * Checks a parsed record against its format's required vocabulary:
 * JsonV1 wants sid/t/v with t ISO 8601 and v decimal, XmlV1 wants
 * sensor/time/value likewise.
 */
Expected<void> validate_record(const RawRecord& rec);

/// Reading as the producer serializes it; values carry three decimals.
struct WireReading {
    std::string sensor_id;
    std::string parameter;
    std::string unit;
    TimestampMs measured_at = 0;
    double value = 0.0;
    double min_value = 0.0;
    double max_value = 0.0;
    std::uint32_t count = 1;
};

std::string serialize_json_v1(const std::string& station,
                              const std::vector<WireReading>& readings);
std::string serialize_xml_v1(const std::string& station,
                             const std::vector<WireReading>& readings);
std::string serialize_batch(SourceFormat format, const std::string& station,
                            const std::vector<WireReading>& readings);

/// Measurement instant from the format's time field (t resp. time).
std::optional<TimestampMs> record_measured_at(const RawRecord& rec);

/**
 * Re-emits one record as a single-record batch in its source format, all
 * field names verbatim, station lifted back to batch level. Lossless for
 * fields this codebase has never heard of.
 */
std::string reserialize_record(const RawRecord& rec);

}  // namespace seaflow::ingest
