#include "seaflow/ingest/wire.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "seaflow/ingest/xml_lite.hpp"

namespace seaflow::ingest {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string scalar_to_string(const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();  // numbers and booleans keep their literal shape
}

bool is_scalar(const ordered_json& v) {
    return v.is_string() || v.is_number() || v.is_boolean();
}

void put_field(RawRecord& rec, const std::string& key,
               const std::string& value) {
    for (auto& [k, v] : rec.fields) {
        if (k == key) {
            v = value;  // record-level value wins over batch-level
            return;
        }
    }
    rec.fields.emplace_back(key, value);
}

std::string format_decimal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

bool parse_decimal(const std::string& text, double& out) {
    if (text.empty()) return false;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

Expected<void> require_fields(const RawRecord& rec, const char* sensor_key,
                              const char* time_key, const char* value_key) {
    for (const char* key : {sensor_key, time_key, value_key}) {
        const std::string* v = rec.field(key);
        if (!v || v->empty())
            return Error{Errc::UnparseablePayload,
                         std::string("missing field ") + key};
    }
    if (!parse_iso8601(*rec.field(time_key)))
        return Error{Errc::UnparseablePayload,
                     std::string("bad timestamp in ") + time_key + ": " +
                         *rec.field(time_key)};
    double ignored;
    if (!parse_decimal(*rec.field(value_key), ignored))
        return Error{Errc::UnparseablePayload,
                     std::string("bad decimal in ") + value_key + ": " +
                         *rec.field(value_key)};
    return {};
}

}  // namespace

const char* source_format_name(SourceFormat f) {
    switch (f) {
        case SourceFormat::JsonV1: return "json-v1";
        case SourceFormat::XmlV1: return "xml-v1";
    }
    return "unknown";
}

std::string record_platform(const RawRecord& rec) {
    if (const std::string* s = rec.field("station")) return *s;
    return "unknown";
}

Expected<ParseOutcome> parse_json(const std::string& payload,
                                  const std::string& org_id,
                                  TimestampMs received_at) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        return Error{Errc::UnparseablePayload,
                     "invalid JSON at byte " + std::to_string(e.byte) + ": " +
                         e.what()};
    }
    if (!doc.is_object())
        return Error{Errc::UnparseablePayload, "batch must be a JSON object"};
    auto records_it = doc.find("records");
    if (records_it == doc.end() || !records_it->is_array())
        return Error{Errc::UnparseablePayload,
                     "batch needs a \"records\" array"};

    std::vector<std::pair<std::string, std::string>> shared;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() == "records") continue;
        if (!is_scalar(it.value()))
            return Error{Errc::UnparseablePayload,
                         "batch field " + it.key() + " is not a scalar"};
        shared.emplace_back(it.key(), scalar_to_string(it.value()));
    }

    ParseOutcome out;
    std::size_t index = 0;
    for (const auto& entry : *records_it) {
        RawRecord rec;
        rec.org_id = org_id;
        rec.source_format = SourceFormat::JsonV1;
        rec.received_at = received_at;
        for (const auto& [k, v] : shared) put_field(rec, k, v);
        if (!entry.is_object()) {
            out.rejects.push_back({index++, "record is not an object"});
            continue;
        }
        bool ok = true;
        for (auto it = entry.begin(); it != entry.end(); ++it) {
            if (!is_scalar(it.value())) {
                out.rejects.push_back(
                    {index, "field " + it.key() + " is not a scalar"});
                ok = false;
                break;
            }
            put_field(rec, it.key(), scalar_to_string(it.value()));
        }
        if (ok && rec.fields.empty()) {
            out.rejects.push_back({index, "record has no fields"});
            ok = false;
        }
        if (ok) out.records.push_back(std::move(rec));
        ++index;
    }
    return out;
}

Expected<ParseOutcome> parse_xml(const std::string& payload,
                                 const std::string& org_id,
                                 TimestampMs received_at) {
    auto root = parse_xml_document(payload);
    if (!root) return root.error();
    if (root->name != "batch")
        return Error{Errc::UnparseablePayload,
                     "root element must be <batch>, got <" + root->name + ">"};

    ParseOutcome out;
    std::size_t index = 0;
    for (const XmlNode& child : root->children) {
        RawRecord rec;
        rec.org_id = org_id;
        rec.source_format = SourceFormat::XmlV1;
        rec.received_at = received_at;
        for (const auto& [k, v] : root->attributes) put_field(rec, k, v);
        if (!child.children.empty()) {
            out.rejects.push_back({index++, "record has nested elements"});
            continue;
        }
        for (const auto& [k, v] : child.attributes) put_field(rec, k, v);
        if (rec.fields.empty()) {
            out.rejects.push_back({index++, "record has no fields"});
            continue;
        }
        out.records.push_back(std::move(rec));
        ++index;
    }
    return out;
}

Expected<ParseOutcome> parse_payload(SourceFormat format,
                                     const std::string& payload,
                                     const std::string& org_id,
                                     TimestampMs received_at) {
    switch (format) {
        case SourceFormat::JsonV1:
            return parse_json(payload, org_id, received_at);
        case SourceFormat::XmlV1:
            return parse_xml(payload, org_id, received_at);
    }
    return Error{Errc::UnparseablePayload, "unknown source format"};
}

Expected<void> validate_record(const RawRecord& rec) {
    switch (rec.source_format) {
        case SourceFormat::JsonV1:
            return require_fields(rec, "sid", "t", "v");
        case SourceFormat::XmlV1:
            return require_fields(rec, "sensor", "time", "value");
    }
    return Error{Errc::UnparseablePayload, "unknown source format"};
}

std::string serialize_json_v1(const std::string& station,
                              const std::vector<WireReading>& readings) {
    ordered_json batch;
    batch["station"] = station;
    ordered_json records = ordered_json::array();
    for (const WireReading& r : readings) {
        ordered_json rec;
        rec["sid"] = r.sensor_id;
        rec["par"] = r.parameter;
        rec["unit"] = r.unit;
        rec["t"] = format_iso8601(r.measured_at);
        rec["v"] = format_decimal(r.value);
        if (r.count > 1) {
            rec["n"] = std::to_string(r.count);
            rec["lo"] = format_decimal(r.min_value);
            rec["hi"] = format_decimal(r.max_value);
        }
        records.push_back(std::move(rec));
    }
    batch["records"] = std::move(records);
    return batch.dump();
}

std::string serialize_xml_v1(const std::string& station,
                             const std::vector<WireReading>& readings) {
    std::string out = "<batch station=\"" + xml_escape_attr(station) + "\">";
    for (const WireReading& r : readings) {
        out += "<rec sensor=\"" + xml_escape_attr(r.sensor_id) + "\"";
        out += " parameter=\"" + xml_escape_attr(r.parameter) + "\"";
        out += " uom=\"" + xml_escape_attr(r.unit) + "\"";
        out += " time=\"" + format_iso8601(r.measured_at) + "\"";
        out += " value=\"" + format_decimal(r.value) + "\"";
        if (r.count > 1) {
            out += " count=\"" + std::to_string(r.count) + "\"";
            out += " min=\"" + format_decimal(r.min_value) + "\"";
            out += " max=\"" + format_decimal(r.max_value) + "\"";
        }
        out += "/>";
    }
    out += "</batch>";
    return out;
}

std::string serialize_batch(SourceFormat format, const std::string& station,
                            const std::vector<WireReading>& readings) {
    switch (format) {
        case SourceFormat::JsonV1:
            return serialize_json_v1(station, readings);
        case SourceFormat::XmlV1:
            return serialize_xml_v1(station, readings);
    }
    return {};
}

std::optional<TimestampMs> record_measured_at(const RawRecord& rec) {
    const char* key =
        rec.source_format == SourceFormat::JsonV1 ? "t" : "time";
    const std::string* v = rec.field(key);
    if (!v) return std::nullopt;
    return parse_iso8601(*v);
}

std::string reserialize_record(const RawRecord& rec) {
    if (rec.source_format == SourceFormat::JsonV1) {
        ordered_json batch;
        if (const std::string* s = rec.field("station")) batch["station"] = *s;
        ordered_json fields;
        for (const auto& [k, v] : rec.fields) {
            if (k == "station") continue;
            fields[k] = v;
        }
        batch["records"] = ordered_json::array({std::move(fields)});
        return batch.dump();
    }
    std::string out = "<batch";
    if (const std::string* s = rec.field("station"))
        out += " station=\"" + xml_escape_attr(*s) + "\"";
    out += "><rec";
    for (const auto& [k, v] : rec.fields) {
        if (k == "station") continue;
        out += " " + k + "=\"" + xml_escape_attr(v) + "\"";
    }
    out += "/></batch>";
    return out;
}

}  // namespace seaflow::ingest
