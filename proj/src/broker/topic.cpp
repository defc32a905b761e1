#include "seaflow/broker/topic.hpp"

namespace seaflow {

std::vector<std::string> split_topic(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t slash = s.find('/', start);
        if (slash == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, slash - start));
        start = slash + 1;
    }
}

bool valid_topic(std::string_view topic) {
    if (topic.empty()) return false;
    return topic.find('+') == std::string_view::npos &&
           topic.find('#') == std::string_view::npos;
}

bool valid_filter(std::string_view filter) {
    if (filter.empty()) return false;
    auto levels = split_topic(filter);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::string& lv = levels[i];
        if (lv == "#") {
            if (i + 1 != levels.size()) return false;
            continue;
        }
        if (lv == "+") continue;
        if (lv.find('+') != std::string::npos || lv.find('#') != std::string::npos)
            return false;
    }
    return true;
}

bool match_filter(std::string_view filter, std::string_view topic) {
    auto f = split_topic(filter);
    auto t = split_topic(topic);
    std::size_t i = 0;
    for (; i < f.size(); ++i) {
        if (f[i] == "#") return true;  // covers the rest, and the parent level
        if (i >= t.size()) return false;
        if (f[i] == "+") continue;
        if (f[i] != t[i]) return false;
    }
    return i == t.size();
}

std::optional<std::string> topic_org(std::string_view topic) {
    auto seg = split_topic(topic);
    if (seg.size() >= 3 && seg[0] == "data") return seg[2];
    if (seg.size() >= 2 &&
        (seg[0] == "ingest" || seg[0] == "quarantine" || seg[0] == "alarms"))
        return seg[1];
    return std::nullopt;
}

std::optional<DataCategory> topic_category(std::string_view topic) {
    auto seg = split_topic(topic);
    if (seg.size() >= 2 && seg[0] == "data") return category_from_name(seg[1]);
    return std::nullopt;
}

std::string data_topic(DataCategory cat, const std::string& org,
                       const std::string& platform, const std::string& parameter) {
    return std::string("data/") + category_topic_segment(cat) + "/" + org + "/" +
           platform + "/" + parameter;
}

std::string quarantine_topic(const std::string& org, const std::string& parameter) {
    return "quarantine/" + org + "/" + parameter;
}

std::string ingest_topic(const std::string& org, const std::string& platform) {
    return "ingest/" + org + "/" + platform;
}

std::string alarm_topic(const std::string& org, const std::string& kind) {
    return "alarms/" + org + "/" + kind;
}

}  // namespace seaflow
