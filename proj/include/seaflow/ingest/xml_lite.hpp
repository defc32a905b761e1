#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "seaflow/core/error.hpp"

namespace seaflow::ingest {

/**
 * Minimal XML reader for the attribute-style wire format: elements,
 * attributes, self-closing tags, the five predefined entities. No text
 * content, comments, processing instructions or namespaces. Errors carry the
 * byte offset that broke the parse.
 */
struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;  // in order
    std::vector<XmlNode> children;

    const std::string* attr(const std::string& key) const {
        for (const auto& [k, v] : attributes)
            if (k == key) return &v;
        return nullptr;
    }
};

struct XmlError {
    std::size_t offset = 0;
    std::string message;
};

/// Parses one document with a single root element.
Expected<XmlNode> parse_xml_document(const std::string& text);

/// Offset details of the last failure from parse_xml_document in this
/// thread; valid only straight after an error.
const XmlError& last_xml_error();

std::string xml_escape_attr(const std::string& value);

}  // namespace seaflow::ingest
