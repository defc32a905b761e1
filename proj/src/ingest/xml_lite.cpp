#include "seaflow/ingest/xml_lite.hpp"

#include <cctype>

namespace seaflow::ingest {

namespace {

thread_local XmlError g_last_error;

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    bool starts_with(const char* s) const {
        return text.compare(pos, std::char_traits<char>::length(s), s) == 0;
    }
    void skip_ws() {
        while (!done() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
};

Error fail(Cursor& c, std::string message) {
    g_last_error = {c.pos, message};
    return Error{Errc::UnparseablePayload,
                 message + " at byte " + std::to_string(c.pos)};
}

bool name_start(char ch) {
    return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_';
}
bool name_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
           ch == '-' || ch == '.' || ch == ':';
}

Expected<std::string> read_name(Cursor& c) {
    if (c.done() || !name_start(c.peek())) return fail(c, "expected name");
    std::size_t begin = c.pos;
    while (!c.done() && name_char(c.peek())) ++c.pos;
    return c.text.substr(begin, c.pos - begin);
}

Expected<std::string> decode_entities(Cursor& c, std::size_t begin,
                                      std::size_t end) {
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        char ch = c.text[i];
        if (ch != '&') {
            out.push_back(ch);
            continue;
        }
        std::size_t semi = c.text.find(';', i);
        if (semi == std::string::npos || semi >= end) {
            c.pos = i;
            return fail(c, "unterminated entity");
        }
        std::string entity = c.text.substr(i + 1, semi - i - 1);
        if (entity == "amp") out.push_back('&');
        else if (entity == "lt") out.push_back('<');
        else if (entity == "gt") out.push_back('>');
        else if (entity == "quot") out.push_back('"');
        else if (entity == "apos") out.push_back('\'');
        else {
            c.pos = i;
            return fail(c, "unknown entity &" + entity + ";");
        }
        i = semi;
    }
    return out;
}

Expected<XmlNode> read_element(Cursor& c, int depth) {
    if (depth > 32) return fail(c, "nesting too deep");
    if (c.done() || c.peek() != '<') return fail(c, "expected '<'");
    ++c.pos;
    auto name = read_name(c);
    if (!name) return name.error();

    XmlNode node;
    node.name = *name;

    for (;;) {
        c.skip_ws();
        if (c.done()) return fail(c, "unterminated start tag");
        if (c.starts_with("/>")) {
            c.pos += 2;
            return node;
        }
        if (c.peek() == '>') {
            ++c.pos;
            break;
        }
        auto key = read_name(c);
        if (!key) return key.error();
        c.skip_ws();
        if (c.done() || c.peek() != '=') return fail(c, "expected '='");
        ++c.pos;
        c.skip_ws();
        if (c.done() || (c.peek() != '"' && c.peek() != '\''))
            return fail(c, "expected quoted attribute value");
        char quote = c.peek();
        ++c.pos;
        std::size_t begin = c.pos;
        while (!c.done() && c.peek() != quote && c.peek() != '<') ++c.pos;
        if (c.done() || c.peek() != quote)
            return fail(c, "unterminated attribute value");
        auto value = decode_entities(c, begin, c.pos);
        if (!value) return value.error();
        ++c.pos;
        for (const auto& [k, v] : node.attributes)
            if (k == *key) return fail(c, "duplicate attribute " + *key);
        node.attributes.emplace_back(*key, *value);
    }

    // Children until the matching close tag; stray text is rejected.
    for (;;) {
        c.skip_ws();
        if (c.done()) return fail(c, "missing </" + node.name + ">");
        if (c.peek() != '<') return fail(c, "unexpected text content");
        if (c.starts_with("</")) {
            c.pos += 2;
            auto close = read_name(c);
            if (!close) return close.error();
            if (*close != node.name)
                return fail(c, "mismatched close tag </" + *close + ">");
            c.skip_ws();
            if (c.done() || c.peek() != '>') return fail(c, "expected '>'");
            ++c.pos;
            return node;
        }
        auto child = read_element(c, depth + 1);
        if (!child) return child.error();
        node.children.push_back(std::move(*child));
    }
}

}  // namespace

Expected<XmlNode> parse_xml_document(const std::string& text) {
    Cursor c{text};
    c.skip_ws();
    if (c.starts_with("<?")) {  // prolog tolerated, content ignored
        std::size_t end = text.find("?>", c.pos);
        if (end == std::string::npos) return fail(c, "unterminated prolog");
        c.pos = end + 2;
        c.skip_ws();
    }
    auto root = read_element(c, 0);
    if (!root) return root.error();
    c.skip_ws();
    if (!c.done()) return fail(c, "trailing content after root element");
    return root;
}

const XmlError& last_xml_error() { return g_last_error; }

std::string xml_escape_attr(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (char ch : value) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

}  // namespace seaflow::ingest
