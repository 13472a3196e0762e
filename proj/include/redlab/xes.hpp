#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "redlab/csv.hpp"
#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"
#include "redlab/timestamps.hpp"

namespace redlab {

namespace detail {

struct XmlElement {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<XmlElement> children;

    const std::string* attr(std::string_view key) const {
        for (const auto& [k, v] : attrs)
            if (k == key) return &v;
        return nullptr;
    }
};

/// Just enough XML for XES: elements, attributes, entity references,
/// comments/PIs/DOCTYPE/CDATA skipped, text content ignored (XES keeps all
/// data in attributes). Errors report the byte offset.
class XmlParser {
public:
    explicit XmlParser(std::string text) : text_(std::move(text)) {}

    XmlElement parse_document() {
        skip_misc();
        if (pos_ >= text_.size()) fail("no root element");
        XmlElement root = parse_element();
        skip_misc();
        if (pos_ < text_.size()) fail("content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("malformed XML at byte " + std::to_string(pos_) +
                         ": " + why);
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    bool starts_with(std::string_view s) const {
        return text_.compare(pos_, s.size(), s) == 0;
    }
    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    void skip_until(std::string_view closer) {
        const auto at = text_.find(closer, pos_);
        if (at == std::string::npos) fail("unterminated construct");
        pos_ = at + closer.size();
    }

    // Whitespace, comments, processing instructions, DOCTYPE.
    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_until("-->");
            } else if (starts_with("<?")) {
                skip_until("?>");
            } else if (starts_with("<!DOCTYPE") || starts_with("<!doctype")) {
                // Tolerate an internal subset by tracking bracket depth.
                int depth = 0;
                while (pos_ < text_.size()) {
                    const char c = text_[pos_++];
                    if (c == '[') ++depth;
                    else if (c == ']') --depth;
                    else if (c == '>' && depth == 0) break;
                }
            } else {
                return;
            }
        }
    }

    std::string parse_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == ':' ||
                c == '_' || c == '-' || c == '.')
                ++pos_;
            else
                break;
        }
        if (pos_ == start) fail("expected a name");
        return text_.substr(start, pos_ - start);
    }

    std::string decode_entities(std::string_view raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            const auto end = raw.find(';', i);
            if (end == std::string_view::npos) fail("unterminated entity");
            const std::string_view name = raw.substr(i + 1, end - i - 1);
            if (name == "amp") out += '&';
            else if (name == "lt") out += '<';
            else if (name == "gt") out += '>';
            else if (name == "quot") out += '"';
            else if (name == "apos") out += '\'';
            else if (!name.empty() && name[0] == '#') {
                long code = 0;
                if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                    code = std::strtol(std::string(name.substr(2)).c_str(),
                                       nullptr, 16);
                else
                    code = std::strtol(std::string(name.substr(1)).c_str(),
                                       nullptr, 10);
                // UTF-8 encode.
                if (code < 0x80) {
                    out += static_cast<char>(code);
                } else if (code < 0x800) {
                    out += static_cast<char>(0xC0 | (code >> 6));
                    out += static_cast<char>(0x80 | (code & 0x3F));
                } else if (code < 0x10000) {
                    out += static_cast<char>(0xE0 | (code >> 12));
                    out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
                    out += static_cast<char>(0x80 | (code & 0x3F));
                } else {
                    out += static_cast<char>(0xF0 | (code >> 18));
                    out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
                    out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
                    out += static_cast<char>(0x80 | (code & 0x3F));
                }
            } else {
                fail("unknown entity '&" + std::string(name) + ";'");
            }
            i = end;
        }
        return out;
    }

    XmlElement parse_element() {
        if (peek() != '<') fail("expected '<'");
        ++pos_;
        XmlElement element;
        element.name = parse_name();

        for (;;) {
            skip_ws();
            if (starts_with("/>")) {
                pos_ += 2;
                return element;
            }
            if (peek() == '>') {
                ++pos_;
                break;
            }
            std::string key = parse_name();
            skip_ws();
            if (peek() != '=') fail("expected '=' after attribute name");
            ++pos_;
            skip_ws();
            const char quote = peek();
            if (quote != '"' && quote != '\'') fail("unquoted attribute");
            ++pos_;
            const auto end = text_.find(quote, pos_);
            if (end == std::string::npos) fail("unterminated attribute");
            element.attrs.emplace_back(
                std::move(key),
                decode_entities(std::string_view(text_).substr(pos_, end - pos_)));
            pos_ = end + 1;
        }

        // Children and ignorable text until the matching close tag.
        for (;;) {
            if (pos_ >= text_.size()) fail("unterminated <" + element.name + ">");
            if (peek() == '<') {
                if (starts_with("</")) {
                    pos_ += 2;
                    const std::string name = parse_name();
                    if (name != element.name)
                        fail("mismatched close tag </" + name + ">");
                    skip_ws();
                    if (peek() != '>') fail("expected '>'");
                    ++pos_;
                    return element;
                }
                if (starts_with("<!--")) {
                    skip_until("-->");
                } else if (starts_with("<![CDATA[")) {
                    skip_until("]]>");
                } else if (starts_with("<?")) {
                    skip_until("?>");
                } else {
                    element.children.push_back(parse_element());
                }
            } else {
                ++pos_; // text content: XES keeps data in attributes
            }
        }
    }

    std::string text_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Reads the XES subset used by process-mining tools: `log` containing
/// `trace` elements containing `event` elements, each carrying `string`,
/// `date`, `float` and `int` attribute children. Only numeric attributes
/// whose key is listed in `numeric_keys` are retained. Events without a
/// `concept:name` or `time:timestamp` are skipped and counted in
/// `warnings->skipped_events`.
inline EventLog load_xes(const std::string& path,
                         const std::set<std::string>& numeric_keys,
                         LoadWarnings* warnings = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();

    detail::XmlParser parser(std::move(buffer).str());
    const detail::XmlElement root = parser.parse_document();
    if (root.name != "log")
        throw ParseError(path + ": root element is <" + root.name +
                         ">, expected <log>");

    std::vector<Trace> traces;
    std::uint64_t next_id = 0;
    std::size_t event_rows = 0;

    for (const auto& node : root.children) {
        if (node.name != "trace") continue;
        Trace trace;
        for (const auto& child : node.children) {
            if (child.name == "string") {
                const auto* key = child.attr("key");
                const auto* value = child.attr("value");
                if (key && value && *key == "concept:name")
                    trace.case_id = *value;
            }
        }
        if (trace.case_id.empty()) {
            trace.case_id = "trace_" + std::to_string(traces.size() + 1);
            if (warnings)
                warnings->notes.push_back(path + ": unnamed trace, using '" +
                                          trace.case_id + "'");
        }

        for (const auto& child : node.children) {
            if (child.name != "event") continue;
            ++event_rows;
            Event event;
            event.event_id = next_id++;
            bool has_time = false;
            for (const auto& attr : child.children) {
                const auto* key = attr.attr("key");
                const auto* value = attr.attr("value");
                if (!key || !value) continue;
                if (attr.name == "string" && *key == "concept:name") {
                    event.activity = *value;
                } else if (attr.name == "date" && *key == "time:timestamp") {
                    const auto ts = parse_iso8601(*value);
                    event.timestamp_us = ts.micros;
                    has_time = true;
                    if (ts.date_only && warnings)
                        ++warnings->date_only_timestamps;
                } else if ((attr.name == "float" || attr.name == "int") &&
                           numeric_keys.count(*key)) {
                    const char* begin = value->c_str();
                    char* end = nullptr;
                    const double v = std::strtod(begin, &end);
                    if (end == begin || *end != '\0' || !std::isfinite(v))
                        throw ParseError(path + ": attribute '" + *key +
                                         "' is not a finite number: '" +
                                         *value + "'");
                    event.numeric_values[*key] = v;
                }
            }
            if (event.activity.empty() || !has_time) {
                if (warnings) ++warnings->skipped_events;
                continue;
            }
            trace.events.push_back(std::move(event));
        }
        if (!trace.events.empty()) traces.push_back(std::move(trace));
    }

    return EventLog::from_traces(std::move(traces), {path, "xes", event_rows});
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace detail

/// Writes the same XES subset load_xes reads; a round trip preserves the
/// log's fingerprint. Numeric attributes come out as `float` children.
inline void write_xes(const EventLog& log, std::ostream& out) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<log xes.version=\"1.0\" xes.features=\"\">\n";
    for (const auto& trace : log.traces()) {
        out << "  <trace>\n";
        out << "    <string key=\"concept:name\" value=\""
            << detail::xml_escape(trace.case_id) << "\"/>\n";
        for (const auto& e : trace.events) {
            out << "    <event>\n";
            out << "      <string key=\"concept:name\" value=\""
                << detail::xml_escape(e.activity) << "\"/>\n";
            out << "      <date key=\"time:timestamp\" value=\""
                << format_iso8601(e.timestamp_us) << "\"/>\n";
            for (const auto& [key, value] : e.numeric_values)
                out << "      <float key=\"" << detail::xml_escape(key)
                    << "\" value=\"" << detail::format_double(value)
                    << "\"/>\n";
            out << "    </event>\n";
        }
        out << "  </trace>\n";
    }
    out << "</log>\n";
}

inline void write_xes(const EventLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    write_xes(log, out);
    if (!out) throw ParseError("write failed: '" + path + "'");
}

} // namespace redlab
