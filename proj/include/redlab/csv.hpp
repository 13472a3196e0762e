#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"
#include "redlab/timestamps.hpp"

namespace redlab {

struct ColumnMapping {
    std::string case_col;
    std::string activity_col;
    std::string time_col;
    std::vector<std::string> value_cols;
    char delimiter = ',';
};

namespace detail {

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0; // 1-based line where the record starts
};

/// RFC-4180-style reader: quoted fields, doubled quotes as escapes,
/// LF or CRLF line ends, configurable delimiter. Reads everything up front;
/// logs are small enough that streaming buys nothing.
inline std::vector<CsvRecord> read_csv(const std::string& path,
                                       char delimiter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = std::move(buffer).str();
    if (text.size() >= 3 && text[0] == '\xef' && text[1] == '\xbb' &&
        text[2] == '\xbf')
        text.erase(0, 3); // UTF-8 BOM

    std::vector<CsvRecord> records;
    CsvRecord record;
    record.line = 1;
    std::string field;
    std::size_t line = 1;
    bool quoted = false;
    bool any = false; // current record has content (field text or delimiter)

    const auto end_field = [&] {
        record.fields.push_back(std::move(field));
        field.clear();
    };
    const auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record = {};
        record.line = line;
        any = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            any = true;
        } else if (c == delimiter) {
            end_field();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            ++line;
            if (any || !field.empty()) end_record();
            record.line = line;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted)
        throw ParseError(path + ": unterminated quoted field at line " +
                         std::to_string(record.line));
    if (any || !field.empty()) end_record();
    return records;
}

inline double parse_double(const std::string& text, const std::string& path,
                           std::size_t line) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw ParseError(path + ":" + std::to_string(line) +
                         ": not a finite number: '" + text + "'");
    return v;
}

inline std::string csv_escape(const std::string& field, char delimiter) {
    bool needs_quotes = false;
    for (const char c : field)
        if (c == delimiter || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace detail

inline EventLog load_csv(const std::string& path, const ColumnMapping& mapping,
                         LoadWarnings* warnings = nullptr) {
    if (mapping.case_col.empty() || mapping.activity_col.empty() ||
        mapping.time_col.empty())
        throw ConfigError("csv mapping: case_col, activity_col and time_col "
                          "are required");

    const auto records = detail::read_csv(path, mapping.delimiter);
    if (records.empty()) throw ParseError(path + ": missing header row");

    const auto& header = records.front().fields;
    const auto column = [&](const std::string& name) -> std::size_t {
        std::size_t found = header.size();
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) {
                if (found != header.size())
                    throw ConfigError(path + ": column '" + name +
                                      "' appears more than once");
                found = i;
            }
        if (found == header.size())
            throw ConfigError(path + ": no column named '" + name + "'");
        return found;
    };

    const std::size_t case_idx = column(mapping.case_col);
    const std::size_t act_idx = column(mapping.activity_col);
    const std::size_t time_idx = column(mapping.time_col);
    std::vector<std::size_t> value_idx;
    for (const auto& name : mapping.value_cols)
        value_idx.push_back(column(name));

    if (warnings) {
        // Unmapped columns are dropped from the log; say so, since a
        // forgotten value_cols entry silently loses data downstream.
        std::set<std::size_t> used{case_idx, act_idx, time_idx};
        used.insert(value_idx.begin(), value_idx.end());
        for (std::size_t i = 0; i < header.size(); ++i)
            if (!used.count(i))
                warnings->notes.push_back("column '" + header[i] +
                                          "' is not mapped and was ignored");
    }

    std::vector<Trace> traces;
    std::map<std::string, std::size_t> trace_of_case;
    std::uint64_t next_id = 0;

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size())
            throw ParseError(path + ":" + std::to_string(rec.line) +
                             ": expected " + std::to_string(header.size()) +
                             " fields, got " +
                             std::to_string(rec.fields.size()));

        const std::string& case_id = rec.fields[case_idx];
        if (case_id.empty())
            throw ParseError(path + ":" + std::to_string(rec.line) +
                             ": empty case id");

        Event event;
        event.event_id = next_id++;
        event.activity = rec.fields[act_idx];
        if (event.activity.empty())
            throw ParseError(path + ":" + std::to_string(rec.line) +
                             ": empty activity label");

        ParsedTimestamp ts;
        try {
            ts = parse_iso8601(rec.fields[time_idx]);
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(rec.line) + ": " +
                             e.what());
        }
        event.timestamp_us = ts.micros;
        if (ts.date_only && warnings) ++warnings->date_only_timestamps;

        for (std::size_t k = 0; k < value_idx.size(); ++k) {
            const std::string& cell = rec.fields[value_idx[k]];
            if (cell.empty()) continue; // absent, never zero
            event.numeric_values[mapping.value_cols[k]] =
                detail::parse_double(cell, path, rec.line);
        }

        const auto [it, inserted] =
            trace_of_case.try_emplace(case_id, traces.size());
        if (inserted) traces.push_back({case_id, {}});
        traces[it->second].events.push_back(std::move(event));
    }

    return EventLog::from_traces(
        std::move(traces), {path, "csv", records.size() - 1});
}

/// Canonical form: `case,activity,timestamp` plus one column per numeric
/// attribute (sorted by name), comma-separated, timestamps in canonical
/// UTC ISO-8601, numbers in shortest round-trip form. Loading the output
/// back reproduces the log (same fingerprint).
inline void write_canonical_csv(const EventLog& log, std::ostream& out) {
    const auto& attrs = log.numeric_attribute_names();
    out << "case,activity,timestamp";
    for (const auto& name : attrs) out << ',' << detail::csv_escape(name, ',');
    out << '\n';
    for (const auto& trace : log.traces()) {
        for (const auto& e : trace.events) {
            out << detail::csv_escape(trace.case_id, ',') << ','
                << detail::csv_escape(e.activity, ',') << ','
                << format_iso8601(e.timestamp_us);
            for (const auto& name : attrs) {
                out << ',';
                const auto it = e.numeric_values.find(name);
                if (it != e.numeric_values.end())
                    out << detail::format_double(it->second);
            }
            out << '\n';
        }
    }
}

inline void write_canonical_csv(const EventLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    write_canonical_csv(log, out);
    if (!out) throw ParseError("write failed: '" + path + "'");
}

/// Mapping that reads a canonical export back.
inline ColumnMapping canonical_mapping(const EventLog& log) {
    ColumnMapping m;
    m.case_col = "case";
    m.activity_col = "activity";
    m.time_col = "timestamp";
    m.value_cols = log.numeric_attribute_names();
    return m;
}

} // namespace redlab
