#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "redlab/errors.hpp"

namespace redlab {

using ActivityLabel = std::string;

struct Event {
    std::uint64_t event_id = 0; // synthesized at load; unique within a trace
    ActivityLabel activity;
    std::int64_t timestamp_us = 0; // UTC microseconds since epoch
    std::map<std::string, double> numeric_values;
};

struct Trace {
    std::string case_id;
    std::vector<Event> events;
};

struct SourceMeta {
    std::string filename;
    std::string format; // "csv", "xes", or "memory"
    std::size_t row_count = 0;
};

struct LoadWarnings {
    std::size_t date_only_timestamps = 0;
    std::size_t skipped_events = 0;
    std::vector<std::string> notes;
};

/// Immutable event log. Construction sorts each trace by timestamp (stable,
/// so equal timestamps keep their input order) and precomputes the label
/// and attribute indexes; afterwards the log is safe to share across
/// threads read-only.
class EventLog {
public:
    EventLog() = default;

    static EventLog from_traces(std::vector<Trace> traces,
                                SourceMeta meta = {"", "memory", 0}) {
        for (auto& trace : traces) {
            if (trace.events.empty())
                throw Error("event log: trace '" + trace.case_id +
                            "' has no events");
            std::set<std::uint64_t> ids;
            for (const auto& e : trace.events) {
                if (e.activity.empty())
                    throw Error("event log: empty activity label in trace '" +
                                trace.case_id + "'");
                if (!ids.insert(e.event_id).second)
                    throw Error("event log: duplicate event id in trace '" +
                                trace.case_id + "'");
                for (const auto& [name, value] : e.numeric_values)
                    if (!std::isfinite(value))
                        throw Error("event log: non-finite value for '" +
                                    name + "' in trace '" + trace.case_id +
                                    "'");
            }
            std::stable_sort(trace.events.begin(), trace.events.end(),
                             [](const Event& a, const Event& b) {
                                 return a.timestamp_us < b.timestamp_us;
                             });
        }

        EventLog log;
        log.traces_ = std::move(traces);
        log.meta_ = std::move(meta);
        log.index();
        return log;
    }

    const std::vector<Trace>& traces() const { return traces_; }
    const SourceMeta& source_meta() const { return meta_; }

    /// Sorted unique labels.
    const std::vector<ActivityLabel>& activities() const {
        return activities_;
    }
    bool has_activity(const ActivityLabel& a) const {
        return std::binary_search(activities_.begin(), activities_.end(), a);
    }

    std::size_t trace_count() const { return traces_.size(); }
    std::size_t event_count() const { return event_count_; }
    std::size_t variant_count() const { return variant_count_; }

    /// Event-level occurrence counts; values sum to event_count().
    const std::map<ActivityLabel, std::size_t>& activity_frequency() const {
        return frequency_;
    }
    std::size_t frequency(const ActivityLabel& a) const {
        const auto it = frequency_.find(a);
        return it == frequency_.end() ? 0 : it->second;
    }

    /// Sorted names of every numeric attribute seen anywhere in the log.
    const std::vector<std::string>& numeric_attribute_names() const {
        return attribute_names_;
    }

    /// Every numeric value recorded on events of `a`, in log order (trace
    /// order, then event order, then attribute-name order within an event).
    std::vector<double> numeric_series(const ActivityLabel& a) const {
        require_activity(a);
        std::vector<double> out;
        for (const auto& trace : traces_)
            for (const auto& e : trace.events) {
                if (e.activity != a) continue;
                for (const auto& [name, value] : e.numeric_values)
                    out.push_back(value);
            }
        return out;
    }

    /// Values of one attribute on events of `a`, in log order.
    std::vector<double> numeric_series(const ActivityLabel& a,
                                       const std::string& attribute) const {
        require_activity(a);
        std::vector<double> out;
        for (const auto& trace : traces_)
            for (const auto& e : trace.events) {
                if (e.activity != a) continue;
                const auto it = e.numeric_values.find(attribute);
                if (it != e.numeric_values.end()) out.push_back(it->second);
            }
        return out;
    }

    /// The attribute analyzed for `a` when none is configured: the one with
    /// the most non-missing values on events of `a`, lexicographically
    /// smallest on ties; nullopt when events of `a` carry no numbers.
    std::optional<std::string> primary_numeric_attribute(
        const ActivityLabel& a) const {
        require_activity(a);
        std::map<std::string, std::size_t> counts;
        for (const auto& trace : traces_)
            for (const auto& e : trace.events) {
                if (e.activity != a) continue;
                for (const auto& [name, value] : e.numeric_values)
                    ++counts[name];
            }
        std::optional<std::string> best;
        std::size_t best_count = 0;
        for (const auto& [name, count] : counts)
            if (count > best_count) { // map order makes ties lexicographic
                best = name;
                best_count = count;
            }
        return best;
    }

    /// FNV-1a over the canonical content (case ids, activities, timestamps,
    /// numeric values); independent of event ids and provenance, so a
    /// canonical-CSV round trip preserves it.
    std::string fingerprint() const {
        std::uint64_t h = 14695981039346656037ull;
        const auto mix = [&h](const char* data, std::size_t len) {
            for (std::size_t i = 0; i < len; ++i) {
                h ^= static_cast<unsigned char>(data[i]);
                h *= 1099511628211ull;
            }
        };
        const auto mix_str = [&](const std::string& s) {
            mix(s.data(), s.size());
            mix("\x1f", 1);
        };
        for (const auto& trace : traces_) {
            mix_str(trace.case_id);
            for (const auto& e : trace.events) {
                mix_str(e.activity);
                char buf[32];
                std::snprintf(buf, sizeof buf, "%lld",
                              static_cast<long long>(e.timestamp_us));
                mix_str(buf);
                for (const auto& [name, value] : e.numeric_values) {
                    mix_str(name);
                    std::snprintf(buf, sizeof buf, "%.17g", value);
                    mix_str(buf);
                }
            }
            mix("\x1e", 1);
        }
        char out[17];
        std::snprintf(out, sizeof out, "%016llx",
                      static_cast<unsigned long long>(h));
        return out;
    }

private:
    void require_activity(const ActivityLabel& a) const {
        if (!has_activity(a))
            throw LookupError("unknown activity '" + a + "'");
    }

    void index() {
        std::set<ActivityLabel> labels;
        std::set<std::string> attrs;
        std::set<std::vector<ActivityLabel>> variants;
        event_count_ = 0;
        frequency_.clear();
        for (const auto& trace : traces_) {
            std::vector<ActivityLabel> variant;
            variant.reserve(trace.events.size());
            for (const auto& e : trace.events) {
                labels.insert(e.activity);
                ++frequency_[e.activity];
                ++event_count_;
                variant.push_back(e.activity);
                for (const auto& [name, value] : e.numeric_values)
                    attrs.insert(name);
            }
            variants.insert(std::move(variant));
        }
        activities_.assign(labels.begin(), labels.end());
        attribute_names_.assign(attrs.begin(), attrs.end());
        variant_count_ = variants.size();
    }

    std::vector<Trace> traces_;
    SourceMeta meta_;
    std::vector<ActivityLabel> activities_;
    std::vector<std::string> attribute_names_;
    std::map<ActivityLabel, std::size_t> frequency_;
    std::size_t event_count_ = 0;
    std::size_t variant_count_ = 0;
};

} // namespace redlab
