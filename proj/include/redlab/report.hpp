#pragma once

#include <cstdio>
#include <sstream>
#include <string>

#include "json.hpp"
#include "redlab/detector.hpp"
#include "redlab/version.hpp"

namespace redlab {

namespace detail {

inline nlohmann::ordered_json combination_json(Combination c, unsigned k) {
    nlohmann::ordered_json j;
    j["combination"] = to_string(c);
    if (c == Combination::AtLeast) j["at_least_k"] = k;
    return j;
}

inline nlohmann::ordered_json score_json(const PerspectiveScore& s) {
    if (!s) return nullptr;
    return *s;
}

} // namespace detail

inline nlohmann::ordered_json config_to_json(const DetectorConfig& cfg,
                                             const std::string& provider) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["theta_c"] = cfg.theta_c ? ordered_json(*cfg.theta_c) : nullptr;
    j["theta_d"] = cfg.theta_d ? ordered_json(*cfg.theta_d) : nullptr;
    j["theta_s"] = cfg.theta_s ? ordered_json(*cfg.theta_s) : nullptr;
    j.update(detail::combination_json(cfg.combination, cfg.at_least_k));
    if (cfg.low_frequency_override) {
        const auto& o = *cfg.low_frequency_override;
        ordered_json lo;
        lo["f_low"] = o.f_low;
        lo.update(detail::combination_json(o.combination, o.at_least_k));
        j["low_frequency_override"] = lo;
    } else {
        j["low_frequency_override"] = nullptr;
    }
    j["theta_ld"] = cfg.theta_ld;
    j["theta_a"] = cfg.theta_a;
    j["trim"] = cfg.trim;
    j["group_transitively"] = cfg.group_transitively;
    j["strict_na"] = cfg.strict_na;
    const auto& w = cfg.control_flow_weights;
    j["control_flow_weights"] = {{"directly_out", w.directly_out},
                                 {"directly_in", w.directly_in},
                                 {"indirectly_out", w.indirectly_out},
                                 {"indirectly_in", w.indirectly_in}};
    ordered_json overrides = ordered_json::object();
    for (const auto& [label, attribute] : cfg.attribute_overrides)
        overrides[label] = attribute;
    j["attribute_overrides"] = overrides;
    j["semantic_provider"] =
        provider.empty() ? ordered_json(nullptr) : ordered_json(provider);
    return j;
}

inline nlohmann::ordered_json report_to_json(const DetectionReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["version"] = std::string(kVersion);
    j["config"] = config_to_json(report.config, report.semantic_provider);
    j["log_fingerprint"] = {{"traces", report.log.traces},
                            {"events", report.log.events},
                            {"activities", report.log.activities},
                            {"hash", report.log.hash}};
    ordered_json pairs = ordered_json::array();
    for (const auto& v : report.pairs) {
        ordered_json p;
        p["a"] = v.a;
        p["b"] = v.b;
        p["scores"] = {{"control_flow", detail::score_json(v.scores.control_flow)},
                       {"data_value", detail::score_json(v.scores.data_value)},
                       {"semantic", detail::score_json(v.scores.semantic)}};
        p["satisfied"] = v.satisfied;
        p["redundant"] = v.redundant;
        p["rule"] = v.rule;
        pairs.push_back(std::move(p));
    }
    j["pairs"] = pairs;
    ordered_json redundant = ordered_json::array();
    for (const auto& [a, b] : report.redundant_pairs)
        redundant.push_back(ordered_json::array({a, b}));
    j["redundant_pairs"] = redundant;
    if (report.groups) {
        ordered_json groups = ordered_json::array();
        for (const auto& g : *report.groups) groups.push_back(g);
        j["groups"] = groups;
    }
    return j;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (const char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

inline std::string score_cell(const PerspectiveScore& s) {
    if (!s) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", *s);
    return buf;
}

} // namespace detail

/// Flat pair rows; empty score cells mean disabled-or-inapplicable, the
/// `satisfied` cell joins perspective names with ';'.
inline std::string report_to_csv(const DetectionReport& report) {
    std::ostringstream out;
    out << "a,b,control_flow,data_value,semantic,satisfied,redundant,rule\n";
    for (const auto& v : report.pairs) {
        std::string satisfied;
        for (const auto& name : v.satisfied) {
            if (!satisfied.empty()) satisfied += ';';
            satisfied += name;
        }
        out << detail::csv_field(v.a) << ',' << detail::csv_field(v.b) << ','
            << detail::score_cell(v.scores.control_flow) << ','
            << detail::score_cell(v.scores.data_value) << ','
            << detail::score_cell(v.scores.semantic) << ','
            << detail::csv_field(satisfied) << ','
            << (v.redundant ? "true" : "false") << ',' << v.rule << '\n';
    }
    return out.str();
}

/// Human-readable summary for the terminal.
inline std::string report_to_table(const DetectionReport& report) {
    std::ostringstream out;
    out << "log: " << report.log.traces << " traces, " << report.log.events
        << " events, " << report.log.activities << " activities (hash "
        << report.log.hash << ")\n";

    std::size_t pair_width = 4; // fits the header
    for (const auto& v : report.pairs)
        pair_width = std::max(pair_width, v.a.size() + v.b.size() + 3);
    const auto cell = [](const PerspectiveScore& s) {
        if (!s) return std::string("     -");
        char buf[16];
        std::snprintf(buf, sizeof buf, "%6.3f", *s);
        return std::string(buf);
    };
    out << std::string(pair_width, ' ').replace(0, 4, "pair")
        << "  ctrl    data    sem     verdict\n";
    for (const auto& v : report.pairs) {
        std::string pair = v.a + " ~ " + v.b;
        pair.resize(pair_width, ' ');
        out << pair << "  " << cell(v.scores.control_flow) << "  "
            << cell(v.scores.data_value) << "  " << cell(v.scores.semantic)
            << "  " << (v.redundant ? "redundant" : "-") << " (" << v.rule
            << ")\n";
    }
    out << report.redundant_pairs.size() << " redundant pair(s) of "
        << report.pairs.size() << '\n';
    if (report.groups) {
        out << "groups:";
        if (report.groups->empty()) out << " none";
        for (const auto& g : *report.groups) {
            out << " {";
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (i) out << ", ";
                out << g[i];
            }
            out << '}';
        }
        out << '\n';
    }
    return out.str();
}

} // namespace redlab
