#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "redlab/control_flow.hpp"
#include "redlab/data_value.hpp"
#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"
#include "redlab/semantic.hpp"
#include "redlab/similarity.hpp"

namespace redlab {

/// How the satisfied perspectives of a pair combine into a verdict.
enum class Combination { All, Any, AtLeast };

inline const char* to_string(Combination c) {
    switch (c) {
        case Combination::All: return "all";
        case Combination::Any: return "any";
        case Combination::AtLeast: return "at_least";
    }
    return "?";
}

inline Combination combination_from_string(const std::string& s) {
    if (s == "all") return Combination::All;
    if (s == "any") return Combination::Any;
    if (s == "at_least") return Combination::AtLeast;
    throw ConfigError("unknown combination '" + s +
                      "' (expected all, any or at_least)");
}

/// Relaxed rule for rarely occurring activities: when both labels of a pair
/// fall below the frequency floor, `combination` replaces the configured one.
struct LowFrequencyOverride {
    double f_low = 0.01; // event-count fraction of the log
    Combination combination = Combination::Any;
    unsigned at_least_k = 1; // used when combination == AtLeast
};

/// Everything that shapes a detection run. A perspective participates only
/// when its threshold is set; scores at or below the threshold count as
/// satisfied.
struct DetectorConfig {
    std::optional<double> theta_c; // control flow
    std::optional<double> theta_d; // data values
    std::optional<double> theta_s; // semantics

    Combination combination = Combination::All;
    unsigned at_least_k = 1; // used when combination == AtLeast
    std::optional<LowFrequencyOverride> low_frequency_override;

    double theta_ld = 0.9; // indirect-follows significance cut
    double theta_a = 0.1;  // percentile-vector clustering radius
    double trim = 0.0;     // fraction trimmed from each end of a dataset

    bool group_transitively = false;
    bool strict_na = false; // score inapplicable perspectives as 1 instead
                            // of skipping them

    FourWayWeights control_flow_weights;
    std::map<ActivityLabel, std::string> attribute_overrides;

    unsigned enabled_count() const {
        return (theta_c ? 1u : 0u) + (theta_d ? 1u : 0u) + (theta_s ? 1u : 0u);
    }

    void validate() const {
        if (enabled_count() == 0)
            throw ConfigError(
                "detector: no perspective enabled (set at least one of "
                "theta_c, theta_d, theta_s)");
        const auto check_unit = [](const char* name,
                                   const std::optional<double>& v) {
            if (v && (*v < 0.0 || *v > 1.0 || !std::isfinite(*v)))
                throw ConfigError(std::string("detector: ") + name +
                                  " out of [0, 1]");
        };
        check_unit("theta_c", theta_c);
        check_unit("theta_d", theta_d);
        check_unit("theta_s", theta_s);
        if (theta_ld < 0.0 || theta_ld > 1.0 || !std::isfinite(theta_ld))
            throw ConfigError("detector: theta_ld out of [0, 1]");
        if (theta_a < 0.0 || !std::isfinite(theta_a))
            throw ConfigError("detector: theta_a must be non-negative");
        if (trim < 0.0 || trim >= 0.5)
            throw ConfigError("detector: trim must be in [0, 0.5)");
        const auto check_k = [this](const char* who, Combination c,
                                    unsigned k) {
            if (c != Combination::AtLeast) return;
            if (k < 1 || k > enabled_count())
                throw ConfigError(
                    std::string("detector: ") + who +
                    " at_least k must be between 1 and the number of "
                    "enabled perspectives");
        };
        check_k("combination", combination, at_least_k);
        if (low_frequency_override) {
            const auto& o = *low_frequency_override;
            if (o.f_low < 0.0 || o.f_low > 1.0 || !std::isfinite(o.f_low))
                throw ConfigError("detector: f_low out of [0, 1]");
            check_k("low-frequency override", o.combination, o.at_least_k);
        }
    }
};

/// The three perspective scores of one pair. An empty slot means the
/// perspective was disabled or had nothing to say about the pair; which of
/// the two it was follows from the config.
struct PairScores {
    PerspectiveScore control_flow;
    PerspectiveScore data_value;
    PerspectiveScore semantic;
};

struct PairVerdict {
    ActivityLabel a;
    ActivityLabel b;
    PairScores scores;
    std::vector<std::string> satisfied; // perspectives at or below threshold
    bool redundant = false;
    std::string rule; // the rule that decided, e.g. "all" or "undecidable"
};

struct LogFingerprint {
    std::size_t traces = 0;
    std::size_t events = 0;
    std::size_t activities = 0;
    std::string hash;
};

inline LogFingerprint fingerprint_of(const EventLog& log) {
    return {log.trace_count(), log.event_count(), log.activities().size(),
            log.fingerprint()};
}

struct DetectionReport {
    DetectorConfig config;
    std::string semantic_provider; // empty when the perspective is disabled
    LogFingerprint log;
    std::vector<PairVerdict> pairs; // all unordered pairs, lexicographic
    std::vector<std::pair<ActivityLabel, ActivityLabel>> redundant_pairs;
    // Union-find closure of the redundant pairs; only filled (and only
    // serialized) when config.group_transitively is set.
    std::optional<std::vector<std::vector<ActivityLabel>>> groups;
};

/// Decide one pair from its scores. `freq_a` / `freq_b` are event-count
/// fractions of the whole log and only matter when the low-frequency
/// override is configured. Pure: no log access, so a verdict can be
/// re-derived from a report.
inline PairVerdict evaluate_pair(const ActivityLabel& a,
                                 const ActivityLabel& b,
                                 const PairScores& scores, double freq_a,
                                 double freq_b, const DetectorConfig& cfg) {
    PairVerdict v;
    v.a = a;
    v.b = b;
    v.scores = scores;

    // Collapse each enabled perspective to satisfied / failed / inapplicable.
    std::size_t applicable = 0;
    std::size_t satisfied = 0;
    const auto consider = [&](const char* name,
                              const std::optional<double>& threshold,
                              const PerspectiveScore& score) {
        if (!threshold) return;
        if (!score && !cfg.strict_na) return; // nothing to judge: skip
        const double value = score ? *score : 1.0;
        ++applicable;
        if (value <= *threshold) {
            ++satisfied;
            v.satisfied.push_back(name);
        }
    };
    consider("control_flow", cfg.theta_c, scores.control_flow);
    consider("data_value", cfg.theta_d, scores.data_value);
    consider("semantic", cfg.theta_s, scores.semantic);

    // When every enabled perspective came back empty there is no evidence
    // either way, not even under strict_na: the pair is undecidable, never
    // redundant.
    const bool all_na = !(cfg.theta_c && scores.control_flow) &&
                        !(cfg.theta_d && scores.data_value) &&
                        !(cfg.theta_s && scores.semantic);
    if (all_na) {
        v.satisfied.clear();
        v.redundant = false;
        v.rule = "undecidable";
        return v;
    }

    Combination effective = cfg.combination;
    unsigned effective_k = cfg.at_least_k;
    std::string rule_prefix;
    if (cfg.low_frequency_override &&
        std::min(freq_a, freq_b) < cfg.low_frequency_override->f_low) {
        effective = cfg.low_frequency_override->combination;
        effective_k = cfg.low_frequency_override->at_least_k;
        rule_prefix = "low_frequency_";
    }

    switch (effective) {
        case Combination::All:
            v.redundant = satisfied == applicable;
            v.rule = rule_prefix + "all";
            break;
        case Combination::Any:
            v.redundant = satisfied >= 1;
            v.rule = rule_prefix + "any";
            break;
        case Combination::AtLeast:
            v.redundant = satisfied >= effective_k;
            v.rule = rule_prefix + "at_least_" + std::to_string(effective_k);
            break;
    }
    return v;
}

namespace detail {

/// Minimal union-find over label indices for transitive grouping.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

} // namespace detail

/// Run the full pipeline: build the enabled score matrices, judge every
/// unordered label pair, and assemble the report. Scores are computed in
/// parallel; everything order-sensitive is sequential, so the report is
/// identical at any thread count.
inline DetectionReport detect(const EventLog& log, const DetectorConfig& cfg,
                              const SemanticProvider* provider = nullptr,
                              unsigned threads = 1) {
    cfg.validate();
    if (log.trace_count() == 0) throw Error("detect: empty log");
    if (cfg.theta_s && provider == nullptr)
        throw ConfigError(
            "detector: theta_s is set but no semantic provider was supplied");

    std::optional<SimilarityMatrix> control_flow;
    std::optional<SimilarityMatrix> data_value;
    std::optional<SimilarityMatrix> semantic;
    if (cfg.theta_c)
        control_flow = control_flow_matrix(log, cfg.theta_ld,
                                           cfg.control_flow_weights, threads);
    if (cfg.theta_d)
        data_value = data_value_matrix(log, cfg.theta_a, cfg.trim,
                                       cfg.attribute_overrides, threads);
    if (cfg.theta_s) semantic = semantic_matrix(log, *provider, threads);

    DetectionReport report;
    report.config = cfg;
    if (provider && cfg.theta_s) report.semantic_provider = provider->name();
    report.log = fingerprint_of(log);

    const auto& labels = log.activities(); // sorted, so pairs come out
                                           // lexicographic
    const double total_events = static_cast<double>(log.event_count());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            const ActivityLabel& a = labels[i];
            const ActivityLabel& b = labels[j];
            PairScores scores;
            if (control_flow) scores.control_flow = control_flow->at(a, b);
            if (data_value) scores.data_value = data_value->at(a, b);
            if (semantic) scores.semantic = semantic->at(a, b);
            const double fa =
                static_cast<double>(log.frequency(a)) / total_events;
            const double fb =
                static_cast<double>(log.frequency(b)) / total_events;
            auto verdict = evaluate_pair(a, b, scores, fa, fb, cfg);
            if (verdict.redundant) report.redundant_pairs.emplace_back(a, b);
            report.pairs.push_back(std::move(verdict));
        }
    }

    if (cfg.group_transitively) {
        std::map<ActivityLabel, std::size_t> index;
        for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;
        detail::UnionFind uf(labels.size());
        for (const auto& [a, b] : report.redundant_pairs)
            uf.unite(index.at(a), index.at(b));
        std::map<std::size_t, std::vector<ActivityLabel>> components;
        for (std::size_t i = 0; i < labels.size(); ++i)
            components[uf.find(i)].push_back(labels[i]);
        std::vector<std::vector<ActivityLabel>> groups;
        for (auto& [root, members] : components)
            if (members.size() >= 2) groups.push_back(std::move(members));
        // Members arrive sorted (label order); sort the groups themselves
        // by their first member for a stable listing.
        std::sort(groups.begin(), groups.end());
        report.groups = std::move(groups);
    }
    return report;
}

} // namespace redlab
