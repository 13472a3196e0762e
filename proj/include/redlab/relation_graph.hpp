#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"

namespace redlab {

enum class GraphKind { Directly, Indirectly };

using Arc = std::pair<ActivityLabel, ActivityLabel>;

/// Weighted digraph over activity labels. Nodes are the full activity set
/// of the source log, so labels without relations still appear; arcs carry
/// positive occurrence counts. Immutable once built.
class RelationGraph {
public:
    static RelationGraph make(GraphKind kind, std::set<ActivityLabel> nodes,
                              std::map<Arc, std::size_t> arcs) {
        for (const auto& [arc, count] : arcs) {
            if (!nodes.count(arc.first) || !nodes.count(arc.second))
                throw Error("relation graph: arc endpoint '" +
                            (nodes.count(arc.first) ? arc.second : arc.first) +
                            "' is not a node");
            if (count == 0)
                throw Error("relation graph: zero-count arc (" + arc.first +
                            ", " + arc.second + ")");
        }
        RelationGraph g;
        g.kind_ = kind;
        g.nodes_ = std::move(nodes);
        g.arcs_ = std::move(arcs);
        for (const auto& [arc, count] : g.arcs_) {
            g.out_[arc.first].emplace_back(arc.second, count);
            g.in_[arc.second].emplace_back(arc.first, count);
        }
        return g;
    }

    GraphKind kind() const { return kind_; }
    const std::set<ActivityLabel>& nodes() const { return nodes_; }
    const std::map<Arc, std::size_t>& arcs() const { return arcs_; }

    std::size_t arc_count(const ActivityLabel& a,
                          const ActivityLabel& b) const {
        const auto it = arcs_.find({a, b});
        return it == arcs_.end() ? 0 : it->second;
    }

    /// Successors of `a` with counts, sorted by label.
    const std::vector<std::pair<ActivityLabel, std::size_t>>& outgoing(
        const ActivityLabel& a) const {
        require_node(a);
        const auto it = out_.find(a);
        return it == out_.end() ? kEmpty : it->second;
    }

    /// Predecessors of `a` with counts, sorted by label.
    const std::vector<std::pair<ActivityLabel, std::size_t>>& incoming(
        const ActivityLabel& a) const {
        require_node(a);
        const auto it = in_.find(a);
        return it == in_.end() ? kEmpty : it->second;
    }

private:
    void require_node(const ActivityLabel& a) const {
        if (!nodes_.count(a))
            throw LookupError("relation graph: unknown activity '" + a + "'");
    }

    inline static const std::vector<std::pair<ActivityLabel, std::size_t>>
        kEmpty{};

    GraphKind kind_ = GraphKind::Directly;
    std::set<ActivityLabel> nodes_;
    std::map<Arc, std::size_t> arcs_;
    std::map<ActivityLabel, std::vector<std::pair<ActivityLabel, std::size_t>>>
        out_, in_;
};

/// Directly-follows graph: arc (a,b) counts adjacent event pairs with
/// labels a then b across all traces.
inline RelationGraph build_dfg(const EventLog& log) {
    if (log.trace_count() == 0) throw Error("build_dfg: empty log");
    std::map<Arc, std::size_t> arcs;
    for (const auto& trace : log.traces())
        for (std::size_t i = 0; i + 1 < trace.events.size(); ++i)
            ++arcs[{trace.events[i].activity, trace.events[i + 1].activity}];
    return RelationGraph::make(
        GraphKind::Directly,
        {log.activities().begin(), log.activities().end()}, std::move(arcs));
}

namespace detail {

/// Trace-level counts behind the indirectly-follows relation: for each
/// ordered label pair, the number of traces where the first strictly
/// precedes the second; plus per-label trace occurrence counts.
struct PrecedenceCounts {
    std::map<Arc, std::size_t> precedes; // traces with a ... b (any gap)
    std::map<ActivityLabel, std::size_t> trace_occurrences;
};

inline PrecedenceCounts count_precedence(const EventLog& log) {
    PrecedenceCounts counts;
    for (const auto& trace : log.traces()) {
        std::set<ActivityLabel> seen_labels;
        std::set<Arc> seen_pairs;
        std::set<ActivityLabel> before; // labels at strictly earlier positions
        for (const auto& e : trace.events) {
            for (const auto& prior : before)
                seen_pairs.insert({prior, e.activity});
            seen_labels.insert(e.activity);
            before.insert(e.activity);
        }
        for (const auto& label : seen_labels)
            ++counts.trace_occurrences[label];
        for (const auto& pair : seen_pairs) ++counts.precedes[pair];
    }
    return counts;
}

inline double lds_from_counts(const PrecedenceCounts& counts,
                              const ActivityLabel& a, const ActivityLabel& b) {
    const auto it = counts.precedes.find({a, b});
    if (it == counts.precedes.end()) return 0.0;
    const double na =
        static_cast<double>(counts.trace_occurrences.at(a));
    const double nb =
        static_cast<double>(counts.trace_occurrences.at(b));
    return 2.0 * static_cast<double>(it->second) / (na + nb + 1.0);
}

} // namespace detail

/// Long-distance significance of a before b: 2·|a ≫ b| / (|a| + |b| + 1),
/// every count trace-level. Always in [0, 1).
inline double long_distance_significance(const ActivityLabel& a,
                                         const ActivityLabel& b,
                                         const EventLog& log) {
    if (!log.has_activity(a))
        throw LookupError("unknown activity '" + a + "'");
    if (!log.has_activity(b))
        throw LookupError("unknown activity '" + b + "'");
    return detail::lds_from_counts(detail::count_precedence(log), a, b);
}

/// Indirectly-follows graph: arc (a,b) present when a occurs strictly
/// before b in at least one trace and the pair's long-distance significance
/// reaches theta_ld; counts are trace-level.
inline RelationGraph build_ifg(const EventLog& log, double theta_ld) {
    if (log.trace_count() == 0) throw Error("build_ifg: empty log");
    if (theta_ld < 0.0 || theta_ld > 1.0)
        throw ConfigError("build_ifg: theta_ld must be in [0, 1]");
    const auto counts = detail::count_precedence(log);
    std::map<Arc, std::size_t> arcs;
    for (const auto& [pair, n] : counts.precedes)
        if (detail::lds_from_counts(counts, pair.first, pair.second) >=
            theta_ld)
            arcs[pair] = n;
    return RelationGraph::make(
        GraphKind::Indirectly,
        {log.activities().begin(), log.activities().end()}, std::move(arcs));
}

/// Graphviz rendering; isolated nodes are listed so the full activity set
/// stays visible.
inline std::string to_dot(const RelationGraph& g) {
    const auto quote = [](const ActivityLabel& label) {
        std::string out = "\"";
        for (const char c : label) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
        return out;
    };
    std::ostringstream out;
    out << "digraph "
        << (g.kind() == GraphKind::Directly ? "directly_follows"
                                            : "indirectly_follows")
        << " {\n";
    for (const auto& node : g.nodes()) out << "  " << quote(node) << ";\n";
    for (const auto& [arc, count] : g.arcs())
        out << "  " << quote(arc.first) << " -> " << quote(arc.second)
            << " [label=\"" << count << "\"];\n";
    out << "}\n";
    return out.str();
}

} // namespace redlab
