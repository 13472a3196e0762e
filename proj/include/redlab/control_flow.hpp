#pragma once

#include <cstddef>
#include <vector>

#include "redlab/emd.hpp"
#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"
#include "redlab/parallel.hpp"
#include "redlab/relation_graph.hpp"
#include "redlab/similarity.hpp"

namespace redlab {

enum class Direction { Outgoing, Incoming };

/// Neighbor distribution of one activity in one direction: clusters are the
/// neighbor labels, weights their arc-count fractions. Empty when the
/// activity has no arcs that way.
struct DirectionalSignature {
    ActivityLabel activity;
    Direction direction = Direction::Outgoing;
    Signature<ActivityLabel> signature;
};

inline DirectionalSignature directional_signature(const RelationGraph& g,
                                                  const ActivityLabel& a,
                                                  Direction dir) {
    const auto& neighbors =
        dir == Direction::Outgoing ? g.outgoing(a) : g.incoming(a);
    DirectionalSignature out{a, dir, {}};
    double total = 0.0;
    for (const auto& [label, count] : neighbors)
        total += static_cast<double>(count);
    for (const auto& [label, count] : neighbors) {
        out.signature.clusters.push_back(label);
        out.signature.weights.push_back(static_cast<double>(count) / total);
    }
    return out;
}

/// EMD between the two directional neighbor distributions under unit ground
/// distance. Activities with no context on either side are treated as
/// matching (0); a one-sided context is a full mismatch (1).
inline double directional_similarity(const RelationGraph& g,
                                     const ActivityLabel& a,
                                     const ActivityLabel& b, Direction dir) {
    if (a == b)
        throw Error("directional_similarity: compared '" + a +
                    "' with itself");
    const auto sa = directional_signature(g, a, dir);
    const auto sb = directional_signature(g, b, dir);
    if (sa.signature.empty() && sb.signature.empty()) return 0.0;
    if (sa.signature.empty() || sb.signature.empty()) return 1.0;
    return emd_unit_ground(sa.signature, sb.signature);
}

/// Mean of the outgoing and incoming similarities on one graph.
inline double follows_similarity(const RelationGraph& g,
                                 const ActivityLabel& a,
                                 const ActivityLabel& b) {
    return (directional_similarity(g, a, b, Direction::Outgoing) +
            directional_similarity(g, a, b, Direction::Incoming)) /
           2.0;
}

/// Relative importance of the four directional comparisons; uniform unless
/// configured otherwise.
struct FourWayWeights {
    double directly_out = 1.0;
    double directly_in = 1.0;
    double indirectly_out = 1.0;
    double indirectly_in = 1.0;
};

/// All-pairs control-flow dissimilarity: for each unordered pair, the
/// weighted mean over the applicable directional comparisons on the DFG and
/// the theta_ld-filtered IFG. A direction where neither activity has any
/// context says nothing about the pair and is left out of the mean (so an
/// empty IFG reduces the matrix to the directly-follows average); a pair
/// with no context anywhere scores 0.
inline SimilarityMatrix control_flow_matrix(const EventLog& log,
                                            double theta_ld,
                                            const FourWayWeights& weights = {},
                                            unsigned threads = 1) {
    if (log.trace_count() == 0)
        throw Error("control_flow_matrix: empty log");
    for (const double w : {weights.directly_out, weights.directly_in,
                           weights.indirectly_out, weights.indirectly_in})
        if (w < 0.0)
            throw ConfigError("control_flow_matrix: negative weight");
    if (weights.directly_out + weights.directly_in + weights.indirectly_out +
            weights.indirectly_in <=
        0.0)
        throw ConfigError("control_flow_matrix: all weights zero");

    const RelationGraph dfg = build_dfg(log);
    const RelationGraph ifg = build_ifg(log, theta_ld);
    const auto& labels = log.activities();

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            pairs.emplace_back(i, j);

    std::vector<double> scores(pairs.size(), 0.0);
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        const ActivityLabel& a = labels[pairs[p].first];
        const ActivityLabel& b = labels[pairs[p].second];
        double weighted_sum = 0.0;
        double weight_total = 0.0;
        const auto consider = [&](const RelationGraph& g, Direction dir,
                                  double weight) {
            const auto sa = directional_signature(g, a, dir);
            const auto sb = directional_signature(g, b, dir);
            if (sa.signature.empty() && sb.signature.empty())
                return; // no context on either side: not evidence
            double value;
            if (sa.signature.empty() || sb.signature.empty())
                value = 1.0;
            else
                value = emd_unit_ground(sa.signature, sb.signature);
            weighted_sum += weight * value;
            weight_total += weight;
        };
        consider(dfg, Direction::Outgoing, weights.directly_out);
        consider(dfg, Direction::Incoming, weights.directly_in);
        consider(ifg, Direction::Outgoing, weights.indirectly_out);
        consider(ifg, Direction::Incoming, weights.indirectly_in);
        scores[p] = weight_total > 0.0 ? weighted_sum / weight_total : 0.0;
    });

    SimilarityMatrix matrix(MatrixKind::ControlFlow);
    for (std::size_t p = 0; p < pairs.size(); ++p)
        matrix.set(labels[pairs[p].first], labels[pairs[p].second], scores[p]);
    return matrix;
}

} // namespace redlab
