#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "redlab/emd.hpp"
#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"
#include "redlab/parallel.hpp"
#include "redlab/similarity.hpp"

namespace redlab {

struct PercentileVector {
    ActivityLabel activity;
    double q1 = 0.0;
    double q3 = 0.0;
    std::size_t n = 0;
};

struct ActivityCluster {
    std::set<ActivityLabel> members;
};

struct HistogramPair {
    std::size_t bin_count = 0;
    double shared_min = 0.0;
    double shared_max = 0.0;
    std::vector<double> boundaries; // left edge of each bin (cluster values)
    std::vector<double> weights_a;  // fractions, sum 1
    std::vector<double> weights_b;
};

/// The numeric dataset analyzed for one activity: its values (one attribute,
/// either the given one or the activity's primary), sorted, with the top and
/// bottom trim fraction removed. Empty result means the data-value
/// perspective has nothing to say about this activity.
inline std::optional<std::vector<double>> extract_trimmed(
    const EventLog& log, const ActivityLabel& a, double trim,
    const std::optional<std::string>& attribute = std::nullopt) {
    if (trim < 0.0 || trim >= 0.5)
        throw ConfigError("extract_trimmed: trim must be in [0, 0.5)");

    std::vector<double> values;
    if (attribute) {
        values = log.numeric_series(a, *attribute);
    } else {
        const auto primary = log.primary_numeric_attribute(a);
        if (!primary) return std::nullopt;
        values = log.numeric_series(a, *primary);
    }
    if (values.empty()) return std::nullopt;

    std::sort(values.begin(), values.end());
    const auto cut =
        static_cast<std::size_t>(trim * static_cast<double>(values.size()));
    values.erase(values.end() - static_cast<std::ptrdiff_t>(cut), values.end());
    values.erase(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(cut));
    if (values.empty()) return std::nullopt;
    return values;
}

/// 25th/75th percentiles by linear interpolation at h = (n-1)p.
inline PercentileVector percentile_vector(const ActivityLabel& activity,
                                          const std::vector<double>& sorted) {
    if (sorted.empty()) throw Error("percentile_vector: empty dataset");
    const auto at = [&](double p) {
        const double h = static_cast<double>(sorted.size() - 1) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = static_cast<std::size_t>(std::ceil(h));
        return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
    };
    return {activity, at(0.25), at(0.75), sorted.size()};
}

/// Agglomerative average-linkage clustering of (q1, q3) points under
/// Euclidean distance: keep merging the closest pair of clusters while the
/// average inter-cluster distance stays below theta_a. Ties merge the
/// lexicographically smallest pair of cluster leaders, so the partition is
/// deterministic.
inline std::vector<ActivityCluster> cluster_activities(
    const std::vector<PercentileVector>& vectors, double theta_a) {
    if (theta_a <= 0.0)
        throw ConfigError("cluster_activities: theta_a must be positive");
    {
        std::set<ActivityLabel> seen;
        for (const auto& v : vectors)
            if (!seen.insert(v.activity).second)
                throw Error("cluster_activities: duplicate activity '" +
                            v.activity + "'");
    }

    struct Cluster {
        std::set<ActivityLabel> members;
        std::vector<std::size_t> points; // indexes into `vectors`
    };
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < vectors.size(); ++i)
        clusters.push_back({{vectors[i].activity}, {i}});
    std::sort(clusters.begin(), clusters.end(),
              [](const Cluster& a, const Cluster& b) {
                  return *a.members.begin() < *b.members.begin();
              });

    const auto point_distance = [&](std::size_t i, std::size_t j) {
        const double dq1 = vectors[i].q1 - vectors[j].q1;
        const double dq3 = vectors[i].q3 - vectors[j].q3;
        return std::sqrt(dq1 * dq1 + dq3 * dq3);
    };
    const auto linkage = [&](const Cluster& x, const Cluster& y) {
        double sum = 0.0;
        for (const std::size_t i : x.points)
            for (const std::size_t j : y.points) sum += point_distance(i, j);
        return sum / static_cast<double>(x.points.size() * y.points.size());
    };

    while (clusters.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double d = linkage(clusters[i], clusters[j]);
                // Leaders are the smallest member labels; clusters are kept
                // sorted by leader, so (i, j) order is already lexicographic
                // and strict < keeps the first (smallest) minimizer.
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        if (!(best < theta_a)) break;
        clusters[bi].members.insert(clusters[bj].members.begin(),
                                    clusters[bj].members.end());
        clusters[bi].points.insert(clusters[bi].points.end(),
                                   clusters[bj].points.begin(),
                                   clusters[bj].points.end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
        std::sort(clusters.begin(), clusters.end(),
                  [](const Cluster& a, const Cluster& b) {
                      return *a.members.begin() < *b.members.begin();
                  });
    }

    std::vector<ActivityCluster> out;
    out.reserve(clusters.size());
    for (auto& c : clusters) out.push_back({std::move(c.members)});
    return out;
}

/// Histograms over the shared range with a common bin count
/// k = ceil(log2(min(|a|, |b|))) + 1 (Sturges on the smaller sample).
/// Each bin's left boundary stands in as its cluster value. A zero-wide
/// shared range collapses to a single bin.
inline HistogramPair histogram_pair(const std::vector<double>& va,
                                    const std::vector<double>& vb) {
    if (va.empty() || vb.empty())
        throw Error("histogram_pair: empty dataset");

    HistogramPair h;
    h.shared_min = std::min(*std::min_element(va.begin(), va.end()),
                            *std::min_element(vb.begin(), vb.end()));
    h.shared_max = std::max(*std::max_element(va.begin(), va.end()),
                            *std::max_element(vb.begin(), vb.end()));

    // Sturges on the smaller sample: ceil(log2 n) + 1, computed in integer
    // arithmetic (ceil(log2 n) = bit_width(n - 1)).
    const std::size_t smaller = std::min(va.size(), vb.size());
    h.bin_count = static_cast<std::size_t>(std::bit_width(smaller - 1)) + 1;
    if (h.shared_max == h.shared_min) h.bin_count = 1;

    const double width =
        (h.shared_max - h.shared_min) / static_cast<double>(h.bin_count);
    for (std::size_t i = 0; i < h.bin_count; ++i)
        h.boundaries.push_back(h.shared_min + static_cast<double>(i) * width);

    const auto fill = [&](const std::vector<double>& values,
                          std::vector<double>& weights) {
        weights.assign(h.bin_count, 0.0);
        for (const double v : values) {
            std::size_t bin = 0;
            if (width > 0.0)
                bin = std::min(
                    h.bin_count - 1,
                    static_cast<std::size_t>((v - h.shared_min) / width));
            weights[bin] += 1.0;
        }
        for (double& w : weights) w /= static_cast<double>(values.size());
    };
    fill(va, h.weights_a);
    fill(vb, h.weights_b);
    return h;
}

namespace detail {

inline double histogram_distance(const HistogramPair& h) {
    const double range = h.shared_max - h.shared_min;
    if (range <= 0.0) return 0.0; // all values identical: nothing to move
    const Signature<double> a{h.boundaries, h.weights_a};
    const Signature<double> b{h.boundaries, h.weights_b};
    return std::clamp(emd_1d(a, b) / range, 0.0, 1.0);
}

} // namespace detail

/// All-pairs data-value dissimilarity. Activities first cluster on their
/// (q1, q3) percentile vectors; pairs inside one cluster compare full
/// histograms via EMD normalized by the shared range, pairs split across
/// clusters score 1, pairs where exactly one side has numbers score 1, and
/// pairs where neither side has numbers are NotApplicable.
inline SimilarityMatrix data_value_matrix(
    const EventLog& log, double theta_a, double trim = 0.0,
    const std::map<ActivityLabel, std::string>& attribute_overrides = {},
    unsigned threads = 1) {
    if (log.trace_count() == 0) throw Error("data_value_matrix: empty log");

    const auto& labels = log.activities();
    std::map<ActivityLabel, std::vector<double>> datasets;
    std::vector<PercentileVector> vectors;
    for (const auto& a : labels) {
        std::optional<std::string> attribute;
        const auto it = attribute_overrides.find(a);
        if (it != attribute_overrides.end()) attribute = it->second;
        auto values = extract_trimmed(log, a, trim, attribute);
        if (!values) continue;
        vectors.push_back(percentile_vector(a, *values));
        datasets[a] = std::move(*values);
    }

    std::map<ActivityLabel, std::size_t> cluster_of;
    const auto clusters = cluster_activities(vectors, theta_a);
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (const auto& member : clusters[c].members)
            cluster_of[member] = c;

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            pairs.emplace_back(i, j);

    std::vector<PerspectiveScore> scores(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        const ActivityLabel& a = labels[pairs[p].first];
        const ActivityLabel& b = labels[pairs[p].second];
        const auto da = datasets.find(a);
        const auto db = datasets.find(b);
        const bool has_a = da != datasets.end();
        const bool has_b = db != datasets.end();
        if (!has_a && !has_b) {
            scores[p] = std::nullopt; // nothing to compare on either side
        } else if (!has_a || !has_b) {
            scores[p] = 1.0;
        } else if (cluster_of.at(a) != cluster_of.at(b)) {
            scores[p] = 1.0;
        } else {
            scores[p] =
                detail::histogram_distance(histogram_pair(da->second,
                                                          db->second));
        }
    });

    SimilarityMatrix matrix(MatrixKind::DataValue);
    for (std::size_t p = 0; p < pairs.size(); ++p)
        matrix.set(labels[pairs[p].first], labels[pairs[p].second], scores[p]);
    return matrix;
}

} // namespace redlab
