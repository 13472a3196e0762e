#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"

namespace redlab {

/// Dissimilarity in [0,1] (0 = most similar), or empty when the perspective
/// has nothing to say about a pair (e.g. neither activity carries numbers).
using PerspectiveScore = std::optional<double>;

enum class MatrixKind { ControlFlow, DataValue, Semantic };

inline const char* to_string(MatrixKind kind) {
    switch (kind) {
        case MatrixKind::ControlFlow: return "control_flow";
        case MatrixKind::DataValue: return "data_value";
        case MatrixKind::Semantic: return "semantic";
    }
    return "?";
}

/// Symmetric pairwise score table over activity labels. The diagonal is
/// never stored; keys are canonicalized so (a,b) and (b,a) address the
/// same entry.
class SimilarityMatrix {
public:
    using Key = std::pair<ActivityLabel, ActivityLabel>;

    explicit SimilarityMatrix(MatrixKind kind) : kind_(kind) {}

    MatrixKind kind() const { return kind_; }

    void set(const ActivityLabel& a, const ActivityLabel& b,
             PerspectiveScore score) {
        if (a == b)
            throw Error("similarity matrix: diagonal entry for '" + a + "'");
        if (score && (*score < 0.0 || *score > 1.0))
            throw Error("similarity matrix: score out of [0,1]");
        entries_[ordered(a, b)] = score;
    }

    /// Score for a stored pair; throws on pairs never computed.
    PerspectiveScore at(const ActivityLabel& a, const ActivityLabel& b) const {
        const auto it = entries_.find(ordered(a, b));
        if (it == entries_.end())
            throw LookupError("similarity matrix: no entry (" + a + ", " + b +
                              ")");
        return it->second;
    }

    bool contains(const ActivityLabel& a, const ActivityLabel& b) const {
        return entries_.count(ordered(a, b)) > 0;
    }

    /// Canonically ordered (lexicographic key) view of all entries.
    const std::map<Key, PerspectiveScore>& entries() const { return entries_; }

    std::size_t size() const { return entries_.size(); }

private:
    static Key ordered(const ActivityLabel& a, const ActivityLabel& b) {
        return a < b ? Key{a, b} : Key{b, a};
    }

    MatrixKind kind_;
    std::map<Key, PerspectiveScore> entries_;
};

/// CSV dump (`label_a,label_b,score`); NotApplicable renders as an empty
/// score field.
inline std::string matrix_to_csv(const SimilarityMatrix& m) {
    std::ostringstream out;
    out << "label_a,label_b,score\n";
    const auto quote = [](const std::string& s) {
        bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
        if (!needs) return s;
        std::string q = "\"";
        for (const char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    char buf[64];
    for (const auto& [key, score] : m.entries()) {
        out << quote(key.first) << ',' << quote(key.second) << ',';
        if (score) {
            std::snprintf(buf, sizeof buf, "%.9f", *score);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace redlab
