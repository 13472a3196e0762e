#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"
#include "redlab/parallel.hpp"
#include "redlab/similarity.hpp"

namespace redlab {

/// Lowercased word tokens: labels split on whitespace, punctuation,
/// underscores, and camelCase boundaries ("BloodPressure" -> blood,
/// pressure; "Arterial BP [Systolic]" -> arterial, bp, systolic). Uppercase
/// runs stay together until a lowercase letter starts a new word (XMLParser
/// -> xml, parser).
inline std::vector<std::string> tokenize(const std::string& label) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    const auto lower = [](char c) {
        return static_cast<char>(
            std::tolower(static_cast<unsigned char>(c)));
    };
    for (std::size_t i = 0; i < label.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(label[i]);
        if (!std::isalnum(c) && c < 0x80) { // separators; keep UTF-8 bytes
            flush();
            continue;
        }
        if (std::isupper(c)) {
            const bool after_lower =
                i > 0 && std::islower(static_cast<unsigned char>(label[i - 1]));
            const bool run_then_lower =
                i > 0 &&
                std::isupper(static_cast<unsigned char>(label[i - 1])) &&
                i + 1 < label.size() &&
                std::islower(static_cast<unsigned char>(label[i + 1]));
            if (after_lower || run_then_lower) flush();
        }
        current += lower(static_cast<char>(c));
    }
    flush();
    return tokens;
}

namespace detail {

/// Lowercase with every non-alphanumeric byte removed, so spelling variants
/// like "BloodPressure" / "blood_pressure" / "blood pressure" coincide.
inline std::string normalize_label(const std::string& label) {
    std::string out;
    for (const char c : label) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80)
            out += static_cast<char>(std::tolower(u));
    }
    return out;
}

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), current(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        current[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t substitution =
                prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            current[j] =
                std::min({prev[j] + 1, current[j - 1] + 1, substitution});
        }
        std::swap(prev, current);
    }
    return prev[b.size()];
}

} // namespace detail

/// Normalized edit distance flipped into a similarity: 1 when the labels
/// coincide after normalization, 0 when every position differs.
inline double edit_similarity(const std::string& a, const std::string& b) {
    const std::string na = detail::normalize_label(a);
    const std::string nb = detail::normalize_label(b);
    const std::size_t longest = std::max(na.size(), nb.size());
    if (longest == 0) return 1.0; // both empty after normalization
    return 1.0 -
           static_cast<double>(detail::levenshtein(na, nb)) /
               static_cast<double>(longest);
}

/// Pretrained word vectors, one `token v1 v2 ... vd` line per token (an
/// optional `d=<dim>` header pins the dimension; otherwise the first row
/// sets it). Tokens are lowercased; every stored vector must match the
/// dimension and have a non-zero norm.
class VectorTable {
public:
    static VectorTable load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open '" + path + "'");
        VectorTable table;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line_no == 1 && line.rfind("d=", 0) == 0) {
                table.dim_ = std::strtoul(line.c_str() + 2, nullptr, 10);
                if (table.dim_ == 0)
                    throw ParseError(path + ":1: bad dimension header");
                continue;
            }
            std::istringstream row(line);
            std::string token;
            row >> token;
            std::transform(token.begin(), token.end(), token.begin(),
                           [](unsigned char c) {
                               return static_cast<char>(std::tolower(c));
                           });
            std::vector<double> vec;
            double v;
            while (row >> v) vec.push_back(v);
            if (!row.eof())
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": non-numeric vector component");
            if (vec.empty())
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": token without vector");
            if (table.dim_ == 0) table.dim_ = vec.size();
            if (vec.size() != table.dim_)
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": expected " + std::to_string(table.dim_) +
                                 " components, got " +
                                 std::to_string(vec.size()));
            double norm2 = 0.0;
            for (const double x : vec) norm2 += x * x;
            if (norm2 == 0.0)
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": zero vector for '" + token + "'");
            table.vectors_[token] = std::move(vec);
        }
        if (table.vectors_.empty())
            throw ParseError(path + ": no vectors loaded");
        return table;
    }

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }

    const std::vector<double>* find(const std::string& token) const {
        const auto it = vectors_.find(token);
        return it == vectors_.end() ? nullptr : &it->second;
    }

private:
    std::size_t dim_ = 0;
    std::map<std::string, std::vector<double>> vectors_;
};

/// Cosine of the mean in-table token vectors, clipped to [0,1] (an opposed
/// direction is merely "not similar"). Labels whose tokens are all unknown
/// fall back to edit similarity.
inline double vector_similarity(const std::string& a, const std::string& b,
                                const VectorTable& table) {
    const auto mean_vector = [&](const std::string& label,
                                 std::vector<double>& out) {
        out.assign(table.dimension(), 0.0);
        std::size_t hits = 0;
        for (const auto& token : tokenize(label)) {
            const auto* vec = table.find(token);
            if (!vec) continue;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*vec)[i];
            ++hits;
        }
        if (hits > 0)
            for (double& x : out) x /= static_cast<double>(hits);
        return hits;
    };

    std::vector<double> va, vb;
    if (mean_vector(a, va) == 0 || mean_vector(b, vb) == 0)
        return edit_similarity(a, b);

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        dot += va[i] * vb[i];
        na += va[i] * va[i];
        nb += vb[i] * vb[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0; // tokens cancelled out entirely
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

/// Pluggable similarity source: deterministic, symmetric, 1 on identical
/// labels, range [0,1].
class SemanticProvider {
public:
    virtual ~SemanticProvider() = default;
    virtual double similarity(const std::string& a,
                              const std::string& b) const = 0;
    virtual std::string name() const = 0;
};

class EditProvider final : public SemanticProvider {
public:
    double similarity(const std::string& a,
                      const std::string& b) const override {
        return edit_similarity(a, b);
    }
    std::string name() const override { return "edit"; }
};

class VectorProvider final : public SemanticProvider {
public:
    explicit VectorProvider(VectorTable table) : table_(std::move(table)) {}

    double similarity(const std::string& a,
                      const std::string& b) const override {
        return vector_similarity(a, b, table_);
    }
    std::string name() const override { return "vectors"; }

    const VectorTable& table() const { return table_; }

private:
    VectorTable table_;
};

/// All-pairs semantic dissimilarity: 1 minus the provider's similarity.
inline SimilarityMatrix semantic_matrix(const EventLog& log,
                                        const SemanticProvider& provider,
                                        unsigned threads = 1) {
    if (log.trace_count() == 0) throw Error("semantic_matrix: empty log");
    const auto& labels = log.activities();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            pairs.emplace_back(i, j);

    std::vector<double> scores(pairs.size(), 0.0);
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        const double s =
            provider.similarity(labels[pairs[p].first], labels[pairs[p].second]);
        if (s < 0.0 || s > 1.0 || !std::isfinite(s))
            throw Error("semantic provider '" + provider.name() +
                        "' returned a similarity outside [0,1]");
        scores[p] = 1.0 - s;
    });

    SimilarityMatrix matrix(MatrixKind::Semantic);
    for (std::size_t p = 0; p < pairs.size(); ++p)
        matrix.set(labels[pairs[p].first], labels[pairs[p].second], scores[p]);
    return matrix;
}

} // namespace redlab
