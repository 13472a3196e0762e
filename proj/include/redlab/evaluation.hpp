#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "redlab/csv.hpp"
#include "redlab/detector.hpp"
#include "redlab/errors.hpp"
#include "redlab/event_log.hpp"
#include "redlab/rng.hpp"

namespace redlab {

/// One synthetic-log recipe: rename rename_pct% of the events of
/// select_pct% of the activity labels, drawn with this seed.
struct PerturbationSetting {
    double select_pct = 0.0; // x, in (0, 100]
    double rename_pct = 0.0; // y, in (0, 100]
    std::uint64_t seed = 0;
    unsigned replicate = 0;

    void validate() const {
        const auto check = [](const char* name, double v) {
            if (!(v > 0.0) || v > 100.0)
                throw ConfigError(std::string("perturb: ") + name +
                                  " must be in (0, 100]");
        };
        check("select_pct", select_pct);
        check("rename_pct", rename_pct);
    }
};

/// The redundant pairs a detection run is judged against: the pairs this
/// tool planted plus any pairs the user declared as known duplicates of the
/// original log. All pairs are kept in canonical (min, max) order.
class GroundTruth {
public:
    using Pair = std::pair<ActivityLabel, ActivityLabel>;

    void add_synthetic(const ActivityLabel& a, const ActivityLabel& b) {
        synthetic_.insert(canonical(a, b));
    }
    void add_known(const ActivityLabel& a, const ActivityLabel& b) {
        known_.insert(canonical(a, b));
    }

    const std::set<Pair>& synthetic() const { return synthetic_; }
    const std::set<Pair>& known() const { return known_; }

    /// Union of planted and declared pairs.
    std::set<Pair> all() const {
        std::set<Pair> out = synthetic_;
        out.insert(known_.begin(), known_.end());
        return out;
    }

    bool contains(const ActivityLabel& a, const ActivityLabel& b) const {
        const auto p = canonical(a, b);
        return synthetic_.count(p) > 0 || known_.count(p) > 0;
    }

    void merge(const GroundTruth& other) {
        synthetic_.insert(other.synthetic_.begin(), other.synthetic_.end());
        known_.insert(other.known_.begin(), other.known_.end());
    }

    /// `label_a,label_b` rows; pairs come out in canonical sorted order.
    std::string to_csv() const {
        std::ostringstream out;
        out << "label_a,label_b\n";
        for (const auto& [a, b] : all())
            out << detail::csv_escape(a, ',') << ',' << detail::csv_escape(b, ',') << '\n';
        return out.str();
    }

    /// Reads pairs written by to_csv (or by hand). Every loaded pair counts
    /// as user-declared knowledge.
    static GroundTruth from_csv(const std::string& path) {
        const auto records = detail::read_csv(path, ',');
        if (records.empty())
            throw ParseError(path + ": empty ground-truth file");
        const auto& header = records.front().fields;
        if (header.size() < 2 || header[0] != "label_a" ||
            header[1] != "label_b")
            throw ParseError(path + ": expected header 'label_a,label_b'");
        GroundTruth truth;
        for (std::size_t i = 1; i < records.size(); ++i) {
            const auto& r = records[i];
            if (r.fields.size() != 2)
                throw ParseError(path + ":" + std::to_string(r.line) +
                                 ": expected 2 fields, got " +
                                 std::to_string(r.fields.size()));
            if (r.fields[0] == r.fields[1])
                throw ParseError(path + ":" + std::to_string(r.line) +
                                 ": a label cannot pair with itself");
            truth.add_known(r.fields[0], r.fields[1]);
        }
        return truth;
    }

private:
    static Pair canonical(const ActivityLabel& a, const ActivityLabel& b) {
        if (a == b)
            throw Error("ground truth: pair (" + a + ", " + a +
                        ") is degenerate");
        return a < b ? Pair{a, b} : Pair{b, a};
    }

    std::set<Pair> synthetic_;
    std::set<Pair> known_;
};

struct PerturbResult {
    EventLog log;
    GroundTruth truth;
};

namespace detail {

/// ⌈pct% of n⌉ with a guard against the product landing one float ULP
/// above an integer.
inline std::size_t ceil_pct(double pct, std::size_t n) {
    const double raw = pct * static_cast<double>(n) / 100.0;
    const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::min(k, n);
}

/// A name not yet used by any activity in `taken`: label + "_syn", with a
/// numeric tail when the plain suffix is itself taken.
inline ActivityLabel fresh_label(const ActivityLabel& base,
                                 const std::set<ActivityLabel>& taken) {
    ActivityLabel candidate = base + "_syn";
    for (int k = 2; taken.count(candidate) > 0; ++k)
        candidate = base + "_syn" + std::to_string(k);
    return candidate;
}

} // namespace detail

/// Builds the synthetic log H_{x,y}: selects ⌈x%·|activities|⌉ labels
/// uniformly without replacement, renames ⌈y%·count⌉ uniformly chosen
/// events of each to a fresh variant label, and records the planted pairs.
/// Everything else — timestamps, numeric values, trace membership, event
/// order — is carried over untouched.
inline PerturbResult perturb(const EventLog& log,
                             const PerturbationSetting& setting) {
    setting.validate();
    if (log.trace_count() == 0) throw Error("perturb: empty log");

    const auto& labels = log.activities();
    const std::size_t want = detail::ceil_pct(setting.select_pct,
                                              labels.size());

    // Draw labels one at a time so a label whose rename quota comes out
    // empty can be put aside and replaced by a fresh draw.
    Rng rng(setting.seed);
    std::vector<std::size_t> pool(labels.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    std::vector<ActivityLabel> chosen;
    while (chosen.size() < want && !pool.empty()) {
        const std::size_t j = rng.below(pool.size());
        const ActivityLabel& label = labels[pool[j]];
        pool[j] = pool.back();
        pool.pop_back();
        if (detail::ceil_pct(setting.rename_pct, log.frequency(label)) == 0)
            continue; // nothing of this label would change: re-draw
        chosen.push_back(label);
    }
    if (chosen.size() < want)
        throw ConfigError(
            "perturb: not enough activities with renameable events (wanted " +
            std::to_string(want) + ", found " +
            std::to_string(chosen.size()) + ")");

    std::set<ActivityLabel> taken(labels.begin(), labels.end());
    auto traces = log.traces(); // deep copy to rewrite labels in place

    PerturbResult result;
    for (const auto& label : chosen) {
        // Positions of this label's events, in stable log order.
        std::vector<std::pair<std::size_t, std::size_t>> positions;
        for (std::size_t t = 0; t < traces.size(); ++t)
            for (std::size_t e = 0; e < traces[t].events.size(); ++e)
                if (log.traces()[t].events[e].activity == label)
                    positions.emplace_back(t, e);

        const std::size_t quota =
            detail::ceil_pct(setting.rename_pct, positions.size());
        const ActivityLabel variant = detail::fresh_label(label, taken);
        taken.insert(variant);
        for (const std::size_t p :
             rng.sample_indices(positions.size(), quota)) {
            const auto [t, e] = positions[p];
            traces[t].events[e].activity = variant;
        }
        result.truth.add_synthetic(label, variant);
    }

    result.log = EventLog::from_traces(std::move(traces));
    return result;
}

struct Metrics {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

/// Precision/recall/f-score of a detection report against the ground
/// truth. Degenerate ratios (empty detection or empty truth) score 0, and
/// so does the f-score when precision + recall is 0.
inline Metrics score(const DetectionReport& report, const GroundTruth& truth) {
    const auto expected = truth.all();
    std::set<GroundTruth::Pair> detected; // orientation-normalized
    for (const auto& [a, b] : report.redundant_pairs)
        detected.insert(a < b ? GroundTruth::Pair{a, b}
                              : GroundTruth::Pair{b, a});
    Metrics m;
    for (const auto& pair : detected) {
        if (expected.count(pair) > 0)
            ++m.tp;
        else
            ++m.fp;
    }
    for (const auto& pair : expected)
        if (detected.count(pair) == 0) ++m.fn;
    m.precision =
        m.tp + m.fp > 0
            ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp)
            : 0.0;
    m.recall =
        m.tp + m.fn > 0
            ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
            : 0.0;
    // 2PR/(P+R) simplified to counts: one rounding instead of three, and
    // still 0 whenever precision + recall is 0.
    const std::size_t denom = 2 * m.tp + m.fp + m.fn;
    m.f_score = denom > 0 ? 2.0 * static_cast<double>(m.tp) /
                                static_cast<double>(denom)
                          : 0.0;
    return m;
}

struct GridRow {
    double x = 0.0;
    double y = 0.0;
    unsigned replicate = 0; // 1-based, matching the emitted CSV
    std::uint64_t seed = 0;
    Metrics metrics;
};

struct GridSummary {
    double x = 0.0;
    double y = 0.0;
    unsigned replicates = 0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f_score = 0.0;
    double stddev_f_score = 0.0; // population stddev; 0 for a single run
};

struct GridResult {
    std::vector<GridRow> rows;        // fixed (x, y, replicate) order
    std::vector<GridSummary> summary; // fixed (x, y) order
};

/// The full H_{x,y} protocol: for every (x, y) cell, `replicates` seeded
/// perturbations of the base log, each detected and scored against its own
/// planted pairs plus the user-declared `known` pairs. Per-run seeds are
/// derived from the master seed and the run's grid position, so any single
/// run can be reproduced in isolation with `perturb`.
inline GridResult run_grid(const EventLog& log, const std::vector<double>& xs,
                           const std::vector<double>& ys, unsigned replicates,
                           const DetectorConfig& cfg,
                           const SemanticProvider* provider,
                           std::uint64_t master_seed,
                           const GroundTruth& known = {},
                           unsigned threads = 1) {
    cfg.validate();
    if (xs.empty() || ys.empty() || replicates == 0)
        throw ConfigError("run_grid: empty grid");

    GridResult result;
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        for (std::size_t yi = 0; yi < ys.size(); ++yi) {
            double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0, sum_f2 = 0.0;
            for (unsigned rep = 1; rep <= replicates; ++rep) {
                PerturbationSetting setting;
                setting.select_pct = xs[xi];
                setting.rename_pct = ys[yi];
                setting.seed = derive_seed(master_seed, xi, yi, rep);
                setting.replicate = rep;

                auto perturbed = perturb(log, setting);
                perturbed.truth.merge(known);
                const auto report =
                    detect(perturbed.log, cfg, provider, threads);
                const auto metrics = score(report, perturbed.truth);

                result.rows.push_back({xs[xi], ys[yi], rep, setting.seed,
                                       metrics});
                sum_p += metrics.precision;
                sum_r += metrics.recall;
                sum_f += metrics.f_score;
                sum_f2 += metrics.f_score * metrics.f_score;
            }
            const double n = static_cast<double>(replicates);
            GridSummary s;
            s.x = xs[xi];
            s.y = ys[yi];
            s.replicates = replicates;
            s.mean_precision = sum_p / n;
            s.mean_recall = sum_r / n;
            s.mean_f_score = sum_f / n;
            const double variance =
                std::max(0.0, sum_f2 / n - s.mean_f_score * s.mean_f_score);
            s.stddev_f_score = std::sqrt(variance);
            result.summary.push_back(s);
        }
    }
    return result;
}

inline std::string grid_rows_to_csv(const std::vector<GridRow>& rows) {
    std::ostringstream out;
    out << "x,y,replicate,seed,tp,fp,fn,precision,recall,f_score\n";
    for (const auto& r : rows) {
        out << detail::format_double(r.x) << ',' << detail::format_double(r.y) << ','
            << r.replicate << ',' << r.seed << ',' << r.metrics.tp << ','
            << r.metrics.fp << ',' << r.metrics.fn << ','
            << detail::format_double(r.metrics.precision) << ','
            << detail::format_double(r.metrics.recall) << ','
            << detail::format_double(r.metrics.f_score) << '\n';
    }
    return out.str();
}

inline std::string grid_summary_to_csv(const std::vector<GridSummary>& rows) {
    std::ostringstream out;
    out << "x,y,replicates,mean_precision,mean_recall,mean_f_score,"
           "stddev_f_score\n";
    for (const auto& s : rows) {
        out << detail::format_double(s.x) << ',' << detail::format_double(s.y) << ','
            << s.replicates << ',' << detail::format_double(s.mean_precision) << ','
            << detail::format_double(s.mean_recall) << ','
            << detail::format_double(s.mean_f_score) << ','
            << detail::format_double(s.stddev_f_score) << '\n';
    }
    return out.str();
}

} // namespace redlab
