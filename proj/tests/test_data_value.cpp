#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <vector>

#include "redlab/data_value.hpp"
#include "support/generators.hpp"

using redlab::ActivityCluster;
using redlab::cluster_activities;
using redlab::data_value_matrix;
using redlab::EventLog;
using redlab::extract_trimmed;
using redlab::histogram_pair;
using redlab::PercentileVector;
using redlab::percentile_vector;

namespace {

// One trace per activity; each event carries one value of attribute "v".
EventLog value_log(
    const std::vector<std::pair<std::string, std::vector<double>>>& spec) {
    std::vector<redlab::Trace> traces;
    std::uint64_t id = 0;
    for (const auto& [label, values] : spec) {
        redlab::Trace trace;
        trace.case_id = "case_" + label;
        std::int64_t ts = 1'600'000'000'000'000;
        const std::size_t n = values.empty() ? 1 : values.size();
        for (std::size_t i = 0; i < n; ++i) {
            redlab::Event e;
            e.event_id = id++;
            e.activity = label;
            e.timestamp_us = ts;
            ts += 60'000'000;
            if (!values.empty()) e.numeric_values["v"] = values[i];
            trace.events.push_back(std::move(e));
        }
        traces.push_back(std::move(trace));
    }
    return EventLog::from_traces(std::move(traces));
}

std::vector<double> iota_values(int n, double start = 1.0, double step = 1.0) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(start + i * step);
    return out;
}

} // namespace

TEST_CASE("extract_trimmed: identity at trim 0, symmetric cut otherwise") {
    const auto log = value_log({{"a", {5.0, 1.0, 3.0}}});
    const auto untrimmed = extract_trimmed(log, "a", 0.0);
    REQUIRE(untrimmed.has_value());
    CHECK(*untrimmed == std::vector<double>{1.0, 3.0, 5.0}); // sorted

    const auto log100 = value_log({{"a", iota_values(100)}});
    const auto trimmed = extract_trimmed(log100, "a", 0.01);
    REQUIRE(trimmed.has_value());
    CHECK(trimmed->size() == 98);
    CHECK(trimmed->front() == 2.0);
    CHECK(trimmed->back() == 99.0);
}

TEST_CASE("extract_trimmed: no numbers means not applicable") {
    const auto log = value_log({{"bare", {}}});
    CHECK_FALSE(extract_trimmed(log, "bare", 0.0).has_value());
    CHECK_THROWS_AS(extract_trimmed(log, "bare", 0.5), redlab::ConfigError);
    CHECK_THROWS_AS(extract_trimmed(log, "bare", -0.1), redlab::ConfigError);
}

TEST_CASE("extract_trimmed: explicit attribute beats the primary one") {
    std::vector<redlab::Trace> traces(1);
    traces[0].case_id = "c";
    for (int i = 0; i < 3; ++i) {
        redlab::Event e;
        e.event_id = i;
        e.activity = "a";
        e.timestamp_us = i;
        e.numeric_values["often"] = 10.0 + i;
        if (i == 0) e.numeric_values["rare"] = 99.0;
        traces[0].events.push_back(std::move(e));
    }
    const auto log = EventLog::from_traces(std::move(traces));
    CHECK(extract_trimmed(log, "a", 0.0)->size() == 3); // primary = "often"
    const auto rare = extract_trimmed(log, "a", 0.0, std::string("rare"));
    REQUIRE(rare.has_value());
    CHECK(*rare == std::vector<double>{99.0});
}

TEST_CASE("percentiles: linear interpolation convention") {
    const auto five = percentile_vector("a", {1, 2, 3, 4, 5});
    CHECK(five.q1 == 2.0);
    CHECK(five.q3 == 4.0);
    const auto one = percentile_vector("a", {7.5});
    CHECK(one.q1 == 7.5);
    CHECK(one.q3 == 7.5);
    const auto two = percentile_vector("a", {0.0, 1.0});
    CHECK(two.q1 == Catch::Approx(0.25));
    CHECK(two.q3 == Catch::Approx(0.75));
    CHECK(two.n == 2);
}

TEST_CASE("clustering: close percentile vectors merge, far ones do not") {
    const std::vector<PercentileVector> close = {{"a", 0.3, 0.5, 10},
                                                 {"b", 0.31, 0.52, 10}};
    const auto merged = cluster_activities(close, 0.1);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].members == std::set<std::string>{"a", "b"});

    const std::vector<PercentileVector> far = {{"a", 0, 0, 10},
                                               {"b", 10, 10, 10}};
    const auto split = cluster_activities(far, 0.1);
    CHECK(split.size() == 2);

    const auto single = cluster_activities({{"solo", 1, 2, 5}}, 0.1);
    REQUIRE(single.size() == 1);
    CHECK(single[0].members.size() == 1);
}

TEST_CASE("clustering: average linkage controls chained merges") {
    // a-b are close; c sits near b but the a..c average exceeds theta.
    const std::vector<PercentileVector> points = {
        {"a", 0.0, 0.0, 1}, {"b", 0.8, 0.0, 1}, {"c", 1.6, 0.0, 1}};
    // First merge: (a,b) at distance 0.8 (ties to (b,c); lexicographic pick).
    // Then {a,b} to c averages (2.4 + 0.8)/2 = 1.6, above theta, so it stays.
    const auto clusters = cluster_activities(points, 1.0);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].members == std::set<std::string>{"a", "b"});
    CHECK(clusters[1].members == std::set<std::string>{"c"});
}

TEST_CASE("clustering: partition covers every input exactly once") {
    redlab::Rng rng(0x9e3779b9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<PercentileVector> vectors;
        const std::size_t n = 1 + rng.below(12);
        for (std::size_t i = 0; i < n; ++i)
            vectors.push_back({"a" + std::to_string(i), rng.uniform(0, 10),
                               rng.uniform(0, 10), 1});
        const double theta = 0.5 + rng.uniform(0.0, 5.0);
        const auto clusters = cluster_activities(vectors, theta);
        std::set<std::string> seen;
        std::size_t total = 0;
        for (const auto& c : clusters) {
            total += c.members.size();
            seen.insert(c.members.begin(), c.members.end());
        }
        INFO("trial " << trial);
        CHECK(total == n);
        CHECK(seen.size() == n);
    }
}

TEST_CASE("clustering: shrinking theta never merges more") {
    redlab::Rng rng(0x1234abcd);
    for (int trial = 0; trial < 15; ++trial) {
        std::vector<PercentileVector> vectors;
        for (std::size_t i = 0; i < 8; ++i)
            vectors.push_back({"a" + std::to_string(i), rng.uniform(0, 4),
                               rng.uniform(0, 4), 1});
        const auto coarse = cluster_activities(vectors, 2.0);
        const auto fine = cluster_activities(vectors, 0.7);
        INFO("trial " << trial);
        CHECK(fine.size() >= coarse.size());
        // Refinement: every fine cluster sits inside one coarse cluster.
        for (const auto& f : fine) {
            bool contained = false;
            for (const auto& c : coarse)
                if (std::includes(c.members.begin(), c.members.end(),
                                  f.members.begin(), f.members.end()))
                    contained = true;
            CHECK(contained);
        }
    }
}

TEST_CASE("histograms: Sturges bin count from the smaller sample") {
    const auto h100 = histogram_pair(iota_values(100), iota_values(100, 201));
    CHECK(h100.bin_count == 8); // ceil(log2 100) + 1
    const auto hmin =
        histogram_pair(iota_values(100), {1.0, 2.0, 3.0, 4.0});
    CHECK(hmin.bin_count == 3); // ceil(log2 4) + 1
    const auto h1 = histogram_pair({5.0}, {9.0});
    CHECK(h1.bin_count == 1);
}

TEST_CASE("histograms: shared range, equal widths, weights sum to 1") {
    const auto h = histogram_pair(iota_values(32, 0.0), iota_values(32, 50.0));
    CHECK(h.shared_min == 0.0);
    CHECK(h.shared_max == 81.0);
    REQUIRE(h.bin_count == 6);
    REQUIRE(h.boundaries.size() == 6);
    const double width = (h.shared_max - h.shared_min) / 6.0;
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(h.boundaries[i] == Catch::Approx(i * width));
    double sum_a = 0.0, sum_b = 0.0;
    for (const double w : h.weights_a) sum_a += w;
    for (const double w : h.weights_b) sum_b += w;
    CHECK(sum_a == Catch::Approx(1.0).margin(1e-9));
    CHECK(sum_b == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("histograms: identical datasets give identical weights") {
    const auto values = iota_values(50, 3.0, 0.7);
    const auto h = histogram_pair(values, values);
    CHECK(h.weights_a == h.weights_b);
}

TEST_CASE("histograms: zero shared range collapses to one bin") {
    const auto h = histogram_pair({4.0, 4.0, 4.0}, {4.0, 4.0});
    CHECK(h.bin_count == 1);
    CHECK(h.weights_a == std::vector<double>{1.0});
    CHECK(h.weights_b == std::vector<double>{1.0});
}

TEST_CASE("histogram signatures: bin/weight lists feed the 1-d distance") {
    // Shape from the motivating histogram example: four bins with weights
    // 20/30/20/30 percent is a legal signature; against itself nothing moves.
    const redlab::Signature<double> sig({10, 15, 20, 25}, {.2, .3, .2, .3});
    CHECK(redlab::emd_1d(sig, sig) == 0.0);
    const redlab::Signature<double> shifted({10, 15, 20, 25}, {.3, .2, .3, .2});
    CHECK(redlab::emd_1d(sig, shifted) > 0.0);
}

TEST_CASE("data-value matrix: the four pair regimes") {
    const auto log = value_log({
        {"a", iota_values(100)},         // 1..100
        {"b", iota_values(100)},         // identical to a
        {"c", iota_values(100, 5000.0)}, // far away: different cluster
        {"d", {}},                       // no numbers
        {"e", {}},                       // no numbers
    });
    const auto m = data_value_matrix(log, 10.0, 0.0);
    CHECK(*m.at("a", "b") == 0.0);          // same cluster, same data
    CHECK(*m.at("a", "c") == 1.0);          // different clusters
    CHECK(*m.at("a", "d") == 1.0);          // one side has no numbers
    CHECK_FALSE(m.at("d", "e").has_value()); // neither side has numbers
}

TEST_CASE("data-value matrix: scores normalized into [0,1]") {
    redlab::Rng rng(0xdadaf00d);
    std::vector<std::pair<std::string, std::vector<double>>> spec;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> values;
        const int n = 2 + static_cast<int>(rng.below(40));
        for (int k = 0; k < n; ++k) values.push_back(rng.uniform(0.0, 30.0));
        spec.emplace_back("a" + std::to_string(i), std::move(values));
    }
    const auto m = data_value_matrix(value_log(spec), 50.0, 0.0);
    for (const auto& [key, score] : m.entries()) {
        REQUIRE(score.has_value());
        CHECK(*score >= 0.0);
        CHECK(*score <= 1.0);
    }
}

TEST_CASE("data-value matrix: invariant under common affine transforms") {
    // Integer-valued data and an exact affine map keep binning identical,
    // so the normalized scores must match exactly.
    redlab::Rng rng(0xaff1de00);
    std::vector<std::pair<std::string, std::vector<double>>> base;
    for (int i = 0; i < 5; ++i) {
        std::vector<double> values;
        const int n = 3 + static_cast<int>(rng.below(30));
        for (int k = 0; k < n; ++k)
            values.push_back(static_cast<double>(rng.below(1000)));
        base.emplace_back("a" + std::to_string(i), std::move(values));
    }
    auto mapped = base;
    for (auto& [label, values] : mapped)
        for (double& v : values) v = 2.0 * v + 7.0;

    const auto m1 = data_value_matrix(value_log(base), 40.0, 0.0);
    // Percentile vectors scale by 2, so scale theta_a with them.
    const auto m2 = data_value_matrix(value_log(mapped), 80.0, 0.0);
    for (const auto& [key, score] : m1.entries()) {
        INFO(key.first << " vs " << key.second);
        CHECK(*score == Catch::Approx(*m2.at(key.first, key.second))
                            .margin(1e-9));
    }
}

TEST_CASE("data-value matrix: trimming tames outliers") {
    auto values_a = iota_values(99);
    auto values_b = iota_values(100);
    values_a.push_back(1e6); // one absurd reading in place of the 100
    // Both sides have 100 values; trim 0.01 cuts one from each end, so the
    // datasets land on the identical 2..99.
    const auto log = value_log({{"a", values_a}, {"b", values_b}});
    const auto raw = data_value_matrix(log, 1e9, 0.0);
    const auto trimmed = data_value_matrix(log, 1e9, 0.01);
    CHECK(*trimmed.at("a", "b") < *raw.at("a", "b"));
    CHECK(*trimmed.at("a", "b") == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("data-value matrix: attribute overrides pick the compared series") {
    std::vector<redlab::Trace> traces(1);
    traces[0].case_id = "c";
    std::uint64_t id = 0;
    const auto add = [&](const std::string& label, double often, double rare,
                         bool with_rare) {
        redlab::Event e;
        e.event_id = id++;
        e.activity = label;
        e.timestamp_us = static_cast<std::int64_t>(id) * 1'000'000;
        e.numeric_values["often"] = often;
        if (with_rare) e.numeric_values["rare"] = rare;
        traces[0].events.push_back(std::move(e));
    };
    // "often" differs wildly between a and b; "rare" matches exactly.
    for (int i = 0; i < 4; ++i) add("a", 1000.0 + i, 5.0, i == 0);
    for (int i = 0; i < 4; ++i) add("b", 1.0 + i, 5.0, i == 0);
    const auto log = EventLog::from_traces(std::move(traces));

    const auto by_primary = data_value_matrix(log, 10.0, 0.0);
    CHECK(*by_primary.at("a", "b") == 1.0); // different clusters

    const auto by_override = data_value_matrix(
        log, 10.0, 0.0, {{"a", "rare"}, {"b", "rare"}});
    CHECK(*by_override.at("a", "b") == 0.0); // identical singleton datasets
}

TEST_CASE("data-value matrix: deterministic across thread counts") {
    std::vector<std::pair<std::string, std::vector<double>>> spec;
    redlab::Rng rng(0x7eadbeef);
    for (int i = 0; i < 7; ++i) {
        std::vector<double> values;
        for (int k = 0; k < 20; ++k) values.push_back(rng.uniform(0.0, 9.0));
        spec.emplace_back("a" + std::to_string(i), std::move(values));
    }
    const auto log = value_log(spec);
    const auto serial = data_value_matrix(log, 3.0, 0.01, {}, 1);
    const auto parallel = data_value_matrix(log, 3.0, 0.01, {}, 4);
    for (const auto& [key, score] : serial.entries())
        CHECK(*score == *parallel.at(key.first, key.second)); // exact
}
