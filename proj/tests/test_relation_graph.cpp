#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "redlab/relation_graph.hpp"
#include "support/generators.hpp"

using redlab::build_dfg;
using redlab::build_ifg;
using redlab::GraphKind;
using redlab::long_distance_significance;
using redlab::RelationGraph;

TEST_CASE("dfg: adjacent pairs become counted arcs") {
    const auto log = testgen::log_from_variants({{1, {"a", "b", "c"}}});
    const auto g = build_dfg(log);
    CHECK(g.kind() == GraphKind::Directly);
    CHECK(g.arcs().size() == 2);
    CHECK(g.arc_count("a", "b") == 1);
    CHECK(g.arc_count("b", "c") == 1);
    CHECK(g.arc_count("a", "c") == 0);
}

TEST_CASE("dfg: repeated labels produce self-arcs") {
    const auto log = testgen::log_from_variants({{1, {"a", "a"}}});
    const auto g = build_dfg(log);
    CHECK(g.arc_count("a", "a") == 1);
}

TEST_CASE("dfg: hub log reproduces known arc counts") {
    const auto g = build_dfg(testgen::hub_log());
    CHECK(g.arc_count("A", "H") == 50);
    CHECK(g.arc_count("A", "B") == 50);

    const auto out_a = g.outgoing("A");
    REQUIRE(out_a.size() == 2);
    CHECK(out_a[0].first == "B");
    CHECK(out_a[1].first == "H");

    const auto in_c = g.incoming("C");
    REQUIRE(in_c.size() == 2);
    CHECK(in_c[0].first == "B");
    CHECK(in_c[0].second == 25);
    CHECK(in_c[1].first == "H");
    CHECK(in_c[1].second == 23);

    CHECK(g.outgoing("E").size() == 1); // E -> G on the D branches
    CHECK(g.outgoing("G").empty());     // end activity
    CHECK(g.outgoing("F").empty());
}

TEST_CASE("dfg: arc counts sum to total adjacent pairs") {
    redlab::Rng rng(0xd06f00d5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto log = testgen::random_log(rng);
        const auto g = build_dfg(log);
        std::size_t arcs_total = 0;
        for (const auto& [arc, count] : g.arcs()) arcs_total += count;
        std::size_t expected = 0;
        for (const auto& trace : log.traces())
            expected += trace.events.size() - 1;
        INFO("trial " << trial);
        CHECK(arcs_total == expected);
    }
}

TEST_CASE("dfg: invariant under trace reordering") {
    const auto log = testgen::hub_log();
    std::vector<redlab::Trace> reversed(log.traces().rbegin(),
                                        log.traces().rend());
    const auto backwards = redlab::EventLog::from_traces(std::move(reversed));
    CHECK(build_dfg(log).arcs() == build_dfg(backwards).arcs());
}

TEST_CASE("lds: known values") {
    const auto single = testgen::log_from_variants({{1, {"a", "b"}}});
    CHECK(long_distance_significance("a", "b", single) ==
          Catch::Approx(2.0 / 3.0));
    CHECK(long_distance_significance("b", "a", single) == 0.0);

    const auto nine = testgen::log_from_variants({{9, {"a", "x", "b"}}});
    CHECK(long_distance_significance("a", "b", nine) ==
          Catch::Approx(18.0 / 19.0));

    CHECK_THROWS_AS(long_distance_significance("zz", "a", single),
                    redlab::LookupError);
}

TEST_CASE("lds: counts once per trace and stays below 1") {
    // a precedes b twice inside one trace; still one trace-level occurrence.
    const auto log = testgen::log_from_variants({{1, {"a", "b", "a", "b"}}});
    CHECK(long_distance_significance("a", "b", log) ==
          Catch::Approx(2.0 / 3.0));
    // b also precedes a here (positions 2 then 3).
    CHECK(long_distance_significance("b", "a", log) ==
          Catch::Approx(2.0 / 3.0));
}

TEST_CASE("ifg: threshold zero yields the full eventually-follows relation") {
    const auto log = testgen::log_from_variants({{1, {"a", "b", "c"}}});
    const auto g = build_ifg(log, 0.0);
    CHECK(g.kind() == GraphKind::Indirectly);
    CHECK(g.arcs().size() == 3);
    CHECK(g.arc_count("a", "b") == 1);
    CHECK(g.arc_count("a", "c") == 1);
    CHECK(g.arc_count("b", "c") == 1);
}

TEST_CASE("ifg: hub log keeps the long-range D-G dependency only") {
    const auto log = testgen::hub_log();
    const auto g = build_ifg(log, 0.9);
    CHECK(g.arc_count("D", "G") == 49);
    CHECK(g.arc_count("C", "G") == 0);
    CHECK(g.arc_count("A", "E") == 97);
    CHECK(g.arcs().size() == 2); // nothing else reaches 0.9
}

TEST_CASE("ifg: raising the threshold never adds arcs") {
    const auto log = testgen::hub_log();
    const double thetas[] = {0.0, 0.3, 0.6, 0.9, 1.0};
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (const double theta : thetas) {
        const auto g = build_ifg(log, theta);
        for (const auto& [arc, count] : g.arcs())
            CHECK(long_distance_significance(arc.first, arc.second, log) >=
                  theta);
        CHECK(g.arcs().size() <= previous);
        previous = g.arcs().size();
    }
    CHECK(build_ifg(log, 1.0).arcs().empty()); // lds < 1 always
}

TEST_CASE("ifg: trace-level counting, not event pairs") {
    // 776-event-style traces must not dominate: one trace with many a..b
    // pairs still counts once.
    const auto log = testgen::log_from_variants(
        {{1, {"a", "a", "a", "b", "b"}}, {1, {"a", "b"}}});
    const auto g = build_ifg(log, 0.0);
    CHECK(g.arc_count("a", "b") == 2);
}

TEST_CASE("relation graph: validation and lookups") {
    CHECK_THROWS(RelationGraph::make(GraphKind::Directly, {"a"},
                                     {{{"a", "b"}, 1}}));
    CHECK_THROWS(RelationGraph::make(GraphKind::Directly, {"a", "b"},
                                     {{{"a", "b"}, 0}}));
    const auto g =
        RelationGraph::make(GraphKind::Directly, {"a", "b"}, {{{"a", "b"}, 1}});
    CHECK_THROWS_AS(g.outgoing("zzz"), redlab::LookupError);
    CHECK(g.outgoing("b").empty());
    CHECK(g.incoming("a").empty());
}

TEST_CASE("relation graph: isolated labels stay in the node set") {
    const auto log =
        testgen::log_from_variants({{1, {"a", "b"}}, {1, {"lonely"}}});
    const auto g = build_dfg(log);
    CHECK(g.nodes().count("lonely") == 1);
    CHECK(g.outgoing("lonely").empty());
}

TEST_CASE("dot export renders nodes and labeled arcs") {
    const auto log = testgen::log_from_variants({{2, {"a", "b"}}});
    const auto dot = redlab::to_dot(build_dfg(log));
    CHECK(dot.find("digraph directly_follows") != std::string::npos);
    CHECK(dot.find("\"a\" -> \"b\" [label=\"2\"]") != std::string::npos);

    const auto quoted = testgen::log_from_variants({{1, {"say \"hi\"", "b"}}});
    const auto dot2 = redlab::to_dot(build_dfg(quoted));
    CHECK(dot2.find("\"say \\\"hi\\\"\"") != std::string::npos);
}
