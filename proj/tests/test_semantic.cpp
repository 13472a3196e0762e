#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "redlab/semantic.hpp"
#include "support/generators.hpp"

using redlab::edit_similarity;
using redlab::EditProvider;
using redlab::semantic_matrix;
using redlab::tokenize;
using redlab::vector_similarity;
using redlab::VectorProvider;
using redlab::VectorTable;

TEST_CASE("tokenize: camelCase, punctuation, underscores") {
    CHECK(tokenize("BloodPressure") ==
          std::vector<std::string>{"blood", "pressure"});
    CHECK(tokenize("Arterial BP [Systolic]") ==
          std::vector<std::string>{"arterial", "bp", "systolic"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("blood_pressure") ==
          std::vector<std::string>{"blood", "pressure"});
    CHECK(tokenize("XMLParser") == std::vector<std::string>{"xml", "parser"});
    CHECK(tokenize("Release A") == std::vector<std::string>{"release", "a"});
    CHECK(tokenize("IV Liquid") == std::vector<std::string>{"iv", "liquid"});
}

TEST_CASE("edit similarity: normalization collapses case and separators") {
    CHECK(edit_similarity("CRP", "CRP") == 1.0);
    CHECK(edit_similarity("BloodPressure", "blood pressure") == 1.0);
    CHECK(edit_similarity("blood_pressure", "Blood Pressure") == 1.0);
    CHECK(edit_similarity("abc", "xyz") == 0.0);
    CHECK(edit_similarity("", "") == 1.0);
    CHECK(edit_similarity("", "abc") == 0.0);
    // "Release A" vs "Release B": one edit across eight normalized chars.
    CHECK(edit_similarity("Release A", "Release B") == Catch::Approx(0.875));
}

TEST_CASE("edit similarity: symmetric and bounded on random labels") {
    redlab::Rng rng(0x5e4a971c);
    const auto random_label = [&] {
        std::string s;
        const std::size_t n = rng.below(12);
        for (std::size_t i = 0; i < n; ++i)
            s += static_cast<char>("aB _-xYz09"[rng.below(10)]);
        return s;
    };
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_label();
        const auto b = random_label();
        const double ab = edit_similarity(a, b);
        const double ba = edit_similarity(b, a);
        INFO("'" << a << "' vs '" << b << "'");
        CHECK(ab == ba);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(edit_similarity(a, a) == 1.0);
    }
}

TEST_CASE("vector table: header, inference, and validation") {
    const auto with_header = testgen::temp_path("vectors_header.txt");
    testgen::write_file(with_header,
                        "d=3\n"
                        "blood 1 0 0\n"
                        "Pressure 0 1 0\n");
    const auto table = VectorTable::load(with_header);
    CHECK(table.dimension() == 3);
    CHECK(table.size() == 2);
    CHECK(table.find("pressure") != nullptr); // keys lowercased
    CHECK(table.find("missing") == nullptr);

    const auto inferred = testgen::temp_path("vectors_inferred.txt");
    testgen::write_file(inferred, "alpha 0.5 0.5\nbeta -0.5 0.5\n");
    CHECK(VectorTable::load(inferred).dimension() == 2);

    const auto mismatched = testgen::temp_path("vectors_bad.txt");
    testgen::write_file(mismatched, "alpha 1 2 3\nbeta 1 2\n");
    CHECK_THROWS_AS(VectorTable::load(mismatched), redlab::ParseError);

    const auto zero = testgen::temp_path("vectors_zero.txt");
    testgen::write_file(zero, "alpha 0 0 0\n");
    CHECK_THROWS_AS(VectorTable::load(zero), redlab::ParseError);

    const auto garbled = testgen::temp_path("vectors_garbled.txt");
    testgen::write_file(garbled, "alpha 1 two 3\n");
    CHECK_THROWS_AS(VectorTable::load(garbled), redlab::ParseError);
}

TEST_CASE("vector similarity: cosine of mean token vectors") {
    const auto path = testgen::temp_path("vectors_cosine.txt");
    testgen::write_file(path,
                        "blood 1 0 0 0\n"
                        "pressure 0 1 0 0\n"
                        "heart 0 0 1 0\n"
                        "rate 0 0 0 1\n"
                        "anti -1 0 0 0\n");
    const auto table = VectorTable::load(path);

    // Identical token sets, any order or casing.
    CHECK(vector_similarity("BloodPressure", "blood pressure", table) ==
          Catch::Approx(1.0));
    CHECK(vector_similarity("pressure blood", "Blood_Pressure", table) ==
          Catch::Approx(1.0));
    // Disjoint orthogonal token sets.
    CHECK(vector_similarity("blood pressure", "heart rate", table) ==
          Catch::Approx(0.0).margin(1e-12));
    // Opposed vectors clip at 0 instead of going negative.
    CHECK(vector_similarity("blood", "anti", table) == 0.0);
    // A side with zero in-table tokens falls back to edit similarity.
    CHECK(vector_similarity("zzz", "zzz", table) == 1.0);
    CHECK(vector_similarity("BloodPressure", "bl00d pr3ssure!!", table) ==
          edit_similarity("BloodPressure", "bl00d pr3ssure!!"));
    // One known token of two is enough to stay in vector space.
    CHECK(vector_similarity("BloodPressure", "bl00d pressure", table) ==
          Catch::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("semantic matrix: one minus similarity, symmetric, in range") {
    const auto log = testgen::log_from_variants(
        {{2, {"BloodPressure", "blood pressure"}}, {1, {"Release A"}}});
    const EditProvider provider;
    const auto m = semantic_matrix(log, provider);
    CHECK(*m.at("BloodPressure", "blood pressure") == 0.0);
    CHECK(*m.at("blood pressure", "BloodPressure") == 0.0);
    for (const auto& [key, score] : m.entries()) {
        REQUIRE(score.has_value());
        CHECK(*score >= 0.0);
        CHECK(*score <= 1.0);
    }
    // Provider self-identity over every label in the log.
    for (const auto& label : log.activities())
        CHECK(provider.similarity(label, label) == 1.0);
}

TEST_CASE("semantic matrix: near-identical wording is not decisive alone") {
    // "Release A" and "Release B" are semantically close but represent
    // different steps; the perspective reports closeness and nothing more.
    const EditProvider provider;
    const double dissimilarity =
        1.0 - provider.similarity("Release A", "Release B");
    CHECK(dissimilarity < 0.2);
}

TEST_CASE("semantic matrix: deterministic across thread counts and runs") {
    const auto log = testgen::hub_log();
    const EditProvider provider;
    const auto once = semantic_matrix(log, provider, 1);
    const auto again = semantic_matrix(log, provider, 4);
    REQUIRE(once.size() == again.size());
    for (const auto& [key, score] : once.entries())
        CHECK(*score == *again.at(key.first, key.second));
}

namespace {

class BrokenProvider final : public redlab::SemanticProvider {
public:
    double similarity(const std::string&, const std::string&) const override {
        return 1.5;
    }
    std::string name() const override { return "broken"; }
};

} // namespace

TEST_CASE("semantic matrix: out-of-range providers are rejected") {
    const auto log = testgen::log_from_variants({{1, {"a", "b"}}});
    CHECK_THROWS(semantic_matrix(log, BrokenProvider{}));
}
