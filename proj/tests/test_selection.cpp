#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "xlda/hash.hpp"
#include "xlda/selection.hpp"

using namespace xlda;

namespace {

using AccMap = std::map<std::pair<LanguageId, LanguageId>, double>;

PairwiseMatrix random_matrix(uint64_t seed, size_t n_langs) {
    Rng rng(seed);
    std::vector<LanguageId> langs;
    for (size_t i = 0; i < n_langs; ++i) langs.emplace_back("q" + std::to_string(i));
    AccMap acc;
    for (const auto& t : langs) {
        double base = 0.3 + 0.5 * rng.uniform01();
        acc[{t, t}] = base;
        for (const auto& a : langs) {
            if (a == t) continue;
            double delta = (rng.uniform01() - 0.45) * 0.1;
            // Occasional exact ties and zeros to exercise the tie rule.
            if (rng.below(6) == 0) delta = 0.0;
            if (rng.below(7) == 0) delta = 0.02;
            acc[{t, a}] = std::min(1.0, std::max(0.0, base + delta));
        }
    }
    return matrix_from_accuracies(langs, acc);
}

}  // namespace

TEST_CASE("matrix_from_accuracies recovers the quoted pairwise numbers") {
    std::vector<LanguageId> langs = {LanguageId("hi"), LanguageId("de")};
    AccMap acc;
    acc[{LanguageId("hi"), LanguageId("hi")}] = 0.673;
    acc[{LanguageId("hi"), LanguageId("de")}] = 0.706;
    acc[{LanguageId("de"), LanguageId("de")}] = 0.761;
    acc[{LanguageId("de"), LanguageId("hi")}] = 0.770;
    PairwiseMatrix m = matrix_from_accuracies(langs, acc);
    REQUIRE(m.baseline(LanguageId("hi")) == 0.673);
    REQUIRE(std::abs(m.delta(LanguageId("hi"), LanguageId("de")) - 0.033) < 1e-9);
}

TEST_CASE("matrix_from_accuracies edge cases") {
    std::vector<LanguageId> langs = {LanguageId("en"), LanguageId("de")};
    SECTION("equal accuracies give zero deltas") {
        AccMap acc;
        for (const auto& t : langs)
            for (const auto& a : langs) acc[{t, a}] = 0.5;
        PairwiseMatrix m = matrix_from_accuracies(langs, acc);
        REQUIRE(m.delta(LanguageId("en"), LanguageId("de")) == 0.0);
        REQUIRE(m.delta(LanguageId("de"), LanguageId("en")) == 0.0);
    }
    SECTION("accuracy outside [0,1] is rejected") {
        AccMap acc;
        for (const auto& t : langs)
            for (const auto& a : langs) acc[{t, a}] = 0.5;
        acc[{LanguageId("en"), LanguageId("en")}] = 1.2;
        REQUIRE_THROWS_AS(matrix_from_accuracies(langs, acc), Error);
    }
    SECTION("missing pair is rejected") {
        AccMap acc;
        acc[{LanguageId("en"), LanguageId("en")}] = 0.5;
        acc[{LanguageId("de"), LanguageId("de")}] = 0.5;
        acc[{LanguageId("en"), LanguageId("de")}] = 0.5;
        REQUIRE_THROWS_AS(matrix_from_accuracies(langs, acc), Error);
    }
}

TEST_CASE("greedy_schedule on the documented example") {
    std::vector<LanguageId> langs = {LanguageId("hi"), LanguageId("de"), LanguageId("fr"),
                                     LanguageId("ru"), LanguageId("ur")};
    AccMap acc;
    acc[{LanguageId("hi"), LanguageId("hi")}] = 0.673;
    acc[{LanguageId("hi"), LanguageId("de")}] = 0.693;  // +2.0 points
    acc[{LanguageId("hi"), LanguageId("fr")}] = 0.688;  // +1.5
    acc[{LanguageId("hi"), LanguageId("ru")}] = 0.676;  // +0.3
    acc[{LanguageId("hi"), LanguageId("ur")}] = 0.655;  // -1.8
    for (const auto& t : langs) {
        if (t == LanguageId("hi")) continue;
        acc[{t, t}] = 0.5;
        for (const auto& a : langs)
            if (a != t) acc[{t, a}] = 0.5;
    }
    PairwiseMatrix m = matrix_from_accuracies(langs, acc);
    GreedySchedule s = greedy_schedule(m, LanguageId("hi"));
    REQUIRE(s.ranked.size() == 4);
    REQUIRE(s.ranked[0].first == LanguageId("de"));
    REQUIRE(s.ranked[1].first == LanguageId("fr"));
    REQUIRE(s.ranked[2].first == LanguageId("ru"));
    REQUIRE(s.ranked[3].first == LanguageId("ur"));
    REQUIRE(s.cut == 3);
    REQUIRE(s.prefixes.size() == 3);
    REQUIRE(s.prefixes[2] ==
            std::vector<LanguageId>{LanguageId("de"), LanguageId("fr"), LanguageId("ru")});
}

TEST_CASE("greedy_schedule corner cases") {
    SECTION("all negative deltas give an empty prefix family") {
        std::vector<LanguageId> langs = {LanguageId("aa"), LanguageId("bb")};
        AccMap acc;
        acc[{LanguageId("aa"), LanguageId("aa")}] = 0.6;
        acc[{LanguageId("aa"), LanguageId("bb")}] = 0.5;
        acc[{LanguageId("bb"), LanguageId("bb")}] = 0.6;
        acc[{LanguageId("bb"), LanguageId("aa")}] = 0.5;
        GreedySchedule s = greedy_schedule(matrix_from_accuracies(langs, acc), LanguageId("aa"));
        REQUIRE(s.cut == 0);
        REQUIRE(s.prefixes.empty());
    }
    SECTION("zero delta does not hurt and stays in") {
        std::vector<LanguageId> langs = {LanguageId("aa"), LanguageId("bb")};
        AccMap acc;
        acc[{LanguageId("aa"), LanguageId("aa")}] = 0.6;
        acc[{LanguageId("aa"), LanguageId("bb")}] = 0.6;
        acc[{LanguageId("bb"), LanguageId("bb")}] = 0.6;
        acc[{LanguageId("bb"), LanguageId("aa")}] = 0.6;
        GreedySchedule s = greedy_schedule(matrix_from_accuracies(langs, acc), LanguageId("aa"));
        REQUIRE(s.cut == 1);
    }
    SECTION("ties break by matrix language order") {
        std::vector<LanguageId> langs = {LanguageId("tt"), LanguageId("ab"), LanguageId("ba")};
        AccMap acc;
        for (const auto& t : langs) {
            acc[{t, t}] = 0.5;
            for (const auto& a : langs)
                if (a != t) acc[{t, a}] = 0.51;
        }
        GreedySchedule s = greedy_schedule(matrix_from_accuracies(langs, acc), LanguageId("tt"));
        REQUIRE(s.ranked[0].first == LanguageId("ab"));
        REQUIRE(s.ranked[1].first == LanguageId("ba"));
    }
    SECTION("unknown target") {
        PairwiseMatrix m = random_matrix(4, 3);
        REQUIRE_THROWS_AS(greedy_schedule(m, LanguageId("zz")), Error);
    }
}

TEST_CASE("greedy matches the sort-and-cut oracle on random matrices") {
    for (uint64_t seed = 0; seed < 60; ++seed) {
        PairwiseMatrix m = random_matrix(seed, 2 + seed % 13);
        for (const auto& target : m.languages()) {
            GreedySchedule got = greedy_schedule(m, target);
            oracle::ScheduleOracle want = oracle::schedule_oracle(m, target);
            REQUIRE(got.cut == want.cut);
            REQUIRE(got.ranked.size() == want.ranked.size());
            for (size_t i = 0; i < want.ranked.size(); ++i) {
                REQUIRE(got.ranked[i].first == want.ranked[i].first);
                REQUIRE(got.ranked[i].second == want.ranked[i].second);
            }
            for (size_t k = 1; k <= got.cut; ++k) {
                REQUIRE(got.prefixes[k - 1].size() == k);
                for (size_t i = 0; i < k; ++i) REQUIRE(got.prefixes[k - 1][i] == got.ranked[i].first);
            }
        }
    }
}

TEST_CASE("ranking is invariant to positive scaling of deltas") {
    PairwiseMatrix m = random_matrix(17, 6);
    LanguageId target = m.languages()[0];
    GreedySchedule before = greedy_schedule(m, target);

    PairwiseMatrix scaled(m.languages());
    for (const auto& t : m.languages()) {
        scaled.set_baseline(t, m.baseline(t));
        for (const auto& a : m.languages())
            if (a != t) scaled.set_delta(t, a, 3.5 * m.delta(t, a));
    }
    GreedySchedule after = greedy_schedule(scaled, target);
    REQUIRE(before.cut == after.cut);
    for (size_t i = 0; i < before.ranked.size(); ++i)
        REQUIRE(before.ranked[i].first == after.ranked[i].first);
}

TEST_CASE("permuting language order preserves the selected set when deltas are distinct") {
    std::vector<LanguageId> langs = {LanguageId("aa"), LanguageId("bb"), LanguageId("cc"),
                                     LanguageId("dd")};
    AccMap acc;
    acc[{langs[0], langs[0]}] = 0.5;
    acc[{langs[0], langs[1]}] = 0.53;
    acc[{langs[0], langs[2]}] = 0.51;
    acc[{langs[0], langs[3]}] = 0.48;
    for (size_t i = 1; i < langs.size(); ++i) {
        acc[{langs[i], langs[i]}] = 0.5;
        for (const auto& a : langs)
            if (a != langs[i]) acc[{langs[i], a}] = 0.5;
    }
    PairwiseMatrix m1 = matrix_from_accuracies(langs, acc);
    std::vector<LanguageId> permuted = {langs[3], langs[1], langs[0], langs[2]};
    PairwiseMatrix m2 = matrix_from_accuracies(permuted, acc);
    GreedySchedule s1 = greedy_schedule(m1, langs[0]);
    GreedySchedule s2 = greedy_schedule(m2, langs[0]);
    std::multiset<std::string> set1, set2;
    for (size_t i = 0; i < s1.cut; ++i) set1.insert(s1.ranked[i].first.str());
    for (size_t i = 0; i < s2.cut; ++i) set2.insert(s2.ranked[i].first.str());
    REQUIRE(set1 == set2);
}

TEST_CASE("select_best") {
    GreedyCurve curve;
    curve.target = LanguageId("hi");
    SECTION("argmax") {
        curve.points = {{0, 0.67}, {1, 0.70}, {2, 0.71}, {3, 0.705}};
        auto [k, acc] = select_best(curve);
        REQUIRE(k == 2);
        REQUIRE(acc == 0.71);
    }
    SECTION("single point") {
        curve.points = {{0, 0.5}};
        auto [k, acc] = select_best(curve);
        REQUIRE(k == 0);
        REQUIRE(acc == 0.5);
    }
    SECTION("tie goes to the smallest k") {
        curve.points = {{0, 0.6}, {1, 0.6}};
        auto [k, acc] = select_best(curve);
        REQUIRE(k == 0);
    }
    SECTION("empty curve") {
        REQUIRE_THROWS_AS(select_best(curve), Error);
    }
    SECTION("idempotent and equal to a linear scan") {
        curve.points = {{0, 0.6}, {1, 0.62}, {2, 0.62}, {3, 0.5}};
        auto first = select_best(curve);
        auto second = select_best(curve);
        REQUIRE(first == second);
        size_t best_k = 0;
        double best = -1;
        for (const auto& [k, a] : curve.points) {
            if (a > best) {
                best = a;
                best_k = k;
            }
        }
        REQUIRE(first.first == best_k);
        REQUIRE(first.second == best);
    }
}

TEST_CASE("matrix csv round trip") {
    for (uint64_t seed : {3u, 9u, 27u}) {
        PairwiseMatrix m = random_matrix(seed, 3 + seed % 4);
        std::ostringstream out;
        write_matrix_csv(m, out);
        std::istringstream in(out.str());
        PairwiseMatrix back = load_matrix_csv(in);
        REQUIRE(back.languages() == m.languages());
        for (const auto& t : m.languages()) {
            REQUIRE(std::abs(back.baseline(t) - m.baseline(t)) < 5e-5);
            for (const auto& a : m.languages())
                if (a != t) REQUIRE(std::abs(back.delta(t, a) - m.delta(t, a)) < 5e-5);
        }
    }
}

TEST_CASE("matrix csv rejects malformed grids") {
    SECTION("non-square") {
        std::istringstream in("target,aa,bb\naa,0.5,+0.1\n");
        REQUIRE_THROWS_AS(load_matrix_csv(in), Error);
    }
    SECTION("wrong cell count") {
        std::istringstream in("target,aa,bb\naa,0.5\nbb,0.5,+0.1\n");
        REQUIRE_THROWS_AS(load_matrix_csv(in), Error);
    }
    SECTION("signed diagonal is rejected") {
        std::istringstream in("target,aa,bb\naa,+0.5,+0.1\nbb,-0.1,0.5\n");
        REQUIRE_THROWS_AS(load_matrix_csv(in), Error);
    }
    SECTION("diagonal out of range") {
        std::istringstream in("target,aa,bb\naa,1.5,+0.1\nbb,-0.1,0.5\n");
        REQUIRE_THROWS_AS(load_matrix_csv(in), Error);
    }
    SECTION("duplicate language") {
        std::istringstream in("target,aa,aa\naa,0.5,+0.1\naa,-0.1,0.5\n");
        REQUIRE_THROWS_AS(load_matrix_csv(in), Error);
    }
    SECTION("unparseable cell") {
        std::istringstream in("target,aa,bb\naa,0.5,oops\nbb,-0.1,0.5\n");
        REQUIRE_THROWS_AS(load_matrix_csv(in), Error);
    }
}

TEST_CASE("schedule json shape") {
    PairwiseMatrix m = random_matrix(5, 4);
    GreedySchedule s = greedy_schedule(m, m.languages()[1]);
    auto j = schedule_to_json(s);
    REQUIRE(j["target"] == m.languages()[1].str());
    REQUIRE(j["ranked"].size() == 3);
    REQUIRE(j["cut"] == s.cut);
    REQUIRE(j["prefixes"].size() == s.prefixes.size());
}
