#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xlda/span_align.hpp"
#include "xlda/synthetic.hpp"

using namespace xlda;

TEST_CASE("recover_span_exact") {
    SECTION("plain match") {
        auto span = recover_span_exact("the cat sat on the mat", "cat");
        REQUIRE(span.has_value());
        REQUIRE(span->start == 4);
        REQUIRE(span->end == 7);
    }
    SECTION("first instance wins") {
        auto span = recover_span_exact("aa baa", "aa");
        REQUIRE(span.has_value());
        REQUIRE(*span == Span{0, 2});
    }
    SECTION("absence is a valid result") {
        REQUIRE_FALSE(recover_span_exact("abc", "xyz").has_value());
    }
    SECTION("answer whitespace is trimmed") {
        auto span = recover_span_exact("x cat y", "  cat ");
        REQUIRE(span.has_value());
        REQUIRE(*span == Span{2, 5});
    }
    SECTION("NFC bridges composed and decomposed forms") {
        // Context holds precomposed e-acute; answer arrives decomposed.
        auto span = recover_span_exact("le café noir", "café");
        REQUIRE(span.has_value());
        REQUIRE(*span == Span{3, 7});
    }
    SECTION("offsets are scalar values, not bytes") {
        auto span = recover_span_exact("éé cat", "cat");
        REQUIRE(span.has_value());
        REQUIRE(*span == Span{3, 6});
    }
}

TEST_CASE("mark_answer") {
    SECTION("inserts the marker on both sides") {
        REQUIRE(mark_answer("abc def ghi", Span{4, 7}, "⟦") == "abc ⟦def⟦ ghi");
    }
    SECTION("span touching both ends") {
        REQUIRE(mark_answer("abc", Span{0, 3}, "⟦") == "⟦abc⟦");
    }
    SECTION("marker occurring in context is an error") {
        REQUIRE_THROWS_AS(mark_answer("abc def", Span{0, 3}, "d"), Error);
    }
    SECTION("span out of bounds") {
        REQUIRE_THROWS_AS(mark_answer("abc", Span{1, 9}, "⟦"), Error);
        REQUIRE_THROWS_AS(mark_answer("abc", Span{2, 1}, "⟦"), Error);
    }
    SECTION("empty marker") {
        REQUIRE_THROWS_AS(mark_answer("abc", Span{0, 1}, ""), Error);
    }
}

TEST_CASE("recover_span_marked") {
    SECTION("two occurrences recover the span with offsets in cleaned text") {
        auto r = recover_span_marked("xyz ⟦qqq⟦ www", "⟦");
        REQUIRE(r.has_value());
        REQUIRE(r->first == "xyz qqq www");
        REQUIRE(r->second == Span{4, 7});
    }
    SECTION("markers dropped by translation") {
        REQUIRE_FALSE(recover_span_marked("xyz qqq www", "⟦").has_value());
    }
    SECTION("three occurrences") {
        REQUIRE_FALSE(recover_span_marked("⟦a⟦b⟦", "⟦").has_value());
    }
    SECTION("one occurrence") {
        REQUIRE_FALSE(recover_span_marked("a⟦b", "⟦").has_value());
    }
}

TEST_CASE("marker round trip over random triples") {
    Rng rng(2024);
    const std::string alphabet = "abcdefghij klmnop qrstuv";
    for (int iter = 0; iter < 300; ++iter) {
        size_t len = 1 + rng.below(60);
        std::string context;
        for (size_t i = 0; i < len; ++i) context.push_back(alphabet[rng.below(alphabet.size())]);
        size_t start = rng.below(context.size() + 1);
        size_t end = start + rng.below(context.size() - start + 1);
        std::string marker = rng.below(2) == 0 ? "⟦" : "§";
        if (context.find(marker) != std::string::npos) continue;
        std::string marked = mark_answer(context, Span{start, end}, marker);
        auto recovered = recover_span_marked(marked, marker);
        REQUIRE(recovered.has_value());
        REQUIRE(recovered->first == context);
        REQUIRE(recovered->second == Span{start, end});
    }
}

TEST_CASE("align_qa_dataset with the identity translator") {
    auto examples = generate_synthetic_qa(10, 77);
    IdentityTranslator identity;
    auto [records, stats] = align_qa_dataset(examples, identity, LanguageId("de"));
    REQUIRE(stats.total == 10);
    REQUIRE(stats.exact_count == 10);
    REQUIRE(stats.cumulative_rate() == 1.0);
    for (const auto& rec : records) {
        REQUIRE(rec.phase == RecoveryPhase::exact_first_match);
        REQUIRE(rec.recovered_text() == rec.translated_answer);
        REQUIRE_FALSE(rec.excluded_from_training);
    }
}

TEST_CASE("align_qa_dataset with the word cipher") {
    auto examples = generate_synthetic_qa(60, 99);
    WordCipherTranslator cipher;
    auto [records, stats] = align_qa_dataset(examples, cipher, LanguageId("fr"));
    REQUIRE(stats.exact_count == stats.total);
    // Cipher output differs from the source but matches within itself.
    REQUIRE(records[0].translated_context != records[0].source.context);
    for (const auto& rec : records) REQUIRE(rec.recovered_text() == rec.translated_answer);
}

TEST_CASE("align_qa_dataset with the chunk shuffler forces phase 2") {
    auto examples = generate_synthetic_qa(60, 5);
    ChunkShuffleTranslator shuffler;
    auto [records, stats] = align_qa_dataset(examples, shuffler, LanguageId("ru"));
    REQUIRE(stats.exact_count == 0);
    REQUIRE(stats.marker_count == stats.total);
    REQUIRE(stats.unrecovered_count == 0);
    REQUIRE(stats.cumulative_rate() == 1.0);
    for (const auto& rec : records) {
        REQUIRE(rec.phase == RecoveryPhase::marker_recovered);
        REQUIRE(rec.excluded_from_training);  // default output policy
        // Substring invariant: the span indexes the inter-marker text.
        REQUIRE(rec.recovered_span.has_value());
        std::string text = rec.recovered_text();
        REQUIRE_FALSE(text.empty());
    }

    auto [records2, stats2] =
        align_qa_dataset(examples, shuffler, LanguageId("ru"), kDefaultMarker, true);
    for (const auto& rec : records2) REQUIRE_FALSE(rec.excluded_from_training);
}

TEST_CASE("align_qa_dataset is deterministic") {
    auto examples = generate_synthetic_qa(25, 3);
    ChunkShuffleTranslator shuffler;
    auto [r1, s1] = align_qa_dataset(examples, shuffler, LanguageId("es"));
    auto [r2, s2] = align_qa_dataset(examples, shuffler, LanguageId("es"));
    std::ostringstream o1, o2;
    write_aligned_jsonl(r1, o1, true);
    write_aligned_jsonl(r2, o2, true);
    REQUIRE(o1.str() == o2.str());
    REQUIRE(s1.exact_count == s2.exact_count);
}

TEST_CASE("phase partition always holds") {
    for (uint64_t seed : {1u, 2u, 3u}) {
        auto examples = generate_synthetic_qa(20, seed);
        for (auto* translator :
             std::initializer_list<Translator*>{new IdentityTranslator(), new WordCipherTranslator(),
                                                new ChunkShuffleTranslator()}) {
            auto [records, stats] = align_qa_dataset(examples, *translator, LanguageId("de"));
            REQUIRE(stats.exact_count + stats.marker_count + stats.unrecovered_count == stats.total);
            REQUIRE(stats.cumulative_rate() >= stats.exact_rate());
            delete translator;
        }
    }
}

TEST_CASE("write_recovery_report") {
    SECTION("formats the two-phase rates") {
        RecoveryStats de;
        de.dest_lang = LanguageId("de");
        de.total = 100;
        de.exact_count = 65;
        de.marker_count = 16;
        de.unrecovered_count = 19;
        std::ostringstream out;
        write_recovery_report({de}, out);
        REQUIRE(out.str() ==
                "dest_lang,total,exact_count,exact_rate,marker_count,cumulative_rate,unrecovered_count\n"
                "de,100,65,0.650,16,0.810,19\n");
    }
    SECTION("empty stats give a header-only file") {
        std::ostringstream out;
        write_recovery_report({}, out);
        REQUIRE(out.str() ==
                "dest_lang,total,exact_count,exact_rate,marker_count,cumulative_rate,unrecovered_count\n");
    }
    SECTION("rates in the file match the counts to 3 decimals") {
        std::vector<RecoveryStats> stats;
        Rng rng(8);
        for (const char* lang : {"aa", "bb", "cc"}) {
            RecoveryStats s;
            s.dest_lang = LanguageId(lang);
            s.exact_count = rng.below(50);
            s.marker_count = rng.below(30);
            s.unrecovered_count = rng.below(20);
            s.total = s.exact_count + s.marker_count + s.unrecovered_count;
            if (s.total == 0) {
                s.exact_count = s.total = 1;
            }
            stats.push_back(s);
        }
        std::ostringstream out;
        write_recovery_report(stats, out);
        std::istringstream in(out.str());
        std::string line;
        std::getline(in, line);  // header
        size_t row = 0;
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            REQUIRE(cells.size() == 7);
            double total = std::stod(cells[1]);
            double exact = std::stod(cells[2]);
            double marker = std::stod(cells[4]);
            double exact_rate = std::stod(cells[3]);
            double cum_rate = std::stod(cells[5]);
            REQUIRE(std::abs(exact_rate - exact / total) < 5e-4);
            REQUIRE(std::abs(cum_rate - (exact + marker) / total) < 5e-4);
            ++row;
        }
        REQUIRE(row == stats.size());
    }
}

TEST_CASE("write_aligned_jsonl drops excluded records by default") {
    auto examples = generate_synthetic_qa(10, 41);
    ChunkShuffleTranslator shuffler;
    auto [records, stats] = align_qa_dataset(examples, shuffler, LanguageId("de"));
    std::ostringstream skip, keep;
    write_aligned_jsonl(records, skip);
    write_aligned_jsonl(records, keep, true);
    std::string kept = keep.str();
    REQUIRE(skip.str().empty());
    REQUIRE(std::count(kept.begin(), kept.end(), '\n') == 10);
    REQUIRE(kept.find("marker_recovered") != std::string::npos);
}

TEST_CASE("translator subprocess protocol") {
    // Child that echoes the text back with the destination prefixed.
    std::string script = R"(python3 -c '
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    print(json.dumps({"text": req["dest"] + ":" + req["text"]}), flush=True)
')";
    SubprocessTranslator sub(script);
    REQUIRE(sub.translate("hello", LanguageId("en"), LanguageId("de")) == "de:hello");
    REQUIRE(sub.translate("café", LanguageId("en"), LanguageId("fr")) == "fr:café");
}

TEST_CASE("synthetic qa corpus satisfies the substring invariant") {
    auto examples = generate_synthetic_qa(200, 12345);
    REQUIRE(examples.size() == 200);
    for (const auto& ex : examples) {
        REQUIRE(ex.context.substr(ex.answer_start, ex.answer_text.size()) == ex.answer_text);
        REQUIRE(ex.answer_start > 0);
    }
    // Determinism.
    auto again = generate_synthetic_qa(200, 12345);
    REQUIRE(std::equal(examples.begin(), examples.end(), again.begin()));
}
