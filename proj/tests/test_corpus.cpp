#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "xlda/corpus.hpp"
#include "xlda/hash.hpp"

using namespace xlda;

namespace {

std::string temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "xlda_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

std::string write_file(const std::string& name, const std::string& contents) {
    std::string path = temp_file(name);
    std::ofstream out(path, std::ios::binary);
    out << contents;
    return path;
}

// Random aligned corpus with optional coverage gaps; used by the round-trip
// and merge properties.
AlignedCorpus random_corpus(uint64_t seed, size_t n_ids, size_t n_langs, bool gaps) {
    Rng rng(seed);
    std::vector<LanguageId> langs;
    for (size_t j = 0; j < n_langs; ++j) langs.emplace_back("l" + std::to_string(j));
    AlignedCorpus corpus;
    for (size_t i = 0; i < n_ids; ++i) {
        std::string id = "id" + std::to_string(i);
        Label label = static_cast<Label>(rng.below(3));
        for (const auto& lang : langs) {
            if (gaps && rng.below(5) == 0) continue;
            NliExample ex;
            ex.id = id;
            ex.premise = lang.str() + " premise é" + std::to_string(rng.below(1000));
            ex.hypothesis = lang.str() + " hyp " + std::to_string(rng.below(1000));
            ex.label = label;
            corpus.add(lang, std::move(ex));
        }
    }
    return corpus;
}

}  // namespace

TEST_CASE("load_nli_jsonl basic construction") {
    std::string path = write_file("basic.jsonl",
        R"({"id":"1","lang":"en","premise":"a b","hypothesis":"c","label":"neutral"})" "\n"
        R"({"id":"1","lang":"de","premise":"x y","hypothesis":"z","label":"neutral"})" "\n");
    AlignedCorpus c = load_nli_jsonl(path);
    REQUIRE(c.size() == 1);
    REQUIRE(c.languages().size() == 2);
    REQUIRE(c.find("1", LanguageId("en"))->premise == "a b");
    REQUIRE(c.find("1", LanguageId("de"))->label == Label::neutral);
}

TEST_CASE("load_nli_jsonl empty file") {
    std::string path = write_file("empty.jsonl", "");
    AlignedCorpus c = load_nli_jsonl(path);
    REQUIRE(c.size() == 0);
    REQUIRE(c.languages().empty());
}

TEST_CASE("load_nli_jsonl rejects label conflicts naming id and languages") {
    std::string path = write_file("conflict.jsonl",
        R"({"id":"7","lang":"en","premise":"a","hypothesis":"b","label":"neutral"})" "\n"
        R"({"id":"7","lang":"de","premise":"a","hypothesis":"b","label":"neutral"})" "\n"
        R"({"id":"7","lang":"fr","premise":"a","hypothesis":"b","label":"contradiction"})" "\n");
    try {
        load_nli_jsonl(path);
        FAIL("expected error");
    } catch (const Error& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("'7'") != std::string::npos);
        REQUIRE(msg.find("fr") != std::string::npos);
    }
}

TEST_CASE("load_nli_jsonl error cases") {
    SECTION("malformed line reports line number") {
        std::string path = write_file("bad.jsonl",
            R"({"id":"1","lang":"en","premise":"a","hypothesis":"b","label":"neutral"})" "\n"
            "{not json\n");
        try {
            load_nli_jsonl(path);
            FAIL("expected error");
        } catch (const Error& e) {
            REQUIRE(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
    SECTION("unknown label") {
        std::string path = write_file("badlabel.jsonl",
            R"({"id":"1","lang":"en","premise":"a","hypothesis":"b","label":"contradictory"})" "\n");
        REQUIRE_THROWS_AS(load_nli_jsonl(path), Error);
    }
    SECTION("label casing is folded, not coerced") {
        std::string path = write_file("caps.jsonl",
            R"({"id":"1","lang":"en","premise":"a","hypothesis":"b","label":"Neutral"})" "\n");
        AlignedCorpus c = load_nli_jsonl(path);
        REQUIRE(c.find("1", LanguageId("en"))->label == Label::neutral);
    }
    SECTION("duplicate (id, lang)") {
        std::string path = write_file("dup.jsonl",
            R"({"id":"1","lang":"en","premise":"a","hypothesis":"b","label":"neutral"})" "\n"
            R"({"id":"1","lang":"en","premise":"a","hypothesis":"b","label":"neutral"})" "\n");
        REQUIRE_THROWS_AS(load_nli_jsonl(path), Error);
    }
    SECTION("missing field") {
        std::string path = write_file("missing.jsonl", R"({"id":"1","lang":"en","premise":"a"})" "\n");
        REQUIRE_THROWS_AS(load_nli_jsonl(path), Error);
    }
    SECTION("missing lang without default") {
        std::string path = write_file("nolang.jsonl",
            R"({"id":"1","premise":"a","hypothesis":"b","label":"neutral"})" "\n");
        REQUIRE_THROWS_AS(load_nli_jsonl(path), Error);
        AlignedCorpus c = load_nli_jsonl(path, LanguageId("en"));
        REQUIRE(c.find("1", LanguageId("en")) != nullptr);
    }
    SECTION("empty premise after trim") {
        std::string path = write_file("blank.jsonl",
            R"({"id":"1","lang":"en","premise":"  ","hypothesis":"b","label":"neutral"})" "\n");
        REQUIRE_THROWS_AS(load_nli_jsonl(path), Error);
    }
}

TEST_CASE("load_nli_tsv maps columns and merges") {
    std::string tsv =
        "sentence1\tsentence2\tgold_label\n"
        "a b\tc\tneutral\n"
        "d e\tf\tentailment\n"
        "g h\ti\tcontradiction\n";
    std::string path = write_file("x.tsv", tsv);
    std::map<std::string, TsvRole> cols = {
        {"sentence1", TsvRole::premise}, {"sentence2", TsvRole::hypothesis}, {"gold_label", TsvRole::label}};

    AlignedCorpus en = load_nli_tsv(path, LanguageId("en"), cols);
    REQUIRE(en.size() == 3);
    REQUIRE(en.languages().size() == 1);
    REQUIRE(en.positional_ids());
    REQUIRE(en.find("0", LanguageId("en"))->premise == "a b");

    AlignedCorpus fr = load_nli_tsv(path, LanguageId("fr"), cols);
    AlignedCorpus both = merge(en, fr);
    REQUIRE(both.size() == 3);
    REQUIRE(both.languages().size() == 2);
    REQUIRE(validate(both).fully_aligned());
}

TEST_CASE("load_nli_tsv error cases") {
    std::map<std::string, TsvRole> cols = {
        {"p", TsvRole::premise}, {"h", TsvRole::hypothesis}, {"l", TsvRole::label}};
    SECTION("wrong field count reports row number") {
        std::string path = write_file("short.tsv", "p\th\tl\na\tb\tneutral\nx\ty\n");
        try {
            load_nli_tsv(path, LanguageId("en"), cols);
            FAIL("expected error");
        } catch (const Error& e) {
            REQUIRE(std::string(e.what()).find("row 1") != std::string::npos);
        }
    }
    SECTION("missing column") {
        std::string path = write_file("nocol.tsv", "p\th\na\tb\n");
        REQUIRE_THROWS_AS(load_nli_tsv(path, LanguageId("en"), cols), Error);
    }
    SECTION("unknown label") {
        std::string path = write_file("badlab.tsv", "p\th\tl\na\tb\tmaybe\n");
        REQUIRE_THROWS_AS(load_nli_tsv(path, LanguageId("en"), cols), Error);
    }
}

TEST_CASE("merge requires identical row sets for positional ids") {
    std::map<std::string, TsvRole> cols = {
        {"p", TsvRole::premise}, {"h", TsvRole::hypothesis}, {"l", TsvRole::label}};
    std::string p3 = write_file("p3.tsv", "p\th\tl\na\tb\tneutral\nc\td\tneutral\ne\tf\tneutral\n");
    std::string p2 = write_file("p2.tsv", "p\th\tl\na\tb\tneutral\nc\td\tneutral\n");
    AlignedCorpus en = load_nli_tsv(p3, LanguageId("en"), cols);
    AlignedCorpus fr = load_nli_tsv(p2, LanguageId("fr"), cols);
    REQUIRE_THROWS_AS(merge(en, fr), Error);
}

TEST_CASE("validate reports problems deterministically") {
    SECTION("fully aligned two-language corpus") {
        AlignedCorpus c = random_corpus(1, 5, 2, false);
        ValidationReport r = validate(c);
        REQUIRE(r.fully_aligned());
        REQUIRE(r.per_language_counts.size() == 2);
        REQUIRE(r.per_language_counts.at(LanguageId("l0")) == 5);
    }
    SECTION("missing language is reported") {
        AlignedCorpus c;
        for (const char* id : {"5", "7"}) {
            for (const char* lang : {"en", "de"}) {
                if (std::string(id) == "7" && std::string(lang) == "de") continue;
                NliExample ex{id, "p", "h", Label::neutral};
                c.add(LanguageId(lang), ex);
            }
        }
        ValidationReport r = validate(c);
        REQUIRE(r.missing.size() == 1);
        REQUIRE(r.missing[0].first == "7");
        REQUIRE(r.missing[0].second == LanguageId("de"));
    }
    SECTION("injected label flip found by brute-force comparison") {
        // Build 3 ids x 4 languages, flip one version's label, and check the
        // report against an independent enumeration of all (id, lang) pairs.
        std::vector<LanguageId> langs;
        for (int j = 0; j < 4; ++j) langs.emplace_back("l" + std::to_string(j));
        AlignedCorpus c;
        for (int i = 0; i < 3; ++i) {
            for (const auto& lang : langs) {
                NliExample ex{"id" + std::to_string(i), "p", "h", Label::entailment};
                if (i == 1 && lang == langs[2]) ex.label = Label::neutral;
                c.add(lang, ex);
            }
        }
        size_t expected_mismatch_ids = 0;
        for (const auto& [id, versions] : c.examples()) {
            std::set<Label> seen;
            for (const auto& [lang, ex] : versions) seen.insert(ex.label);
            if (seen.size() > 1) ++expected_mismatch_ids;
        }
        ValidationReport r = validate(c);
        REQUIRE(expected_mismatch_ids == 1);
        REQUIRE(r.label_mismatches.size() == expected_mismatch_ids);
        REQUIRE(r.label_mismatches[0].id == "id1");
        REQUIRE(r.missing.empty());
    }
}

TEST_CASE("jsonl round trip preserves corpora exactly") {
    for (uint64_t seed : {11u, 22u, 33u}) {
        AlignedCorpus original = random_corpus(seed, 12, 3, true);
        std::string path = temp_file("roundtrip" + std::to_string(seed) + ".jsonl");
        write_nli_jsonl(original, path);
        AlignedCorpus reloaded = load_nli_jsonl(path);
        REQUIRE(reloaded == original);

        // Byte determinism of the writer.
        std::string path2 = temp_file("roundtrip_b" + std::to_string(seed) + ".jsonl");
        write_nli_jsonl(original, path2);
        std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        REQUIRE(sa.str() == sb.str());
    }
}

TEST_CASE("merge is commutative") {
    // Split a corpus into per-language slices and merge in both orders.
    AlignedCorpus full = random_corpus(99, 10, 3, true);
    std::vector<AlignedCorpus> slices;
    for (const auto& lang : full.languages()) {
        AlignedCorpus slice;
        for (const auto& [id, versions] : full.examples()) {
            auto it = versions.find(lang);
            if (it != versions.end()) slice.add(lang, it->second);
        }
        slices.push_back(std::move(slice));
    }
    AlignedCorpus fwd = merge(merge(slices[0], slices[1]), slices[2]);
    AlignedCorpus rev = merge(merge(slices[2], slices[1]), slices[0]);
    REQUIRE(fwd == rev);
    REQUIRE(fwd == full);
}

TEST_CASE("load_squad_json parses and verifies spans") {
    SECTION("one paragraph, one qa") {
        std::string path = write_file("squad.json", R"({
            "data": [{"title":"t","paragraphs":[{"context":"the cat sat",
              "qas":[{"id":"q1","question":"who sat?",
                      "answers":[{"text":"cat","answer_start":4}]}]}]}]})");
        SquadLoadResult r = load_squad_json(path);
        REQUIRE(r.examples.size() == 1);
        REQUIRE(r.skipped == 0);
        REQUIRE(r.examples[0].answer_start == 4);
        REQUIRE(r.examples[0].context.substr(4, 3) == "cat");
    }
    SECTION("inconsistent answer_start skipped with count") {
        std::string path = write_file("squad_bad.json", R"({
            "data": [{"paragraphs":[{"context":"the cat sat",
              "qas":[{"id":"q1","question":"?","answers":[{"text":"cat","answer_start":5}]},
                     {"id":"q2","question":"?","answers":[{"text":"sat","answer_start":8}]}]}]}]})");
        SquadLoadResult r = load_squad_json(path);
        REQUIRE(r.examples.size() == 1);
        REQUIRE(r.skipped == 1);
        REQUIRE(r.skipped_ids == std::vector<std::string>{"q1"});
    }
    SECTION("empty data array") {
        std::string path = write_file("squad_empty.json", R"({"data": []})");
        SquadLoadResult r = load_squad_json(path);
        REQUIRE(r.examples.empty());
    }
    SECTION("qa without answers is a schema violation") {
        std::string path = write_file("squad_noans.json", R"({
            "data": [{"paragraphs":[{"context":"x y","qas":[{"id":"q","question":"?","answers":[]}]}]}]})");
        REQUIRE_THROWS_AS(load_squad_json(path), Error);
    }
    SECTION("offsets are counted in scalar values, not bytes") {
        // Two-byte character before the answer: a byte offset would miss.
        std::string path = write_file("squad_uni.json",
            "{\"data\": [{\"paragraphs\":[{\"context\":\"é café cat\","
            "\"qas\":[{\"id\":\"q1\",\"question\":\"?\","
            "\"answers\":[{\"text\":\"cat\",\"answer_start\":7}]}]}]}]}");
        SquadLoadResult r = load_squad_json(path);
        REQUIRE(r.examples.size() == 1);
        REQUIRE(r.skipped == 0);
    }
}

TEST_CASE("language id validation") {
    REQUIRE(LanguageId::valid("en"));
    REQUIRE(LanguageId::valid("x1"));
    REQUIRE(LanguageId::valid("abcdefgh"));
    REQUIRE_FALSE(LanguageId::valid("e"));
    REQUIRE_FALSE(LanguageId::valid("1x"));
    REQUIRE_FALSE(LanguageId::valid("EN"));
    REQUIRE_FALSE(LanguageId::valid("abcdefghi"));
    REQUIRE_FALSE(LanguageId::valid(""));
    REQUIRE_THROWS_AS(LanguageId("Q"), Error);
}
