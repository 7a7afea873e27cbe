#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "xlda/harness.hpp"

using namespace xlda;

namespace {

SyntheticCorpusSpec small_spec(uint64_t seed, size_t n_langs = 3) {
    SyntheticCorpusSpec spec;
    spec.n_ids = 60;
    spec.n_eval_ids = 90;
    spec.vocab_size = 60;
    spec.cipher_seed = seed;
    for (size_t j = 0; j < n_langs; ++j) spec.languages.emplace_back("x" + std::to_string(j + 1));
    return spec;
}

TrainerSpec fast_trainer(uint64_t seed) {
    TrainerSpec t;
    t.feature_dim = 1 << 12;
    t.seed = seed;
    return t;
}

}  // namespace

TEST_CASE("generate_synthetic_corpus honors the aligned-corpus contract") {
    auto [train, eval] = generate_synthetic_corpus(small_spec(7));
    REQUIRE(train.size() == 60);
    REQUIRE(eval.size() == 90);
    REQUIRE(train.languages().size() == 3);

    ValidationReport tr = validate(train);
    REQUIRE(tr.fully_aligned());
    REQUIRE(validate(eval).fully_aligned());

    // Train and eval splits are disjoint by id.
    for (const auto& [id, _] : train.examples()) REQUIRE(eval.examples().count(id) == 0);

    // Labels agree across languages and follow the subset/disjoint rule in
    // the pivot language.
    for (const auto& [id, versions] : train.examples()) {
        Label label = versions.begin()->second.label;
        for (const auto& [lang, ex] : versions) REQUIRE(ex.label == label);
    }
}

TEST_CASE("generate_synthetic_corpus is deterministic and cipher-stable") {
    auto [a_train, a_eval] = generate_synthetic_corpus(small_spec(123));
    auto [b_train, b_eval] = generate_synthetic_corpus(small_spec(123));
    REQUIRE(a_train == b_train);
    REQUIRE(a_eval == b_eval);
    auto [c_train, c_eval] = generate_synthetic_corpus(small_spec(124));
    REQUIRE_FALSE(a_train == c_train);
}

TEST_CASE("synthetic labels follow the stated rule in the pivot language") {
    auto [train, eval] = generate_synthetic_corpus(small_spec(5));
    LanguageId pivot("x1");
    for (const auto& [id, versions] : train.examples()) {
        const NliExample& ex = versions.at(pivot);
        // Recompute the rule from the surfaced token sets.
        auto tokens = [](const std::string& s) {
            std::set<std::string> out;
            std::istringstream iss(s);
            std::string t;
            while (iss >> t) out.insert(t);
            return out;
        };
        auto prem = tokens(ex.premise);
        auto hyp = tokens(ex.hypothesis);
        size_t shared = 0;
        for (const auto& t : hyp) shared += prem.count(t);
        Label want = shared == hyp.size()  ? Label::entailment
                     : shared == 0         ? Label::contradiction
                                           : Label::neutral;
        REQUIRE(ex.label == want);
    }
}

TEST_CASE("synthetic label distribution covers all classes") {
    SyntheticCorpusSpec spec = small_spec(99, 2);
    spec.n_ids = 3000;
    spec.n_eval_ids = 10;
    auto [train, eval] = generate_synthetic_corpus(spec);
    std::map<Label, size_t> hist;
    for (const auto& [id, versions] : train.examples()) ++hist[versions.begin()->second.label];
    for (const auto& [label, count] : hist)
        REQUIRE(count >= spec.n_ids * 5 / 100);
    REQUIRE(hist.size() == 3);
}

TEST_CASE("synthetic spec validation") {
    SyntheticCorpusSpec spec = small_spec(1);
    spec.vocab_size = 10;
    REQUIRE_THROWS_AS(generate_synthetic_corpus(spec), Error);
    spec = small_spec(1);
    spec.n_ids = 2;
    REQUIRE_THROWS_AS(generate_synthetic_corpus(spec), Error);
    spec = small_spec(1);
    spec.languages = {LanguageId("x1")};
    REQUIRE_THROWS_AS(generate_synthetic_corpus(spec), Error);
}

TEST_CASE("pairwise_grid runs every cell") {
    auto [train, eval] = generate_synthetic_corpus(small_spec(21, 2));
    std::vector<LanguageId> langs = train.languages();
    GridRun run = pairwise_grid(train, eval, langs, fast_trainer(4), CompositionPolicy{});
    REQUIRE(run.cells.size() == 4);  // 2 diagonal + 2 off-diagonal
    run.matrix.check_complete();
    for (const auto& t : langs) {
        double base = run.matrix.baseline(t);
        REQUIRE(base >= 0.0);
        REQUIRE(base <= 1.0);
    }
}

TEST_CASE("single language grid is baseline only") {
    auto [train, eval] = generate_synthetic_corpus(small_spec(22, 2));
    std::vector<LanguageId> one = {train.languages()[0]};
    GridRun run = pairwise_grid(train, eval, one, fast_trainer(4), CompositionPolicy{});
    REQUIRE(run.cells.size() == 1);
    REQUIRE(run.matrix.languages().size() == 1);
    run.matrix.check_complete();
}

TEST_CASE("grid cells are order- and concurrency-independent") {
    auto [train, eval] = generate_synthetic_corpus(small_spec(33, 3));
    std::vector<LanguageId> langs = train.languages();
    TrainerSpec spec = fast_trainer(77);
    CompositionPolicy policy;

    GridRun serial = pairwise_grid(train, eval, langs, spec, policy, 1);
    GridRun parallel = pairwise_grid(train, eval, langs, spec, policy, 8);
    std::ostringstream a, b;
    write_matrix_csv(serial.matrix, a);
    write_matrix_csv(parallel.matrix, b);
    REQUIRE(a.str() == b.str());

    // Manual reverse-order evaluation reproduces the same accuracies.
    std::vector<AugmentedDataset> evals;
    for (const auto& t : langs) evals.push_back(build_monolingual(eval, t));
    for (size_t idx = langs.size() * langs.size(); idx-- > 0;) {
        size_t ti = idx / langs.size();
        size_t ai = idx % langs.size();
        uint64_t seed = cell_seed(spec.seed, langs[ti].str(), langs[ai].str());
        TrainerSpec cs = spec;
        cs.seed = seed;
        CompositionPolicy pol = policy;
        pol.seed = seed;
        AugmentedDataset ds = ti == ai ? build_monolingual(train, langs[ti])
                                       : build_xlda_pairwise(train, langs[ti], langs[ai], pol);
        EvalResult r = train_eval(ds, evals[ti], cs);
        REQUIRE(r.accuracy() == serial.cells[idx].result.accuracy());
    }
}

TEST_CASE("greedy_curve_run shapes") {
    auto [train, eval] = generate_synthetic_corpus(small_spec(44, 3));
    std::vector<LanguageId> langs = train.languages();
    TrainerSpec spec = fast_trainer(10);
    GridRun grid = pairwise_grid(train, eval, langs, spec, CompositionPolicy{});
    LanguageId target = langs[0];

    GreedyRun run = greedy_curve_run(train, eval, target, grid.matrix, spec, CompositionPolicy{});
    REQUIRE(run.curve.points.size() == run.schedule.cut + 1);
    REQUIRE(run.curve.points[0].first == 0);
    // k=0 reproduces the matrix diagonal for the same corpus and spec.
    REQUIRE(run.curve.points[0].second == grid.matrix.baseline(target));

    GreedyRun again = greedy_curve_run(train, eval, target, grid.matrix, spec, CompositionPolicy{});
    std::ostringstream a, b;
    write_curve_csv(run.curve, a);
    write_curve_csv(again.curve, b);
    REQUIRE(a.str() == b.str());

    GreedyRun wide = greedy_curve_run(train, eval, target, grid.matrix, spec, CompositionPolicy{}, 8);
    std::ostringstream c;
    write_curve_csv(wide.curve, c);
    REQUIRE(a.str() == c.str());
}

TEST_CASE("greedy curve with an all-negative schedule has a single point") {
    // Hand-built matrix where every augmentor hurts.
    std::vector<LanguageId> langs = {LanguageId("x1"), LanguageId("x2")};
    std::map<std::pair<LanguageId, LanguageId>, double> acc;
    acc[{langs[0], langs[0]}] = 0.7;
    acc[{langs[0], langs[1]}] = 0.6;
    acc[{langs[1], langs[1]}] = 0.7;
    acc[{langs[1], langs[0]}] = 0.6;
    PairwiseMatrix m = matrix_from_accuracies(langs, acc);

    auto [train, eval] = generate_synthetic_corpus(small_spec(55, 2));
    GreedyRun run =
        greedy_curve_run(train, eval, langs[0], m, fast_trainer(3), CompositionPolicy{});
    REQUIRE(run.schedule.cut == 0);
    REQUIRE(run.curve.points.size() == 1);
    REQUIRE(run.best_k == 0);
}

TEST_CASE("external trainer over the subprocess protocol") {
    std::string command = R"(python3 -c '
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    n = sum(1 for l in open(req["eval_path"]) if "_meta" not in l)
    print(json.dumps({"accuracy": 0.75, "n_eval": n}), flush=True)
')";
    auto [train, eval] = generate_synthetic_corpus(small_spec(66, 2));
    TrainerSpec spec = fast_trainer(1);
    spec.kind = TrainerKind::external;
    spec.external_command = command;
    AugmentedDataset train_ds = build_monolingual(train, train.languages()[0]);
    AugmentedDataset eval_ds = build_monolingual(eval, eval.languages()[0]);
    EvalResult r = train_eval(train_ds, eval_ds, spec);
    REQUIRE(r.n_eval == eval_ds.size());
    REQUIRE(r.correct == static_cast<size_t>(std::llround(0.75 * eval_ds.size())));
    REQUIRE(r.train_size == train_ds.size());
}

TEST_CASE("external trainer failure reports the command") {
    TrainerSpec spec = fast_trainer(1);
    spec.kind = TrainerKind::external;
    spec.external_command = "false";
    auto [train, eval] = generate_synthetic_corpus(small_spec(67, 2));
    AugmentedDataset ds = build_monolingual(train, train.languages()[0]);
    REQUIRE_THROWS_AS(train_eval(ds, ds, spec), Error);
}

TEST_CASE("parallel_for propagates exceptions and covers the range") {
    std::vector<int> hits(100, 0);
    parallel_for(100, 4, [&](size_t i) { hits[i] = 1; });
    for (int h : hits) REQUIRE(h == 1);
    REQUIRE_THROWS_AS(parallel_for(10, 3,
                                   [&](size_t i) {
                                       if (i == 7) throw Error("boom");
                                   }),
                      Error);
}
