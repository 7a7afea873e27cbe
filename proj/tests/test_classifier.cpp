#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "xlda/classifier.hpp"
#include "xlda/harness.hpp"

using namespace xlda;

namespace {

AugmentedExample make_ex(const std::string& id, const std::string& premise,
                         const std::string& hypothesis, Label label) {
    AugmentedExample ex;
    ex.source_id = id;
    ex.premise = premise;
    ex.premise_lang = LanguageId("en");
    ex.hypothesis = hypothesis;
    ex.hypothesis_lang = LanguageId("en");
    ex.label = label;
    return ex;
}

}  // namespace

TEST_CASE("lr_at follows the warmup and decay schedule") {
    TrainerSpec spec;
    spec.warmup_fraction = 0.10;
    spec.peak_lr = 0.1;

    SECTION("peak at the end of warmup, zero at both ends") {
        REQUIRE(lr_at(0, 100, spec) == 0.0);
        REQUIRE(lr_at(10, 100, spec) == spec.peak_lr);
        REQUIRE(lr_at(100, 100, spec) == 0.0);
    }
    SECTION("piecewise linear at every integer step") {
        size_t total = 100;
        size_t warmup = 10;
        for (size_t s = 0; s <= total; ++s) {
            double expect = s <= warmup
                                ? spec.peak_lr * static_cast<double>(s) / warmup
                                : spec.peak_lr * static_cast<double>(total - s) / (total - warmup);
            REQUIRE(lr_at(s, total, spec) == Catch::Approx(expect).margin(1e-12));
        }
    }
    SECTION("continuous and single-peaked") {
        size_t total = 37;
        double prev = lr_at(0, total, spec);
        bool decreasing = false;
        for (size_t s = 1; s <= total; ++s) {
            double cur = lr_at(s, total, spec);
            if (cur < prev) decreasing = true;
            if (decreasing) REQUIRE(cur <= prev);
            prev = cur;
        }
        REQUIRE(lr_at(total, total, spec) == 0.0);
    }
    SECTION("zero warmup starts at the peak") {
        TrainerSpec flat = spec;
        flat.warmup_fraction = 0.0;
        REQUIRE(lr_at(0, 10, flat) == flat.peak_lr);
        REQUIRE(lr_at(10, 10, flat) == 0.0);
    }
    SECTION("out-of-range step") {
        REQUIRE_THROWS_AS(lr_at(101, 100, spec), Error);
        REQUIRE_THROWS_AS(lr_at(0, 0, spec), Error);
    }
}

TEST_CASE("trainer spec validation") {
    TrainerSpec spec;
    spec.feature_dim = 100;  // not a power of two
    REQUIRE_THROWS_AS(spec.check(), Error);
    spec.feature_dim = 256;
    spec.warmup_fraction = 1.0;
    REQUIRE_THROWS_AS(spec.check(), Error);
    spec.warmup_fraction = 0.1;
    spec.check();
}

TEST_CASE("featurize keeps premise and hypothesis subspaces apart") {
    TrainerSpec spec;
    spec.feature_dim = 1 << 18;
    AugmentedExample a = make_ex("1", "tok", "", Label::neutral);
    AugmentedExample b = make_ex("2", "", "tok", Label::neutral);
    FeatureVector fa = featurize(a, spec);
    FeatureVector fb = featurize(b, spec);
    REQUIRE(fa.terms.size() == 1);
    REQUIRE(fb.terms.size() == 1);
    REQUIRE(fa.terms[0].first != fb.terms[0].first);
}

TEST_CASE("featurize counts n-grams per field") {
    TrainerSpec spec;
    spec.feature_dim = 1 << 18;
    spec.ngram_orders = {1, 2};
    AugmentedExample ex = make_ex("1", "a b a", "c d", Label::neutral);
    FeatureVector fv = featurize(ex, spec);
    // premise: unigrams a(x2) b, bigrams "a b" "b a"; hypothesis: c d + "c d"
    double total = 0;
    for (const auto& [bucket, count] : fv.terms) total += count;
    REQUIRE(total == 8.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    TrainerSpec spec;
    spec.feature_dim = 1 << 8;
    spec.seed = 5;

    // Small random-ish batch.
    std::vector<FeatureVector> features;
    std::vector<int> labels;
    Rng rng(17);
    for (int i = 0; i < 12; ++i) {
        std::string premise, hypothesis;
        for (int k = 0; k < 6; ++k) premise += "w" + std::to_string(rng.below(40)) + " ";
        for (int k = 0; k < 3; ++k) hypothesis += "w" + std::to_string(rng.below(40)) + " ";
        features.push_back(featurize(make_ex("x", premise, hypothesis, Label::neutral), spec));
        labels.push_back(static_cast<int>(rng.below(3)));
    }

    LinearClassifier model(spec.feature_dim);
    for (auto& w : model.weights()) w = (rng.uniform01() - 0.5) * 0.2;

    auto grad = model.loss_and_grad(features, labels);

    auto loss_at = [&](size_t idx, double delta) {
        double saved = model.weights()[idx];
        model.weights()[idx] = saved + delta;
        double loss = model.loss_and_grad(features, labels).loss;
        model.weights()[idx] = saved;
        return loss;
    };

    // Probe >= 100 weights: every index touched by the batch plus random ones.
    std::vector<size_t> probes;
    for (const auto& [idx, g] : grad.weight_terms) probes.push_back(idx);
    while (probes.size() < 120) probes.push_back(rng.below(3 * spec.feature_dim));

    const double h = 1e-6;
    size_t probed = 0;
    for (size_t idx : probes) {
        double numeric = (loss_at(idx, h) - loss_at(idx, -h)) / (2 * h);
        double analytic = 0.0;
        for (const auto& [gi, gv] : grad.weight_terms)
            if (gi == idx) analytic = gv;
        double denom = std::max({1.0, std::abs(numeric), std::abs(analytic)});
        REQUIRE(std::abs(numeric - analytic) / denom <= 1e-4);
        ++probed;
    }
    REQUIRE(probed >= 100);

    // Bias gradients too.
    for (int c = 0; c < kNumClasses; ++c) {
        double saved = model.bias()[c];
        model.bias()[c] = saved + h;
        double up = model.loss_and_grad(features, labels).loss;
        model.bias()[c] = saved - h;
        double down = model.loss_and_grad(features, labels).loss;
        model.bias()[c] = saved;
        double numeric = (up - down) / (2 * h);
        REQUIRE(std::abs(numeric - grad.bias[c]) <= 1e-4 * std::max(1.0, std::abs(numeric)));
    }
}

TEST_CASE("train_eval separates a vocabulary-disjoint toy set") {
    // Two examples per class with disjoint vocabularies; a linear model must
    // drive training accuracy to 1 when evaluated on itself.
    AugmentedDataset toy;
    toy.target = LanguageId("en");
    toy.examples = {
        make_ex("1", "aa bb", "cc", Label::entailment),
        make_ex("2", "aa dd", "cc", Label::entailment),
        make_ex("3", "ee ff", "gg", Label::contradiction),
        make_ex("4", "ee hh", "gg", Label::contradiction),
        make_ex("5", "ii jj", "kk", Label::neutral),
        make_ex("6", "ii ll", "kk", Label::neutral),
    };
    TrainerSpec spec;
    spec.feature_dim = 1 << 10;
    spec.epochs = 30;
    spec.batch_size = 2;
    spec.seed = 3;
    EvalResult r = train_eval(toy, toy, spec);
    REQUIRE(r.n_eval == 6);
    REQUIRE(r.correct == 6);
    REQUIRE(r.accuracy() == 1.0);
}

TEST_CASE("train_eval is deterministic") {
    AugmentedDataset ds;
    ds.target = LanguageId("en");
    Rng rng(9);
    for (int i = 0; i < 64; ++i) {
        std::string p, h;
        for (int k = 0; k < 5; ++k) p += "t" + std::to_string(rng.below(30)) + " ";
        for (int k = 0; k < 3; ++k) h += "t" + std::to_string(rng.below(30)) + " ";
        ds.examples.push_back(make_ex(std::to_string(i), p, h, static_cast<Label>(rng.below(3))));
    }
    TrainerSpec spec;
    spec.feature_dim = 1 << 12;
    spec.seed = 42;
    EvalResult a = train_eval(ds, ds, spec);
    EvalResult b = train_eval(ds, ds, spec);
    REQUIRE(a == b);

    TrainerSpec other = spec;
    other.seed = 43;
    EvalResult c = train_eval(ds, ds, other);
    REQUIRE(c.spec_digest != a.spec_digest);
}

TEST_CASE("random labels score near chance") {
    // Labels independent of the text: accuracy must sit near 1/3.
    AugmentedDataset train, eval;
    train.target = eval.target = LanguageId("en");
    Rng rng(31);
    auto gen = [&](AugmentedDataset& ds, int n, const char* prefix) {
        for (int i = 0; i < n; ++i) {
            std::string p, h;
            for (int k = 0; k < 6; ++k) p += "v" + std::to_string(rng.below(50)) + " ";
            for (int k = 0; k < 3; ++k) h += "v" + std::to_string(rng.below(50)) + " ";
            ds.examples.push_back(
                make_ex(prefix + std::to_string(i), p, h, static_cast<Label>(rng.below(3))));
        }
    };
    gen(train, 300, "t");
    gen(eval, 1200, "e");
    TrainerSpec spec;
    spec.feature_dim = 1 << 14;
    spec.seed = 11;
    EvalResult r = train_eval(train, eval, spec);
    REQUIRE(r.accuracy() > 1.0 / 3 - 0.05);
    REQUIRE(r.accuracy() < 1.0 / 3 + 0.05);
}

TEST_CASE("train_eval rejects bad input") {
    AugmentedDataset empty;
    AugmentedDataset one;
    one.examples.push_back(make_ex("1", "a", "b", Label::neutral));
    TrainerSpec spec;
    REQUIRE_THROWS_AS(train_eval(empty, one, spec), Error);
    REQUIRE_THROWS_AS(train_eval(one, empty, spec), Error);
    TrainerSpec bad;
    bad.feature_dim = 100;
    REQUIRE_THROWS_AS(train_eval(one, one, bad), Error);
}
