#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "xlda/corpus.hpp"
#include "xlda/hash.hpp"
#include "xlda/types.hpp"

namespace xlda {

// Desk-scale stand-in for an aligned multilingual corpus: base examples are
// generated in the pivot language (languages[0]) and every other language is
// a bijective token cipher of the pivot, so alignment and label invariance
// hold by construction.
//
// The label rule is the set relation between the two token sets: entailment
// iff the hypothesis tokens are contained in the premise's, contradiction
// iff disjoint, neutral otherwise. The generator draws each class's tokens
// from a class-slanted region of the vocabulary so that the task is
// learnable by a bag-of-words model while the rule stays exactly checkable.
struct SyntheticCorpusSpec {
    size_t n_ids = 500;
    size_t n_eval_ids = 100;
    std::vector<LanguageId> languages;
    size_t vocab_size = 120;
    uint64_t cipher_seed = 0;

    void check() const {
        if (vocab_size < 50) throw Error("synthetic corpus: vocab_size must be >= 50");
        if (n_ids < 10) throw Error("synthetic corpus: n_ids must be >= 10");
        if (languages.size() < 2) throw Error("synthetic corpus: need >= 2 languages");
    }
};

// entailment iff hyp tokens (as a set) are a subset of the premise tokens,
// contradiction iff the sets are disjoint, neutral otherwise.
inline Label subset_disjoint_label(const std::vector<size_t>& premise,
                                   const std::vector<size_t>& hypothesis) {
    size_t shared = 0;
    for (size_t h : hypothesis) {
        if (std::find(premise.begin(), premise.end(), h) != premise.end()) ++shared;
    }
    if (shared == hypothesis.size()) return Label::entailment;
    if (shared == 0) return Label::contradiction;
    return Label::neutral;
}

namespace detail {

struct SyntheticExample {
    std::vector<size_t> premise;  // vocabulary indices, distinct
    std::vector<size_t> hypothesis;
    Label label;
};

// Tokens for one example, drawn per id so generation is order-independent.
inline SyntheticExample draw_example(const std::string& id, const SyntheticCorpusSpec& spec) {
    Rng rng(splitmix64(spec.cipher_seed ^ fnv1a64(id)));
    size_t v = spec.vocab_size;
    size_t region = v / 3;
    int cls = static_cast<int>(rng.below(3));

    // Draw k distinct indices, biased into one third of the vocabulary. The
    // bias sets task difficulty: strong enough for a bag-of-words learner to
    // beat chance comfortably, weak enough to keep accuracies off the
    // ceiling so grid deltas stay informative.
    auto draw_biased = [&](size_t k, size_t region_base, std::vector<size_t>& out,
                           const std::vector<size_t>& avoid) {
        while (out.size() < k) {
            size_t idx;
            if (rng.below(100) < 55) {
                idx = region_base + rng.below(region);
            } else {
                idx = rng.below(v);
            }
            if (std::find(out.begin(), out.end(), idx) != out.end()) continue;
            if (std::find(avoid.begin(), avoid.end(), idx) != avoid.end()) continue;
            out.push_back(idx);
        }
    };

    SyntheticExample ex;
    size_t premise_len = 6 + rng.below(4);
    size_t hyp_len = 2 + rng.below(3);
    size_t region_base = static_cast<size_t>(cls) * region;
    draw_biased(premise_len, region_base, ex.premise, {});

    if (cls == 0) {  // entailment: hypothesis drawn from the premise
        auto picks = rng.sample_indices(ex.premise.size(), std::min(hyp_len, ex.premise.size()));
        for (size_t i : picks) ex.hypothesis.push_back(ex.premise[i]);
    } else if (cls == 1) {  // contradiction: disjoint from the premise
        draw_biased(hyp_len, region_base, ex.hypothesis, ex.premise);
    } else {  // neutral: at least one shared and one novel token
        ex.hypothesis.push_back(ex.premise[rng.below(ex.premise.size())]);
        draw_biased(hyp_len < 2 ? 2 : hyp_len, region_base, ex.hypothesis, ex.premise);
    }
    ex.label = subset_disjoint_label(ex.premise, ex.hypothesis);
    return ex;
}

// languages[0] surfaces the base vocabulary directly; every other language
// maps token i to a language-tagged image of a seeded permutation.
inline std::string surface_token(const SyntheticCorpusSpec& spec, size_t lang_index,
                                 const std::vector<std::vector<size_t>>& perms, size_t token) {
    if (lang_index == 0) return "w" + std::to_string(token);
    return spec.languages[lang_index].str() + "_w" + std::to_string(perms[lang_index][token]);
}

inline std::string surface_text(const SyntheticCorpusSpec& spec, size_t lang_index,
                                const std::vector<std::vector<size_t>>& perms,
                                const std::vector<size_t>& tokens) {
    std::string out;
    for (size_t t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += surface_token(spec, lang_index, perms, t);
    }
    return out;
}

inline AlignedCorpus generate_split(const SyntheticCorpusSpec& spec, const char* id_prefix,
                                    size_t count) {
    std::vector<std::vector<size_t>> perms(spec.languages.size());
    for (size_t j = 1; j < spec.languages.size(); ++j) {
        perms[j].resize(spec.vocab_size);
        std::iota(perms[j].begin(), perms[j].end(), size_t{0});
        Rng rng(splitmix64(spec.cipher_seed ^ fnv1a64(spec.languages[j].str())));
        rng.shuffle(perms[j]);
    }
    AlignedCorpus corpus;
    for (size_t i = 0; i < count; ++i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "%s%06zu", id_prefix, i);
        std::string id(idbuf);
        SyntheticExample base = draw_example(id, spec);
        for (size_t j = 0; j < spec.languages.size(); ++j) {
            NliExample ex;
            ex.id = id;
            ex.premise = surface_text(spec, j, perms, base.premise);
            ex.hypothesis = surface_text(spec, j, perms, base.hypothesis);
            ex.label = base.label;
            corpus.add(spec.languages[j], std::move(ex));
        }
    }
    return corpus;
}

}  // namespace detail

inline std::pair<AlignedCorpus, AlignedCorpus> generate_synthetic_corpus(
    const SyntheticCorpusSpec& spec) {
    spec.check();
    AlignedCorpus train = detail::generate_split(spec, "t", spec.n_ids);
    AlignedCorpus eval = detail::generate_split(spec, "e", spec.n_eval_ids);
    return {std::move(train), std::move(eval)};
}

// Synthetic QA corpus for exercising span recovery. Context words come from
// a "c" vocabulary; the answer span is a run of "ans" tokens that occurs
// nowhere else in the context, inserted at a word position >= 1.
inline std::vector<QaExample> generate_synthetic_qa(size_t count, uint64_t seed) {
    std::vector<QaExample> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "qa%06zu", i);
        std::string id(idbuf);
        Rng rng(splitmix64(seed ^ fnv1a64(id)));

        size_t n_words = 12 + rng.below(9);
        std::vector<std::string> words;
        for (size_t k = 0; k < n_words; ++k)
            words.push_back("c" + std::to_string(rng.below(400)));

        size_t answer_len = 1 + rng.below(3);
        std::vector<std::string> answer_words;
        for (size_t k = 0; k < answer_len; ++k)
            answer_words.push_back("ans" + std::to_string(rng.below(900)) + "x" + std::to_string(k));
        size_t insert_at = 1 + rng.below(words.size() - 1);

        QaExample ex;
        ex.id = id;
        std::string answer_text;
        for (const auto& w : answer_words) {
            if (!answer_text.empty()) answer_text.push_back(' ');
            answer_text += w;
        }
        std::string context;
        for (size_t k = 0; k < words.size(); ++k) {
            if (k == insert_at) {
                if (!context.empty()) context.push_back(' ');
                ex.answer_start = context.size();  // ASCII: bytes == scalar values
                context += answer_text;
            }
            if (!context.empty()) context.push_back(' ');
            context += words[k];
        }
        ex.context = std::move(context);
        ex.answer_text = std::move(answer_text);
        size_t n_q = 4 + rng.below(5);
        std::string question;
        for (size_t k = 0; k < n_q; ++k) {
            if (!question.empty()) question.push_back(' ');
            question += "c" + std::to_string(rng.below(400));
        }
        ex.question = std::move(question);
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace xlda
