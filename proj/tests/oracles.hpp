#pragma once

// Brute-force oracles for the set-construction and selection operations.
// These deliberately share no code with the library paths they check: plain
// nested loops over the corpus and plain sort-and-scan over matrices.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "xlda/augment.hpp"
#include "xlda/corpus.hpp"
#include "xlda/selection.hpp"

namespace oracle {

// (source_id, premise_lang, premise, hypothesis_lang, hypothesis, label)
using Row = std::tuple<std::string, std::string, std::string, std::string, std::string, std::string>;

inline Row row_of(const xlda::AugmentedExample& ex) {
    return {ex.source_id, ex.premise_lang.str(), ex.premise, ex.hypothesis_lang.str(),
            ex.hypothesis, xlda::label_name(ex.label)};
}

inline std::multiset<Row> rows_of(const xlda::AugmentedDataset& ds) {
    std::multiset<Row> out;
    for (const auto& ex : ds.examples) out.insert(row_of(ex));
    return out;
}

inline std::multiset<Row> enumerate_monolingual(const xlda::AlignedCorpus& corpus,
                                                const xlda::LanguageId& target) {
    std::multiset<Row> out;
    for (const auto& [id, versions] : corpus.examples()) {
        auto it = versions.find(target);
        if (it == versions.end()) continue;
        out.insert({id, target.str(), it->second.premise, target.str(), it->second.hypothesis,
                    xlda::label_name(it->second.label)});
    }
    return out;
}

inline std::multiset<Row> enumerate_dmt(const xlda::AlignedCorpus& corpus,
                                        const std::vector<xlda::LanguageId>& languages) {
    std::multiset<Row> out;
    for (const auto& [id, versions] : corpus.examples()) {
        for (const auto& lang : languages) {
            auto it = versions.find(lang);
            if (it == versions.end()) continue;
            out.insert({id, lang.str(), it->second.premise, lang.str(), it->second.hypothesis,
                        xlda::label_name(it->second.label)});
        }
    }
    return out;
}

inline std::multiset<Row> enumerate_xlda_pairwise(const xlda::AlignedCorpus& corpus,
                                                  const xlda::LanguageId& target,
                                                  const xlda::LanguageId& augmentor,
                                                  bool include_monolingual) {
    std::multiset<Row> out;
    for (const auto& [id, versions] : corpus.examples()) {
        auto t = versions.find(target);
        auto a = versions.find(augmentor);
        if (t == versions.end() || a == versions.end()) continue;
        const char* label = xlda::label_name(t->second.label);
        if (include_monolingual)
            out.insert({id, target.str(), t->second.premise, target.str(), t->second.hypothesis, label});
        out.insert({id, target.str(), t->second.premise, augmentor.str(), a->second.hypothesis, label});
        out.insert({id, augmentor.str(), a->second.premise, target.str(), t->second.hypothesis, label});
    }
    return out;
}

inline std::multiset<Row> enumerate_xlda_multi(const xlda::AlignedCorpus& corpus,
                                               const xlda::LanguageId& target,
                                               const std::vector<xlda::LanguageId>& augmentors,
                                               bool include_monolingual) {
    std::set<Row> uniq;  // de-duplicated by full row, matching the builder's key
    for (const auto& aug : augmentors) {
        for (const auto& row : enumerate_xlda_pairwise(corpus, target, aug, include_monolingual))
            uniq.insert(row);
    }
    return {uniq.begin(), uniq.end()};
}

// Number of ids covered in every listed language.
inline size_t covered_ids(const xlda::AlignedCorpus& corpus,
                          const std::vector<xlda::LanguageId>& langs) {
    size_t n = 0;
    for (const auto& [id, versions] : corpus.examples()) {
        bool all = true;
        for (const auto& l : langs)
            if (!versions.count(l)) all = false;
        if (all) ++n;
    }
    return n;
}

// Independent sort-and-cut over the (augmentor, delta) list.
struct ScheduleOracle {
    std::vector<std::pair<xlda::LanguageId, double>> ranked;
    size_t cut = 0;
};

inline ScheduleOracle schedule_oracle(const xlda::PairwiseMatrix& m, const xlda::LanguageId& target) {
    ScheduleOracle s;
    for (const auto& a : m.languages()) {
        if (a == target) continue;
        s.ranked.emplace_back(a, m.delta(target, a));
    }
    std::stable_sort(s.ranked.begin(), s.ranked.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    s.cut = s.ranked.size();
    for (size_t i = 0; i < s.ranked.size(); ++i) {
        if (s.ranked[i].second < 0) {
            s.cut = i;
            break;
        }
    }
    return s;
}

}  // namespace oracle
