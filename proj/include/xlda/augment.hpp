#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlda/corpus.hpp"
#include "xlda/hash.hpp"
#include "xlda/types.hpp"

namespace xlda {

enum class Setting { monolingual, dmt, xlda };

inline const char* setting_name(Setting s) {
    switch (s) {
        case Setting::monolingual: return "monolingual";
        case Setting::dmt: return "dmt";
        case Setting::xlda: return "xlda";
    }
    return "?";
}

inline Setting parse_setting(std::string_view s) {
    if (s == "monolingual") return Setting::monolingual;
    if (s == "dmt") return Setting::dmt;
    if (s == "xlda") return Setting::xlda;
    throw Error("unknown setting: '" + std::string(s) + "'");
}

enum class DirectionMode { both, single_random };

inline const char* direction_mode_name(DirectionMode m) {
    return m == DirectionMode::both ? "both" : "single_random";
}

enum class BalanceMode { all, uniform_sample };

inline const char* balance_mode_name(BalanceMode m) {
    return m == BalanceMode::all ? "all" : "uniform_sample";
}

// How a multi-language training set is composed. The pairwise protocol pins
// the cross-only structure; direction multiplicity and multi-augmentor
// apportionment are policy knobs recorded in the output metadata.
struct CompositionPolicy {
    DirectionMode direction_mode = DirectionMode::both;
    bool include_monolingual = false;
    BalanceMode balance = BalanceMode::all;
    std::optional<size_t> sample_size;
    std::optional<uint64_t> seed;  // required by single_random and uniform_sample

    uint64_t require_seed(const char* what) const {
        if (!seed) throw Error(std::string(what) + " requires a seed");
        return *seed;
    }
};

struct AugmentedExample {
    std::string source_id;
    std::string premise;
    LanguageId premise_lang;
    std::string hypothesis;
    LanguageId hypothesis_lang;
    Label label = Label::neutral;

    bool operator==(const AugmentedExample&) const = default;
};

struct AugmentedDataset {
    std::vector<AugmentedExample> examples;
    Setting setting = Setting::monolingual;
    LanguageId target;
    std::vector<LanguageId> augmentors;
    DirectionMode direction_mode = DirectionMode::both;
    bool include_monolingual = false;
    BalanceMode balance = BalanceMode::all;
    uint64_t seed = 0;
    size_t skipped_ids = 0;  // ids lacking coverage in a required language

    size_t size() const { return examples.size(); }

    bool operator==(const AugmentedDataset&) const = default;
};

namespace detail {

inline void require_language(const AlignedCorpus& corpus, const LanguageId& lang) {
    if (!corpus.has_language(lang))
        throw Error("language '" + lang.str() + "' not present in corpus");
}

inline AugmentedExample make_example(const NliExample& p, const LanguageId& plang,
                                     const NliExample& h, const LanguageId& hlang) {
    AugmentedExample ex;
    ex.source_id = p.id;
    ex.premise = p.premise;
    ex.premise_lang = plang;
    ex.hypothesis = h.hypothesis;
    ex.hypothesis_lang = hlang;
    ex.label = p.label;
    return ex;
}

// Direction draw for single_random: keyed by (seed, id) so the outcome does
// not depend on iteration order. 0 = premise in target, 1 = premise in
// augmentor.
inline int direction_draw(uint64_t seed, const std::string& id) {
    return static_cast<int>(splitmix64(seed ^ fnv1a64(id)) & 1);
}

}  // namespace detail

// Plain single-language training set: (premise, hypothesis) both in target.
// Ids lacking the target are skipped with a count; output sorted by id.
inline AugmentedDataset build_monolingual(const AlignedCorpus& corpus, const LanguageId& target) {
    detail::require_language(corpus, target);
    AugmentedDataset ds;
    ds.setting = Setting::monolingual;
    ds.target = target;
    for (const auto& [id, versions] : corpus.examples()) {
        auto it = versions.find(target);
        if (it == versions.end()) {
            ++ds.skipped_ids;
            continue;
        }
        ds.examples.push_back(detail::make_example(it->second, target, it->second, target));
    }
    return ds;
}

// Disjoint multilingual training: translated copies aggregated so that each
// example stays in one language.
inline AugmentedDataset build_dmt(const AlignedCorpus& corpus,
                                  const std::vector<LanguageId>& languages,
                                  const CompositionPolicy& policy) {
    if (languages.empty()) throw Error("build_dmt: empty language list");
    for (const auto& l : languages) detail::require_language(corpus, l);
    {
        std::set<LanguageId> uniq(languages.begin(), languages.end());
        if (uniq.size() != languages.size()) throw Error("build_dmt: duplicate language entries");
    }

    AugmentedDataset ds;
    ds.setting = Setting::dmt;
    ds.target = languages.front();
    ds.augmentors = languages;
    ds.balance = policy.balance;
    for (const auto& [id, versions] : corpus.examples()) {
        bool any = false;
        for (const auto& lang : languages) {
            auto it = versions.find(lang);
            if (it == versions.end()) continue;
            any = true;
            ds.examples.push_back(detail::make_example(it->second, lang, it->second, lang));
        }
        if (!any) ++ds.skipped_ids;
    }
    if (policy.balance == BalanceMode::uniform_sample) {
        if (!policy.sample_size) throw Error("uniform_sample requires sample_size");
        size_t want = *policy.sample_size;
        if (want > ds.examples.size())
            throw Error("sample_size " + std::to_string(want) + " exceeds pool size " +
                        std::to_string(ds.examples.size()));
        uint64_t seed = policy.require_seed("uniform_sample");
        ds.seed = seed;
        Rng rng(seed);
        auto picks = rng.sample_indices(ds.examples.size(), want);
        std::sort(picks.begin(), picks.end());
        std::vector<AugmentedExample> kept;
        kept.reserve(want);
        for (size_t i : picks) kept.push_back(std::move(ds.examples[i]));
        ds.examples = std::move(kept);
    }
    return ds;
}

// Pairwise cross-lingual set: per id covered in both languages, one field in
// the target and the other in the augmentor, never both in the same
// language unless include_monolingual adds the target-monolingual example.
// Per-id order: [monolingual], (premise=target), (premise=augmentor).
inline AugmentedDataset build_xlda_pairwise(const AlignedCorpus& corpus, const LanguageId& target,
                                            const LanguageId& augmentor,
                                            const CompositionPolicy& policy) {
    if (target == augmentor) throw Error("target and augmentor must differ");
    detail::require_language(corpus, target);
    detail::require_language(corpus, augmentor);

    AugmentedDataset ds;
    ds.setting = Setting::xlda;
    ds.target = target;
    ds.augmentors = {augmentor};
    ds.direction_mode = policy.direction_mode;
    ds.include_monolingual = policy.include_monolingual;
    uint64_t seed = 0;
    if (policy.direction_mode == DirectionMode::single_random) {
        seed = policy.require_seed("single_random");
        ds.seed = seed;
    }
    for (const auto& [id, versions] : corpus.examples()) {
        auto t = versions.find(target);
        auto a = versions.find(augmentor);
        if (t == versions.end() || a == versions.end()) {
            ++ds.skipped_ids;
            continue;
        }
        if (policy.include_monolingual)
            ds.examples.push_back(detail::make_example(t->second, target, t->second, target));
        AugmentedExample fwd = detail::make_example(t->second, target, a->second, augmentor);
        AugmentedExample rev = detail::make_example(a->second, augmentor, t->second, target);
        if (policy.direction_mode == DirectionMode::both) {
            ds.examples.push_back(std::move(fwd));
            ds.examples.push_back(std::move(rev));
        } else {
            ds.examples.push_back(detail::direction_draw(seed, id) == 0 ? std::move(fwd)
                                                                        : std::move(rev));
        }
    }
    return ds;
}

// Multi-augmentor set: concatenation of the pairwise sets over augmentors in
// order, de-duplicated by (source_id, premise_lang, hypothesis_lang), with
// an optional uniform sample to keep the set size constant across k.
inline AugmentedDataset build_xlda_multi(const AlignedCorpus& corpus, const LanguageId& target,
                                         const std::vector<LanguageId>& augmentors,
                                         const CompositionPolicy& policy) {
    if (augmentors.empty()) throw Error("build_xlda_multi: empty augmentor list");
    {
        std::set<LanguageId> uniq(augmentors.begin(), augmentors.end());
        if (uniq.size() != augmentors.size())
            throw Error("build_xlda_multi: duplicate augmentor entries");
    }

    AugmentedDataset ds;
    ds.setting = Setting::xlda;
    ds.target = target;
    ds.augmentors = augmentors;
    ds.direction_mode = policy.direction_mode;
    ds.include_monolingual = policy.include_monolingual;
    ds.balance = policy.balance;

    std::set<std::tuple<std::string, LanguageId, LanguageId>> seen;
    size_t max_skipped = 0;
    for (const auto& aug : augmentors) {
        AugmentedDataset pair = build_xlda_pairwise(corpus, target, aug, policy);
        ds.seed = pair.seed;
        max_skipped = std::max(max_skipped, pair.skipped_ids);
        for (auto& ex : pair.examples) {
            if (seen.emplace(ex.source_id, ex.premise_lang, ex.hypothesis_lang).second)
                ds.examples.push_back(std::move(ex));
        }
    }
    ds.skipped_ids = max_skipped;

    // Final ordering rule: id, then augmentor order, then direction.
    auto lang_rank = [&](const LanguageId& l) {
        if (l == target) return size_t{0};
        auto it = std::find(augmentors.begin(), augmentors.end(), l);
        return static_cast<size_t>(it - augmentors.begin()) + 1;
    };
    std::stable_sort(ds.examples.begin(), ds.examples.end(),
                     [&](const AugmentedExample& x, const AugmentedExample& y) {
                         if (x.source_id != y.source_id) return x.source_id < y.source_id;
                         // monolingual first, then by augmentor position, then
                         // direction (premise=target before premise=augmentor)
                         size_t xa = std::max(lang_rank(x.premise_lang), lang_rank(x.hypothesis_lang));
                         size_t ya = std::max(lang_rank(y.premise_lang), lang_rank(y.hypothesis_lang));
                         if (xa != ya) return xa < ya;
                         return lang_rank(x.premise_lang) < lang_rank(y.premise_lang);
                     });

    if (policy.balance == BalanceMode::uniform_sample) {
        if (!policy.sample_size) throw Error("uniform_sample requires sample_size");
        size_t want = *policy.sample_size;
        if (want > ds.examples.size())
            throw Error("sample_size " + std::to_string(want) + " exceeds pool size " +
                        std::to_string(ds.examples.size()));
        uint64_t seed = policy.require_seed("uniform_sample");
        ds.seed = seed;
        Rng rng(seed);
        auto picks = rng.sample_indices(ds.examples.size(), want);
        std::sort(picks.begin(), picks.end());
        std::vector<AugmentedExample> kept;
        kept.reserve(want);
        for (size_t i : picks) kept.push_back(std::move(ds.examples[i]));
        ds.examples = std::move(kept);
    }
    return ds;
}

// JSONL with a leading {"_meta":...} record; byte-deterministic for a given
// dataset.
inline void write_dataset(const AugmentedDataset& ds, std::ostream& out) {
    nlohmann::ordered_json meta;
    meta["setting"] = setting_name(ds.setting);
    meta["target"] = ds.target.str();
    nlohmann::json augs = nlohmann::json::array();
    for (const auto& a : ds.augmentors) augs.push_back(a.str());
    meta["augmentors"] = augs;
    meta["mode"] = direction_mode_name(ds.direction_mode);
    meta["include_monolingual"] = ds.include_monolingual;
    meta["balance"] = balance_mode_name(ds.balance);
    meta["seed"] = ds.seed;
    meta["skipped_ids"] = ds.skipped_ids;
    nlohmann::ordered_json header;
    header["_meta"] = meta;
    out << header.dump() << "\n";
    for (const auto& ex : ds.examples) {
        nlohmann::ordered_json j;
        j["source_id"] = ex.source_id;
        j["premise"] = ex.premise;
        j["premise_lang"] = ex.premise_lang.str();
        j["hypothesis"] = ex.hypothesis;
        j["hypothesis_lang"] = ex.hypothesis_lang.str();
        j["label"] = label_name(ex.label);
        out << j.dump() << "\n";
    }
}

inline void write_dataset(const AugmentedDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_dataset(ds, out);
}

inline AugmentedDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    AugmentedDataset ds;
    std::string line;
    size_t lineno = 0;
    bool have_meta = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::string where = path + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(where + ": malformed JSON: " + e.what());
        }
        if (j.contains("_meta")) {
            const auto& meta = j["_meta"];
            ds.setting = parse_setting(meta.at("setting").get<std::string>());
            ds.target = LanguageId(meta.at("target").get<std::string>());
            for (const auto& a : meta.at("augmentors")) ds.augmentors.push_back(LanguageId(a.get<std::string>()));
            ds.direction_mode = meta.at("mode").get<std::string>() == "both" ? DirectionMode::both
                                                                             : DirectionMode::single_random;
            ds.include_monolingual = meta.value("include_monolingual", false);
            ds.balance = meta.value("balance", std::string("all")) == "all" ? BalanceMode::all
                                                                            : BalanceMode::uniform_sample;
            ds.seed = meta.value("seed", uint64_t{0});
            ds.skipped_ids = meta.value("skipped_ids", size_t{0});
            have_meta = true;
            continue;
        }
        AugmentedExample ex;
        ex.source_id = detail::require_string(j, "source_id", where);
        ex.premise = detail::require_string(j, "premise", where);
        ex.premise_lang = LanguageId(detail::require_string(j, "premise_lang", where));
        ex.hypothesis = detail::require_string(j, "hypothesis", where);
        ex.hypothesis_lang = LanguageId(detail::require_string(j, "hypothesis_lang", where));
        ex.label = parse_label(detail::require_string(j, "label", where));
        ds.examples.push_back(std::move(ex));
    }
    if (!have_meta) throw Error(path + ": missing _meta header record");
    return ds;
}

}  // namespace xlda
