#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlda/types.hpp"
#include "xlda/unicode.hpp"

namespace xlda {

struct NliExample {
    std::string id;
    std::string premise;
    std::string hypothesis;
    Label label = Label::neutral;

    bool operator==(const NliExample&) const = default;
};

struct QaExample {
    std::string id;
    std::string context;
    std::string question;
    std::string answer_text;
    size_t answer_start = 0;  // offset into context, in Unicode scalar values

    bool operator==(const QaExample&) const = default;
};

// Parallel versions of each example, keyed by id then language. Immutable
// once loaded; construction is permissive (validate() is the auditor, the
// loaders are the gatekeepers).
class AlignedCorpus {
public:
    using LangMap = std::map<LanguageId, NliExample>;

    void add(const LanguageId& lang, NliExample ex) {
        if (std::find(languages_.begin(), languages_.end(), lang) == languages_.end()) {
            languages_.insert(std::upper_bound(languages_.begin(), languages_.end(), lang), lang);
        }
        examples_[ex.id][lang] = std::move(ex);
    }

    const std::vector<LanguageId>& languages() const { return languages_; }
    const std::map<std::string, LangMap>& examples() const { return examples_; }
    size_t size() const { return examples_.size(); }

    bool has_language(const LanguageId& lang) const {
        return std::find(languages_.begin(), languages_.end(), lang) != languages_.end();
    }

    const NliExample* find(const std::string& id, const LanguageId& lang) const {
        auto it = examples_.find(id);
        if (it == examples_.end()) return nullptr;
        auto jt = it->second.find(lang);
        return jt == it->second.end() ? nullptr : &jt->second;
    }

    bool positional_ids() const { return positional_ids_; }
    void set_positional_ids(bool v) { positional_ids_ = v; }

    bool operator==(const AlignedCorpus& o) const {
        return languages_ == o.languages_ && examples_ == o.examples_;
    }

private:
    std::map<std::string, LangMap> examples_;
    std::vector<LanguageId> languages_;  // sorted, unique
    bool positional_ids_ = false;
};

struct ValidationReport {
    struct Mismatch {
        std::string id;
        std::vector<std::pair<LanguageId, Label>> versions;
    };

    std::map<LanguageId, size_t> per_language_counts;
    std::vector<Mismatch> label_mismatches;
    std::vector<std::pair<std::string, LanguageId>> missing;  // (id, absent language)
    std::vector<std::string> duplicate_ids;

    bool fully_aligned() const { return label_mismatches.empty() && missing.empty(); }
};

inline ValidationReport validate(const AlignedCorpus& corpus) {
    ValidationReport rep;
    for (const auto& lang : corpus.languages()) rep.per_language_counts[lang] = 0;
    for (const auto& [id, versions] : corpus.examples()) {
        std::set<Label> labels;
        for (const auto& [lang, ex] : versions) {
            ++rep.per_language_counts[lang];
            labels.insert(ex.label);
        }
        if (labels.size() > 1) {
            ValidationReport::Mismatch m;
            m.id = id;
            for (const auto& [lang, ex] : versions) m.versions.emplace_back(lang, ex.label);
            rep.label_mismatches.push_back(std::move(m));
        }
        for (const auto& lang : corpus.languages()) {
            if (!versions.count(lang)) rep.missing.emplace_back(id, lang);
        }
    }
    return rep;
}

namespace detail {

inline std::string require_string(const nlohmann::json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end()) throw Error(where + ": missing required field '" + field + "'");
    if (!it->is_string()) throw Error(where + ": field '" + field + "' must be a string");
    return it->get<std::string>();
}

inline void check_nli_fields(const NliExample& ex, const std::string& where) {
    if (trim(ex.premise).empty()) throw Error(where + ": empty premise");
    if (trim(ex.hypothesis).empty()) throw Error(where + ": empty hypothesis");
}

// Shared by the JSONL and TSV loaders: reject duplicate (id, lang) and
// label flips within one file.
inline void add_checked(AlignedCorpus& corpus, const LanguageId& lang, NliExample ex,
                        const std::string& where) {
    if (corpus.find(ex.id, lang))
        throw Error(where + ": duplicate example for id '" + ex.id + "' lang '" + lang.str() + "'");
    auto it = corpus.examples().find(ex.id);
    if (it != corpus.examples().end()) {
        for (const auto& [other_lang, other] : it->second) {
            if (other.label != ex.label) {
                throw Error(where + ": label mismatch for id '" + ex.id + "': " + other_lang.str() +
                            "=" + label_name(other.label) + " vs " + lang.str() + "=" +
                            label_name(ex.label));
            }
        }
    }
    corpus.add(lang, std::move(ex));
}

}  // namespace detail

// One JSON object per line: {"id","lang","premise","hypothesis","label"}.
// "lang" may be omitted when default_lang is given. This is the canonical
// on-disk corpus format; everything else is an import path.
inline AlignedCorpus load_nli_jsonl(const std::string& path,
                                    std::optional<LanguageId> default_lang = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    AlignedCorpus corpus;
    std::string line;
    size_t lineno = 0;
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
        if (!j.is_object()) throw Error(where + ": line is not a JSON object");
        NliExample ex;
        ex.id = detail::require_string(j, "id", where);
        LanguageId lang;
        if (j.contains("lang")) {
            lang = LanguageId(detail::require_string(j, "lang", where));
        } else if (default_lang) {
            lang = *default_lang;
        } else {
            throw Error(where + ": missing required field 'lang'");
        }
        ex.premise = detail::require_string(j, "premise", where);
        ex.hypothesis = detail::require_string(j, "hypothesis", where);
        ex.label = parse_label(detail::require_string(j, "label", where));
        detail::check_nli_fields(ex, where);
        detail::add_checked(corpus, lang, std::move(ex), where);
    }
    return corpus;
}

inline void write_nli_jsonl(const AlignedCorpus& corpus, std::ostream& out) {
    for (const auto& [id, versions] : corpus.examples()) {
        for (const auto& [lang, ex] : versions) {
            nlohmann::ordered_json j;
            j["id"] = ex.id;
            j["lang"] = lang.str();
            j["premise"] = ex.premise;
            j["hypothesis"] = ex.hypothesis;
            j["label"] = label_name(ex.label);
            out << j.dump() << "\n";
        }
    }
}

inline void write_nli_jsonl(const AlignedCorpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_nli_jsonl(corpus, out);
}

// Column roles for TSV import.
enum class TsvRole { id, premise, hypothesis, label };

inline TsvRole parse_tsv_role(std::string_view s) {
    if (s == "id") return TsvRole::id;
    if (s == "premise") return TsvRole::premise;
    if (s == "hypothesis") return TsvRole::hypothesis;
    if (s == "label") return TsvRole::label;
    throw Error("unknown TSV column role: '" + std::string(s) + "'");
}

// Loose reader for XNLI-format TSV, one language per file. When no id column
// is mapped, the 0-based row index becomes the id and the corpus is flagged
// positional (merges then require identical row sets).
inline AlignedCorpus load_nli_tsv(const std::string& path, const LanguageId& lang,
                                  const std::map<std::string, TsvRole>& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);

    auto split_tabs = [](const std::string& s) {
        std::vector<std::string> out;
        size_t start = 0;
        for (size_t i = 0; i <= s.size(); ++i) {
            if (i == s.size() || s[i] == '\t') {
                out.push_back(s.substr(start, i - start));
                start = i + 1;
            }
        }
        return out;
    };

    std::string header_line;
    if (!std::getline(in, header_line)) throw Error(path + ": missing header row");
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    auto header = split_tabs(header_line);

    std::map<TsvRole, size_t> role_index;
    for (const auto& [name, role] : columns) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(path + ": column '" + name + "' not found in header");
        if (role_index.count(role)) throw Error(path + ": role mapped twice");
        role_index[role] = static_cast<size_t>(it - header.begin());
    }
    for (TsvRole need : {TsvRole::premise, TsvRole::hypothesis, TsvRole::label}) {
        if (!role_index.count(need)) throw Error(path + ": no column mapped for required role");
    }
    bool positional = !role_index.count(TsvRole::id);

    AlignedCorpus corpus;
    corpus.set_positional_ids(positional);
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string where = path + ": row " + std::to_string(row);
        auto fields = split_tabs(line);
        if (fields.size() != header.size())
            throw Error(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
        NliExample ex;
        ex.id = positional ? std::to_string(row) : fields[role_index[TsvRole::id]];
        ex.premise = fields[role_index[TsvRole::premise]];
        ex.hypothesis = fields[role_index[TsvRole::hypothesis]];
        ex.label = parse_label(fields[role_index[TsvRole::label]]);
        detail::check_nli_fields(ex, where);
        detail::add_checked(corpus, lang, std::move(ex), where);
        ++row;
    }
    return corpus;
}

// Merge per-language corpora into one aligned corpus. Identical (id, lang)
// entries deduplicate; conflicting ones are errors. Label flips across
// languages are validate()'s business, not merge's.
inline AlignedCorpus merge(const AlignedCorpus& a, const AlignedCorpus& b) {
    if (a.positional_ids() || b.positional_ids()) {
        std::set<std::string> ids_a, ids_b;
        for (const auto& [id, _] : a.examples()) ids_a.insert(id);
        for (const auto& [id, _] : b.examples()) ids_b.insert(id);
        if (!ids_a.empty() && !ids_b.empty() && ids_a != ids_b)
            throw Error("cannot merge positional-id corpora with different row sets");
    }
    AlignedCorpus out = a;
    out.set_positional_ids(a.positional_ids() || b.positional_ids());
    for (const auto& [id, versions] : b.examples()) {
        for (const auto& [lang, ex] : versions) {
            if (const NliExample* existing = out.find(id, lang)) {
                if (!(*existing == ex))
                    throw Error("merge conflict for id '" + id + "' lang '" + lang.str() + "'");
                continue;
            }
            out.add(lang, ex);
        }
    }
    return out;
}

struct SquadLoadResult {
    std::vector<QaExample> examples;
    size_t skipped = 0;  // answers that failed re-verification against the context
    std::vector<std::string> skipped_ids;
};

// Standard SQuAD v1.1 nested layout. Takes the first answer of each qa and
// re-verifies answer_start (counted in Unicode scalar values, the SQuAD
// convention) against the context; inconsistent examples are skipped with a
// count rather than failing the load.
inline SquadLoadResult load_squad_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": malformed JSON: " + std::string(e.what()));
    }
    if (!root.is_object() || !root.contains("data") || !root["data"].is_array())
        throw Error(path + ": not a SQuAD file (missing 'data' array)");

    SquadLoadResult result;
    size_t anon = 0;
    for (const auto& article : root["data"]) {
        if (!article.contains("paragraphs") || !article["paragraphs"].is_array())
            throw Error(path + ": article without 'paragraphs' array");
        for (const auto& para : article["paragraphs"]) {
            std::string context = detail::require_string(para, "context", path);
            std::u32string context32 = utf8_decode(context);
            if (!para.contains("qas") || !para["qas"].is_array())
                throw Error(path + ": paragraph without 'qas' array");
            for (const auto& qa : para["qas"]) {
                QaExample ex;
                ex.id = qa.contains("id") && qa["id"].is_string() ? qa["id"].get<std::string>()
                                                                  : "qa" + std::to_string(anon);
                ++anon;
                ex.context = context;
                ex.question = detail::require_string(qa, "question", path);
                if (!qa.contains("answers") || !qa["answers"].is_array() || qa["answers"].empty())
                    throw Error(path + ": qa '" + ex.id + "' has no answers");
                const auto& ans = qa["answers"][0];
                ex.answer_text = detail::require_string(ans, "text", path);
                if (!ans.contains("answer_start") || !ans["answer_start"].is_number_integer())
                    throw Error(path + ": qa '" + ex.id + "' missing integer answer_start");
                auto start = ans["answer_start"].get<int64_t>();
                std::u32string answer32 = utf8_decode(ex.answer_text);
                bool ok = start >= 0 &&
                          static_cast<size_t>(start) + answer32.size() <= context32.size() &&
                          context32.compare(static_cast<size_t>(start), answer32.size(), answer32) == 0;
                if (!ok) {
                    ++result.skipped;
                    result.skipped_ids.push_back(ex.id);
                    continue;
                }
                ex.answer_start = static_cast<size_t>(start);
                result.examples.push_back(std::move(ex));
            }
        }
    }
    return result;
}

}  // namespace xlda
