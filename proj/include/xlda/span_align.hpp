#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlda/corpus.hpp"
#include "xlda/hash.hpp"
#include "xlda/nfc.hpp"
#include "xlda/subprocess.hpp"
#include "xlda/types.hpp"
#include "xlda/unicode.hpp"

namespace xlda {

// Character span, counted in Unicode scalar values, end exclusive.
struct Span {
    size_t start = 0;
    size_t end = 0;

    bool operator==(const Span&) const = default;
};

class Translator {
public:
    virtual ~Translator() = default;
    virtual std::string translate(const std::string& text, const LanguageId& source,
                                  const LanguageId& dest) = 0;
    virtual std::string name() const = 0;
};

enum class RecoveryPhase { exact_first_match, marker_recovered, unrecovered };

inline const char* recovery_phase_name(RecoveryPhase p) {
    switch (p) {
        case RecoveryPhase::exact_first_match: return "exact_first_match";
        case RecoveryPhase::marker_recovered: return "marker_recovered";
        case RecoveryPhase::unrecovered: return "unrecovered";
    }
    return "?";
}

// One translated QA example. Translated texts are stored NFC-normalized so
// that recovered spans index the stored context directly.
struct SpanRecoveryRecord {
    QaExample source;
    LanguageId dest_lang;
    std::string translated_context;
    std::string translated_question;
    std::string translated_answer;
    std::optional<Span> recovered_span;
    RecoveryPhase phase = RecoveryPhase::unrecovered;
    bool excluded_from_training = false;  // marker-phase records under the default policy

    // The string the span points at: the separately translated answer for the
    // exact phase, the inter-marker text for the marker phase.
    std::string recovered_text() const {
        if (!recovered_span) return {};
        std::u32string ctx = utf8_decode(translated_context);
        return utf8_encode(ctx.substr(recovered_span->start, recovered_span->end - recovered_span->start));
    }
};

struct RecoveryStats {
    LanguageId dest_lang;
    size_t total = 0;
    size_t exact_count = 0;
    size_t marker_count = 0;
    size_t unrecovered_count = 0;

    double exact_rate() const { return total == 0 ? 0.0 : static_cast<double>(exact_count) / total; }
    double cumulative_rate() const {
        return total == 0 ? 0.0 : static_cast<double>(exact_count + marker_count) / total;
    }
};

// First-instance exact match of the translated answer inside the translated
// context. Both sides are NFC-normalized and the answer is trimmed; offsets
// index the normalized context.
inline std::optional<Span> recover_span_exact(const std::string& translated_context,
                                              const std::string& translated_answer) {
    std::u32string ctx = nfc_normalize(utf8_decode(translated_context));
    std::u32string ans = nfc_normalize(utf8_decode(trim(translated_answer)));
    if (ans.empty() || ctx.empty()) return std::nullopt;
    size_t pos = ctx.find(ans);
    if (pos == std::u32string::npos) return std::nullopt;
    return Span{pos, pos + ans.size()};
}

// Insert the marker on both sides of the span. The marker must not already
// occur in the context, otherwise recovery counts would be ambiguous.
inline std::string mark_answer(const std::string& context, Span span, const std::string& marker) {
    if (marker.empty()) throw Error("mark_answer: empty marker");
    if (context.find(marker) != std::string::npos)
        throw Error("mark_answer: marker already occurs in context");
    std::u32string ctx = utf8_decode(context);
    std::u32string mk = utf8_decode(marker);
    if (span.start > span.end || span.end > ctx.size())
        throw Error("mark_answer: span out of bounds");
    std::u32string out;
    out.reserve(ctx.size() + 2 * mk.size());
    out.append(ctx, 0, span.start);
    out.append(mk);
    out.append(ctx, span.start, span.end - span.start);
    out.append(mk);
    out.append(ctx, span.end, ctx.size() - span.end);
    return utf8_encode(out);
}

// If the marker survived translation exactly twice, strip both occurrences
// and return the cleaned context plus the inter-marker span. Any other
// marker count means the example stays unrecovered.
inline std::optional<std::pair<std::string, Span>> recover_span_marked(
    const std::string& translated_marked_context, const std::string& marker) {
    if (marker.empty()) throw Error("recover_span_marked: empty marker");
    std::u32string ctx = utf8_decode(translated_marked_context);
    std::u32string mk = utf8_decode(marker);
    std::vector<size_t> hits;
    size_t pos = 0;
    while ((pos = ctx.find(mk, pos)) != std::u32string::npos) {
        hits.push_back(pos);
        pos += mk.size();
    }
    if (hits.size() != 2) return std::nullopt;
    std::u32string cleaned;
    cleaned.reserve(ctx.size() - 2 * mk.size());
    cleaned.append(ctx, 0, hits[0]);
    cleaned.append(ctx, hits[0] + mk.size(), hits[1] - hits[0] - mk.size());
    cleaned.append(ctx, hits[1] + mk.size(), ctx.size() - hits[1] - mk.size());
    Span span{hits[0], hits[1] - mk.size()};
    return std::make_pair(utf8_encode(cleaned), span);
}

inline constexpr const char* kDefaultMarker = "⟦";  // U+27E6, rare in running text

// Two-phase span recovery over a QA dataset: translate context, question and
// answer separately, try first-instance exact matching, and fall back to
// marking the source span and re-translating. Marker-phase records are
// counted either way; include_marker_phase_in_output only controls the
// training-output flag.
inline std::pair<std::vector<SpanRecoveryRecord>, RecoveryStats> align_qa_dataset(
    const std::vector<QaExample>& examples, Translator& translator, const LanguageId& dest,
    const std::string& marker = kDefaultMarker, bool include_marker_phase_in_output = false,
    const LanguageId& source = LanguageId("en")) {
    std::vector<SpanRecoveryRecord> records;
    records.reserve(examples.size());
    RecoveryStats stats;
    stats.dest_lang = dest;

    auto translate_checked = [&](const std::string& text, const std::string& id) {
        std::string out;
        try {
            out = translator.translate(text, source, dest);
        } catch (const std::exception& e) {
            throw Error("translator '" + translator.name() + "' failed on example '" + id +
                        "': " + e.what());
        }
        if (out.empty() && !text.empty())
            throw Error("translator '" + translator.name() + "' returned empty output for example '" +
                        id + "'");
        return out;
    };

    for (const auto& ex : examples) {
        SpanRecoveryRecord rec;
        rec.source = ex;
        rec.dest_lang = dest;
        rec.translated_context = nfc_normalize_utf8(translate_checked(ex.context, ex.id));
        rec.translated_question = nfc_normalize_utf8(translate_checked(ex.question, ex.id));
        rec.translated_answer = nfc_normalize_utf8(trim(translate_checked(ex.answer_text, ex.id)));

        if (auto span = recover_span_exact(rec.translated_context, rec.translated_answer)) {
            rec.recovered_span = *span;
            rec.phase = RecoveryPhase::exact_first_match;
            ++stats.exact_count;
        } else {
            std::string marked;
            try {
                size_t answer_len = utf8_decode(ex.answer_text).size();
                marked = mark_answer(ex.context, Span{ex.answer_start, ex.answer_start + answer_len},
                                     marker);
            } catch (const Error& e) {
                throw Error(std::string(e.what()) + " (example '" + ex.id + "')");
            }
            std::string translated_marked = nfc_normalize_utf8(translate_checked(marked, ex.id));
            if (auto recovered = recover_span_marked(translated_marked, marker)) {
                rec.translated_context = recovered->first;
                rec.recovered_span = recovered->second;
                rec.phase = RecoveryPhase::marker_recovered;
                rec.excluded_from_training = !include_marker_phase_in_output;
                ++stats.marker_count;
            } else {
                rec.phase = RecoveryPhase::unrecovered;
                ++stats.unrecovered_count;
            }
        }
        ++stats.total;
        records.push_back(std::move(rec));
    }
    return {std::move(records), stats};
}

inline void write_recovery_report(const std::vector<RecoveryStats>& stats, std::ostream& out) {
    out << "dest_lang,total,exact_count,exact_rate,marker_count,cumulative_rate,unrecovered_count\n";
    std::vector<const RecoveryStats*> ordered;
    for (const auto& s : stats) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const RecoveryStats* a, const RecoveryStats* b) { return a->dest_lang < b->dest_lang; });
    for (const RecoveryStats* s : ordered) {
        out << s->dest_lang.str() << "," << s->total << "," << s->exact_count << "," << std::fixed
            << std::setprecision(3) << s->exact_rate() << "," << s->marker_count << "," << std::fixed
            << std::setprecision(3) << s->cumulative_rate() << "," << s->unrecovered_count << "\n";
    }
}

inline void write_recovery_report(const std::vector<RecoveryStats>& stats, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_recovery_report(stats, out);
}

// Recovered examples as a translated QA training file. Marker-phase records
// flagged excluded are dropped unless explicitly requested.
inline void write_aligned_jsonl(const std::vector<SpanRecoveryRecord>& records, std::ostream& out,
                                bool include_excluded = false) {
    for (const auto& rec : records) {
        if (!rec.recovered_span) continue;
        if (rec.excluded_from_training && !include_excluded) continue;
        nlohmann::ordered_json j;
        j["id"] = rec.source.id;
        j["dest_lang"] = rec.dest_lang.str();
        j["context"] = rec.translated_context;
        j["question"] = rec.translated_question;
        j["answer_text"] = rec.recovered_text();
        j["answer_start"] = rec.recovered_span->start;
        j["phase"] = recovery_phase_name(rec.phase);
        out << j.dump() << "\n";
    }
}

inline void write_aligned_jsonl(const std::vector<SpanRecoveryRecord>& records,
                                const std::string& path, bool include_excluded = false) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_aligned_jsonl(records, out, include_excluded);
}

// ---------------------------------------------------------------------------
// Mock translators. Deterministic by construction; they exist so the full
// recovery pipeline can be exercised without a translation service.

class IdentityTranslator final : public Translator {
public:
    std::string translate(const std::string& text, const LanguageId&, const LanguageId&) override {
        return text;
    }
    std::string name() const override { return "identity"; }
};

namespace detail {

// Keyed substitution over [a-z0-9] (case preserved for letters). A
// character-level bijection induces a bijective word substitution, which is
// exactly what first-instance matching needs to keep working.
struct CharCipher {
    std::array<char, 26> lower;
    std::array<char, 10> digit;

    explicit CharCipher(uint64_t key) {
        Rng rng(key);
        for (size_t i = 0; i < 26; ++i) lower[i] = static_cast<char>('a' + i);
        for (size_t i = lower.size(); i > 1; --i)
            std::swap(lower[i - 1], lower[rng.below(i)]);
        for (size_t i = 0; i < 10; ++i) digit[i] = static_cast<char>('0' + i);
        for (size_t i = digit.size(); i > 1; --i)
            std::swap(digit[i - 1], digit[rng.below(i)]);
    }

    char map(char c) const {
        if (c >= 'a' && c <= 'z') return lower[c - 'a'];
        if (c >= 'A' && c <= 'Z') return static_cast<char>(lower[c - 'A'] - 'a' + 'A');
        if (c >= '0' && c <= '9') return digit[c - '0'];
        return c;
    }

    std::string apply(const std::string& s) const {
        std::string out = s;
        for (char& c : out) c = map(c);
        return out;
    }
};

}  // namespace detail

// Bijective word substitution with word order preserved: translated answers
// appear verbatim in translated contexts, so phase-1 recovery always
// succeeds on word-aligned answers.
class WordCipherTranslator final : public Translator {
public:
    std::string translate(const std::string& text, const LanguageId&, const LanguageId& dest) override {
        detail::CharCipher cipher(fnv1a64(dest.str()) ^ 0x5ca1ab1eULL);
        return cipher.apply(text);
    }
    std::string name() const override { return "word-cipher"; }
};

// Adversarial mock for the marker phase: permutes word chunks, ciphers words,
// and deletes answer-shaped tokens from unmarked text, so phase 1 fails.
// A marked region is kept contiguous with its markers, so phase 2 succeeds.
// Tokens carrying answer_token_prefix get a '~' sigil in their cipher image;
// nothing else ever maps to '~', which keeps accidental phase-1 matches out.
class ChunkShuffleTranslator final : public Translator {
public:
    explicit ChunkShuffleTranslator(std::string marker = kDefaultMarker,
                                    std::string answer_token_prefix = "ans")
        : marker_(std::move(marker)), answer_prefix_(std::move(answer_token_prefix)) {}

    std::string translate(const std::string& text, const LanguageId&, const LanguageId& dest) override {
        detail::CharCipher cipher(fnv1a64(dest.str()) ^ 0xc0ffeeULL);
        size_t first = text.find(marker_);
        if (first != std::string::npos) {
            size_t second = text.find(marker_, first + marker_.size());
            if (second != std::string::npos &&
                text.find(marker_, second + marker_.size()) == std::string::npos) {
                std::string pre = text.substr(0, first);
                std::string mid = text.substr(first + marker_.size(), second - first - marker_.size());
                std::string post = text.substr(second + marker_.size());
                std::vector<std::string> chunks;
                append_chunks(pre, cipher, chunks);
                chunks.push_back(marker_ + cipher_tokens(mid, cipher) + marker_);
                append_chunks(post, cipher, chunks);
                shuffle_chunks(chunks, fnv1a64(text) ^ fnv1a64(dest.str()));
                return join(chunks);
            }
        }
        std::vector<std::string> chunks;
        append_chunks(text, cipher, chunks);
        if (chunks.empty()) return cipher_tokens(text, cipher);
        shuffle_chunks(chunks, fnv1a64(text) ^ fnv1a64(dest.str()));
        return join(chunks);
    }

    std::string name() const override { return "chunk-shuffle"; }

private:
    static constexpr size_t kChunkWords = 3;

    bool is_answer_token(const std::string& tok) const {
        return tok.size() >= answer_prefix_.size() &&
               tok.compare(0, answer_prefix_.size(), answer_prefix_) == 0;
    }

    std::string cipher_token(const std::string& tok, const detail::CharCipher& cipher) const {
        std::string image = cipher.apply(tok);
        if (is_answer_token(tok)) image.insert(image.begin(), '~');
        return image;
    }

    // No deletion here: used for marked regions and for text made of answer
    // tokens alone, where deleting would break the non-empty contract.
    std::string cipher_tokens(const std::string& s, const detail::CharCipher& cipher) const {
        std::string out;
        for (const auto& tok : split_ws(s)) {
            if (!out.empty()) out.push_back(' ');
            out += cipher_token(tok, cipher);
        }
        return out.empty() ? s : out;
    }

    void append_chunks(const std::string& s, const detail::CharCipher& cipher,
                       std::vector<std::string>& chunks) const {
        std::vector<std::string> kept;
        for (const auto& tok : split_ws(s)) {
            if (is_answer_token(tok)) continue;
            kept.push_back(cipher_token(tok, cipher));
        }
        for (size_t i = 0; i < kept.size(); i += kChunkWords) {
            std::string chunk;
            for (size_t k = i; k < std::min(i + kChunkWords, kept.size()); ++k) {
                if (!chunk.empty()) chunk.push_back(' ');
                chunk += kept[k];
            }
            chunks.push_back(std::move(chunk));
        }
    }

    static std::vector<std::string> split_ws(const std::string& s) {
        std::vector<std::string> out;
        std::istringstream iss(s);
        std::string tok;
        while (iss >> tok) out.push_back(tok);
        return out;
    }

    static void shuffle_chunks(std::vector<std::string>& chunks, uint64_t seed) {
        Rng rng(seed);
        rng.shuffle(chunks);
    }

    static std::string join(const std::vector<std::string>& chunks) {
        std::string out;
        for (const auto& c : chunks) {
            if (!out.empty()) out.push_back(' ');
            out += c;
        }
        return out;
    }

    std::string marker_;
    std::string answer_prefix_;
};

// External translation service attached over the line-delimited JSON
// subprocess protocol: {"text","source","dest"} in, {"text"} out.
class SubprocessTranslator final : public Translator {
public:
    explicit SubprocessTranslator(std::string command)
        : command_(std::move(command)), proc_(std::make_unique<LineSubprocess>(command_)) {}

    std::string translate(const std::string& text, const LanguageId& source,
                          const LanguageId& dest) override {
        nlohmann::ordered_json req;
        req["text"] = text;
        req["source"] = source.str();
        req["dest"] = dest.str();
        std::string reply = proc_->roundtrip(req.dump());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(reply);
        } catch (const nlohmann::json::exception& e) {
            throw Error("translator subprocess returned malformed JSON: " + std::string(e.what()));
        }
        if (!j.contains("text") || !j["text"].is_string())
            throw Error("translator subprocess reply missing 'text'");
        return j["text"].get<std::string>();
    }

    std::string name() const override { return "subprocess:" + command_; }

private:
    std::string command_;
    std::unique_ptr<LineSubprocess> proc_;
};

inline std::unique_ptr<Translator> make_mock_translator(const std::string& spec,
                                                        const std::string& marker = kDefaultMarker) {
    if (spec == "identity") return std::make_unique<IdentityTranslator>();
    if (spec == "word-cipher") return std::make_unique<WordCipherTranslator>();
    if (spec == "chunk-shuffle") return std::make_unique<ChunkShuffleTranslator>(marker);
    throw Error("unknown mock translator: '" + spec + "'");
}

}  // namespace xlda
