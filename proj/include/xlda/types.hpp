#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xlda {

// All recoverable failures surface as xlda::Error; the CLI maps them to
// exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Two-to-eight character lowercase tag. Synthetic codes ("x1") are valid
// languages; comparison is exact byte equality.
class LanguageId {
public:
    LanguageId() = default;
    explicit LanguageId(std::string code) : code_(std::move(code)) {
        if (!valid(code_)) throw Error("invalid language code: '" + code_ + "'");
    }

    static bool valid(std::string_view s) {
        if (s.size() < 2 || s.size() > 8) return false;
        if (s[0] < 'a' || s[0] > 'z') return false;
        for (size_t i = 1; i < s.size(); ++i) {
            char c = s[i];
            if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))) return false;
        }
        return true;
    }

    const std::string& str() const { return code_; }
    auto operator<=>(const LanguageId&) const = default;

private:
    std::string code_;
};

enum class Label { entailment, contradiction, neutral };

inline const char* label_name(Label l) {
    switch (l) {
        case Label::entailment: return "entailment";
        case Label::contradiction: return "contradiction";
        case Label::neutral: return "neutral";
    }
    return "?";
}

// Lowercases before matching; anything outside the three labels is a schema
// error, never coerced.
inline Label parse_label(std::string_view raw) {
    std::string s(raw);
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (s == "entailment") return Label::entailment;
    if (s == "contradiction") return Label::contradiction;
    if (s == "neutral") return Label::neutral;
    throw Error("unknown label: '" + std::string(raw) + "'");
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace xlda
