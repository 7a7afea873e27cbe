#pragma once

#include <algorithm>
#include <string>
#include <string_view>

#include "xlda/nfc_tables.hpp"
#include "xlda/unicode.hpp"

namespace xlda {

// Canonical normalization (NFC) per UAX #15: full canonical decomposition,
// canonical ordering, canonical composition. Hangul is handled
// algorithmically; everything else comes from the generated tables.

namespace nfc_detail {

constexpr char32_t kHangulSBase = 0xAC00;
constexpr char32_t kHangulLBase = 0x1100;
constexpr char32_t kHangulVBase = 0x1161;
constexpr char32_t kHangulTBase = 0x11A7;
constexpr int kHangulVCount = 21;
constexpr int kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;  // 588
constexpr int kHangulSCount = 11172;

inline uint8_t ccc(char32_t cp) {
    const auto* begin = std::begin(nfc_tables::kCcc);
    const auto* end = std::end(nfc_tables::kCcc);
    const auto* it = std::upper_bound(begin, end, cp, [](char32_t v, const nfc_tables::CccRange& r) {
        return v < r.first;
    });
    if (it == begin) return 0;
    --it;
    return cp <= it->last ? it->ccc : 0;
}

inline void decompose_cp(char32_t cp, std::u32string& out) {
    if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
        char32_t s = cp - kHangulSBase;
        out.push_back(kHangulLBase + s / kHangulNCount);
        out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
        char32_t t = s % kHangulTCount;
        if (t > 0) out.push_back(kHangulTBase + t);
        return;
    }
    const auto* begin = std::begin(nfc_tables::kDecomp);
    const auto* end = std::end(nfc_tables::kDecomp);
    const auto* it = std::lower_bound(begin, end, cp, [](const nfc_tables::DecompEntry& e, char32_t v) {
        return e.cp < v;
    });
    if (it != end && it->cp == cp) {
        // Table entries are pre-expanded to full NFD; no recursion needed.
        for (uint32_t k = 0; k < it->len; ++k) out.push_back(nfc_tables::kDecompPool[it->offset + k]);
        return;
    }
    out.push_back(cp);
}

inline bool compose_pair(char32_t a, char32_t b, char32_t& out) {
    // Hangul LV / LVT composition.
    if (a >= kHangulLBase && a < kHangulLBase + 19 && b >= kHangulVBase && b < kHangulVBase + kHangulVCount) {
        out = kHangulSBase + ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) * kHangulTCount;
        return true;
    }
    if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount && (a - kHangulSBase) % kHangulTCount == 0 &&
        b > kHangulTBase && b < kHangulTBase + kHangulTCount) {
        out = a + (b - kHangulTBase);
        return true;
    }
    uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
    const auto* begin = std::begin(nfc_tables::kComp);
    const auto* end = std::end(nfc_tables::kComp);
    const auto* it = std::lower_bound(begin, end, key, [](const nfc_tables::CompEntry& e, uint64_t v) {
        return e.key < v;
    });
    if (it != end && it->key == key) {
        out = it->composed;
        return true;
    }
    return false;
}

}  // namespace nfc_detail

inline std::u32string nfc_normalize(std::u32string_view in) {
    using namespace nfc_detail;

    std::u32string d;
    d.reserve(in.size());
    for (char32_t cp : in) decompose_cp(cp, d);

    // Canonical ordering: stable-sort runs of nonzero-ccc marks.
    for (size_t i = 1; i < d.size(); ++i) {
        uint8_t c = ccc(d[i]);
        if (c == 0) continue;
        size_t j = i;
        while (j > 0 && ccc(d[j - 1]) > c) {
            std::swap(d[j - 1], d[j]);
            --j;
        }
    }

    std::u32string out;
    out.reserve(d.size());
    ptrdiff_t starter = -1;
    uint8_t prev_cc = 0;
    bool starter_adjacent = false;  // nothing sits between the starter and the cursor
    for (char32_t cp : d) {
        uint8_t c = ccc(cp);
        if (starter >= 0 && (starter_adjacent || prev_cc < c)) {
            char32_t composed;
            if (compose_pair(out[static_cast<size_t>(starter)], cp, composed)) {
                out[static_cast<size_t>(starter)] = composed;
                continue;
            }
        }
        out.push_back(cp);
        if (c == 0) {
            starter = static_cast<ptrdiff_t>(out.size()) - 1;
            starter_adjacent = true;
        } else {
            starter_adjacent = false;
        }
        prev_cc = c;
    }
    return out;
}

inline std::string nfc_normalize_utf8(std::string_view s) {
    // ASCII is closed under NFC.
    bool ascii = true;
    for (char ch : s) {
        if (static_cast<unsigned char>(ch) >= 0x80) {
            ascii = false;
            break;
        }
    }
    if (ascii) return std::string(s);
    return utf8_encode(nfc_normalize(utf8_decode(s)));
}

}  // namespace xlda
