#!/usr/bin/env python3
"""Regenerates include/xlda/nfc_tables.hpp and tests/data/nfc_cases.txt.

Tables are derived from the Python runtime's unicodedata module. Hangul
syllables are omitted from all tables; the C++ side handles them
algorithmically. Composition pairs are validated against Python's own NFC so
composition exclusions need no separate data source.
"""

import random
import sys
import unicodedata

HANGUL_S_BASE = 0xAC00
HANGUL_S_LAST = 0xD7A3


def is_hangul_syllable(cp):
    return HANGUL_S_BASE <= cp <= HANGUL_S_LAST


def all_codepoints():
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        yield cp


def build_decomp():
    entries = []  # (cp, [expansion...]) full canonical (NFD) expansion
    for cp in all_codepoints():
        if is_hangul_syllable(cp):
            continue
        nfd = [ord(c) for c in unicodedata.normalize("NFD", chr(cp))]
        if nfd != [cp]:
            entries.append((cp, nfd))
    return entries


def build_ccc_ranges():
    ranges = []
    run = None  # [first, last, ccc]
    for cp in all_codepoints():
        c = unicodedata.combining(chr(cp))
        if c == 0:
            run = None
            continue
        if run is not None and run[2] == c and cp == run[1] + 1:
            run[1] = cp
        else:
            run = [cp, cp, c]
            ranges.append(run)
    return ranges


def build_comp_pairs():
    pairs = []
    for cp in all_codepoints():
        if is_hangul_syllable(cp):
            continue
        raw = unicodedata.decomposition(chr(cp))
        if not raw or raw.startswith("<"):
            continue
        fields = raw.split()
        if len(fields) != 2:
            continue
        a, b = (int(f, 16) for f in fields)
        if unicodedata.combining(chr(a)) != 0:
            continue
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            pairs.append(((a << 32) | b, cp))
    pairs.sort()
    return pairs


def emit_header(out):
    decomp = build_decomp()
    ccc = build_ccc_ranges()
    comp = build_comp_pairs()

    pool = []
    index = []
    for cp, exp in decomp:
        index.append((cp, len(pool), len(exp)))
        pool.extend(exp)

    w = out.write
    w("// Generated by scripts/gen_nfc_tables.py (Python unicodedata, Unicode %s).\n"
      % unicodedata.unidata_version)
    w("// Do not edit by hand; rerun the script instead.\n")
    w("#pragma once\n\n#include <cstdint>\n\nnamespace xlda::nfc_tables {\n\n")

    w("inline constexpr char32_t kDecompPool[] = {\n")
    for i in range(0, len(pool), 12):
        w("    " + ",".join("0x%X" % v for v in pool[i:i + 12]) + ",\n")
    w("};\n\n")

    w("struct DecompEntry { char32_t cp; uint32_t offset; uint32_t len; };\n")
    w("inline constexpr DecompEntry kDecomp[] = {\n")
    for i in range(0, len(index), 4):
        w("    " + "".join("{0x%X,%d,%d}," % e for e in index[i:i + 4]) + "\n")
    w("};\n\n")

    w("struct CccRange { char32_t first; char32_t last; uint8_t ccc; };\n")
    w("inline constexpr CccRange kCcc[] = {\n")
    for i in range(0, len(ccc), 5):
        w("    " + "".join("{0x%X,0x%X,%d}," % (r[0], r[1], r[2]) for r in ccc[i:i + 5]) + "\n")
    w("};\n\n")

    w("struct CompEntry { uint64_t key; char32_t composed; };\n")
    w("inline constexpr CompEntry kComp[] = {\n")
    for i in range(0, len(comp), 4):
        w("    " + "".join("{0x%XULL,0x%X}," % p for p in comp[i:i + 4]) + "\n")
    w("};\n\n")
    w("}  // namespace xlda::nfc_tables\n")

    return len(index), len(ccc), len(comp), len(pool)


INTERESTING = [
    "",
    "abc",
    "café",
    "café",
    "ṩ",
    "ṩ",
    "ṩ",
    "q̣̇",
    "Å",
    "Å",
    "Å",
    "á̖b",
    "á̖b",
    "한글",
    "한",
    "가",
    "각",
    "ḍ̇",
    "ḍ̇",
    "ཱཱི",
    "फ़",
    "ऩ",
    "क़",
    "豈",
    "Ω",
    "ά",
    "ά",
    "ᴕe" if sys.maxunicode > 0xFFFF else "",
    "\U0001d160",
    "à֮̕b",
    "é́",
    "́",
    "̀a",
]


def fuzz_strings(n, seed):
    rng = random.Random(seed)
    pools = [
        list(range(0x20, 0x7F)),
        list(range(0xC0, 0x180)),
        list(range(0x300, 0x370)),
        list(range(0x390, 0x3D0)),
        list(range(0x590, 0x5D0)),
        list(range(0x900, 0x980)),
        list(range(0x1100, 0x1113)) + list(range(0x1161, 0x1176)) + list(range(0x11A8, 0x11C3)),
        list(range(0xAC00, 0xAC40)),
        list(range(0x1E00, 0x1F00)),
        list(range(0x1F00, 0x2000)),
        [0xF900, 0xF901, 0x2126, 0x212B, 0x1D160, 0x1D15E],
    ]
    out = []
    for _ in range(n):
        k = rng.randint(1, 12)
        cps = []
        for _ in range(k):
            pool = rng.choice(pools)
            cps.append(rng.choice(pool))
        out.append("".join(chr(c) for c in cps))
    return out


def emit_cases(out):
    cases = [s for s in INTERESTING if s is not None] + fuzz_strings(600, 20240917)
    n = 0
    for s in cases:
        nfc = unicodedata.normalize("NFC", s)
        src = " ".join("%X" % ord(c) for c in s)
        dst = " ".join("%X" % ord(c) for c in nfc)
        out.write(src + "\t" + dst + "\n")
        n += 1
    return n


def main():
    with open("include/xlda/nfc_tables.hpp", "w") as f:
        nd, nc, np_, pool = emit_header(f)
    with open("tests/data/nfc_cases.txt", "w") as f:
        ncases = emit_cases(f)
    print("decomp entries: %d (pool %d), ccc ranges: %d, comp pairs: %d, cases: %d"
          % (nd, pool, nc, np_, ncases))


if __name__ == "__main__":
    main()
