#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlda/hash.hpp"
#include "xlda/selection.hpp"
#include "xlda/types.hpp"

namespace xlda {

// Translation-system quality scores, ingested as data for the
// quality-vs-benefit scatter report.
struct BleuTable {
    std::map<LanguageId, double> scores;

    void set(const LanguageId& lang, double bleu) {
        if (bleu < 0.0) throw Error("BLEU score must be non-negative for " + lang.str());
        if (scores.count(lang)) throw Error("duplicate BLEU entry for " + lang.str());
        scores[lang] = bleu;
    }
};

// CSV "lang,bleu" with a header row.
inline BleuTable load_bleu_csv(std::istream& in, const std::string& name = "bleu") {
    BleuTable table;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (lineno == 1 && line.rfind("lang,", 0) == 0) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw Error(name + ":" + std::to_string(lineno) + ": expected 'lang,bleu'");
        LanguageId lang(trim(line.substr(0, comma)));
        double bleu = 0;
        try {
            bleu = std::stod(trim(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw Error(name + ":" + std::to_string(lineno) + ": unparseable BLEU value");
        }
        table.set(lang, bleu);
    }
    return table;
}

inline BleuTable load_bleu_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return load_bleu_csv(in, path);
}

// Long-form grid rows with per-row delta extrema, so an external plotter can
// color-normalize each row the way the heatmap figure does.
inline void emit_heatmap_csv(const PairwiseMatrix& matrix, std::ostream& out) {
    if (matrix.languages().empty()) throw Error("emit_heatmap_csv: empty matrix");
    matrix.check_complete();
    out << "target,augmentor,kind,value,row_min_delta,row_max_delta\n";
    for (const auto& t : matrix.languages()) {
        double row_min = 0.0, row_max = 0.0;
        bool first = true;
        for (const auto& a : matrix.languages()) {
            if (a == t) continue;
            double d = matrix.delta(t, a);
            row_min = first ? d : std::min(row_min, d);
            row_max = first ? d : std::max(row_max, d);
            first = false;
        }
        for (const auto& a : matrix.languages()) {
            bool diagonal = a == t;
            out << t.str() << "," << a.str() << "," << (diagonal ? "baseline" : "delta") << ","
                << detail::format_fixed(diagonal ? matrix.baseline(t) : matrix.delta(t, a), 4) << ","
                << detail::format_fixed(row_min, 4) << "," << detail::format_fixed(row_max, 4)
                << "\n";
        }
    }
}

inline void emit_heatmap_csv(const PairwiseMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    emit_heatmap_csv(matrix, out);
}

// One scatter point per (target, augmentor) pair whose augmentor has a BLEU
// score; augmentors without one are skipped with a warning count.
inline size_t emit_bleu_scatter(const PairwiseMatrix& matrix, const BleuTable& bleu,
                                std::ostream& out) {
    out << "augmentor,bleu,target,delta\n";
    size_t warnings = 0;
    for (const auto& a : matrix.languages()) {
        if (!bleu.scores.count(a)) ++warnings;
    }
    for (const auto& a : matrix.languages()) {
        auto it = bleu.scores.find(a);
        if (it == bleu.scores.end()) continue;
        for (const auto& t : matrix.languages()) {
            if (t == a) continue;
            out << a.str() << "," << detail::format_fixed(it->second, 1) << "," << t.str() << ","
                << detail::format_fixed(matrix.delta(t, a), 4) << "\n";
        }
    }
    return warnings;
}

inline size_t emit_bleu_scatter(const PairwiseMatrix& matrix, const BleuTable& bleu,
                                const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    return emit_bleu_scatter(matrix, bleu, out);
}

inline constexpr const char* kToolVersion = "0.1.0";

// Everything needed to reproduce a command's outputs byte-for-byte; the
// timestamp is informational and excluded from digests.
struct RunManifest {
    std::string command_line;
    uint64_t config_digest = 0;
    uint64_t global_seed = 0;
    std::map<std::string, std::string> input_digests;  // path -> fnv1a64 hex of contents
    std::string tool_version = kToolVersion;
    std::string timestamp;

    void add_input(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::ostringstream hex;
        hex << std::hex << fnv1a64(ss.str());
        input_digests[path] = hex.str();
    }

    void stamp_now() {
        auto now = std::chrono::system_clock::now();
        std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        timestamp = buf;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command_line"] = command_line;
        std::ostringstream cfg;
        cfg << std::hex << config_digest;
        j["config_digest"] = cfg.str();
        j["global_seed"] = global_seed;
        nlohmann::ordered_json inputs;
        for (const auto& [path, digest] : input_digests) inputs[path] = digest;
        j["input_digests"] = inputs;
        j["tool_version"] = tool_version;
        j["timestamp"] = timestamp;
        return j;
    }
};

inline void write_manifest(const RunManifest& manifest, const std::string& path,
                           nlohmann::ordered_json extra = {}) {
    nlohmann::ordered_json j = manifest.to_json();
    if (!extra.is_null() && !extra.empty()) j["run"] = std::move(extra);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace xlda
