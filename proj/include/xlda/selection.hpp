#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlda/types.hpp"

namespace xlda {

// Target-by-augmentor accuracy grid. The diagonal holds the absolute
// monolingual baseline; off-diagonal cells hold the signed change over the
// diagonal entry in the same row. Deltas are stored as fractions (0.033),
// rendered as percent points only in reports.
class PairwiseMatrix {
public:
    PairwiseMatrix() = default;
    explicit PairwiseMatrix(std::vector<LanguageId> languages) : languages_(std::move(languages)) {
        std::set<LanguageId> uniq(languages_.begin(), languages_.end());
        if (uniq.size() != languages_.size()) throw Error("duplicate language in matrix");
    }

    const std::vector<LanguageId>& languages() const { return languages_; }

    void set_baseline(const LanguageId& target, double accuracy) {
        if (accuracy < 0.0 || accuracy > 1.0)
            throw Error("baseline accuracy out of [0,1] for " + target.str());
        baseline_[target] = accuracy;
    }

    void set_delta(const LanguageId& target, const LanguageId& augmentor, double delta) {
        if (target == augmentor) throw Error("diagonal cells hold baselines, not deltas");
        delta_[{target, augmentor}] = delta;
    }

    double baseline(const LanguageId& target) const {
        auto it = baseline_.find(target);
        if (it == baseline_.end()) throw Error("no baseline for " + target.str());
        return it->second;
    }

    double delta(const LanguageId& target, const LanguageId& augmentor) const {
        auto it = delta_.find({target, augmentor});
        if (it == delta_.end())
            throw Error("no delta for (" + target.str() + ", " + augmentor.str() + ")");
        return it->second;
    }

    bool has_language(const LanguageId& l) const {
        return std::find(languages_.begin(), languages_.end(), l) != languages_.end();
    }

    // Every ordered pair over the language set must be present.
    void check_complete() const {
        for (const auto& t : languages_) {
            baseline(t);
            for (const auto& a : languages_) {
                if (a != t) delta(t, a);
            }
        }
    }

private:
    std::vector<LanguageId> languages_;
    std::map<LanguageId, double> baseline_;
    std::map<std::pair<LanguageId, LanguageId>, double> delta_;
};

// Builds the matrix from raw accuracies, including self pairs:
// baseline(t) = acc(t,t), delta(t,a) = acc(t,a) - acc(t,t).
inline PairwiseMatrix matrix_from_accuracies(
    const std::vector<LanguageId>& languages,
    const std::map<std::pair<LanguageId, LanguageId>, double>& acc) {
    PairwiseMatrix m(languages);
    for (const auto& [key, v] : acc) {
        if (v < 0.0 || v > 1.0)
            throw Error("accuracy out of [0,1] for (" + key.first.str() + ", " + key.second.str() +
                        ")");
    }
    for (const auto& t : languages) {
        auto self = acc.find({t, t});
        if (self == acc.end()) throw Error("missing accuracy for (" + t.str() + ", " + t.str() + ")");
        m.set_baseline(t, self->second);
        for (const auto& a : languages) {
            if (a == t) continue;
            auto it = acc.find({t, a});
            if (it == acc.end())
                throw Error("missing accuracy for (" + t.str() + ", " + a.str() + ")");
            m.set_delta(t, a, it->second - self->second);
        }
    }
    return m;
}

// Augmentors sorted by decreasing pairwise improvement, cut at the first one
// that hurt. Zero-delta augmentors do not hurt and stay in; ties keep the
// matrix's language order.
struct GreedySchedule {
    LanguageId target;
    std::vector<std::pair<LanguageId, double>> ranked;
    size_t cut = 0;
    std::vector<std::vector<LanguageId>> prefixes;  // sizes 1..cut
};

inline GreedySchedule greedy_schedule(const PairwiseMatrix& matrix, const LanguageId& target) {
    if (!matrix.has_language(target)) throw Error("unknown target: " + target.str());
    GreedySchedule s;
    s.target = target;
    for (const auto& a : matrix.languages()) {
        if (a == target) continue;
        s.ranked.emplace_back(a, matrix.delta(target, a));
    }
    if (s.ranked.empty()) throw Error("matrix has no augmentor for " + target.str());
    std::stable_sort(s.ranked.begin(), s.ranked.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    s.cut = s.ranked.size();
    for (size_t i = 0; i < s.ranked.size(); ++i) {
        if (s.ranked[i].second < 0.0) {
            s.cut = i;
            break;
        }
    }
    for (size_t k = 1; k <= s.cut; ++k) {
        std::vector<LanguageId> prefix;
        for (size_t i = 0; i < k; ++i) prefix.push_back(s.ranked[i].first);
        s.prefixes.push_back(std::move(prefix));
    }
    return s;
}

struct GreedyCurve {
    LanguageId target;
    std::vector<std::pair<size_t, double>> points;  // (k augmentors, accuracy); k=0 is monolingual
};

// Argmax accuracy; smallest k on exact ties.
inline std::pair<size_t, double> select_best(const GreedyCurve& curve) {
    if (curve.points.empty()) throw Error("empty greedy curve");
    std::pair<size_t, double> best = curve.points.front();
    for (const auto& p : curve.points) {
        if (p.second > best.second) best = p;
    }
    return best;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline double parse_cell(const std::string& raw, const std::string& where, bool diagonal) {
    std::string s = trim(raw);
    if (s.empty()) throw Error(where + ": empty cell");
    if (diagonal && (s[0] == '+' || s[0] == '-'))
        throw Error(where + ": diagonal cells must be absolute accuracies, not signed deltas");
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw Error(where + ": unparseable cell '" + raw + "'");
    }
    if (pos != s.size()) throw Error(where + ": unparseable cell '" + raw + "'");
    if (diagonal && (v < 0.0 || v > 1.0))
        throw Error(where + ": diagonal accuracy out of [0,1]");
    return v;
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace detail

// Square CSV: header row and first column carry the language codes, the
// diagonal holds absolute baselines, off-diagonal cells signed deltas.
inline void write_matrix_csv(const PairwiseMatrix& matrix, std::ostream& out) {
    matrix.check_complete();
    out << "target";
    for (const auto& a : matrix.languages()) out << "," << a.str();
    out << "\n";
    for (const auto& t : matrix.languages()) {
        out << t.str();
        for (const auto& a : matrix.languages()) {
            if (a == t) {
                out << "," << detail::format_fixed(matrix.baseline(t), 4);
            } else {
                double d = matrix.delta(t, a);
                out << "," << (d < 0 ? "" : "+") << detail::format_fixed(d, 4);
            }
        }
        out << "\n";
    }
}

inline void write_matrix_csv(const PairwiseMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_matrix_csv(matrix, out);
}

inline PairwiseMatrix load_matrix_csv(std::istream& in, const std::string& name = "matrix") {
    std::string line;
    if (!std::getline(in, line)) throw Error(name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_csv_line(line);
    if (header.size() < 2) throw Error(name + ": header must list at least one language");
    std::vector<LanguageId> languages;
    for (size_t i = 1; i < header.size(); ++i) languages.emplace_back(trim(header[i]));
    PairwiseMatrix m(languages);

    size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (row >= languages.size()) throw Error(name + ": more rows than header languages");
        std::string where = name + ": row " + std::to_string(row + 1);
        auto cells = detail::split_csv_line(line);
        if (cells.size() != languages.size() + 1)
            throw Error(where + ": expected " + std::to_string(languages.size() + 1) + " cells, got " +
                        std::to_string(cells.size()));
        LanguageId t(trim(cells[0]));
        if (t != languages[row]) throw Error(where + ": row order must match header order");
        for (size_t c = 0; c < languages.size(); ++c) {
            bool diagonal = c == row;
            double v = detail::parse_cell(cells[c + 1], where, diagonal);
            if (diagonal) {
                m.set_baseline(t, v);
            } else {
                m.set_delta(t, languages[c], v);
            }
        }
        ++row;
    }
    if (row != languages.size())
        throw Error(name + ": expected " + std::to_string(languages.size()) + " rows, got " +
                    std::to_string(row));
    m.check_complete();
    return m;
}

inline PairwiseMatrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return load_matrix_csv(in, path);
}

inline nlohmann::ordered_json schedule_to_json(const GreedySchedule& s) {
    nlohmann::ordered_json j;
    j["target"] = s.target.str();
    nlohmann::ordered_json ranked = nlohmann::ordered_json::array();
    for (const auto& [lang, delta] : s.ranked) {
        nlohmann::ordered_json e;
        e["lang"] = lang.str();
        e["delta"] = delta;
        ranked.push_back(e);
    }
    j["ranked"] = ranked;
    j["cut"] = s.cut;
    nlohmann::ordered_json prefixes = nlohmann::ordered_json::array();
    for (const auto& prefix : s.prefixes) {
        nlohmann::ordered_json p = nlohmann::ordered_json::array();
        for (const auto& lang : prefix) p.push_back(lang.str());
        prefixes.push_back(p);
    }
    j["prefixes"] = prefixes;
    return j;
}

inline void write_curve_csv(const GreedyCurve& curve, std::ostream& out) {
    out << "k,accuracy\n";
    for (const auto& [k, acc] : curve.points)
        out << k << "," << detail::format_fixed(acc, 4) << "\n";
}

inline void write_curve_csv(const GreedyCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_curve_csv(curve, out);
}

}  // namespace xlda
