#pragma once

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "xlda/augment.hpp"
#include "xlda/classifier.hpp"
#include "xlda/selection.hpp"
#include "xlda/subprocess.hpp"
#include "xlda/synthetic.hpp"

namespace xlda {

struct EvalResult {
    size_t correct = 0;
    size_t n_eval = 0;
    size_t train_size = 0;
    uint64_t spec_digest = 0;

    double accuracy() const { return n_eval == 0 ? 0.0 : static_cast<double>(correct) / n_eval; }

    bool operator==(const EvalResult&) const = default;
};

namespace detail {

inline uint64_t dataset_digest(const AugmentedDataset& ds) {
    std::string meta = std::string(setting_name(ds.setting)) + "\x1f" + ds.target.str();
    for (const auto& a : ds.augmentors) meta += "\x1f" + a.str();
    meta += "\x1f" + std::to_string(ds.examples.size()) + "\x1f" + std::to_string(ds.seed);
    return fnv1a64(meta);
}

inline std::string temp_path(const char* tag) {
    static std::atomic<uint64_t> counter{0};
    uint64_t n = counter.fetch_add(1);
    auto dir = std::filesystem::temp_directory_path();
    return (dir / ("xlda_" + std::to_string(::getpid()) + "_" + std::to_string(n) + "_" + tag))
        .string();
}

inline EvalResult train_eval_external(const AugmentedDataset& train, const AugmentedDataset& eval,
                                      const TrainerSpec& spec) {
    std::string train_path = temp_path("train.jsonl");
    std::string eval_path = temp_path("eval.jsonl");
    write_dataset(train, train_path);
    write_dataset(eval, eval_path);
    EvalResult result;
    try {
        LineSubprocess proc(spec.external_command);
        nlohmann::ordered_json req;
        req["train_path"] = train_path;
        req["eval_path"] = eval_path;
        req["spec"] = spec.to_json();
        std::string reply = proc.roundtrip(req.dump());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(reply);
        } catch (const nlohmann::json::exception& e) {
            throw Error("external trainer returned malformed JSON: " + std::string(e.what()));
        }
        if (!j.contains("accuracy") || !j.contains("n_eval"))
            throw Error("external trainer reply missing 'accuracy'/'n_eval'");
        result.n_eval = j["n_eval"].get<size_t>();
        double acc = j["accuracy"].get<double>();
        if (acc < 0.0 || acc > 1.0) throw Error("external trainer accuracy out of [0,1]");
        result.correct = static_cast<size_t>(std::llround(acc * static_cast<double>(result.n_eval)));
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(train_path, ec);
        std::filesystem::remove(eval_path, ec);
        throw;
    }
    std::error_code ec;
    std::filesystem::remove(train_path, ec);
    std::filesystem::remove(eval_path, ec);
    result.train_size = train.examples.size();
    result.spec_digest = fnv1a64(spec.to_json().dump() + std::to_string(dataset_digest(train)) +
                                 std::to_string(dataset_digest(eval)));
    return result;
}

}  // namespace detail

// Train on one materialized dataset, evaluate on another. A pure function of
// (train, eval, spec); the builtin path never touches shared mutable state.
inline EvalResult train_eval(const AugmentedDataset& train, const AugmentedDataset& eval,
                             const TrainerSpec& spec) {
    spec.check();
    if (train.examples.empty()) throw Error("train_eval: empty training set");
    if (eval.examples.empty()) throw Error("train_eval: empty eval set");
    if (spec.kind == TrainerKind::external) return detail::train_eval_external(train, eval, spec);

    std::vector<FeatureVector> train_features;
    std::vector<int> train_labels;
    train_features.reserve(train.examples.size());
    for (const auto& ex : train.examples) {
        train_features.push_back(featurize(ex, spec));
        train_labels.push_back(static_cast<int>(ex.label));
    }
    LinearClassifier model = train_classifier(train_features, train_labels, spec);

    EvalResult result;
    result.n_eval = eval.examples.size();
    result.train_size = train.examples.size();
    for (const auto& ex : eval.examples) {
        if (model.predict(featurize(ex, spec)) == static_cast<int>(ex.label)) ++result.correct;
    }
    result.spec_digest = fnv1a64(spec.to_json().dump() + std::to_string(detail::dataset_digest(train)) +
                                 std::to_string(detail::dataset_digest(eval)));
    return result;
}

// Run fn(0..n-1) on up to `jobs` threads. Any interleaving must give the
// same result; callers write to disjoint slots.
template <typename F>
inline void parallel_for(size_t n, size_t jobs, F&& fn) {
    if (jobs == 0) jobs = 1;
    jobs = std::min(jobs, n);
    if (jobs <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (size_t t = 0; t < jobs; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Position-derived per-cell seed: reproducible no matter which worker runs
// the cell or in what order.
inline uint64_t cell_seed(uint64_t global_seed, const std::string& a, const std::string& b) {
    return global_seed ^ fnv1a64(a + "\x1f" + b);
}

struct GridCell {
    LanguageId target;
    LanguageId augmentor;  // == target on the diagonal
    uint64_t seed = 0;
    EvalResult result;
    double millis = 0.0;
};

struct GridRun {
    PairwiseMatrix matrix;
    std::vector<GridCell> cells;  // row-major over the language list
};

// The full pairwise evaluation: diagonal cells train monolingually, the
// (t, a) cell trains on the pairwise cross-lingual set; every cell is
// evaluated on the same target-language eval set.
inline GridRun pairwise_grid(const AlignedCorpus& corpus, const AlignedCorpus& eval_corpus,
                             const std::vector<LanguageId>& languages, const TrainerSpec& spec,
                             const CompositionPolicy& policy, size_t jobs = 1) {
    if (languages.empty()) throw Error("pairwise_grid: empty language list");
    for (const auto& l : languages) {
        if (!corpus.has_language(l)) throw Error("train corpus lacks language " + l.str());
        if (!eval_corpus.has_language(l)) throw Error("eval corpus lacks language " + l.str());
    }
    spec.check();

    std::vector<AugmentedDataset> eval_sets;
    eval_sets.reserve(languages.size());
    for (const auto& t : languages) eval_sets.push_back(build_monolingual(eval_corpus, t));

    size_t n = languages.size();
    std::vector<GridCell> cells(n * n);
    parallel_for(n * n, jobs, [&](size_t idx) {
        size_t ti = idx / n;
        size_t ai = idx % n;
        const LanguageId& t = languages[ti];
        const LanguageId& a = languages[ai];
        GridCell cell;
        cell.target = t;
        cell.augmentor = a;
        cell.seed = cell_seed(spec.seed, t.str(), a.str());
        TrainerSpec cell_spec = spec;
        cell_spec.seed = cell.seed;
        CompositionPolicy pol = policy;
        pol.seed = cell.seed;
        auto t0 = std::chrono::steady_clock::now();
        AugmentedDataset train_ds;
        try {
            train_ds = (ti == ai) ? build_monolingual(corpus, t)
                                  : build_xlda_pairwise(corpus, t, a, pol);
            cell.result = train_eval(train_ds, eval_sets[ti], cell_spec);
        } catch (const Error& e) {
            throw Error("grid cell (" + t.str() + ", " + a.str() + "): " + e.what());
        }
        cell.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                          .count();
        cells[idx] = std::move(cell);
    });

    std::map<std::pair<LanguageId, LanguageId>, double> acc;
    for (const auto& cell : cells) acc[{cell.target, cell.augmentor}] = cell.result.accuracy();
    GridRun run;
    run.matrix = matrix_from_accuracies(languages, acc);
    run.cells = std::move(cells);
    return run;
}

struct GreedyRun {
    GreedySchedule schedule;
    GreedyCurve curve;
    std::vector<GridCell> points;  // point k's training cell
    size_t best_k = 0;
    double best_accuracy = 0.0;
};

// Greedy curve for one target: k = 0 is the monolingual baseline (seeded
// like the diagonal grid cell, so it reproduces the matrix baseline when the
// matrix came from the same corpus and spec), k >= 1 trains on the size-k
// prefix of the schedule.
inline GreedyRun greedy_curve_run(const AlignedCorpus& corpus, const AlignedCorpus& eval_corpus,
                                  const LanguageId& target, const PairwiseMatrix& matrix,
                                  const TrainerSpec& spec, const CompositionPolicy& policy,
                                  size_t jobs = 1) {
    spec.check();
    if (!corpus.has_language(target)) throw Error("train corpus lacks language " + target.str());
    if (!eval_corpus.has_language(target)) throw Error("eval corpus lacks language " + target.str());

    GreedyRun run;
    run.schedule = greedy_schedule(matrix, target);
    for (const auto& prefix : run.schedule.prefixes) {
        for (const auto& a : prefix) {
            if (!corpus.has_language(a)) throw Error("train corpus lacks scheduled augmentor " + a.str());
        }
    }
    AugmentedDataset eval_ds = build_monolingual(eval_corpus, target);

    size_t n_points = run.schedule.cut + 1;
    run.points.resize(n_points);
    parallel_for(n_points, jobs, [&](size_t k) {
        GridCell cell;
        cell.target = target;
        TrainerSpec cell_spec = spec;
        CompositionPolicy pol = policy;
        auto t0 = std::chrono::steady_clock::now();
        AugmentedDataset train_ds;
        if (k == 0) {
            cell.augmentor = target;
            cell.seed = cell_seed(spec.seed, target.str(), target.str());
            cell_spec.seed = cell.seed;
            train_ds = build_monolingual(corpus, target);
        } else {
            const auto& prefix = run.schedule.prefixes[k - 1];
            cell.augmentor = prefix.back();
            cell.seed = spec.seed ^ fnv1a64(target.str() + "\x1f" + "k" + std::to_string(k));
            cell_spec.seed = cell.seed;
            pol.seed = cell.seed;
            train_ds = build_xlda_multi(corpus, target, prefix, pol);
        }
        try {
            cell.result = train_eval(train_ds, eval_ds, cell_spec);
        } catch (const Error& e) {
            throw Error("greedy point k=" + std::to_string(k) + " for " + target.str() + ": " +
                        e.what());
        }
        cell.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                          .count();
        run.points[k] = std::move(cell);
    });

    run.curve.target = target;
    for (size_t k = 0; k < n_points; ++k)
        run.curve.points.emplace_back(k, run.points[k].result.accuracy());
    auto best = select_best(run.curve);
    run.best_k = best.first;
    run.best_accuracy = best.second;
    return run;
}

}  // namespace xlda
