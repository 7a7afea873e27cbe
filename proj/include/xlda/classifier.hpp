#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlda/augment.hpp"
#include "xlda/hash.hpp"
#include "xlda/types.hpp"

namespace xlda {

enum class TrainerKind { builtin_linear, external };

// Knobs for the pluggable trainer. The schedule fields drive lr_at; the
// feature fields drive the hashed bag-of-n-grams extractor.
struct TrainerSpec {
    TrainerKind kind = TrainerKind::builtin_linear;
    size_t feature_dim = size_t{1} << 18;
    std::set<int> ngram_orders = {1, 2};
    size_t epochs = 3;
    size_t batch_size = 32;
    double peak_lr = 0.1;
    double warmup_fraction = 0.10;
    uint64_t seed = 0;
    std::string external_command;  // used when kind == external

    void check() const {
        if (feature_dim < 2 || (feature_dim & (feature_dim - 1)) != 0)
            throw Error("feature_dim must be a power of two >= 2");
        if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
            throw Error("warmup_fraction must be in [0,1)");
        if (epochs == 0) throw Error("epochs must be >= 1");
        if (batch_size == 0) throw Error("batch_size must be >= 1");
        if (peak_lr <= 0.0) throw Error("peak_lr must be positive");
        if (ngram_orders.empty() || *ngram_orders.begin() < 1)
            throw Error("ngram_orders must be a non-empty set of orders >= 1");
        if (kind == TrainerKind::external && external_command.empty())
            throw Error("external trainer requires a command");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["kind"] = kind == TrainerKind::builtin_linear ? "builtin_linear" : "external";
        j["feature_dim"] = feature_dim;
        j["ngram_orders"] = std::vector<int>(ngram_orders.begin(), ngram_orders.end());
        j["epochs"] = epochs;
        j["batch_size"] = batch_size;
        j["peak_lr"] = peak_lr;
        j["warmup_fraction"] = warmup_fraction;
        j["seed"] = seed;
        if (kind == TrainerKind::external) j["external_command"] = external_command;
        return j;
    }

    uint64_t digest() const { return fnv1a64(to_json().dump()); }
};

// Linear ramp 0 -> peak over the first ceil(warmup_fraction * total) steps,
// then linear decay peak -> 0 at step = total.
inline double lr_at(size_t step, size_t total_steps, const TrainerSpec& spec) {
    if (total_steps < 1) throw Error("lr_at: total_steps must be >= 1");
    if (step > total_steps) throw Error("lr_at: step out of range");
    size_t warmup = static_cast<size_t>(
        std::ceil(spec.warmup_fraction * static_cast<double>(total_steps)));
    if (warmup >= total_steps) warmup = total_steps - 1;
    if (step <= warmup && warmup > 0)
        return spec.peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
    return spec.peak_lr * static_cast<double>(total_steps - step) /
           static_cast<double>(total_steps - warmup);
}

inline constexpr int kNumClasses = 3;

// Hashed sparse feature vector: bucket -> count, buckets sorted and unique.
struct FeatureVector {
    std::vector<std::pair<uint32_t, float>> terms;
};

namespace detail {

inline void hash_field_ngrams(std::string_view field_tag, const std::string& text,
                              const std::set<int>& orders, size_t dim,
                              std::vector<uint32_t>& buckets) {
    std::vector<std::string_view> tokens;
    size_t start = std::string::npos;
    for (size_t i = 0; i <= text.size(); ++i) {
        bool ws = i == text.size() || text[i] == ' ' || text[i] == '\t' || text[i] == '\n' ||
                  text[i] == '\r';
        if (!ws && start == std::string::npos) start = i;
        if (ws && start != std::string::npos) {
            tokens.emplace_back(text.data() + start, i - start);
            start = std::string::npos;
        }
    }
    std::string key;
    for (int order : orders) {
        if (order < 1 || tokens.size() < static_cast<size_t>(order)) continue;
        for (size_t i = 0; i + order <= tokens.size(); ++i) {
            key.assign(field_tag);
            for (int k = 0; k < order; ++k) {
                key.push_back('\x1f');
                key.append(tokens[i + k]);
            }
            buckets.push_back(static_cast<uint32_t>(fnv1a64(key) & (dim - 1)));
        }
    }
}

}  // namespace detail

// Premise and hypothesis are tagged so they hash into distinct subspaces:
// the cross-over structure of the data is what the method exploits, so the
// model must be able to tell the two fields apart.
inline FeatureVector featurize(const AugmentedExample& ex, const TrainerSpec& spec) {
    std::vector<uint32_t> buckets;
    detail::hash_field_ngrams("p", ex.premise, spec.ngram_orders, spec.feature_dim, buckets);
    detail::hash_field_ngrams("h", ex.hypothesis, spec.ngram_orders, spec.feature_dim, buckets);
    std::sort(buckets.begin(), buckets.end());
    FeatureVector fv;
    for (size_t i = 0; i < buckets.size();) {
        size_t j = i;
        while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
        fv.terms.emplace_back(buckets[i], static_cast<float>(j - i));
        i = j;
    }
    return fv;
}

// Multinomial (softmax) linear classifier over hashed n-gram counts, trained
// with plain mini-batch gradient descent under the warmup/decay schedule.
class LinearClassifier {
public:
    explicit LinearClassifier(size_t dim) : dim_(dim), weights_(kNumClasses * dim, 0.0) {
        bias_.fill(0.0);
    }

    size_t dim() const { return dim_; }
    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }
    std::array<double, kNumClasses>& bias() { return bias_; }

    std::array<double, kNumClasses> scores(const FeatureVector& fv) const {
        std::array<double, kNumClasses> s = bias_;
        for (const auto& [bucket, count] : fv.terms) {
            for (int c = 0; c < kNumClasses; ++c)
                s[c] += weights_[static_cast<size_t>(c) * dim_ + bucket] * count;
        }
        return s;
    }

    int predict(const FeatureVector& fv) const {
        auto s = scores(fv);
        int best = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (s[c] > s[best]) best = c;
        return best;
    }

    struct BatchGradient {
        std::vector<std::pair<size_t, double>> weight_terms;  // flat index -> d(loss)/d(w)
        std::array<double, kNumClasses> bias = {0, 0, 0};
        double loss = 0.0;
    };

    // Mean cross-entropy over the batch plus its analytic gradient. The
    // gradient only touches buckets present in the batch, which is also how
    // the update applies it.
    BatchGradient loss_and_grad(std::span<const FeatureVector> features,
                                std::span<const int> labels) const {
        BatchGradient g;
        std::vector<std::pair<size_t, double>>& terms = g.weight_terms;
        double inv_b = 1.0 / static_cast<double>(features.size());
        for (size_t i = 0; i < features.size(); ++i) {
            auto s = scores(features[i]);
            double mx = std::max({s[0], s[1], s[2]});
            std::array<double, kNumClasses> p;
            double z = 0.0;
            for (int c = 0; c < kNumClasses; ++c) {
                p[c] = std::exp(s[c] - mx);
                z += p[c];
            }
            for (int c = 0; c < kNumClasses; ++c) p[c] /= z;
            int y = labels[i];
            g.loss += -std::log(std::max(p[y], 1e-300)) * inv_b;
            for (int c = 0; c < kNumClasses; ++c) {
                double coef = (p[c] - (c == y ? 1.0 : 0.0)) * inv_b;
                g.bias[c] += coef;
                for (const auto& [bucket, count] : features[i].terms)
                    terms.emplace_back(static_cast<size_t>(c) * dim_ + bucket, coef * count);
            }
        }
        // Merge duplicate indices so the update is a single add per weight.
        std::sort(terms.begin(), terms.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        size_t out = 0;
        for (size_t i = 0; i < terms.size();) {
            size_t j = i;
            double sum = 0.0;
            while (j < terms.size() && terms[j].first == terms[i].first) sum += terms[j++].second;
            terms[out++] = {terms[i].first, sum};
            i = j;
        }
        terms.resize(out);
        return g;
    }

    void apply(const BatchGradient& g, double lr) {
        for (const auto& [idx, dw] : g.weight_terms) weights_[idx] -= lr * dw;
        for (int c = 0; c < kNumClasses; ++c) bias_[c] -= lr * g.bias[c];
    }

private:
    size_t dim_;
    std::vector<double> weights_;  // kNumClasses x dim_, row-major
    std::array<double, kNumClasses> bias_;
};

// Deterministic for a fixed (dataset, spec): shuffling is derived from the
// seed, accumulation order is fixed, no threading inside one run.
inline LinearClassifier train_classifier(const std::vector<FeatureVector>& features,
                                         const std::vector<int>& labels, const TrainerSpec& spec) {
    spec.check();
    if (features.empty()) throw Error("train_classifier: empty training set");
    LinearClassifier model(spec.feature_dim);
    size_t n = features.size();
    size_t batches_per_epoch = (n + spec.batch_size - 1) / spec.batch_size;
    size_t total_steps = spec.epochs * batches_per_epoch;

    std::vector<size_t> order(n);
    Rng rng(splitmix64(spec.seed ^ 0x7261696e6572ULL));
    size_t step = 0;
    std::vector<FeatureVector> batch_features;
    std::vector<int> batch_labels;
    for (size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        for (size_t i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);
        for (size_t b = 0; b < batches_per_epoch; ++b) {
            size_t lo = b * spec.batch_size;
            size_t hi = std::min(lo + spec.batch_size, n);
            if (lo >= hi) continue;
            batch_features.clear();
            batch_labels.clear();
            for (size_t i = lo; i < hi; ++i) {
                batch_features.push_back(features[order[i]]);
                batch_labels.push_back(labels[order[i]]);
            }
            ++step;
            double lr = lr_at(step, total_steps, spec);
            auto grad = model.loss_and_grad(batch_features, batch_labels);
            model.apply(grad, lr);
        }
    }
    return model;
}

}  // namespace xlda
