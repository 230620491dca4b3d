#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "tulik/errors.hpp"

namespace tulik {

enum class Norm { L1, L2, Linf };

namespace detail {
inline double norm_of(std::span<const double> x, Norm norm) {
    double acc = 0.0;
    switch (norm) {
    case Norm::L1:
        for (double v : x) acc += std::abs(v);
        return acc;
    case Norm::L2:
        for (double v : x) acc += v * v;
        return std::sqrt(acc);
    case Norm::Linf:
        for (double v : x) acc = std::max(acc, std::abs(v));
        return acc;
    }
    return acc;
}
} // namespace detail

// ||est - truth|| / ||truth|| over flattened entries.
inline double relative_error(std::span<const double> est, std::span<const double> truth,
                             Norm norm) {
    if (est.size() != truth.size())
        throw argument_error("relative_error: shape mismatch");
    const double denom = detail::norm_of(truth, norm);
    if (denom == 0.0) throw domain_error("relative_error: truth has zero norm");
    std::vector<double> diff(est.size());
    for (std::size_t k = 0; k < est.size(); ++k) diff[k] = est[k] - truth[k];
    return detail::norm_of(diff, norm) / denom;
}

struct ClassificationMetrics {
    double tpr;
    double tnr;
    double ba;
    double threshold;
};

namespace detail {
inline std::pair<double, double> rates_at(std::span<const double> probs,
                                          std::span<const int> labels, double threshold) {
    long tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        const bool predicted = probs[k] > threshold;
        if (labels[k] != 0)
            (predicted ? tp : fn) += 1;
        else
            (predicted ? fp : tn) += 1;
    }
    if (tp + fn == 0 || tn + fp == 0)
        throw domain_error("classification_metrics: labels contain a single class");
    return {static_cast<double>(tp) / (tp + fn), static_cast<double>(tn) / (tn + fp)};
}
} // namespace detail

// Threshold minimizing |TPR - TNR| over all unique predicted values plus the
// midpoints between consecutive ones; ties break toward the larger threshold.
inline double search_threshold(std::span<const double> probs, std::span<const int> labels) {
    if (probs.size() != labels.size() || probs.empty())
        throw argument_error("search_threshold: probabilities and labels mismatch");
    std::vector<double> candidates(probs.begin(), probs.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const std::size_t unique_count = candidates.size();
    for (std::size_t k = 0; k + 1 < unique_count; ++k)
        candidates.push_back(0.5 * (candidates[k] + candidates[k + 1]));
    std::sort(candidates.begin(), candidates.end());

    double best_threshold = candidates.front();
    double best_gap = std::numeric_limits<double>::infinity();
    for (double c : candidates) {
        const auto [tpr, tnr] = detail::rates_at(probs, labels, c);
        const double gap = std::abs(tpr - tnr);
        if (gap < best_gap || (gap == best_gap && c > best_threshold)) {
            best_gap = gap;
            best_threshold = c;
        }
    }
    return best_threshold;
}

inline ClassificationMetrics classification_metrics(std::span<const double> probs,
                                                    std::span<const int> labels,
                                                    double threshold) {
    if (probs.size() != labels.size() || probs.empty())
        throw argument_error("classification_metrics: probabilities and labels mismatch");
    const auto [tpr, tnr] = detail::rates_at(probs, labels, threshold);
    return {tpr, tnr, 0.5 * (tpr + tnr), threshold};
}

// Threshold searched on the validation split, metrics reported on the
// evaluation split.
inline ClassificationMetrics classification_metrics(std::span<const double> val_probs,
                                                    std::span<const int> val_labels,
                                                    std::span<const double> eval_probs,
                                                    std::span<const int> eval_labels) {
    const double threshold = search_threshold(val_probs, val_labels);
    return classification_metrics(eval_probs, eval_labels, threshold);
}

} // namespace tulik
