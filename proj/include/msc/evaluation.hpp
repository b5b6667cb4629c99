#pragma once

#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "msc/errors.hpp"
#include "msc/spectral.hpp"

namespace msc {

inline double entropy(std::span<const double> probs, bool log2_base = false) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return log2_base ? h / std::log(2.0) : h;
}

// Size-weighted mean entropy of the per-cluster tag distributions of one
// source (lower = purer clusters). Unweighted variant averages clusters
// equally.
inline double mean_entropy(std::span<const TagProfile> profiles, std::span<const int> sizes,
                           bool size_weighted = true, bool log2_base = false) {
    if (profiles.size() != sizes.size())
        throw MscError(ErrorCode::invalid_argument, "mean_entropy: profile/size count mismatch");
    if (profiles.empty()) throw MscError(ErrorCode::empty_input, "mean_entropy: no clusters");
    double total = 0.0;
    double weight_sum = 0.0;
    for (std::size_t c = 0; c < profiles.size(); ++c) {
        const double w = size_weighted ? static_cast<double>(sizes[c]) : 1.0;
        total += w * entropy(profiles[c].probs, log2_base);
        weight_sum += w;
    }
    return weight_sum > 0.0 ? total / weight_sum : 0.0;
}

inline double mean_entropy(const ClusterModel& model, int source, bool size_weighted = true,
                           bool log2_base = false) {
    std::vector<TagProfile> profiles;
    profiles.reserve(model.tag_profiles.size());
    for (const auto& per_source : model.tag_profiles)
        profiles.push_back(per_source[static_cast<std::size_t>(source)]);
    return mean_entropy(profiles, model.cluster_sizes, size_weighted, log2_base);
}

struct AccuracyReport {
    double accuracy = 0.0;
    std::vector<std::vector<long long>> confusion;  // [truth][predicted]
    long long total = 0;
};

// Exact-match accuracy plus a per-class confusion matrix (rows = truth).
inline AccuracyReport tagging_accuracy(std::span<const int> predictions, std::span<const int> truth,
                                       int num_classes) {
    if (predictions.size() != truth.size())
        throw MscError(ErrorCode::id_mismatch, "tagging_accuracy: prediction/truth count mismatch");
    if (predictions.empty()) throw MscError(ErrorCode::empty_input, "tagging_accuracy: no samples");
    AccuracyReport report;
    report.total = static_cast<long long>(predictions.size());
    report.confusion.assign(static_cast<std::size_t>(num_classes),
                            std::vector<long long>(static_cast<std::size_t>(num_classes), 0));
    long long correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= num_classes || predictions[i] < 0 || predictions[i] >= num_classes)
            throw MscError(ErrorCode::invalid_argument, "tagging_accuracy: class index out of range");
        ++report.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predictions[i])];
        if (predictions[i] == truth[i]) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(report.total);
    return report;
}

// Id-aligned overload: every prediction must have a matching truth id.
inline AccuracyReport tagging_accuracy(const std::vector<std::string>& ids,
                                       std::span<const int> predictions,
                                       const std::unordered_map<std::string, int>& truth_by_id,
                                       int num_classes) {
    std::vector<int> truth;
    truth.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = truth_by_id.find(id);
        if (it == truth_by_id.end())
            throw MscError(ErrorCode::id_mismatch, "tagging_accuracy: no ground truth for id '" + id + "'");
        truth.push_back(it->second);
    }
    return tagging_accuracy(predictions, truth, num_classes);
}

}  // namespace msc
