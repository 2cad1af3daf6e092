#pragma once

#include <optional>
#include <span>
#include <vector>

namespace gatt {

// Correlation and ranking metrics, implemented from first principles.
// A nullopt result marks a degenerate input (zero variance, single-class
// labels); it is reported, never silently mapped to 0.

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Pearson on average ranks; ties get the mean rank.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Kendall tau-b (tie-corrected), O(n log n).
std::optional<double> kendall(std::span<const double> x, std::span<const double> y);

// Probability that a random positive outscores a random negative, ties
// counted half.
std::optional<double> auroc(std::span<const double> scores,
                            const std::vector<bool>& labels);

// Mean ranks in [1, n], ties averaged.
std::vector<double> average_ranks(std::span<const double> values);

// Decline in prediction confidence: p[argmax p] - p_erased[argmax p].
// Argmax ties break to the lowest index.
double delta_pc(std::span<const double> p, std::span<const double> p_erased);

// Entropy increase: H(p_erased) - H(p), natural log, 0 log 0 = 0.
double delta_ne(std::span<const double> p, std::span<const double> p_erased);

// True iff the argmax class changes.
bool delta_p(std::span<const double> p, std::span<const double> p_erased);

}  // namespace gatt
