#pragma once

#include <span>
#include <string>
#include <vector>

namespace advprobe::metrics {

// Gold group ranks and predicted real scores over the same keys.
struct RankComparison {
    std::vector<int> gold;
    std::vector<double> predicted;
};

// Fraction of gold-strictly-ordered pairs whose predicted scores agree in
// direction; predicted ties contribute 0.5. UndefinedMetricError when every
// gold pair is tied.
double pairwise_accuracy(const RankComparison& cmp);

// Spearman's rho with average (fractional) ranks assigned to ties on both
// sides, computed as the Pearson correlation of the rank vectors.
// UndefinedMetricError on zero variance.
double spearman_rho(const RankComparison& cmp);

// Kendall's tau-b (tie corrected on both variables).
double kendall_tau_b(const RankComparison& cmp);

// Mean of 1/rank; all ranks must be >= 1, input non-empty.
double mean_reciprocal_rank(std::span<const int> ranks);

// Average ranks (1-based, ties share their mean position); ascending order of
// values. Shared by spearman_rho and the ranking reports.
std::vector<double> fractional_ranks(std::span<const double> values);

} // namespace advprobe::metrics
