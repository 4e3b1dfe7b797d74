#include "advprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advprobe/errors.hpp"

namespace advprobe::metrics {

namespace {

void check_comparison(const RankComparison& cmp) {
    if (cmp.gold.size() != cmp.predicted.size()) {
        throw UndefinedMetricError("rank comparison sides have different sizes");
    }
    if (cmp.gold.size() < 2) {
        throw UndefinedMetricError("rank comparison needs at least two items");
    }
}

} // namespace

double pairwise_accuracy(const RankComparison& cmp) {
    check_comparison(cmp);
    const size_t n = cmp.gold.size();
    double agree = 0.0;
    long pairs = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (cmp.gold[i] == cmp.gold[j]) continue;
            ++pairs;
            const double d = (cmp.predicted[i] - cmp.predicted[j]) *
                             static_cast<double>(cmp.gold[i] - cmp.gold[j]);
            if (d > 0.0) agree += 1.0;
            else if (d == 0.0) agree += 0.5;
        }
    }
    if (pairs == 0) throw UndefinedMetricError("pairwise accuracy undefined: all gold pairs tied");
    return agree / static_cast<double>(pairs);
}

std::vector<double> fractional_ranks(std::span<const double> values) {
    const size_t n = values.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman_rho(const RankComparison& cmp) {
    check_comparison(cmp);
    const size_t n = cmp.gold.size();
    std::vector<double> gold_d(cmp.gold.begin(), cmp.gold.end());
    std::vector<double> rx = fractional_ranks(gold_d);
    std::vector<double> ry = fractional_ranks(cmp.predicted);
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) { mx += rx[i]; my += ry[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedMetricError("spearman rho undefined: zero variance in a rank vector");
    }
    return sxy / std::sqrt(sxx * syy);
}

double kendall_tau_b(const RankComparison& cmp) {
    check_comparison(cmp);
    const size_t n = cmp.gold.size();
    long long concordant = 0, discordant = 0;
    long long ties_x = 0, ties_y = 0; // pairs tied in gold resp. predicted only, plus joint ties
    long long ties_both = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const int gx = cmp.gold[i] - cmp.gold[j];
            const double gy = cmp.predicted[i] - cmp.predicted[j];
            if (gx == 0 && gy == 0.0) { ++ties_both; continue; }
            if (gx == 0) { ++ties_x; continue; }
            if (gy == 0.0) { ++ties_y; continue; }
            if ((gx > 0) == (gy > 0.0)) ++concordant;
            else ++discordant;
        }
    }
    const long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
    const long long n1 = ties_x + ties_both;
    const long long n2 = ties_y + ties_both;
    const double denom = std::sqrt(static_cast<double>(n0 - n1)) *
                         std::sqrt(static_cast<double>(n0 - n2));
    if (denom == 0.0) {
        throw UndefinedMetricError("kendall tau-b undefined: a variable is constant");
    }
    return static_cast<double>(concordant - discordant) / denom;
}

double mean_reciprocal_rank(std::span<const int> ranks) {
    if (ranks.empty()) throw UndefinedMetricError("mean reciprocal rank of empty input");
    double sum = 0.0;
    for (int r : ranks) {
        if (r < 1) throw UndefinedMetricError("rank must be >= 1, got " + std::to_string(r));
        sum += 1.0 / static_cast<double>(r);
    }
    return sum / static_cast<double>(ranks.size());
}

} // namespace advprobe::metrics
