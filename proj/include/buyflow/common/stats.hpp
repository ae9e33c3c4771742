#pragma once

#include <span>
#include <vector>

namespace buyflow::stats {

double mean(std::span<const double> xs);

// Population standard deviation (divides by n).
double stddev_population(std::span<const double> xs);

// Sample standard deviation (divides by n - 1); 0 for n < 2.
double stddev_sample(std::span<const double> xs);

// Linear-interpolation quantile on a sorted sample: position q * (n - 1).
double quantile_sorted(std::span<const double> sorted, double q);

// Copies, sorts, and applies quantile_sorted.
double quantile(std::span<const double> xs, double q);
double median(std::span<const double> xs);

// 1-based ranks with ties assigned their average rank.
std::vector<double> average_ranks(std::span<const double> xs);

double pearson(std::span<const double> xs, std::span<const double> ys);

// Pearson correlation of average ranks. Returns 0 when either side is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);

}  // namespace buyflow::stats
