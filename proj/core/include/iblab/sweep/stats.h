#pragma once

#include <span>
#include <vector>

namespace iblab {

// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> a, std::span<const double> b);
// Pearson correlation of the average ranks. NaN when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);
// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_std(std::span<const double> values);

}  // namespace iblab
