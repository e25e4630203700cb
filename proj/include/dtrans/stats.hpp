#pragma once

#include <vector>

namespace dtrans::stats {

double mean(const std::vector<double>& x);
/// Sample standard deviation (n - 1 denominator).
double stddev(const std::vector<double>& x);
double standard_error(const std::vector<double>& x);
double median(std::vector<double> x);
/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
/// Least-squares slope of y on x.
double slope(const std::vector<double>& x, const std::vector<double>& y);
double pearson(const std::vector<double>& x, const std::vector<double>& y);
/// Upper tail probability of a chi-square statistic.
double chi_square_sf(double statistic, double dof);

}  // namespace dtrans::stats
