#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace scengen {

// Standard normal CDF, accurate in both tails (erfc based).
double normal_cdf(double x);

// Standard normal quantile. Arguments are clamped to [1e-300, 1 - 1e-16].
double normal_quantile(double u);

// Two-sided Kolmogorov-Smirnov statistic of `sample` against N(0,1).
double ks_statistic_normal(std::span<const double> sample);

// Asymptotic KS critical value at significance `alpha` for sample size n:
// sqrt(-ln(alpha/2) / 2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha);

// Linear-interpolation sample quantile (type 7): position q * (n - 1) on the
// sorted data.
double sorted_quantile(std::span<const double> sorted, double q);

// 64-bit FNV-1a hash, used to fingerprint serialized model bundles.
std::uint64_t fnv1a64(std::span<const char> bytes);

}  // namespace scengen
