#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace scengen {

// Invertible marginal distribution of one deviation series (unit, lag). Each
// model provides a continuous strictly increasing cdf and its exact inverse,
// which is what lets samples move to and from the Gaussian copula domain.

struct EmpiricalModel {
  // Distinct sorted sample values with plotting positions (i - 0.5) / N;
  // duplicates are collapsed onto their averaged position so the cdf stays
  // strictly increasing.
  std::vector<double> values;
  std::vector<double> positions;
  // Beyond the sample extremes the cdf decays exponentially toward 0 (resp.
  // 1) with this e-folding scale in MW, keeping the Gaussian quantile finite.
  double span = 1.0;
  std::size_t sample_size = 0;

  double cdf(double x) const;
  double quantile(double u) const;
};

// One generalized Pareto tail in exceedance form: z >= 0 measures how far
// past the threshold a point lies, and survival(z) is the conditional
// probability of exceeding the threshold by more than z.
struct GpdTail {
  double threshold = 0.0;
  double xi = 0.0;    // shape; >= 0.5 means infinite variance
  double beta = 1.0;  // scale, > 0
  double fraction = 0.0;  // total probability mass beyond the threshold

  double survival(double z) const;            // (1 + xi z / beta)^(-1/xi)
  double exceedance_quantile(double s) const;  // inverse of survival
};

// Semi-parametric spliced distribution: empirical body between two
// thresholds, generalized Pareto tails outside them. body_x/body_u are the
// nodes of the piecewise-linear body cdf; the first and last node sit exactly
// on the thresholds so the splice is continuous.
struct GpdTailModel {
  GpdTail lower;  // distribution of T_lo - X given X < T_lo
  GpdTail upper;  // distribution of X - T_hi given X > T_hi
  std::vector<double> body_x;
  std::vector<double> body_u;
  std::size_t sample_size = 0;

  double cdf(double x) const;
  double quantile(double u) const;
};

struct NormalModel {
  double mean = 0.0;
  double sd = 1.0;

  double cdf(double x) const;
  double quantile(double u) const;
};

// Degenerate marginal for series that never deviate (e.g. solar at night).
struct ConstantModel {
  double value = 0.0;

  double cdf(double) const { return 0.5; }
  double quantile(double) const { return value; }
};

using Marginal =
    std::variant<EmpiricalModel, GpdTailModel, NormalModel, ConstantModel>;

double cdf(const Marginal& m, double x);
double quantile(const Marginal& m, double u);

// z = Phi^-1(cdf(x)) and its inverse x = quantile(Phi(z)).
double to_gaussian_value(const Marginal& m, double x);
double from_gaussian_value(const Marginal& m, double z);
std::vector<double> to_gaussian(std::span<const double> xs, const Marginal& m);
std::vector<double> from_gaussian(std::span<const double> zs, const Marginal& m);

struct GpdFit {
  double xi = 0.0;
  double beta = 1.0;
  // Set when the likelihood profile had no usable interior optimum and the
  // probability-weighted-moment estimate was used instead.
  bool used_pwm = false;
};

// Maximum-likelihood GPD fit to positive exceedances via Grimshaw's profile
// over eta = xi / beta, reducing the problem to one dimension.
GpdFit fit_gpd_exceedances(std::span<const double> exceedances);

EmpiricalModel fit_empirical(std::span<const double> sample,
                             double span_fraction = 0.1);

NormalModel fit_normal(std::span<const double> sample);

struct MarginalFitResult {
  Marginal marginal;
  std::vector<std::string> warnings;
};

// Spliced GPD-tail fit with thresholds at the tail_fraction empirical
// quantiles. Samples shorter than min_sample fall back to a plain empirical
// model (reported through warnings), as does a tail whose profile likelihood
// cannot be maximized.
MarginalFitResult fit_gpd_tails(std::span<const double> sample,
                                double tail_fraction = 0.15,
                                std::size_t min_sample = 100);

// Deviation distribution conditional on the forecast level: equal-count bins
// over the observed forecasts, one empirical deviation model per bin.
// Forecasts outside the observed range use the nearest edge bin.
struct BinnedConditionalModel {
  std::vector<double> edges;  // interior boundaries, size bins.size() - 1
  std::vector<EmpiricalModel> bins;

  int bin_for(double forecast) const;
};

struct ConditionalFitResult {
  BinnedConditionalModel model;
  std::vector<std::string> warnings;
};

ConditionalFitResult fit_conditional_bins(std::span<const double> forecasts,
                                          std::span<const double> deviations,
                                          int num_bins = 10,
                                          int min_bin_count = 20);

// Per-bin quantile of the deviation at probability u, for the bin holding
// the given forecast.
double conditional_sample_value(const BinnedConditionalModel& model,
                                double forecast, double u);

}  // namespace scengen
