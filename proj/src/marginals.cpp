#include "scengen/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scengen/errors.hpp"
#include "scengen/mathutil.hpp"

namespace scengen {

namespace {

constexpr double kExponentialBranch = 1e-6;  // |xi| below this means xi = 0
constexpr double kMinProb = 1e-300;
constexpr double kMaxProb = 1.0 - 1e-16;

// Linear interpolation through strictly increasing nodes; arguments outside
// the node range return the boundary ordinate.
double piecewise_linear(const std::vector<double>& xs,
                        const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

double EmpiricalModel::cdf(double x) const {
  double u;
  if (x < values.front()) {
    u = positions.front() * std::exp((x - values.front()) / span);
  } else if (x > values.back()) {
    u = 1.0 - (1.0 - positions.back()) * std::exp(-(x - values.back()) / span);
  } else {
    u = piecewise_linear(values, positions, x);
  }
  return std::clamp(u, kMinProb, kMaxProb);
}

double EmpiricalModel::quantile(double u) const {
  u = std::clamp(u, kMinProb, kMaxProb);
  if (u < positions.front()) {
    return values.front() + span * std::log(u / positions.front());
  }
  if (u > positions.back()) {
    return values.back() - span * std::log((1.0 - u) / (1.0 - positions.back()));
  }
  return piecewise_linear(positions, values, u);
}

double GpdTail::survival(double z) const {
  if (z <= 0.0) return 1.0;
  if (std::abs(xi) < kExponentialBranch) return std::exp(-z / beta);
  const double a = xi * z / beta;
  if (1.0 + a <= 0.0) return 0.0;  // past the finite endpoint when xi < 0
  return std::exp(-std::log1p(a) / xi);
}

double GpdTail::exceedance_quantile(double s) const {
  s = std::clamp(s, kMinProb, 1.0);
  if (std::abs(xi) < kExponentialBranch) return -beta * std::log(s);
  return beta * std::expm1(-xi * std::log(s)) / xi;
}

double GpdTailModel::cdf(double x) const {
  double u;
  if (x < body_x.front()) {
    u = lower.fraction * lower.survival(lower.threshold - x);
  } else if (x > body_x.back()) {
    u = 1.0 - upper.fraction * upper.survival(x - upper.threshold);
  } else {
    u = piecewise_linear(body_x, body_u, x);
  }
  // Clamped just enough to keep the Gaussian quantile finite; anything
  // tighter would distort round trips at the observed extremes.
  return std::clamp(u, kMinProb, kMaxProb);
}

double GpdTailModel::quantile(double u) const {
  u = std::clamp(u, kMinProb, kMaxProb);
  if (u < body_u.front()) {
    return lower.threshold - lower.exceedance_quantile(u / lower.fraction);
  }
  if (u > body_u.back()) {
    return upper.threshold + upper.exceedance_quantile((1.0 - u) / upper.fraction);
  }
  return piecewise_linear(body_u, body_x, u);
}

double NormalModel::cdf(double x) const { return normal_cdf((x - mean) / sd); }

double NormalModel::quantile(double u) const {
  return mean + sd * normal_quantile(u);
}

double cdf(const Marginal& m, double x) {
  return std::visit([x](const auto& model) { return model.cdf(x); }, m);
}

double quantile(const Marginal& m, double u) {
  return std::visit([u](const auto& model) { return model.quantile(u); }, m);
}

double to_gaussian_value(const Marginal& m, double x) {
  return normal_quantile(cdf(m, x));
}

double from_gaussian_value(const Marginal& m, double z) {
  return quantile(m, normal_cdf(z));
}

std::vector<double> to_gaussian(std::span<const double> xs, const Marginal& m) {
  std::vector<double> z(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) z[i] = to_gaussian_value(m, xs[i]);
  return z;
}

std::vector<double> from_gaussian(std::span<const double> zs, const Marginal& m) {
  std::vector<double> x(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) x[i] = from_gaussian_value(m, zs[i]);
  return x;
}

namespace {

// Probability-weighted-moment estimate (Hosking & Wallis). alpha1 is the
// unbiased estimator of E[Y (1 - F(Y))].
GpdFit pwm_fit(std::vector<double> y) {
  std::sort(y.begin(), y.end());
  const std::size_t n = y.size();
  const double b0 = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double a1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    a1 += y[j] * double(n - 1 - j) / double(n - 1);
  }
  a1 /= double(n);
  const double denom = b0 - 2.0 * a1;
  if (denom <= 1e-12 * b0) return GpdFit{0.0, b0, true};
  const double xi = (b0 - 4.0 * a1) / denom;
  const double beta = 2.0 * b0 * a1 / denom;
  if (!std::isfinite(xi) || !(beta > 0.0)) return GpdFit{0.0, b0, true};
  return GpdFit{xi, beta, true};
}

template <typename F>
double golden_max(F f, double a, double b, int iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

}  // namespace

GpdFit fit_gpd_exceedances(std::span<const double> exceedances) {
  const std::size_t n = exceedances.size();
  if (n < 2) throw DegenerateSampleError("need at least 2 exceedances");
  double ybar = 0.0;
  double ymax = 0.0;
  for (double v : exceedances) {
    if (!(v > 0.0)) throw DegenerateSampleError("exceedances must be positive");
    ybar += v;
    ymax = std::max(ymax, v);
  }
  ybar /= double(n);

  std::vector<double> y(exceedances.begin(), exceedances.end());
  if (n < 10) return pwm_fit(y);

  // Grimshaw's reduction: for fixed eta = xi/beta the inner maximum is
  // xi(eta) = mean(log(1 + eta y_i)), giving a one-dimensional profile
  // log-likelihood over eta.
  const auto shape_at = [&](double eta) {
    double k = 0.0;
    for (double v : y) k += std::log1p(eta * v);
    return k / double(n);
  };
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const auto profile = [&](double eta) {
    if (eta == 0.0) return -double(n) * (std::log(ybar) + 1.0);
    if (1.0 + eta * ymax <= 0.0) return neg_inf;
    const double k = shape_at(eta);
    if (!(k / eta > 0.0)) return neg_inf;
    return -double(n) * (std::log(k / eta) + k + 1.0);
  };

  const double eta_floor = -(1.0 - 1e-10) / ymax;
  std::vector<double> grid = {0.0};
  for (int i = 0; i <= 80; ++i) {
    const double s = std::pow(10.0, -5.0 + 10.0 * double(i) / 80.0) / ybar;
    grid.push_back(s);
    if (-s > eta_floor) grid.push_back(-s);
  }
  std::sort(grid.begin(), grid.end());

  std::size_t best = 0;
  double best_val = neg_inf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = profile(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best + 1 == grid.size() || !std::isfinite(best_val)) {
    return pwm_fit(y);  // profile runs away to a boundary
  }

  const double eta = golden_max(profile, grid[best - 1], grid[best + 1], 120);
  if (std::abs(eta) * ybar < 1e-9) return GpdFit{0.0, ybar, false};
  const double xi = shape_at(eta);
  const double beta = xi / eta;
  if (!std::isfinite(xi) || !(beta > 0.0)) return pwm_fit(y);
  return GpdFit{xi, beta, false};
}

EmpiricalModel fit_empirical(std::span<const double> sample,
                             double span_fraction) {
  if (sample.size() < 2) {
    throw DegenerateSampleError("empirical fit needs at least 2 samples");
  }
  if (!(span_fraction > 0.0)) {
    throw ConfigError("extrapolation span fraction must be positive");
  }
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (sorted.front() == sorted.back()) {
    throw DegenerateSampleError("constant sample has no spread to model");
  }

  EmpiricalModel model;
  model.sample_size = n;
  model.span = span_fraction * (sorted.back() - sorted.front());
  // Collapse ties onto the average of their plotting positions (i + 0.5)/n.
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && sorted[j] == sorted[i]) ++j;
    model.values.push_back(sorted[i]);
    model.positions.push_back((double(i) + double(j - 1) + 1.0) / (2.0 * n));
    i = j;
  }
  return model;
}

NormalModel fit_normal(std::span<const double> sample) {
  if (sample.size() < 2) {
    throw DegenerateSampleError("normal fit needs at least 2 samples");
  }
  const double n = double(sample.size());
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : sample) var += (v - mean) * (v - mean);
  var /= n;
  if (!(var > 0.0)) throw DegenerateSampleError("constant sample");
  return NormalModel{mean, std::sqrt(var)};
}

MarginalFitResult fit_gpd_tails(std::span<const double> sample,
                                double tail_fraction, std::size_t min_sample) {
  if (!(tail_fraction > 0.0 && tail_fraction < 0.5)) {
    throw ConfigError("tail fraction must lie in (0, 0.5)");
  }
  MarginalFitResult out;
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() < 2 || sorted.front() == sorted.back()) {
    throw DegenerateSampleError("constant sample has no spread to model");
  }
  const std::size_t n = sorted.size();
  if (n < min_sample) {
    out.warnings.push_back("sample of " + std::to_string(n) +
                           " points is too small for tail fitting (minimum " +
                           std::to_string(min_sample) +
                           "); using the empirical marginal");
    out.marginal = fit_empirical(sample);
    return out;
  }

  const double t_lo = sorted_quantile(sorted, tail_fraction);
  const double t_hi = sorted_quantile(sorted, 1.0 - tail_fraction);
  std::vector<double> lower_exc;
  std::vector<double> upper_exc;
  std::vector<double> body;
  for (double v : sorted) {
    if (v < t_lo) {
      lower_exc.push_back(t_lo - v);
    } else if (v > t_hi) {
      upper_exc.push_back(v - t_hi);
    } else if (v > t_lo && v < t_hi) {
      body.push_back(v);
    }
  }
  if (lower_exc.size() < 10 || upper_exc.size() < 10) {
    out.warnings.push_back(
        "ties leave too few threshold exceedances for tail fitting; "
        "using the empirical marginal");
    out.marginal = fit_empirical(sample);
    return out;
  }

  const GpdFit lo_fit = fit_gpd_exceedances(lower_exc);
  const GpdFit hi_fit = fit_gpd_exceedances(upper_exc);
  if (lo_fit.used_pwm || hi_fit.used_pwm) {
    out.warnings.push_back(
        "tail likelihood profile had no interior optimum; "
        "used the probability-weighted-moment estimate");
  }
  for (const auto& [name, fit] :
       {std::pair{"lower", lo_fit}, std::pair{"upper", hi_fit}}) {
    if (fit.xi >= 0.5) {
      out.warnings.push_back(std::string(name) + " tail shape " +
                             std::to_string(fit.xi) +
                             " implies infinite variance (heavy tail)");
    }
  }

  GpdTailModel model;
  model.sample_size = n;
  model.lower = GpdTail{t_lo, lo_fit.xi, lo_fit.beta,
                        double(lower_exc.size()) / double(n)};
  model.upper = GpdTail{t_hi, hi_fit.xi, hi_fit.beta,
                        double(upper_exc.size()) / double(n)};

  // Body cdf nodes: exact anchors at the thresholds, interior sample points
  // spaced evenly in probability between them, ties collapsed.
  const double p_lo = model.lower.fraction;
  const double p_hi = model.upper.fraction;
  model.body_x.push_back(t_lo);
  model.body_u.push_back(p_lo);
  const double body_mass = 1.0 - p_lo - p_hi;
  std::size_t i = 0;
  while (i < body.size()) {
    std::size_t j = i + 1;
    while (j < body.size() && body[j] == body[i]) ++j;
    const double mid_rank = (double(i) + double(j - 1)) / 2.0 + 1.0;
    model.body_x.push_back(body[i]);
    model.body_u.push_back(p_lo + body_mass * mid_rank / double(body.size() + 1));
    i = j;
  }
  model.body_x.push_back(t_hi);
  model.body_u.push_back(1.0 - p_hi);

  out.marginal = std::move(model);
  return out;
}

int BinnedConditionalModel::bin_for(double forecast) const {
  const auto it = std::upper_bound(edges.begin(), edges.end(), forecast);
  const int i = static_cast<int>(it - edges.begin());
  return std::min(i, static_cast<int>(bins.size()) - 1);
}

ConditionalFitResult fit_conditional_bins(std::span<const double> forecasts,
                                          std::span<const double> deviations,
                                          int num_bins, int min_bin_count) {
  if (forecasts.size() != deviations.size()) {
    throw DataError("forecast and deviation series differ in length");
  }
  if (num_bins < 1 || min_bin_count < 2) {
    throw ConfigError("need at least 1 bin and 2 samples per bin");
  }
  const std::size_t n = forecasts.size();
  ConditionalFitResult out;

  int b = num_bins;
  if (n < std::size_t(b) * std::size_t(min_bin_count)) {
    b = std::max(1, int(n) / min_bin_count);
    out.warnings.push_back("too few samples for " + std::to_string(num_bins) +
                           " forecast bins; reduced to " + std::to_string(b));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return forecasts[a] != forecasts[c] ? forecasts[a] < forecasts[c] : a < c;
  });

  for (int k = 0; k < b; ++k) {
    const std::size_t begin = k * n / b;
    const std::size_t end = (k + 1) * n / b;
    std::vector<double> bin_devs;
    bin_devs.reserve(end - begin);
    for (std::size_t r = begin; r < end; ++r) {
      bin_devs.push_back(deviations[order[r]]);
    }
    out.model.bins.push_back(fit_empirical(bin_devs));
    if (k > 0) {
      const double left = forecasts[order[begin - 1]];
      const double right = forecasts[order[begin]];
      out.model.edges.push_back(0.5 * (left + right));
    }
  }
  return out;
}

double conditional_sample_value(const BinnedConditionalModel& model,
                                double forecast, double u) {
  return model.bins[model.bin_for(forecast)].quantile(u);
}

}  // namespace scengen
