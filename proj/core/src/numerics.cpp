#include "indexins/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "indexins/errors.hpp"

namespace indexins {

namespace {

// Lower-tail normal cdf via erfc; accurate in both tails.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Acklam's rational approximation of the normal quantile, |rel err| < 1.2e-9.
double acklam_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_survival(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double std_normal_survival_inv(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DomainError("std_normal_survival_inv: probability must lie in (0, 1), got " +
                      std::to_string(eps));
  }
  // S^{-1}(eps) = -Phi^{-1}(eps); refine the lower quantile with two Halley
  // steps, which brings it to full double precision.
  double z = acklam_quantile(eps);
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(z) - eps;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * z * z);
    z -= u / (1.0 + 0.5 * z * u);
  }
  return -z;
}

GpdTail::GpdTail(double shape, double scale) : shape_(shape), scale_(scale) {
  if (!(shape > 0.0 && shape < 1.0)) {
    throw DomainError("GpdTail: shape must lie in (0, 1)");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("GpdTail: scale must be positive");
  }
}

double gpd_exceedance(double t, const GpdTail& tail, std::int64_t n) {
  if (!(t >= 0.0)) throw DomainError("gpd_exceedance: t must be non-negative");
  if (n < 1) throw DomainError("gpd_exceedance: n must be at least 1");
  const double g = tail.shape();
  const double z = g * t / (static_cast<double>(n) * tail.scale());
  return std::exp(-std::log1p(z) / g);
}

double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           RootOptions options) {
  if (!(lo <= hi)) std::swap(lo, hi);
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw BracketError("find_root_bracketed: bracket must be finite");
  }
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (std::isnan(f_lo) || std::isnan(f_hi)) {
    throw DomainError("find_root_bracketed: function is NaN at the bracket ends");
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw BracketError("find_root_bracketed: no sign change on [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]");
  }

  for (int it = 0; it < options.max_iterations; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (hi - lo <= options.tol || mid <= lo || mid >= hi) return mid;
    const double f_mid = f(mid);
    if (std::isnan(f_mid)) throw DomainError("find_root_bracketed: function is NaN");
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  throw ConvergenceError("find_root_bracketed: no convergence after " +
                         std::to_string(options.max_iterations) + " iterations");
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value();
}

double mean(std::span<const double> values) {
  if (values.empty()) throw EmptySelectionError("mean of an empty sample");
  return compensated_sum(values) / static_cast<double>(values.size());
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw EmptySelectionError("summary of an empty sample");
  Summary s;
  s.count = values.size();
  s.mean = mean(values);
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  s.min = *mn;
  s.max = *mx;
  if (s.count > 1) {
    CompensatedSum ss;
    for (double v : values) ss.add((v - s.mean) * (v - s.mean));
    s.sd = std::sqrt(ss.value() / static_cast<double>(s.count - 1));
  }
  return s;
}

double population_variance(std::span<const double> values) {
  const double m = mean(values);
  CompensatedSum ss;
  for (double v : values) ss.add((v - m) * (v - m));
  return ss.value() / static_cast<double>(values.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson: length mismatch");
  if (x.size() < 2) throw UndefinedCorrelationError("pearson: need at least two values");
  const double mx = mean(x);
  const double my = mean(y);
  CompensatedSum sxy, sxx, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy.add(dx * dy);
    sxx.add(dx * dx);
    syy.add(dy * dy);
  }
  if (sxx.value() <= 0.0 || syy.value() <= 0.0) {
    throw UndefinedCorrelationError("pearson: correlation undefined for a constant variable");
  }
  const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace indexins
