#ifndef INDEXINS_NUMERICS_HPP
#define INDEXINS_NUMERICS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace indexins {

/// P(Z >= x) for a standard normal Z.
double std_normal_survival(double x);

/// Inverse of std_normal_survival on (0, 1). Throws DomainError outside.
double std_normal_survival_inv(double eps);

/// Generalized Pareto tail with shape gamma in (0, 1) and scale s > 0.
class GpdTail {
 public:
  GpdTail(double shape, double scale);

  double shape() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }

 private:
  double shape_;
  double scale_;
};

/// P(A_n >= t) when A_n is Generalized Pareto with scale n * tail.scale():
/// (1 + gamma t / (n s))^(-1/gamma).
double gpd_exceedance(double t, const GpdTail& tail, std::int64_t n);

struct RootOptions {
  double tol = 1e-10;
  int max_iterations = 400;
};

/// Bisection on a bracket [lo, hi] where f changes sign.
///
/// Terminates once the bracket is narrower than `tol` (or cannot shrink any
/// further in floating point) and returns its midpoint, or returns an exact
/// zero of f if one is hit. Throws BracketError when f(lo) and f(hi) share a
/// sign and ConvergenceError when max_iterations is exhausted first.
double find_root_bracketed(const std::function<double(double)>& f, double lo,
                           double hi, RootOptions options = {});

/// Compensated (Neumaier) summation. Deterministic for a fixed input order.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values);
double mean(std::span<const double> values);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1); 0 for a single value
};

/// Throws EmptySelectionError on empty input.
Summary summarize(std::span<const double> values);

/// Population variance (divides by n).
double population_variance(std::span<const double> values);

/// Pearson correlation. Throws UndefinedCorrelationError when either input is
/// constant or fewer than two values are given.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace indexins

#endif  // INDEXINS_NUMERICS_HPP
