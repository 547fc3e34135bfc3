#ifndef INDEXINS_FEATURES_HPP
#define INDEXINS_FEATURES_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "indexins/claims.hpp"

namespace indexins {

/// Covariates observable right after a claim: W = (T, X, delta, B, Lambda).
struct IndexFeatures {
  double duration = 0.0;
  ServiceType service = ServiceType::t1;
  bool backup_activated = false;
  double backup_quality = 0.5;
  double backup_excess = 0.0;

  static IndexFeatures of(const ClaimRecord& r) noexcept {
    return {r.duration, r.service, r.backup_activated, r.backup_quality, r.backup_excess};
  }
};

/// Throws DomainError on the same range violations as validate(ClaimRecord).
void validate(const IndexFeatures& w);

// Encoded column order. X is one-hot over t1..t5.
inline constexpr std::size_t kFeatureCount = 9;
enum FeatureColumn : std::size_t {
  kDuration = 0,
  kServiceT1 = 1,
  kServiceT2 = 2,
  kServiceT3 = 3,
  kServiceT4 = 4,
  kServiceT5 = 5,
  kBackupActivated = 6,
  kBackupQuality = 7,
  kBackupExcess = 8,
};

using FeatureRow = std::array<double, kFeatureCount>;

FeatureRow encode(const IndexFeatures& w) noexcept;
std::string_view feature_name(std::size_t column);

/// Column-major encoded covariates of a dataset.
class DesignMatrix {
 public:
  explicit DesignMatrix(const ClaimDataset& ds);

  std::size_t rows() const noexcept { return rows_; }
  double at(std::size_t row, std::size_t col) const noexcept {
    return data_[col * rows_ + row];
  }
  std::span<const double> column(std::size_t col) const noexcept {
    return {data_.data() + col * rows_, rows_};
  }
  FeatureRow row(std::size_t r) const noexcept;

 private:
  std::size_t rows_;
  std::vector<double> data_;
};

}  // namespace indexins

#endif  // INDEXINS_FEATURES_HPP
