#include "indexins/features.hpp"

#include "indexins/errors.hpp"

namespace indexins {

void validate(const IndexFeatures& w) {
  ClaimRecord r;
  r.loss = 0.0;
  r.duration = w.duration;
  r.service = w.service;
  r.backup_activated = w.backup_activated;
  r.backup_quality = w.backup_quality;
  r.backup_excess = w.backup_excess;
  validate(r);
}

FeatureRow encode(const IndexFeatures& w) noexcept {
  FeatureRow x{};
  x[kDuration] = w.duration;
  x[kServiceT1 + static_cast<std::size_t>(w.service)] = 1.0;
  x[kBackupActivated] = w.backup_activated ? 1.0 : 0.0;
  x[kBackupQuality] = w.backup_quality;
  x[kBackupExcess] = w.backup_excess;
  return x;
}

std::string_view feature_name(std::size_t column) {
  static constexpr std::array<std::string_view, kFeatureCount> names{
      "T", "X=t1", "X=t2", "X=t3", "X=t4", "X=t5", "delta", "B", "Lambda"};
  if (column >= kFeatureCount) throw DomainError("feature column out of range");
  return names[column];
}

DesignMatrix::DesignMatrix(const ClaimDataset& ds)
    : rows_(ds.size()), data_(ds.size() * kFeatureCount) {
  for (std::size_t i = 0; i < rows_; ++i) {
    const FeatureRow x = encode(IndexFeatures::of(ds[i]));
    for (std::size_t c = 0; c < kFeatureCount; ++c) data_[c * rows_ + i] = x[c];
  }
}

FeatureRow DesignMatrix::row(std::size_t r) const noexcept {
  FeatureRow x{};
  for (std::size_t c = 0; c < kFeatureCount; ++c) x[c] = at(r, c);
  return x;
}

}  // namespace indexins
