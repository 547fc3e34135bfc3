#ifndef INDEXINS_CLAIMS_HPP
#define INDEXINS_CLAIMS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "indexins/numerics.hpp"

namespace indexins {

/// Impacted service category; the level order t1..t5 is the encoding order.
enum class ServiceType : std::uint8_t { t1 = 0, t2, t3, t4, t5 };
inline constexpr std::size_t kServiceLevels = 5;

std::string_view to_string(ServiceType s) noexcept;

/// One business-interruption claim. Monetary unit: 10^3 EUR; time: days.
struct ClaimRecord {
  double loss = 0.0;              // Y >= 0
  double duration = 0.0;          // T > 0
  ServiceType service = ServiceType::t1;
  bool backup_activated = false;  // delta
  double backup_quality = 0.5;    // B in (0, 1)
  double backup_excess = 0.0;     // Lambda = (T - U)_+, 0 <= Lambda <= T
};

/// Throws DomainError naming the first violated field.
void validate(const ClaimRecord& record);

/// Which backup stratum to keep.
enum class Stratum { pooled, backup_activated, backup_failed };

std::string_view to_string(Stratum s) noexcept;
bool in_stratum(const ClaimRecord& record, Stratum s) noexcept;

/// Immutable, validated claim collection plus the annual claim probability p.
///
/// Expectations over "a policyholder's year" mix a no-claim atom of mass
/// 1 - p with the empirical claim distribution (mass p); see
/// annual_expectation().
class ClaimDataset {
 public:
  ClaimDataset(std::vector<ClaimRecord> records, double claim_frequency);

  std::span<const ClaimRecord> records() const noexcept { return records_; }
  const ClaimRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const noexcept { return records_.size(); }
  double claim_frequency() const noexcept { return claim_frequency_; }

  std::vector<double> losses() const;
  double max_loss() const noexcept { return max_loss_; }

  /// Copy restricted to a backup stratum. Throws EmptySelectionError when no
  /// record is retained.
  ClaimDataset select(Stratum s) const;

  /// Copy with every loss multiplied by `factor` (> 0).
  ClaimDataset with_loss_scale(double factor) const;

 private:
  std::vector<ClaimRecord> records_;
  double claim_frequency_;
  double max_loss_ = 0.0;
};

/// Header names of the six claim fields in a delimited file.
struct ColumnMap {
  std::string loss = "Y";
  std::string duration = "T";
  std::string service_type = "X";
  std::string backup_activated = "delta";
  std::string backup_quality = "B";
  std::string backup_excess = "Lambda";
};

struct LoadOptions {
  char delimiter = ',';
  double claim_frequency = 0.06;
  // Labels for t1..t5 in the file. Bare integers 1..5 are also accepted.
  std::vector<std::string> service_levels{"t1", "t2", "t3", "t4", "t5"};
};

ClaimDataset load_claims(const std::filesystem::path& path, const ColumnMap& columns = {},
                         const LoadOptions& options = {});
ClaimDataset parse_claims(std::istream& in, const ColumnMap& columns = {},
                          const LoadOptions& options = {});

/// Writes the dataset in the format accepted by load_claims().
void write_claims(std::ostream& out, const ClaimDataset& ds, const ColumnMap& columns = {},
                  char delimiter = ',');

enum class Variable { loss, duration, backup_activated, backup_quality, backup_excess };

std::string_view to_string(Variable v) noexcept;
double value_of(const ClaimRecord& r, Variable v) noexcept;

struct VariableSummary {
  Variable variable;
  Summary stats;
};

struct DescriptiveStats {
  Stratum stratum = Stratum::pooled;
  std::size_t count = 0;
  std::vector<VariableSummary> variables;

  const Summary& at(Variable v) const;
};

/// Exact sample statistics of every numeric field over the retained rows.
DescriptiveStats describe(const ClaimDataset& ds, Stratum stratum = Stratum::pooled);

double correlation(const ClaimDataset& ds, Variable a, Variable b,
                   Stratum stratum = Stratum::pooled);

/// How an unconditional expectation over a policyholder-year is formed.
enum class ExpectationMode {
  annual_mixture,  // (1 - p) g(0) + p * mean_i g(Y_i)
  claims_only,     // mean_i g(Y_i)
};

std::string_view to_string(ExpectationMode m) noexcept;

/// (1 - p) g(0) + p * mean over claims of g(Y). Throws OverflowError naming
/// the first record where g is not finite.
double annual_expectation(const ClaimDataset& ds, const std::function<double(double)>& g);

double expectation(const ClaimDataset& ds, const std::function<double(double)>& g,
                   ExpectationMode mode);

}  // namespace indexins

#endif  // INDEXINS_CLAIMS_HPP
