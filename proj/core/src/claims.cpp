#include "indexins/claims.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "indexins/errors.hpp"

namespace indexins {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits one delimited line; double quotes group a field and "" escapes one.
std::vector<std::string> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<bool> parse_flag(std::string_view s) {
  const std::string v = lower(trim(s));
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  if (auto d = parse_double(v)) {
    if (*d == 1.0) return true;
    if (*d == 0.0) return false;
  }
  return std::nullopt;
}

std::optional<ServiceType> parse_service(std::string_view s,
                                         const std::vector<std::string>& levels) {
  const std::string v = lower(trim(s));
  for (std::size_t k = 0; k < levels.size() && k < kServiceLevels; ++k) {
    if (v == lower(levels[k])) return static_cast<ServiceType>(k);
  }
  int idx = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), idx);
  if (ec == std::errc{} && ptr == v.data() + v.size() && idx >= 1 &&
      idx <= static_cast<int>(kServiceLevels)) {
    return static_cast<ServiceType>(idx - 1);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ServiceType s) noexcept {
  static constexpr std::array<std::string_view, kServiceLevels> names{"t1", "t2", "t3", "t4",
                                                                      "t5"};
  return names[static_cast<std::size_t>(s)];
}

std::string_view to_string(Stratum s) noexcept {
  switch (s) {
    case Stratum::pooled: return "pooled";
    case Stratum::backup_activated: return "delta1";
    case Stratum::backup_failed: return "delta0";
  }
  return "pooled";
}

std::string_view to_string(Variable v) noexcept {
  switch (v) {
    case Variable::loss: return "Y";
    case Variable::duration: return "T";
    case Variable::backup_activated: return "delta";
    case Variable::backup_quality: return "B";
    case Variable::backup_excess: return "Lambda";
  }
  return "?";
}

std::string_view to_string(ExpectationMode m) noexcept {
  return m == ExpectationMode::annual_mixture ? "annual" : "claims";
}

bool in_stratum(const ClaimRecord& record, Stratum s) noexcept {
  switch (s) {
    case Stratum::pooled: return true;
    case Stratum::backup_activated: return record.backup_activated;
    case Stratum::backup_failed: return !record.backup_activated;
  }
  return true;
}

double value_of(const ClaimRecord& r, Variable v) noexcept {
  switch (v) {
    case Variable::loss: return r.loss;
    case Variable::duration: return r.duration;
    case Variable::backup_activated: return r.backup_activated ? 1.0 : 0.0;
    case Variable::backup_quality: return r.backup_quality;
    case Variable::backup_excess: return r.backup_excess;
  }
  return 0.0;
}

void validate(const ClaimRecord& r) {
  if (!(r.loss >= 0.0) || !std::isfinite(r.loss)) {
    throw DomainError("loss Y must be finite and >= 0");
  }
  if (!(r.duration > 0.0) || !std::isfinite(r.duration)) {
    throw DomainError("duration T must be finite and > 0");
  }
  if (static_cast<std::size_t>(r.service) >= kServiceLevels) {
    throw DomainError("service type X must be one of t1..t5");
  }
  if (!(r.backup_quality > 0.0 && r.backup_quality < 1.0)) {
    throw DomainError("backup quality B must lie in (0, 1)");
  }
  if (!(r.backup_excess >= 0.0) || !std::isfinite(r.backup_excess)) {
    throw DomainError("backup excess Lambda must be finite and >= 0");
  }
  if (r.backup_excess > r.duration) {
    throw DomainError("backup excess Lambda must not exceed duration T");
  }
}

ClaimDataset::ClaimDataset(std::vector<ClaimRecord> records, double claim_frequency)
    : records_(std::move(records)), claim_frequency_(claim_frequency) {
  if (records_.empty()) throw EmptyDatasetError("claim dataset is empty");
  if (!(claim_frequency_ > 0.0 && claim_frequency_ < 1.0)) {
    throw DomainError("claim frequency p must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    try {
      validate(records_[i]);
    } catch (const DomainError& e) {
      throw RowError(i + 1, e.what());
    }
    max_loss_ = std::max(max_loss_, records_[i].loss);
  }
}

std::vector<double> ClaimDataset::losses() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.loss);
  return out;
}

ClaimDataset ClaimDataset::select(Stratum s) const {
  std::vector<ClaimRecord> kept;
  std::copy_if(records_.begin(), records_.end(), std::back_inserter(kept),
               [s](const ClaimRecord& r) { return in_stratum(r, s); });
  if (kept.empty()) {
    throw EmptySelectionError("no claim left in stratum " + std::string(to_string(s)));
  }
  return ClaimDataset(std::move(kept), claim_frequency_);
}

ClaimDataset ClaimDataset::with_loss_scale(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw DomainError("loss scale must be positive");
  }
  std::vector<ClaimRecord> scaled(records_.begin(), records_.end());
  for (auto& r : scaled) r.loss *= factor;
  return ClaimDataset(std::move(scaled), claim_frequency_);
}

ClaimDataset parse_claims(std::istream& in, const ColumnMap& columns,
                          const LoadOptions& options) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      // A UTF-8 byte-order mark would otherwise glue itself to the first name.
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      header = split_fields(line, options.delimiter);
      break;
    }
  }
  if (header.empty()) throw EmptyDatasetError("claims file is empty");

  auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw SchemaError(name, "claims file has no column named '" + name + "'");
  };
  const std::size_t i_loss = column_index(columns.loss);
  const std::size_t i_duration = column_index(columns.duration);
  const std::size_t i_service = column_index(columns.service_type);
  const std::size_t i_activated = column_index(columns.backup_activated);
  const std::size_t i_quality = column_index(columns.backup_quality);
  const std::size_t i_excess = column_index(columns.backup_excess);

  std::vector<ClaimRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line, options.delimiter);
    if (fields.size() != header.size()) {
      throw RowError(row, "expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()));
    }
    auto number = [&](std::size_t idx, const std::string& name) {
      const auto v = parse_double(fields[idx]);
      if (!v) throw RowError(row, "cannot parse " + name + " value '" + fields[idx] + "'");
      return *v;
    };
    ClaimRecord r;
    r.loss = number(i_loss, columns.loss);
    r.duration = number(i_duration, columns.duration);
    r.backup_quality = number(i_quality, columns.backup_quality);
    r.backup_excess = number(i_excess, columns.backup_excess);
    const auto service = parse_service(fields[i_service], options.service_levels);
    if (!service) {
      throw RowError(row, "unknown service type '" + fields[i_service] + "'");
    }
    r.service = *service;
    const auto activated = parse_flag(fields[i_activated]);
    if (!activated) {
      throw RowError(row, "cannot parse backup indicator '" + fields[i_activated] + "'");
    }
    r.backup_activated = *activated;
    try {
      validate(r);
    } catch (const DomainError& e) {
      throw RowError(row, e.what());
    }
    records.push_back(r);
  }
  if (records.empty()) throw EmptyDatasetError("claims file has a header but no rows");
  return ClaimDataset(std::move(records), options.claim_frequency);
}

ClaimDataset load_claims(const std::filesystem::path& path, const ColumnMap& columns,
                         const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open claims file " + path.string());
  return parse_claims(in, columns, options);
}

void write_claims(std::ostream& out, const ClaimDataset& ds, const ColumnMap& columns,
                  char delimiter) {
  const char d = delimiter;
  out << columns.loss << d << columns.duration << d << columns.service_type << d
      << columns.backup_activated << d << columns.backup_quality << d << columns.backup_excess
      << '\n';
  std::ostringstream buf;
  buf << std::setprecision(17);
  for (const auto& r : ds.records()) {
    buf << r.loss << d << r.duration << d << to_string(r.service) << d
        << (r.backup_activated ? 1 : 0) << d << r.backup_quality << d << r.backup_excess << '\n';
  }
  out << buf.str();
}

const Summary& DescriptiveStats::at(Variable v) const {
  for (const auto& vs : variables) {
    if (vs.variable == v) return vs.stats;
  }
  throw DomainError("variable not described");
}

DescriptiveStats describe(const ClaimDataset& ds, Stratum stratum) {
  static constexpr std::array<Variable, 5> kVariables{
      Variable::loss, Variable::duration, Variable::backup_activated, Variable::backup_quality,
      Variable::backup_excess};
  DescriptiveStats out;
  out.stratum = stratum;
  std::vector<const ClaimRecord*> kept;
  for (const auto& r : ds.records()) {
    if (in_stratum(r, stratum)) kept.push_back(&r);
  }
  if (kept.empty()) {
    throw EmptySelectionError("no claim in stratum " + std::string(to_string(stratum)));
  }
  out.count = kept.size();
  std::vector<double> column(kept.size());
  for (Variable v : kVariables) {
    std::transform(kept.begin(), kept.end(), column.begin(),
                   [v](const ClaimRecord* r) { return value_of(*r, v); });
    out.variables.push_back({v, summarize(column)});
  }
  return out;
}

double correlation(const ClaimDataset& ds, Variable a, Variable b, Stratum stratum) {
  std::vector<double> x, y;
  for (const auto& r : ds.records()) {
    if (!in_stratum(r, stratum)) continue;
    x.push_back(value_of(r, a));
    y.push_back(value_of(r, b));
  }
  if (x.empty()) {
    throw EmptySelectionError("no claim in stratum " + std::string(to_string(stratum)));
  }
  return pearson(x, y);
}

double expectation(const ClaimDataset& ds, const std::function<double(double)>& g,
                   ExpectationMode mode) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double v = g(ds[i].loss);
    if (!std::isfinite(v)) {
      throw OverflowError(i, "expectation: integrand not finite at record " +
                                 std::to_string(i) + " (loss " + std::to_string(ds[i].loss) +
                                 ")");
    }
    sum.add(v);
  }
  const double claim_mean = sum.value() / static_cast<double>(ds.size());
  if (mode == ExpectationMode::claims_only) return claim_mean;
  const double g0 = g(0.0);
  if (!std::isfinite(g0)) throw OverflowError(0, "expectation: integrand not finite at 0");
  const double p = ds.claim_frequency();
  return (1.0 - p) * g0 + p * claim_mean;
}

double annual_expectation(const ClaimDataset& ds, const std::function<double(double)>& g) {
  return expectation(ds, g, ExpectationMode::annual_mixture);
}

}  // namespace indexins
