#ifndef INDEXINS_MODEL_IO_HPP
#define INDEXINS_MODEL_IO_HPP

#include <filesystem>
#include <iosfwd>

#include "indexins/payout.hpp"

namespace indexins {

// Text format, one record per line, doubles as C99 hex floats so a reload is
// bit-identical:
//
//   indexins-model 1
//   method <linear|tree|forest|boosted>
//   seed <u64>
//   training_rows <n>
//   hyper <key>=<value> ...
//   linear <k> <col_1> ... <col_k>
//   coefficients <c_0> ... <c_k>
// or
//   ensemble <base> <weight> <tree count>
//   tree <node count> <sample key>
//   node <feature> <threshold> <left> <right> <value> <samples>   (x node count)
//   end
void save_model(std::ostream& out, const PayoutModel& model);
void save_model(const std::filesystem::path& path, const PayoutModel& model);

/// Throws DataError on a malformed or truncated stream.
PayoutModel load_model(std::istream& in);
PayoutModel load_model(const std::filesystem::path& path);

}  // namespace indexins

#endif  // INDEXINS_MODEL_IO_HPP
