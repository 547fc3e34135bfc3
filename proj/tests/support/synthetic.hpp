#ifndef INDEXINS_TESTS_SYNTHETIC_HPP
#define INDEXINS_TESTS_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>

#include "indexins/claims.hpp"

namespace indexins::fixtures {

struct SyntheticOptions {
  std::size_t claims = 2000;
  std::uint64_t seed = 7;
  double claim_frequency = 0.06;
  double noise = 0.35;  // sd of the multiplicative log-normal noise
  double level = 1.0;   // multiplies every loss
};

/// Business-interruption-like claims: losses grow with the interruption
/// length, shrink with an activated backup, its quality and its excess
/// duration, and vary by service type.
ClaimDataset synthetic_claims(const SyntheticOptions& options = {});

/// Claims whose loss is a deterministic function of W (Var(Y|W) = 0).
ClaimDataset deterministic_claims(std::size_t claims = 400, std::uint64_t seed = 3);

}  // namespace indexins::fixtures

#endif  // INDEXINS_TESTS_SYNTHETIC_HPP
