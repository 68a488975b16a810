#pragma once

// Small-parameter verification: exact privacy distributions, structural and
// sampled query-shape checks, exhaustive recoverability and rate conformance.

#include <cstdint>
#include <string>
#include <vector>

#include "pcsi/grs.h"
#include "pcsi/protocol.h"

namespace pcsi {

struct Fingerprint {
  std::string label;
  std::string digest;

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

struct PrivacyReport {
  std::string audit;
  std::uint64_t seed = 0;
  bool exact = false;
  std::uint64_t count = 0;  // enumerated states or drawn samples
  std::vector<Fingerprint> fingerprints;
  bool shapes_identical = true;
  Rational max_tv_exact{0};  // exact mode only
  double max_tv = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::vector<std::string> failures;
};

// For every valid (W, S), enumerates all coefficients, free multipliers and
// (Model II) secrets, and compares the induced distributions of the u
// vectors a server sees. TooLarge past 10^7 states.
PrivacyReport beta_distribution_audit(Model model, std::uint32_t messages, std::uint32_t side_size,
                                      std::uint32_t prime, const FeVec& omega);

inline constexpr std::uint64_t kMaxAuditStates = 10'000'000;

// Model I parameters with exactly F functions and r >= 2: smallest K, then
// largest M. q is the smallest prime >= max(K, 3).
ProtocolParams shape_audit_params(std::uint32_t servers, std::uint32_t functions);

// Exact part: over `tables` random encodings, queries and keep masks built
// for every f* under identical randomness must have identical shape
// fingerprints. Statistical part: per query slot of server 0, the smallest
// emitted position is sampled `samples` times per f*; the largest pairwise
// TV estimate must stay below `threshold`.
PrivacyReport query_shape_audit(std::uint32_t servers, std::uint32_t functions,
                                std::uint64_t samples, std::uint64_t seed,
                                double threshold = 0.05, std::uint32_t tables = 8);

struct InstanceChoice {
  std::uint32_t demand;
  IndexSet side;
  FeVec coeffs;
};

// Every valid (W, S, C) for the given parameters.
std::vector<InstanceChoice> enumerate_instances(const ProtocolParams& params);

struct RecoverabilityReport {
  ProtocolParams params;
  std::vector<std::uint64_t> db_seeds;
  std::uint64_t runs = 0;
  std::uint64_t failures = 0;        // wrong X_W or an exception
  std::uint64_t rate_mismatches = 0;
  std::uint64_t fallbacks = 0;
  Rational capacity{0};
  bool pass = false;
  std::vector<std::string> notes;
};

RecoverabilityReport exhaustive_recoverability(const ProtocolParams& params,
                                               const std::vector<std::uint64_t>& db_seeds,
                                               std::uint64_t max_runs = 1'000'000);

struct RateCell {
  ProtocolParams params;
  Rational measured{0};
  Rational capacity{0};
  bool decoded = false;
  bool fallback = false;
  std::string error;

  bool ok() const { return decoded && !fallback && error.empty() && measured == capacity; }
};

// Smallest prime >= max(K, 3).
std::uint32_t smallest_prime_for(std::uint32_t messages);

// Every conforming cell with N in `servers`, K <= max_messages, Model I
// M in [0, K-1], Model II M in [2, K] and N^F <= max_symbols.
std::vector<ProtocolParams> default_rate_grid(const std::vector<std::uint32_t>& servers = {2, 3},
                                              std::uint32_t max_messages = 5,
                                              std::uint64_t max_symbols = 4096);

// One seeded run per cell and seed; a cell is measured by its first seed
// and must agree on every seed.
std::vector<RateCell> rate_grid(const std::vector<ProtocolParams>& cells, std::uint64_t seed,
                                std::uint32_t seeds_per_cell = 1);

}  // namespace pcsi
