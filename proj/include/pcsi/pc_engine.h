#pragma once

// Private computation over F functions of r super-messages: query layout,
// answer reduction and decoding of the demanded function.
//
// Every function symbol is addressed by a logical index i in [0, m). The
// user hides the layout behind a permutation pi (logical index -> storage
// position) and a sign flip sigma_i shared by all functions at that index;
// only storage positions and flipped signs leave the client.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcsi/field.h"
#include "pcsi/grs.h"
#include "pcsi/sparse_echelon.h"
#include "pcsi/subsets.h"

namespace pcsi {

struct PcRandomness {
  std::vector<std::uint32_t> perm;  // logical index -> storage position
  std::vector<std::int8_t> signs;   // +1 / -1 per logical index

  std::uint64_t symbols() const { return perm.size(); }
  std::vector<std::uint32_t> inverse_perm() const;

  friend bool operator==(const PcRandomness&, const PcRandomness&) = default;
};

PcRandomness sample_pc_randomness(std::uint64_t symbols, std::uint64_t seed);
PcRandomness identity_pc_randomness(std::uint64_t symbols);

struct Term {
  std::uint32_t function;
  std::uint32_t position;
  std::int8_t sign;  // +1 / -1 as sent to the server

  friend bool operator==(const Term&, const Term&) = default;
};

// How a sum came to be. Servers never see this; a decoded wire query
// carries kUnspecified.
enum class SumOrigin : std::uint8_t { kUnspecified, kDemandBearing, kSymmetry };

struct SumRef {
  std::uint32_t server;
  std::uint32_t index;

  friend bool operator==(const SumRef&, const SumRef&) = default;
};

struct SumSpec {
  std::uint32_t level = 0;
  IndexSet subset;           // functions involved, sorted
  std::vector<Term> terms;   // one per function, in function order
  SumOrigin origin = SumOrigin::kUnspecified;
  std::optional<SumRef> side;  // demand-bearing sums: the other server's sum reused here
  // Signs before sigma is applied. Client-side bookkeeping only.
  std::vector<std::int8_t> raw_signs;

  friend bool operator==(const SumSpec&, const SumSpec&) = default;
};

struct PcQuery {
  std::uint32_t server = 0;
  std::vector<SumSpec> sums;  // grouped by level, ascending

  std::size_t count_at_level(std::uint32_t level) const;
  std::uint32_t max_level() const;

  friend bool operator==(const PcQuery&, const PcQuery&) = default;
};

// Query layout for N servers, F >= 2 functions and demanded function
// f_star; message length must be N^F. BadParams otherwise.
std::vector<PcQuery> build_pc_queries(std::uint32_t servers, std::uint32_t functions,
                                      std::uint32_t f_star, const PcRandomness& rnd);

// Single-function case: server n asks for the n-th contiguous block of
// m/N symbols. Nothing needs hiding.
std::vector<PcQuery> build_share_queries(std::uint32_t servers, std::uint64_t symbols);

// Stacks v_f as rows and returns a reduced echelon basis of its left kernel,
// i.e. every linear relation among the functions.
MatrixFq dependency_matrix(const FunctionTable& table, const PrimeField& field);

// Value of every sum: sum of sign * Z_f[position]. MalformedQuery on an
// out-of-range function or position.
FeVec evaluate_sums(const PcQuery& query, const std::vector<FeVec>& functions,
                    const PrimeField& field);

// A sum as a linear form over the r*m super-message symbols. Storage
// position p occupies columns [block_of[p]*r, block_of[p]*r + r); an empty
// block_of means the identity layout.
SparseVec sum_functional(const SumSpec& sum, const FunctionTable& table, const PrimeField& field,
                         std::span<const std::uint32_t> block_of = {});

using KeepMask = std::vector<std::uint8_t>;

// Greedy span completion for one server: walking its sums level by level in
// query order, a sum is kept unless it is already implied by the sums kept
// so far at this server together with every sum the other servers were
// asked at lower levels. Depends on the query shape only, never on data.
KeepMask plan_keep(const PcQuery& own, std::span<const PcQuery> others, const FunctionTable& table,
                   const PrimeField& field, std::span<const std::uint32_t> block_of = {});

// plan_keep for every server.
std::vector<KeepMask> plan_reduction(std::span<const PcQuery> queries, const FunctionTable& table,
                                     const PrimeField& field,
                                     std::span<const std::uint32_t> block_of = {});

struct AnswerEntry {
  std::uint32_t index;  // position of the sum in the server's query
  Fe value;

  friend bool operator==(const AnswerEntry&, const AnswerEntry&) = default;
};

struct ReducedAnswer {
  std::uint32_t server = 0;
  std::vector<AnswerEntry> entries;  // strictly increasing index

  friend bool operator==(const ReducedAnswer&, const ReducedAnswer&) = default;
};

// Keeps the values selected by `keep` (an empty mask keeps everything).
ReducedAnswer apply_keep(const PcQuery& query, std::span<const Fe> values, const KeepMask& keep);

// plan_keep + apply_keep, with the other servers' queries as external context.
ReducedAnswer reduce_answer(const PcQuery& query, std::span<const Fe> values,
                            const FunctionTable& table, std::span<const PcQuery> others,
                            const PrimeField& field);

// Solves for every symbol of the demanded function from all transmitted
// sums. DecodeFailure when some symbol is not determined or the answers
// contradict each other.
FeVec decode(std::span<const ReducedAnswer> answers, std::span<const PcQuery> queries,
             const FunctionTable& table, std::uint32_t f_star, const PcRandomness& rnd,
             const PrimeField& field);

// Transmitted symbol count each server must reach: m * sum_{k=1..r} N^-k.
std::uint64_t expected_transmitted_per_server(std::uint32_t servers, std::uint32_t super_messages,
                                              std::uint64_t symbols);

}  // namespace pcsi
