#pragma once

// Super-message construction from a generalized Reed-Solomon code and the
// table of support-constrained functions the user retrieves from.
//
// All message, function and server indices are 0-based.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcsi/database.h"
#include "pcsi/field.h"
#include "pcsi/subsets.h"

namespace pcsi {

// Model I: the demand is outside the side-information support.
// Model II: the demand is one of the messages in it.
enum class Model : std::uint8_t { kI = 1, kII = 2 };

const char* model_name(Model model);

struct ProtocolParams {
  Model model = Model::kI;
  std::uint32_t servers = 0;    // N
  std::uint32_t messages = 0;   // K
  std::uint32_t side_size = 0;  // M
  std::uint32_t prime = 0;      // q
  std::uint64_t symbols = 0;    // m = N^F

  static constexpr std::uint64_t kMaxSymbols = 1ull << 24;

  // Fills in `symbols` and validates; throws BadParams.
  static ProtocolParams make(Model model, std::uint32_t servers, std::uint32_t messages,
                             std::uint32_t side_size, std::uint32_t prime);

  void validate() const;
  PrimeField field() const { return PrimeField(prime); }

  // r: number of super-messages.
  std::uint32_t super_messages() const;
  // Size of every function support.
  std::uint32_t support_size() const;
  // F: number of functions.
  std::uint64_t function_count() const;

  friend bool operator==(const ProtocolParams&, const ProtocolParams&) = default;
};

struct SideInstance {
  std::uint32_t demand = 0;  // W
  IndexSet side;             // S, sorted
  FeVec coeffs;              // c_j for each j in S, aligned with `side`
  FeVec side_value;          // Y = sum c_j X_j, m symbols

  // Coefficient of message j in Y (zero outside S).
  Fe coeff_of(std::uint32_t j) const;
  bool in_side(std::uint32_t j) const;
};

// Draws S, then C, then W.
SideInstance sample_instance(const ProtocolParams& params, const Database& db,
                             std::uint64_t seed);
// Builds an instance from explicit choices; Y is computed from `db`.
SideInstance make_instance(const ProtocolParams& params, const Database& db,
                           std::uint32_t demand, IndexSet side, FeVec coeffs);

// The user's private random choices in building the encoding.
struct EncodingRandomness {
  FeVec free_beta;  // beta_j for every j outside S, ascending j
  Fe secret;        // Model II only: replaces c_W, never equal to it
};

EncodingRandomness sample_encoding_randomness(const ProtocolParams& params,
                                              const SideInstance& instance, std::uint64_t seed);

struct EncodingVectors {
  FeVec omega;            // distinct evaluation points
  Polynomial annihilator; // vanishes on the points outside the retrieved support
  FeVec beta;             // column multipliers, all nonzero
  std::uint32_t super_messages = 0;
  std::vector<FeVec> u;   // u[i][j] = beta_j * omega_j^i
  std::optional<Fe> secret;
};

// omega_j = j.
FeVec default_omega(std::uint32_t messages, const PrimeField& field);

EncodingVectors build_encoding(const SideInstance& instance, const ProtocolParams& params,
                               std::span<const Fe> omega, const EncodingRandomness& randomness);
EncodingVectors build_encoding(const SideInstance& instance, const ProtocolParams& params,
                               std::span<const Fe> omega, std::uint64_t seed);

struct FunctionEntry {
  IndexSet support;  // J_f
  FeVec combo;       // v_f: coefficients over the r super-messages
  FeVec coeffs;      // gamma_f: coefficients over the K messages
  Fe norm;           // scalar making the coefficient at min(J_f) equal to 1

  friend bool operator==(const FunctionEntry&, const FunctionEntry&) = default;
};

struct FunctionTable {
  std::uint32_t messages = 0;
  std::uint32_t super_messages = 0;
  std::vector<FunctionEntry> functions;  // supports in lexicographic order

  std::size_t size() const { return functions.size(); }
  friend bool operator==(const FunctionTable&, const FunctionTable&) = default;
};

// One function per support of size K - r + 1, normalized so its first
// message coefficient is 1.
FunctionTable function_table_from(std::span<const Fe> omega, std::span<const Fe> beta,
                                  std::uint32_t super_messages, const PrimeField& field);
FunctionTable derive_function_table(const EncodingVectors& enc, const ProtocolParams& params);

// What a server can rebuild from the u vectors alone. Throws MalformedQuery
// when u is not of the multiplier-times-Vandermonde form.
FunctionTable server_reconstruct_table(std::span<const FeVec> u, const PrimeField& field);

// Index of the function whose support is S + {W} (Model I) or S (Model II).
std::uint32_t demand_function_index(const SideInstance& instance, const ProtocolParams& params);

// Strips the side information off the retrieved function to obtain X_W.
FeVec recover_demand(std::span<const Fe> z, const SideInstance& instance,
                     const FunctionTable& table, const ProtocolParams& params);

}  // namespace pcsi
