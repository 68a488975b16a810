#pragma once

// End-to-end runs of the scheme: the client state machine, the stateless
// server, and transcript accounting against capacity.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <boost/rational.hpp>

#include "pcsi/database.h"
#include "pcsi/field.h"
#include "pcsi/grs.h"
#include "pcsi/pc_engine.h"

namespace pcsi {

using Rational = boost::rational<std::int64_t>;

// Model I: (1 + 1/N + ... + 1/N^(K-M-1))^-1.
// Model II: (1 + 1/N + ... + 1/N^(K-M))^-1.
Rational capacity(Model model, std::uint32_t servers, std::uint32_t messages,
                  std::uint32_t side_size);

// Xhat_i[p] = sum_j u_i[j] * X_j[p].
std::vector<FeVec> compute_super_messages(std::span<const FeVec> u, const Database& db);

// Z_f[p] = sum_i v_f[i] * Xhat_i[p] for every function in the table.
std::vector<FeVec> materialize_functions(const FunctionTable& table,
                                         std::span<const FeVec> super_messages,
                                         const PrimeField& field);

// Everything one server receives in a run.
struct ServerQuery {
  std::uint32_t server = 0;
  std::uint16_t prime = 0;
  std::uint32_t symbols = 0;
  std::vector<FeVec> u;  // r encoding vectors of length K
  PcQuery query;         // wire view: positions and signs only
  KeepMask keep;         // one flag per sum; empty keeps everything

  friend bool operator==(const ServerQuery&, const ServerQuery&) = default;
};

// Drops everything a server must not see (origins, raw signs, side refs).
PcQuery wire_view(const PcQuery& query);

// Stateless and deterministic in (db, query). MalformedQuery on a query
// that does not fit the database or the encoding form.
ReducedAnswer server_answer(const Database& db, const ServerQuery& query);

// Delivers one query to each server and collects the answers in order.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::vector<ReducedAnswer> exchange(const ProtocolParams& params,
                                              const std::vector<ServerQuery>& queries) = 0;
};

// All servers share one in-memory database.
class LocalTransport : public Transport {
 public:
  explicit LocalTransport(const Database& db) : db_(db) {}
  std::vector<ReducedAnswer> exchange(const ProtocolParams& params,
                                      const std::vector<ServerQuery>& queries) override;

 private:
  const Database& db_;
};

struct ServerStats {
  std::uint32_t server = 0;
  std::uint64_t query_bytes = 0;   // encoded QUERY frame
  std::uint64_t query_sums = 0;
  std::uint64_t transmitted = 0;   // symbols in the answer
  std::uint64_t answer_bytes = 0;  // encoded ANSWER frame

  friend bool operator==(const ServerStats&, const ServerStats&) = default;
};

struct Transcript {
  ProtocolParams params;
  std::uint64_t seed = 0;
  std::uint32_t demand = 0;
  IndexSet side;
  std::uint32_t demand_function = 0;
  std::uint32_t super_messages = 0;
  std::uint64_t function_count = 0;
  std::vector<ServerStats> servers;
  std::uint64_t total_transmitted = 0;
  Rational rate;      // m / total_transmitted
  Rational capacity;
  bool fallback = false;  // reduction was disabled after a decode failure
  FeVec decoded;          // X_W

  bool rate_matches_capacity() const { return rate == capacity; }
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

// Client-side overrides, mainly for reproducing fixed examples.
struct RunOptions {
  std::optional<FeVec> omega;
  std::optional<EncodingRandomness> encoding;
  std::optional<PcRandomness> pc;
  bool reduce = true;
};

struct RunResult {
  FeVec demand;
  Transcript transcript;
};

// Full client run against `transport`. Deterministic given seed and options.
RunResult run_protocol(const ProtocolParams& params, const SideInstance& instance,
                       std::uint64_t seed, Transport& transport, const RunOptions& options = {});

// In-process run against `db`.
RunResult run_protocol(const ProtocolParams& params, const Database& db,
                       const SideInstance& instance, std::uint64_t seed,
                       const RunOptions& options = {});

}  // namespace pcsi
