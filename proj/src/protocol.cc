#include "pcsi/protocol.h"

#include <algorithm>

#include "pcsi/error.h"
#include "pcsi/rng.h"
#include "pcsi/wire.h"

namespace pcsi {

namespace {

enum Stream : std::uint64_t { kEncodingStream = 1, kPcStream = 2 };

}  // namespace

Rational capacity(Model model, std::uint32_t servers, std::uint32_t messages,
                  std::uint32_t side_size) {
  PCSI_CHECK(servers >= 1, ErrorCode::kBadParams, "need at least one server");
  std::uint32_t terms = 0;
  if (model == Model::kI) {
    PCSI_CHECK(side_size < messages, ErrorCode::kBadParams, "model I needs M <= K-1");
    terms = messages - side_size;
  } else {
    PCSI_CHECK(side_size >= 2 && side_size <= messages, ErrorCode::kBadParams,
               "model II needs 2 <= M <= K");
    terms = messages - side_size + 1;
  }
  Rational sum(0);
  Rational power(1);
  for (std::uint32_t j = 0; j < terms; ++j) {
    sum += power;
    power /= static_cast<std::int64_t>(servers);
  }
  return Rational(1) / sum;
}

std::vector<FeVec> compute_super_messages(std::span<const FeVec> u, const Database& db) {
  const auto& field = db.field();
  const std::uint32_t q = field.modulus();
  const std::uint64_t m = db.symbols();
  std::vector<FeVec> out;
  out.reserve(u.size());
  for (const auto& row : u) {
    PCSI_CHECK(row.size() == db.messages(), ErrorCode::kDimensionMismatch,
               "encoding vector length differs from message count");
    std::vector<std::uint64_t> acc(m, 0);
    for (std::uint32_t j = 0; j < db.messages(); ++j) {
      const std::uint64_t c = row[j].value();
      if (c == 0) continue;
      auto x = db.message(j);
      for (std::uint64_t p = 0; p < m; ++p) acc[p] += c * x[p].value();
    }
    FeVec xhat(m);
    for (std::uint64_t p = 0; p < m; ++p) xhat[p] = Fe(static_cast<std::uint16_t>(acc[p] % q));
    out.push_back(std::move(xhat));
  }
  return out;
}

std::vector<FeVec> materialize_functions(const FunctionTable& table,
                                         std::span<const FeVec> super_messages,
                                         const PrimeField& field) {
  PCSI_CHECK(super_messages.size() == table.super_messages, ErrorCode::kDimensionMismatch,
             "super-message count differs from table");
  const std::uint64_t m = super_messages.empty() ? 0 : super_messages[0].size();
  std::vector<FeVec> out;
  out.reserve(table.size());
  for (const auto& fn : table.functions) {
    std::vector<std::uint64_t> acc(m, 0);
    for (std::uint32_t i = 0; i < table.super_messages; ++i) {
      const std::uint64_t c = fn.combo[i].value();
      if (c == 0) continue;
      for (std::uint64_t p = 0; p < m; ++p) acc[p] += c * super_messages[i][p].value();
    }
    FeVec z(m);
    for (std::uint64_t p = 0; p < m; ++p)
      z[p] = Fe(static_cast<std::uint16_t>(acc[p] % field.modulus()));
    out.push_back(std::move(z));
  }
  return out;
}

PcQuery wire_view(const PcQuery& query) {
  PcQuery out;
  out.server = query.server;
  out.sums.reserve(query.sums.size());
  for (const auto& s : query.sums) {
    SumSpec w;
    w.level = s.level;
    w.terms = s.terms;
    for (const auto& t : s.terms) w.subset.push_back(t.function);
    out.sums.push_back(std::move(w));
  }
  return out;
}

ReducedAnswer server_answer(const Database& db, const ServerQuery& query) {
  const auto& field = db.field();
  PCSI_CHECK(query.prime == field.modulus(), ErrorCode::kMalformedQuery,
             "query field differs from database field");
  PCSI_CHECK(query.symbols == db.symbols(), ErrorCode::kMalformedQuery,
             "query message length differs from database");
  PCSI_CHECK(!query.u.empty() && query.u.size() <= db.messages(), ErrorCode::kMalformedQuery,
             "encoding vector count out of range");
  for (const auto& row : query.u) {
    PCSI_CHECK(row.size() == db.messages(), ErrorCode::kMalformedQuery,
               "encoding vector length differs from message count");
  }
  const FunctionTable table = server_reconstruct_table(query.u, field);
  const auto xhat = compute_super_messages(query.u, db);
  const auto functions = materialize_functions(table, xhat, field);
  const FeVec values = evaluate_sums(query.query, functions, field);
  PCSI_CHECK(query.keep.empty() || query.keep.size() == query.query.sums.size(),
             ErrorCode::kMalformedQuery, "keep mask length differs from sum count");
  ReducedAnswer ans = apply_keep(query.query, values, query.keep);
  ans.server = query.server;
  return ans;
}

std::vector<ReducedAnswer> LocalTransport::exchange(const ProtocolParams&,
                                                    const std::vector<ServerQuery>& queries) {
  std::vector<ReducedAnswer> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(server_answer(db_, q));
  return out;
}

RunResult run_protocol(const ProtocolParams& params, const SideInstance& instance,
                       std::uint64_t seed, Transport& transport, const RunOptions& options) {
  params.validate();
  const PrimeField field = params.field();
  const std::uint32_t n_servers = params.servers;
  const std::uint64_t m = params.symbols;

  const FeVec omega = options.omega ? *options.omega : default_omega(params.messages, field);
  const EncodingRandomness enc_rnd =
      options.encoding ? *options.encoding
                       : sample_encoding_randomness(params, instance,
                                                    derive_seed(seed, kEncodingStream));
  const EncodingVectors enc = build_encoding(instance, params, omega, enc_rnd);
  const FunctionTable table = derive_function_table(enc, params);
  const std::uint32_t f_star = demand_function_index(instance, params);
  const std::uint32_t functions = static_cast<std::uint32_t>(table.size());

  PcRandomness rnd;
  std::vector<PcQuery> queries;
  if (functions == 1) {
    rnd = identity_pc_randomness(m);
    queries = build_share_queries(n_servers, m);
  } else {
    rnd = options.pc ? *options.pc : sample_pc_randomness(m, derive_seed(seed, kPcStream));
    queries = build_pc_queries(n_servers, functions, f_star, rnd);
  }

  std::vector<KeepMask> keeps(n_servers);
  if (options.reduce && functions > 1) {
    keeps = plan_reduction(queries, table, field, rnd.inverse_perm());
    for (auto& k : keeps) {
      if (std::all_of(k.begin(), k.end(), [](std::uint8_t x) { return x == 1; })) k.clear();
    }
  }

  auto make_wire = [&](const std::vector<KeepMask>& masks) {
    std::vector<ServerQuery> wire(n_servers);
    for (std::uint32_t n = 0; n < n_servers; ++n) {
      wire[n].server = n;
      wire[n].prime = static_cast<std::uint16_t>(params.prime);
      wire[n].symbols = static_cast<std::uint32_t>(m);
      wire[n].u = enc.u;
      wire[n].query = wire_view(queries[n]);
      wire[n].keep = masks[n];
    }
    return wire;
  };

  Transcript tr;
  tr.params = params;
  tr.seed = seed;
  tr.demand = instance.demand;
  tr.side = instance.side;
  tr.demand_function = f_star;
  tr.super_messages = params.super_messages();
  tr.function_count = functions;
  tr.capacity = capacity(params.model, params.servers, params.messages, params.side_size);

  std::vector<ServerQuery> wire = make_wire(keeps);
  std::vector<ReducedAnswer> answers = transport.exchange(params, wire);
  PCSI_CHECK(answers.size() == n_servers, ErrorCode::kDimensionMismatch,
             "transport returned the wrong number of answers");

  FeVec z;
  try {
    z = decode(answers, queries, table, f_star, rnd, field);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDecodeFailure || !options.reduce) throw;
    tr.fallback = true;
    wire = make_wire(std::vector<KeepMask>(n_servers));
    answers = transport.exchange(params, wire);
    z = decode(answers, queries, table, f_star, rnd, field);
  }

  for (std::uint32_t n = 0; n < n_servers; ++n) {
    ServerStats st;
    st.server = n;
    st.query_bytes = encode_frame(wire[n]).size();
    st.query_sums = wire[n].query.sums.size();
    st.transmitted = answers[n].entries.size();
    st.answer_bytes =
        encode_frame(AnswerMsg{static_cast<std::uint16_t>(params.prime), answers[n]}).size();
    tr.total_transmitted += st.transmitted;
    tr.servers.push_back(st);
  }
  PCSI_CHECK(tr.total_transmitted > 0, ErrorCode::kInternal, "nothing was transmitted");
  tr.rate = Rational(static_cast<std::int64_t>(m), static_cast<std::int64_t>(tr.total_transmitted));

  RunResult out;
  out.demand = recover_demand(z, instance, table, params);
  tr.decoded = out.demand;
  out.transcript = std::move(tr);
  return out;
}

RunResult run_protocol(const ProtocolParams& params, const Database& db,
                       const SideInstance& instance, std::uint64_t seed,
                       const RunOptions& options) {
  LocalTransport local(db);
  return run_protocol(params, instance, seed, local, options);
}

}  // namespace pcsi
