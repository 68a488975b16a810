#include "pcsi/grs.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "pcsi/error.h"
#include "pcsi/rng.h"

namespace pcsi {

const char* model_name(Model model) { return model == Model::kI ? "I" : "II"; }

ProtocolParams ProtocolParams::make(Model model, std::uint32_t servers, std::uint32_t messages,
                                    std::uint32_t side_size, std::uint32_t prime) {
  ProtocolParams p;
  p.model = model;
  p.servers = servers;
  p.messages = messages;
  p.side_size = side_size;
  p.prime = prime;
  // Range checks first so function_count() is meaningful.
  p.symbols = 1;
  p.validate();
  const std::uint64_t f = p.function_count();
  std::uint64_t m = 1;
  for (std::uint64_t i = 0; i < f; ++i) {
    m *= servers;
    PCSI_CHECK(m <= kMaxSymbols, ErrorCode::kBadParams,
               "message length N^F exceeds " + std::to_string(kMaxSymbols) + " symbols");
  }
  p.symbols = m;
  return p;
}

void ProtocolParams::validate() const {
  PCSI_CHECK(servers >= 1, ErrorCode::kBadParams, "need at least one server");
  PCSI_CHECK(messages >= 1, ErrorCode::kBadParams, "need at least one message");
  if (model == Model::kI) {
    PCSI_CHECK(side_size <= messages - 1, ErrorCode::kBadParams,
               "model I requires 0 <= M <= K-1");
  } else {
    PCSI_CHECK(side_size >= 2 && side_size <= messages, ErrorCode::kBadParams,
               "model II requires 2 <= M <= K");
  }
  PCSI_CHECK(prime >= 3 && prime < PrimeField::kMaxModulus && is_prime(prime),
             ErrorCode::kBadParams, "q must be a prime in [3, 65536)");
  PCSI_CHECK(prime >= messages, ErrorCode::kDegenerateField,
             "q must be at least K to host K distinct evaluation points");
  PCSI_CHECK(symbols >= 1, ErrorCode::kBadParams, "message length must be positive");
}

std::uint32_t ProtocolParams::super_messages() const {
  return model == Model::kI ? messages - side_size : messages - side_size + 1;
}

std::uint32_t ProtocolParams::support_size() const {
  return model == Model::kI ? side_size + 1 : side_size;
}

std::uint64_t ProtocolParams::function_count() const {
  return binomial(messages, support_size());
}

Database::Database(PrimeField field, std::uint32_t messages, std::uint64_t symbols, FeVec data)
    : field_(field), messages_(messages), symbols_(symbols), data_(std::move(data)) {
  PCSI_CHECK(data_.size() == messages_ * symbols_, ErrorCode::kDimensionMismatch,
             "database size does not match K*m");
  for (Fe x : data_) {
    PCSI_CHECK(x.value() < field_.modulus(), ErrorCode::kSymbolOutOfRange,
               "database symbol out of range");
  }
}

Database Database::generate(PrimeField field, std::uint32_t messages, std::uint64_t symbols,
                            std::uint64_t seed) {
  Rng rng(seed);
  FeVec data(messages * symbols);
  for (auto& x : data) x = rng.element(field);
  return Database(field, messages, symbols, std::move(data));
}

Fe SideInstance::coeff_of(std::uint32_t j) const {
  auto it = std::lower_bound(side.begin(), side.end(), j);
  if (it == side.end() || *it != j) return Fe();
  return coeffs[static_cast<std::size_t>(it - side.begin())];
}

bool SideInstance::in_side(std::uint32_t j) const {
  return std::binary_search(side.begin(), side.end(), j);
}

SideInstance make_instance(const ProtocolParams& params, const Database& db,
                           std::uint32_t demand, IndexSet side, FeVec coeffs) {
  params.validate();
  PCSI_CHECK(db.messages() == params.messages && db.symbols() == params.symbols,
             ErrorCode::kDimensionMismatch, "database does not match parameters");
  PCSI_CHECK(side.size() == params.side_size && coeffs.size() == side.size(),
             ErrorCode::kBadParams, "side information must have exactly M indices");
  PCSI_CHECK(std::is_sorted(side.begin(), side.end()) &&
                 std::adjacent_find(side.begin(), side.end()) == side.end(),
             ErrorCode::kBadParams, "side index set must be sorted and distinct");
  PCSI_CHECK(demand < params.messages && (side.empty() || side.back() < params.messages),
             ErrorCode::kBadParams, "index out of range");
  for (Fe c : coeffs) {
    PCSI_CHECK(!c.is_zero() && c.value() < params.prime, ErrorCode::kBadParams,
               "side coefficients must be nonzero field elements");
  }
  SideInstance inst;
  inst.demand = demand;
  inst.side = std::move(side);
  inst.coeffs = std::move(coeffs);
  const bool in_side = inst.in_side(demand);
  PCSI_CHECK(params.model == Model::kI ? !in_side : in_side, ErrorCode::kBadParams,
             params.model == Model::kI ? "model I requires W outside S" : "model II requires W in S");

  const PrimeField& f = db.field();
  inst.side_value.assign(db.symbols(), Fe());
  for (std::size_t i = 0; i < inst.side.size(); ++i) {
    auto x = db.message(inst.side[i]);
    for (std::size_t p = 0; p < x.size(); ++p) {
      inst.side_value[p] = f.add(inst.side_value[p], f.mul(inst.coeffs[i], x[p]));
    }
  }
  return inst;
}

SideInstance sample_instance(const ProtocolParams& params, const Database& db,
                             std::uint64_t seed) {
  params.validate();
  const PrimeField field = params.field();
  Rng rng(seed);
  std::vector<std::uint32_t> all(params.messages);
  std::iota(all.begin(), all.end(), 0u);
  std::shuffle(all.begin(), all.end(), rng.engine());
  IndexSet side(all.begin(), all.begin() + params.side_size);
  std::sort(side.begin(), side.end());
  FeVec coeffs(side.size());
  for (auto& c : coeffs) c = rng.nonzero(field);

  std::uint32_t demand;
  if (params.model == Model::kI) {
    IndexSet rest(all.begin() + params.side_size, all.end());
    std::sort(rest.begin(), rest.end());
    demand = rest[rng.uniform(0, rest.size() - 1)];
  } else {
    demand = side[rng.uniform(0, side.size() - 1)];
  }
  return make_instance(params, db, demand, std::move(side), std::move(coeffs));
}

EncodingRandomness sample_encoding_randomness(const ProtocolParams& params,
                                              const SideInstance& instance, std::uint64_t seed) {
  const PrimeField field = params.field();
  Rng rng(seed);
  EncodingRandomness out;
  for (std::uint32_t j = 0; j < params.messages; ++j) {
    if (!instance.in_side(j)) out.free_beta.push_back(rng.nonzero(field));
  }
  if (params.model == Model::kII) {
    // Uniform over F_q^x minus {c_W}.
    Fe cw = instance.coeff_of(instance.demand);
    auto pick = rng.uniform(1, field.modulus() - 2);
    if (pick >= cw.value()) ++pick;
    out.secret = Fe(static_cast<std::uint16_t>(pick));
  }
  return out;
}

FeVec default_omega(std::uint32_t messages, const PrimeField& field) {
  FeVec omega(messages);
  for (std::uint32_t j = 0; j < messages; ++j) omega[j] = field.element(j);
  return omega;
}

namespace {

void check_distinct(std::span<const Fe> omega, ErrorCode code) {
  FeVec sorted(omega.begin(), omega.end());
  std::sort(sorted.begin(), sorted.end());
  PCSI_CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), code,
             "evaluation points must be distinct");
}

}  // namespace

EncodingVectors build_encoding(const SideInstance& instance, const ProtocolParams& params,
                               std::span<const Fe> omega, const EncodingRandomness& randomness) {
  params.validate();
  const PrimeField field = params.field();
  const std::uint32_t k = params.messages;
  PCSI_CHECK(omega.size() == k, ErrorCode::kBadParams, "need K evaluation points");
  for (Fe w : omega) PCSI_CHECK(w.value() < field.modulus(), ErrorCode::kBadParams, "point out of range");
  check_distinct(omega, ErrorCode::kBadParams);
  PCSI_CHECK(randomness.free_beta.size() == k - instance.side.size(), ErrorCode::kBadParams,
             "one free multiplier per index outside S is required");

  EncodingVectors enc;
  enc.omega.assign(omega.begin(), omega.end());
  enc.super_messages = params.super_messages();

  // Roots: every index outside the retrieved support.
  FeVec roots;
  for (std::uint32_t j = 0; j < k; ++j) {
    bool in_support = instance.in_side(j) || (params.model == Model::kI && j == instance.demand);
    if (!in_support) roots.push_back(omega[j]);
  }
  enc.annihilator = poly_from_roots(roots, field);

  if (params.model == Model::kII) {
    PCSI_CHECK(!randomness.secret.is_zero() &&
                   randomness.secret != instance.coeff_of(instance.demand),
               ErrorCode::kBadParams, "secret coefficient must be nonzero and differ from c_W");
    enc.secret = randomness.secret;
  }

  enc.beta.resize(k);
  std::size_t next_free = 0;
  for (std::uint32_t j = 0; j < k; ++j) {
    if (!instance.in_side(j)) {
      enc.beta[j] = randomness.free_beta[next_free++];
      PCSI_CHECK(!enc.beta[j].is_zero(), ErrorCode::kBadParams, "multipliers must be nonzero");
      continue;
    }
    Fe c = (params.model == Model::kII && j == instance.demand) ? randomness.secret
                                                                : instance.coeff_of(j);
    enc.beta[j] = field.div(c, poly_eval(enc.annihilator, omega[j], field));
  }

  enc.u.assign(enc.super_messages, FeVec(k));
  for (std::uint32_t j = 0; j < k; ++j) {
    Fe power(1);
    for (std::uint32_t i = 0; i < enc.super_messages; ++i) {
      enc.u[i][j] = field.mul(enc.beta[j], power);
      power = field.mul(power, omega[j]);
    }
  }
  return enc;
}

EncodingVectors build_encoding(const SideInstance& instance, const ProtocolParams& params,
                               std::span<const Fe> omega, std::uint64_t seed) {
  return build_encoding(instance, params, omega,
                        sample_encoding_randomness(params, instance, seed));
}

FunctionTable function_table_from(std::span<const Fe> omega, std::span<const Fe> beta,
                                  std::uint32_t super_messages, const PrimeField& field) {
  const auto k = static_cast<std::uint32_t>(omega.size());
  PCSI_CHECK(beta.size() == k && super_messages >= 1 && super_messages <= k,
             ErrorCode::kBadParams, "inconsistent encoding dimensions");
  FunctionTable table;
  table.messages = k;
  table.super_messages = super_messages;
  const std::uint32_t support = k - super_messages + 1;

  for (auto& subset : lex_subsets(k, support)) {
    FeVec roots;
    for (std::uint32_t j = 0, s = 0; j < k; ++j) {
      if (s < subset.size() && subset[s] == j) {
        ++s;
      } else {
        roots.push_back(omega[j]);
      }
    }
    Polynomial g = poly_from_roots(roots, field);

    FunctionEntry fn;
    fn.coeffs.resize(k);
    for (std::uint32_t j = 0; j < k; ++j) fn.coeffs[j] = field.mul(beta[j], poly_eval(g, omega[j], field));
    fn.norm = field.inv(fn.coeffs[subset.front()]);
    for (auto& c : fn.coeffs) c = field.mul(c, fn.norm);
    fn.combo.resize(super_messages);
    for (std::uint32_t i = 0; i < super_messages; ++i) fn.combo[i] = field.mul(g.coeff(i), fn.norm);

    for (std::uint32_t j = 0, s = 0; j < k; ++j) {
      bool in_support = s < subset.size() && subset[s] == j;
      if (in_support) ++s;
      PCSI_CHECK(in_support != fn.coeffs[j].is_zero(), ErrorCode::kInternal,
                 "function support differs from its index set");
    }
    fn.support = std::move(subset);
    table.functions.push_back(std::move(fn));
  }
  return table;
}

FunctionTable derive_function_table(const EncodingVectors& enc, const ProtocolParams& params) {
  PCSI_CHECK(enc.super_messages == params.super_messages(), ErrorCode::kBadParams,
             "encoding does not match parameters");
  return function_table_from(enc.omega, enc.beta, enc.super_messages, params.field());
}

FunctionTable server_reconstruct_table(std::span<const FeVec> u, const PrimeField& field) {
  PCSI_CHECK(!u.empty() && !u[0].empty(), ErrorCode::kMalformedQuery, "no super-message vectors");
  const auto r = static_cast<std::uint32_t>(u.size());
  const auto k = static_cast<std::uint32_t>(u[0].size());
  PCSI_CHECK(r <= k, ErrorCode::kMalformedQuery, "more super-messages than messages");
  for (const auto& row : u) {
    PCSI_CHECK(row.size() == k, ErrorCode::kMalformedQuery, "ragged super-message vectors");
    for (Fe x : row) PCSI_CHECK(x.value() < field.modulus(), ErrorCode::kMalformedQuery, "symbol out of range");
  }
  const FeVec& beta = u[0];
  for (Fe b : beta) PCSI_CHECK(!b.is_zero(), ErrorCode::kMalformedQuery, "zero multiplier in u_1");

  // With a single super-message the points are never used; any distinct set works.
  FeVec omega = default_omega(k, field);
  if (r >= 2) {
    for (std::uint32_t j = 0; j < k; ++j) omega[j] = field.div(u[1][j], beta[j]);
    check_distinct(omega, ErrorCode::kMalformedQuery);
    for (std::uint32_t j = 0; j < k; ++j) {
      Fe expect = beta[j];
      for (std::uint32_t i = 0; i < r; ++i) {
        PCSI_CHECK(u[i][j] == expect, ErrorCode::kMalformedQuery,
                   "u vectors are not multiplier-scaled Vandermonde rows");
        expect = field.mul(expect, omega[j]);
      }
    }
  }
  return function_table_from(omega, beta, r, field);
}

std::uint32_t demand_function_index(const SideInstance& instance, const ProtocolParams& params) {
  IndexSet support = instance.side;
  if (params.model == Model::kI) {
    support.insert(std::upper_bound(support.begin(), support.end(), instance.demand),
                   instance.demand);
  }
  return static_cast<std::uint32_t>(lex_rank(support, params.messages));
}

FeVec recover_demand(std::span<const Fe> z, const SideInstance& instance,
                     const FunctionTable& table, const ProtocolParams& params) {
  const PrimeField field = params.field();
  const auto& fn = table.functions.at(demand_function_index(instance, params));
  const std::uint32_t w = instance.demand;

  // The side part of gamma is lambda * C; recompute lambda from every index.
  std::optional<Fe> lambda;
  for (std::size_t i = 0; i < instance.side.size(); ++i) {
    std::uint32_t j = instance.side[i];
    if (j == w) continue;
    Fe l = field.div(fn.coeffs[j], instance.coeffs[i]);
    PCSI_CHECK(!lambda || *lambda == l, ErrorCode::kInternal,
               "retrieved function is not proportional to the side information");
    lambda = l;
  }
  Fe lam = lambda.value_or(Fe());
  Fe divisor = fn.coeffs[w];
  if (params.model == Model::kII) divisor = field.sub(divisor, field.mul(lam, instance.coeff_of(w)));
  PCSI_CHECK(!divisor.is_zero(), ErrorCode::kInternal, "demand coefficient vanished");
  Fe scale = field.inv(divisor);

  PCSI_CHECK(z.size() == instance.side_value.size(), ErrorCode::kDimensionMismatch,
             "function length differs from side information length");
  FeVec x(z.size());
  for (std::size_t p = 0; p < z.size(); ++p) {
    x[p] = field.mul(field.sub(z[p], field.mul(lam, instance.side_value[p])), scale);
  }
  return x;
}

}  // namespace pcsi
