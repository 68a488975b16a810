#include "pcsi/pc_engine.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

#include "pcsi/error.h"
#include "pcsi/rng.h"

namespace pcsi {

std::vector<std::uint32_t> PcRandomness::inverse_perm() const {
  std::vector<std::uint32_t> inv(perm.size());
  for (std::uint32_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

PcRandomness sample_pc_randomness(std::uint64_t symbols, std::uint64_t seed) {
  PCSI_CHECK(symbols >= 1, ErrorCode::kBadParams, "message length must be positive");
  Rng rng(seed);
  PcRandomness rnd;
  rnd.perm.resize(symbols);
  std::iota(rnd.perm.begin(), rnd.perm.end(), 0u);
  // Fisher-Yates, explicit so the draw order is fixed.
  for (std::uint64_t i = symbols - 1; i > 0; --i) {
    std::swap(rnd.perm[i], rnd.perm[rng.uniform(0, i)]);
  }
  rnd.signs.resize(symbols);
  for (auto& s : rnd.signs) s = rng.coin() ? -1 : 1;
  return rnd;
}

PcRandomness identity_pc_randomness(std::uint64_t symbols) {
  PcRandomness rnd;
  rnd.perm.resize(symbols);
  std::iota(rnd.perm.begin(), rnd.perm.end(), 0u);
  rnd.signs.assign(symbols, 1);
  return rnd;
}

std::size_t PcQuery::count_at_level(std::uint32_t level) const {
  return static_cast<std::size_t>(
      std::count_if(sums.begin(), sums.end(), [&](const SumSpec& s) { return s.level == level; }));
}

std::uint32_t PcQuery::max_level() const {
  std::uint32_t k = 0;
  for (const auto& s : sums) k = std::max(k, s.level);
  return k;
}

namespace {

// A sum in logical coordinates while the layout is being assembled.
struct LogicalSum {
  IndexSet subset;
  std::vector<std::uint32_t> index;  // logical index per function in `subset`
  std::vector<std::int8_t> sign;     // raw sign per function in `subset`
  SumOrigin origin;
  std::optional<SumRef> side;
  std::uint32_t instance;
};

IndexSet without(const IndexSet& s, std::uint32_t x) {
  IndexSet out;
  for (auto v : s)
    if (v != x) out.push_back(v);
  return out;
}

IndexSet with(const IndexSet& s, std::uint32_t x) {
  IndexSet out = s;
  out.insert(std::upper_bound(out.begin(), out.end(), x), x);
  return out;
}

}  // namespace

std::vector<PcQuery> build_pc_queries(std::uint32_t servers, std::uint32_t functions,
                                      std::uint32_t f_star, const PcRandomness& rnd) {
  PCSI_CHECK(servers >= 1, ErrorCode::kBadParams, "need at least one server");
  PCSI_CHECK(functions >= 2, ErrorCode::kBadParams,
             "private computation needs at least two functions; use share queries");
  PCSI_CHECK(f_star < functions, ErrorCode::kBadParams, "demanded function out of range");
  std::uint64_t m = 1;
  for (std::uint32_t i = 0; i < functions; ++i) {
    m *= servers;
    PCSI_CHECK(m <= ProtocolParams::kMaxSymbols, ErrorCode::kBadParams, "N^F too large");
  }
  PCSI_CHECK(rnd.perm.size() == m && rnd.signs.size() == m, ErrorCode::kBadParams,
             "randomness length must equal N^F");

  const std::uint32_t n_servers = servers;
  // Per server, per level: finalized sums in emission order.
  std::vector<std::vector<std::vector<LogicalSum>>> layout(
      n_servers, std::vector<std::vector<LogicalSum>>(functions + 1));
  // Global offset of each level inside a server's query.
  std::vector<std::vector<std::uint32_t>> level_offset(
      n_servers, std::vector<std::uint32_t>(functions + 2, 0));
  // symmetry[n][k][rank(U)] -> indices (within level k at server n) of the
  // symmetry sums over U, in instance order.
  std::vector<std::vector<std::map<std::uint64_t, std::vector<std::uint32_t>>>> symmetry(
      n_servers, std::vector<std::map<std::uint64_t, std::vector<std::uint32_t>>>(functions + 1));

  std::uint32_t next_fresh = 0;

  // Level 1: every function at logical index n on server n.
  for (std::uint32_t n = 0; n < n_servers; ++n) {
    const std::uint32_t idx = next_fresh++;
    for (std::uint32_t f = 0; f < functions; ++f) {
      LogicalSum s;
      s.subset = {f};
      s.index = {idx};
      s.sign = {1};
      s.origin = f == f_star ? SumOrigin::kDemandBearing : SumOrigin::kSymmetry;
      s.instance = 0;
      if (f != f_star) symmetry[n][1][lex_rank(s.subset, functions)].push_back(f);
      layout[n][1].push_back(std::move(s));
    }
    level_offset[n][2] = functions;
  }

  for (std::uint32_t k = 2; k <= functions; ++k) {
    const auto subsets = lex_subsets(functions, k);
    for (std::uint32_t n = 0; n < n_servers; ++n) {
      std::vector<LogicalSum> level;
      // fresh[rank(T)][instance] for T containing f_star.
      std::map<std::uint64_t, std::vector<std::uint32_t>> fresh;

      for (const auto& t : subsets) {
        if (!std::binary_search(t.begin(), t.end(), f_star)) continue;
        const IndexSet u = without(t, f_star);
        const std::uint64_t u_rank = lex_rank(u, functions);
        auto& fresh_t = fresh[lex_rank(t, functions)];
        for (std::uint32_t src = 0; src < n_servers; ++src) {
          if (src == n) continue;
          auto it = symmetry[src][k - 1].find(u_rank);
          if (it == symmetry[src][k - 1].end()) continue;
          for (std::uint32_t local : it->second) {
            const LogicalSum& side = layout[src][k - 1][local];
            LogicalSum s;
            s.subset = t;
            s.origin = SumOrigin::kDemandBearing;
            s.side = SumRef{src, level_offset[src][k - 1] + local};
            s.instance = static_cast<std::uint32_t>(fresh_t.size());
            const std::uint32_t idx = next_fresh++;
            fresh_t.push_back(idx);
            // f_star's fresh symbol minus the other server's sum, verbatim.
            for (std::uint32_t f : t) {
              if (f == f_star) {
                s.index.push_back(idx);
                s.sign.push_back(1);
              } else {
                auto pos = static_cast<std::size_t>(
                    std::lower_bound(side.subset.begin(), side.subset.end(), f) - side.subset.begin());
                s.index.push_back(side.index[pos]);
                s.sign.push_back(static_cast<std::int8_t>(-side.sign[pos]));
              }
            }
            level.push_back(std::move(s));
          }
        }
      }

      const std::uint64_t instances = fresh.empty() ? 0 : fresh.begin()->second.size();
      for (const auto& t : subsets) {
        if (std::binary_search(t.begin(), t.end(), f_star)) continue;
        for (std::uint32_t inst = 0; inst < instances; ++inst) {
          LogicalSum s;
          s.subset = t;
          s.origin = SumOrigin::kSymmetry;
          s.instance = inst;
          for (std::size_t pos = 0; pos < t.size(); ++pos) {
            // g borrows the fresh index of the demand-bearing sum over
            // {f_star} + T \ {g}, same instance.
            const IndexSet partner = with(without(t, t[pos]), f_star);
            const auto& f_idx = fresh.at(lex_rank(partner, functions));
            PCSI_CHECK(f_idx.size() == instances, ErrorCode::kInternal,
                       "instance count differs between demand-bearing subsets");
            s.index.push_back(f_idx[inst]);
            s.sign.push_back(pos % 2 == 0 ? 1 : -1);
          }
          level.push_back(std::move(s));
        }
      }

      std::stable_sort(level.begin(), level.end(), [&](const LogicalSum& a, const LogicalSum& b) {
        return std::make_tuple(lex_rank(a.subset, functions), a.instance) <
               std::make_tuple(lex_rank(b.subset, functions), b.instance);
      });
      for (std::uint32_t i = 0; i < level.size(); ++i) {
        if (level[i].origin == SumOrigin::kSymmetry) {
          symmetry[n][k][lex_rank(level[i].subset, functions)].push_back(i);
        }
      }
      level_offset[n][k + 1] = level_offset[n][k] + static_cast<std::uint32_t>(level.size());
      layout[n][k] = std::move(level);
    }
  }
  PCSI_CHECK(next_fresh == m, ErrorCode::kInternal, "fresh index count differs from N^F");

  std::vector<PcQuery> queries(n_servers);
  for (std::uint32_t n = 0; n < n_servers; ++n) {
    queries[n].server = n;
    for (std::uint32_t k = 1; k <= functions; ++k) {
      for (const auto& ls : layout[n][k]) {
        SumSpec s;
        s.level = k;
        s.subset = ls.subset;
        s.origin = ls.origin;
        s.side = ls.side;
        s.raw_signs = ls.sign;
        for (std::size_t i = 0; i < ls.subset.size(); ++i) {
          const std::uint32_t logical = ls.index[i];
          s.terms.push_back(Term{ls.subset[i], rnd.perm[logical],
                                 static_cast<std::int8_t>(ls.sign[i] * rnd.signs[logical])});
        }
        queries[n].sums.push_back(std::move(s));
      }
    }
  }
  return queries;
}

std::vector<PcQuery> build_share_queries(std::uint32_t servers, std::uint64_t symbols) {
  PCSI_CHECK(servers >= 1 && symbols % servers == 0, ErrorCode::kBadParams,
             "message length must split evenly across servers");
  const std::uint64_t share = symbols / servers;
  std::vector<PcQuery> queries(servers);
  for (std::uint32_t n = 0; n < servers; ++n) {
    queries[n].server = n;
    for (std::uint64_t p = n * share; p < (n + 1) * share; ++p) {
      SumSpec s;
      s.level = 1;
      s.subset = {0};
      s.terms = {Term{0, static_cast<std::uint32_t>(p), 1}};
      s.origin = SumOrigin::kDemandBearing;
      s.raw_signs = {1};
      queries[n].sums.push_back(std::move(s));
    }
  }
  return queries;
}

MatrixFq dependency_matrix(const FunctionTable& table, const PrimeField& field) {
  std::vector<FeVec> rows;
  for (const auto& fn : table.functions) rows.push_back(fn.combo);
  const MatrixFq v = MatrixFq::from_rows(rows);
  auto basis = mat_nullspace(v.transposed(), field);
  if (basis.empty()) return MatrixFq(0, table.size());
  return MatrixFq::from_rows(basis);
}

FeVec evaluate_sums(const PcQuery& query, const std::vector<FeVec>& functions,
                    const PrimeField& field) {
  FeVec out;
  out.reserve(query.sums.size());
  for (const auto& s : query.sums) {
    Fe acc;
    for (const auto& t : s.terms) {
      PCSI_CHECK(t.function < functions.size(), ErrorCode::kMalformedQuery,
                 "function index out of range");
      const auto& z = functions[t.function];
      PCSI_CHECK(t.position < z.size(), ErrorCode::kMalformedQuery,
                 "symbol position " + std::to_string(t.position) + " out of range");
      acc = t.sign >= 0 ? field.add(acc, z[t.position]) : field.sub(acc, z[t.position]);
    }
    out.push_back(acc);
  }
  return out;
}

SparseVec sum_functional(const SumSpec& sum, const FunctionTable& table, const PrimeField& field,
                         std::span<const std::uint32_t> block_of) {
  const std::uint32_t r = table.super_messages;
  std::vector<SparseEntry> entries;
  entries.reserve(sum.terms.size() * r);
  for (const auto& t : sum.terms) {
    const auto& combo = table.functions.at(t.function).combo;
    const std::uint32_t block = block_of.empty() ? t.position : block_of[t.position];
    for (std::uint32_t c = 0; c < r; ++c) {
      if (combo[c].is_zero()) continue;
      entries.push_back({block * r + c, t.sign >= 0 ? combo[c] : field.neg(combo[c])});
    }
  }
  return make_sparse(std::move(entries), field);
}

namespace {

std::uint64_t query_symbols(std::span<const PcQuery> queries) {
  std::uint64_t m = 0;
  for (const auto& q : queries)
    for (const auto& s : q.sums)
      for (const auto& t : s.terms) m = std::max<std::uint64_t>(m, t.position + 1ull);
  return m;
}

}  // namespace

KeepMask plan_keep(const PcQuery& own, std::span<const PcQuery> others, const FunctionTable& table,
                   const PrimeField& field, std::span<const std::uint32_t> block_of) {
  std::uint64_t m = std::max(query_symbols({&own, 1}), query_symbols(others));
  if (!block_of.empty()) m = std::max<std::uint64_t>(m, block_of.size());
  SparseEchelon basis(field, m * table.super_messages);

  KeepMask keep(own.sums.size(), 0);
  std::uint32_t top = own.max_level();
  for (const auto& o : others) top = std::max(top, o.max_level());
  for (std::uint32_t k = 1; k <= top; ++k) {
    for (const auto& o : others) {
      for (const auto& s : o.sums) {
        if (s.level == k - 1) basis.insert(sum_functional(s, table, field, block_of));
      }
    }
    for (std::size_t i = 0; i < own.sums.size(); ++i) {
      if (own.sums[i].level != k) continue;
      keep[i] = basis.insert(sum_functional(own.sums[i], table, field, block_of)) ? 1 : 0;
    }
  }
  return keep;
}

std::vector<KeepMask> plan_reduction(std::span<const PcQuery> queries, const FunctionTable& table,
                                     const PrimeField& field,
                                     std::span<const std::uint32_t> block_of) {
  std::vector<KeepMask> out;
  out.reserve(queries.size());
  for (std::size_t n = 0; n < queries.size(); ++n) {
    std::vector<PcQuery> others;
    for (std::size_t o = 0; o < queries.size(); ++o)
      if (o != n) others.push_back(queries[o]);
    out.push_back(plan_keep(queries[n], others, table, field, block_of));
  }
  return out;
}

ReducedAnswer apply_keep(const PcQuery& query, std::span<const Fe> values, const KeepMask& keep) {
  PCSI_CHECK(values.size() == query.sums.size(), ErrorCode::kDimensionMismatch,
             "one value per queried sum is required");
  PCSI_CHECK(keep.empty() || keep.size() == query.sums.size(), ErrorCode::kMalformedQuery,
             "keep mask length differs from sum count");
  ReducedAnswer ans;
  ans.server = query.server;
  for (std::uint32_t i = 0; i < values.size(); ++i) {
    if (keep.empty() || keep[i]) ans.entries.push_back({i, values[i]});
  }
  return ans;
}

ReducedAnswer reduce_answer(const PcQuery& query, std::span<const Fe> values,
                            const FunctionTable& table, std::span<const PcQuery> others,
                            const PrimeField& field) {
  return apply_keep(query, values, plan_keep(query, others, table, field));
}

FeVec decode(std::span<const ReducedAnswer> answers, std::span<const PcQuery> queries,
             const FunctionTable& table, std::uint32_t f_star, const PcRandomness& rnd,
             const PrimeField& field) {
  PCSI_CHECK(answers.size() == queries.size(), ErrorCode::kDimensionMismatch,
             "one answer per server is required");
  PCSI_CHECK(f_star < table.size(), ErrorCode::kBadParams, "demanded function out of range");
  const std::uint64_t m = rnd.symbols();
  const std::uint32_t r = table.super_messages;
  // Columns follow the logical order, which keeps elimination fill-in low.
  const auto block_of = rnd.inverse_perm();

  SparseEchelon system(field, m * r);
  for (std::size_t n = 0; n < answers.size(); ++n) {
    const auto& q = queries[n];
    for (const auto& e : answers[n].entries) {
      PCSI_CHECK(e.index < q.sums.size(), ErrorCode::kDecodeFailure,
                 "answer refers to a sum that was not queried");
      system.insert(sum_functional(q.sums[e.index], table, field, block_of), e.value);
    }
  }
  PCSI_CHECK(system.inconsistencies() == 0, ErrorCode::kDecodeFailure,
             "server answers are mutually inconsistent");

  const auto& combo = table.functions[f_star].combo;
  FeVec z(m);
  for (std::uint32_t p = 0; p < m; ++p) {
    std::vector<SparseEntry> target;
    for (std::uint32_t c = 0; c < r; ++c) {
      if (!combo[c].is_zero()) target.push_back({block_of[p] * r + c, combo[c]});
    }
    auto value = system.evaluate(make_sparse(std::move(target), field));
    PCSI_CHECK(value.has_value(), ErrorCode::kDecodeFailure,
               "symbol " + std::to_string(p) + " of the demanded function is not determined");
    z[p] = *value;
  }
  return z;
}

std::uint64_t expected_transmitted_per_server(std::uint32_t servers, std::uint32_t super_messages,
                                              std::uint64_t symbols) {
  std::uint64_t total = 0;
  std::uint64_t denom = 1;
  for (std::uint32_t k = 1; k <= super_messages; ++k) {
    denom *= servers;
    total += symbols / denom;
  }
  return total;
}

}  // namespace pcsi
