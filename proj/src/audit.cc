#include "pcsi/audit.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "pcsi/error.h"
#include "pcsi/pc_engine.h"
#include "pcsi/rng.h"

namespace pcsi {

namespace {

using Counts = std::map<std::vector<std::uint16_t>, std::uint64_t>;

std::string fnv_digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string counts_digest(const Counts& counts) {
  std::ostringstream os;
  for (const auto& [key, n] : counts) {
    for (auto v : key) os << v << ',';
    os << '=' << n << ';';
  }
  return fnv_digest(os.str()) + " support=" + std::to_string(counts.size());
}

Rational exact_tv(const Counts& a, const Counts& b) {
  std::int64_t ta = 0;
  std::int64_t tb = 0;
  for (const auto& [k, n] : a) ta += static_cast<std::int64_t>(n);
  for (const auto& [k, n] : b) tb += static_cast<std::int64_t>(n);
  std::int64_t diff = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    std::int64_t na = 0;
    std::int64_t nb = 0;
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      na = static_cast<std::int64_t>((ia++)->second);
    } else if (ia == a.end() || ib->first < ia->first) {
      nb = static_cast<std::int64_t>((ib++)->second);
    } else {
      na = static_cast<std::int64_t>((ia++)->second);
      nb = static_cast<std::int64_t>((ib++)->second);
    }
    diff += std::abs(na * tb - nb * ta);
  }
  return Rational(diff, 2 * ta * tb);
}

// Advances a mixed-radix counter over nonzero field elements; false on wrap.
bool next_nonzero(FeVec& v, const PrimeField& field) {
  for (auto& x : v) {
    if (x.value() + 1u < field.modulus()) {
      x = Fe(static_cast<std::uint16_t>(x.value() + 1));
      return true;
    }
    x = Fe(1);
  }
  return false;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (out > cap / std::max<std::uint64_t>(base, 1)) return cap + 1;
    out *= base;
  }
  return out;
}

std::vector<std::pair<std::uint32_t, IndexSet>> demand_side_pairs(const ProtocolParams& params) {
  std::vector<std::pair<std::uint32_t, IndexSet>> out;
  for (const auto& s : lex_subsets(params.messages, params.side_size)) {
    for (std::uint32_t w = 0; w < params.messages; ++w) {
      const bool inside = std::binary_search(s.begin(), s.end(), w);
      if (inside == (params.model == Model::kII)) out.emplace_back(w, s);
    }
  }
  return out;
}

std::string shape_fingerprint(const PcQuery& query, const KeepMask& keep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < query.sums.size(); ++i) {
    const auto& s = query.sums[i];
    const auto plus = std::count(s.raw_signs.begin(), s.raw_signs.end(), 1);
    os << 'L' << s.level << '{';
    for (auto f : s.subset) os << f << ',';
    os << "}+" << plus << '-' << (static_cast<std::int64_t>(s.raw_signs.size()) - plus) << 'k'
       << int(keep.empty() ? 1 : keep[i]) << ';';
  }
  return os.str();
}

}  // namespace

PrivacyReport beta_distribution_audit(Model model, std::uint32_t messages, std::uint32_t side_size,
                                      std::uint32_t prime, const FeVec& omega) {
  const ProtocolParams params = ProtocolParams::make(model, 1, messages, side_size, prime);
  const PrimeField field = params.field();
  const auto pairs = demand_side_pairs(params);
  const std::uint32_t free_count = messages - side_size;
  const std::uint64_t secrets = model == Model::kII ? prime - 2 : 1;
  const std::uint64_t per_pair =
      checked_pow(prime - 1, messages, kMaxAuditStates) * secrets;
  PCSI_CHECK(per_pair <= kMaxAuditStates &&
                 per_pair * pairs.size() <= kMaxAuditStates,
             ErrorCode::kTooLarge, "enumeration exceeds the state guard");

  const Database zero(field, messages, 1, FeVec(messages));
  PrivacyReport report;
  report.audit = "beta_distribution";
  report.exact = true;

  std::vector<Counts> dists;
  for (const auto& [w, s] : pairs) {
    Counts counts;
    FeVec c(side_size, Fe(1));
    do {
      const SideInstance inst = make_instance(params, zero, w, s, c);
      FeVec free_beta(free_count, Fe(1));
      do {
        for (std::uint32_t sec = 1; sec < prime; ++sec) {
          EncodingRandomness rnd{free_beta, Fe(0)};
          if (model == Model::kII) {
            if (Fe(static_cast<std::uint16_t>(sec)) == inst.coeff_of(w)) continue;
            rnd.secret = Fe(static_cast<std::uint16_t>(sec));
          } else if (sec > 1) {
            break;
          }
          const EncodingVectors enc = build_encoding(inst, params, omega, rnd);
          std::vector<std::uint16_t> key;
          for (const auto& row : enc.u)
            for (Fe x : row) key.push_back(x.value());
          ++counts[key];
          ++report.count;
        }
      } while (next_nonzero(free_beta, field));
    } while (next_nonzero(c, field));
    std::ostringstream label;
    label << "W=" << w << " S={";
    for (std::size_t i = 0; i < s.size(); ++i) label << (i ? "," : "") << s[i];
    label << '}';
    report.fingerprints.push_back({label.str(), counts_digest(counts)});
    dists.push_back(std::move(counts));
  }
  for (std::size_t a = 0; a < dists.size(); ++a) {
    for (std::size_t b = a + 1; b < dists.size(); ++b) {
      const Rational tv = exact_tv(dists[a], dists[b]);
      if (tv > report.max_tv_exact) report.max_tv_exact = tv;
    }
  }
  report.max_tv = boost::rational_cast<double>(report.max_tv_exact);
  report.pass = report.max_tv_exact == Rational(0);
  if (!report.pass) report.failures.push_back("u-vector distribution depends on (W,S)");
  return report;
}

ProtocolParams shape_audit_params(std::uint32_t servers, std::uint32_t functions) {
  PCSI_CHECK(functions >= 2, ErrorCode::kBadParams, "need at least two functions");
  for (std::uint32_t k = 2; k <= functions + 1; ++k) {
    for (std::int64_t m = static_cast<std::int64_t>(k) - 2; m >= 0; --m) {
      if (binomial(k, static_cast<std::uint32_t>(m) + 1) == functions) {
        return ProtocolParams::make(Model::kI, servers, k, static_cast<std::uint32_t>(m),
                                    smallest_prime_for(k));
      }
    }
  }
  throw Error(ErrorCode::kBadParams, "no model I parameters with this function count");
}

PrivacyReport query_shape_audit(std::uint32_t servers, std::uint32_t functions,
                                std::uint64_t samples, std::uint64_t seed, double threshold,
                                std::uint32_t tables) {
  PCSI_CHECK(servers >= 2, ErrorCode::kBadParams, "query shape audit needs at least two servers");
  const ProtocolParams params = shape_audit_params(servers, functions);
  const PrimeField field = params.field();
  const std::uint64_t m = params.symbols;
  const Database zero(field, params.messages, m, FeVec(params.messages * m));

  PrivacyReport report;
  report.audit = "query_shape";
  report.seed = seed;
  report.threshold = threshold;

  for (std::uint32_t t = 0; t < tables; ++t) {
    const SideInstance inst = sample_instance(params, zero, derive_seed(seed, 3 * t));
    const EncodingVectors enc = build_encoding(inst, params, default_omega(params.messages, field),
                                               derive_seed(seed, 3 * t + 1));
    const FunctionTable table = derive_function_table(enc, params);
    const PcRandomness rnd = sample_pc_randomness(m, derive_seed(seed, 3 * t + 2));
    const auto block_of = rnd.inverse_perm();
    std::vector<std::string> reference;
    for (std::uint32_t fs = 0; fs < functions; ++fs) {
      const auto queries = build_pc_queries(servers, functions, fs, rnd);
      const auto keeps = plan_reduction(queries, table, field, block_of);
      std::vector<std::string> prints;
      for (std::uint32_t n = 0; n < servers; ++n) {
        prints.push_back(shape_fingerprint(queries[n], keeps[n]));
        report.fingerprints.push_back({"draw " + std::to_string(t) + " f*=" + std::to_string(fs) +
                                           " server " + std::to_string(n),
                                       fnv_digest(prints.back())});
      }
      if (fs == 0) {
        reference = prints;
      } else if (prints != reference) {
        report.shapes_identical = false;
        report.failures.push_back("draw " + std::to_string(t) + ": shape for f*=" +
                                  std::to_string(fs) + " differs from f*=0");
      }
    }
  }

  // hist[f*][slot][position]
  std::vector<std::vector<std::vector<std::uint64_t>>> hist(functions);
  for (std::uint32_t fs = 0; fs < functions; ++fs) {
    const std::uint64_t stream = derive_seed(seed, 1'000'003ull + fs);
    for (std::uint64_t s = 0; s < samples; ++s) {
      const PcRandomness rnd = sample_pc_randomness(m, derive_seed(stream, s));
      const auto queries = build_pc_queries(servers, functions, fs, rnd);
      const auto& sums = queries[0].sums;
      if (hist[fs].empty()) hist[fs].assign(sums.size(), std::vector<std::uint64_t>(m, 0));
      for (std::size_t slot = 0; slot < sums.size(); ++slot) {
        std::uint32_t lo = static_cast<std::uint32_t>(m);
        for (const auto& term : sums[slot].terms) lo = std::min(lo, term.position);
        ++hist[fs][slot][lo];
      }
    }
  }
  report.count = samples * functions;
  if (samples > 0) {
    for (std::uint32_t a = 0; a < functions; ++a) {
      for (std::uint32_t b = a + 1; b < functions; ++b) {
        for (std::size_t slot = 0; slot < hist[a].size(); ++slot) {
          double tv = 0.0;
          for (std::uint64_t p = 0; p < m; ++p) {
            tv += std::abs(static_cast<double>(hist[a][slot][p]) -
                           static_cast<double>(hist[b][slot][p]));
          }
          report.max_tv = std::max(report.max_tv, tv / (2.0 * static_cast<double>(samples)));
        }
      }
    }
  }
  if (report.max_tv >= threshold) {
    report.failures.push_back("sampled TV estimate above threshold");
  }
  report.pass = report.shapes_identical && report.max_tv < threshold;
  return report;
}

std::vector<InstanceChoice> enumerate_instances(const ProtocolParams& params) {
  params.validate();
  const PrimeField field = params.field();
  std::vector<InstanceChoice> out;
  for (const auto& [w, s] : demand_side_pairs(params)) {
    FeVec c(params.side_size, Fe(1));
    do {
      out.push_back({w, s, c});
    } while (next_nonzero(c, field));
  }
  return out;
}

RecoverabilityReport exhaustive_recoverability(const ProtocolParams& params,
                                               const std::vector<std::uint64_t>& db_seeds,
                                               std::uint64_t max_runs) {
  params.validate();
  const PrimeField field = params.field();
  const std::uint64_t per_db = checked_pow(params.prime - 1, params.side_size, max_runs) *
                               demand_side_pairs(params).size();
  PCSI_CHECK(per_db * db_seeds.size() <= max_runs, ErrorCode::kTooLarge,
             "too many runs for an exhaustive check");
  const auto instances = enumerate_instances(params);

  RecoverabilityReport report;
  report.params = params;
  report.db_seeds = db_seeds;
  report.capacity = capacity(params.model, params.servers, params.messages, params.side_size);
  for (std::uint64_t db_seed : db_seeds) {
    const Database db = Database::generate(field, params.messages, params.symbols, db_seed);
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& choice = instances[i];
      ++report.runs;
      try {
        const SideInstance inst = make_instance(params, db, choice.demand, choice.side, choice.coeffs);
        const RunResult res = run_protocol(params, db, inst, derive_seed(db_seed, i));
        const auto want = db.message(choice.demand);
        if (!std::equal(res.demand.begin(), res.demand.end(), want.begin(), want.end())) {
          ++report.failures;
          if (report.notes.size() < 8) {
            report.notes.push_back("db seed " + std::to_string(db_seed) + " instance " +
                                   std::to_string(i) + ": wrong demand");
          }
        }
        if (res.transcript.rate != report.capacity) ++report.rate_mismatches;
        if (res.transcript.fallback) ++report.fallbacks;
      } catch (const std::exception& e) {
        ++report.failures;
        if (report.notes.size() < 8) report.notes.push_back(e.what());
      }
    }
  }
  report.pass = report.failures == 0 && report.rate_mismatches == 0 && report.fallbacks == 0;
  return report;
}

std::uint32_t smallest_prime_for(std::uint32_t messages) {
  std::uint32_t q = std::max<std::uint32_t>(messages, 3);
  while (!is_prime(q)) ++q;
  return q;
}

std::vector<ProtocolParams> default_rate_grid(const std::vector<std::uint32_t>& servers,
                                              std::uint32_t max_messages,
                                              std::uint64_t max_symbols) {
  std::vector<ProtocolParams> cells;
  for (std::uint32_t n : servers) {
    for (std::uint32_t k = 1; k <= max_messages; ++k) {
      for (Model model : {Model::kI, Model::kII}) {
        const std::uint32_t lo = model == Model::kI ? 0 : 2;
        const std::uint32_t hi = model == Model::kI ? k - 1 : k;
        for (std::uint32_t m = lo; m <= hi && m <= k; ++m) {
          const std::uint64_t functions =
              model == Model::kI ? binomial(k, m + 1) : binomial(k, m);
          if (checked_pow(n, functions, max_symbols) > max_symbols) continue;
          cells.push_back(ProtocolParams::make(model, n, k, m, smallest_prime_for(k)));
        }
      }
    }
  }
  return cells;
}

std::vector<RateCell> rate_grid(const std::vector<ProtocolParams>& cells, std::uint64_t seed,
                                std::uint32_t seeds_per_cell) {
  std::vector<RateCell> out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    RateCell cell;
    cell.params = cells[c];
    cell.capacity = capacity(cell.params.model, cell.params.servers, cell.params.messages,
                             cell.params.side_size);
    cell.decoded = true;
    try {
      const PrimeField field = cell.params.field();
      for (std::uint32_t s = 0; s < std::max<std::uint32_t>(seeds_per_cell, 1); ++s) {
        const std::uint64_t run_seed = derive_seed(derive_seed(seed, c), s);
        const Database db =
            Database::generate(field, cell.params.messages, cell.params.symbols, run_seed);
        const SideInstance inst = sample_instance(cell.params, db, derive_seed(run_seed, 1));
        const RunResult res = run_protocol(cell.params, db, inst, derive_seed(run_seed, 2));
        const auto want = db.message(inst.demand);
        cell.decoded = cell.decoded &&
                       std::equal(res.demand.begin(), res.demand.end(), want.begin(), want.end());
        cell.fallback = cell.fallback || res.transcript.fallback;
        if (s == 0) {
          cell.measured = res.transcript.rate;
        } else if (res.transcript.rate != cell.measured) {
          cell.error = "rate differs between seeds";
        }
      }
    } catch (const std::exception& e) {
      cell.decoded = false;
      cell.error = e.what();
    }
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace pcsi
