#include "pcsi/report_json.h"

namespace pcsi {

using nlohmann::ordered_json;

std::string rational_string(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

ordered_json params_json(const ProtocolParams& params) {
  ordered_json j;
  j["model"] = static_cast<int>(params.model);
  j["servers"] = params.servers;
  j["messages"] = params.messages;
  j["side_size"] = params.side_size;
  j["prime"] = params.prime;
  j["symbols"] = params.symbols;
  return j;
}

ordered_json transcript_json(const Transcript& t) {
  ordered_json j;
  j["params"] = params_json(t.params);
  j["seed"] = t.seed;
  j["demand"] = t.demand;
  j["side"] = t.side;
  j["demand_function"] = t.demand_function;
  j["super_messages"] = t.super_messages;
  j["function_count"] = t.function_count;
  ordered_json servers = ordered_json::array();
  for (const auto& s : t.servers) {
    ordered_json e;
    e["server"] = s.server;
    e["query_bytes"] = s.query_bytes;
    e["query_sums"] = s.query_sums;
    e["transmitted"] = s.transmitted;
    e["answer_bytes"] = s.answer_bytes;
    servers.push_back(e);
  }
  j["servers"] = servers;
  j["total_transmitted"] = t.total_transmitted;
  j["rate"] = rational_string(t.rate);
  j["capacity"] = rational_string(t.capacity);
  j["rate_matches_capacity"] = t.rate_matches_capacity();
  j["fallback"] = t.fallback;
  std::vector<std::uint16_t> decoded;
  for (Fe x : t.decoded) decoded.push_back(x.value());
  j["decoded"] = decoded;
  return j;
}

ordered_json privacy_json(const PrivacyReport& r) {
  ordered_json j;
  j["audit"] = r.audit;
  j["seed"] = r.seed;
  j["exact"] = r.exact;
  j["count"] = r.count;
  j["shapes_identical"] = r.shapes_identical;
  if (r.exact) j["max_tv_exact"] = rational_string(r.max_tv_exact);
  j["max_tv"] = r.max_tv;
  if (!r.exact) j["threshold"] = r.threshold;
  ordered_json prints = ordered_json::array();
  for (const auto& f : r.fingerprints) prints.push_back({{"label", f.label}, {"digest", f.digest}});
  j["fingerprints"] = prints;
  j["failures"] = r.failures;
  j["pass"] = r.pass;
  return j;
}

ordered_json recoverability_json(const RecoverabilityReport& r) {
  ordered_json j;
  j["params"] = params_json(r.params);
  j["db_seeds"] = r.db_seeds;
  j["runs"] = r.runs;
  j["failures"] = r.failures;
  j["rate_mismatches"] = r.rate_mismatches;
  j["fallbacks"] = r.fallbacks;
  j["capacity"] = rational_string(r.capacity);
  j["notes"] = r.notes;
  j["pass"] = r.pass;
  return j;
}

ordered_json rate_grid_json(const std::vector<RateCell>& cells) {
  ordered_json rows = ordered_json::array();
  bool all_ok = true;
  for (const auto& c : cells) {
    ordered_json e = params_json(c.params);
    e["measured"] = rational_string(c.measured);
    e["capacity"] = rational_string(c.capacity);
    e["equal"] = c.measured == c.capacity;
    e["decoded"] = c.decoded;
    e["fallback"] = c.fallback;
    if (!c.error.empty()) e["error"] = c.error;
    rows.push_back(e);
    all_ok = all_ok && c.ok();
  }
  ordered_json j;
  j["cells"] = rows;
  j["pass"] = all_ok;
  return j;
}

}  // namespace pcsi
